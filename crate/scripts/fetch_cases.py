#!/usr/bin/env python3
"""Fetch the public MATPOWER benchmark cases into data/cases/.

The case files ship inside the `matpower` wheel on PyPI (BSD-3-Clause).
"""
import os
import subprocess
import sys
import tempfile
import zipfile

CASES = [
    "case14", "case_ieee30", "case57", "case118",
    "case24_ieee_rts", "case30", "case39",
]

def main():
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    out = os.path.join(root, "data", "cases")
    os.makedirs(out, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.check_call([sys.executable, "-m", "pip", "download", "matpower",
                               "--no-deps", "-q", "-d", tmp])
        wheel = next(f for f in os.listdir(tmp) if f.endswith(".whl"))
        with zipfile.ZipFile(os.path.join(tmp, wheel)) as zf:
            for name in CASES:
                data = zf.read(f"matpower/data/{name}.m")
                with open(os.path.join(out, f"{name}.m"), "wb") as fh:
                    fh.write(data)
                print(f"wrote {name}.m")
            try:
                lic = zf.read("matpower/LICENSE")
                with open(os.path.join(out, "LICENSE-MATPOWER"), "wb") as fh:
                    fh.write(lic)
            except KeyError:
                pass

if __name__ == "__main__":
    main()
