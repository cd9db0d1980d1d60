#!/usr/bin/env python3
"""Solve each benchmark with PYPOWER and freeze the solved voltages.

Writes data/reference/<case>.csv with columns bus,vm,va_rad. These values
are the independent oracle for the Newton-Raphson solver tests.
"""
import math
import os
import re

import numpy as np
from pypower.api import ppoption, runpf

CASES = [
    "case14", "case_ieee30", "case57", "case118",
    "case24_ieee_rts", "case30", "case39",
]


def parse_matrix(text, name):
    m = re.search(r"mpc\.%s\s*=\s*\[(.*?)\]\s*;" % name, text, re.S)
    rows = []
    for line in m.group(1).split("\n"):
        line = line.split("%")[0]
        for chunk in line.split(";"):
            vals = chunk.split()
            if vals:
                rows.append([float(v) for v in vals])
    return np.array(rows)


def load(path):
    text = open(path).read()
    base = float(re.search(r"mpc\.baseMVA\s*=\s*([0-9.eE+-]+)", text).group(1))
    return {
        "version": "2",
        "baseMVA": base,
        "bus": parse_matrix(text, "bus"),
        "gen": parse_matrix(text, "gen"),
        "branch": parse_matrix(text, "branch"),
    }


def main():
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    out = os.path.join(root, "data", "reference")
    os.makedirs(out, exist_ok=True)
    opt = ppoption(PF_TOL=1e-12, PF_MAX_IT=50, VERBOSE=0, OUT_ALL=0)
    for name in CASES:
        ppc = load(os.path.join(root, "data", "cases", name + ".m"))
        res, ok = runpf(ppc, opt)
        assert ok, name
        with open(os.path.join(out, name + ".csv"), "w") as fh:
            fh.write("bus,vm,va_rad\n")
            for row in res["bus"]:
                fh.write("%d,%.12f,%.12f\n" % (int(row[0]), row[7], math.radians(row[8])))
        print(name, "min vm %.4f" % res["bus"][:, 7].min())


if __name__ == "__main__":
    main()
