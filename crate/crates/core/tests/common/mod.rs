#![allow(dead_code)]

pub mod random;
pub mod simplex;

use std::path::PathBuf;

use lpac::case_io::parse_case;
use lpac::PowerNetwork;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

/// Load a benchmark, or `None` when the case files have not been fetched.
pub fn load(file: &str) -> Option<PowerNetwork> {
    let path = data_dir().join("cases").join(format!("{file}.m"));
    let text = std::fs::read_to_string(&path).ok()?;
    Some(parse_case(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display())))
}

/// Frozen reference AC solution as `(bus id, |V|, angle rad)`.
pub fn reference(file: &str) -> Option<Vec<(usize, f64, f64)>> {
    let path = data_dir().join("reference").join(format!("{file}.csv"));
    let text = std::fs::read_to_string(path).ok()?;
    Some(
        text.lines()
            .skip(1)
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                (
                    f[0].parse().unwrap(),
                    f[1].parse().unwrap(),
                    f[2].parse().unwrap(),
                )
            })
            .collect(),
    )
}

#[allow(unused_imports)]
pub use lpac::case_io::BENCHMARKS;
