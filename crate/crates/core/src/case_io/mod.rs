//! Case file ingestion and report output.

mod matpower;

pub use matpower::{parse_case, write_case, CaseDocument, Row};
pub mod report;

pub use report::{Format, Table};

/// Benchmark names and the MATPOWER case file stem each one reads.
pub const BENCHMARKS: [(&str, &str); 7] = [
    ("ieee14", "case14"),
    ("ieee30", "case_ieee30"),
    ("ieee57", "case57"),
    ("ieee118", "case118"),
    ("mp24", "case24_ieee_rts"),
    ("mp30", "case30"),
    ("mp39", "case39"),
];

pub fn benchmark_file(name: &str) -> Option<&'static str> {
    BENCHMARKS.iter().find(|(n, _)| *n == name).map(|(_, f)| *f)
}
