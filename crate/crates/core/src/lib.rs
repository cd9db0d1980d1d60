//! Linear-programming approximations of AC power flow.
//!
//! The crate builds LDC and LPAC (hot, warm and cold start) models of a
//! [`PowerNetwork`], solves them with a bundled simplex, and compares the
//! results against a Newton-Raphson AC solution. Two applications sit on
//! top: load restoration after line outages and capacitor placement.

pub mod ac;
pub mod capacitor;
pub mod case_io;
pub mod error;
pub mod evaluation;
pub mod lp;
pub mod models;
pub mod network;
pub mod pwl;
pub mod restoration;

pub use ac::{solve_ac, AcSolution, SolverOptions, Start};
pub use error::*;
pub use network::{
    build_ybus, line_coefficients, Bus, BusKind, Complex, Generator, LineRecord, PowerNetwork,
};
pub use pwl::PwlCosine;
