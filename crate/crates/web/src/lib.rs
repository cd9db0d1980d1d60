//! Browser bindings: the cosine approximation, model accuracy on a pasted
//! case, and load restoration after chosen line outages. Every function
//! returns a JSON string.

use lpac::case_io::parse_case;
use lpac::evaluation::{compare, Quantity};
use lpac::models::{build, ModelSpec};
use lpac::restoration::{restore, RestorationInstance, RestorationOptions, Variant};
use lpac::{solve_ac, PowerNetwork, PwlCosine, SolverOptions};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// The IEEE 14-bus case, preloaded into the page.
#[wasm_bindgen]
pub fn ieee14() -> String {
    include_str!("../../../data/cases/case14.m").to_string()
}

#[derive(Serialize)]
struct Curve {
    points: Vec<f64>,
    x: Vec<f64>,
    cos: Vec<f64>,
    envelope: Vec<f64>,
    chord: Vec<f64>,
    max_gap: f64,
}

/// Cosine, tangent envelope and chord sampled over `(-pi/3, pi/3)`.
#[wasm_bindgen]
pub fn cosine_curve(segments: usize, samples: usize) -> Result<String, String> {
    let pwl = PwlCosine::standard(segments).map_err(|e| e.to_string())?;
    let n = samples.max(2);
    let x: Vec<f64> = (0..n)
        .map(|i| pwl.lower + (pwl.upper - pwl.lower) * i as f64 / (n - 1) as f64)
        .collect();
    let envelope: Vec<f64> = x.iter().map(|&v| pwl.envelope_unchecked(v)).collect();
    let cos: Vec<f64> = x.iter().map(|v| v.cos()).collect();
    let max_gap = envelope
        .iter()
        .zip(&cos)
        .map(|(e, c)| e - c)
        .fold(0.0, f64::max);
    json(&Curve {
        chord: x.iter().map(|&v| pwl.chord.at(v)).collect(),
        points: pwl.points.clone(),
        x,
        cos,
        envelope,
        max_gap,
    })
}

fn parse(text: &str) -> Result<PowerNetwork, String> {
    parse_case(text).map_err(|e| e.to_string())
}

fn json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Accuracy {
    model: String,
    quantity: &'static str,
    corr: f64,
    mean_abs: f64,
    max_abs: f64,
}

#[derive(Serialize)]
struct BusRow {
    id: usize,
    ac_vm: f64,
    ac_va: f64,
    /// `(vm, va)` per model, in the order of `models`.
    linear: Vec<(f64, f64)>,
}

#[derive(Serialize)]
struct Comparison {
    iterations: usize,
    models: Vec<String>,
    accuracy: Vec<Accuracy>,
    buses: Vec<BusRow>,
}

/// Solve the AC power flow and the LDC, cold and warm models on a
/// MATPOWER case, and report how close each model gets.
#[wasm_bindgen]
pub fn compare_case(text: &str, segments: usize) -> Result<String, String> {
    let net = parse(text)?;
    let ac = solve_ac(&net, &SolverOptions::default());
    if !ac.converged {
        return Err("AC power flow did not converge".into());
    }
    let specs = [
        ModelSpec::ldc(),
        ModelSpec::cold().segments(segments),
        ModelSpec::warm(ac.vm.clone()).segments(segments),
    ];
    let mut out = Comparison {
        iterations: ac.iterations,
        models: Vec::new(),
        accuracy: Vec::new(),
        buses: net
            .buses()
            .iter()
            .enumerate()
            .map(|(i, b)| BusRow {
                id: b.id,
                ac_vm: ac.vm[i],
                ac_va: ac.va[i],
                linear: Vec::new(),
            })
            .collect(),
    };
    for spec in specs {
        let lin = build(&net, &spec)
            .and_then(|m| m.solve())
            .map_err(|e| format!("{}: {e}", spec.label()))?;
        let report = compare("case", &net, &ac, &lin).map_err(|e| e.to_string())?;
        for (q, s) in &report.rows {
            if matches!(q, Quantity::Active | Quantity::Reactive | Quantity::Voltage) {
                out.accuracy.push(Accuracy {
                    model: spec.label(),
                    quantity: q.label(),
                    corr: s.corr,
                    mean_abs: s.mean_abs,
                    max_abs: s.max_abs,
                });
            }
        }
        for (row, (vm, va)) in out.buses.iter_mut().zip(lin.vm.iter().zip(&lin.theta)) {
            row.linear.push((*vm, *va));
        }
        out.models.push(spec.label());
    }
    json(&out)
}

#[derive(Serialize)]
struct Restoration {
    variant: &'static str,
    shed_percent: Option<f64>,
    ac_feasible: Option<bool>,
    error: Option<String>,
}

/// Remove the given lines (0-based, case file order), then maximize served
/// load with each restoration model and check the dispatch with AC.
#[wasm_bindgen]
pub fn restore_case(text: &str, removed: Vec<usize>) -> Result<String, String> {
    let net = parse(text)?;
    if let Some(&k) = removed.iter().find(|&&k| k >= net.lines().len()) {
        return Err(format!(
            "line {k} does not exist; the case has {}",
            net.lines().len()
        ));
    }
    let inst = RestorationInstance::new(&net, &removed).map_err(|e| e.to_string())?;
    let opts = RestorationOptions::default();
    let rows: Vec<Restoration> = Variant::ALL
        .iter()
        .map(|&v| match restore(&inst, v, &opts) {
            Ok(d) => Restoration {
                variant: v.label(),
                shed_percent: Some(d.shed_percent),
                ac_feasible: d.ac_feasible,
                error: None,
            },
            Err(e) => Restoration {
                variant: v.label(),
                shed_percent: None,
                ac_feasible: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    json(&rows)
}
