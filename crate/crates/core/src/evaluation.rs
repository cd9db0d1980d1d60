//! Accuracy statistics of a linear solution against the AC reference.

use serde::Serialize;

use crate::ac::AcSolution;
use crate::error::EvalError;
use crate::models::LinearSolution;
use crate::network::{BusKind, Complex, PowerNetwork};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantityStats {
    pub corr: f64,
    pub mean_abs: f64,
    pub max_abs: f64,
    /// Error at the arg-max element as a percentage of its AC value.
    pub rel_at_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Quantity {
    /// Directed active line flows, MW.
    Active,
    /// Directed reactive line flows, MVar.
    Reactive,
    /// Non-slack bus angles, rad.
    Angle,
    /// Bus voltage magnitudes, p.u.
    Voltage,
}

impl Quantity {
    pub fn label(self) -> &'static str {
        match self {
            Quantity::Active => "active_mw",
            Quantity::Reactive => "reactive_mvar",
            Quantity::Angle => "angle_rad",
            Quantity::Voltage => "voltage_pu",
        }
    }
}

/// Which directed flows enter the line flow vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum FlowSides {
    /// From-bus end of every line, as in the published tables.
    #[default]
    Forward,
    /// Both ends of every line.
    Both,
}

impl FlowSides {
    pub fn label(self) -> &'static str {
        match self {
            FlowSides::Forward => "forward",
            FlowSides::Both => "both",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracyReport {
    pub benchmark: String,
    pub model: String,
    pub sides: FlowSides,
    /// Present quantities in table order; LDC has no reactive or voltage rows.
    pub rows: Vec<(Quantity, QuantityStats)>,
}

impl AccuracyReport {
    pub fn get(&self, q: Quantity) -> Option<&QuantityStats> {
        self.rows.iter().find(|(k, _)| *k == q).map(|(_, s)| s)
    }
}

pub fn stats(ac: &[f64], approx: &[f64]) -> Result<QuantityStats, EvalError> {
    if ac.len() != approx.len() {
        return Err(EvalError::Dimension {
            what: "compared vectors",
            expected: ac.len(),
            found: approx.len(),
        });
    }
    let n = ac.len();
    if n == 0 {
        return Ok(QuantityStats {
            corr: f64::NAN,
            mean_abs: 0.0,
            max_abs: 0.0,
            rel_at_max: 0.0,
        });
    }
    let mut mean_abs = 0.0;
    let mut arg = 0;
    let mut max_abs = -1.0;
    for (i, (a, b)) in ac.iter().zip(approx).enumerate() {
        let d = (a - b).abs();
        mean_abs += d;
        if d > max_abs {
            max_abs = d;
            arg = i;
        }
    }
    mean_abs /= n as f64;
    let rel_at_max = if max_abs == 0.0 {
        0.0
    } else {
        100.0 * max_abs / ac[arg].abs()
    };
    Ok(QuantityStats {
        corr: pearson(ac, approx),
        mean_abs,
        max_abs,
        rel_at_max,
    })
}

/// Pearson correlation; 1 for identical constant vectors, NaN for any other
/// zero-variance input.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return if x == y { 1.0 } else { f64::NAN };
    }
    (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)
}

fn check(what: &'static str, expected: usize, found: usize) -> Result<(), EvalError> {
    if expected == found {
        Ok(())
    } else {
        Err(EvalError::Dimension {
            what,
            expected,
            found,
        })
    }
}

fn flows(f: &[[(f64, f64); 2]], base: f64, reactive: bool, sides: FlowSides) -> Vec<f64> {
    let ends = match sides {
        FlowSides::Forward => 1,
        FlowSides::Both => 2,
    };
    f.iter()
        .flat_map(|d| {
            d[..ends]
                .iter()
                .map(|&(p, q)| base * if reactive { q } else { p })
        })
        .collect()
}

/// [`compare_with`] over forward flows.
pub fn compare(
    benchmark: &str,
    net: &PowerNetwork,
    ac: &AcSolution,
    lin: &LinearSolution,
) -> Result<AccuracyReport, EvalError> {
    compare_with(benchmark, net, ac, lin, FlowSides::Forward)
}

pub fn compare_with(
    benchmark: &str,
    net: &PowerNetwork,
    ac: &AcSolution,
    lin: &LinearSolution,
    sides: FlowSides,
) -> Result<AccuracyReport, EvalError> {
    let n = net.bus_count();
    check("AC buses", n, ac.vm.len())?;
    check("linear buses", n, lin.theta.len())?;
    check("AC lines", net.lines().len(), ac.flows.len())?;
    check("linear lines", net.lines().len(), lin.flows.len())?;
    let base = net.base_mva();
    let slack = net.slack_index();
    let has_q = lin.reactive;

    let mut rows = vec![(
        Quantity::Active,
        stats(
            &flows(&ac.flows, base, false, sides),
            &flows(&lin.flows, base, false, sides),
        )?,
    )];
    if has_q {
        rows.push((
            Quantity::Reactive,
            stats(
                &flows(&ac.flows, base, true, sides),
                &flows(&lin.flows, base, true, sides),
            )?,
        ));
    }
    let angles = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .enumerate()
            .filter(|&(i, _)| i != slack)
            .map(|(_, a)| *a)
            .collect()
    };
    rows.push((
        Quantity::Angle,
        stats(&angles(&ac.va), &angles(&lin.theta))?,
    ));
    if has_q {
        rows.push((Quantity::Voltage, stats(&ac.vm, &lin.vm)?));
    }
    Ok(AccuracyReport {
        benchmark: benchmark.to_string(),
        model: lin.model.clone(),
        sides,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CumulativeErrorReport {
    /// Sum over lines of `|Re(V_n - V_m)` error|, p.u.
    pub voltage_re: f64,
    /// Sum over lines of `|Im(V_n - V_m)` error|, p.u.
    pub voltage_im: f64,
    /// Sum over buses of `|p_n` error|, MW.
    pub p: f64,
    /// Sum over buses of `|q_n` error|, MVar.
    pub q: f64,
}

pub fn cumulative_errors(
    net: &PowerNetwork,
    ac: &AcSolution,
    lin: &LinearSolution,
) -> Result<CumulativeErrorReport, EvalError> {
    let n = net.bus_count();
    check("AC buses", n, ac.vm.len())?;
    check("linear buses", n, lin.vm.len())?;
    let va = |vm: &[f64], th: &[f64]| -> Vec<Complex> {
        vm.iter()
            .zip(th)
            .map(|(&m, &a)| Complex::from_polar(m, a))
            .collect()
    };
    let v_ac = va(&ac.vm, &ac.va);
    let v_lin = va(&lin.vm, &lin.theta);
    let (mut re, mut im) = (0.0, 0.0);
    for k in 0..net.lines().len() {
        let (f, t) = net.line_ends(k);
        let d = (v_lin[f] - v_lin[t]) - (v_ac[f] - v_ac[t]);
        re += d.re.abs();
        im += d.im.abs();
    }
    let base = net.base_mva();
    let p =
        ac.p.iter()
            .zip(&lin.p)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * base;
    let q =
        ac.q.iter()
            .zip(&lin.q)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * base;
    Ok(CumulativeErrorReport {
        voltage_re: re,
        voltage_im: im,
        p,
        q,
    })
}

/// Percentage of buses whose voltage is held at a set point, slack included.
pub fn pv_ratio(net: &PowerNetwork) -> f64 {
    let g = net
        .buses()
        .iter()
        .filter(|b| b.kind != BusKind::Load)
        .count();
    100.0 * g as f64 / net.bus_count() as f64
}
