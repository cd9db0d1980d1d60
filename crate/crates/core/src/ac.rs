//! Full Newton-Raphson AC power flow in polar coordinates.
//!
//! This is the reference the linear models are measured against, and the
//! feasibility check for restoration dispatches.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::network::{
    build_ybus, line_coefficients, shunt_power, BusKind, Complex, PowerNetwork, YBus,
};

#[derive(Debug, Clone, PartialEq)]
pub enum Start {
    /// `|V| = 1` (set point on PV and slack buses), `theta = 0`.
    Flat,
    Given {
        vm: Vec<f64>,
        va: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub start: Start,
    /// Switch PV buses to PQ when their reactive output leaves its limits.
    pub enforce_q_limits: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 50,
            start: Start::Flat,
            enforce_q_limits: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AcSolution {
    pub vm: Vec<f64>,
    pub va: Vec<f64>,
    /// Net injection per bus (generation minus load, shunts excluded).
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    /// `[forward, reverse]` `(p, q)` per line.
    pub flows: Vec<[(f64, f64); 2]>,
    pub converged: bool,
    pub iterations: usize,
    pub max_residual: f64,
    pub diagnostic: Option<String>,
}

impl AcSolution {
    /// Total active losses, the sum of both directed flows over all lines.
    pub fn losses(&self) -> f64 {
        self.flows.iter().map(|[f, r]| f.0 + r.0).sum()
    }
}

pub fn solve_ac(net: &PowerNetwork, opts: &SolverOptions) -> AcSolution {
    let ybus = build_ybus(net);
    let n = net.bus_count();
    let mut kinds: Vec<BusKind> = net.buses().iter().map(|b| b.kind).collect();
    let mut sched = net.scheduled_injection();

    let (mut vm, mut va) = match &opts.start {
        Start::Flat => (vec![1.0; n], vec![0.0; n]),
        Start::Given { vm, va } if vm.len() == n && va.len() == n => (vm.clone(), va.clone()),
        Start::Given { .. } => {
            return failed(net, n, "start vector length does not match bus count");
        }
    };
    for (i, bus) in net.buses().iter().enumerate() {
        if bus.kind != BusKind::Load {
            vm[i] = bus.voltage_setpoint;
        }
    }
    let slack = net.slack_index();
    if matches!(opts.start, Start::Flat) {
        va[slack] = 0.0;
    }

    let mut total_iterations = 0;
    loop {
        let run = newton(
            &ybus,
            &kinds,
            &sched,
            &mut vm,
            &mut va,
            opts,
            total_iterations,
        );
        total_iterations = run.iterations;
        if !run.converged || !opts.enforce_q_limits {
            return finish(net, &ybus, vm, va, run);
        }
        // PV -> PQ switching on reactive limit violations.
        let s = ybus.injections(&polar(&vm, &va));
        let mut switched = false;
        let mut limits: Vec<(Option<f64>, Option<f64>)> = vec![(Some(0.0), Some(0.0)); n];
        for gen in net.generators() {
            let i = net.bus_index(gen.bus).unwrap();
            let (lo, hi) = &mut limits[i];
            *lo = lo.zip(gen.q_min).map(|(a, b)| a + b);
            *hi = hi.zip(gen.q_max).map(|(a, b)| a + b);
        }
        for i in 0..n {
            if kinds[i] != BusKind::Generator {
                continue;
            }
            let qg = s[i].im + net.buses()[i].load.im;
            let (lo, hi) = limits[i];
            let fixed = match (lo, hi) {
                (_, Some(h)) if qg > h + opts.tolerance => Some(h),
                (Some(l), _) if qg < l - opts.tolerance => Some(l),
                _ => None,
            };
            if let Some(q) = fixed {
                kinds[i] = BusKind::Load;
                sched[i].im = q - net.buses()[i].load.im;
                switched = true;
            }
        }
        if !switched {
            return finish(net, &ybus, vm, va, run);
        }
    }
}

struct Run {
    converged: bool,
    iterations: usize,
    max_residual: f64,
    diagnostic: Option<String>,
}

fn newton(
    ybus: &YBus,
    kinds: &[BusKind],
    sched: &[Complex],
    vm: &mut [f64],
    va: &mut [f64],
    opts: &SolverOptions,
    start_iter: usize,
) -> Run {
    let n = kinds.len();
    let pvpq: Vec<usize> = (0..n).filter(|&i| kinds[i] != BusKind::Slack).collect();
    let pq: Vec<usize> = (0..n).filter(|&i| kinds[i] == BusKind::Load).collect();
    let npvpq = pvpq.len();
    let dim = npvpq + pq.len();

    let mismatch = |vm: &[f64], va: &[f64]| -> DVector<f64> {
        let s = ybus.injections(&polar(vm, va));
        let mut f = DVector::zeros(dim);
        for (r, &i) in pvpq.iter().enumerate() {
            f[r] = s[i].re - sched[i].re;
        }
        for (r, &i) in pq.iter().enumerate() {
            f[npvpq + r] = s[i].im - sched[i].im;
        }
        f
    };

    let mut f = mismatch(vm, va);
    let mut norm = f.amax();
    let mut iterations = start_iter;
    loop {
        if !norm.is_finite() {
            return Run {
                converged: false,
                iterations,
                max_residual: norm,
                diagnostic: Some("mismatch diverged".into()),
            };
        }
        if norm <= opts.tolerance {
            return Run {
                converged: true,
                iterations,
                max_residual: norm,
                diagnostic: None,
            };
        }
        if iterations >= opts.max_iterations {
            return Run {
                converged: false,
                iterations,
                max_residual: norm,
                diagnostic: Some(format!(
                    "no convergence in {} iterations",
                    opts.max_iterations
                )),
            };
        }
        let jac = jacobian(ybus, vm, va, &pvpq, &pq);
        let Some(dx) = jac.lu().solve(&(-&f)) else {
            return Run {
                converged: false,
                iterations,
                max_residual: norm,
                diagnostic: Some("singular Jacobian".into()),
            };
        };
        for (r, &i) in pvpq.iter().enumerate() {
            va[i] += dx[r];
        }
        for (r, &i) in pq.iter().enumerate() {
            vm[i] += dx[npvpq + r];
        }
        iterations += 1;
        f = mismatch(vm, va);
        norm = f.amax();
    }
}

/// Polar Jacobian of the injection mismatch with respect to
/// `(theta[pvpq], |V|[pq])`.
fn jacobian(ybus: &YBus, vm: &[f64], va: &[f64], pvpq: &[usize], pq: &[usize]) -> DMatrix<f64> {
    let n = vm.len();
    let v = polar(vm, va);
    let y = &ybus.matrix;
    let current: Vec<Complex> = (0..n)
        .map(|i| (0..n).map(|j| y[(i, j)] * v[j]).sum())
        .collect();
    let unit: Vec<Complex> = v.iter().zip(vm).map(|(v, m)| v / m).collect();
    let i_unit = Complex::new(0.0, 1.0);

    // dS/dVa and dS/dVm, dense.
    let mut ds_dva = DMatrix::from_element(n, n, Complex::new(0.0, 0.0));
    let mut ds_dvm = DMatrix::from_element(n, n, Complex::new(0.0, 0.0));
    for i in 0..n {
        for j in 0..n {
            let yij = y[(i, j)];
            if yij.norm_sqr() == 0.0 && i != j {
                continue;
            }
            let mut a = -(yij * v[j]).conj() * v[i];
            let mut m = v[i] * (yij * unit[j]).conj();
            if i == j {
                a += v[i] * current[i].conj();
                m += current[i].conj() * unit[i];
            }
            ds_dva[(i, j)] = i_unit * a;
            ds_dvm[(i, j)] = m;
        }
    }

    let npvpq = pvpq.len();
    let dim = npvpq + pq.len();
    let mut jac = DMatrix::zeros(dim, dim);
    for (r, &i) in pvpq.iter().enumerate() {
        for (c, &j) in pvpq.iter().enumerate() {
            jac[(r, c)] = ds_dva[(i, j)].re;
        }
        for (c, &j) in pq.iter().enumerate() {
            jac[(r, npvpq + c)] = ds_dvm[(i, j)].re;
        }
    }
    for (r, &i) in pq.iter().enumerate() {
        for (c, &j) in pvpq.iter().enumerate() {
            jac[(npvpq + r, c)] = ds_dva[(i, j)].im;
        }
        for (c, &j) in pq.iter().enumerate() {
            jac[(npvpq + r, npvpq + c)] = ds_dvm[(i, j)].im;
        }
    }
    jac
}

fn polar(vm: &[f64], va: &[f64]) -> Vec<Complex> {
    vm.iter()
        .zip(va)
        .map(|(&m, &a)| Complex::from_polar(m, a))
        .collect()
}

fn finish(net: &PowerNetwork, ybus: &YBus, vm: Vec<f64>, va: Vec<f64>, run: Run) -> AcSolution {
    let s = ybus.injections(&polar(&vm, &va));
    let flows = line_flows(net, &vm, &va);
    AcSolution {
        p: s.iter().map(|x| x.re).collect(),
        q: s.iter().map(|x| x.im).collect(),
        vm,
        va,
        flows,
        converged: run.converged,
        iterations: run.iterations,
        max_residual: run.max_residual,
        diagnostic: run.diagnostic,
    }
}

fn failed(net: &PowerNetwork, n: usize, why: &str) -> AcSolution {
    AcSolution {
        vm: vec![f64::NAN; n],
        va: vec![f64::NAN; n],
        p: vec![f64::NAN; n],
        q: vec![f64::NAN; n],
        flows: vec![[(f64::NAN, f64::NAN); 2]; net.lines().len()],
        converged: false,
        iterations: 0,
        max_residual: f64::INFINITY,
        diagnostic: Some(why.into()),
    }
}

/// Exact directed flows `[(p_nm, q_nm), (p_mn, q_mn)]` for every line.
pub fn line_flows(net: &PowerNetwork, vm: &[f64], va: &[f64]) -> Vec<[(f64, f64); 2]> {
    line_coefficients(net)
        .iter()
        .map(|[f, r]| [f.flow(vm, va), r.flow(vm, va)])
        .collect()
}

/// Per-bus mismatch between scheduled injection and the line-flow sum.
#[derive(Debug, Clone, Serialize)]
pub struct KclResidual {
    pub dp: Vec<f64>,
    pub dq: Vec<f64>,
    /// Buses where active balance is enforced by a power flow (all but slack).
    pub p_checked: Vec<bool>,
    /// Buses where reactive balance is enforced (PQ buses).
    pub q_checked: Vec<bool>,
}

impl KclResidual {
    /// Largest residual over the enforced rows.
    pub fn max_checked(&self) -> f64 {
        let p = self
            .dp
            .iter()
            .zip(&self.p_checked)
            .filter(|(_, &c)| c)
            .map(|(d, _)| d.abs());
        let q = self
            .dq
            .iter()
            .zip(&self.q_checked)
            .filter(|(_, &c)| c)
            .map(|(d, _)| d.abs());
        p.chain(q).fold(0.0, f64::max)
    }
}

pub fn kcl_residual(net: &PowerNetwork, vm: &[f64], va: &[f64]) -> KclResidual {
    let n = net.bus_count();
    let sched = net.scheduled_injection();
    let shunt = shunt_power(net, vm);
    let mut sum = vec![Complex::new(0.0, 0.0); n];
    for dirs in line_coefficients(net) {
        for c in dirs {
            let (p, q) = c.flow(vm, va);
            sum[c.from] += Complex::new(p, q);
        }
    }
    let mut dp = Vec::with_capacity(n);
    let mut dq = Vec::with_capacity(n);
    for i in 0..n {
        let r = sched[i] - sum[i] - shunt[i];
        dp.push(r.re);
        dq.push(r.im);
    }
    KclResidual {
        dp,
        dq,
        p_checked: net
            .buses()
            .iter()
            .map(|b| b.kind != BusKind::Slack)
            .collect(),
        q_checked: net
            .buses()
            .iter()
            .map(|b| b.kind == BusKind::Load)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Bus, LineRecord};

    fn bus(id: usize, kind: BusKind, load: Complex) -> Bus {
        Bus {
            id,
            kind,
            voltage_setpoint: 1.0,
            shunt: Complex::new(0.0, 0.0),
            load,
            base_kv: 0.0,
        }
    }

    fn two_bus(load: Complex) -> PowerNetwork {
        PowerNetwork::new(
            100.0,
            vec![
                bus(1, BusKind::Slack, Complex::new(0.0, 0.0)),
                bus(2, BusKind::Load, load),
            ],
            vec![LineRecord::plain(1, 2, Complex::new(0.0, 0.1))],
            vec![],
        )
        .unwrap()
    }

    /// Bisection on the two-bus balance: with `V2 = cos(theta)` (reactive
    /// balance on a lossless line) the active balance is
    /// `10 cos(theta) sin(theta) = -0.1`.
    fn two_bus_oracle() -> (f64, f64) {
        let f = |t: f64| 10.0 * t.cos() * t.sin() + 0.1;
        let (mut lo, mut hi) = (-0.5, 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        (t, t.cos())
    }

    #[test]
    fn two_bus_matches_bisection() {
        let (theta, v) = two_bus_oracle();
        assert!((theta - -0.010001).abs() < 1e-6);
        assert!((v - 0.99995).abs() < 1e-6);
        let sol = solve_ac(&two_bus(Complex::new(0.1, 0.0)), &SolverOptions::default());
        assert!(sol.converged);
        assert!((sol.va[1] - theta).abs() < 1e-9);
        assert!((sol.vm[1] - v).abs() < 1e-9);
    }

    #[test]
    fn zero_load_is_flat() {
        let sol = solve_ac(&two_bus(Complex::new(0.0, 0.0)), &SolverOptions::default());
        assert!(sol.converged);
        assert!(sol.iterations <= 1);
        assert_eq!(sol.va, vec![0.0, 0.0]);
        assert_eq!(sol.vm, vec![1.0, 1.0]);
    }

    #[test]
    fn flows_vanish_at_equal_voltages() {
        let net = two_bus(Complex::new(0.0, 0.0));
        let f = line_flows(&net, &[1.0, 1.0], &[0.2, 0.2]);
        for (p, q) in f[0] {
            assert!(p.abs() < 1e-15 && q.abs() < 1e-15);
        }
    }

    #[test]
    fn flow_matches_closed_form() {
        let z = Complex::new(0.2, -1.0).inv();
        let net = PowerNetwork::new(
            100.0,
            vec![
                bus(1, BusKind::Slack, Complex::new(0.0, 0.0)),
                bus(2, BusKind::Load, Complex::new(0.0, 0.0)),
            ],
            vec![LineRecord::plain(1, 2, z)],
            vec![],
        )
        .unwrap();
        let f = line_flows(&net, &[1.0, 1.0], &[0.1, 0.0]);
        let expected = 0.2 * (1.0 - 0.1f64.cos()) + 0.1f64.sin();
        assert!((f[0][0].0 - expected).abs() < 1e-12);
        assert!((expected - 0.100833).abs() < 1e-6);
    }

    #[test]
    fn perturbation_shows_at_incident_buses_only() {
        let net = PowerNetwork::new(
            100.0,
            vec![
                bus(1, BusKind::Slack, Complex::new(0.0, 0.0)),
                bus(2, BusKind::Load, Complex::new(0.0, 0.0)),
                bus(3, BusKind::Load, Complex::new(0.0, 0.0)),
            ],
            vec![
                LineRecord::plain(1, 2, Complex::new(0.01, 0.1)),
                LineRecord::plain(2, 3, Complex::new(0.01, 0.1)),
            ],
            vec![],
        )
        .unwrap();
        let r = kcl_residual(&net, &[1.0; 3], &[0.0, 0.0, 0.01]);
        assert!(r.dp[0].abs() < 1e-15);
        assert!(r.dp[1].abs() > 1e-4);
        assert!(r.dp[2].abs() > 1e-4);
    }

    #[test]
    fn singular_network_reports_failure() {
        // Bus 2 is a PQ bus with no connection at all.
        let net = PowerNetwork::new(
            100.0,
            vec![
                bus(1, BusKind::Slack, Complex::new(0.0, 0.0)),
                bus(2, BusKind::Load, Complex::new(0.1, 0.0)),
            ],
            vec![],
            vec![],
        )
        .unwrap();
        let sol = solve_ac(&net, &SolverOptions::default());
        assert!(!sol.converged);
        assert!(sol.diagnostic.is_some());
    }
}
