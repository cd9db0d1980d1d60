//! LDC and LPAC model builders.
//!
//! Line flows are kept as affine expressions over the model variables and
//! substituted into the bus balance rows, so a model has one angle per bus,
//! one voltage change per bus (warm and cold start) and one cosine variable
//! per line.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::ModelError;
use crate::lp::{solve_lp, Expr, LinearProgram, Relation, Sense, SolveStats, SolveStatus, VarId};
use crate::network::{line_coefficients, BusKind, LineCoefficients, PowerNetwork};
use crate::pwl::{PwlCosine, DEFAULT_SEGMENTS};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ModelKind {
    Ldc,
    /// Voltage magnitudes from a solved base point.
    Hot(Vec<f64>),
    /// Target voltage magnitudes.
    Warm(Vec<f64>),
    /// Set points on voltage-controlled buses, 1.0 elsewhere.
    Cold,
}

impl ModelKind {
    pub fn label(&self) -> &'static str {
        match self {
            ModelKind::Ldc => "ldc",
            ModelKind::Hot(_) => "hot",
            ModelKind::Warm(_) => "warm",
            ModelKind::Cold => "cold",
        }
    }

    pub fn has_voltage(&self) -> bool {
        matches!(self, ModelKind::Warm(_) | ModelKind::Cold)
    }
}

/// Cold-start ablations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Ablation {
    /// Conductance dropped, cosine approximation kept.
    C,
    /// Cosine fixed at 1, conductance kept.
    G,
    GC,
}

impl Ablation {
    pub fn drops_g(self) -> bool {
        matches!(self, Ablation::C | Ablation::GC)
    }

    pub fn drops_cos(self) -> bool {
        matches!(self, Ablation::G | Ablation::GC)
    }

    pub fn label(self) -> &'static str {
        match self {
            Ablation::C => "C",
            Ablation::G => "G",
            Ablation::GC => "GC",
        }
    }
}

/// How `|V|^2` terms of shunts and line-charge halves enter the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ShuntTreatment {
    /// Held at the model's voltage estimate.
    Frozen,
    /// First-order expansion in the voltage change.
    Linearized,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub ablation: Option<Ablation>,
    pub segments: usize,
    pub shunts: ShuntTreatment,
    /// Emit the bus balance rows. Applications that add their own injection
    /// variables turn this off and use [`LpacModel::bus_p`] directly.
    pub balance_rows: bool,
}

impl ModelSpec {
    pub fn new(kind: ModelKind) -> Self {
        Self {
            kind,
            ablation: None,
            segments: DEFAULT_SEGMENTS,
            shunts: ShuntTreatment::Linearized,
            balance_rows: true,
        }
    }

    pub fn ldc() -> Self {
        Self::new(ModelKind::Ldc)
    }

    pub fn hot(vm: Vec<f64>) -> Self {
        Self::new(ModelKind::Hot(vm))
    }

    pub fn warm(targets: Vec<f64>) -> Self {
        Self::new(ModelKind::Warm(targets))
    }

    pub fn cold() -> Self {
        Self::new(ModelKind::Cold)
    }

    pub fn segments(mut self, cs: usize) -> Self {
        self.segments = cs;
        self
    }

    /// Apply an ablation. Only the cold-start model has them.
    pub fn with_variant(mut self, ablation: Ablation) -> Result<Self, ModelError> {
        if self.kind != ModelKind::Cold {
            return Err(ModelError::VariantNeedsCold);
        }
        self.ablation = Some(ablation);
        Ok(self)
    }

    pub fn label(&self) -> String {
        match self.ablation {
            None => self.kind.label().to_string(),
            Some(a) => format!("{}-{}", self.kind.label(), a.label()),
        }
    }
}

/// A built model with handles to its variables and flow expressions.
#[derive(Debug, Clone)]
pub struct LpacModel {
    pub spec: ModelSpec,
    pub lp: LinearProgram,
    pub theta: Vec<VarId>,
    pub phi: Option<Vec<VarId>>,
    pub cos: Vec<Option<VarId>>,
    /// Voltage estimate each bus is linearized around.
    pub base_voltage: Vec<f64>,
    /// `[forward, reverse]` `(p, q)` flow expressions per line.
    pub flows: Vec<[(Expr, Expr); 2]>,
    /// Bus shunt consumption `(p, q)`.
    pub shunt: Vec<(Expr, Expr)>,
    /// Net injection implied at each bus: outgoing flows plus shunt.
    pub bus_p: Vec<Expr>,
    pub bus_q: Vec<Expr>,
    pub pwl: Option<PwlCosine>,
}

pub fn build_ldc(net: &PowerNetwork) -> LpacModel {
    build(net, &ModelSpec::ldc()).expect("LDC build cannot fail")
}

pub fn build_lpac_hot(net: &PowerNetwork, vm: &[f64], cs: usize) -> Result<LpacModel, ModelError> {
    build(net, &ModelSpec::hot(vm.to_vec()).segments(cs))
}

pub fn build_lpac_warm(
    net: &PowerNetwork,
    targets: &[f64],
    cs: usize,
) -> Result<LpacModel, ModelError> {
    build(net, &ModelSpec::warm(targets.to_vec()).segments(cs))
}

pub fn build_lpac_cold(net: &PowerNetwork, cs: usize) -> Result<LpacModel, ModelError> {
    build(net, &ModelSpec::cold().segments(cs))
}

/// Warm-start targets: set points on voltage-controlled buses, 1.0 elsewhere.
pub fn default_targets(net: &PowerNetwork) -> Vec<f64> {
    net.buses()
        .iter()
        .map(|b| match b.kind {
            BusKind::Load => 1.0,
            _ => b.voltage_setpoint,
        })
        .collect()
}

pub fn build(net: &PowerNetwork, spec: &ModelSpec) -> Result<LpacModel, ModelError> {
    let n = net.bus_count();
    let base_voltage = match &spec.kind {
        ModelKind::Hot(v) | ModelKind::Warm(v) => {
            if v.len() != n {
                return Err(ModelError::VoltageLength {
                    expected: n,
                    found: v.len(),
                });
            }
            v.clone()
        }
        ModelKind::Cold => default_targets(net),
        ModelKind::Ldc => vec![1.0; n],
    };
    let is_ldc = spec.kind == ModelKind::Ldc;
    let drop_g = spec.ablation.is_some_and(|a| a.drops_g());
    let drop_cos = is_ldc || spec.ablation.is_some_and(|a| a.drops_cos());
    let pwl = if drop_cos {
        None
    } else {
        Some(PwlCosine::standard(spec.segments)?)
    };

    let mut lp = LinearProgram::new(spec.label(), Sense::Maximize);
    let slack = net.slack_index();
    let theta: Vec<VarId> = net
        .buses()
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let (lo, hi) = if i == slack {
                (0.0, 0.0)
            } else {
                (f64::NEG_INFINITY, f64::INFINITY)
            };
            lp.add_var(format!("theta[{}]", b.id), lo, hi)
        })
        .collect();

    let phi = spec.kind.has_voltage().then(|| {
        net.buses()
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let vt = base_voltage[i];
                let fixed = (b.kind != BusKind::Load).then_some(0.0);
                let (lo, hi) = fixed.map_or((-vt, f64::INFINITY), |f| (f, f));
                lp.add_var(format!("phi[{}]", b.id), lo, hi)
            })
            .collect::<Vec<_>>()
    });

    let coefs = line_coefficients(net);
    let mut cos = Vec::with_capacity(coefs.len());
    let mut flows = Vec::with_capacity(coefs.len());
    for (k, dirs) in coefs.iter().enumerate() {
        let c = match &pwl {
            Some(pwl) => {
                let var = lp.add_var(format!("cos[{k}]"), 0.0, 1.0);
                add_pwl_rows(&mut lp, pwl, var, &dirs[0], &theta, k);
                Some(var)
            }
            None => None,
        };
        cos.push(c);
        let line = LineTerms {
            theta: &theta,
            phi: phi.as_deref(),
            cos: c,
            vt: &base_voltage,
            drop_g,
            shunts: spec.shunts,
        };
        flows.push(if is_ldc {
            [ldc_flow(&dirs[0], &theta), ldc_flow(&dirs[1], &theta)]
        } else {
            [line.flow(&dirs[0]), line.flow(&dirs[1])]
        });
    }

    let shunt: Vec<(Expr, Expr)> = net
        .buses()
        .iter()
        .enumerate()
        .map(|(i, b)| {
            if is_ldc {
                return (Expr::default(), Expr::default());
            }
            let vt = base_voltage[i];
            let mut p = Expr::constant(vt * vt * b.shunt.re);
            let mut q = Expr::constant(-vt * vt * b.shunt.im);
            if let (Some(phi), ShuntTreatment::Linearized) = (&phi, spec.shunts) {
                p.term(phi[i], 2.0 * vt * b.shunt.re);
                q.term(phi[i], -2.0 * vt * b.shunt.im);
            }
            (p, q)
        })
        .collect();

    let mut bus_p: Vec<Expr> = shunt.iter().map(|s| s.0.clone()).collect();
    let mut bus_q: Vec<Expr> = shunt.iter().map(|s| s.1.clone()).collect();
    for (dirs, f) in coefs.iter().zip(&flows) {
        for (c, (p, q)) in dirs.iter().zip(f) {
            bus_p[c.from].add_scaled(p, 1.0);
            bus_q[c.from].add_scaled(q, 1.0);
        }
    }

    if spec.balance_rows {
        let sched = net.scheduled_injection();
        for (i, b) in net.buses().iter().enumerate() {
            if i == slack {
                continue;
            }
            lp.add_expr_row(
                format!("kcl_p[{}]", b.id),
                &bus_p[i],
                Relation::Eq,
                sched[i].re,
            );
            if b.kind == BusKind::Load && !is_ldc {
                lp.add_expr_row(
                    format!("kcl_q[{}]", b.id),
                    &bus_q[i],
                    Relation::Eq,
                    sched[i].im,
                );
            }
        }
    }
    lp.set_objective(cos.iter().flatten().map(|&v| (v, 1.0)));

    Ok(LpacModel {
        spec: spec.clone(),
        lp,
        theta,
        phi,
        cos,
        base_voltage,
        flows,
        shunt,
        bus_p,
        bus_q,
        pwl,
    })
}

fn add_pwl_rows(
    lp: &mut LinearProgram,
    pwl: &PwlCosine,
    cos: VarId,
    fwd: &LineCoefficients,
    theta: &[VarId],
    k: usize,
) {
    // Argument d = theta_from - theta_to - shift.
    let (f, t, s) = (theta[fwd.from], theta[fwd.to], fwd.shift);
    for (i, cut) in pwl.tangents.iter().enumerate() {
        lp.add_row(
            format!("pwl_t[{k},{i}]"),
            [(cos, 1.0), (f, -cut.slope), (t, cut.slope)],
            Relation::Le,
            cut.intercept - cut.slope * s,
        );
    }
    let chord = pwl.chord;
    lp.add_row(
        format!("pwl_c[{k}]"),
        [(cos, 1.0), (f, -chord.slope), (t, chord.slope)],
        Relation::Ge,
        chord.intercept - chord.slope * s,
    );
}

fn angle_expr(c: &LineCoefficients, theta: &[VarId], scale: f64) -> Expr {
    let mut e = Expr::constant(-scale * c.shift);
    e.term(theta[c.from], scale).term(theta[c.to], -scale);
    e
}

fn ldc_flow(c: &LineCoefficients, theta: &[VarId]) -> (Expr, Expr) {
    (angle_expr(c, theta, -c.b), Expr::default())
}

struct LineTerms<'a> {
    theta: &'a [VarId],
    phi: Option<&'a [VarId]>,
    cos: Option<VarId>,
    vt: &'a [f64],
    drop_g: bool,
    shunts: ShuntTreatment,
}

impl LineTerms<'_> {
    fn flow(&self, c: &LineCoefficients) -> (Expr, Expr) {
        let (n, m) = (c.from, c.to);
        let (vn, vm) = (self.vt[n], self.vt[m]);
        let vv = vn * vm;
        let (g, gs) = if self.drop_g {
            (0.0, 0.0)
        } else {
            (c.g, c.self_g())
        };
        let b = c.b;
        let bs = c.self_b();

        // p = vn^2 gs - vn vm (g cos + b d)
        let mut p = angle_expr(c, self.theta, -vv * b);
        p.constant += vn * vn * gs;
        // q = -vn^2 bs - vn vm (g d - b cos)
        let mut q = angle_expr(c, self.theta, -vv * g);
        q.constant -= vn * vn * bs;
        match self.cos {
            Some(cos) => {
                p.term(cos, -vv * g);
                q.term(cos, vv * b);
            }
            None => {
                p.constant -= vv * g;
                q.constant += vv * b;
            }
        }
        if let Some(phi) = self.phi {
            // -vn b (phi_n - phi_m) - (vn - vm) b phi_n
            q.term(phi[n], -vn * b - (vn - vm) * b);
            q.term(phi[m], vn * b);
            if self.shunts == ShuntTreatment::Linearized {
                q.term(phi[n], -2.0 * vn * (bs - b));
                p.term(phi[n], 2.0 * vn * (gs - g));
            }
        }
        (p, q)
    }
}

/// Solved values mapped back to network quantities.
#[derive(Debug, Clone, Serialize)]
pub struct LinearSolution {
    pub model: String,
    /// False for LDC, which has no reactive power or voltage.
    pub reactive: bool,
    pub theta: Vec<f64>,
    pub phi: Option<Vec<f64>>,
    /// Voltage magnitude estimate `base + phi` (1.0 for LDC).
    pub vm: Vec<f64>,
    pub cos: Vec<Option<f64>>,
    pub flows: Vec<[(f64, f64); 2]>,
    /// Net injection per bus implied by the flows and shunts.
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub objective: f64,
    pub stats: SolveStats,
    /// Raw primal values, indexed like the model's variables.
    pub values: Vec<f64>,
}

impl LpacModel {
    pub fn solve(&self) -> Result<LinearSolution, ModelError> {
        let r = solve_lp(&self.lp);
        match r.status {
            SolveStatus::Optimal => Ok(self.extract(&r.values, r.objective, r.stats)),
            status => {
                if let Some(d) = r.diagnostic {
                    log::warn!("{}: {d}", self.lp.name);
                }
                Err(ModelError::NotOptimal {
                    model: self.lp.name.clone(),
                    status,
                })
            }
        }
    }

    pub fn extract(&self, x: &[f64], objective: f64, stats: SolveStats) -> LinearSolution {
        let theta: Vec<f64> = self.theta.iter().map(|v| x[v.0]).collect();
        let phi: Option<Vec<f64>> = self
            .phi
            .as_ref()
            .map(|p| p.iter().map(|v| x[v.0]).collect());
        let vm = match &phi {
            Some(phi) => self
                .base_voltage
                .iter()
                .zip(phi)
                .map(|(b, p)| b + p)
                .collect(),
            None => self.base_voltage.clone(),
        };
        LinearSolution {
            model: self.lp.name.clone(),
            reactive: self.spec.kind != ModelKind::Ldc,
            theta,
            phi,
            vm,
            cos: self.cos.iter().map(|c| c.map(|v| x[v.0])).collect(),
            flows: self
                .flows
                .iter()
                .map(|[f, r]| [(f.0.eval(x), f.1.eval(x)), (r.0.eval(x), r.1.eval(x))])
                .collect(),
            p: self.bus_p.iter().map(|e| e.eval(x)).collect(),
            q: self.bus_q.iter().map(|e| e.eval(x)).collect(),
            objective,
            stats,
            values: x.to_vec(),
        }
    }
}

pub fn solve_linear(model: &LpacModel) -> Result<LinearSolution, ModelError> {
    model.solve()
}

/// Optional operating constraints.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ExtraConstraints {
    pub v_min: Option<f64>,
    pub v_max: Option<f64>,
    /// Cap the reactive output of generator buses at the case limits.
    pub q_max: bool,
    /// Polygon side count for line apparent power limits.
    pub thermal: Option<usize>,
}

pub fn add_constraints(
    net: &PowerNetwork,
    model: &mut LpacModel,
    extra: &ExtraConstraints,
) -> Result<(), ModelError> {
    if extra.v_min.is_some() || extra.v_max.is_some() {
        let phi = model.phi.as_ref().ok_or(ModelError::NoVoltageVariables)?;
        for (i, b) in net.buses().iter().enumerate() {
            let vt = model.base_voltage[i];
            if let Some(lo) = extra.v_min {
                model.lp.add_row(
                    format!("vmin[{}]", b.id),
                    [(phi[i], 1.0)],
                    Relation::Ge,
                    lo - vt,
                );
            }
            if let Some(hi) = extra.v_max {
                model.lp.add_row(
                    format!("vmax[{}]", b.id),
                    [(phi[i], 1.0)],
                    Relation::Le,
                    hi - vt,
                );
            }
        }
    }
    if extra.q_max {
        for (i, cap) in generator_q_max(net).into_iter().enumerate() {
            let Some(cap) = cap else { continue };
            let load = net.buses()[i].load.im;
            let name = format!("qmax[{}]", net.buses()[i].id);
            model
                .lp
                .add_expr_row(name, &model.bus_q[i].clone(), Relation::Le, cap - load);
        }
    }
    if let Some(k) = extra.thermal {
        if k < 4 {
            return Err(ModelError::PolygonSides(k));
        }
        for (l, line) in net.lines().iter().enumerate() {
            let Some(s) = line.thermal_limit else {
                continue;
            };
            for (d, (p, q)) in model.flows[l].clone().iter().enumerate() {
                for j in 0..k {
                    let a = 2.0 * PI * j as f64 / k as f64;
                    let mut e = Expr::default();
                    e.add_scaled(p, a.cos());
                    e.add_scaled(q, a.sin());
                    model.lp.add_expr_row(
                        format!("smax[{l},{d},{j}]"),
                        &e,
                        Relation::Le,
                        s * (PI / k as f64).cos(),
                    );
                }
            }
        }
    }
    Ok(())
}

/// Summed reactive upper limit of the generators at each voltage-controlled
/// bus; `None` where unbounded or not voltage controlled.
pub fn generator_q_max(net: &PowerNetwork) -> Vec<Option<f64>> {
    let mut out: Vec<Option<f64>> = net
        .buses()
        .iter()
        .map(|b| (b.kind != BusKind::Load).then_some(0.0))
        .collect();
    for g in net.generators() {
        let i = net.bus_index(g.bus).unwrap();
        out[i] = out[i].zip(g.q_max).map(|(a, b)| a + b);
    }
    out
}
