//! Capacitor placement: the fewest capacitors that lift every bus voltage
//! above a floor, as a mixed-integer program over the cold-start model.

use serde::Serialize;
use web_time::Instant;

use crate::ac::{solve_ac, SolverOptions};
use crate::error::CppError;
use crate::lp::{solve_mip, MipOptions, Relation, SolveStatus, VarId};
use crate::models::{
    add_constraints, build, generator_q_max, ExtraConstraints, LinearSolution, LpacModel, ModelSpec,
};
use crate::network::{BusKind, PowerNetwork};
use crate::pwl::DEFAULT_SEGMENTS;

/// Voltage ceiling of the placement model, p.u.
pub const V_CEILING: f64 = 1.05;

/// IEEE57 with every tap ratio set to 1.0 and the synchronous condensers
/// (generators dispatched at zero active power) removed.
pub fn make_ieee57c(net: &PowerNetwork) -> Result<PowerNetwork, CppError> {
    let (base, mut buses, mut lines, gens) = net.clone().into_parts();
    for line in &mut lines {
        if let Some(t) = &mut line.transformer {
            t.tap = 1.0;
        }
    }
    let slack = net.slack();
    let (kept, removed): (Vec<_>, Vec<_>) = gens
        .into_iter()
        .partition(|g| g.p_output != 0.0 || g.bus == slack);
    for g in &removed {
        if kept.iter().any(|k| k.bus == g.bus) {
            continue;
        }
        if let Some(b) = buses.iter_mut().find(|b| b.id == g.bus) {
            b.kind = BusKind::Load;
        }
    }
    Ok(PowerNetwork::new(base, buses, lines, kept)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CppInstance {
    pub network: PowerNetwork,
    /// Per capacitor, p.u.
    pub q_cap: f64,
    pub v_min: f64,
    pub segments: usize,
    /// Objective weight of the cosine terms; each capacitor costs 1.
    pub cos_weight: f64,
}

impl CppInstance {
    /// `q_cap_mvar` is in MVar.
    pub fn new(network: PowerNetwork, q_cap_mvar: f64, v_min: f64) -> Result<Self, CppError> {
        if !(v_min < V_CEILING) {
            return Err(CppError::InvalidFloor(v_min));
        }
        if !(q_cap_mvar > 0.0) {
            return Err(CppError::InvalidCap(q_cap_mvar));
        }
        let cos_weight = 0.5 / network.lines().len().max(1) as f64;
        Ok(Self {
            q_cap: q_cap_mvar / network.base_mva(),
            network,
            v_min,
            segments: DEFAULT_SEGMENTS,
            cos_weight: cos_weight.min(1e-3),
        })
    }
}

#[derive(Debug, Clone)]
pub struct CppModel {
    pub model: LpacModel,
    /// Indexed by bus position; `None` where no capacitor may be placed.
    pub injection: Vec<Option<VarId>>,
    pub placed: Vec<Option<VarId>>,
}

pub fn build_cpp(inst: &CppInstance) -> Result<CppModel, CppError> {
    let net = &inst.network;
    let mut model = build(net, &ModelSpec::cold().segments(inst.segments))?;
    model.lp.name = "cpp".into();
    let mut injection = vec![None; net.bus_count()];
    let mut placed = vec![None; net.bus_count()];
    for (i, b) in net.buses().iter().enumerate() {
        if b.kind != BusKind::Load {
            continue;
        }
        let qc = model.lp.add_var(format!("qc[{}]", b.id), 0.0, inst.q_cap);
        let c = model.lp.add_binary(format!("c[{}]", b.id));
        model.lp.add_row(
            format!("link[{}]", b.id),
            [(qc, 1.0), (c, -inst.q_cap)],
            Relation::Le,
            0.0,
        );
        let name = format!("kcl_q[{}]", b.id);
        let row = model
            .lp
            .constraints
            .iter_mut()
            .find(|r| r.name == name)
            .expect("cold model balances reactive power at load buses");
        row.terms.push((qc, -1.0));
        injection[i] = Some(qc);
        placed[i] = Some(c);
    }
    for (i, cap) in generator_q_max(net).into_iter().enumerate() {
        let b = &net.buses()[i];
        let Some(cap) = cap.filter(|_| b.kind == BusKind::Generator) else {
            continue;
        };
        let rhs = cap - b.load.im;
        let e = model.bus_q[i].clone();
        model
            .lp
            .add_expr_row(format!("qmax[{}]", b.id), &e, Relation::Le, rhs);
    }
    let window = ExtraConstraints {
        v_min: Some(inst.v_min),
        v_max: Some(V_CEILING),
        ..Default::default()
    };
    add_constraints(net, &mut model, &window)?;
    model.lp.sense = crate::lp::Sense::Minimize;
    let objective = placed
        .iter()
        .flatten()
        .map(|&c| (c, 1.0))
        .chain(model.cos.iter().flatten().map(|&v| (v, -inst.cos_weight)))
        .collect::<Vec<_>>();
    model.lp.set_objective(objective);
    Ok(CppModel {
        model,
        injection,
        placed,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CppSolution {
    pub v_min: f64,
    /// Bus ids with a capacitor.
    pub placements: Vec<usize>,
    /// Injection per bus position, p.u.
    pub injection: Vec<f64>,
    pub count: usize,
    pub seconds: f64,
    pub nodes: u64,
    pub linear: LinearSolution,
    pub verification: Option<Verification>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verification {
    pub converged: bool,
    /// `min(V - v_min)` capped above at 0, p.u.
    pub min_v_violation: f64,
    /// `max(V - 1.05)` capped below at 0, p.u.
    pub max_v_violation: f64,
    /// Largest generator reactive output above its cap, MVar.
    pub max_q_violation: f64,
    pub min_v: f64,
}

impl CppModel {
    pub fn solve(&self, inst: &CppInstance, opts: &MipOptions) -> Result<CppSolution, CppError> {
        let started = Instant::now();
        let r = solve_mip(&self.model.lp, opts);
        match r.status {
            SolveStatus::Optimal => {}
            SolveStatus::Infeasible => return Err(CppError::Infeasible(inst.v_min)),
            SolveStatus::IterationLimit => return Err(CppError::NodeLimit(r.stats.nodes)),
            status => {
                return Err(CppError::Model(crate::error::ModelError::NotOptimal {
                    model: "cpp".into(),
                    status,
                }))
            }
        }
        let x = &r.values;
        let ids = inst.network.buses().iter().map(|b| b.id);
        let placements: Vec<usize> = ids
            .zip(&self.placed)
            .filter(|(_, c)| c.is_some_and(|c| x[c.0] > 0.5))
            .map(|(id, _)| id)
            .collect();
        let injection = self
            .injection
            .iter()
            .zip(&self.placed)
            .map(|(q, c)| match (q, c) {
                (Some(q), Some(c)) if x[c.0] > 0.5 => x[q.0],
                _ => 0.0,
            })
            .collect();
        Ok(CppSolution {
            v_min: inst.v_min,
            count: placements.len(),
            placements,
            injection,
            nodes: r.stats.nodes,
            linear: self.model.extract(x, r.objective, r.stats),
            seconds: started.elapsed().as_secs_f64(),
            verification: None,
        })
    }
}

/// Network with the placed capacitors as fixed reactive injections.
pub fn with_capacitors(net: &PowerNetwork, injection: &[f64]) -> Result<PowerNetwork, CppError> {
    let (base, mut buses, lines, gens) = net.clone().into_parts();
    for (b, q) in buses.iter_mut().zip(injection) {
        b.load.im -= q;
    }
    Ok(PowerNetwork::new(base, buses, lines, gens)?)
}

/// AC solve of the placement and its constraint violations.
pub fn verify_cpp(
    inst: &CppInstance,
    sol: &CppSolution,
    opts: &SolverOptions,
) -> Result<Verification, CppError> {
    let net = with_capacitors(&inst.network, &sol.injection)?;
    let ac = solve_ac(&net, opts);
    let min_v = ac.vm.iter().copied().fold(f64::INFINITY, f64::min);
    let max_v = ac.vm.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let caps = generator_q_max(&net);
    let mut max_q = 0.0f64;
    for (i, b) in net.buses().iter().enumerate() {
        if let (BusKind::Generator, Some(cap)) = (b.kind, caps[i]) {
            max_q = max_q.max((ac.q[i] + b.load.im - cap) * net.base_mva());
        }
    }
    Ok(Verification {
        converged: ac.converged,
        min_v_violation: (min_v - inst.v_min).min(0.0),
        max_v_violation: (max_v - V_CEILING).max(0.0),
        max_q_violation: max_q,
        min_v,
    })
}

/// Solve and verify one floor.
pub fn place(
    inst: &CppInstance,
    mip: &MipOptions,
    ac: &SolverOptions,
) -> Result<CppSolution, CppError> {
    let mut sol = build_cpp(inst)?.solve(inst, mip)?;
    sol.verification = Some(verify_cpp(inst, &sol, ac)?);
    Ok(sol)
}

pub fn default_mip_options() -> MipOptions {
    MipOptions {
        integer_part: true,
        ..Default::default()
    }
}

/// One placement per voltage floor, in input order.
pub fn sweep(
    net: &PowerNetwork,
    q_cap_mvar: f64,
    floors: &[f64],
    mip: &MipOptions,
    ac: &SolverOptions,
) -> Vec<Result<CppSolution, CppError>> {
    let run = |&v: &f64| {
        let inst = CppInstance::new(net.clone(), q_cap_mvar, v)?;
        place(&inst, mip, ac)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        floors.par_iter().map(run).collect()
    }
    #[cfg(not(feature = "parallel"))]
    floors.iter().map(run).collect()
}
