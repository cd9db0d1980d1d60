//! Load restoration after line outages: maximize served load on a damaged
//! network, then check whether the dispatch gives a converging AC power flow.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ac::{solve_ac, AcSolution, SolverOptions, Start};
use crate::error::StudyError;
use crate::lp::{Relation, VarId};
use crate::models::{
    add_constraints, build, default_targets, generator_q_max, ExtraConstraints, LinearSolution,
    LpacModel, ModelSpec,
};
use crate::network::{BusKind, PowerNetwork};
use crate::pwl::DEFAULT_SEGMENTS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Variant {
    Ldc,
    Lpac,
    /// Reactive generation capped at the case limits, slack excepted.
    LpacR,
    /// Reactive caps plus a voltage window.
    LpacRV,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Ldc, Variant::Lpac, Variant::LpacR, Variant::LpacRV];

    pub fn label(self) -> &'static str {
        match self {
            Variant::Ldc => "LDC",
            Variant::Lpac => "LPAC",
            Variant::LpacR => "LPAC-R",
            Variant::LpacRV => "LPAC-R-V",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.label().eq_ignore_ascii_case(s))
    }
}

/// Source of the active generation cap `p̄^g`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum GenerationCap {
    /// Active output recorded in the case file.
    #[default]
    Dispatch,
    /// Generator `Pmax`.
    Capacity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RestorationOptions {
    pub generation_cap: GenerationCap,
    /// Objective weight of the cosine terms; served load has weight 1.
    pub cos_weight: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub segments: usize,
    pub ac: SolverOptions,
    pub max_retries: usize,
}

impl Default for RestorationOptions {
    fn default() -> Self {
        Self {
            generation_cap: GenerationCap::default(),
            cos_weight: 1e-3,
            v_min: 0.9,
            v_max: 1.1,
            segments: DEFAULT_SEGMENTS,
            ac: SolverOptions::default(),
            max_retries: 1000,
        }
    }
}

/// A damaged network reduced to the slack bus's component.
#[derive(Debug, Clone)]
pub struct RestorationInstance {
    pub network: PowerNetwork,
    /// Indices of the removed lines in the original network.
    pub removed: Vec<usize>,
    /// Per bus position of `network`.
    pub p_gen_max: Vec<f64>,
    pub p_load: Vec<f64>,
    pub q_load: Vec<f64>,
    /// Active load of the original network, p.u.
    pub total_load: f64,
    /// Active load on buses cut off from the slack, p.u.
    pub islanded_load: f64,
}

impl RestorationInstance {
    pub fn new(net: &PowerNetwork, removed: &[usize]) -> Result<Self, StudyError> {
        Self::with_cap(net, removed, GenerationCap::default())
    }

    pub fn with_cap(
        net: &PowerNetwork,
        removed: &[usize],
        cap: GenerationCap,
    ) -> Result<Self, StudyError> {
        let mut removed = removed.to_vec();
        removed.sort_unstable();
        removed.dedup();
        let lines = net
            .lines()
            .iter()
            .enumerate()
            .filter(|(k, _)| removed.binary_search(k).is_err())
            .map(|(_, l)| l.clone())
            .collect();
        let damaged = net.with_lines(lines)?;
        let slack = damaged.slack_index();
        let keep = damaged
            .components()
            .into_iter()
            .find(|c| c.contains(&slack))
            .expect("slack belongs to a component");
        let network = restrict(&damaged, &keep)?;
        let total_load = net.total_load().re;
        let p_load: Vec<f64> = network.buses().iter().map(|b| b.load.re).collect();
        if p_load.iter().all(|&p| p == 0.0) {
            return Err(StudyError::DisconnectedSlack);
        }
        let mut p_gen_max = vec![0.0; network.bus_count()];
        for g in network.generators() {
            let i = network.bus_index(g.bus).unwrap();
            if network.buses()[i].kind != BusKind::Load {
                p_gen_max[i] += match cap {
                    GenerationCap::Dispatch => g.p_output,
                    GenerationCap::Capacity => g.p_max,
                };
            }
        }
        Ok(Self {
            q_load: network.buses().iter().map(|b| b.load.im).collect(),
            islanded_load: total_load - p_load.iter().sum::<f64>(),
            network,
            removed,
            p_gen_max,
            p_load,
            total_load,
        })
    }

    pub fn shed_percent(&self, served: &[f64]) -> f64 {
        if self.total_load == 0.0 {
            return 0.0;
        }
        let kept: f64 = self.p_load.iter().zip(served).map(|(p, l)| p * l).sum();
        100.0 * (1.0 - kept / self.total_load)
    }
}

fn restrict(net: &PowerNetwork, keep: &[usize]) -> Result<PowerNetwork, StudyError> {
    let ids: Vec<usize> = keep.iter().map(|&i| net.buses()[i].id).collect();
    let inside = |id: &usize| ids.contains(id);
    let buses = keep.iter().map(|&i| net.buses()[i].clone()).collect();
    let lines = net
        .lines()
        .iter()
        .filter(|l| inside(&l.from) && inside(&l.to))
        .cloned()
        .collect();
    let gens = net
        .generators()
        .iter()
        .filter(|g| inside(&g.bus))
        .cloned()
        .collect();
    Ok(PowerNetwork::new(net.base_mva(), buses, lines, gens)?)
}

/// Remove `k` distinct lines chosen uniformly under `seed`, resampling when
/// the slack ends up without load.
pub fn sample_contingency(
    net: &PowerNetwork,
    k: usize,
    seed: u64,
    opts: &RestorationOptions,
) -> Result<RestorationInstance, StudyError> {
    let max_retries = opts.max_retries;
    let lines = net.lines().len();
    if k > lines {
        return Err(StudyError::TooManyOutages { k, lines });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..max_retries.max(1) {
        let removed = sample(&mut rng, lines, k).into_vec();
        match RestorationInstance::with_cap(net, &removed, opts.generation_cap) {
            Err(StudyError::DisconnectedSlack) => continue,
            other => return other,
        }
    }
    Err(StudyError::RetriesExhausted(max_retries))
}

#[derive(Debug, Clone)]
pub struct RestorationModel {
    pub variant: Variant,
    pub model: LpacModel,
    pub served: Vec<Option<VarId>>,
    pub p_gen: Vec<Option<VarId>>,
    pub q_gen: Vec<Option<VarId>>,
}

pub fn build_restoration(
    inst: &RestorationInstance,
    variant: Variant,
    opts: &RestorationOptions,
) -> Result<RestorationModel, StudyError> {
    let net = &inst.network;
    let mut spec = match variant {
        Variant::Ldc => ModelSpec::ldc(),
        _ => ModelSpec::warm(default_targets(net)).segments(opts.segments),
    };
    spec.balance_rows = false;
    let mut model = build(net, &spec)?;
    let reactive = variant != Variant::Ldc;
    let q_cap = generator_q_max(net);

    let mut served = Vec::with_capacity(net.bus_count());
    let mut p_gen = Vec::with_capacity(net.bus_count());
    let mut q_gen = Vec::with_capacity(net.bus_count());
    for (i, b) in net.buses().iter().enumerate() {
        let l = (inst.p_load[i] != 0.0 || inst.q_load[i] != 0.0)
            .then(|| model.lp.add_var(format!("l[{}]", b.id), 0.0, 1.0));
        let gen = b.kind != BusKind::Load;
        let pg = gen.then(|| {
            model
                .lp
                .add_var(format!("pg[{}]", b.id), 0.0, inst.p_gen_max[i])
        });
        let qg = (gen && reactive).then(|| {
            let hi = match (variant, q_cap[i]) {
                _ if b.kind == BusKind::Slack => f64::INFINITY,
                (Variant::LpacR | Variant::LpacRV, Some(cap)) => cap,
                _ => f64::INFINITY,
            };
            model
                .lp
                .add_var(format!("qg[{}]", b.id), f64::NEG_INFINITY, hi)
        });

        let mut p = model.bus_p[i].clone();
        if let Some(pg) = pg {
            p.term(pg, -1.0);
        }
        if let Some(l) = l {
            p.term(l, inst.p_load[i]);
        }
        model
            .lp
            .add_expr_row(format!("kcl_p[{}]", b.id), &p, Relation::Eq, 0.0);
        if reactive {
            let mut q = model.bus_q[i].clone();
            if let Some(qg) = qg {
                q.term(qg, -1.0);
            }
            if let Some(l) = l {
                q.term(l, inst.q_load[i]);
            }
            model
                .lp
                .add_expr_row(format!("kcl_q[{}]", b.id), &q, Relation::Eq, 0.0);
        }
        served.push(l);
        p_gen.push(pg);
        q_gen.push(qg);
    }
    if variant == Variant::LpacRV {
        let extra = ExtraConstraints {
            v_min: Some(opts.v_min),
            v_max: Some(opts.v_max),
            ..Default::default()
        };
        add_constraints(net, &mut model, &extra)?;
    }
    let objective = served
        .iter()
        .flatten()
        .map(|&v| (v, 1.0))
        .chain(model.cos.iter().flatten().map(|&v| (v, opts.cos_weight)))
        .collect::<Vec<_>>();
    model.lp.set_objective(objective);
    Ok(RestorationModel {
        variant,
        model,
        served,
        p_gen,
        q_gen,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DispatchResult {
    pub variant: Variant,
    /// Served fraction per bus; 1 where there is no load.
    pub served: Vec<f64>,
    pub p_gen: Vec<f64>,
    pub q_gen: Vec<f64>,
    pub objective: f64,
    pub shed_percent: f64,
    pub linear: LinearSolution,
    pub ac_feasible: Option<bool>,
}

impl RestorationModel {
    pub fn solve(&self, inst: &RestorationInstance) -> Result<DispatchResult, StudyError> {
        let linear = self.model.solve()?;
        let x = &linear.values;
        let get = |v: &Option<VarId>, default: f64| v.map_or(default, |v| x[v.0]);
        let served: Vec<f64> = self.served.iter().map(|v| get(v, 1.0)).collect();
        Ok(DispatchResult {
            variant: self.variant,
            shed_percent: inst.shed_percent(&served),
            p_gen: self.p_gen.iter().map(|v| get(v, 0.0)).collect(),
            q_gen: self.q_gen.iter().map(|v| get(v, 0.0)).collect(),
            objective: linear.objective,
            served,
            linear,
            ac_feasible: None,
        })
    }
}

/// Network with the dispatch applied: loads scaled by the served fraction
/// and generator active outputs fixed.
pub fn dispatched_network(
    inst: &RestorationInstance,
    dispatch: &DispatchResult,
) -> Result<PowerNetwork, StudyError> {
    let (base, mut buses, lines, mut gens) = inst.network.clone().into_parts();
    for (bus, l) in buses.iter_mut().zip(&dispatch.served) {
        bus.load *= *l;
    }
    let net = &inst.network;
    for (i, pg) in dispatch.p_gen.iter().enumerate() {
        let id = net.buses()[i].id;
        let at: Vec<usize> = (0..gens.len()).filter(|&g| gens[g].bus == id).collect();
        let cap: f64 = at.iter().map(|&g| gens[g].p_max).sum();
        for &g in &at {
            let share = if cap > 0.0 {
                gens[g].p_max / cap
            } else {
                1.0 / at.len() as f64
            };
            gens[g].p_output = pg * share;
        }
    }
    Ok(PowerNetwork::new(base, buses, lines, gens)?)
}

/// Newton-Raphson on the dispatched network, started from the linear
/// solution's angles and voltages.
pub fn check_ac_feasibility(
    inst: &RestorationInstance,
    dispatch: &DispatchResult,
    opts: &SolverOptions,
) -> Result<AcSolution, StudyError> {
    let net = dispatched_network(inst, dispatch)?;
    let lin = &dispatch.linear;
    let vm = if lin.reactive {
        lin.vm.clone()
    } else {
        vec![1.0; net.bus_count()]
    };
    let opts = SolverOptions {
        start: Start::Given {
            vm,
            va: lin.theta.clone(),
        },
        ..opts.clone()
    };
    Ok(solve_ac(&net, &opts))
}

/// Build, solve and AC-check one variant.
pub fn restore(
    inst: &RestorationInstance,
    variant: Variant,
    opts: &RestorationOptions,
) -> Result<DispatchResult, StudyError> {
    let mut d = build_restoration(inst, variant, opts)?.solve(inst)?;
    let ac = check_ac_feasibility(inst, &d, &opts.ac)?;
    d.ac_feasible = Some(ac.converged);
    Ok(d)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyRow {
    /// Number of removed lines.
    pub k: usize,
    pub variant: Variant,
    pub samples: usize,
    pub converged: usize,
    /// Linear models that did not solve to optimality.
    pub lp_failures: usize,
    /// Mean shed percentage over the samples whose linear model solved.
    pub mean_shed: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StudyTable {
    pub rows: Vec<StudyRow>,
}

impl StudyTable {
    pub fn get(&self, k: usize, variant: Variant) -> Option<&StudyRow> {
        self.rows.iter().find(|r| r.k == k && r.variant == variant)
    }

    pub fn classes(&self) -> Vec<usize> {
        let mut ks: Vec<usize> = self.rows.iter().map(|r| r.k).collect();
        ks.dedup();
        ks
    }
}

fn sample_seed(seed: u64, k: usize, s: usize) -> u64 {
    seed ^ ((k as u64) << 32 | s as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

struct Outcome {
    shed: Option<f64>,
    converged: bool,
}

fn run_sample(
    net: &PowerNetwork,
    k: usize,
    seed: u64,
    variants: &[Variant],
    opts: &RestorationOptions,
) -> Result<Vec<Outcome>, StudyError> {
    let inst = sample_contingency(net, k, seed, opts)?;
    Ok(variants
        .iter()
        .map(|&v| match restore(&inst, v, opts) {
            Ok(d) => Outcome {
                shed: Some(d.shed_percent),
                converged: d.ac_feasible == Some(true),
            },
            Err(e) => {
                log::debug!("N-{k} {}: {e}", v.label());
                Outcome {
                    shed: None,
                    converged: false,
                }
            }
        })
        .collect())
}

/// Sample `samples` contingencies per class and run every variant on each.
pub fn run_study(
    net: &PowerNetwork,
    classes: &[usize],
    samples: usize,
    seed: u64,
    variants: &[Variant],
    opts: &RestorationOptions,
) -> Result<StudyTable, StudyError> {
    let mut table = StudyTable::default();
    if samples == 0 {
        return Ok(table);
    }
    for &k in classes {
        let run = |s: usize| run_sample(net, k, sample_seed(seed, k, s), variants, opts);
        #[cfg(feature = "parallel")]
        let results: Vec<_> = {
            use rayon::prelude::*;
            (0..samples).into_par_iter().map(run).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let results: Vec<_> = (0..samples).map(run).collect();
        let results = results.into_iter().collect::<Result<Vec<_>, _>>()?;

        for (j, &variant) in variants.iter().enumerate() {
            let outcomes = results.iter().map(|r| &r[j]);
            let sheds: Vec<f64> = outcomes.clone().filter_map(|o| o.shed).collect();
            table.rows.push(StudyRow {
                k,
                variant,
                samples,
                converged: outcomes.clone().filter(|o| o.converged).count(),
                lp_failures: samples - sheds.len(),
                mean_shed: if sheds.is_empty() {
                    f64::NAN
                } else {
                    sheds.iter().sum::<f64>() / sheds.len() as f64
                },
            });
        }
    }
    Ok(table)
}
