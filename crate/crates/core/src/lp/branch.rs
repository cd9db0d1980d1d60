//! Branch and bound over binary markers.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::rc::Rc;

use microlp::Solution;

use web_time::Instant;

use super::microlp_backend::to_problem;
use super::{
    LinearProgram, LpBackend, MicroLp, Sense, SolveResult, SolveStats, SolveStatus, VarId, INT_TOL,
};

#[derive(Debug, Clone)]
pub struct MipOptions {
    pub node_limit: u64,
    /// The objective is an integer sum of binaries plus a tiebreak in
    /// `(-1, 0]`; prune as soon as the integer part cannot improve.
    pub integer_part: bool,
}

impl Default for MipOptions {
    fn default() -> Self {
        Self {
            node_limit: 200_000,
            integer_part: false,
        }
    }
}

struct Node {
    /// Relaxation bound of the parent, in minimization form.
    bound: f64,
    seq: u64,
    fixed: Vec<(VarId, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // BinaryHeap pops the greatest: smallest bound first, then oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Depth-first search with the bundled backend; each child re-solves from
/// its parent's basis.
pub fn solve_mip(lp: &LinearProgram, opts: &MipOptions) -> SolveResult {
    let started = Instant::now();
    let binaries: Vec<VarId> = lp.binaries().collect();
    if binaries.is_empty() || lp.variables.is_empty() {
        let mut r = MicroLp.solve(lp);
        r.stats.nodes = 1;
        return r;
    }
    let sign = match lp.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let prune = Pruning::new(lp, opts);
    let (problem, vars) = to_problem(lp);
    let mut stats = SolveStats::default();
    let mut incumbent: Option<(f64, Vec<f64>)> = None;

    struct Pending {
        parent: Rc<Solution>,
        bound: f64,
        fixed: Vec<(VarId, f64)>,
    }
    let mut stack: Vec<Pending> = Vec::new();
    let mut current: Option<(Solution, Vec<(VarId, f64)>)> = match problem.solve() {
        Ok(o) => match o.into_solution() {
            Ok(sol) => Some((sol, Vec::new())),
            Err(_) => return SolveResult::failed(SolveStatus::IterationLimit, None),
        },
        Err(microlp::Error::Infeasible) => None,
        Err(microlp::Error::Unbounded) => return SolveResult::failed(SolveStatus::Unbounded, None),
        Err(e) => return SolveResult::failed(SolveStatus::IterationLimit, Some(e.to_string())),
    };
    stats.nodes = 1;

    loop {
        if let Some((sol, fixed)) = current.take() {
            stats.iterations += sol.stats().lp_iterations;
            let values: Vec<f64> = vars.iter().map(|&v| sol.var_value_raw(v)).collect();
            let key = sign * lp.objective_value(&values);
            if !prune.cuts(key, &incumbent) {
                match most_fractional(&binaries, &values) {
                    None => {
                        let mut values = values;
                        for &v in &binaries {
                            values[v.0] = values[v.0].round();
                        }
                        if incumbent.as_ref().map_or(true, |(best, _)| key < *best) {
                            incumbent = Some((key, values));
                        }
                    }
                    Some(var) => {
                        let parent = Rc::new(sol);
                        let up_first = values[var.0] >= 0.5;
                        let order = if up_first { [0.0, 1.0] } else { [1.0, 0.0] };
                        for value in order {
                            let mut fixed = fixed.clone();
                            fixed.push((var, value));
                            stack.push(Pending {
                                parent: Rc::clone(&parent),
                                bound: key,
                                fixed,
                            });
                        }
                    }
                }
            }
        }
        let Some(node) = stack.pop() else { break };
        if prune.cuts(node.bound, &incumbent) {
            continue;
        }
        if stats.nodes >= opts.node_limit {
            return limit_result(sign, incumbent, stats, started);
        }
        stats.nodes += 1;
        let (var, value) = *node.fixed.last().unwrap();
        let parent = Rc::try_unwrap(node.parent).unwrap_or_else(|rc| (*rc).clone());
        current = match parent.fix_var(vars[var.0], value) {
            Ok(o) => match o.into_solution() {
                Ok(sol) => Some((sol, node.fixed)),
                Err(_) => cold_node(lp, &node.fixed, &vars),
            },
            Err(microlp::Error::Infeasible) => None,
            Err(_) => cold_node(lp, &node.fixed, &vars),
        };
    }
    stats.seconds = started.elapsed().as_secs_f64();
    finish(sign, incumbent, stats)
}

/// Re-solve a node from scratch after a warm start failed numerically.
fn cold_node(
    lp: &LinearProgram,
    fixed: &[(VarId, f64)],
    vars: &[microlp::Variable],
) -> Option<(Solution, Vec<(VarId, f64)>)> {
    let mut work = lp.clone();
    for &(v, x) in fixed {
        work.set_bounds(v, x, x);
    }
    let (problem, fresh) = to_problem(&work);
    debug_assert_eq!(fresh.len(), vars.len());
    let sol = problem.solve().ok()?.into_solution().ok()?;
    Some((sol, fixed.to_vec()))
}

fn most_fractional(binaries: &[VarId], values: &[f64]) -> Option<VarId> {
    let mut branch: Option<(VarId, f64)> = None;
    for &v in binaries {
        let x = values[v.0];
        let frac = (x - x.floor()).min(x.ceil() - x);
        if frac > INT_TOL && branch.map_or(true, |(_, f)| frac > f) {
            branch = Some((v, frac));
        }
    }
    branch.map(|(v, _)| v)
}

struct Pruning {
    integer_part: bool,
    integral_objective: bool,
}

impl Pruning {
    fn new(lp: &LinearProgram, opts: &MipOptions) -> Self {
        Self {
            integer_part: opts.integer_part,
            integral_objective: lp.objective_offset.fract() == 0.0
                && lp
                    .objective
                    .iter()
                    .all(|&(v, c)| lp.variables[v.0].binary && c.fract() == 0.0),
        }
    }

    /// Whether a node with relaxation `key` (minimization form) can be dropped.
    fn cuts(&self, key: f64, incumbent: &Option<(f64, Vec<f64>)>) -> bool {
        let Some((best, _)) = incumbent else {
            return false;
        };
        if self.integer_part {
            (key - 1e-6).ceil() >= (best - 1e-9).ceil()
        } else if self.integral_objective {
            (key - 1e-6).ceil() >= best - 1e-9
        } else {
            key >= best - 1e-9
        }
    }
}

fn limit_result(
    sign: f64,
    incumbent: Option<(f64, Vec<f64>)>,
    mut stats: SolveStats,
    started: Instant,
) -> SolveResult {
    stats.seconds = started.elapsed().as_secs_f64();
    match incumbent {
        Some((key, values)) => SolveResult {
            status: SolveStatus::IterationLimit,
            objective: sign * key,
            values,
            stats,
            diagnostic: Some("node limit reached".into()),
        },
        None => SolveResult {
            stats,
            ..SolveResult::failed(
                SolveStatus::IterationLimit,
                Some("node limit reached".into()),
            )
        },
    }
}

fn finish(sign: f64, incumbent: Option<(f64, Vec<f64>)>, stats: SolveStats) -> SolveResult {
    match incumbent {
        Some((key, values)) => SolveResult {
            status: SolveStatus::Optimal,
            objective: sign * key,
            values,
            stats,
            diagnostic: None,
        },
        None => SolveResult {
            stats,
            ..SolveResult::failed(SolveStatus::Infeasible, None)
        },
    }
}

/// Best-first search over any backend, solving every node from scratch.
pub fn solve_mip_with(
    backend: &dyn LpBackend,
    lp: &LinearProgram,
    opts: &MipOptions,
) -> SolveResult {
    let started = Instant::now();
    let sign = match lp.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let binaries: Vec<VarId> = lp.binaries().collect();
    let prune = Pruning::new(lp, opts);

    let mut heap = BinaryHeap::new();
    heap.push(Node {
        bound: f64::NEG_INFINITY,
        seq: 0,
        fixed: Vec::new(),
    });
    let mut seq = 1;
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut stats = SolveStats::default();
    let mut work = lp.clone();

    let pruned = |key: f64, inc: &Option<(f64, Vec<f64>)>| prune.cuts(key, inc);

    while let Some(node) = heap.pop() {
        if pruned(node.bound, &incumbent) {
            continue;
        }
        if stats.nodes >= opts.node_limit {
            stats.seconds = started.elapsed().as_secs_f64();
            return match incumbent {
                Some((key, values)) => SolveResult {
                    status: SolveStatus::IterationLimit,
                    objective: sign * key,
                    values,
                    stats,
                    diagnostic: Some("node limit reached".into()),
                },
                None => SolveResult {
                    stats,
                    ..SolveResult::failed(
                        SolveStatus::IterationLimit,
                        Some("node limit reached".into()),
                    )
                },
            };
        }
        for (i, v) in lp.variables.iter().enumerate() {
            work.variables[i].lower = v.lower;
            work.variables[i].upper = v.upper;
        }
        for &(var, value) in &node.fixed {
            work.set_bounds(var, value, value);
        }
        let relax = backend.solve(&work);
        stats.nodes += 1;
        stats.iterations += relax.stats.iterations;
        match relax.status {
            SolveStatus::Optimal => {}
            SolveStatus::Infeasible => continue,
            status => {
                stats.seconds = started.elapsed().as_secs_f64();
                return SolveResult {
                    stats,
                    ..SolveResult::failed(status, relax.diagnostic)
                };
            }
        }
        let key = sign * relax.objective;
        if pruned(key, &incumbent) {
            continue;
        }
        let mut branch: Option<(VarId, f64)> = None;
        for &v in &binaries {
            let x = relax.values[v.0];
            let frac = (x - x.floor()).min(x.ceil() - x);
            if frac > INT_TOL && branch.map_or(true, |(_, f)| frac > f) {
                branch = Some((v, frac));
            }
        }
        match branch {
            None => {
                let mut values = relax.values;
                for &v in &binaries {
                    values[v.0] = values[v.0].round();
                }
                if incumbent.as_ref().map_or(true, |(best, _)| key < *best) {
                    incumbent = Some((key, values));
                }
            }
            Some((var, _)) => {
                for value in [0.0, 1.0] {
                    let mut fixed = node.fixed.clone();
                    fixed.push((var, value));
                    heap.push(Node {
                        bound: key,
                        seq,
                        fixed,
                    });
                    seq += 1;
                }
            }
        }
    }
    stats.seconds = started.elapsed().as_secs_f64();
    match incumbent {
        Some((key, values)) => SolveResult {
            status: SolveStatus::Optimal,
            objective: sign * key,
            values,
            stats,
            diagnostic: None,
        },
        None => SolveResult {
            stats,
            ..SolveResult::failed(SolveStatus::Infeasible, None)
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::Relation;

    fn knapsack() -> LinearProgram {
        let mut lp = LinearProgram::new("knap", Sense::Maximize);
        let w = [4.0, 3.0, 5.0, 2.0, 6.0];
        let v = [7.0, 5.0, 8.0, 3.0, 9.0];
        let xs: Vec<_> = (0..5).map(|i| lp.add_binary(format!("x{i}"))).collect();
        lp.add_row(
            "cap",
            xs.iter().zip(w).map(|(&x, w)| (x, w)),
            Relation::Le,
            11.0,
        );
        lp.set_objective(xs.iter().zip(v).map(|(&x, v)| (x, v)));
        lp
    }

    #[test]
    fn knapsack_matches_enumeration() {
        let lp = knapsack();
        let mut best = f64::NEG_INFINITY;
        for mask in 0u32..32 {
            let x: Vec<f64> = (0..5).map(|i| f64::from((mask >> i) & 1)).collect();
            if lp.max_violation(&x) <= 1e-9 {
                best = best.max(lp.objective_value(&x));
            }
        }
        let r = solve_mip(&lp, &MipOptions::default());
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.objective - best).abs() < 1e-9);
    }

    #[test]
    fn fixed_binaries_solve_as_lp() {
        let mut lp = knapsack();
        for i in 0..5 {
            lp.set_bounds(VarId(i), 1.0, 1.0);
        }
        lp.constraints.clear();
        let r = solve_mip(&lp, &MipOptions::default());
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_eq!(r.stats.nodes, 1);
        assert!((r.objective - 32.0).abs() < 1e-9);
    }

    #[test]
    fn node_limit_reports_iteration_limit() {
        let r = solve_mip(
            &knapsack(),
            &MipOptions {
                node_limit: 1,
                ..Default::default()
            },
        );
        assert_eq!(r.status, SolveStatus::IterationLimit);
    }
}
