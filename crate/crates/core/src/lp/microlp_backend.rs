use web_time::Instant;

use microlp::{ComparisonOp, OptimizationDirection, Problem, Variable};

use super::{LinearProgram, LpBackend, Relation, Sense, SolveResult, SolveStats, SolveStatus};

/// Sparse revised simplex from the `microlp` crate.
#[derive(Debug, Clone, Copy, Default)]
pub struct MicroLp;

impl LpBackend for MicroLp {
    fn solve(&self, lp: &LinearProgram) -> SolveResult {
        let started = Instant::now();
        if lp.variables.is_empty() {
            let feasible = lp
                .constraints
                .iter()
                .all(|c| c.violation(&[]) <= super::FEAS_TOL);
            return if feasible {
                SolveResult {
                    status: SolveStatus::Optimal,
                    objective: lp.objective_offset,
                    values: Vec::new(),
                    stats: SolveStats::default(),
                    diagnostic: None,
                }
            } else {
                SolveResult::failed(SolveStatus::Infeasible, None)
            };
        }
        let (problem, vars) = to_problem(lp);
        let outcome = match problem.solve() {
            Ok(o) => o,
            Err(microlp::Error::Infeasible) => {
                return SolveResult::failed(SolveStatus::Infeasible, None)
            }
            Err(microlp::Error::Unbounded) => {
                return SolveResult::failed(SolveStatus::Unbounded, None)
            }
            Err(e) => return SolveResult::failed(SolveStatus::IterationLimit, Some(e.to_string())),
        };
        let iterations = outcome.stats().lp_iterations;
        let solution = match outcome.into_solution() {
            Ok(s) => s,
            Err(_) => {
                return SolveResult::failed(
                    SolveStatus::IterationLimit,
                    Some("simplex interrupted".into()),
                )
            }
        };
        let values: Vec<f64> = vars.iter().map(|&v| solution.var_value(v)).collect();
        let violation = lp.max_violation(&values);
        let diagnostic =
            (violation > super::FEAS_TOL).then(|| format!("primal violation {violation:.3e}"));
        SolveResult {
            status: SolveStatus::Optimal,
            objective: lp.objective_value(&values),
            values,
            stats: SolveStats {
                iterations,
                nodes: 0,
                seconds: started.elapsed().as_secs_f64(),
            },
            diagnostic,
        }
    }
}

/// Translate to a `microlp` problem with every variable continuous.
pub(crate) fn to_problem(lp: &LinearProgram) -> (Problem, Vec<Variable>) {
    let direction = match lp.sense {
        Sense::Minimize => OptimizationDirection::Minimize,
        Sense::Maximize => OptimizationDirection::Maximize,
    };
    let mut obj = vec![0.0; lp.variables.len()];
    for &(v, c) in &lp.objective {
        obj[v.0] += c;
    }
    let mut problem = Problem::new(direction);
    let vars: Vec<_> = lp
        .variables
        .iter()
        .zip(&obj)
        .map(|(v, &c)| problem.add_var(c, (v.lower, v.upper)))
        .collect();
    for row in &lp.constraints {
        let op = match row.relation {
            Relation::Le => ComparisonOp::Le,
            Relation::Ge => ComparisonOp::Ge,
            Relation::Eq => ComparisonOp::Eq,
        };
        let terms: Vec<_> = row.terms.iter().map(|&(v, c)| (vars[v.0], c)).collect();
        problem.add_constraint(terms.as_slice(), op, row.rhs);
    }
    (problem, vars)
}
