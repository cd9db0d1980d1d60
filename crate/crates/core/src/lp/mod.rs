//! Declarative linear and mixed-integer programs and their solvers.

mod branch;
mod lp_file;
mod microlp_backend;

use std::collections::HashMap;

use serde::Serialize;

pub use branch::{solve_mip, solve_mip_with, MipOptions};
pub use lp_file::write_lp_file;
pub use microlp_backend::MicroLp;

/// Feasibility and optimality tolerance.
pub const FEAS_TOL: f64 = 1e-7;
/// Integrality tolerance for binaries.
pub const INT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub binary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, c)| c * x[v.0]).sum()
    }

    /// How far `x` is outside this row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let a = self.activity(x);
        match self.relation {
            Relation::Le => (a - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - a).max(0.0),
            Relation::Eq => (a - self.rhs).abs(),
        }
    }
}

/// A linear program with optional binary markers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearProgram {
    pub name: String,
    pub sense: Sense,
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub objective: Vec<(VarId, f64)>,
    /// Constant added to the objective value.
    pub objective_offset: f64,
    #[serde(skip)]
    names: HashMap<String, VarId>,
}

impl LinearProgram {
    pub fn new(name: impl Into<String>, sense: Sense) -> Self {
        Self {
            name: name.into(),
            sense,
            variables: Vec::new(),
            constraints: Vec::new(),
            objective: Vec::new(),
            objective_offset: 0.0,
            names: HashMap::new(),
        }
    }

    /// Add a continuous variable. Panics on a duplicate name.
    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> VarId {
        let name = name.into();
        let id = VarId(self.variables.len());
        assert!(
            self.names.insert(name.clone(), id).is_none(),
            "duplicate variable {name}"
        );
        self.variables.push(Variable {
            name,
            lower,
            upper,
            binary: false,
        });
        id
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> VarId {
        let id = self.add_var(name, 0.0, 1.0);
        self.variables[id.0].binary = true;
        id
    }

    /// Add a row. Repeated variables are merged and zero coefficients dropped.
    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        terms: impl IntoIterator<Item = (VarId, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> usize {
        let terms = merge(terms);
        debug_assert!(terms.iter().all(|(v, _)| v.0 < self.variables.len()));
        self.constraints.push(Constraint {
            name: name.into(),
            terms,
            relation,
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn set_objective(&mut self, terms: impl IntoIterator<Item = (VarId, f64)>) {
        self.objective = merge(terms);
    }

    pub fn add_objective(&mut self, var: VarId, coef: f64) {
        let mut terms = std::mem::take(&mut self.objective);
        terms.push((var, coef));
        self.objective = merge(terms);
    }

    pub fn var(&self, name: &str) -> Option<VarId> {
        self.names.get(name).copied()
    }

    pub fn set_bounds(&mut self, var: VarId, lower: f64, upper: f64) {
        self.variables[var.0].lower = lower;
        self.variables[var.0].upper = upper;
    }

    pub fn binaries(&self) -> impl Iterator<Item = VarId> + '_ {
        self.variables
            .iter()
            .enumerate()
            .filter(|(_, v)| v.binary)
            .map(|(i, _)| VarId(i))
    }

    pub fn has_binaries(&self) -> bool {
        self.variables.iter().any(|v| v.binary)
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective_offset + self.objective.iter().map(|&(v, c)| c * x[v.0]).sum::<f64>()
    }

    /// Largest bound or row violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let bounds = self
            .variables
            .iter()
            .zip(x)
            .map(|(v, &xi)| (v.lower - xi).max(xi - v.upper).max(0.0));
        let rows = self.constraints.iter().map(|c| c.violation(x));
        bounds.chain(rows).fold(0.0, f64::max)
    }

    /// Rows whose name starts with `prefix` are removed.
    pub fn remove_rows(&mut self, prefix: &str) {
        self.constraints.retain(|c| !c.name.starts_with(prefix));
    }
}

fn merge(terms: impl IntoIterator<Item = (VarId, f64)>) -> Vec<(VarId, f64)> {
    let mut out: Vec<(VarId, f64)> = Vec::new();
    for (v, c) in terms {
        match out.iter_mut().find(|(w, _)| *w == v) {
            Some((_, acc)) => *acc += c,
            None => out.push((v, c)),
        }
    }
    out.retain(|&(_, c)| c != 0.0);
    out
}

/// Affine expression `constant + sum(coef * var)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Expr {
    pub constant: f64,
    pub terms: Vec<(VarId, f64)>,
}

impl Expr {
    pub fn constant(c: f64) -> Self {
        Self {
            constant: c,
            terms: Vec::new(),
        }
    }

    pub fn term(&mut self, var: VarId, coef: f64) -> &mut Self {
        self.terms.push((var, coef));
        self
    }

    pub fn add_scaled(&mut self, other: &Expr, scale: f64) {
        self.constant += scale * other.constant;
        self.terms
            .extend(other.terms.iter().map(|&(v, c)| (v, scale * c)));
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(v, c)| c * x[v.0]).sum::<f64>()
    }
}

impl LinearProgram {
    /// Add `lhs (relation) rhs` with the constant moved to the right.
    pub fn add_expr_row(
        &mut self,
        name: impl Into<String>,
        lhs: &Expr,
        relation: Relation,
        rhs: f64,
    ) -> usize {
        self.add_row(
            name,
            lhs.terms.iter().copied(),
            relation,
            rhs - lhs.constant,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SolveStats {
    pub iterations: u64,
    pub nodes: u64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub objective: f64,
    /// Primal values, empty unless a feasible point is known.
    pub values: Vec<f64>,
    pub stats: SolveStats,
    pub diagnostic: Option<String>,
}

impl SolveResult {
    pub fn failed(status: SolveStatus, diagnostic: Option<String>) -> Self {
        Self {
            status,
            objective: f64::NAN,
            values: Vec::new(),
            stats: SolveStats::default(),
            diagnostic,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

/// Seam for continuous LP solvers. Binary markers are ignored: the backend
/// solves the relaxation.
pub trait LpBackend: Sync {
    fn solve(&self, lp: &LinearProgram) -> SolveResult;
}

/// Solve the continuous relaxation with the bundled backend.
pub fn solve_lp(lp: &LinearProgram) -> SolveResult {
    MicroLp.solve(lp)
}
