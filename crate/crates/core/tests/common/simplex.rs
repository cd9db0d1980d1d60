//! Dense two-phase tableau simplex with Bland's rule. Slow and simple, used
//! only to check the production LP backend.

use lpac::lp::{LinearProgram, Relation, Sense, VarId};

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Optimal(f64),
    Infeasible,
    Unbounded,
}

const EPS: f64 = 1e-9;

struct Tableau {
    /// Rows are constraints; the last column is the right-hand side.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for x in &mut self.rows[r] {
            *x /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * y;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Maximize `cost . x` over the columns allowed to enter.
    fn optimize(&mut self, cost: &[f64], allowed: &dyn Fn(usize) -> bool) -> Result<(), Outcome> {
        let width = cost.len();
        loop {
            let reduced = |j: usize| {
                cost[j]
                    - self
                        .rows
                        .iter()
                        .zip(&self.basis)
                        .map(|(row, &b)| cost[b] * row[j])
                        .sum::<f64>()
            };
            let Some(enter) = (0..width).find(|&j| allowed(j) && reduced(j) > EPS) else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[enter] > EPS {
                    let ratio = row[width] / row[enter];
                    let better = match leave {
                        None => true,
                        Some((l, best)) => {
                            ratio < best - EPS
                                || (ratio <= best + EPS && self.basis[i] < self.basis[l])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return Err(Outcome::Unbounded),
            }
        }
    }

    fn value(&self, cost: &[f64]) -> f64 {
        let w = cost.len();
        self.rows
            .iter()
            .zip(&self.basis)
            .map(|(row, &b)| cost[b] * row[w])
            .sum()
    }
}

/// Replace every column without a finite lower bound by a difference of two
/// nonnegative columns.
fn split_free(lp: &LinearProgram) -> LinearProgram {
    let mut out = LinearProgram::new(lp.name.clone(), lp.sense);
    out.objective_offset = lp.objective_offset;
    let mut map: Vec<Vec<(VarId, f64)>> = Vec::with_capacity(lp.variables.len());
    for (j, v) in lp.variables.iter().enumerate() {
        if v.lower.is_finite() {
            map.push(vec![(out.add_var(format!("v{j}"), v.lower, v.upper), 1.0)]);
        } else {
            let p = out.add_var(format!("p{j}"), 0.0, f64::INFINITY);
            let m = out.add_var(format!("m{j}"), 0.0, f64::INFINITY);
            if v.upper.is_finite() {
                out.add_row(
                    format!("u{j}"),
                    [(p, 1.0), (m, -1.0)],
                    Relation::Le,
                    v.upper,
                );
            }
            map.push(vec![(p, 1.0), (m, -1.0)]);
        }
    }
    let expand = |terms: &[(VarId, f64)]| -> Vec<(VarId, f64)> {
        terms
            .iter()
            .flat_map(|&(v, c)| map[v.0].iter().map(move |&(w, s)| (w, s * c)))
            .collect()
    };
    for c in &lp.constraints {
        out.add_row(c.name.clone(), expand(&c.terms), c.relation, c.rhs);
    }
    out.set_objective(expand(&lp.objective));
    out
}

/// Solve an LP. Binary markers are ignored.
pub fn solve(lp: &LinearProgram) -> Outcome {
    if lp.variables.iter().any(|v| !v.lower.is_finite()) {
        return solve(&split_free(lp));
    }
    let n = lp.variables.len();
    // Shift x = lower + y so every variable is y >= 0.
    let lower: Vec<f64> = lp.variables.iter().map(|v| v.lower).collect();
    let mut dense: Vec<(Vec<f64>, Relation, f64)> = Vec::new();
    for c in &lp.constraints {
        let mut a = vec![0.0; n];
        for &(v, x) in &c.terms {
            a[v.0] += x;
        }
        let shift: f64 = a.iter().zip(&lower).map(|(a, l)| a * l).sum();
        dense.push((a, c.relation, c.rhs - shift));
    }
    for (j, v) in lp.variables.iter().enumerate() {
        if v.upper.is_finite() {
            let mut a = vec![0.0; n];
            a[j] = 1.0;
            dense.push((a, Relation::Le, v.upper - v.lower));
        }
    }
    // Normalize to nonnegative right-hand sides.
    for (a, rel, b) in &mut dense {
        if *b < 0.0 {
            for x in a.iter_mut() {
                *x = -*x;
            }
            *b = -*b;
            *rel = match rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
    }
    let m = dense.len();
    let slacks = dense.iter().filter(|d| d.1 != Relation::Eq).count();
    let artificials = dense.iter().filter(|d| d.1 != Relation::Le).count();
    let width = n + slacks + artificials;
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let (mut s, mut a) = (n, n + slacks);
    for (coef, rel, b) in &dense {
        let mut row = vec![0.0; width + 1];
        row[..n].copy_from_slice(coef);
        row[width] = *b;
        match rel {
            Relation::Le => {
                row[s] = 1.0;
                basis.push(s);
                s += 1;
            }
            Relation::Ge => {
                row[s] = -1.0;
                s += 1;
                row[a] = 1.0;
                basis.push(a);
                a += 1;
            }
            Relation::Eq => {
                row[a] = 1.0;
                basis.push(a);
                a += 1;
            }
        }
        rows.push(row);
    }
    let mut t = Tableau { rows, basis };
    let is_art = |j: usize| j >= n + slacks;

    let phase1: Vec<f64> = (0..width)
        .map(|j| if is_art(j) { -1.0 } else { 0.0 })
        .collect();
    t.optimize(&phase1, &|_| true)
        .expect("phase one is bounded");
    if t.value(&phase1) < -1e-7 {
        return Outcome::Infeasible;
    }
    // Drive zero-level artificials out of the basis, dropping redundant rows.
    let mut r = 0;
    while r < t.rows.len() {
        if is_art(t.basis[r]) {
            match (0..width).find(|&j| !is_art(j) && t.rows[r][j].abs() > EPS) {
                Some(j) => t.pivot(r, j),
                None => {
                    t.rows.remove(r);
                    t.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }

    let sign = match lp.sense {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
    };
    let mut cost = vec![0.0; width];
    for &(v, c) in &lp.objective {
        cost[v.0] += sign * c;
    }
    if let Err(o) = t.optimize(&cost, &|j| !is_art(j)) {
        return o;
    }
    let mut x = lower.clone();
    for (row, &b) in t.rows.iter().zip(&t.basis) {
        if b < n {
            x[b] += row[width];
        }
    }
    Outcome::Optimal(lp.objective_value(&x))
}
