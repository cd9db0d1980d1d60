//! Seeded random instances for property tests.

use lpac::lp::{LinearProgram, Relation, Sense, VarId};
use lpac::network::Transformer;
use lpac::{Bus, BusKind, Complex, Generator, LineRecord, PowerNetwork};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A connected network with 3 to 8 buses, sparse bus ids, transformers,
/// phase shifters, line charging, bus shunts and light loading.
pub fn network(seed: u64) -> PowerNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(3..=8);
    let ids: Vec<usize> = (0..n).map(|i| 3 * i + 1 + (i % 2)).collect();
    let mut buses = Vec::with_capacity(n);
    let mut gens = Vec::new();
    for (i, &id) in ids.iter().enumerate() {
        let kind = if i == 0 {
            BusKind::Slack
        } else if rng.gen_bool(0.3) {
            BusKind::Generator
        } else {
            BusKind::Load
        };
        let setpoint = if kind == BusKind::Load {
            1.0
        } else {
            rng.gen_range(0.98..1.05)
        };
        let shunt = if rng.gen_bool(0.3) {
            Complex::new(rng.gen_range(0.0..0.02), rng.gen_range(-0.05..0.1))
        } else {
            Complex::new(0.0, 0.0)
        };
        buses.push(Bus {
            id,
            kind,
            voltage_setpoint: setpoint,
            shunt,
            load: Complex::new(rng.gen_range(0.0..0.3), rng.gen_range(-0.02..0.1)),
            base_kv: 138.0,
        });
        if kind != BusKind::Load {
            gens.push(Generator {
                bus: id,
                p_output: if kind == BusKind::Slack {
                    0.0
                } else {
                    rng.gen_range(0.0..0.4)
                },
                q_output: 0.0,
                p_max: 1.0,
                q_min: Some(-1.0),
                q_max: Some(1.0),
                voltage_setpoint: setpoint,
            });
        }
    }
    let mut lines = Vec::new();
    let mut line = |rng: &mut ChaCha8Rng, f: usize, t: usize| {
        let mut l = LineRecord::plain(
            ids[f],
            ids[t],
            Complex::new(rng.gen_range(0.005..0.05), rng.gen_range(0.03..0.3)),
        );
        if rng.gen_bool(0.5) {
            l.charge = Complex::new(0.0, rng.gen_range(0.0..0.1));
        }
        if rng.gen_bool(0.3) {
            l.transformer = Some(Transformer {
                tap: rng.gen_range(0.9..1.1),
                shift: if rng.gen_bool(0.3) {
                    rng.gen_range(-0.1..0.1)
                } else {
                    0.0
                },
            });
        }
        lines.push(l);
    };
    for t in 1..n {
        let f = rng.gen_range(0..t);
        line(&mut rng, f, t);
    }
    for _ in 0..rng.gen_range(0..n) {
        let f = rng.gen_range(0..n);
        let t = rng.gen_range(0..n);
        if f != t {
            line(&mut rng, f, t);
        }
    }
    PowerNetwork::new(100.0, buses, lines, gens).unwrap()
}

/// Random LP with `m` rows and `n` columns. Most instances are built around
/// a known feasible point; the rest may be infeasible or unbounded.
pub fn lp(seed: u64, m: usize, n: usize) -> LinearProgram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sense = if rng.gen_bool(0.5) {
        Sense::Maximize
    } else {
        Sense::Minimize
    };
    let mut lp = LinearProgram::new("random", sense);
    let mut x0 = Vec::with_capacity(n);
    let vars: Vec<VarId> = (0..n)
        .map(|j| {
            let lower = if rng.gen_bool(0.2) {
                rng.gen_range(-5.0..0.0)
            } else {
                0.0
            };
            let upper = if rng.gen_bool(0.8) {
                lower + rng.gen_range(0.5..10.0)
            } else {
                f64::INFINITY
            };
            x0.push(lower + rng.gen_range(0.0..(upper - lower).min(5.0)));
            lp.add_var(format!("x{j}"), lower, upper)
        })
        .collect();
    let planted = rng.gen_bool(0.85);
    for i in 0..m {
        let terms: Vec<(VarId, f64)> = vars
            .iter()
            .filter_map(|&v| rng.gen_bool(0.4).then(|| (v, rng.gen_range(-3.0..3.0))))
            .collect();
        let at: f64 = terms.iter().map(|&(v, c)| c * x0[v.0]).sum();
        let (rel, rhs) = match rng.gen_range(0..10) {
            0 => (
                Relation::Eq,
                if planted {
                    at
                } else {
                    rng.gen_range(-5.0..5.0)
                },
            ),
            1..=3 => (
                Relation::Ge,
                if planted {
                    at - rng.gen_range(0.0..3.0)
                } else {
                    rng.gen_range(-5.0..5.0)
                },
            ),
            _ => (
                Relation::Le,
                if planted {
                    at + rng.gen_range(0.0..3.0)
                } else {
                    rng.gen_range(-5.0..5.0)
                },
            ),
        };
        lp.add_row(format!("r{i}"), terms, rel, rhs);
    }
    lp.set_objective(vars.iter().map(|&v| (v, rng.gen_range(-2.0..2.0))));
    lp
}

/// Random mixed-binary program with `k` binaries and a few bounded
/// continuous columns.
pub fn mip(seed: u64, k: usize) -> LinearProgram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sense = if rng.gen_bool(0.5) {
        Sense::Maximize
    } else {
        Sense::Minimize
    };
    let mut lp = LinearProgram::new("random-mip", sense);
    let mut vars: Vec<VarId> = (0..k).map(|j| lp.add_binary(format!("b{j}"))).collect();
    for j in 0..rng.gen_range(0..=3) {
        vars.push(lp.add_var(format!("y{j}"), 0.0, rng.gen_range(1.0..4.0)));
    }
    for i in 0..rng.gen_range(1..=6) {
        let terms: Vec<(VarId, f64)> = vars
            .iter()
            .filter_map(|&v| {
                rng.gen_bool(0.6)
                    .then(|| (v, rng.gen_range(-4.0..6.0f64).round()))
            })
            .collect();
        let rel = if rng.gen_bool(0.8) {
            Relation::Le
        } else {
            Relation::Ge
        };
        let rhs = match rel {
            Relation::Le => rng.gen_range(0.0..(k as f64 * 2.0 + 1.0)),
            _ => rng.gen_range(-2.0..3.0),
        };
        lp.add_row(format!("r{i}"), terms, rel, rhs);
    }
    lp.set_objective(vars.iter().map(|&v| (v, rng.gen_range(-3.0..5.0))));
    lp
}
