//! Property suites that need no benchmark files.

mod common;

use common::{random, simplex};
use lpac::lp::{solve_lp, solve_mip, solve_mip_with, MicroLp, MipOptions, SolveStatus};
use lpac::models::{build, default_targets, ModelSpec};
use lpac::network::shunt_power;
use lpac::{build_ybus, line_coefficients, BusKind, Complex, PowerNetwork};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_voltages(n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vm = (0..n).map(|_| rng.gen_range(0.9..1.1)).collect();
    let va = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
    (vm, va)
}

/// Bus injections summed from the directed line equations and bus shunts.
fn injections_from_lines(net: &PowerNetwork, vm: &[f64], va: &[f64]) -> Vec<Complex> {
    let mut s = shunt_power(net, vm);
    for dirs in line_coefficients(net) {
        for c in dirs {
            let (p, q) = c.flow(vm, va);
            s[c.from] += Complex::new(p, q);
        }
    }
    s
}

fn model_specs(net: &PowerNetwork) -> Vec<ModelSpec> {
    vec![
        ModelSpec::ldc(),
        ModelSpec::cold(),
        ModelSpec::warm(default_targets(net)),
    ]
}

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 64,
        rng_seed: proptest::test_runner::RngSeed::Fixed(20_130_601),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn ybus_agrees_with_line_equations(seed in any::<u64>()) {
        let net = random::network(seed);
        let (vm, va) = random_voltages(net.bus_count(), seed ^ 0x55);
        let v: Vec<Complex> = vm.iter().zip(&va).map(|(&m, &a)| Complex::from_polar(m, a)).collect();
        let from_ybus = build_ybus(&net).injections(&v);
        let from_lines = injections_from_lines(&net, &vm, &va);
        for (a, b) in from_ybus.iter().zip(&from_lines) {
            prop_assert!((a - b).norm() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn lp_matches_dense_simplex(seed in any::<u64>(), m in 1usize..=30, n in 1usize..=60) {
        let lp = random::lp(seed, m, n);
        let r = solve_lp(&lp);
        match simplex::solve(&lp) {
            simplex::Outcome::Optimal(z) => {
                prop_assert_eq!(r.status, SolveStatus::Optimal);
                prop_assert!((r.objective - z).abs() <= 1e-6 * z.abs().max(1.0), "{} vs {z}", r.objective);
                prop_assert!(lp.max_violation(&r.values) <= 1e-7);
            }
            simplex::Outcome::Infeasible => prop_assert_eq!(r.status, SolveStatus::Infeasible),
            simplex::Outcome::Unbounded => prop_assert_eq!(r.status, SolveStatus::Unbounded),
        }
    }

    #[test]
    fn mip_matches_enumeration(seed in any::<u64>(), k in 1usize..=12) {
        let lp = random::mip(seed, k);
        let maximize = lp.sense == lpac::lp::Sense::Maximize;
        let mut best: Option<f64> = None;
        for mask in 0u32..(1 << k) {
            let mut fixed = lp.clone();
            for (j, b) in lp.binaries().enumerate() {
                let x = f64::from((mask >> j) & 1);
                fixed.set_bounds(b, x, x);
            }
            if let simplex::Outcome::Optimal(z) = simplex::solve(&fixed) {
                best = Some(match best {
                    None => z,
                    Some(b) if maximize => b.max(z),
                    Some(b) => b.min(z),
                });
            }
        }
        let warm = solve_mip(&lp, &MipOptions::default());
        let cold = solve_mip_with(&MicroLp, &lp, &MipOptions::default());
        for r in [&warm, &cold] {
            match best {
                Some(z) => {
                    prop_assert_eq!(r.status, SolveStatus::Optimal);
                    prop_assert!((r.objective - z).abs() <= 1e-6 * z.abs().max(1.0), "{} vs {z}", r.objective);
                    prop_assert!(lp.max_violation(&r.values) <= 1e-7);
                    for b in lp.binaries() {
                        prop_assert!(r.values[b.0] == 0.0 || r.values[b.0] == 1.0);
                    }
                }
                None => prop_assert_eq!(r.status, SolveStatus::Infeasible),
            }
        }
    }

    #[test]
    fn linear_solutions_satisfy_kcl(seed in any::<u64>()) {
        let net = random::network(seed);
        let sched = net.scheduled_injection();
        let coefs = line_coefficients(&net);
        for spec in model_specs(&net) {
            let model = build(&net, &spec).unwrap();
            let sol = model.solve().unwrap();
            prop_assert!(model.lp.max_violation(&sol.values) <= 1e-7);
            // Sum the extracted directed flows and shunt use per bus.
            let mut p: Vec<f64> = model.shunt.iter().map(|s| s.0.eval(&sol.values)).collect();
            let mut q: Vec<f64> = model.shunt.iter().map(|s| s.1.eval(&sol.values)).collect();
            for (dirs, f) in coefs.iter().zip(&sol.flows) {
                for (c, &(fp, fq)) in dirs.iter().zip(f) {
                    p[c.from] += fp;
                    q[c.from] += fq;
                }
            }
            for (i, b) in net.buses().iter().enumerate() {
                if b.kind == BusKind::Slack {
                    continue;
                }
                prop_assert!((p[i] - sched[i].re).abs() < 1e-7, "{} bus {}: p {} vs {}", spec.label(), b.id, p[i], sched[i].re);
                if sol.reactive && b.kind == BusKind::Load {
                    prop_assert!((q[i] - sched[i].im).abs() < 1e-7, "{} bus {}: q", spec.label(), b.id);
                }
            }
            // LDC flows are the textbook -b (theta_n - theta_m - shift).
            if !sol.reactive {
                for (dirs, f) in coefs.iter().zip(&sol.flows) {
                    for (c, &(fp, _)) in dirs.iter().zip(f) {
                        let d = sol.theta[c.from] - sol.theta[c.to] - c.shift;
                        prop_assert!((fp + c.b * d).abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn cosine_is_tight_at_the_optimum(seed in any::<u64>()) {
        let net = random::network(seed);
        let coefs = line_coefficients(&net);
        for spec in model_specs(&net).into_iter().skip(1) {
            let model = build(&net, &spec).unwrap();
            let sol = model.solve().unwrap();
            let pwl = model.pwl.as_ref().unwrap();
            for (k, c) in sol.cos.iter().enumerate() {
                let d = coefs[k][0].angle(&sol.theta);
                let envelope = pwl.envelope_unchecked(d).min(1.0);
                let c = c.unwrap();
                prop_assert!((c - envelope).abs() < 1e-7, "{} line {k}: cos {c} vs envelope {envelope} at {d}", spec.label());
                prop_assert!(c >= pwl.chord.at(d) - 1e-7);
            }
        }
    }
}

/// Tightness is not guaranteed: on this radial instance, lifting the cosine
/// of line 2 to its envelope shifts the angle of line 0 by more than it
/// gains. The optimum is confirmed by the dense simplex.
#[test]
fn coupled_lines_can_leave_a_cosine_below_its_envelope() {
    let net = random::network(5_877_587_061_373_652_119);
    let model = build(&net, &ModelSpec::cold()).unwrap();
    let sol = model.solve().unwrap();
    let simplex::Outcome::Optimal(z) = simplex::solve(&model.lp) else {
        panic!("oracle failed");
    };
    assert!((sol.objective - z).abs() < 1e-9);
    let d = line_coefficients(&net)[2][0].angle(&sol.theta);
    let envelope = model.pwl.as_ref().unwrap().envelope_unchecked(d);
    assert!(envelope - sol.cos[2].unwrap() > 1e-4);
}

#[test]
fn lossless_untapped_ybus_rows_sum_to_zero() {
    for seed in 0..50 {
        let net = random::network(seed);
        let (base, mut buses, mut lines, gens) = net.into_parts();
        for b in &mut buses {
            b.shunt = Complex::new(0.0, 0.0);
        }
        for l in &mut lines {
            l.charge = Complex::new(0.0, 0.0);
            l.transformer = None;
        }
        let net = PowerNetwork::new(base, buses, lines, gens).unwrap();
        let y = build_ybus(&net);
        assert!(y.is_symmetric(0.0));
        for i in 0..net.bus_count() {
            let row: Complex = (0..net.bus_count()).map(|j| y.get(i, j)).sum();
            assert!(row.norm() < 1e-12, "seed {seed} row {i}: {row}");
        }
    }
}

#[test]
fn integer_part_pruning_keeps_the_count() {
    for seed in 0..200 {
        let mut lp = random::mip(seed, 8);
        lp.sense = lpac::lp::Sense::Minimize;
        // Unit cost per binary plus a tiebreak in (-1, 0] on the continuous part.
        let cont: Vec<_> = (0..lp.variables.len())
            .filter(|&j| !lp.variables[j].binary)
            .map(lpac::lp::VarId)
            .collect();
        let span: f64 = cont.iter().map(|v| lp.variables[v.0].upper).sum::<f64>() + 1.0;
        lp.set_objective(
            lp.binaries()
                .map(|b| (b, 1.0))
                .chain(cont.iter().map(|&v| (v, -0.5 / span)))
                .collect::<Vec<_>>(),
        );
        let exact = solve_mip_with(&MicroLp, &lp, &MipOptions::default());
        let fast = solve_mip(
            &lp,
            &MipOptions {
                integer_part: true,
                ..Default::default()
            },
        );
        assert_eq!(exact.status, fast.status, "seed {seed}");
        if exact.is_optimal() {
            assert_eq!(
                exact.objective.ceil(),
                fast.objective.ceil(),
                "seed {seed}: {} vs {}",
                exact.objective,
                fast.objective
            );
            assert!(lp.max_violation(&fast.values) <= 1e-7);
        }
    }
}
