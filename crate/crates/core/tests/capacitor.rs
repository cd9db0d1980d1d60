mod common;

use lpac::capacitor::*;
use lpac::lp::{solve_mip, solve_mip_with, MicroLp, SolveStatus};
use lpac::{solve_ac, BusKind, CppError, PowerNetwork, SolverOptions};

fn ieee57c() -> Option<(PowerNetwork, PowerNetwork)> {
    let net = common::load("case57")?;
    let c = make_ieee57c(&net).unwrap();
    Some((net, c))
}

#[test]
fn modified_case_is_stressed() {
    let Some((net, c)) = ieee57c() else { return };
    assert!(c.lines().iter().all(|l| l.tap() == 1.0));
    assert_eq!(c.generators().len(), 4);
    assert!(c.generators().len() < net.generators().len());
    for id in [2, 6, 9] {
        assert_eq!(c.buses()[c.bus_index(id).unwrap()].kind, BusKind::Load);
    }
    let ac = solve_ac(&c, &SolverOptions::default());
    assert!(ac.converged);
    let min_v = ac.vm.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(min_v < 0.9, "{min_v}");
    let setpoints = c
        .buses()
        .iter()
        .filter(|b| b.kind != BusKind::Load)
        .map(|b| b.voltage_setpoint)
        .fold(f64::INFINITY, f64::min);
    assert_eq!(setpoints, 0.985);
}

#[test]
fn healthy_ieee57_needs_nothing_at_090() {
    let Some((net, _)) = ieee57c() else { return };
    let inst = CppInstance::new(net, 30.0, 0.9).unwrap();
    let sol = place(&inst, &default_mip_options(), &SolverOptions::default()).unwrap();
    assert_eq!(sol.count, 0);
    let v = sol.verification.unwrap();
    assert!(v.converged);
    assert_eq!(v.min_v_violation, 0.0);
    assert_eq!(v.max_q_violation, 0.0);
    // The solved case itself peaks above the placement ceiling at bus 46.
    let Some(reference) = common::reference("case57") else {
        return;
    };
    let peak = reference.iter().map(|r| r.1).fold(f64::MIN, f64::max);
    assert!((v.max_v_violation - (peak - V_CEILING)).abs() < 1e-6);
}

#[test]
fn zero_floor_needs_no_capacitor() {
    let Some((_, c)) = ieee57c() else { return };
    let inst = CppInstance::new(c, 30.0, 0.0).unwrap();
    let sol = build_cpp(&inst)
        .unwrap()
        .solve(&inst, &default_mip_options())
        .unwrap();
    assert_eq!(sol.count, 0);
}

#[test]
fn first_rows_of_the_sweep() {
    let Some((_, c)) = ieee57c() else { return };
    let rows = sweep(
        &c,
        30.0,
        &[0.885, 0.935, 0.96],
        &default_mip_options(),
        &SolverOptions::default(),
    );
    let counts: Vec<usize> = rows.iter().map(|r| r.as_ref().unwrap().count).collect();
    assert_eq!(counts, vec![1, 3, 5]);
    for r in &rows[..2] {
        let v = r.as_ref().unwrap().verification.clone().unwrap();
        assert!(v.converged);
        assert_eq!(
            (v.min_v_violation, v.max_v_violation, v.max_q_violation),
            (0.0, 0.0, 0.0)
        );
    }
}

#[test]
fn floor_above_the_lowest_setpoint_is_infeasible() {
    let Some((_, c)) = ieee57c() else { return };
    let inst = CppInstance::new(c, 30.0, 0.99).unwrap();
    let err = place(&inst, &default_mip_options(), &SolverOptions::default()).unwrap_err();
    assert!(matches!(err, CppError::Infeasible(v) if v == 0.99));
}

#[test]
fn invalid_inputs() {
    let Some((_, c)) = ieee57c() else { return };
    assert!(matches!(
        CppInstance::new(c.clone(), 30.0, 1.05),
        Err(CppError::InvalidFloor(_))
    ));
    assert!(matches!(
        CppInstance::new(c, 0.0, 0.9),
        Err(CppError::InvalidCap(_))
    ));
}

#[test]
fn search_routes_agree_and_links_are_tight() {
    let Some((_, c)) = ieee57c() else { return };
    for v in [0.885, 0.935] {
        let inst = CppInstance::new(c.clone(), 30.0, v).unwrap();
        let cpp = build_cpp(&inst).unwrap();
        let opts = default_mip_options();
        let warm = solve_mip(&cpp.model.lp, &opts);
        let cold = solve_mip_with(&MicroLp, &cpp.model.lp, &opts);
        assert_eq!(warm.status, SolveStatus::Optimal);
        assert_eq!(cold.status, SolveStatus::Optimal);
        assert_eq!(warm.objective.ceil(), cold.objective.ceil(), "floor {v}");
        for r in [&warm, &cold] {
            for (q, b) in cpp.injection.iter().zip(&cpp.placed) {
                if let (Some(q), Some(b)) = (q, b) {
                    if r.values[b.0] < 0.5 {
                        assert!(r.values[q.0].abs() <= 1e-9);
                    }
                    assert!(r.values[q.0] <= inst.q_cap + 1e-9);
                }
            }
        }
    }
}
