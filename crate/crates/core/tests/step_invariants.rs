//! Per-step invariants on both dimensions and on large steps.

use maxwell_stefan::diagnostics::audit_run;
use maxwell_stefan::grid::average_to_edges;
use maxwell_stefan::initial::InitialCondition;
use maxwell_stefan::mixture::assemble_d_hat;
use maxwell_stefan::stepper::{scheme_residual, step, variational_objective};
use maxwell_stefan::{CellField, Error, FrictionMatrix, GridSpec, ReducedDensities, SimulationState, StepConfig};

fn friction() -> FrictionMatrix {
    FrictionMatrix::from_upper(3, &[1.0 / 0.833, 1.0 / 0.833, 1.0 / 0.168]).unwrap()
}

fn check_step(rho: &CellField, grid: &GridSpec, dt: f64) {
    let cfg = StepConfig::new(dt).unwrap();
    let out = step(rho, &friction(), grid, &cfg).unwrap();
    assert!(out.residual_norm <= cfg.newton_tol);
    assert!(out.rho_next.min_value() > 0.0);
    for c in 0..grid.cell_count() {
        let before: f64 = (0..3).map(|i| rho.get(i, c)).sum();
        let after: f64 = (0..3).map(|i| out.rho_next.get(i, c)).sum();
        assert!((before - after).abs() <= 1e-11);
    }
    for i in 0..3 {
        let drift = out.rho_next.component_sum(i) - rho.component_sum(i);
        assert!(drift.abs() <= 1e-11 * grid.cell_count() as f64);
    }
    // Zero mean momentum on every edge.
    let avg = average_to_edges(rho, grid).unwrap();
    for s in 0..grid.dim() {
        for c in 0..grid.cell_count() {
            let p: f64 = (0..3).map(|i| avg.get(i, s, c) * out.velocities.get(i, s, c)).sum();
            assert!(p.abs() <= 1e-12, "momentum {p}");
        }
    }
    assert!(out.energy_balance() <= 1e-10, "balance {}", out.energy_balance());
    if dt <= 0.5 {
        assert!(out.unweighted_energy_balance() <= 1e-10);
    }
    // The step is not beaten by its own starting point in the objective.
    let dhat = assemble_d_hat(rho, &friction(), grid).unwrap();
    let next = ReducedDensities::from_full(&out.rho_next).unwrap();
    let prev = ReducedDensities::from_full(rho).unwrap();
    let j_next = variational_objective(&next, rho, &dhat, dt).unwrap();
    let j_prev = variational_objective(&prev, rho, &dhat, dt).unwrap();
    assert!(j_next <= j_prev + 1e-12);
}

#[test]
fn one_dimensional_steps() {
    let g = GridSpec::new(1, 50, 1.0).unwrap();
    let rho = InitialCondition::ThreeSpecies1d.sample(&g, 3).unwrap();
    for dt in [1e-3, 0.1, 5.0] {
        check_step(&rho, &g, dt);
    }
}

#[test]
fn two_dimensional_steps() {
    let g = GridSpec::new(2, 12, 1.0).unwrap();
    let rho = InitialCondition::ThreeSpecies2d.sample(&g, 3).unwrap();
    for dt in [1e-3, 0.1] {
        check_step(&rho, &g, dt);
    }
}

#[test]
fn uniform_state_is_a_fixed_point() {
    let g = GridSpec::new(1, 16, 1.0).unwrap();
    let rho = CellField::from_fn(g, 3, |i, _| [0.2, 0.3, 0.5][i]);
    let out = step(&rho, &friction(), &g, &StepConfig::new(0.1).unwrap()).unwrap();
    assert!(out.newton_iters <= 1);
    for (a, b) in out.rho_next.values().iter().zip(rho.values()) {
        assert!((a - b).abs() < 1e-15);
    }
    let dhat = assemble_d_hat(&rho, &friction(), &g).unwrap();
    let r = scheme_residual(&ReducedDensities::from_full(&rho).unwrap(), &rho, &dhat, &StepConfig::new(0.1).unwrap())
        .unwrap();
    assert!(r.values().iter().all(|v| *v == 0.0));
}

#[test]
fn failed_step_leaves_the_state_unchanged() {
    let g = GridSpec::new(1, 20, 1.0).unwrap();
    let rho = InitialCondition::ThreeSpecies1d.sample(&g, 3).unwrap();
    let mut state = SimulationState::new(g, friction(), rho).unwrap();
    let mut cfg = StepConfig::new(1.0).unwrap();
    cfg.max_newton_iters = 1;
    cfg.newton_tol = 1e-16;
    let before = state.rho().clone();
    let err = state.step_once(&cfg).unwrap_err();
    assert!(matches!(err, Error::Step { step: 1, .. }));
    assert_eq!(state.rho(), &before);
    assert_eq!(state.step_index(), 0);
    assert_eq!(state.history().len(), 1);
}

#[test]
fn history_matches_step_count_and_audits_clean() {
    let g = GridSpec::new(1, 30, 1.0).unwrap();
    let rho = InitialCondition::ThreeSpecies1d.sample(&g, 3).unwrap();
    let state = SimulationState::new(g, friction(), rho).unwrap();
    let end = state.advance(&StepConfig::new(0.01).unwrap(), 20).unwrap();
    assert_eq!(end.history().len(), end.step_index() + 1);
    assert_eq!(state.step_index(), 0);
    let a = audit_run(end.history());
    assert!(a.passed(), "{a:?}");
    assert_eq!(audit_run(end.history()), a);
}

#[test]
fn slightly_unnormalized_data_is_renormalized() {
    let g = GridSpec::new(1, 8, 1.0).unwrap();
    let rho = CellField::from_fn(g, 2, |i, _| [0.3, 0.7 + 5e-9][i]);
    let s = SimulationState::new(g, FrictionMatrix::uniform(2, 1.0).unwrap(), rho).unwrap();
    assert!(((0..2).map(|i| s.rho().get(i, 3)).sum::<f64>() - 1.0).abs() < 1e-15);
    let bad = CellField::from_fn(g, 2, |i, _| [0.3, 0.71][i]);
    assert!(matches!(
        SimulationState::new(g, FrictionMatrix::uniform(2, 1.0).unwrap(), bad),
        Err(Error::NotNormalized { .. })
    ));
}
