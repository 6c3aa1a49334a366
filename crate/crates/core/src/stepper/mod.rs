//! One implicit-explicit step of the scheme and the time loop around it.
//!
//! In reduced variables the step reads
//!
//! ```text
//! R(ρ̃) = (ρ̃ − ρ̃ᵏ)/Δt + L_D̂ g(ρ̃) = 0,   g_i = log ρ_i − log ρ_n,
//! ```
//!
//! with `L_D̂ = −d_h(D̂ᵏ D_h ·)` and `D̂ᵏ` frozen at the previous level. The
//! root is found by damped Newton; the variational objective
//! `J(ρ̃) = ‖ρ̃ − ρ̃ᵏ‖²_{L⁻¹}/(2Δt) + F_h(ρ̃)` is evaluated afterwards as a
//! certificate.

mod newton;
mod state;

pub use newton::{newton_solve, NewtonOutcome};
pub use state::{HistoryEntry, SimulationState};

use crate::entropy::{
    dual_norm_sq, entropy_full, entropy_grad_reduced, entropy_reduced, l_phi_raw, MeanZeroField, ReducedDensities,
    DEFAULT_SOLVE_TOL,
};
use crate::error::{Error, Result};
use crate::grid::{average_to_edges, gradient_to_edges, CellField, EdgeField, GridSpec};
use crate::linalg::max_abs;
use crate::mixture::{assemble_d_hat, EdgeDiffusionTensor, FrictionMatrix};

/// Step size and solver controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepConfig {
    pub dt: f64,
    /// Sup-norm tolerance on the scheme residual.
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    /// Fraction-to-boundary parameter θ.
    pub interior_margin: f64,
    /// Relative tolerance of the inner linear solves.
    pub linear_tol: f64,
}

impl StepConfig {
    pub const DEFAULT_NEWTON_TOL: f64 = 1e-10;
    pub const DEFAULT_MAX_NEWTON_ITERS: usize = 50;
    pub const DEFAULT_INTERIOR_MARGIN: f64 = 0.99;
    pub const DEFAULT_LINEAR_TOL: f64 = 1e-12;

    /// Defaults for everything except the step size.
    pub fn new(dt: f64) -> Result<Self> {
        let cfg = Self {
            dt,
            newton_tol: Self::DEFAULT_NEWTON_TOL,
            max_newton_iters: Self::DEFAULT_MAX_NEWTON_ITERS,
            interior_margin: Self::DEFAULT_INTERIOR_MARGIN,
            linear_tol: Self::DEFAULT_LINEAR_TOL,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidStepConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.interior_margin > 0.0 && self.interior_margin < 1.0) {
            return Err(Error::InvalidStepConfig(format!(
                "interior margin must lie in (0, 1), got {}",
                self.interior_margin
            )));
        }
        if !(self.newton_tol > 0.0) || !(self.linear_tol > 0.0) {
            return Err(Error::InvalidStepConfig("tolerances must be positive".into()));
        }
        if self.max_newton_iters == 0 {
            return Err(Error::InvalidStepConfig("max_newton_iters must be at least 1".into()));
        }
        Ok(())
    }
}

/// Everything produced by one step.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub rho_next: CellField,
    /// Velocities of all `n` species on edges.
    pub velocities: EdgeField,
    pub newton_iters: usize,
    pub residual_norm: f64,
    pub energy_prev: f64,
    pub energy_next: f64,
    /// `‖ρ̃ᵏ⁺¹ − ρ̃ᵏ‖²` in the dual norm of `L_D̂ᵏ`.
    pub dual_increment_sq: f64,
    pub dt: f64,
}

impl StepResult {
    /// `F(ρᵏ⁺¹) + ‖Δρ̃‖²/(2Δt) − F(ρᵏ)`; nonpositive up to roundoff.
    pub fn energy_balance(&self) -> f64 {
        self.energy_next + self.dual_increment_sq / (2.0 * self.dt) - self.energy_prev
    }

    /// `F(ρᵏ⁺¹) + ‖Δρ̃‖² − F(ρᵏ)`, the inequality without the `1/(2Δt)` weight.
    pub fn unweighted_energy_balance(&self) -> f64 {
        self.energy_next + self.dual_increment_sq - self.energy_prev
    }
}

fn check_step_inputs(rho_trial: &CellField, rho_prev: &CellField, dhat: &EdgeDiffusionTensor) -> Result<()> {
    let m = dhat.reduced_species();
    if rho_trial.species() != m || rho_prev.species() != m + 1 {
        return Err(Error::Dimension(format!(
            "expected {m} reduced and {} full species, got {} and {}",
            m + 1,
            rho_trial.species(),
            rho_prev.species()
        )));
    }
    rho_trial.check_grid(dhat.grid(), "scheme_residual")?;
    rho_prev.check_grid(dhat.grid(), "scheme_residual")?;
    Ok(())
}

/// `R(ρ̃) = (ρ̃ − ρ̃ᵏ)/Δt − d_h(D̂ᵏ D_h g(ρ̃))`.
pub fn scheme_residual(
    rho_trial: &ReducedDensities,
    rho_prev: &CellField,
    dhat: &EdgeDiffusionTensor,
    cfg: &StepConfig,
) -> Result<CellField> {
    check_step_inputs(rho_trial.field(), rho_prev, dhat)?;
    Ok(residual_unchecked(rho_trial, rho_prev, dhat, cfg.dt))
}

pub(crate) fn residual_unchecked(
    rho_trial: &ReducedDensities,
    rho_prev: &CellField,
    dhat: &EdgeDiffusionTensor,
    dt: f64,
) -> CellField {
    let g = entropy_grad_reduced(rho_trial);
    let mut out = vec![0.0; g.values().len()];
    l_phi_raw(dhat, g.values(), &mut out);
    let prev = &rho_prev.values()[..out.len()];
    for ((o, x), p) in out.iter_mut().zip(rho_trial.field().values()).zip(prev) {
        *o += (x - p) / dt;
    }
    CellField::from_raw(*rho_trial.grid(), rho_trial.species(), out)
}

/// Mass fluxes `ρ̂ᵢᵏ vᵢᵏ⁺¹` for all `n` species.
pub fn recover_fluxes(rho_next: &CellField, dhat: &EdgeDiffusionTensor, grid: &GridSpec) -> Result<EdgeField> {
    let n = rho_next.species();
    let m = dhat.reduced_species();
    if n != m + 1 {
        return Err(Error::Dimension(format!("state has {n} species, tensor expects {}", m + 1)));
    }
    let reduced = ReducedDensities::new(rho_next.leading_species(m))?;
    // Logs of the stored last species, so a state renormalized by roundoff is honored.
    let nc = grid.cell_count();
    let mut g = entropy_grad_reduced(&reduced);
    for i in 0..m {
        for c in 0..nc {
            let last = rho_next.get(m, c);
            if !(last > 0.0) {
                return Err(Error::NonPositiveDensity {
                    species: m,
                    cell: c,
                    value: last,
                });
            }
            g.set(i, c, rho_next.get(i, c).ln() - last.ln());
        }
    }
    let dg = gradient_to_edges(&g, grid)?;
    let reduced_flux = dhat.apply(&dg)?;
    let mut flux = EdgeField::zeros(*grid, n);
    for s in 0..grid.dim() {
        for c in 0..nc {
            let mut total = 0.0;
            for i in 0..m {
                let f = -reduced_flux.get(i, s, c);
                flux.set(i, s, c, f);
                total += f;
            }
            flux.set(m, s, c, -total);
        }
    }
    Ok(flux)
}

/// Velocities from the explicit flux formula, divided by `ρ̂ᵏ`.
pub fn recover_velocities(
    rho_next: &CellField,
    rho_prev: &CellField,
    dhat: &EdgeDiffusionTensor,
    grid: &GridSpec,
) -> Result<EdgeField> {
    if rho_prev.species() != rho_next.species() {
        return Err(Error::Dimension("states have different species counts".into()));
    }
    if let Some(pos) = rho_prev.values().iter().position(|v| !(*v > 0.0)) {
        let nc = grid.cell_count();
        return Err(Error::NonPositiveDensity {
            species: pos / nc,
            cell: pos % nc,
            value: rho_prev.values()[pos],
        });
    }
    let mut v = recover_fluxes(rho_next, dhat, grid)?;
    let avg = average_to_edges(rho_prev, grid)?;
    for (x, r) in v.values_mut().iter_mut().zip(avg.values()) {
        *x /= r;
    }
    Ok(v)
}

/// `J(ρ̃) = ‖ρ̃ − ρ̃ᵏ‖²_{L⁻¹_D̂}/(2Δt) + F_h(ρ̃)`.
///
/// Fails with [`Error::NotMeanZero`] if `ρ̃` does not carry the mass of `ρ̃ᵏ`.
pub fn variational_objective(
    rho_trial: &ReducedDensities,
    rho_prev: &CellField,
    dhat: &EdgeDiffusionTensor,
    dt: f64,
) -> Result<f64> {
    let dual = increment_dual_norm(rho_trial, rho_prev, dhat)?;
    Ok(dual / (2.0 * dt) + entropy_reduced(rho_trial))
}

fn increment_dual_norm(rho_trial: &ReducedDensities, rho_prev: &CellField, dhat: &EdgeDiffusionTensor) -> Result<f64> {
    check_step_inputs(rho_trial.field(), rho_prev, dhat)?;
    let m = rho_trial.species();
    let prev = &rho_prev.values()[..rho_trial.field().values().len()];
    let diff: Vec<f64> = rho_trial.field().values().iter().zip(prev).map(|(a, b)| a - b).collect();
    let g = MeanZeroField::new(CellField::from_raw(*rho_trial.grid(), m, diff))?;
    dual_norm_sq(dhat, &g, DEFAULT_SOLVE_TOL)
}

/// Advances `rho_prev` by one step of size `cfg.dt`.
pub fn step(rho_prev: &CellField, friction: &FrictionMatrix, grid: &GridSpec, cfg: &StepConfig) -> Result<StepResult> {
    cfg.validate()?;
    let dhat = assemble_d_hat(rho_prev, friction, grid)?;
    let outcome = newton_solve(rho_prev, &dhat, cfg)?;
    let rho_next = outcome.rho.to_full();
    let velocities = recover_velocities(&rho_next, rho_prev, &dhat, grid)?;
    let dual_increment_sq = increment_dual_norm(&outcome.rho, rho_prev, &dhat)?;
    Ok(StepResult {
        energy_prev: entropy_full(rho_prev)?,
        energy_next: entropy_reduced(&outcome.rho),
        rho_next,
        velocities,
        newton_iters: outcome.iterations,
        residual_norm: outcome.residual,
        dual_increment_sq,
        dt: cfg.dt,
    })
}

/// Sup norm of the residual, used for Newton acceptance.
pub(crate) fn sup_norm(field: &CellField) -> f64 {
    max_abs(field.values())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial::InitialCondition;

    fn mixture_friction() -> FrictionMatrix {
        FrictionMatrix::from_upper(3, &[1.0 / 0.833, 1.0 / 0.833, 1.0 / 0.168]).unwrap()
    }

    fn mixture_state(n: usize) -> (GridSpec, CellField) {
        let g = GridSpec::new(1, n, 1.0).unwrap();
        let rho = InitialCondition::ThreeSpecies1d.sample(&g, 3).unwrap();
        (g, rho)
    }

    #[test]
    fn config_validation() {
        assert!(StepConfig::new(0.0).is_err());
        assert!(StepConfig::new(-1.0).is_err());
        let mut c = StepConfig::new(0.1).unwrap();
        c.interior_margin = 1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn uniform_state_is_a_fixed_point() {
        let g = GridSpec::new(2, 5, 1.0).unwrap();
        let rho = CellField::from_fn(g, 3, |i, _| [0.2, 0.3, 0.5][i]);
        let f = mixture_friction();
        let cfg = StepConfig::new(0.01).unwrap();
        let dhat = assemble_d_hat(&rho, &f, &g).unwrap();
        let rt = ReducedDensities::from_full(&rho).unwrap();
        let r = scheme_residual(&rt, &rho, &dhat, &cfg).unwrap();
        assert!(r.values().iter().all(|v| v.abs() < 1e-12));
        let res = step(&rho, &f, &g, &cfg).unwrap();
        assert!(res.newton_iters <= 1);
        assert!(res.velocities.values().iter().all(|v| v.abs() < 1e-12));
        for (a, b) in res.rho_next.values().iter().zip(rho.values()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn step_conserves_and_certifies() {
        let (g, rho) = mixture_state(40);
        let f = mixture_friction();
        let cfg = StepConfig::new(1e-3).unwrap();
        let res = step(&rho, &f, &g, &cfg).unwrap();
        assert!(res.residual_norm <= cfg.newton_tol);
        assert!(res.rho_next.min_value() > 0.0);
        for c in 0..g.cell_count() {
            let s0: f64 = rho.at_cell(c).iter().sum();
            let s1: f64 = res.rho_next.at_cell(c).iter().sum();
            assert!((s0 - s1).abs() <= 1e-11);
        }
        for i in 0..3 {
            assert!((rho.component_sum(i) - res.rho_next.component_sum(i)).abs() <= 1e-11);
        }
        assert!(res.energy_balance() <= 1e-10);
        assert!(res.energy_next < res.energy_prev);
    }

    #[test]
    fn residual_is_mean_zero() {
        let (g, rho) = mixture_state(20);
        let dhat = assemble_d_hat(&rho, &mixture_friction(), &g).unwrap();
        let cfg = StepConfig::new(0.01).unwrap();
        let trial = CellField::from_fn(g, 2, |i, x| [0.4, 0.3][i] + 0.1 * (6.0 * x[0]).sin());
        let r = scheme_residual(&ReducedDensities::new(trial).unwrap(), &rho, &dhat, &cfg).unwrap();
        // The time-difference part carries the mass difference, the flux part none.
        let mass_diff: Vec<f64> = (0..2).map(|i| {
            (0..20).map(|c| 0.0 + [0.4, 0.3][i] + 0.1 * (6.0 * g.cell_center(c)[0]).sin() - rho.get(i, c)).sum::<f64>()
        }).collect();
        for i in 0..2 {
            assert!((r.component_sum(i) - mass_diff[i] / cfg.dt).abs() < 1e-9);
        }
    }

    #[test]
    fn velocities_satisfy_constraint_and_friction_balance() {
        let (g, rho) = mixture_state(30);
        let f = mixture_friction();
        let cfg = StepConfig::new(1e-3).unwrap();
        let res = step(&rho, &f, &g, &cfg).unwrap();
        let avg = average_to_edges(&rho, &g).unwrap();
        let logs = CellField::from_raw(g, 3, res.rho_next.values().iter().map(|v| v.ln()).collect());
        let dlog = gradient_to_edges(&logs, &g).unwrap();
        for c in 0..g.cell_count() {
            let rh: Vec<f64> = (0..3).map(|i| avg.get(i, 0, c)).collect();
            let v: Vec<f64> = (0..3).map(|i| res.velocities.get(i, 0, c)).collect();
            let momentum: f64 = (0..3).map(|i| rh[i] * v[i]).sum();
            assert!(momentum.abs() <= 1e-12);
            let total: f64 = rh.iter().sum();
            let weighted: f64 = (0..3).map(|j| rh[j] * dlog.get(j, 0, c)).sum::<f64>() / total;
            for i in 0..3 {
                let lhs: f64 = -(0..3).map(|j| f.get(i, j) * rh[j] * (v[i] - v[j])).sum::<f64>();
                let rhs = dlog.get(i, 0, c) - weighted;
                assert!((lhs - rhs).abs() <= 1e-9, "edge {c} species {i}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn boundary_trial_is_rejected() {
        let g = GridSpec::new(1, 4, 1.0).unwrap();
        let bad = CellField::new(g, 1, vec![0.5, 1.0, 0.5, 0.5]).unwrap();
        assert!(ReducedDensities::new(bad).is_err());
    }
}
