//! The property suite run by `mstefan verify`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::entropy::{
    dual_norm_sq_two_routes, entropy_grad_reduced, entropy_reduced, MeanZeroField, ReducedDensities,
    DEFAULT_SOLVE_TOL,
};
use crate::error::Result;
use crate::grid::{
    average_to_edges, divergence_to_cells, gradient_to_edges, inner_cells, inner_edges, CellField, EdgeField,
    GridSpec,
};
use crate::initial::InitialCondition;
use crate::linalg::mat_mul;
use crate::mixture::{assemble_d_hat, assemble_q, assemble_q_inv, edge_point_d_hat, FrictionMatrix};
use crate::stepper::{newton_solve, recover_velocities, variational_objective, StepConfig};

use super::convergence::StudySetup;
use super::manufactured::Manufactured;
use super::truncation::truncation_errors;

/// Result of one property check.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed value next to its limit.
    pub detail: String,
}

fn outcome(name: &'static str, worst: f64, limit: f64) -> PropertyOutcome {
    PropertyOutcome {
        name,
        passed: worst <= limit,
        detail: format!("worst {worst:.3e} (limit {limit:.0e})"),
    }
}

fn random_simplex_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

fn random_state(rng: &mut ChaCha8Rng, grid: GridSpec, n: usize) -> CellField {
    let nc = grid.cell_count();
    let points: Vec<Vec<f64>> = (0..nc).map(|_| random_simplex_point(rng, n)).collect();
    CellField::from_raw(grid, n, (0..n).flat_map(|i| points.iter().map(move |p| p[i])).collect())
}

fn mixture_friction() -> FrictionMatrix {
    FrictionMatrix::from_upper(3, &[1.0 / 0.833, 1.0 / 0.833, 1.0 / 0.168]).expect("valid coefficients")
}

/// `⟨f, d_h φ⟩ + [D_h f, φ]` relative to `‖f‖‖φ‖` on 100 random pairs per dimension.
pub fn summation_by_parts(seed: u64) -> Result<PropertyOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for dim in [1, 2] {
        for _ in 0..100 {
            let n = rng.random_range(4..24);
            let g = GridSpec::new(dim, n, rng.random_range(0.5..2.0))?;
            let f = CellField::from_fn(g, 2, |_, _| rng.random_range(-1.0..1.0));
            let phi = EdgeField::from_fn(g, 2, |_, _, _| rng.random_range(-1.0..1.0));
            let a = inner_cells(&f, &divergence_to_cells(&phi, &g)?)?;
            let b = inner_edges(&gradient_to_edges(&f, &g)?, &phi)?;
            let scale = (inner_cells(&f, &f)? * inner_edges(&phi, &phi)?).sqrt() / g.spacing();
            worst = worst.max((a + b).abs() / scale);
        }
    }
    Ok(outcome("summation by parts", worst, 1e-13))
}

/// `‖Q Q⁻¹ − I‖_max` on random simplex points, `n ∈ 2..=5`.
pub fn q_inverse(seed: u64) -> Result<PropertyOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let n = rng.random_range(2..=5);
        let rho = random_simplex_point(&mut rng, n);
        let m = n - 1;
        let p = mat_mul(&assemble_q(&rho)?, &assemble_q_inv(&rho)?, m);
        for i in 0..m {
            for j in 0..m {
                let e = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((p[i * m + j] - e).abs());
            }
        }
    }
    Ok(outcome("Q times its inverse", worst, 1e-12))
}

/// Symmetry and positive definiteness of assembled tensors on random states.
pub fn tensor_spd(seed: u64) -> Result<PropertyOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_asym = 0.0_f64;
    let mut all_spd = true;
    for dim in [1, 2] {
        for n in [2, 3, 4] {
            let g = GridSpec::new(dim, 6, 1.0)?;
            let coef: Vec<f64> = (0..n * (n - 1) / 2).map(|_| rng.random_range(0.1..10.0)).collect();
            let f = FrictionMatrix::from_upper(n, &coef)?;
            let d = assemble_d_hat(&random_state(&mut rng, g, n), &f, &g)?;
            worst_asym = worst_asym.max(d.max_asymmetry());
            all_spd &= d.is_spd();
        }
    }
    let mut o = outcome("diffusion tensor symmetric positive definite", worst_asym, 1e-12);
    o.passed &= all_spd;
    Ok(o)
}

/// Two-species tensor against `ρ̂₁ρ̂₂/b₁₂`.
pub fn two_species_closed_form(seed: u64) -> Result<PropertyOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let b12 = rng.random_range(0.1..10.0);
        let a = rng.random_range(0.001..0.999);
        let d = edge_point_d_hat(&[a, 1.0 - a], &FrictionMatrix::from_upper(2, &[b12])?)?;
        let exact = a * (1.0 - a) / b12;
        worst = worst.max((d[0] - exact).abs() / exact);
    }
    Ok(outcome("two-species tensor closed form", worst, 1e-14))
}

/// Back-substitution of recovered velocities into the friction balance and
/// the zero-momentum constraint after one step of the three-species example.
pub fn friction_balance() -> Result<PropertyOutcome> {
    let g = GridSpec::new(1, 40, 1.0)?;
    let rho = InitialCondition::ThreeSpecies1d.sample(&g, 3)?;
    let f = mixture_friction();
    let dhat = assemble_d_hat(&rho, &f, &g)?;
    let cfg = StepConfig::new(1e-3)?;
    let next = newton_solve(&rho, &dhat, &cfg)?.rho.to_full();
    let v = recover_velocities(&next, &rho, &dhat, &g)?;
    let avg = average_to_edges(&rho, &g)?;
    let logs = CellField::from_raw(g, 3, next.values().iter().map(|x| x.ln()).collect());
    let dlog = gradient_to_edges(&logs, &g)?;
    let mut worst = 0.0_f64;
    for c in 0..g.cell_count() {
        let rh: Vec<f64> = (0..3).map(|i| avg.get(i, 0, c)).collect();
        let total: f64 = rh.iter().sum();
        let weighted: f64 = (0..3).map(|j| rh[j] * dlog.get(j, 0, c)).sum::<f64>() / total;
        for i in 0..3 {
            let lhs: f64 = -(0..3).map(|j| f.get(i, j) * rh[j] * (v.get(i, 0, c) - v.get(j, 0, c))).sum::<f64>();
            worst = worst.max((lhs - (dlog.get(i, 0, c) - weighted)).abs());
        }
        let momentum: f64 = (0..3).map(|i| rh[i] * v.get(i, 0, c)).sum();
        worst = worst.max(momentum.abs() * 1e3);
    }
    Ok(outcome("friction balance after one step", worst, 1e-9))
}

/// Edge route `[D_h f, Φ D_h f]` against cell route `⟨f, g⟩`.
pub fn dual_norm_routes(seed: u64) -> Result<PropertyOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for dim in [1, 2] {
        for _ in 0..10 {
            let g = GridSpec::new(dim, 8, 1.0)?;
            let rho = random_state(&mut rng, g, 3);
            let phi = assemble_d_hat(&rho, &mixture_friction(), &g)?;
            let gz = MeanZeroField::project(CellField::from_fn(g, 2, |_, _| rng.random_range(-1.0..1.0)));
            let (edge, cell) = dual_norm_sq_two_routes(&phi, &gz, DEFAULT_SOLVE_TOL)?;
            worst = worst.max((edge - cell).abs() / edge);
        }
    }
    Ok(outcome("dual norm two routes", worst, 1e-10))
}

/// Reduced entropy gradient against central differences with step `1e-5`.
pub fn entropy_gradient(seed: u64) -> Result<PropertyOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = GridSpec::new(1, 8, 1.0)?;
    let rt = ReducedDensities::from_full(&random_state(&mut rng, g, 3))?;
    let grad = entropy_grad_reduced(&rt);
    let eps = 1e-5;
    let mut worst = 0.0_f64;
    for k in 0..rt.field().values().len() {
        let at = |d: f64| -> Result<f64> {
            let mut f = rt.field().clone();
            f.values_mut()[k] += d;
            Ok(entropy_reduced(&ReducedDensities::new(f)?))
        };
        let fd = (at(eps)? - at(-eps)?) / (2.0 * eps) / g.cell_volume();
        worst = worst.max((fd - grad.values()[k]).abs());
    }
    Ok(outcome("entropy gradient vs central differences", worst, 1e-6))
}

/// Random feasible mean-zero perturbations of a computed step never lower `J`.
pub fn minimizer_sampling(seed: u64) -> Result<PropertyOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = GridSpec::new(1, 20, 1.0)?;
    let rho = InitialCondition::ThreeSpecies1d.sample(&g, 3)?;
    let dhat = assemble_d_hat(&rho, &mixture_friction(), &g)?;
    let dt = 1e-3;
    let star = newton_solve(&rho, &dhat, &StepConfig::new(dt)?)?.rho;
    let j_star = variational_objective(&star, &rho, &dhat, dt)?;
    let full = star.to_full();
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..100 {
        let mut dir = MeanZeroField::project(CellField::from_fn(g, 2, |_, _| rng.random_range(-1.0..1.0)))
            .into_field();
        // Largest scale keeping every species, including the last, above half its value.
        let mut limit = f64::INFINITY;
        for c in 0..g.cell_count() {
            let mut dn = 0.0;
            for i in 0..2 {
                let d = dir.get(i, c);
                dn -= d;
                if d < 0.0 {
                    limit = limit.min(0.5 * full.get(i, c) / -d);
                }
            }
            if dn < 0.0 {
                limit = limit.min(0.5 * full.get(2, c) / -dn);
            }
        }
        let scale = limit * 10f64.powf(rng.random_range(-4.0..0.0));
        dir.values_mut().iter_mut().for_each(|v| *v *= scale);
        let trial: Vec<f64> = star.field().values().iter().zip(dir.values()).map(|(a, b)| a + b).collect();
        let trial = ReducedDensities::new(CellField::from_raw(g, 2, trial))?;
        let j = variational_objective(&trial, &rho, &dhat, dt)?;
        worst = worst.max(j_star - j);
    }
    Ok(outcome("minimizer sampling (decrease of J)", worst, 1e-9))
}

/// Richardson ratios of the truncation errors on the heat mode.
pub fn truncation_ratios() -> Result<PropertyOutcome> {
    let m = Manufactured::heat_mode(0.1, 2.0)?;
    let r1 = truncation_errors(&m, 1e-3, 0.01, 0.0)?.tau1 / truncation_errors(&m, 1e-3, 0.005, 0.0)?.tau1;
    let r2 = truncation_errors(&m, 0.1, 1e-6, 0.0)?.tau2 / truncation_errors(&m, 0.05, 1e-6, 0.0)?.tau2;
    Ok(PropertyOutcome {
        name: "truncation Richardson ratios",
        passed: (1.7..=2.3).contains(&r1) && (3.5..=4.5).contains(&r2),
        detail: format!("tau1 ratio {r1:.3} in [1.7, 2.3], tau2 ratio {r2:.3} in [3.5, 4.5]"),
    })
}

/// Two-species run against the exact heat mode under `Δt = h²` refinement.
pub fn heat_oracle() -> Result<PropertyOutcome> {
    let setup = StudySetup::heat_mode(0.1, 2.0, 0.1)?;
    let levels = [(10, 0.01), (20, 0.0025), (40, 0.000625)];
    let errs = setup.errors(&levels)?;
    let constants: Vec<f64> = levels
        .iter()
        .zip(&errs)
        .map(|(&(n, dt), e)| e.0 / (dt + (1.0 / n as f64).powi(2)))
        .collect();
    let base = constants[0].max(constants[1]);
    let stable = (constants[2] - base).abs() <= 0.5 * base;
    Ok(PropertyOutcome {
        name: "two-species heat oracle",
        passed: stable,
        detail: format!("error constants {constants:.4?}"),
    })
}

/// Runs every property with the given seed.
pub fn verify_all(seed: u64) -> Vec<(&'static str, Result<PropertyOutcome>)> {
    vec![
        ("summation by parts", summation_by_parts(seed)),
        ("Q times its inverse", q_inverse(seed)),
        ("diffusion tensor symmetric positive definite", tensor_spd(seed)),
        ("two-species tensor closed form", two_species_closed_form(seed)),
        ("friction balance after one step", friction_balance()),
        ("dual norm two routes", dual_norm_routes(seed)),
        ("entropy gradient vs central differences", entropy_gradient(seed)),
        ("minimizer sampling (decrease of J)", minimizer_sampling(seed)),
        ("truncation Richardson ratios", truncation_ratios()),
        ("two-species heat oracle", heat_oracle()),
    ]
}
