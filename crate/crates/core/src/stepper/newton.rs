//! Damped interior Newton for the reduced scheme.
//!
//! With `H` the per-cell entropy Hessian `δ_ij/ρ_i + 1/ρ_n`, the Jacobian is
//! `I/Δt + L H`. Writing `δ = H⁻¹ y` turns the Newton system into
//! `(H⁻¹/Δt + L) y = −R`, which is symmetric positive definite.

use crate::entropy::ReducedDensities;
use crate::error::{Error, Result};
use crate::grid::{CellField, GridSpec};
use crate::linalg::{pcg, BandedSymmetric};
use crate::mixture::{check_state, q_inv_unchecked, EdgeDiffusionTensor};

use super::{residual_unchecked, sup_norm, StepConfig};

const MIN_STEP: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub rho: ReducedDensities,
    pub iterations: usize,
    /// Final `‖R‖∞`.
    pub residual: f64,
}

/// Solves `R(ρ̃) = 0` starting from `ρ̃ᵏ`.
pub fn newton_solve(rho_prev: &CellField, dhat: &EdgeDiffusionTensor, cfg: &StepConfig) -> Result<NewtonOutcome> {
    cfg.validate()?;
    let m = dhat.reduced_species();
    if rho_prev.species() != m + 1 {
        return Err(Error::Dimension(format!(
            "state has {} species, tensor expects {}",
            rho_prev.species(),
            m + 1
        )));
    }
    rho_prev.check_grid(dhat.grid(), "newton_solve")?;
    check_state(rho_prev)?;

    let grid = *dhat.grid();
    let nc = grid.cell_count();
    let mut x = ReducedDensities::new(rho_prev.leading_species(m))?;
    let mut r = residual_unchecked(&x, rho_prev, dhat, cfg.dt);
    let mut res = sup_norm(&r);
    let mut iterations = 0;

    while res > cfg.newton_tol {
        if iterations == cfg.max_newton_iters {
            return Err(Error::NewtonDiverged {
                iterations,
                residual: res,
            });
        }
        iterations += 1;

        let full = x.to_full();
        let h_inv = hessian_inverses(&full);
        let rhs: Vec<f64> = r.values().iter().map(|v| -v).collect();
        let y = if grid.dim() == 1 {
            solve_banded(dhat, &h_inv, cfg.dt, &rhs)?
        } else {
            solve_cg(dhat, &h_inv, cfg.dt, &rhs, cfg.linear_tol)?
        };

        // δ = H⁻¹ y, cell by cell; δ_n = −Σ δ_i.
        let mut delta = vec![0.0; m * nc];
        let mut yc = vec![0.0; m];
        for c in 0..nc {
            for i in 0..m {
                yc[i] = y[i * nc + c];
            }
            let blk = &h_inv[c * m * m..(c + 1) * m * m];
            for i in 0..m {
                delta[i * nc + c] = (0..m).map(|j| blk[i * m + j] * yc[j]).sum();
            }
        }

        let mut alpha = 1.0_f64;
        for c in 0..nc {
            let mut dn = 0.0;
            for i in 0..m {
                let d = delta[i * nc + c];
                dn -= d;
                if d < 0.0 {
                    alpha = alpha.min(cfg.interior_margin * full.get(i, c) / -d);
                }
            }
            if dn < 0.0 {
                alpha = alpha.min(cfg.interior_margin * full.get(m, c) / -dn);
            }
        }

        loop {
            if alpha < MIN_STEP {
                return Err(Error::LineSearchCollapse {
                    iteration: iterations,
                    residual: res,
                });
            }
            let trial_vals: Vec<f64> = x
                .field()
                .values()
                .iter()
                .zip(&delta)
                .map(|(a, d)| a + alpha * d)
                .collect();
            if let Ok(trial) = ReducedDensities::new(CellField::from_raw(grid, m, trial_vals)) {
                let r_new = residual_unchecked(&trial, rho_prev, dhat, cfg.dt);
                let res_new = sup_norm(&r_new);
                if res_new < res || res_new <= cfg.newton_tol {
                    x = trial;
                    r = r_new;
                    res = res_new;
                    break;
                }
            }
            alpha *= 0.5;
        }
    }

    Ok(NewtonOutcome {
        rho: x,
        iterations,
        residual: res,
    })
}

/// Per-cell `H⁻¹`, stored cell-major as `m x m` blocks.
fn hessian_inverses(full: &CellField) -> Vec<f64> {
    let n = full.species();
    let m = n - 1;
    let nc = full.grid().cell_count();
    let mut out = Vec::with_capacity(nc * m * m);
    for c in 0..nc {
        out.extend(q_inv_unchecked(&full.at_cell(c)));
    }
    out
}

/// Position of a cell in the folded ordering `0, N-1, 1, N-2, …`, which keeps
/// the periodic coupling inside a narrow band.
fn folded_position(c: usize, n: usize) -> usize {
    if c <= (n - 1) / 2 {
        2 * c
    } else {
        2 * (n - 1 - c) + 1
    }
}

fn solve_banded(dhat: &EdgeDiffusionTensor, h_inv: &[f64], dt: f64, rhs: &[f64]) -> Result<Vec<f64>> {
    let grid: GridSpec = *dhat.grid();
    let m = dhat.reduced_species();
    let nc = grid.cell_count();
    let idx = |c: usize, i: usize| folded_position(c, nc) * m + i;
    let mut a = BandedSymmetric::zeros(m * nc, 3 * m - 1);
    let inv_h2 = 1.0 / (grid.spacing() * grid.spacing());

    for c in 0..nc {
        let blk = &h_inv[c * m * m..(c + 1) * m * m];
        for i in 0..m {
            for j in 0..=i {
                a.add(idx(c, i), idx(c, j), blk[i * m + j] / dt);
            }
        }
    }
    for c in 0..nc {
        let up = grid.forward(c, 0);
        let phi = dhat.matrix(0, c);
        for i in 0..m {
            for j in 0..m {
                let v = phi[i * m + j] * inv_h2;
                if i >= j {
                    a.add(idx(c, i), idx(c, j), v);
                    a.add(idx(up, i), idx(up, j), v);
                }
                a.add(idx(c, i), idx(up, j), -v);
            }
        }
    }
    let chol = a.factor()?;
    let mut b = vec![0.0; m * nc];
    for i in 0..m {
        for c in 0..nc {
            b[idx(c, i)] = rhs[i * nc + c];
        }
    }
    chol.solve_in_place(&mut b);
    let mut y = vec![0.0; m * nc];
    for i in 0..m {
        for c in 0..nc {
            y[i * nc + c] = b[idx(c, i)];
        }
    }
    Ok(y)
}

fn solve_cg(dhat: &EdgeDiffusionTensor, h_inv: &[f64], dt: f64, rhs: &[f64], tol: f64) -> Result<Vec<f64>> {
    let m = dhat.reduced_species();
    let nc = dhat.grid().cell_count();
    let mut diag = crate::entropy::l_phi_diagonal(dhat);
    for c in 0..nc {
        for i in 0..m {
            diag[i * nc + c] += h_inv[c * m * m + i * m + i] / dt;
        }
    }
    let apply = |p: &[f64], out: &mut [f64]| {
        crate::entropy::l_phi_raw(dhat, p, out);
        for c in 0..nc {
            let blk = &h_inv[c * m * m..(c + 1) * m * m];
            for i in 0..m {
                let mut v = 0.0;
                for j in 0..m {
                    v += blk[i * m + j] * p[j * nc + c];
                }
                out[i * nc + c] += v / dt;
            }
        }
    };
    let mut y = vec![0.0; m * nc];
    pcg(apply, &diag, rhs, &mut y, tol, 10 * m * nc, |_| {})?;
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixture::{assemble_d_hat, FrictionMatrix};

    #[test]
    fn folded_order_is_a_permutation_with_narrow_neighbors() {
        for n in [4, 5, 10, 11] {
            let mut seen = vec![false; n];
            for c in 0..n {
                let p = folded_position(c, n);
                assert!(!seen[p]);
                seen[p] = true;
                let q = folded_position((c + 1) % n, n);
                assert!(p.abs_diff(q) <= 2);
            }
        }
    }

    fn wavy(grid: GridSpec) -> CellField {
        CellField::from_fn(grid, 3, |i, x| {
            let a = 0.3 + 0.2 * (std::f64::consts::TAU * (x[0] + 0.5 * x[1])).sin();
            [a, 0.1 + 0.05 * x[0], 0.9 - a - 0.05 * x[0]][i]
        })
    }

    #[test]
    fn banded_and_cg_paths_agree_with_tight_tolerance() {
        // Same 1D problem through both linear solvers.
        let g = GridSpec::new(1, 16, 1.0).unwrap();
        let rho = wavy(g);
        let f = FrictionMatrix::from_upper(3, &[1.0, 2.0, 3.0]).unwrap();
        let dhat = assemble_d_hat(&rho, &f, &g).unwrap();
        let h_inv = hessian_inverses(&rho);
        let rhs: Vec<f64> = (0..32).map(|k| ((k * 7 % 11) as f64) - 5.0).collect();
        let a = solve_banded(&dhat, &h_inv, 0.01, &rhs).unwrap();
        let b = solve_cg(&dhat, &h_inv, 0.01, &rhs, 1e-14).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn two_dimensional_newton_converges() {
        let g = GridSpec::new(2, 8, 1.0).unwrap();
        let rho = wavy(g);
        let f = FrictionMatrix::from_upper(3, &[1.0, 2.0, 3.0]).unwrap();
        let dhat = assemble_d_hat(&rho, &f, &g).unwrap();
        let cfg = StepConfig::new(0.01).unwrap();
        let out = newton_solve(&rho, &dhat, &cfg).unwrap();
        assert!(out.residual <= cfg.newton_tol);
        assert!(out.iterations >= 1);
    }

    #[test]
    fn iteration_cap_is_reported() {
        let g = GridSpec::new(1, 12, 1.0).unwrap();
        let rho = wavy(g);
        let f = FrictionMatrix::from_upper(3, &[1.0, 2.0, 3.0]).unwrap();
        let dhat = assemble_d_hat(&rho, &f, &g).unwrap();
        let mut cfg = StepConfig::new(10.0).unwrap();
        cfg.max_newton_iters = 1;
        cfg.newton_tol = 1e-15;
        assert!(matches!(
            newton_solve(&rho, &dhat, &cfg),
            Err(Error::NewtonDiverged { .. }) | Err(Error::LineSearchCollapse { .. })
        ));
    }
}
