//! Discrete entropy, the weighted Laplacian `L_Φ f = −d_h(Φ D_h f)` and the
//! dual norm it induces on per-species mean-zero fields.

use crate::error::{Error, Result};
use crate::grid::{gradient_to_edges, inner_cells, inner_edges, CellField, GridSpec};
use crate::linalg::{compensated_sum, pcg};
use crate::mixture::EdgeDiffusionTensor;

/// Densities below this are treated as having left the simplex.
pub const DENSITY_FLOOR: f64 = 1e-300;

/// Default relative residual for inverting `L_Φ`.
pub const DEFAULT_SOLVE_TOL: f64 = 1e-11;

/// The first `n-1` densities, strictly inside the simplex at every cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDensities {
    field: CellField,
}

impl ReducedDensities {
    pub fn new(field: CellField) -> Result<Self> {
        check_interior(&field)?;
        Ok(Self { field })
    }

    /// Drops the last species of a full state.
    pub fn from_full(rho: &CellField) -> Result<Self> {
        if rho.species() < 2 {
            return Err(Error::Dimension("a full state needs at least 2 species".into()));
        }
        Self::new(rho.leading_species(rho.species() - 1))
    }

    pub fn field(&self) -> &CellField {
        &self.field
    }

    pub fn into_field(self) -> CellField {
        self.field
    }

    pub fn grid(&self) -> &GridSpec {
        self.field.grid()
    }

    /// Number of reduced species, `n - 1`.
    pub fn species(&self) -> usize {
        self.field.species()
    }

    /// `ρ_n = 1 − Σ_i ρ̃_i` at one cell.
    pub fn remainder(&self, cell: usize) -> f64 {
        remainder_at(&self.field, cell)
    }

    /// Reassembles the full `n`-species state.
    pub fn to_full(&self) -> CellField {
        let nc = self.grid().cell_count();
        let mut values = self.field.values().to_vec();
        values.extend((0..nc).map(|c| self.remainder(c)));
        CellField::from_raw(*self.grid(), self.species() + 1, values)
    }
}

fn remainder_at(field: &CellField, cell: usize) -> f64 {
    let s: f64 = (0..field.species()).map(|i| field.get(i, cell)).sum();
    1.0 - s
}

fn check_interior(field: &CellField) -> Result<()> {
    let nc = field.grid().cell_count();
    for i in 0..field.species() {
        for c in 0..nc {
            let v = field.get(i, c);
            if !(v > DENSITY_FLOOR) {
                return Err(Error::NonPositiveDensity {
                    species: i,
                    cell: c,
                    value: v,
                });
            }
        }
    }
    for c in 0..nc {
        let r = remainder_at(field, c);
        if !(r > DENSITY_FLOOR) {
            return Err(Error::OutsideSimplex { cell: c, remainder: r });
        }
    }
    Ok(())
}

/// Cell field whose per-species sums vanish.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanZeroField {
    field: CellField,
}

impl MeanZeroField {
    /// Accepts `field` if every species sums to zero within `1e-12 · N^d · max(1, max|g|)`.
    pub fn new(field: CellField) -> Result<Self> {
        let nc = field.grid().cell_count() as f64;
        for i in 0..field.species() {
            let comp = field.component(i);
            let scale = comp.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
            let sum = compensated_sum(comp.iter().copied());
            if sum.abs() > 1e-12 * nc * scale {
                return Err(Error::NotMeanZero { species: i, sum });
            }
        }
        Ok(Self { field })
    }

    /// Subtracts the per-species mean.
    pub fn project(mut field: CellField) -> Self {
        for i in 0..field.species() {
            remove_mean(field.component_mut(i));
        }
        Self { field }
    }

    pub fn field(&self) -> &CellField {
        &self.field
    }

    pub fn into_field(self) -> CellField {
        self.field
    }
}

fn remove_mean(v: &mut [f64]) {
    let mean = compensated_sum(v.iter().copied()) / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}

fn xlogx(x: f64) -> f64 {
    x * x.ln()
}

/// `F_h(ρ) = h^d Σ_ℓ Σ_i ρ_{i,ℓ} log ρ_{i,ℓ}`.
pub fn entropy_full(rho: &CellField) -> Result<f64> {
    let nc = rho.grid().cell_count();
    for (k, &v) in rho.values().iter().enumerate() {
        if !(v > DENSITY_FLOOR) {
            return Err(Error::NonPositiveDensity {
                species: k / nc,
                cell: k % nc,
                value: v,
            });
        }
    }
    Ok(rho.grid().cell_volume() * compensated_sum(rho.values().iter().map(|&v| xlogx(v))))
}

/// Entropy in reduced variables with `ρ_n = 1 − Σ ρ̃_i`.
pub fn entropy_reduced(rho_t: &ReducedDensities) -> f64 {
    let f = rho_t.field();
    let nc = f.grid().cell_count();
    let terms = f
        .values()
        .iter()
        .map(|&v| xlogx(v))
        .chain((0..nc).map(|c| xlogx(rho_t.remainder(c))));
    f.grid().cell_volume() * compensated_sum(terms)
}

/// `∂F/∂ρ̃_i = log ρ_i − log ρ_n` per cell (without the `h^d` weight).
pub fn entropy_grad_reduced(rho_t: &ReducedDensities) -> CellField {
    let f = rho_t.field();
    let nc = f.grid().cell_count();
    let log_last: Vec<f64> = (0..nc).map(|c| rho_t.remainder(c).ln()).collect();
    let mut out = f.clone();
    for i in 0..f.species() {
        for (c, v) in out.component_mut(i).iter_mut().enumerate() {
            *v = v.ln() - log_last[c];
        }
    }
    out
}

fn check_tensor(phi: &EdgeDiffusionTensor, f: &CellField) -> Result<()> {
    if phi.grid() != f.grid() || phi.reduced_species() != f.species() {
        return Err(Error::Dimension(format!(
            "tensor acts on {} species, field has {}",
            phi.reduced_species(),
            f.species()
        )));
    }
    Ok(())
}

/// `y = L_Φ x` on flat species-major storage. Used by the solvers.
pub(crate) fn l_phi_raw(phi: &EdgeDiffusionTensor, x: &[f64], y: &mut [f64]) {
    let grid = phi.grid();
    let m = phi.reduced_species();
    let nc = grid.cell_count();
    let inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    y.iter_mut().for_each(|v| *v = 0.0);
    let mut diff = vec![0.0; m];
    for s in 0..grid.dim() {
        for c in 0..nc {
            let up = grid.forward(c, s);
            for j in 0..m {
                diff[j] = x[j * nc + up] - x[j * nc + c];
            }
            let mat = phi.matrix(s, c);
            for i in 0..m {
                let mut flux = 0.0;
                for j in 0..m {
                    flux += mat[i * m + j] * diff[j];
                }
                flux *= inv_h2;
                y[i * nc + c] -= flux;
                y[i * nc + up] += flux;
            }
        }
    }
}

/// Diagonal of `L_Φ`, used as the Jacobi preconditioner.
pub(crate) fn l_phi_diagonal(phi: &EdgeDiffusionTensor) -> Vec<f64> {
    let grid = phi.grid();
    let m = phi.reduced_species();
    let nc = grid.cell_count();
    let inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
    let mut d = vec![0.0; m * nc];
    for s in 0..grid.dim() {
        for c in 0..nc {
            let up = grid.forward(c, s);
            let mat = phi.matrix(s, c);
            for i in 0..m {
                let v = mat[i * m + i] * inv_h2;
                d[i * nc + c] += v;
                d[i * nc + up] += v;
            }
        }
    }
    d
}

/// `L_Φ f = −d_h(Φ D_h f)`; the result sums to zero per species.
pub fn apply_l_phi(phi: &EdgeDiffusionTensor, f: &CellField) -> Result<MeanZeroField> {
    check_tensor(phi, f)?;
    let mut out = vec![0.0; f.values().len()];
    l_phi_raw(phi, f.values(), &mut out);
    Ok(MeanZeroField {
        field: CellField::from_raw(*f.grid(), f.species(), out),
    })
}

/// Iteration cap for the mean-zero CG solve: `10 · N^d · (n-1)`.
pub fn max_cg_iterations(grid: &GridSpec, m: usize) -> usize {
    10 * grid.cell_count() * m
}

/// Mean-zero `f` with `L_Φ f = g` to relative residual `tol`.
pub fn solve_l_phi(phi: &EdgeDiffusionTensor, g: &MeanZeroField, tol: f64) -> Result<CellField> {
    let gf = g.field();
    check_tensor(phi, gf)?;
    let nc = gf.grid().cell_count();
    let m = gf.species();
    let diag = l_phi_diagonal(phi);
    let mut x = vec![0.0; m * nc];
    let project = |v: &mut [f64]| {
        for chunk in v.chunks_mut(nc) {
            remove_mean(chunk);
        }
    };
    let mut rhs = gf.values().to_vec();
    project(&mut rhs);
    pcg(
        |p, out| l_phi_raw(phi, p, out),
        &diag,
        &rhs,
        &mut x,
        tol,
        max_cg_iterations(gf.grid(), m),
        project,
    )?;
    Ok(CellField::from_raw(*gf.grid(), m, x))
}

/// `‖g‖²_{L_Φ⁻¹} = [D_h f, Φ D_h f]` with `f = L_Φ⁻¹ g`.
pub fn dual_norm_sq(phi: &EdgeDiffusionTensor, g: &MeanZeroField, tol: f64) -> Result<f64> {
    Ok(dual_norm_sq_two_routes(phi, g, tol)?.0)
}

/// The dual norm evaluated on edges, `[D_h f, Φ D_h f]`, and on cells, `⟨f, g⟩`.
pub fn dual_norm_sq_two_routes(phi: &EdgeDiffusionTensor, g: &MeanZeroField, tol: f64) -> Result<(f64, f64)> {
    let f = solve_l_phi(phi, g, tol)?;
    let grid = *f.grid();
    let df = gradient_to_edges(&f, &grid)?;
    let edge = inner_edges(&df, &phi.apply(&df)?)?;
    let cell = inner_cells(&f, g.field())?;
    Ok((edge, cell))
}
