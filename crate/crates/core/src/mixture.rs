//! Friction coefficients and the per-edge matrices of the reduced scheme.
//!
//! Every small matrix here is `(n-1) x (n-1)`, row-major, with the last species
//! eliminated. For strictly positive averaged densities `ρ̂`:
//!
//! ```text
//! B_ij  = δ_ij Σ_m b_im ρ̂_i ρ̂_m − b_ij ρ̂_i ρ̂_j
//! Q_ij  = δ_ij / ρ̂_i + 1 / ρ̂_n
//! Q⁻¹_ij = δ_ij ρ̂_i − ρ̂_i ρ̂_j / Σ_m ρ̂_m
//! D̂     = Q⁻¹ B⁻¹ Q⁻¹
//! ```

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{average_to_edges, CellField, EdgeField, GridSpec};
use crate::linalg::Cholesky;

/// Symmetric matrix of positive friction coefficients `b_ij`, `i ≠ j`.
///
/// The diagonal is stored as zero and never read.
#[derive(Debug, Clone, PartialEq)]
pub struct FrictionMatrix {
    n: usize,
    b: Vec<f64>,
}

impl FrictionMatrix {
    /// Builds from a full row-major `n x n` matrix; the diagonal is ignored.
    pub fn from_dense(n: usize, b: &[f64]) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidFriction(format!("need at least 2 species, got {n}")));
        }
        if b.len() != n * n {
            return Err(Error::InvalidFriction(format!(
                "expected {} entries, got {}",
                n * n,
                b.len()
            )));
        }
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let (bij, bji) = (b[i * n + j], b[j * n + i]);
                if !(bij > 0.0) || !bij.is_finite() {
                    return Err(Error::InvalidFriction(format!(
                        "b[{}][{}] = {bij} must be positive",
                        i + 1,
                        j + 1
                    )));
                }
                if bij != bji {
                    return Err(Error::InvalidFriction(format!(
                        "b[{}][{}] = {bij} but b[{}][{}] = {bji}",
                        i + 1,
                        j + 1,
                        j + 1,
                        i + 1
                    )));
                }
                out[i * n + j] = bij;
            }
        }
        Ok(Self { n, b: out })
    }

    /// Builds from the strict upper triangle listed row by row:
    /// `b_12, b_13, …, b_1n, b_23, …`.
    pub fn from_upper(n: usize, upper: &[f64]) -> Result<Self> {
        if n < 2 || upper.len() != n * (n - 1) / 2 {
            return Err(Error::InvalidFriction(format!(
                "{n} species need {} coefficients, got {}",
                n * n.saturating_sub(1) / 2,
                upper.len()
            )));
        }
        let mut dense = vec![0.0; n * n];
        let mut k = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                dense[i * n + j] = upper[k];
                dense[j * n + i] = upper[k];
                k += 1;
            }
        }
        Self::from_dense(n, &dense)
    }

    /// Every off-diagonal entry equal to `value`.
    pub fn uniform(n: usize, value: f64) -> Result<Self> {
        Self::from_upper(n, &vec![value; n * n.saturating_sub(1) / 2])
    }

    pub fn species(&self) -> usize {
        self.n
    }

    /// `b_ij` with zero-based species indices.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.b[i * self.n + j]
    }

    /// Same matrix with every coefficient multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let b: Vec<f64> = self.b.iter().map(|v| v * factor).collect();
        Self::from_dense(self.n, &b)
    }
}

fn check_point(rho_hat: &[f64], b: &FrictionMatrix) -> Result<()> {
    if rho_hat.len() != b.species() {
        return Err(Error::Dimension(format!(
            "edge state has {} species, friction matrix {}",
            rho_hat.len(),
            b.species()
        )));
    }
    check_positive(rho_hat)
}

fn check_positive(rho_hat: &[f64]) -> Result<()> {
    for (i, &r) in rho_hat.iter().enumerate() {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::NonPositiveDensity {
                species: i,
                cell: 0,
                value: r,
            });
        }
    }
    Ok(())
}

/// Leading `(n-1)` block of the friction matrix `B` at one edge point.
pub fn assemble_b(rho_hat: &[f64], b: &FrictionMatrix) -> Result<Vec<f64>> {
    check_point(rho_hat, b)?;
    let n = b.species();
    let m = n - 1;
    let mut out = vec![0.0; m * m];
    for i in 0..m {
        let mut diag = 0.0;
        for k in 0..n {
            if k != i {
                diag += b.get(i, k) * rho_hat[i] * rho_hat[k];
            }
        }
        out[i * m + i] = diag;
        for j in 0..m {
            if j != i {
                // Fixed operand order keeps the block exactly symmetric.
                let (lo, hi) = (i.min(j), i.max(j));
                out[i * m + j] = -b.get(lo, hi) * (rho_hat[lo] * rho_hat[hi]);
            }
        }
    }
    Ok(out)
}

/// `Q_ij = δ_ij/ρ̂_i + 1/ρ̂_n`.
pub fn assemble_q(rho_hat: &[f64]) -> Result<Vec<f64>> {
    if rho_hat.len() < 2 {
        return Err(Error::Dimension("Q needs at least 2 species".into()));
    }
    check_positive(rho_hat)?;
    let m = rho_hat.len() - 1;
    let last = 1.0 / rho_hat[m];
    let mut out = vec![last; m * m];
    for i in 0..m {
        out[i * m + i] += 1.0 / rho_hat[i];
    }
    Ok(out)
}

/// `Q⁻¹_ij = δ_ij ρ̂_i − ρ̂_i ρ̂_j / Σ_m ρ̂_m`, with the sum taken as given.
pub fn assemble_q_inv(rho_hat: &[f64]) -> Result<Vec<f64>> {
    if rho_hat.len() < 2 {
        return Err(Error::Dimension("Q needs at least 2 species".into()));
    }
    check_positive(rho_hat)?;
    Ok(q_inv_unchecked(rho_hat))
}

pub(crate) fn q_inv_unchecked(rho: &[f64]) -> Vec<f64> {
    let m = rho.len() - 1;
    let total: f64 = rho.iter().sum();
    let mut out = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            let (lo, hi) = (i.min(j), i.max(j));
            out[i * m + j] = -(rho[lo] * rho[hi]) / total;
        }
        // ρ_i(Σ − ρ_i)/Σ with the complement summed directly, free of cancellation.
        let others: f64 = rho.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, v)| v).sum();
        out[i * m + i] = rho[i] * others / total;
    }
    out
}

/// `D̂ = Q⁻¹ B⁻¹ Q⁻¹` at one edge point, symmetrized and checked SPD.
pub fn edge_point_d_hat(rho_hat: &[f64], b: &FrictionMatrix) -> Result<Vec<f64>> {
    let bm = assemble_b(rho_hat, b)?;
    let m = b.species() - 1;
    let chol = Cholesky::factor(&bm, m).ok_or_else(|| Error::NotSpd("friction block B".into()))?;
    let qinv = q_inv_unchecked(rho_hat);

    // X = B⁻¹ Q⁻¹, one column at a time.
    let mut x = vec![0.0; m * m];
    let mut col = vec![0.0; m];
    for j in 0..m {
        for i in 0..m {
            col[i] = qinv[i * m + j];
        }
        chol.solve_in_place(&mut col);
        for i in 0..m {
            x[i * m + j] = col[i];
        }
    }
    let mut d = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            let mut v = 0.0;
            for k in 0..m {
                v += qinv[i * m + k] * x[k * m + j];
            }
            d[i * m + j] = v;
        }
    }
    for i in 0..m {
        for j in (i + 1)..m {
            let avg = 0.5 * (d[i * m + j] + d[j * m + i]);
            d[i * m + j] = avg;
            d[j * m + i] = avg;
        }
    }
    if Cholesky::factor(&d, m).is_none() {
        return Err(Error::NotSpd("assembled diffusion tensor".into()));
    }
    Ok(d)
}

/// One `(n-1) x (n-1)` SPD matrix per edge point and axis.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeDiffusionTensor {
    grid: GridSpec,
    m: usize,
    data: Vec<f64>,
}

impl EdgeDiffusionTensor {
    /// The same matrix at every edge point.
    pub fn uniform(grid: GridSpec, matrix: &[f64], m: usize) -> Result<Self> {
        if matrix.len() != m * m || m == 0 {
            return Err(Error::Dimension(format!(
                "matrix has {} entries, expected {}",
                matrix.len(),
                m * m
            )));
        }
        let count = grid.dim() * grid.cell_count();
        let mut data = Vec::with_capacity(count * m * m);
        for _ in 0..count {
            data.extend_from_slice(matrix);
        }
        Ok(Self { grid, m, data })
    }

    /// Identity at every edge point.
    pub fn identity(grid: GridSpec, m: usize) -> Self {
        let mut eye = vec![0.0; m * m];
        for i in 0..m {
            eye[i * m + i] = 1.0;
        }
        Self::uniform(grid, &eye, m).expect("square identity")
    }

    /// Builds from `f(axis, cell) -> matrix`.
    pub fn from_fn(grid: GridSpec, m: usize, mut f: impl FnMut(usize, usize) -> Vec<f64>) -> Result<Self> {
        let nc = grid.cell_count();
        let mut data = Vec::with_capacity(grid.dim() * nc * m * m);
        for s in 0..grid.dim() {
            for c in 0..nc {
                let mat = f(s, c);
                if mat.len() != m * m {
                    return Err(Error::Dimension("edge matrix has the wrong size".into()));
                }
                data.extend_from_slice(&mat);
            }
        }
        Ok(Self { grid, m, data })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Number of reduced species, `n - 1`.
    pub fn reduced_species(&self) -> usize {
        self.m
    }

    /// Matrix at edge `cell` along `axis`, row-major.
    pub fn matrix(&self, axis: usize, cell: usize) -> &[f64] {
        let mm = self.m * self.m;
        let k = axis * self.grid.cell_count() + cell;
        &self.data[k * mm..(k + 1) * mm]
    }

    /// Applies the per-edge matrix across species: `(Φ φ)_i = Σ_j Φ_ij φ_j`.
    pub fn apply(&self, phi: &EdgeField) -> Result<EdgeField> {
        if phi.species() != self.m || phi.grid() != &self.grid {
            return Err(Error::Dimension(format!(
                "tensor acts on {} species, field has {}",
                self.m,
                phi.species()
            )));
        }
        let mut out = EdgeField::zeros(self.grid, self.m);
        let m = self.m;
        for s in 0..self.grid.dim() {
            for c in 0..self.grid.cell_count() {
                let mat = self.matrix(s, c);
                for i in 0..m {
                    let mut v = 0.0;
                    for j in 0..m {
                        v += mat[i * m + j] * phi.get(j, s, c);
                    }
                    out.set(i, s, c, v);
                }
            }
        }
        Ok(out)
    }

    /// Largest `|Φ_ij − Φ_ji|` over all edge points.
    pub fn max_asymmetry(&self) -> f64 {
        let m = self.m;
        let mut worst = 0.0_f64;
        for block in self.data.chunks(m * m) {
            for i in 0..m {
                for j in 0..m {
                    worst = worst.max((block[i * m + j] - block[j * m + i]).abs());
                }
            }
        }
        worst
    }

    /// True when every edge matrix admits a Cholesky factorization.
    pub fn is_spd(&self) -> bool {
        self.data
            .chunks(self.m * self.m)
            .all(|block| Cholesky::factor(block, self.m).is_some())
    }
}

/// Validates that `rho` is positive and sums to one pointwise within `1e-8`.
pub(crate) fn check_state(rho: &CellField) -> Result<()> {
    let nc = rho.grid().cell_count();
    for i in 0..rho.species() {
        for c in 0..nc {
            let v = rho.get(i, c);
            if !(v > 0.0) {
                return Err(Error::NonPositiveDensity {
                    species: i,
                    cell: c,
                    value: v,
                });
            }
        }
    }
    for c in 0..nc {
        let sum: f64 = (0..rho.species()).map(|i| rho.get(i, c)).sum();
        if (sum - 1.0).abs() > 1e-8 {
            return Err(Error::NotNormalized { cell: c, sum });
        }
    }
    Ok(())
}

/// Edge tensor `D̂` from the cell densities of the previous time level.
pub fn assemble_d_hat(rho_prev: &CellField, b: &FrictionMatrix, grid: &GridSpec) -> Result<EdgeDiffusionTensor> {
    if rho_prev.species() != b.species() {
        return Err(Error::Dimension(format!(
            "state has {} species, friction matrix {}",
            rho_prev.species(),
            b.species()
        )));
    }
    check_state(rho_prev)?;
    let avg = average_to_edges(rho_prev, grid)?;
    let n = b.species();
    let m = n - 1;
    let nc = grid.cell_count();
    let edges = grid.dim() * nc;
    let blocks: Vec<Vec<f64>> = (0..edges)
        .into_par_iter()
        .map(|k| {
            let (s, c) = (k / nc, k % nc);
            let rho_hat: Vec<f64> = (0..n).map(|i| avg.get(i, s, c)).collect();
            edge_point_d_hat(&rho_hat, b)
        })
        .collect::<Result<_>>()?;
    let mut data = Vec::with_capacity(edges * m * m);
    for blk in blocks {
        data.extend_from_slice(&blk);
    }
    Ok(EdgeDiffusionTensor { grid: *grid, m, data })
}
