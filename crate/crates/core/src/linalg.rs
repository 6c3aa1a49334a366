//! Small numerical kernels shared by the scheme: compensated reductions,
//! dense Cholesky for the per-edge (n-1)x(n-1) blocks, a banded Cholesky for
//! the one-dimensional Newton systems and a preconditioned conjugate gradient.

use crate::error::{Error, Result};

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut carry = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Compensated dot product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    compensated_sum(a.iter().zip(b).map(|(x, y)| x * y))
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Row-major product of two square `dim x dim` matrices.
pub fn mat_mul(a: &[f64], b: &[f64], dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim * dim];
    for i in 0..dim {
        for k in 0..dim {
            let aik = a[i * dim + k];
            for j in 0..dim {
                out[i * dim + j] += aik * b[k * dim + j];
            }
        }
    }
    out
}

/// Cholesky factor `A = L Lᵀ` of a small dense symmetric matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    dim: usize,
    lower: Vec<f64>,
}

impl Cholesky {
    /// Factor a row-major `dim x dim` matrix. Only the lower triangle is read.
    /// Returns `None` if a pivot is not strictly positive.
    pub fn factor(a: &[f64], dim: usize) -> Option<Self> {
        debug_assert_eq!(a.len(), dim * dim);
        let mut lower = vec![0.0; dim * dim];
        for j in 0..dim {
            let mut diag = a[j * dim + j];
            for k in 0..j {
                diag -= lower[j * dim + k] * lower[j * dim + k];
            }
            if !(diag > 0.0) || !diag.is_finite() {
                return None;
            }
            let ljj = diag.sqrt();
            lower[j * dim + j] = ljj;
            for i in (j + 1)..dim {
                let mut v = a[i * dim + j];
                for k in 0..j {
                    v -= lower[i * dim + k] * lower[j * dim + k];
                }
                lower[i * dim + j] = v / ljj;
            }
        }
        Some(Self { dim, lower })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.dim;
        let l = &self.lower;
        for i in 0..n {
            let mut v = b[i];
            for k in 0..i {
                v -= l[i * n + k] * b[k];
            }
            b[i] = v / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut v = b[i];
            for k in (i + 1)..n {
                v -= l[k * n + i] * b[k];
            }
            b[i] = v / l[i * n + i];
        }
    }

    /// Smallest diagonal entry of the factor; zero only for singular input.
    pub fn min_pivot(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.lower[i * self.dim + i])
            .fold(f64::INFINITY, f64::min)
    }
}

/// Symmetric banded matrix stored by its lower band (`bandwidth` sub-diagonals).
#[derive(Debug, Clone)]
pub struct BandedSymmetric {
    size: usize,
    bandwidth: usize,
    band: Vec<f64>,
}

impl BandedSymmetric {
    pub fn zeros(size: usize, bandwidth: usize) -> Self {
        Self {
            size,
            bandwidth,
            band: vec![0.0; size * (bandwidth + 1)],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Add `value` to entry (i, j) and, implicitly, to (j, i).
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let off = r - c;
        assert!(off <= self.bandwidth, "entry ({i}, {j}) outside the band");
        self.band[r * (self.bandwidth + 1) + off] += value;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let off = r - c;
        if off > self.bandwidth {
            0.0
        } else {
            self.band[r * (self.bandwidth + 1) + off]
        }
    }

    /// In-place banded Cholesky.
    pub fn factor(mut self) -> Result<BandedCholesky> {
        let w = self.bandwidth + 1;
        let kd = self.bandwidth;
        for j in 0..self.size {
            let lo = j.saturating_sub(kd);
            let mut diag = self.band[j * w];
            for k in lo..j {
                let v = self.band[j * w + (j - k)];
                diag -= v * v;
            }
            if !(diag > 0.0) || !diag.is_finite() {
                return Err(Error::NotSpd(format!("banded pivot {j} = {diag:e}")));
            }
            let ljj = diag.sqrt();
            self.band[j * w] = ljj;
            let hi = (j + kd + 1).min(self.size);
            for i in (j + 1)..hi {
                let lo_i = i.saturating_sub(kd);
                let mut v = self.band[i * w + (i - j)];
                for k in lo_i.max(lo)..j {
                    v -= self.band[i * w + (i - k)] * self.band[j * w + (j - k)];
                }
                self.band[i * w + (i - j)] = v / ljj;
            }
        }
        Ok(BandedCholesky { inner: self })
    }
}

#[derive(Debug, Clone)]
pub struct BandedCholesky {
    inner: BandedSymmetric,
}

impl BandedCholesky {
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let m = &self.inner;
        let w = m.bandwidth + 1;
        let kd = m.bandwidth;
        let n = m.size;
        for i in 0..n {
            let mut v = b[i];
            for k in i.saturating_sub(kd)..i {
                v -= m.band[i * w + (i - k)] * b[k];
            }
            b[i] = v / m.band[i * w];
        }
        for i in (0..n).rev() {
            let mut v = b[i];
            let hi = (i + kd + 1).min(n);
            for k in (i + 1)..hi {
                v -= m.band[k * w + (k - i)] * b[k];
            }
            b[i] = v / m.band[i * w];
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOutcome {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Jacobi-preconditioned conjugate gradient for `A x = b`.
///
/// `project` is applied to the initial residual, every preconditioned residual
/// and the final iterate; pass a no-op for nonsingular systems, or a projection
/// onto the complement of the nullspace when `A` is only semidefinite.
pub fn pcg<A, P>(
    apply: A,
    diagonal: &[f64],
    rhs: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
    project: P,
) -> Result<CgOutcome>
where
    A: Fn(&[f64], &mut [f64]),
    P: Fn(&mut [f64]),
{
    let n = rhs.len();
    let rhs_norm = dot(rhs, rhs).sqrt();
    if rhs_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgOutcome {
            iterations: 0,
            relative_residual: 0.0,
        });
    }

    let mut ax = vec![0.0; n];
    apply(x, &mut ax);
    let mut r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
    project(&mut r);
    let mut z: Vec<f64> = r.iter().zip(diagonal).map(|(ri, d)| ri / d).collect();
    project(&mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];

    let mut residual = dot(&r, &r).sqrt() / rhs_norm;
    if residual <= tol {
        return Ok(CgOutcome {
            iterations: 0,
            relative_residual: residual,
        });
    }

    for it in 1..=max_iter {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NotSpd(format!("CG curvature {pap:e} at iteration {it}")));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        residual = dot(&r, &r).sqrt() / rhs_norm;
        if residual <= tol {
            project(x);
            return Ok(CgOutcome {
                iterations: it,
                relative_residual: residual,
            });
        }
        for i in 0..n {
            z[i] = r[i] / diagonal[i];
        }
        project(&mut z);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::LinearSolve {
        iterations: max_iter,
        residual,
    })
}
