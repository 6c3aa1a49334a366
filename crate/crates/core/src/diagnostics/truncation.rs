//! Local truncation errors of the scheme on an exact continuum solution.
//!
//! With `P` sampled at cell centers and `V` at edge midpoints (`V` at the new
//! time level, `P̂` averaged from the old one):
//!
//! ```text
//! τ¹_i = (P_iᵏ⁺¹ − P_iᵏ)/Δt + d_h(P̂_iᵏ V_iᵏ⁺¹)                       at cells
//! τ²_i = D_h log P_iᵏ⁺¹ − Σ_j P̂_jᵏ D_h log P_jᵏ⁺¹ / Σ_j P̂_jᵏ
//!        + Σ_j b_ij P̂_jᵏ (V_iᵏ⁺¹ − V_jᵏ⁺¹)                              at edges
//! τ³   = Σ_i P̂_iᵏ V_iᵏ⁺¹                                              at edges
//! ```

use crate::error::{Error, Result};
use crate::grid::{average_to_edges, divergence_to_cells, gradient_to_edges, CellField, EdgeField, GridSpec};
use crate::linalg::max_abs;

use super::manufactured::Manufactured;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationRow {
    pub h: f64,
    pub dt: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub tau3: f64,
}

impl TruncationRow {
    pub fn max(&self) -> f64 {
        self.tau1.max(self.tau2).max(self.tau3)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationReport {
    /// Time level `t_k` at which the residuals were formed.
    pub t0: f64,
    pub rows: Vec<TruncationRow>,
    /// Least-squares `C` in `max τ ≈ C (Δt + h²)`.
    pub fit_constant: f64,
    /// `max_rows max τ / (Δt + h²)`.
    pub max_ratio: f64,
}

impl TruncationReport {
    pub fn row(&self, h: f64, dt: f64) -> Option<&TruncationRow> {
        self.rows
            .iter()
            .find(|r| (r.h - h).abs() <= 1e-12 * h && (r.dt - dt).abs() <= 1e-12 * dt)
    }
}

/// Sup norms of `τ¹, τ², τ³` on a periodic 1D grid of spacing `h` with step `dt`.
pub fn truncation_errors(m: &Manufactured, h: f64, dt: f64, t0: f64) -> Result<TruncationRow> {
    m.validate()?;
    if !(dt > 0.0) {
        return Err(Error::InvalidStepConfig(format!("dt must be positive, got {dt}")));
    }
    let grid = GridSpec::with_spacing(1, h, 1.0)?;
    let n = m.species();
    let b = m.friction()?;
    let t1 = t0 + dt;
    let p_old = CellField::from_fn(grid, n, |i, x| m.density(i, x[0], t0));
    let p_new = CellField::from_fn(grid, n, |i, x| m.density(i, x[0], t1));
    for (field, t) in [(&p_old, t0), (&p_new, t1)] {
        if let Some(v) = field.values().iter().find(|v| !(**v > 0.0 && **v < 1.0)) {
            return Err(Error::InvalidManufactured(format!("density {v} at t = {t}")));
        }
    }
    let v_new = EdgeField::from_fn(grid, n, |i, _, x| m.velocity(i, x[0], t1));
    let p_hat = average_to_edges(&p_old, &grid)?;
    let nc = grid.cell_count();

    let mut flux = p_hat.clone();
    for (f, v) in flux.values_mut().iter_mut().zip(v_new.values()) {
        *f *= v;
    }
    let div = divergence_to_cells(&flux, &grid)?;
    let tau1: Vec<f64> = p_new
        .values()
        .iter()
        .zip(p_old.values())
        .zip(div.values())
        .map(|((a, b), d)| (a - b) / dt + d)
        .collect();

    let logs = CellField::from_raw(grid, n, p_new.values().iter().map(|v| v.ln()).collect());
    let dlog = gradient_to_edges(&logs, &grid)?;
    let mut tau2 = Vec::with_capacity(n * nc);
    let mut tau3 = Vec::with_capacity(nc);
    for c in 0..nc {
        let ph: Vec<f64> = (0..n).map(|j| p_hat.get(j, 0, c)).collect();
        let v: Vec<f64> = (0..n).map(|j| v_new.get(j, 0, c)).collect();
        let total: f64 = ph.iter().sum();
        let weighted: f64 = (0..n).map(|j| ph[j] * dlog.get(j, 0, c)).sum::<f64>() / total;
        for i in 0..n {
            let friction: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| b.get(i, j) * ph[j] * (v[i] - v[j]))
                .sum();
            tau2.push(dlog.get(i, 0, c) - weighted + friction);
        }
        tau3.push((0..n).map(|i| ph[i] * v[i]).sum::<f64>());
    }
    Ok(TruncationRow {
        h,
        dt,
        tau1: max_abs(&tau1),
        tau2: max_abs(&tau2),
        tau3: max_abs(&tau3),
    })
}

/// Evaluates every `(h, dt)` combination and fits `C (Δt + h²)`.
pub fn truncation_probe(m: &Manufactured, h_values: &[f64], dt_values: &[f64], t0: f64) -> Result<TruncationReport> {
    if h_values.is_empty() || dt_values.is_empty() {
        return Err(Error::DegenerateFit("truncation probe needs at least one h and one dt".into()));
    }
    let mut rows = Vec::with_capacity(h_values.len() * dt_values.len());
    for &h in h_values {
        for &dt in dt_values {
            rows.push(truncation_errors(m, h, dt, t0)?);
        }
    }
    let (mut num, mut den, mut max_ratio) = (0.0, 0.0, 0.0_f64);
    for r in &rows {
        let s = r.dt + r.h * r.h;
        num += r.max() * s;
        den += s * s;
        max_ratio = max_ratio.max(r.max() / s);
    }
    Ok(TruncationReport {
        t0,
        rows,
        fit_constant: num / den,
        max_ratio,
    })
}
