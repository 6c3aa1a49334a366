//! Refinement studies in space and time with least-squares order fits.

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::grid::{CellField, GridSpec};
use crate::initial::InitialCondition;
use crate::mixture::FrictionMatrix;
use crate::stepper::{SimulationState, StepConfig};

use super::manufactured::Manufactured;

/// Fewest points for which a fitted slope is treated as meaningful.
pub const MIN_ASSERTED_POINTS: usize = 4;

/// What the numerical solution at the final time is compared with.
#[derive(Debug, Clone, PartialEq)]
pub enum Reference {
    /// The spatially constant state given by the domain average of the
    /// initial data (the long-time limit).
    DomainAverage,
    /// A fixed spatially constant state.
    Constant(Vec<f64>),
    /// Point values of an exact solution at the final time.
    Exact(Manufactured),
}

/// Everything a refinement study holds fixed.
#[derive(Debug, Clone)]
pub struct StudySetup {
    pub dim: usize,
    pub length: f64,
    pub species: usize,
    pub initial: InitialCondition,
    pub friction: FrictionMatrix,
    pub final_time: f64,
    pub reference: Reference,
    /// Solver controls; `dt` is overwritten by each run.
    pub solver: StepConfig,
}

impl StudySetup {
    /// Two-species cosine data evolved against the exact heat mode.
    pub fn heat_mode(amplitude: f64, b12: f64, final_time: f64) -> Result<Self> {
        let exact = Manufactured::heat_mode(amplitude, b12)?;
        Ok(Self {
            dim: 1,
            length: 1.0,
            species: 2,
            initial: InitialCondition::TwoSpeciesCosine { amplitude },
            friction: exact.friction()?,
            final_time,
            reference: Reference::Exact(exact),
            solver: StepConfig::new(final_time)?,
        })
    }

    /// Reference state sampled on `grid`.
    pub fn reference_field(&self, grid: &GridSpec) -> Result<CellField> {
        match &self.reference {
            Reference::DomainAverage => {
                let avg = self.initial.domain_average(grid, self.species)?;
                Ok(CellField::from_fn(*grid, self.species, |i, _| avg[i]))
            }
            Reference::Constant(v) => {
                if v.len() != self.species {
                    return Err(Error::Dimension(format!(
                        "reference has {} species, study {}",
                        v.len(),
                        self.species
                    )));
                }
                Ok(CellField::from_fn(*grid, self.species, |i, _| v[i]))
            }
            Reference::Exact(m) => {
                if m.species() != self.species {
                    return Err(Error::Dimension("exact solution has the wrong species count".into()));
                }
                Ok(CellField::from_fn(*grid, self.species, |i, x| {
                    m.density(i, x[0], self.final_time)
                }))
            }
        }
    }

    /// Runs to the final time on `grid` with step `dt` and returns the densities.
    pub fn solve(&self, grid: &GridSpec, dt: f64) -> Result<CellField> {
        let steps = steps_for(self.final_time, dt)?;
        let mut cfg = self.solver;
        cfg.dt = dt;
        cfg.validate()?;
        let rho0 = self.initial.sample(grid, self.species)?;
        let state = SimulationState::new(*grid, self.friction.clone(), rho0)?;
        Ok(state.advance(&cfg, steps)?.rho().clone())
    }

    /// `(L∞, L²)` errors of runs at each `(cells per axis, dt)` pair, computed in parallel.
    pub fn errors(&self, runs: &[(usize, f64)]) -> Result<Vec<(f64, f64)>> {
        runs.par_iter()
            .map(|&(cells, dt)| {
                let grid = GridSpec::new(self.dim, cells, self.length)?;
                let rho = self.solve(&grid, dt)?;
                error_norms(&rho, &self.reference_field(&grid)?)
            })
            .collect()
    }
}

/// Number of steps of size `dt` reaching `final_time`; fails unless `dt` divides it.
pub fn steps_for(final_time: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !(final_time >= 0.0) {
        return Err(Error::NonDivisibleTimeStep { dt, final_time });
    }
    let ratio = final_time / dt;
    let steps = ratio.round();
    if (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::NonDivisibleTimeStep { dt, final_time });
    }
    Ok(steps as usize)
}

/// Species-max of the cell-wise L∞ error and of the `h^d`-weighted L² error.
pub fn error_norms(rho: &CellField, reference: &CellField) -> Result<(f64, f64)> {
    rho.check_like(reference, "error_norms")?;
    let vol = rho.grid().cell_volume();
    let mut linf = 0.0_f64;
    let mut l2 = 0.0_f64;
    for i in 0..rho.species() {
        let mut sq = 0.0;
        for (a, b) in rho.component(i).iter().zip(reference.component(i)) {
            let e = (a - b).abs();
            linf = linf.max(e);
            sq += e * e;
        }
        l2 = l2.max((vol * sq).sqrt());
    }
    Ok((linf, l2))
}

/// Ordinary least squares on `(log param, log error)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// 95% confidence interval of the slope; `None` with fewer than 3 points.
    pub interval: Option<(f64, f64)>,
    pub points: usize,
}

impl SlopeFit {
    pub fn asserted(&self) -> bool {
        self.points >= MIN_ASSERTED_POINTS
    }
}

/// Fits `log e = a + p log x`. A single point gives `None`; repeated
/// parameters or nonpositive errors are a [`Error::DegenerateFit`].
pub fn fit_slope(params: &[f64], errors: &[f64]) -> Result<Option<SlopeFit>> {
    if params.len() != errors.len() {
        return Err(Error::Dimension(format!(
            "{} parameters but {} errors",
            params.len(),
            errors.len()
        )));
    }
    if params.is_empty() {
        return Err(Error::DegenerateFit("no points".into()));
    }
    if let Some(p) = params.iter().find(|p| !(**p > 0.0) || !p.is_finite()) {
        return Err(Error::DegenerateFit(format!("parameter {p} is not positive")));
    }
    if let Some(e) = errors.iter().find(|e| !(**e > 0.0) || !e.is_finite()) {
        return Err(Error::DegenerateFit(format!("error {e} is not positive")));
    }
    let mut sorted = params.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::DegenerateFit("repeated parameter values".into()));
    }
    let n = params.len();
    if n == 1 {
        return Ok(None);
    }
    let xs: Vec<f64> = params.iter().map(|p| p.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let xm = xs.iter().sum::<f64>() / n as f64;
    let ym = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let interval = if n > 2 {
        let ssr: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (y - intercept - slope * x).powi(2))
            .sum();
        let se = (ssr / (n - 2) as f64 / sxx).sqrt();
        let t = StudentsT::new(0.0, 1.0, (n - 2) as f64)
            .map_err(|e| Error::DegenerateFit(e.to_string()))?
            .inverse_cdf(0.975);
        Some((slope - t * se, slope + t * se))
    } else {
        None
    };
    Ok(Some(SlopeFit {
        slope,
        intercept,
        interval,
        points: n,
    }))
}

/// Errors against the reference for a sequence of refinement values.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// `"h"` or `"dt"`.
    pub parameter: String,
    pub params: Vec<f64>,
    pub err_linf: Vec<f64>,
    pub err_l2: Vec<f64>,
    pub fit_linf: Option<SlopeFit>,
    pub fit_l2: Option<SlopeFit>,
}

impl ConvergenceReport {
    fn build(parameter: &str, params: Vec<f64>, errs: Vec<(f64, f64)>) -> Result<Self> {
        let err_linf: Vec<f64> = errs.iter().map(|e| e.0).collect();
        let err_l2: Vec<f64> = errs.iter().map(|e| e.1).collect();
        Ok(Self {
            parameter: parameter.into(),
            fit_linf: fit_slope(&params, &err_linf)?,
            fit_l2: fit_slope(&params, &err_l2)?,
            params,
            err_linf,
            err_l2,
        })
    }

    /// Slope asserted by the harness (L∞), if there are enough points.
    pub fn slope(&self) -> Option<f64> {
        self.fit_linf.filter(SlopeFit::asserted).map(|f| f.slope)
    }
}

fn cells_for(h: f64, length: f64) -> Result<usize> {
    let ratio = length / h;
    let cells = ratio.round();
    if !(h > 0.0) || (ratio - cells).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::NonDivisibleSpacing { spacing: h, length });
    }
    Ok(cells as usize)
}

fn check_strictly_monotone(values: &[f64], what: &str) -> Result<()> {
    let up = values.windows(2).all(|w| w[0] < w[1]);
    let down = values.windows(2).all(|w| w[0] > w[1]);
    if !(up || down) {
        return Err(Error::DegenerateFit(format!("{what} values must be strictly monotone")));
    }
    Ok(())
}

/// Errors at the final time for each spacing, with `dt` fixed.
pub fn spatial_convergence(setup: &StudySetup, dt: f64, h_values: &[f64]) -> Result<ConvergenceReport> {
    check_strictly_monotone(h_values, "h")?;
    let runs: Vec<(usize, f64)> = h_values
        .iter()
        .map(|&h| Ok((cells_for(h, setup.length)?, dt)))
        .collect::<Result<_>>()?;
    steps_for(setup.final_time, dt)?;
    let errs = setup.errors(&runs)?;
    ConvergenceReport::build("h", h_values.to_vec(), errs)
}

/// Errors at the final time for each step size, with `h` fixed.
pub fn temporal_convergence(setup: &StudySetup, h: f64, dt_values: &[f64]) -> Result<ConvergenceReport> {
    check_strictly_monotone(dt_values, "dt")?;
    let cells = cells_for(h, setup.length)?;
    for &dt in dt_values {
        steps_for(setup.final_time, dt)?;
    }
    let runs: Vec<(usize, f64)> = dt_values.iter().map(|&dt| (cells, dt)).collect();
    let errs = setup.errors(&runs)?;
    ConvergenceReport::build("dt", dt_values.to_vec(), errs)
}

/// `count` values log-spaced from `hi` down to `lo`.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![hi];
    }
    (0..count)
        .map(|k| (hi.ln() + (lo.ln() - hi.ln()) * k as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Log-spaced spacings in `[lo, hi]` snapped to `length / N` with `N` odd,
/// coarse to fine, duplicates removed. A range too narrow to hold an odd
/// `N` yields the nearest one outside it.
///
/// With odd `N` no cell center lands on a multiple of `1/4`, so sampling
/// piecewise-linear data with kinks there has a cell-mean error of order
/// `h²` and the long-time limit inherits a clean second-order error.
pub fn odd_cell_sweep(lo: f64, hi: f64, count: usize, length: f64) -> Vec<f64> {
    let n_min = (length / hi).ceil() as usize;
    let n_max = (length / lo).floor() as usize;
    let mut cells: Vec<usize> = Vec::new();
    for h in log_spaced(lo, hi, count).into_iter().rev() {
        let target = length / h;
        let below = ((target - 1.0) / 2.0).floor() as usize * 2 + 1;
        let above = below + 2;
        let pick = |n: usize| n >= n_min.max(5) && n <= n_max;
        let choice = match (pick(below), pick(above)) {
            (true, true) => {
                if target - below as f64 <= above as f64 - target {
                    below
                } else {
                    above
                }
            }
            (true, false) => below,
            (false, true) => above,
            // Nothing odd fits inside a narrow range: take the nearest odd count.
            (false, false) if target - below as f64 <= above as f64 - target && below >= 5 => below,
            (false, false) => above.max(5),
        };
        if !cells.contains(&choice) {
            cells.push(choice);
        }
    }
    cells.sort_unstable();
    cells.into_iter().map(|n| length / n as f64).collect()
}

/// Log-spaced step sizes in `[lo, hi]`, each adjusted to the nearest
/// `final_time / k`, largest first, duplicates removed.
pub fn dividing_dt_sweep(lo: f64, hi: f64, count: usize, final_time: f64) -> Vec<f64> {
    let mut steps: Vec<usize> = Vec::new();
    for dt in log_spaced(lo, hi, count) {
        let k = (final_time / dt).round().max(1.0) as usize;
        if !steps.contains(&k) {
            steps.push(k);
        }
    }
    steps.sort_unstable();
    steps.into_iter().map(|k| final_time / k as f64).collect()
}
