use crate::entropy::entropy_full;
use crate::error::{Error, Result};
use crate::grid::{CellField, GridSpec};
use crate::linalg::compensated_sum;
use crate::mixture::FrictionMatrix;

use super::{step, StepConfig, StepResult};

/// Pointwise tolerance on `|Σ_i ρ⁰_i − 1|` before renormalization.
pub const NORMALIZATION_TOL: f64 = 1e-8;

/// Diagnostics recorded after every step (and once for the initial state).
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryEntry {
    pub step: usize,
    pub time: f64,
    /// Step size that produced this entry; zero for the initial state.
    pub dt: f64,
    pub energy: f64,
    pub min_density: f64,
    /// `h^d Σ_ℓ ρ_{i,ℓ}` per species.
    pub species_mass: Vec<f64>,
    /// `max_ℓ |Σ_i ρ_{i,ℓ} − Σ_i ρ⁰_{i,ℓ}|`.
    pub mass_drift_pointwise: f64,
    /// `max_i |mass_i − mass⁰_i|`.
    pub mass_drift_species: f64,
    pub dual_increment_sq: f64,
    pub newton_iters: usize,
    pub residual_norm: f64,
}

/// Densities, clock and diagnostic history of one simulation.
#[derive(Debug, Clone)]
pub struct SimulationState {
    grid: GridSpec,
    mixture: FrictionMatrix,
    rho: CellField,
    time: f64,
    step_index: usize,
    initial_totals: Vec<f64>,
    history: Vec<HistoryEntry>,
}

impl SimulationState {
    /// Validates `rho0` (positive, pointwise sum within `1e-8` of one) and
    /// divides every cell by its sum.
    pub fn new(grid: GridSpec, mixture: FrictionMatrix, rho0: CellField) -> Result<Self> {
        rho0.check_grid(&grid, "SimulationState::new")?;
        if rho0.species() != mixture.species() {
            return Err(Error::Dimension(format!(
                "initial data has {} species, friction matrix {}",
                rho0.species(),
                mixture.species()
            )));
        }
        let nc = grid.cell_count();
        let n = rho0.species();
        let mut rho = rho0;
        for c in 0..nc {
            let mut sum = 0.0;
            for i in 0..n {
                let v = rho.get(i, c);
                if !(v > 0.0) {
                    return Err(Error::NonPositiveDensity {
                        species: i,
                        cell: c,
                        value: v,
                    });
                }
                sum += v;
            }
            if (sum - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::NotNormalized { cell: c, sum });
            }
            for i in 0..n {
                let v = rho.get(i, c) / sum;
                rho.set(i, c, v);
            }
        }
        let initial_totals = pointwise_totals(&rho);
        let mut state = Self {
            grid,
            mixture,
            rho,
            time: 0.0,
            step_index: 0,
            initial_totals,
            history: Vec::new(),
        };
        let entry = state.diagnostics(0.0, 0.0, 0, 0.0)?;
        state.history.push(entry);
        Ok(state)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn mixture(&self) -> &FrictionMatrix {
        &self.mixture
    }

    pub fn rho(&self) -> &CellField {
        &self.rho
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    /// One entry per completed step plus the initial state.
    pub fn history(&self) -> &[HistoryEntry] {
        &self.history
    }

    /// Takes one step. On failure `self` is left untouched.
    pub fn step_once(&mut self, cfg: &StepConfig) -> Result<StepResult> {
        let result = step(&self.rho, &self.mixture, &self.grid, cfg).map_err(|e| Error::Step {
            step: self.step_index + 1,
            source: Box::new(e),
        })?;
        let previous = std::mem::replace(&mut self.rho, result.rho_next.clone());
        let previous_time = self.time;
        self.time += cfg.dt;
        self.step_index += 1;
        match self.diagnostics(cfg.dt, result.dual_increment_sq, result.newton_iters, result.residual_norm) {
            Ok(entry) => {
                self.history.push(entry);
                Ok(result)
            }
            Err(e) => {
                self.rho = previous;
                self.step_index -= 1;
                self.time = previous_time;
                Err(Error::Step {
                    step: self.step_index + 1,
                    source: Box::new(e),
                })
            }
        }
    }

    /// Returns the state after `steps` further steps; `self` is not modified.
    pub fn advance(&self, cfg: &StepConfig, steps: usize) -> Result<SimulationState> {
        self.advance_with(cfg, steps, |_, _| {})
    }

    /// As [`advance`](Self::advance), calling `observer` after every step.
    pub fn advance_with(
        &self,
        cfg: &StepConfig,
        steps: usize,
        mut observer: impl FnMut(&SimulationState, &StepResult),
    ) -> Result<SimulationState> {
        cfg.validate()?;
        let mut next = self.clone();
        for _ in 0..steps {
            let result = next.step_once(cfg)?;
            observer(&next, &result);
        }
        Ok(next)
    }

    fn diagnostics(&self, dt: f64, dual: f64, newton_iters: usize, residual_norm: f64) -> Result<HistoryEntry> {
        let vol = self.grid.cell_volume();
        let species_mass: Vec<f64> = (0..self.rho.species())
            .map(|i| vol * self.rho.component_sum(i))
            .collect();
        let totals = pointwise_totals(&self.rho);
        let mass_drift_pointwise = totals
            .iter()
            .zip(&self.initial_totals)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        let mass_drift_species = match self.history.first() {
            Some(first) => species_mass
                .iter()
                .zip(&first.species_mass)
                .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())),
            None => 0.0,
        };
        Ok(HistoryEntry {
            step: self.step_index,
            time: self.time,
            dt,
            energy: entropy_full(&self.rho)?,
            min_density: self.rho.min_value(),
            species_mass,
            mass_drift_pointwise,
            mass_drift_species,
            dual_increment_sq: dual,
            newton_iters,
            residual_norm,
        })
    }
}

fn pointwise_totals(rho: &CellField) -> Vec<f64> {
    (0..rho.grid().cell_count())
        .map(|c| compensated_sum((0..rho.species()).map(|i| rho.get(i, c))))
        .collect()
}
