//! Smooth exact solutions of the continuum system used as oracles.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::mixture::FrictionMatrix;

/// Exact `(P, V)` pairs on the unit torus.
#[derive(Debug, Clone, PartialEq)]
pub enum Manufactured {
    /// Two species, `P₁ = ½ + A e^{−4π²t/b₁₂} cos 2πx`, `P₂ = 1 − P₁`,
    /// `P₁V₁ = −∂ₓP₁/b₁₂`, `V₂ = −P₁V₁/P₂`.
    HeatMode { amplitude: f64, b12: f64 },
    /// Spatially constant densities at rest.
    Constant { densities: Vec<f64>, friction: Vec<f64> },
}

impl Manufactured {
    pub fn heat_mode(amplitude: f64, b12: f64) -> Result<Self> {
        let m = Manufactured::HeatMode { amplitude, b12 };
        m.validate()?;
        Ok(m)
    }

    pub fn species(&self) -> usize {
        match self {
            Manufactured::HeatMode { .. } => 2,
            Manufactured::Constant { densities, .. } => densities.len(),
        }
    }

    pub fn friction(&self) -> Result<FrictionMatrix> {
        match self {
            Manufactured::HeatMode { b12, .. } => FrictionMatrix::from_upper(2, &[*b12]),
            Manufactured::Constant { densities, friction } => FrictionMatrix::from_upper(densities.len(), friction),
        }
    }

    /// Densities must stay in `(0, 1)` and sum to one.
    pub fn validate(&self) -> Result<()> {
        match self {
            Manufactured::HeatMode { amplitude, b12 } => {
                if !(*b12 > 0.0) {
                    return Err(Error::InvalidManufactured(format!("b12 = {b12} must be positive")));
                }
                if !(amplitude.abs() < 0.5) {
                    return Err(Error::InvalidManufactured(format!(
                        "amplitude {amplitude} lets P₁ reach 0 or 1"
                    )));
                }
            }
            Manufactured::Constant { densities, .. } => {
                if densities.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
                    return Err(Error::InvalidManufactured(format!("densities {densities:?}")));
                }
                let s: f64 = densities.iter().sum();
                if (s - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidManufactured(format!("densities sum to {s}")));
                }
            }
        }
        self.friction()?;
        Ok(())
    }

    /// Decay rate `4π²/b₁₂` of the heat mode.
    pub fn decay_rate(&self) -> f64 {
        match self {
            Manufactured::HeatMode { b12, .. } => 4.0 * PI * PI / b12,
            Manufactured::Constant { .. } => 0.0,
        }
    }

    pub fn density(&self, species: usize, x: f64, t: f64) -> f64 {
        match self {
            Manufactured::HeatMode { amplitude, .. } => {
                let p1 = 0.5 + amplitude * (-self.decay_rate() * t).exp() * (TAU * x).cos();
                if species == 0 {
                    p1
                } else {
                    1.0 - p1
                }
            }
            Manufactured::Constant { densities, .. } => densities[species],
        }
    }

    pub fn velocity(&self, species: usize, x: f64, t: f64) -> f64 {
        match self {
            Manufactured::HeatMode { amplitude, b12 } => {
                let dp1 = -TAU * amplitude * (-self.decay_rate() * t).exp() * (TAU * x).sin();
                let flux1 = -dp1 / b12;
                let p1 = self.density(0, x, t);
                if species == 0 {
                    flux1 / p1
                } else {
                    -flux1 / (1.0 - p1)
                }
            }
            Manufactured::Constant { .. } => 0.0,
        }
    }
}
