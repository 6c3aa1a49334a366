use crate::stepper::HistoryEntry;

/// Slack allowed in the energy inequalities.
pub const ENERGY_SLACK: f64 = 1e-10;
/// Largest mass drift accepted by [`AuditSummary::passed`].
pub const MASS_DRIFT_LIMIT: f64 = 1e-10;

/// Conservation, positivity and energy summary of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditSummary {
    pub steps: usize,
    pub max_pointwise_drift: f64,
    pub max_species_drift: f64,
    pub min_density: f64,
    /// Steps with `F(ρᵏ) > F(ρᵏ⁻¹) + slack`.
    pub monotonicity_violations: usize,
    /// Steps with `F(ρᵏ) + ‖Δρ̃‖²/(2Δt) > F(ρᵏ⁻¹) + slack`.
    pub certificate_violations: usize,
    /// Steps with `F(ρᵏ) + ‖Δρ̃‖² > F(ρᵏ⁻¹) + slack`, reported only.
    pub unweighted_violations: usize,
    /// Steps among the unweighted violations whose `Δt ≤ ½`.
    pub unweighted_violations_small_dt: usize,
    /// Largest `F(ρᵏ) + ‖Δρ̃‖²/(2Δt) − F(ρᵏ⁻¹)` over the run.
    pub worst_energy_balance: f64,
}

impl AuditSummary {
    pub fn passed(&self) -> bool {
        self.max_pointwise_drift <= MASS_DRIFT_LIMIT
            && self.max_species_drift <= MASS_DRIFT_LIMIT
            && self.min_density > 0.0
            && self.monotonicity_violations == 0
            && self.certificate_violations == 0
            && self.unweighted_violations_small_dt == 0
    }
}

/// Summarizes a history. Pure: the same history always yields the same summary.
pub fn audit_run(history: &[HistoryEntry]) -> AuditSummary {
    let mut s = AuditSummary {
        steps: history.len().saturating_sub(1),
        max_pointwise_drift: 0.0,
        max_species_drift: 0.0,
        min_density: f64::INFINITY,
        monotonicity_violations: 0,
        certificate_violations: 0,
        unweighted_violations: 0,
        unweighted_violations_small_dt: 0,
        worst_energy_balance: f64::NEG_INFINITY,
    };
    for e in history {
        s.max_pointwise_drift = s.max_pointwise_drift.max(e.mass_drift_pointwise);
        s.max_species_drift = s.max_species_drift.max(e.mass_drift_species);
        s.min_density = s.min_density.min(e.min_density);
    }
    for w in history.windows(2) {
        let (prev, cur) = (&w[0], &w[1]);
        if cur.energy > prev.energy + ENERGY_SLACK {
            s.monotonicity_violations += 1;
        }
        let balance = cur.energy + cur.dual_increment_sq / (2.0 * cur.dt) - prev.energy;
        s.worst_energy_balance = s.worst_energy_balance.max(balance);
        if balance > ENERGY_SLACK {
            s.certificate_violations += 1;
        }
        if cur.energy + cur.dual_increment_sq > prev.energy + ENERGY_SLACK {
            s.unweighted_violations += 1;
            if cur.dt <= 0.5 {
                s.unweighted_violations_small_dt += 1;
            }
        }
    }
    if history.len() < 2 {
        s.worst_energy_balance = 0.0;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(step: usize, energy: f64, min: f64) -> HistoryEntry {
        HistoryEntry {
            step,
            time: step as f64 * 0.1,
            dt: if step == 0 { 0.0 } else { 0.1 },
            energy,
            min_density: min,
            species_mass: vec![0.5, 0.5],
            mass_drift_pointwise: 0.0,
            mass_drift_species: 0.0,
            dual_increment_sq: if step == 0 { 0.0 } else { 1e-3 },
            newton_iters: 1,
            residual_norm: 0.0,
        }
    }

    #[test]
    fn zero_step_run() {
        let s = audit_run(&[entry(0, -0.6, 0.2)]);
        assert_eq!(s.steps, 0);
        assert_eq!(s.max_pointwise_drift, 0.0);
        assert_eq!(s.max_species_drift, 0.0);
        assert!(s.passed());
    }

    #[test]
    fn detects_negative_density_and_energy_increase() {
        let mut h = vec![entry(0, -0.6, 0.2), entry(1, -0.7, 0.2), entry(2, -0.65, 0.2)];
        let clean = audit_run(&h[..2]);
        assert!(clean.passed());
        assert_eq!(audit_run(&h).monotonicity_violations, 1);
        h[1].min_density = -1e-3;
        let s = audit_run(&h);
        assert!(s.min_density < 0.0);
        assert!(!s.passed());
        assert_eq!(audit_run(&h), s);
    }

    #[test]
    fn certificate_uses_the_step_weight() {
        // Energy drops by 0.004 while the weighted increment is 0.005.
        let mut h = vec![entry(0, -0.600, 0.2), entry(1, -0.604, 0.2)];
        assert_eq!(audit_run(&h).certificate_violations, 1);
        h[1].energy = -0.606;
        assert_eq!(audit_run(&h).certificate_violations, 0);
    }
}
