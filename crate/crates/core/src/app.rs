//! Artifact-producing drivers behind the `mstefan` subcommands.
//!
//! Each driver writes into `out`, echoes the effective configuration as
//! `config.cfg` and returns whether its checks passed. Errors are returned
//! only for failures that prevent producing a verdict.

use std::path::Path;

use crate::config::{ReferenceKind, RunConfig};
use crate::diagnostics::convergence::{dividing_dt_sweep, odd_cell_sweep, spatial_convergence, temporal_convergence};
use crate::diagnostics::report::{
    fmt_num, write_convergence, write_history, write_metadata, write_snapshot, write_truncation,
};
use crate::diagnostics::truncation::truncation_errors;
use crate::diagnostics::{
    audit_run, truncation_probe, verify_all, AuditSummary, ConvergenceReport, Manufactured, PropertyOutcome,
    Reference, StudySetup,
};
use crate::error::{Error, Result};
use crate::initial::{InitialCondition, TRACE_LEVEL};
use crate::stepper::SimulationState;

/// Which refinement study `converge` runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sweep {
    Space,
    Time,
}

impl Sweep {
    fn name(self) -> &'static str {
        match self {
            Sweep::Space => "space",
            Sweep::Time => "time",
        }
    }
}

fn prepare(cfg: &RunConfig, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let path = out.join("config.cfg");
    std::fs::write(&path, cfg.to_text()).map_err(|e| Error::io(&path, e))
}

fn say(quiet: bool, line: impl AsRef<str>) {
    if !quiet {
        println!("{}", line.as_ref());
    }
}

fn entry(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

/// Outcome of [`run`]: the audit plus the solver error that stopped the run, if any.
#[derive(Debug)]
pub struct RunOutcome {
    pub audit: AuditSummary,
    pub state: SimulationState,
    pub failure: Option<Error>,
}

impl RunOutcome {
    pub fn passed(&self) -> bool {
        self.failure.is_none() && self.audit.passed()
    }
}

/// Time-steps the configured problem, writing `steps.csv`, field snapshots,
/// `audit.txt` and `metadata.txt`.
pub fn run(cfg: &RunConfig, out: &Path, quiet: bool) -> Result<RunOutcome> {
    prepare(cfg, out)?;
    let grid = cfg.grid()?;
    let step_cfg = cfg.step_config()?;
    let rho0 = cfg.initial.sample(&grid, cfg.species)?;
    let mut state = SimulationState::new(grid, cfg.friction.clone(), rho0)?;
    let snapshot = |s: &SimulationState| -> Result<()> {
        write_snapshot(&out.join(format!("fields_{:06}.csv", s.step_index())), s.rho())
    };
    snapshot(&state)?;

    // Nearest cell to the domain midpoint along every axis; cell c sits at (c + 1) h.
    let h = grid.spacing();
    let mid_axis = ((0.5 * cfg.length / h).round() as usize).clamp(1, cfg.cells) - 1;
    let mid_cell = if cfg.dim == 1 { mid_axis } else { mid_axis + cfg.cells * mid_axis };
    let mut midpoint = vec![(0.0, (0..cfg.species).map(|i| state.rho().get(i, mid_cell)).collect::<Vec<_>>())];

    let mut failure = None;
    for k in 0..cfg.steps {
        match state.step_once(&step_cfg) {
            Ok(_) => {
                midpoint.push((state.time(), (0..cfg.species).map(|i| state.rho().get(i, mid_cell)).collect()));
                let every = cfg.emit_fields_every;
                if (every > 0 && state.step_index() % every == 0) || k + 1 == cfg.steps {
                    snapshot(&state)?;
                }
            }
            Err(e) => {
                say(quiet, format!("solver failure: {e}"));
                snapshot(&state)?;
                failure = Some(e);
                break;
            }
        }
    }
    write_history(&out.join("steps.csv"), state.history())?;

    let mid_path = out.join("midpoint.csv");
    let mut w = csv::Writer::from_path(&mid_path)?;
    let mut header = vec!["time".to_string()];
    header.extend((1..=cfg.species).map(|i| format!("rho{i}")));
    w.write_record(&header)?;
    for (t, v) in &midpoint {
        let mut row = vec![fmt_num(*t)];
        row.extend(v.iter().map(|x| fmt_num(*x)));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(&mid_path, e))?;

    let audit = audit_run(state.history());
    let x_mid = grid.cell_center(mid_cell);
    write_metadata(
        &out.join("metadata.txt"),
        &[
            entry("initial", cfg.initial.name()),
            entry("steps_completed", state.step_index()),
            entry("final_time", fmt_num(state.time())),
            entry(
                "midpoint_cell",
                format!("{mid_cell} (nearest cell center to the domain midpoint, at {:?})", &x_mid[..cfg.dim]),
            ),
            entry("snapshot_every", cfg.emit_fields_every),
            entry("energy_slack", fmt_num(crate::diagnostics::audit::ENERGY_SLACK)),
        ],
    )?;
    write_audit(&out.join("audit.txt"), &audit, failure.as_ref())?;
    say(
        quiet,
        format!(
            "{} steps, min density {:.3e}, max drift {:.3e}/{:.3e}, energy violations {}, certificate violations {}",
            audit.steps,
            audit.min_density,
            audit.max_pointwise_drift,
            audit.max_species_drift,
            audit.monotonicity_violations,
            audit.certificate_violations
        ),
    );
    Ok(RunOutcome { audit, state, failure })
}

fn write_audit(path: &Path, a: &AuditSummary, failure: Option<&Error>) -> Result<()> {
    write_metadata(
        path,
        &[
            entry("passed", a.passed() && failure.is_none()),
            entry("solver_failure", failure.map_or("none".to_string(), |e| e.to_string())),
            entry("steps", a.steps),
            entry("max_pointwise_drift", fmt_num(a.max_pointwise_drift)),
            entry("max_species_drift", fmt_num(a.max_species_drift)),
            entry("min_density", fmt_num(a.min_density)),
            entry("monotonicity_violations", a.monotonicity_violations),
            entry("certificate_violations", a.certificate_violations),
            entry("unweighted_violations", a.unweighted_violations),
            entry("unweighted_violations_small_dt", a.unweighted_violations_small_dt),
            entry("worst_energy_balance", fmt_num(a.worst_energy_balance)),
        ],
    )
}

/// Study setup matching the configuration.
pub fn study_setup(cfg: &RunConfig) -> Result<StudySetup> {
    let reference = match &cfg.convergence.reference {
        ReferenceKind::DomainAverage => Reference::DomainAverage,
        ReferenceKind::Constant(v) => Reference::Constant(v.clone()),
        ReferenceKind::Exact => match cfg.initial {
            InitialCondition::TwoSpeciesCosine { amplitude } => {
                Reference::Exact(Manufactured::heat_mode(amplitude, cfg.friction.get(0, 1))?)
            }
            _ => return Err(Error::config(None, Some("convergence.reference"), "exact reference needs cosine data")),
        },
    };
    Ok(StudySetup {
        dim: cfg.dim,
        length: cfg.length,
        species: cfg.species,
        initial: cfg.initial.clone(),
        friction: cfg.friction.clone(),
        final_time: cfg.convergence.final_time,
        reference,
        solver: cfg.solver,
    })
}

/// Runs the space or time sweep and writes `convergence_<mode>.csv`.
pub fn converge(cfg: &RunConfig, sweep: Sweep, out: &Path, quiet: bool) -> Result<ConvergenceReport> {
    prepare(cfg, out)?;
    let setup = study_setup(cfg)?;
    let c = &cfg.convergence;
    let report = match sweep {
        Sweep::Space => {
            let h = odd_cell_sweep(c.space_h_min, c.space_h_max, c.space_count, cfg.length);
            spatial_convergence(&setup, c.space_dt, &h)?
        }
        Sweep::Time => {
            let dts = dividing_dt_sweep(c.time_dt_min, c.time_dt_max, c.time_count, c.final_time);
            temporal_convergence(&setup, c.time_h, &dts)?
        }
    };
    write_convergence(&out.join(format!("convergence_{}.csv", sweep.name())), &report)?;

    let fit = |f: &Option<crate::diagnostics::SlopeFit>| match f {
        Some(f) => match f.interval {
            Some((lo, hi)) => format!("{:.4} (95% interval {lo:.4} to {hi:.4}, {} points)", f.slope, f.points),
            None => format!("{:.4} ({} points, no interval)", f.slope, f.points),
        },
        None => "omitted (single value)".to_string(),
    };
    let mut meta = vec![
        entry("mode", sweep.name()),
        entry("parameter", &report.parameter),
        entry("aggregation", "maximum over species of each norm"),
        entry("l2_weight", "cell volume h^d"),
        entry("final_time", fmt_num(c.final_time)),
        entry("slope_linf", fit(&report.fit_linf)),
        entry("slope_l2", fit(&report.fit_l2)),
    ];
    if let (Reference::DomainAverage, InitialCondition::ThreeSpecies1d) = (&setup.reference, &cfg.initial) {
        let g = cfg.grid()?;
        let avg = cfg.initial.domain_average(&g, cfg.species)?;
        let expected = [0.7, TRACE_LEVEL, 1.0 - 0.7 - TRACE_LEVEL];
        let gap = avg.iter().zip(expected).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        meta.push(entry("reference", format!("domain average {avg:?}")));
        meta.push(entry("reference_check", format!("max deviation from (0.7, 1e-4, 0.2999): {gap:.3e}")));
    }
    write_metadata(&out.join(format!("convergence_{}_metadata.txt", sweep.name())), &meta)?;
    for k in 0..report.params.len() {
        say(
            quiet,
            format!(
                "{} = {:.6e}  err_linf = {:.6e}  err_l2 = {:.6e}",
                report.parameter, report.params[k], report.err_linf[k], report.err_l2[k]
            ),
        );
    }
    say(quiet, format!("slope (L-infinity): {}", fit(&report.fit_linf)));
    Ok(report)
}

/// Runs the property suite, writing `verify.csv`.
pub fn verify(cfg: &RunConfig, seed: u64, out: &Path, quiet: bool) -> Result<Vec<PropertyOutcome>> {
    prepare(cfg, out)?;
    let outcomes: Vec<PropertyOutcome> = verify_all(seed)
        .into_iter()
        .map(|(name, r)| {
            r.unwrap_or_else(|e| PropertyOutcome {
                name,
                passed: false,
                detail: format!("error: {e}"),
            })
        })
        .collect();
    let path = out.join("verify.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["property", "passed", "detail", "seed"])?;
    for o in &outcomes {
        w.write_record([o.name, if o.passed { "true" } else { "false" }, &o.detail, &seed.to_string()])?;
        say(quiet, format!("{} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail));
    }
    w.flush().map_err(|e| Error::io(&path, e))?;
    Ok(outcomes)
}

/// Richardson ratios used to judge the truncation probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationVerdict {
    pub tau1_ratio: f64,
    pub tau2_ratio: f64,
}

impl TruncationVerdict {
    pub fn passed(&self) -> bool {
        (1.7..=2.3).contains(&self.tau1_ratio) && (3.5..=4.5).contains(&self.tau2_ratio)
    }
}

/// Tabulates the truncation errors on the configured grid of `(h, Δt)` and
/// the two Richardson ratios; writes `truncation.csv`.
pub fn truncation(cfg: &RunConfig, out: &Path, quiet: bool) -> Result<TruncationVerdict> {
    prepare(cfg, out)?;
    let t = &cfg.truncation;
    let m = Manufactured::heat_mode(t.amplitude, t.b12)?;
    let report = truncation_probe(&m, &t.h_values, &t.dt_values, t.t0)?;
    write_truncation(&out.join("truncation.csv"), &report)?;
    // Δt-halving at negligible h, h-halving at negligible Δt.
    let tau1_ratio = truncation_errors(&m, 1e-3, 0.01, t.t0)?.tau1 / truncation_errors(&m, 1e-3, 0.005, t.t0)?.tau1;
    let tau2_ratio = truncation_errors(&m, 0.1, 1e-6, t.t0)?.tau2 / truncation_errors(&m, 0.05, 1e-6, t.t0)?.tau2;
    let verdict = TruncationVerdict { tau1_ratio, tau2_ratio };
    write_metadata(
        &out.join("truncation_metadata.txt"),
        &[
            entry("t0", fmt_num(t.t0)),
            entry("fit_constant", fmt_num(report.fit_constant)),
            entry("max_ratio", fmt_num(report.max_ratio)),
            entry("tau1_ratio_dt_halving", fmt_num(tau1_ratio)),
            entry("tau2_ratio_h_halving", fmt_num(tau2_ratio)),
            entry("passed", verdict.passed()),
        ],
    )?;
    for r in &report.rows {
        say(
            quiet,
            format!("h = {:.4e} dt = {:.4e}  tau1 {:.3e} tau2 {:.3e} tau3 {:.3e}", r.h, r.dt, r.tau1, r.tau2, r.tau3),
        );
    }
    say(quiet, format!("fit C = {:.4e}; tau1 ratio {tau1_ratio:.3}, tau2 ratio {tau2_ratio:.3}", report.fit_constant));
    Ok(verdict)
}
