//! Temporal refinement at h = 0.01, measured two ways.
//!
//! Against the equilibrium the error mixes a stiff transient (fast at large
//! Δt) with the slow transient still present at t = 1/2 (a floor at small
//! Δt), so local slopes drift from above 3 to below 1/4. Against a Δt = 1e-4
//! solution on the same grid only the time error remains. The two-species
//! heat mode, where the reference is exact, is shown last.

use maxwell_stefan::diagnostics::convergence::dividing_dt_sweep;
use maxwell_stefan::diagnostics::{error_norms, fit_slope, temporal_convergence, Reference, StudySetup};
use maxwell_stefan::initial::InitialCondition;
use maxwell_stefan::{FrictionMatrix, GridSpec, StepConfig};

fn local_slopes(p: &[f64], e: &[f64]) -> Vec<String> {
    p.windows(2)
        .zip(e.windows(2))
        .map(|(p, e)| format!("{:.2}", (e[0] / e[1]).ln() / (p[0] / p[1]).ln()))
        .collect()
}

fn main() -> maxwell_stefan::Result<()> {
    let setup = StudySetup {
        dim: 1,
        length: 1.0,
        species: 3,
        initial: InitialCondition::ThreeSpecies1d,
        friction: FrictionMatrix::from_upper(3, &[1.0 / 0.833, 1.0 / 0.833, 1.0 / 0.168])?,
        final_time: 0.5,
        reference: Reference::DomainAverage,
        solver: StepConfig::new(0.01)?,
    };
    let dts = dividing_dt_sweep(0.001, 0.1, 8, 0.5);
    let rep = temporal_convergence(&setup, 0.01, &dts)?;

    let grid = GridSpec::new(1, 100, 1.0)?;
    let fine = setup.solve(&grid, 1e-4)?;
    let mut vs_fine = Vec::new();
    for &dt in &dts {
        vs_fine.push(error_norms(&setup.solve(&grid, dt)?, &fine)?.0);
    }

    println!("{:>10} {:>14} {:>14}", "dt", "vs equilibrium", "vs fine step");
    for k in 0..dts.len() {
        println!("{:>10.6} {:>14.4e} {:>14.4e}", dts[k], rep.err_linf[k], vs_fine[k]);
    }
    println!("local slopes vs equilibrium: {}", local_slopes(&dts, &rep.err_linf).join(" "));
    println!("local slopes vs fine step:   {}", local_slopes(&dts, &vs_fine).join(" "));
    println!("fitted slope vs equilibrium {:.4}", rep.slope().unwrap_or(f64::NAN));
    if let Some(f) = fit_slope(&dts, &vs_fine)? {
        println!("fitted slope vs fine step   {:.4}", f.slope);
    }

    let heat = StudySetup::heat_mode(0.1, 2.0, 0.1)?;
    let r = temporal_convergence(&heat, 0.002, &[0.01, 0.005, 0.0025, 0.00125])?;
    println!("two-species heat mode: slope {:.4}, local {}", r.slope().unwrap(), local_slopes(&r.params, &r.err_linf).join(" "));
    Ok(())
}
