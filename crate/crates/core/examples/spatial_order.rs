//! Spatial refinement of the three-species 1D problem at t = 1/2 against
//! its equilibrium, the domain average of the initial data.

#![allow(clippy::needless_range_loop)]

use maxwell_stefan::diagnostics::convergence::odd_cell_sweep;
use maxwell_stefan::diagnostics::{spatial_convergence, Reference, StudySetup};
use maxwell_stefan::initial::InitialCondition;
use maxwell_stefan::{FrictionMatrix, StepConfig};

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
    // odd cell counts keep cell centers off the kinks of the initial data
    let h = odd_cell_sweep(0.01, 0.2, 8, 1.0);
    let rep = spatial_convergence(&setup, 0.01, &h)?;
    println!("{:>8} {:>5} {:>12} {:>12}", "h", "N", "L-inf", "L2");
    for k in 0..h.len() {
        println!("{:>8.5} {:>5} {:>12.4e} {:>12.4e}", h[k], (1.0 / h[k]).round(), rep.err_linf[k], rep.err_l2[k]);
    }
    for (name, fit) in [("L-inf", &rep.fit_linf), ("L2", &rep.fit_l2)] {
        if let Some(f) = fit {
            let (lo, hi) = f.interval.unwrap_or((f64::NAN, f64::NAN));
            println!("{name} slope {:.4}  (95% interval {lo:.4} to {hi:.4})", f.slope);
        }
    }
    Ok(())
}
