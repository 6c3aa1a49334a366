//! Local truncation errors of the exact two-species heat mode inserted into
//! the discrete equations, over a grid of (h, Δt).

use maxwell_stefan::diagnostics::truncation::truncation_errors;
use maxwell_stefan::diagnostics::{truncation_probe, Manufactured};

fn main() -> maxwell_stefan::Result<()> {
    let m = Manufactured::heat_mode(0.1, 2.0)?;
    let rep = truncation_probe(&m, &[0.1, 0.05, 0.025, 0.0125], &[0.01, 0.005, 0.0025, 0.00125], 0.0)?;
    println!("{:>8} {:>9} {:>11} {:>11} {:>11} {:>9}", "h", "dt", "tau1", "tau2", "tau3", "ratio");
    for r in &rep.rows {
        println!(
            "{:>8.4} {:>9.5} {:>11.3e} {:>11.3e} {:>11.3e} {:>9.3}",
            r.h, r.dt, r.tau1, r.tau2, r.tau3, r.max() / (r.dt + r.h * r.h)
        );
    }
    println!("least-squares C = {:.4}, largest ratio {:.4}", rep.fit_constant, rep.max_ratio);

    // Richardson checks with the other parameter made negligible.
    let t1 = |dt| truncation_errors(&m, 1e-3, dt, 0.0).map(|r| r.tau1);
    let t2 = |h| truncation_errors(&m, h, 1e-6, 0.0).map(|r| r.tau2);
    println!("tau1 ratio on halving dt: {:.4}", t1(0.01)? / t1(0.005)?);
    println!("tau2 ratio on halving h:  {:.4}", t2(0.1)? / t2(0.05)?);
    Ok(())
}
