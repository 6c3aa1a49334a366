//! With two species the scheme is an implicit heat equation with
//! diffusivity 1/b12, so ρ₁ = ½ + A e^{−4π²t/b12} cos 2πx is exact. Refining
//! with Δt = h² the ratio error/(Δt + h²) should settle to a constant.

use maxwell_stefan::diagnostics::StudySetup;

fn main() -> maxwell_stefan::Result<()> {
    let b12 = 2.0;
    let setup = StudySetup::heat_mode(0.1, b12, 0.1)?;
    let levels: Vec<(usize, f64)> = [10, 20, 40, 80, 160].iter().map(|&n: &usize| (n, (n as f64).powi(-2))).collect();
    let errs = setup.errors(&levels)?;
    println!("{:>5} {:>12} {:>12} {:>12} {:>10}", "N", "dt", "L-inf", "L2", "C");
    for (&(n, dt), &(linf, l2)) in levels.iter().zip(&errs) {
        println!("{n:>5} {dt:>12.4e} {linf:>12.4e} {l2:>12.4e} {:>10.5}", linf / (2.0 * dt));
    }
    Ok(())
}
