//! Three species on the unit square with a radial dip in the first species;
//! h = 0.05, Δt = 0.001, 500 steps. Prints the energy and the smallest
//! density of each species every 50 steps.

use maxwell_stefan::initial::InitialCondition;
use maxwell_stefan::{FrictionMatrix, GridSpec, SimulationState, StepConfig};

fn main() -> maxwell_stefan::Result<()> {
    let grid = GridSpec::with_spacing(2, 0.05, 1.0)?;
    let friction = FrictionMatrix::from_upper(3, &[1.0 / 0.833, 1.0 / 0.833, 1.0 / 0.168])?;
    let state = SimulationState::new(grid, friction, InitialCondition::ThreeSpecies2d.sample(&grid, 3)?)?;
    let cfg = StepConfig::new(1e-3)?;

    let min_of = |s: &SimulationState, i: usize| s.rho().component(i).iter().cloned().fold(f64::INFINITY, f64::min);
    let show = |s: &SimulationState| {
        println!(
            "step {:>3}  energy {:.10}  min rho = ({:.5}, {:.3e}, {:.5})",
            s.step_index(),
            s.history().last().unwrap().energy,
            min_of(s, 0),
            min_of(s, 1),
            min_of(s, 2)
        );
    };
    show(&state);
    let end = state.advance_with(&cfg, 500, |s, step| {
        if s.step_index() % 50 == 0 {
            show(s);
        }
        debug_assert!(step.energy_next <= step.energy_prev + 1e-10);
    })?;
    let worst = end.history().iter().map(|e| e.newton_iters).max().unwrap_or(0);
    println!("at most {worst} Newton iterations per step");
    Ok(())
}
