//! The per-edge diffusion tensor and what it encodes.
//!
//! For one edge state the fluxes from D̂ are substituted back into the
//! friction balance; for two species D̂ is compared with ρ₁ρ₂/b12.

use maxwell_stefan::mixture::{assemble_b, assemble_q, assemble_q_inv, edge_point_d_hat};
use maxwell_stefan::FrictionMatrix;

fn print_matrix(name: &str, a: &[f64], m: usize) {
    println!("{name}:");
    for i in 0..m {
        let row: Vec<String> = (0..m).map(|j| format!("{:>12.6}", a[i * m + j])).collect();
        println!("  {}", row.join(" "));
    }
}

fn main() -> maxwell_stefan::Result<()> {
    let b = FrictionMatrix::from_upper(4, &[1.2, 0.8, 3.0, 2.0, 0.5, 1.5])?;
    let rho = [0.4, 0.3, 0.2, 0.1];
    let m = 3;
    print_matrix("B", &assemble_b(&rho, &b)?, m);
    print_matrix("Q", &assemble_q(&rho)?, m);
    print_matrix("Q^-1", &assemble_q_inv(&rho)?, m);
    let d = edge_point_d_hat(&rho, &b)?;
    print_matrix("D", &d, m);

    // Fluxes for given log-density gradients, last species from zero momentum.
    let grad = [0.3, -0.2, 0.5, -0.1];
    let mut flux: Vec<f64> = (0..m).map(|i| -(0..m).map(|j| d[i * m + j] * (grad[j] - grad[m])).sum::<f64>()).collect();
    flux.push(-flux.iter().sum::<f64>());
    let v: Vec<f64> = flux.iter().zip(&rho).map(|(f, r)| f / r).collect();
    let mean: f64 = rho.iter().zip(&grad).map(|(r, g)| r * g).sum();
    for i in 0..4 {
        let drag: f64 = (0..4).map(|j| b.get(i, j) * rho[j] * (v[i] - v[j])).sum();
        println!("species {}: friction balance residual {:.2e}", i + 1, grad[i] - mean + drag);
    }

    let two = FrictionMatrix::from_upper(2, &[2.5])?;
    for a in [0.01, 0.3, 0.5, 0.99] {
        let d = edge_point_d_hat(&[a, 1.0 - a], &two)?[0];
        println!("n = 2, rho1 = {a}: D = {d:.15}, rho1 rho2 / b12 = {:.15}", a * (1.0 - a) / 2.5);
    }
    Ok(())
}
