//! A vector ODE majorized by a scalar one, with lifetimes compared.
//!
//! Run with `cargo run --example comparison_theorem`.

use cbhd::liealg::random_matrix;
use cbhd::odecmp::{check_majorization_with, linear_matrix_problem, ComparisonOptions};
use cbhd::series::cbhd_problem;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> cbhd::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let a = random_matrix(&mut rng, 3, 1.5);
    let c = random_matrix(&mut rng, 3, 0.5);
    let x = random_matrix(&mut rng, 3, 1.0);
    let (vp, sm) = linear_matrix_problem(a, c, x);
    let report = check_majorization_with(&vp, &sm, 2.0, &ComparisonOptions::new(1e-8))?;
    println!("linear problem: passed {}, max excess {:.2e}", report.passed, report.max_excess);
    for row in report.rows.iter().step_by(report.rows.len().div_ceil(6).max(1)) {
        println!("  t = {:.3}: ||phi|| = {:.6}, psi = {:.6}", row.t, row.norm_phi, row.psi);
    }

    // the CBHD flow from a towards log(e^a e^b), majorized by z' = ||b|| G(z)
    let a = DMatrix::from_row_slice(2, 2, &[0.05, 0.0, 0.0, -0.05]);
    let b = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.0, 0.0]);
    let (vp, sm) = cbhd_problem(&a, &b)?;
    let opts = ComparisonOptions::new(1e-8).with_lifetime_slack(1e-3);
    let report = check_majorization_with(&vp, &sm, 1.0, &opts)?;
    println!(
        "cbhd problem: passed {}, vector exit {:.4}, scalar exit {:.4}",
        report.passed,
        report.vector_exit(),
        report.scalar_exit()
    );
    Ok(())
}
