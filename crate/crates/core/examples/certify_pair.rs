//! Convergence certificate for a pair of matrices outside the log-2 ball.
//!
//! Run with `cargo run --example certify_pair`.

use cbhd::liealg::{lie_norm, MatrixAlgebra};
use cbhd::series::certify;
use nalgebra::DMatrix;

fn main() -> cbhd::Result<()> {
    let a = DMatrix::from_row_slice(2, 2, &[0.05, 0.0, 0.0, -0.05]);
    let b = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.0, 0.0]);
    println!("||a||* = {:.3}, ||b||* = {:.3}", lie_norm(&a), lie_norm(&b));

    let cert = certify(&MatrixAlgebra::new(2), &a, &b, 16, 16, 60)?;
    println!("{}", cert.to_json());
    if let Some(d) = cert.psi_disagreement() {
        println!("series vs integrated majorant value: {d:.2e}");
    }
    Ok(())
}
