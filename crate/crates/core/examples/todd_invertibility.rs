//! The Todd operator and its inverse `(1 - e^{-ad z}) / ad z` undo each other.
//!
//! Run with `cargo run --example todd_invertibility`.

use cbhd::liealg::{lie_norm, random_matrix, todd_apply, todd_inverse_residual, MatrixAlgebra};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> cbhd::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let backend = MatrixAlgebra::new(3);
    let probes: Vec<_> = (0..4).map(|_| random_matrix(&mut rng, 3, 1.0)).collect();
    for norm in [0.5, 2.0, 4.0, 6.0] {
        let z = random_matrix(&mut rng, 3, norm);
        let n = 60 + (norm * 40.0) as usize;
        let residual = todd_inverse_residual(&backend, &z, &probes, n)?;
        let image = todd_apply(&backend, &z, &probes[0], 400, 1e-17)?;
        println!(
            "||z||* = {norm}: inverse residual {residual:.2e}, Todd image norm {:.4} ({} terms)",
            lie_norm(&image.value),
            image.terms_used
        );
    }
    Ok(())
}
