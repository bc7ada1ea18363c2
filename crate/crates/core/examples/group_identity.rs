//! Summing the Taylor coefficients of the CBHD flow reproduces `log(e^a e^b)`.
//!
//! Run with `cargo run --example group_identity`.

use cbhd::liealg::{lie_norm, random_matrix};
use cbhd::series::group_residual;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> cbhd::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (na, nb) in [(0.3, 0.3), (0.2, 0.9), (1.0, 0.5)] {
        let a = random_matrix(&mut rng, 3, na);
        let b = random_matrix(&mut rng, 3, nb);
        print!("||a||* = {:.2}, ||b||* = {:.2}:", lie_norm(&a), lie_norm(&b));
        for order in [5, 10, 20, 30] {
            print!(" N={order} {:.1e}", group_residual(&a, &b, order)?);
        }
        println!();
    }
    Ok(())
}
