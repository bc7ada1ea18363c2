//! Exact Bernoulli-type coefficients and their invariants.
//!
//! Run with `cargo run --example coefficients`.

use cbhd::coeffs::{check_invariants, coeff_table, kn, zeta_crosscheck, CoeffKind};

fn main() {
    let table = coeff_table(CoeffKind::K, 12);
    println!("K_n for n = 0..=12:");
    for (n, k) in table.values.iter().enumerate() {
        println!("  K_{n:<2} = {k}");
    }

    // n! K_n is the Bernoulli number B_n
    println!("K_30 = {}", kn(30));

    for check in check_invariants(40) {
        let tag = if check.passed { "ok  " } else { "FAIL" };
        println!("{tag} {}: {}", check.name, check.detail);
    }

    for k in 1..=3 {
        println!("zeta residual k={k}: {:.3e}", zeta_crosscheck(k, 10_000));
    }
}
