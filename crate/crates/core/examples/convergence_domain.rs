//! The enlarged convergence domain and its boundary curve.
//!
//! Run with `cargo run --example convergence_domain`.

use cbhd::domain::{
    g_closed, gamma_bound, gamma_boundary_table, in_delta, in_gamma, lifetime_bounds, DomainQuery,
};

fn main() -> cbhd::Result<()> {
    println!("G(0) = {}, G(3) = {:.6}", g_closed(0.0)?, g_closed(3.0)?);

    let q = gamma_bound(0.0)?;
    println!(
        "largest ||b|| at a = 0: {:.16} (error {:.1e}, {} evaluations)",
        q.value, q.error, q.evaluations
    );

    println!("norm_a   max_norm_b");
    for (a, b) in gamma_boundary_table(8)? {
        println!("{a:7.4}  {b:.10}");
    }

    for (a, b) in [(0.3, 0.3), (0.1, 1.0), (1.0, 1.0), (0.5, 2.5)] {
        let query = DomainQuery::new(a, b)?;
        let lb = lifetime_bounds(&query)?;
        println!(
            "(||a||, ||b||) = ({a}, {b}): in log-2 ball {}, in enlarged domain {}, lifetime bound {:.4}",
            in_delta(&query),
            in_gamma(&query),
            lb.beta_tilde
        );
    }
    Ok(())
}
