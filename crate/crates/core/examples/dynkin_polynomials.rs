//! Dynkin polynomials in the free algebra, checked against `log(e^x e^y)`.
//!
//! Run with `cargo run --example dynkin_polynomials`.

use cbhd::freelie::{bch_homogeneous, dynkin_z, log_expexp_oracle, recursive_z_free, Bidegree};

fn main() {
    for (i, j) in [(1, 1), (2, 1), (1, 2), (2, 2)] {
        let d = Bidegree::new(i, j);
        let z = recursive_z_free(d);
        let closed = dynkin_z(d);
        println!("Z_{{{i},{j}}} ({} terms, matches closed form: {}):", z.len(), z == closed);
        for line in z.to_string().lines() {
            println!("  {line}");
        }
    }

    let oracle = log_expexp_oracle(5);
    for (n, part) in oracle.iter().enumerate().skip(1) {
        let same = &bch_homogeneous(n) == part;
        println!("degree {n}: recursion equals log(e^x e^y) part: {same}");
    }
}
