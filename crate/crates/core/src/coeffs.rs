//! Exact Bernoulli-type coefficient families.
//!
//! The normalized coefficients `K_n = B_n / n!` are generated from
//!
//! ```text
//! K_0 = 1,    K_n = -Σ_{i=0}^{n-1} K_i / (n + 1 - i)!   (n ≥ 1)
//! ```
//!
//! and are the Maclaurin coefficients of `z / (e^z - 1)`. The related families are
//! `T_n = (-1)^n K_n` (Todd function `w / (1 - e^{-w})`), `α_n = -K_n`
//! (`w / (1 - e^w)`) and `|K_n|` (the majorant `G`).
//!
//! All arithmetic is exact. The table of `K_n` is memoized process-wide and only
//! ever extended.

use std::fmt;
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact arbitrary-precision fraction, always in lowest terms with positive denominator.
pub type Rational = BigRational;

/// Above this index `kn_f64` uses `|K_{2k}| = 2ζ(2k)/(2π)^{2k}` instead of converting
/// the exact rational.
const EXACT_F64_LIMIT: usize = 60;

struct KnCache {
    factorials: Vec<BigInt>,
    k: Vec<Rational>,
}

impl KnCache {
    fn new() -> Self {
        KnCache {
            factorials: vec![BigInt::one()],
            k: vec![Rational::one()],
        }
    }

    fn factorial(&mut self, n: usize) -> &BigInt {
        while self.factorials.len() <= n {
            let m = self.factorials.len();
            let next = &self.factorials[m - 1] * BigInt::from(m);
            self.factorials.push(next);
        }
        &self.factorials[n]
    }

    fn extend_to(&mut self, n_max: usize) {
        while self.k.len() <= n_max {
            let n = self.k.len();
            self.factorial(n + 1);
            let mut acc = Rational::zero();
            for i in 0..n {
                let fact = Rational::from_integer(self.factorials[n + 1 - i].clone());
                acc += &self.k[i] / fact;
            }
            self.k.push(-acc);
        }
    }
}

fn cache() -> &'static Mutex<KnCache> {
    static CACHE: OnceLock<Mutex<KnCache>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(KnCache::new()))
}

/// `K_0..=K_{n_max}`, extending the shared table if needed.
pub fn kn_prefix(n_max: usize) -> Vec<Rational> {
    let mut guard = cache().lock().expect("coefficient cache poisoned");
    guard.extend_to(n_max);
    guard.k[..=n_max].to_vec()
}

/// Exact value of `K_n = B_n / n!`.
pub fn kn(n: usize) -> Rational {
    let mut guard = cache().lock().expect("coefficient cache poisoned");
    guard.extend_to(n);
    guard.k[n].clone()
}

/// Exact `n!`.
pub fn factorial(n: usize) -> BigInt {
    let mut guard = cache().lock().expect("coefficient cache poisoned");
    guard.factorial(n).clone()
}

/// Coefficient family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoeffKind {
    /// `K_n = B_n / n!`
    K,
    /// `T_n = (-1)^n K_n`
    T,
    /// `α_n = -K_n`
    Alpha,
    /// `|K_n|`
    GAbs,
}

impl CoeffKind {
    fn map(self, n: usize, k: &Rational) -> Rational {
        match self {
            CoeffKind::K => k.clone(),
            CoeffKind::T if n % 2 == 1 => -k,
            CoeffKind::T => k.clone(),
            CoeffKind::Alpha => -k,
            CoeffKind::GAbs => k.abs(),
        }
    }
}

impl fmt::Display for CoeffKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CoeffKind::K => "K",
            CoeffKind::T => "T",
            CoeffKind::Alpha => "ALPHA",
            CoeffKind::GAbs => "G_ABS",
        };
        f.write_str(s)
    }
}

impl FromStr for CoeffKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "K" => Ok(CoeffKind::K),
            "T" => Ok(CoeffKind::T),
            "ALPHA" => Ok(CoeffKind::Alpha),
            "G_ABS" | "GABS" => Ok(CoeffKind::GAbs),
            other => Err(format!(
                "unknown coefficient kind '{other}' (expected K, T, ALPHA or G_ABS)"
            )),
        }
    }
}

/// A coefficient family indexed from 0.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTable {
    pub kind: CoeffKind,
    pub values: Vec<Rational>,
}

impl CoeffTable {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(rational_to_f64).collect()
    }
}

/// Table of length `n_max + 1` for the requested family.
pub fn coeff_table(kind: CoeffKind, n_max: usize) -> CoeffTable {
    let values = kn_prefix(n_max)
        .iter()
        .enumerate()
        .map(|(n, k)| kind.map(n, k))
        .collect();
    CoeffTable { kind, values }
}

/// Bernoulli numbers (with `B_1 = -1/2`) from `Σ_{k=0}^{n} C(n+1,k) B_k = 0`.
///
/// Shares nothing with the `K_n` recursion; it exists to cross-check it.
pub fn bernoulli_oracle(n: usize) -> Rational {
    let mut b: Vec<Rational> = Vec::with_capacity(n + 1);
    b.push(Rational::one());
    for m in 1..=n {
        // binomial(m + 1, k) built incrementally
        let mut binom = BigInt::one();
        let mut acc = Rational::zero();
        for (k, bk) in b.iter().enumerate() {
            acc += bk * Rational::from_integer(binom.clone());
            binom = binom * BigInt::from(m + 1 - k) / BigInt::from(k + 1);
        }
        b.push(-acc / Rational::from_integer(BigInt::from(m + 1)));
    }
    b.pop().expect("non-empty")
}

/// Converts an exact fraction to the nearest-ish `f64` (underflows to 0).
pub fn rational_to_f64(q: &Rational) -> f64 {
    if let Some(x) = q.to_f64() {
        if x.is_finite() {
            return x;
        }
    }
    // Fallback: scale numerator and denominator into range.
    let num = q.numer();
    let den = q.denom();
    let shift = num.bits() as i64 - den.bits() as i64;
    let scaled = if shift >= 0 {
        Rational::new(num.clone(), den.clone() << (shift as usize))
    } else {
        Rational::new(num.clone() << ((-shift) as usize), den.clone())
    };
    scaled.to_f64().unwrap_or(0.0) * 2f64.powi(shift.clamp(-2000, 2000) as i32)
}

/// `K_n` in binary64.
///
/// Exact conversion up to index 60; beyond that the even terms use
/// `K_{2k} = (-1)^{k+1} 2ζ(2k) / (2π)^{2k}` with a short ζ sum (accurate to
/// machine precision there) so the table never needs huge rationals.
pub fn kn_f64(n: usize) -> f64 {
    if n <= EXACT_F64_LIMIT {
        return rational_to_f64(&kn(n));
    }
    if n % 2 == 1 {
        return 0.0;
    }
    let sign = if (n / 2) % 2 == 1 { 1.0 } else { -1.0 };
    sign * 2.0 * zeta_tail_sum(n) * (2.0 * std::f64::consts::PI).powi(-(n as i32))
}

/// `K_0..=K_{n_max}` in binary64, served from a shared table.
pub fn kn_f64_table(n_max: usize) -> Vec<f64> {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    const LEN: usize = 1024;
    let table = TABLE.get_or_init(|| (0..LEN).map(kn_f64).collect());
    if n_max < LEN {
        table[..=n_max].to_vec()
    } else {
        let mut v = table.clone();
        v.extend((LEN..=n_max).map(kn_f64));
        v
    }
}

/// `|K_n|` in binary64.
pub fn abs_kn_f64(n: usize) -> f64 {
    kn_f64(n).abs()
}

/// `|K_n| (2π)^n` in binary64: equals `2ζ(n)` for even `n ≥ 2`, never over/underflows.
pub(crate) fn scaled_abs_kn(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => std::f64::consts::PI,
        _ if n % 2 == 1 => 0.0,
        _ if n <= EXACT_F64_LIMIT => abs_kn_f64(n) * (2.0 * std::f64::consts::PI).powi(n as i32),
        _ => 2.0 * zeta_tail_sum(n),
    }
}

// ζ(s) for large s: a handful of terms reach machine precision.
fn zeta_tail_sum(s: usize) -> f64 {
    (1..=8).rev().map(|k| (k as f64).powi(-(s as i32))).sum()
}

/// `|T_{2k} - 2(-1)^{k+1} ζ_N(2k) / (2π)^{2k}|` where `ζ_N` is the plain partial sum
/// of the first `n_terms` terms.
pub fn zeta_crosscheck(k: usize, n_terms: usize) -> f64 {
    assert!(k >= 1, "zeta_crosscheck needs k >= 1");
    assert!(n_terms >= 1, "zeta_crosscheck needs at least one term");
    let s = 2 * k;
    let t2k = rational_to_f64(&kn(s));
    // smallest terms first
    let partial: f64 = (1..=n_terms)
        .rev()
        .map(|n| (n as f64).powi(-(s as i32)))
        .sum();
    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
    let approx = sign * 2.0 * partial / (2.0 * std::f64::consts::PI).powi(s as i32);
    (t2k - approx).abs()
}

/// Outcome of one named invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// The exact invariants of the coefficient families for indices up to `n_max`.
///
/// Every check recomputes its side independently of the memoized recursion
/// order where it can: the convolution identity uses fresh factorials, the
/// Bernoulli comparison the binomial recurrence.
pub fn check_invariants(n_max: usize) -> Vec<InvariantCheck> {
    let k = kn_prefix(n_max);
    let mut checks = Vec::new();
    let mut record = |name: &'static str, failures: Vec<usize>| {
        let detail = if failures.is_empty() {
            format!("n <= {n_max}")
        } else {
            format!("fails at n = {failures:?}")
        };
        checks.push(InvariantCheck {
            name,
            passed: failures.is_empty(),
            detail,
        });
    };

    let mut fact = vec![BigInt::one()];
    for m in 1..=n_max + 1 {
        let next = &fact[m - 1] * BigInt::from(m);
        fact.push(next);
    }
    record(
        "convolution identity",
        (1..=n_max)
            .filter(|&n| {
                let sum: Rational = (0..=n)
                    .map(|i| &k[i] / Rational::from_integer(fact[n + 1 - i].clone()))
                    .sum();
                !sum.is_zero()
            })
            .collect(),
    );
    record(
        "K_n n! equals B_n",
        (0..=n_max)
            .filter(|&n| &k[n] * Rational::from_integer(fact[n].clone()) != bernoulli_oracle(n))
            .collect(),
    );
    record(
        "odd coefficients vanish",
        (3..=n_max).step_by(2).filter(|&n| !k[n].is_zero()).collect(),
    );
    let g = coeff_table(CoeffKind::GAbs, n_max);
    record(
        "G_ABS equals |K|",
        (0..=n_max)
            .filter(|&n| g.values[n].is_negative() || g.values[n] != k[n].abs())
            .collect(),
    );
    record(
        "even coefficients alternate",
        (1..=n_max / 2)
            .filter(|&m| {
                let positive = k[2 * m].is_positive();
                positive != (m % 2 == 1)
            })
            .map(|m| 2 * m)
            .collect(),
    );
    checks
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn kn_examples() {
        assert_eq!(kn(0), q(1, 1));
        assert_eq!(kn(1), q(-1, 2));
        assert_eq!(kn(2), q(1, 12));
        assert_eq!(kn(3), q(0, 1));
        assert_eq!(kn(4), q(-1, 720));
    }

    #[test]
    fn table_examples() {
        assert_eq!(coeff_table(CoeffKind::T, 1).values, vec![q(1, 1), q(1, 2)]);
        assert_eq!(coeff_table(CoeffKind::Alpha, 0).values, vec![q(-1, 1)]);
        assert_eq!(
            coeff_table(CoeffKind::GAbs, 2).values,
            vec![q(1, 1), q(1, 2), q(1, 12)]
        );
    }

    #[test]
    fn table_invariants() {
        let n = 30;
        let k = coeff_table(CoeffKind::K, n).values;
        let t = coeff_table(CoeffKind::T, n).values;
        let a = coeff_table(CoeffKind::Alpha, n).values;
        let g = coeff_table(CoeffKind::GAbs, n).values;
        assert!(k[0].is_one());
        for i in 0..=n {
            let sign = if i % 2 == 0 { k[i].clone() } else { -k[i].clone() };
            assert_eq!(t[i], sign);
            assert_eq!(a[i], -k[i].clone());
            assert_eq!(g[i], k[i].abs());
            assert!(!g[i].is_negative());
        }
        for m in 1..=14 {
            assert!(k[2 * m + 1].is_zero(), "K_{} should vanish", 2 * m + 1);
        }
    }

    #[test]
    fn extending_the_table_keeps_the_prefix() {
        let short = coeff_table(CoeffKind::K, 10);
        let long = coeff_table(CoeffKind::K, 40);
        assert_eq!(short.values[..], long.values[..11]);
    }

    #[test]
    fn convolution_identity() {
        // Σ_{i=0}^{n} K_i/(n+1-i)! = 0, checked from a freshly built table.
        let k = kn_prefix(30);
        for n in 1..=30 {
            let mut acc = Rational::zero();
            for (i, ki) in k.iter().enumerate().take(n + 1) {
                acc += ki / Rational::from_integer(factorial(n + 1 - i));
            }
            assert!(acc.is_zero(), "convolution fails at n = {n}");
        }
    }

    #[test]
    fn bernoulli_oracle_examples() {
        assert_eq!(bernoulli_oracle(0), q(1, 1));
        assert_eq!(bernoulli_oracle(1), q(-1, 2));
        assert_eq!(bernoulli_oracle(2), q(1, 6));
        assert_eq!(bernoulli_oracle(4), q(-1, 30));
        assert_eq!(bernoulli_oracle(12), q(-691, 2730));
    }

    #[test]
    fn kn_matches_bernoulli_over_factorial() {
        for n in 0..=30 {
            let expected = bernoulli_oracle(n) / Rational::from_integer(factorial(n));
            assert_eq!(kn(n), expected, "n = {n}");
        }
    }

    #[test]
    fn even_coefficients_alternate() {
        for m in 1..=14 {
            let k = kn(2 * m);
            if m % 2 == 1 {
                assert!(k.is_positive(), "K_{} should be positive", 2 * m);
            } else {
                assert!(k.is_negative(), "K_{} should be negative", 2 * m);
            }
        }
    }

    #[test]
    fn float_coefficients_switch_smoothly() {
        // the ζ-based branch continues the exact one
        for n in [62usize, 64, 80] {
            let exact = rational_to_f64(&kn(n));
            let approx = kn_f64(n);
            assert!(
                ((exact - approx) / exact).abs() < 1e-14,
                "n = {n}: {exact} vs {approx}"
            );
        }
        assert_eq!(kn_f64(61), 0.0);
        for n in 0..=70 {
            let scaled = scaled_abs_kn(n);
            let direct = abs_kn_f64(n) * (2.0 * std::f64::consts::PI).powi(n as i32);
            assert!((scaled - direct).abs() <= 1e-13 * direct.max(1.0), "n = {n}");
        }
    }

    #[test]
    fn huge_rationals_convert() {
        let x = rational_to_f64(&kn(200));
        let expected = 2.0 * (2.0 * std::f64::consts::PI).powi(-200);
        assert!(((x.abs() - expected) / expected).abs() < 1e-12);
    }

    #[test]
    fn zeta_crosscheck_examples() {
        assert!(zeta_crosscheck(1, 1_000_000) < 1e-6);
        assert!(zeta_crosscheck(2, 10_000) < 1e-10);
        let single = (1.0 / 12.0 - 2.0 / (2.0 * std::f64::consts::PI).powi(2)).abs();
        assert!((zeta_crosscheck(1, 1) - single).abs() < 1e-15);
    }

    #[test]
    fn invariant_suite_passes() {
        let checks = check_invariants(30);
        assert_eq!(checks.len(), 5);
        assert!(checks.iter().all(|c| c.passed), "{checks:?}");
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("g_abs".parse::<CoeffKind>(), Ok(CoeffKind::GAbs));
        assert_eq!("ALPHA".parse::<CoeffKind>(), Ok(CoeffKind::Alpha));
        assert!("Q".parse::<CoeffKind>().is_err());
        assert_eq!(CoeffKind::GAbs.to_string(), "G_ABS");
    }
}
