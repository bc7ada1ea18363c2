//! Noncommutative polynomials in two letters and the Dynkin polynomials `Z_{i,j}`.
//!
//! Lie elements are stored expanded, as plain polynomials, so two Lie
//! polynomials are equal exactly when their word maps are equal.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::coeffs::{factorial, Rational};
use crate::liealg::{recursive_z_eval, FreeAlgebra};

/// Letter code for `x`.
pub const X: u8 = 0;
/// Letter code for `y`.
pub const Y: u8 = 1;

/// A word over `{x, y}`; the empty word is the unit.
///
/// Ordered by length first, then lexicographically with `x < y`, which is the
/// canonical rendering order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters(letters: &[u8]) -> Self {
        debug_assert!(letters.iter().all(|&l| l == X || l == Y));
        Word(letters.to_vec())
    }

    /// Parses a string of `x` and `y` characters; `"1"` or `""` is the empty word.
    pub fn parse(s: &str) -> Option<Self> {
        if s == "1" {
            return Some(Word::empty());
        }
        s.chars()
            .map(|c| match c {
                'x' => Some(X),
                'y' => Some(Y),
                _ => None,
            })
            .collect::<Option<Vec<u8>>>()
            .map(Word)
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bidegree(&self) -> Bidegree {
        let i = self.0.iter().filter(|&&l| l == X).count();
        Bidegree::new(i, self.0.len() - i)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = Vec::with_capacity(self.len() + other.len());
        letters.extend_from_slice(&self.0);
        letters.extend_from_slice(&other.0);
        Word(letters)
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for &l in &self.0 {
            f.write_str(if l == X { "x" } else { "y" })?;
        }
        Ok(())
    }
}

/// Counts of `x` and `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bidegree {
    pub i: usize,
    pub j: usize,
}

impl Bidegree {
    pub fn new(i: usize, j: usize) -> Self {
        Bidegree { i, j }
    }

    pub fn total(&self) -> usize {
        self.i + self.j
    }
}

/// Element of the free associative algebra on `x, y` with exact rational coefficients.
///
/// Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NcPoly {
    terms: BTreeMap<Word, Rational>,
}

impl NcPoly {
    pub fn zero() -> Self {
        NcPoly::default()
    }

    pub fn one() -> Self {
        NcPoly::monomial(Word::empty(), Rational::one())
    }

    pub fn x() -> Self {
        NcPoly::monomial(Word(vec![X]), Rational::one())
    }

    pub fn y() -> Self {
        NcPoly::monomial(Word(vec![Y]), Rational::one())
    }

    pub fn monomial(word: Word, coeff: Rational) -> Self {
        let mut p = NcPoly::zero();
        p.add_term(word, coeff);
        p
    }

    /// Builds a polynomial from `(word, coefficient)` pairs, merging duplicates.
    pub fn from_terms<I: IntoIterator<Item = (Word, Rational)>>(terms: I) -> Self {
        let mut p = NcPoly::zero();
        for (w, c) in terms {
            p.add_term(w, c);
        }
        p
    }

    pub fn add_term(&mut self, word: Word, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(word) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, word: &Word) -> Rational {
        self.terms.get(word).cloned().unwrap_or_else(Rational::zero)
    }

    /// Terms in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&Word, &Rational)> {
        self.terms.iter()
    }

    pub fn scale(&self, c: &Rational) -> NcPoly {
        if c.is_zero() {
            return NcPoly::zero();
        }
        NcPoly {
            terms: self
                .terms
                .iter()
                .map(|(w, a)| (w.clone(), a * c))
                .collect(),
        }
    }

    pub fn bracket(&self, other: &NcPoly) -> NcPoly {
        &(self * other) - &(other * self)
    }

    /// True when every stored word has exactly this bidegree.
    pub fn is_bihomogeneous(&self, d: Bidegree) -> bool {
        self.terms.keys().all(|w| w.bidegree() == d)
    }

    /// Component of total degree `n`.
    pub fn homogeneous_part(&self, n: usize) -> NcPoly {
        NcPoly {
            terms: self
                .terms
                .iter()
                .filter(|(w, _)| w.len() == n)
                .map(|(w, c)| (w.clone(), c.clone()))
                .collect(),
        }
    }

    /// Drops every word longer than `max_degree`.
    pub fn truncate(&self, max_degree: usize) -> NcPoly {
        NcPoly {
            terms: self
                .terms
                .iter()
                .filter(|(w, _)| w.len() <= max_degree)
                .map(|(w, c)| (w.clone(), c.clone()))
                .collect(),
        }
    }

    /// Product with words longer than `max_degree` discarded.
    pub fn mul_truncated(&self, other: &NcPoly, max_degree: usize) -> NcPoly {
        let mut out = NcPoly::zero();
        for (u, a) in &self.terms {
            for (v, b) in &other.terms {
                if u.len() + v.len() <= max_degree {
                    out.add_term(u.concat(v), a * b);
                }
            }
        }
        out
    }

    /// Sum of absolute coefficients.
    pub fn l1_norm(&self) -> Rational {
        self.terms.values().map(|c| c.abs()).sum()
    }
}

/// Associative product: concatenation of words, bilinear in the coefficients.
pub fn nc_mul(p: &NcPoly, q: &NcPoly) -> NcPoly {
    p * q
}

/// Commutator `pq - qp`.
pub fn nc_bracket(p: &NcPoly, q: &NcPoly) -> NcPoly {
    p.bracket(q)
}

impl<'a> Add<&'a NcPoly> for &'a NcPoly {
    type Output = NcPoly;

    fn add(self, rhs: &'a NcPoly) -> NcPoly {
        let mut out = self.clone();
        for (w, c) in &rhs.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a NcPoly> for &'a NcPoly {
    type Output = NcPoly;

    fn sub(self, rhs: &'a NcPoly) -> NcPoly {
        let mut out = self.clone();
        for (w, c) in &rhs.terms {
            out.add_term(w.clone(), -c);
        }
        out
    }
}

impl<'a> Mul<&'a NcPoly> for &'a NcPoly {
    type Output = NcPoly;

    fn mul(self, rhs: &'a NcPoly) -> NcPoly {
        let mut out = NcPoly::zero();
        for (u, a) in &self.terms {
            for (v, b) in &rhs.terms {
                out.add_term(u.concat(v), a * b);
            }
        }
        out
    }
}

impl Neg for &NcPoly {
    type Output = NcPoly;

    fn neg(self) -> NcPoly {
        NcPoly {
            terms: self.terms.iter().map(|(w, c)| (w.clone(), -c)).collect(),
        }
    }
}

impl Add for NcPoly {
    type Output = NcPoly;

    fn add(self, rhs: NcPoly) -> NcPoly {
        &self + &rhs
    }
}

impl Sub for NcPoly {
    type Output = NcPoly;

    fn sub(self, rhs: NcPoly) -> NcPoly {
        &self - &rhs
    }
}

impl Mul for NcPoly {
    type Output = NcPoly;

    fn mul(self, rhs: NcPoly) -> NcPoly {
        &self * &rhs
    }
}

fn fmt_rational(c: &Rational) -> String {
    if c.denom().is_one() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

/// One `coeff word` line per term in canonical order (total degree, then
/// lexicographic); the zero polynomial renders as `0`.
impl fmt::Display for NcPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (w, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str("\n")?;
            }
            write!(f, "{} {}", fmt_rational(c), w)?;
        }
        Ok(())
    }
}

/// `Z_{i,j}` from the explicit word sum over compositions
///
/// ```text
/// Σ_{n=1}^{i+j} (-1)^{n+1}/n · Σ x^{i_1} y^{j_1} ⋯ x^{i_n} y^{j_n} / (i_1! j_1! ⋯ i_n! j_n!)
/// ```
///
/// where the inner sum runs over pairs `(i_k, j_k) ≠ (0, 0)` adding up to `(i, j)`.
pub fn dynkin_z(d: Bidegree) -> NcPoly {
    let mut out = NcPoly::zero();
    if d.total() == 0 {
        return out;
    }
    let facts: Vec<BigInt> = (0..=d.total()).map(factorial).collect();
    let mut word = Vec::with_capacity(d.total());
    compositions(
        d.i,
        d.j,
        0,
        &mut word,
        BigInt::one(),
        &facts,
        &mut out,
    );
    out
}

fn compositions(
    rem_i: usize,
    rem_j: usize,
    depth: usize,
    word: &mut Vec<u8>,
    denom: BigInt,
    facts: &[BigInt],
    out: &mut NcPoly,
) {
    if rem_i == 0 && rem_j == 0 {
        let n = depth as i64;
        let sign = if depth % 2 == 1 { 1 } else { -1 };
        let coeff = Rational::new(BigInt::from(sign), BigInt::from(n) * denom);
        out.add_term(Word(word.clone()), coeff);
        return;
    }
    for p in 0..=rem_i {
        for q in 0..=rem_j {
            if p == 0 && q == 0 {
                continue;
            }
            let mark = word.len();
            word.extend(std::iter::repeat_n(X, p));
            word.extend(std::iter::repeat_n(Y, q));
            let next = &denom * &facts[p] * &facts[q];
            compositions(rem_i - p, rem_j - q, depth + 1, word, next, facts, out);
            word.truncate(mark);
        }
    }
}

/// `Z_{i,j}` built by the bracket recursion in the free Lie algebra and expanded.
pub fn recursive_z_free(d: Bidegree) -> NcPoly {
    recursive_z_eval(&FreeAlgebra, d, &NcPoly::x(), &NcPoly::y())
}

/// Degree-`n` part of the CBHD series, `Σ_{i+j=n} Z_{i,j}`.
pub fn bch_homogeneous(n: usize) -> NcPoly {
    let mut out = NcPoly::zero();
    for i in 0..=n {
        out = &out + &dynkin_z(Bidegree::new(i, n - i));
    }
    out
}

/// Homogeneous components of `log(exp(x)·exp(y))` up to degree `n_max`, computed by
/// multiplying truncated exponential series and composing with `log(1 + w)`.
///
/// Entry `n` of the result is the degree-`n` component (entry 0 is zero).
pub fn log_expexp_oracle(n_max: usize) -> Vec<NcPoly> {
    let exp_of = |letter: u8| {
        let mut p = NcPoly::zero();
        for k in 0..=n_max {
            let coeff = Rational::new(BigInt::one(), factorial(k));
            p.add_term(Word(vec![letter; k]), coeff);
        }
        p
    };
    let product = exp_of(X).mul_truncated(&exp_of(Y), n_max);
    let w = &product - &NcPoly::one();

    let mut log = NcPoly::zero();
    let mut power = w.clone();
    for m in 1..=n_max {
        let sign = if m % 2 == 1 { 1 } else { -1 };
        let c = Rational::new(BigInt::from(sign), BigInt::from(m));
        log = &log + &power.scale(&c);
        power = power.mul_truncated(&w, n_max);
    }
    (0..=n_max).map(|n| log.homogeneous_part(n)).collect()
}

/// Largest absolute coefficient; handy in diagnostics.
pub fn max_abs_coeff(p: &NcPoly) -> Rational {
    p.terms()
        .map(|(_, c)| c.abs())
        .max()
        .unwrap_or_else(Rational::zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    fn poly(terms: &[(&str, i64, i64)]) -> NcPoly {
        NcPoly::from_terms(
            terms
                .iter()
                .map(|(w, n, d)| (Word::parse(w).unwrap(), q(*n, *d))),
        )
    }

    #[test]
    fn product_examples() {
        let x = NcPoly::x();
        let y = NcPoly::y();
        assert_eq!(nc_mul(&x, &y), poly(&[("xy", 1, 1)]));
        let p = poly(&[("xy", 3, 2), ("y", -1, 1), ("1", 2, 1)]);
        assert_eq!(nc_mul(&NcPoly::one(), &p), p);
        let sum = &x + &y;
        let diff = &x - &y;
        assert_eq!(
            nc_mul(&sum, &diff),
            poly(&[("xx", 1, 1), ("xy", -1, 1), ("yx", 1, 1), ("yy", -1, 1)])
        );
    }

    #[test]
    fn bracket_examples() {
        let x = NcPoly::x();
        let y = NcPoly::y();
        assert_eq!(nc_bracket(&x, &y), poly(&[("xy", 1, 1), ("yx", -1, 1)]));
        let p = poly(&[("xy", 1, 3), ("y", 2, 1)]);
        assert!(nc_bracket(&p, &p).is_zero());
        assert_eq!(
            nc_bracket(&x, &nc_bracket(&x, &y)),
            poly(&[("xxy", 1, 1), ("xyx", -2, 1), ("yxx", 1, 1)])
        );
    }

    #[test]
    fn dynkin_examples() {
        assert_eq!(dynkin_z(Bidegree::new(1, 0)), NcPoly::x());
        assert_eq!(dynkin_z(Bidegree::new(0, 1)), NcPoly::y());
        assert!(dynkin_z(Bidegree::new(0, 0)).is_zero());
        assert_eq!(
            dynkin_z(Bidegree::new(1, 1)),
            poly(&[("xy", 1, 2), ("yx", -1, 2)])
        );
        for i in 2..=6 {
            assert!(dynkin_z(Bidegree::new(i, 0)).is_zero());
            assert!(dynkin_z(Bidegree::new(0, i)).is_zero());
        }
    }

    #[test]
    fn dynkin_bidegree_purity() {
        for i in 0..=5 {
            for j in 0..=5 {
                let d = Bidegree::new(i, j);
                assert!(dynkin_z(d).is_bihomogeneous(d), "Z_{i},{j}");
            }
        }
    }

    #[test]
    fn recursive_examples() {
        assert_eq!(recursive_z_free(Bidegree::new(0, 1)), NcPoly::y());
        assert_eq!(
            recursive_z_free(Bidegree::new(1, 1)),
            poly(&[("xy", 1, 2), ("yx", -1, 2)])
        );
        let x = NcPoly::x();
        let y = NcPoly::y();
        let xxy = nc_bracket(&x, &nc_bracket(&x, &y)).scale(&q(1, 12));
        assert_eq!(recursive_z_free(Bidegree::new(2, 1)), xxy);
    }

    #[test]
    fn recursion_matches_word_sum_up_to_degree_six() {
        for n in 0..=6 {
            for i in 0..=n {
                let d = Bidegree::new(i, n - i);
                assert_eq!(recursive_z_free(d), dynkin_z(d), "Z_{},{}", d.i, d.j);
            }
        }
    }

    #[test]
    fn homogeneous_low_degrees() {
        let x = NcPoly::x();
        let y = NcPoly::y();
        assert_eq!(bch_homogeneous(1), &x + &y);
        assert_eq!(bch_homogeneous(2), nc_bracket(&x, &y).scale(&q(1, 2)));
        let third = &nc_bracket(&x, &nc_bracket(&x, &y)) + &nc_bracket(&y, &nc_bracket(&y, &x));
        assert_eq!(bch_homogeneous(3), third.scale(&q(1, 12)));
    }

    #[test]
    fn degree_four_term_is_minus_one_twentyfourth_y_x_xy() {
        // The degree-4 component is -(1/24)[y,[x,[x,y]]], which equals -(1/24)[x,[y,[x,y]]]
        // because [[x,y],[x,y]] = 0 makes the two nestings agree.
        let x = NcPoly::x();
        let y = NcPoly::y();
        let xy = nc_bracket(&x, &y);
        let a = nc_bracket(&x, &nc_bracket(&y, &xy)).scale(&q(-1, 24));
        let b = nc_bracket(&y, &nc_bracket(&x, &xy)).scale(&q(-1, 24));
        assert_eq!(a, b);
        assert_eq!(bch_homogeneous(4), a);
    }

    #[test]
    fn oracle_low_degrees() {
        let parts = log_expexp_oracle(4);
        assert!(parts[0].is_zero());
        assert_eq!(parts[1], &NcPoly::x() + &NcPoly::y());
        assert_eq!(parts[2], poly(&[("xy", 1, 2), ("yx", -1, 2)]));
        assert_eq!(parts[4], bch_homogeneous(4));
    }

    #[test]
    fn rendering_is_canonical() {
        assert_eq!(dynkin_z(Bidegree::new(1, 1)).to_string(), "1/2 xy\n-1/2 yx");
        assert_eq!(NcPoly::zero().to_string(), "0");
        let p = poly(&[("yx", 1, 1), ("y", -3, 1), ("xx", 2, 5), ("1", 1, 1)]);
        assert_eq!(p.to_string(), "1 1\n-3 y\n2/5 xx\n1 yx");
    }

    /// Exact Gaussian elimination: is `target` in the span of `basis`?
    fn in_span(target: &NcPoly, basis: &[NcPoly]) -> bool {
        let mut words: Vec<Word> = target.terms().map(|(w, _)| w.clone()).collect();
        for b in basis {
            words.extend(b.terms().map(|(w, _)| w.clone()));
        }
        words.sort();
        words.dedup();
        // columns: basis vectors, augmented with target
        let mut rows: Vec<Vec<Rational>> = words
            .iter()
            .map(|w| {
                let mut r: Vec<Rational> = basis.iter().map(|b| b.coeff(w)).collect();
                r.push(target.coeff(w));
                r
            })
            .collect();
        let ncols = basis.len();
        let mut pivot_row = 0;
        for col in 0..ncols {
            let Some(p) = (pivot_row..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
                continue;
            };
            rows.swap(pivot_row, p);
            let pivot = rows[pivot_row][col].clone();
            for r in 0..rows.len() {
                if r != pivot_row && !rows[r][col].is_zero() {
                    let factor = &rows[r][col] / &pivot;
                    #[allow(clippy::needless_range_loop)]
                    for c in col..=ncols {
                        let delta = &factor * &rows[pivot_row][c];
                        rows[r][c] -= delta;
                    }
                }
            }
            pivot_row += 1;
        }
        rows[pivot_row..].iter().all(|r| r[ncols].is_zero())
    }

    #[test]
    fn low_degree_components_are_lie_polynomials() {
        let x = NcPoly::x();
        let y = NcPoly::y();
        let xy = nc_bracket(&x, &y);
        assert!(in_span(&bch_homogeneous(2), std::slice::from_ref(&xy)));
        let basis3 = [nc_bracket(&x, &xy), nc_bracket(&y, &xy)];
        assert!(in_span(&bch_homogeneous(3), &basis3));
        // and a non-Lie element is rejected
        assert!(!in_span(&poly(&[("xxy", 1, 1)]), &basis3));
    }

    fn small_poly() -> impl Strategy<Value = NcPoly> {
        let term = (prop::collection::vec(0u8..2, 0..4), -3i64..=3, 1i64..=3);
        prop::collection::vec(term, 0..4).prop_map(|ts| {
            NcPoly::from_terms(
                ts.into_iter()
                    .map(|(w, n, d)| (Word::from_letters(&w), q(n, d))),
            )
        })
    }

    proptest! {
        #[test]
        fn jacobi_identity(p in small_poly(), r in small_poly(), s in small_poly()) {
            let j = &(&p.bracket(&r.bracket(&s)) + &r.bracket(&s.bracket(&p))) + &s.bracket(&p.bracket(&r));
            prop_assert!(j.is_zero());
        }

        #[test]
        fn product_is_associative_and_distributive(p in small_poly(), r in small_poly(), s in small_poly()) {
            prop_assert_eq!(&(&p * &r) * &s, &p * &(&r * &s));
            prop_assert_eq!(&p * &(&r + &s), &(&p * &r) + &(&p * &s));
        }

        #[test]
        fn rendering_round_trips(p in small_poly()) {
            let text = p.to_string();
            if p.is_zero() {
                prop_assert_eq!(text, "0");
            } else {
                let parsed = NcPoly::from_terms(text.lines().map(|line| {
                    let (c, w) = line.split_once(' ').unwrap();
                    let c: Rational = c.parse().unwrap();
                    (Word::parse(w).unwrap(), c)
                }));
                prop_assert_eq!(parsed, p);
            }
        }
    }
}
