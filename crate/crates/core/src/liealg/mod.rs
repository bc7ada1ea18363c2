//! Lie-algebra backends and the operator series evaluated in them.
//!
//! A [`LieBackend`] supplies the vector-space operations, the bracket and a
//! Lie-sub-multiplicative norm (`‖[a,b]‖ ≤ ‖a‖‖b‖`). Everything else in this
//! module (ad powers, the Todd operator, the Dynkin recursion) is written once
//! against that contract and runs unchanged on matrices and on the free algebra.

mod matrix;

pub use matrix::{
    eval_poly_matrices, lie_norm, mat_exp, mat_log, random_matrix, sigma_max, MatrixAlgebra,
    MatrixJson, PairJson,
};

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_traits::One;

use crate::coeffs::{factorial, kn_prefix, Rational};
use crate::error::{Error, Result};
use crate::freelie::{Bidegree, NcPoly};

/// Radius of convergence of the Bernoulli generating series.
pub const TWO_PI: f64 = 2.0 * PI;

/// Contract under which Lie series are evaluated.
pub trait LieBackend {
    type Elem: Clone;
    type Scalar: Clone;

    fn zero(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn scale(&self, c: &Self::Scalar, a: &Self::Elem) -> Self::Elem;
    fn bracket(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    /// Lie-sub-multiplicative norm.
    fn norm(&self, a: &Self::Elem) -> f64;
    #[allow(clippy::wrong_self_convention)]
    fn from_rational(&self, q: &Rational) -> Self::Scalar;

    fn is_zero(&self, a: &Self::Elem) -> bool {
        self.norm(a) == 0.0
    }

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        let minus_one = self.from_rational(&-Rational::one());
        self.add(a, &self.scale(&minus_one, b))
    }

    /// `K_0..=K_{n_max}` as backend scalars.
    fn k_coefficients(&self, n_max: usize) -> Vec<Self::Scalar> {
        kn_prefix(n_max)
            .iter()
            .map(|k| self.from_rational(k))
            .collect()
    }
}

/// The free Lie algebra on `x, y`, realised inside the free associative algebra.
///
/// The norm is twice the ℓ¹ norm of the coefficients, which makes it
/// Lie-sub-multiplicative since `‖pq - qp‖₁ ≤ 2‖p‖₁‖q‖₁`.
#[derive(Debug, Clone, Copy, Default)]
pub struct FreeAlgebra;

impl LieBackend for FreeAlgebra {
    type Elem = NcPoly;
    type Scalar = Rational;

    fn zero(&self) -> NcPoly {
        NcPoly::zero()
    }

    fn add(&self, a: &NcPoly, b: &NcPoly) -> NcPoly {
        a + b
    }

    fn scale(&self, c: &Rational, a: &NcPoly) -> NcPoly {
        a.scale(c)
    }

    fn bracket(&self, a: &NcPoly, b: &NcPoly) -> NcPoly {
        a.bracket(b)
    }

    fn norm(&self, a: &NcPoly) -> f64 {
        2.0 * crate::coeffs::rational_to_f64(&a.l1_norm())
    }

    fn from_rational(&self, q: &Rational) -> Rational {
        q.clone()
    }

    fn is_zero(&self, a: &NcPoly) -> bool {
        a.is_zero()
    }
}

/// `(ad_y)^n (b)`; the zeroth power is the identity.
pub fn ad_power_apply<B: LieBackend>(backend: &B, y: &B::Elem, b: &B::Elem, n: usize) -> B::Elem {
    let mut cur = b.clone();
    for _ in 0..n {
        cur = backend.bracket(y, &cur);
    }
    cur
}

/// Result of a truncated operator series.
#[derive(Debug, Clone)]
pub struct SeriesSum<E> {
    pub value: E,
    /// Highest index included.
    pub terms_used: usize,
}

/// `Σ_{n=0}^{H} K_n (-ad_y)^n (b)`, the Todd operator `ad y / (1 - e^{-ad y})` applied to `b`.
///
/// `H ≤ h_max` is the first index at which the a-priori bound
/// `‖b‖·|K_n|·‖y‖^n` has been below `eps` for two consecutive indices. The bound
/// is geometric with ratio `‖y‖/2π`, so the truncation is not rigorous as
/// `‖y‖ → 2π` (there the cap `h_max` decides).
pub fn todd_apply<B: LieBackend>(
    backend: &B,
    y: &B::Elem,
    b: &B::Elem,
    h_max: usize,
    eps: f64,
) -> Result<SeriesSum<B::Elem>> {
    let norm_y = backend.norm(y);
    if norm_y >= TWO_PI {
        return Err(Error::NormTooLarge {
            norm: norm_y,
            limit: TWO_PI,
        });
    }
    let k = backend.k_coefficients(h_max);
    let kf = crate::coeffs::kn_f64_table(h_max);
    let norm_b = backend.norm(b);
    let minus_one = backend.from_rational(&-Rational::one());

    let mut value = b.clone();
    let mut term = b.clone(); // (-ad_y)^n b
    let mut bound = norm_b;
    let mut below = 0usize;
    let mut used = 0usize;
    for n in 1..=h_max {
        bound *= norm_y;
        let term_bound = bound * kf[n].abs();
        term = backend.scale(&minus_one, &backend.bracket(y, &term));
        if kf[n] != 0.0 {
            value = backend.add(&value, &backend.scale(&k[n], &term));
        }
        used = n;
        if term_bound < eps {
            below += 1;
            if below >= 2 {
                break;
            }
        } else {
            below = 0;
        }
    }
    Ok(SeriesSum {
        value,
        terms_used: used,
    })
}

/// Residual of `((1 - e^{ad z})/ad z) ∘ f̃(z) = id` on a set of probes, where
/// `f̃(z) = Σ α_n (ad z)^n` and `(1 - e^{ad z})/ad z = -Σ (ad z)^n/(n+1)!`, both summed
/// for `n = 0..=n_trunc`.
///
/// Returns the largest `‖· - h‖` over the probes `h`.
pub fn todd_inverse_residual<B: LieBackend>(
    backend: &B,
    z: &B::Elem,
    probes: &[B::Elem],
    n_trunc: usize,
) -> Result<f64> {
    let norm_z = backend.norm(z);
    if norm_z >= TWO_PI {
        return Err(Error::NormTooLarge {
            norm: norm_z,
            limit: TWO_PI,
        });
    }
    let alpha: Vec<B::Scalar> = kn_prefix(n_trunc)
        .iter()
        .map(|k| backend.from_rational(&-k))
        .collect();
    let exp_coeffs: Vec<B::Scalar> = (0..=n_trunc)
        .map(|n| backend.from_rational(&-Rational::new(BigInt::one(), factorial(n + 1))))
        .collect();

    let apply = |coeffs: &[B::Scalar], h: &B::Elem| {
        let mut acc = backend.scale(&coeffs[0], h);
        let mut power = h.clone();
        for c in &coeffs[1..] {
            power = backend.bracket(z, &power);
            acc = backend.add(&acc, &backend.scale(c, &power));
        }
        acc
    };

    let mut worst = 0.0f64;
    for h in probes {
        let inner = apply(&alpha, h);
        let outer = apply(&exp_coeffs, &inner);
        worst = worst.max(backend.norm(&backend.sub(&outer, h)));
    }
    Ok(worst)
}

/// Which of the two bracket recursions builds `Z_{i,j}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Route {
    /// Raise `i` with `K_h` and innermost target `a` (falls back to the base
    /// values on the `i = 0` column).
    #[default]
    AlongA,
    /// Raise `j` with `(-1)^h K_h` and innermost target `b`.
    AlongB,
}

/// `Z_{i,j}(a,b)` for all `i ≤ max_i`, `j ≤ max_j`.
#[derive(Debug, Clone)]
pub struct ZTable<E> {
    max_i: usize,
    max_j: usize,
    // None marks an entry that is identically zero by construction
    z: Vec<Vec<Option<E>>>,
}

impl<E: Clone> ZTable<E> {
    pub fn max_i(&self) -> usize {
        self.max_i
    }

    pub fn max_j(&self) -> usize {
        self.max_j
    }

    /// Entry `(i, j)`, or `None` when it vanishes by construction.
    pub fn get(&self, i: usize, j: usize) -> Option<&E> {
        self.z.get(i)?.get(j)?.as_ref()
    }

    /// Entry `(i, j)` with structural zeros materialised.
    pub fn value<B: LieBackend<Elem = E>>(&self, backend: &B, i: usize, j: usize) -> E {
        self.get(i, j).cloned().unwrap_or_else(|| backend.zero())
    }
}

/// Builds the table of Dynkin polynomials evaluated at `(a, b)` by the bracket
/// recursion, memoizing the nested-bracket sums
///
/// ```text
/// S_h(p,q) = Σ_{(u,v) ≠ (0,0)} [Z_{u,v}, S_{h-1}(p-u, q-v)],    S_0(0,0) = target
/// ```
///
/// so the sum over compositions is never enumerated explicitly.
pub fn z_table<B: LieBackend>(
    backend: &B,
    a: &B::Elem,
    b: &B::Elem,
    max_i: usize,
    max_j: usize,
    route: Route,
) -> ZTable<B::Elem> {
    // Work in (primary, secondary) coordinates: the primary index is the one the
    // recursion raises.
    let (max_p, max_s) = match route {
        Route::AlongA => (max_i, max_j),
        Route::AlongB => (max_j, max_i),
    };
    let (target, other) = match route {
        Route::AlongA => (a, b),
        Route::AlongB => (b, a),
    };
    let max_deg = max_p + max_s;
    let k = backend.k_coefficients(max_deg.max(1));
    let kf = crate::coeffs::kn_f64_table(max_deg.max(1));
    let minus_one = backend.from_rational(&-Rational::one());

    let mut z: Vec<Vec<Option<B::Elem>>> = vec![vec![None; max_s + 1]; max_p + 1];
    if max_p >= 1 {
        z[1][0] = Some(target.clone());
    }
    if max_s >= 1 {
        z[0][1] = Some(other.clone());
    }

    if max_p == 0 {
        return finish(z, route, max_i, max_j);
    }

    // s[p][q][h] for p ≤ max_p - 1, q ≤ max_s
    let mut s: Vec<Vec<Vec<Option<B::Elem>>>> = vec![vec![Vec::new(); max_s + 1]; max_p];
    s[0][0] = vec![Some(target.clone())];

    for n in 1..max_deg {
        for p in 0..max_p {
            if p > n || n - p > max_s {
                continue;
            }
            let q = n - p;
            let mut row: Vec<Option<B::Elem>> = vec![None; n + 1];
            for (h, slot) in row.iter_mut().enumerate().skip(1) {
                let mut acc: Option<B::Elem> = None;
                for u in 0..=p {
                    for v in 0..=q {
                        if u == 0 && v == 0 {
                            continue;
                        }
                        let Some(zuv) = z[u][v].as_ref() else {
                            continue;
                        };
                        let Some(prev) = s[p - u][q - v].get(h - 1).and_then(|e| e.as_ref())
                        else {
                            continue;
                        };
                        let term = backend.bracket(zuv, prev);
                        acc = Some(match acc {
                            None => term,
                            Some(x) => backend.add(&x, &term),
                        });
                    }
                }
                *slot = acc.filter(|e| !backend.is_zero(e));
            }
            s[p][q] = row;
        }

        // Z of degree n + 1 with primary index ≥ 1
        for p in 1..=max_p {
            if p > n + 1 || n + 1 - p > max_s {
                continue;
            }
            let q = n + 1 - p;
            let src = &s[p - 1][q];
            let mut acc: Option<B::Elem> = None;
            for h in 1..src.len() {
                if kf[h] == 0.0 {
                    continue;
                }
                let Some(sh) = src[h].as_ref() else { continue };
                let mut term = backend.scale(&k[h], sh);
                if route == Route::AlongB && h % 2 == 1 {
                    term = backend.scale(&minus_one, &term);
                }
                acc = Some(match acc {
                    None => term,
                    Some(x) => backend.add(&x, &term),
                });
            }
            let inv = backend.from_rational(&Rational::new(BigInt::one(), BigInt::from(p)));
            z[p][q] = acc
                .map(|e| backend.scale(&inv, &e))
                .filter(|e| !backend.is_zero(e));
        }
    }
    finish(z, route, max_i, max_j)
}

fn finish<E: Clone>(
    z: Vec<Vec<Option<E>>>,
    route: Route,
    max_i: usize,
    max_j: usize,
) -> ZTable<E> {
    let z = match route {
        Route::AlongA => z,
        Route::AlongB => (0..=max_i)
            .map(|i| (0..=max_j).map(|j| z[j][i].clone()).collect())
            .collect(),
    };
    ZTable { max_i, max_j, z }
}

/// `Z_{i,j}(a,b)` by the bracket recursion (memoized over all lower bidegrees).
pub fn recursive_z_eval<B: LieBackend>(
    backend: &B,
    d: Bidegree,
    a: &B::Elem,
    b: &B::Elem,
) -> B::Elem {
    z_table(backend, a, b, d.i, d.j, Route::AlongA).value(backend, d.i, d.j)
}

/// Number of terms after which the geometric tail `2 (r/2π)^n / (1 - r/2π)` of a
/// Bernoulli-type operator series drops below `tol`.
pub fn geometric_truncation(norm: f64, tol: f64) -> usize {
    let ratio = norm / TWO_PI;
    if ratio <= 0.0 {
        return 1;
    }
    assert!(ratio < 1.0, "norm must be below 2π");
    let n = ((tol * (1.0 - ratio) / 2.0).ln() / ratio.ln()).ceil();
    (n.max(1.0) as usize) + 2
}
