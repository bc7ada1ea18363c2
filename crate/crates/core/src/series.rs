//! Taylor solutions of the CBHD initial-value problem and the convergence certificate.
//!
//! `φ(t) = φ(a, tb)` solves
//!
//! ```text
//! φ' = f_b(φ) = Σ_{h≥0} (-1)^h K_h (ad φ)^h (b),    φ(0) = a,
//! ```
//!
//! and `ψ` solves the scalar majorant problem `ψ' = ‖b‖ G(ψ)`, `ψ(0) = ‖a‖`. Their
//! Maclaurin coefficients satisfy `‖c_k‖ ≤ d_k`, and for pairs in the enlarged
//! domain the double series `Σ ‖Z_{i,j}(a,b)‖` is bounded by `ψ(1)`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::coeffs::{abs_kn_f64, scaled_abs_kn};
use crate::domain::{g_closed, in_gamma, lifetime_bounds, DomainQuery};
use crate::error::{Error, Result};
use crate::liealg::{lie_norm, mat_exp, todd_apply, z_table, LieBackend, MatrixAlgebra, Route, TWO_PI};
use crate::numfmt::{serialize_opt_sig15, serialize_sig15};
use crate::odecmp::{
    integrate_scalar_with, Field, IntegratorSettings, ScalarMajorant, StripDomain, VectorProblem,
};

/// Default truncation of the `h`-sum.
pub const DEFAULT_H_MAX: usize = 200;
/// Default threshold of the `h`-sum truncation bound.
pub const DEFAULT_EPS: f64 = 1e-17;
/// Default order of the ψ series.
pub const DEFAULT_PSI_ORDER: usize = 60;
/// Largest supported ψ order.
pub const MAX_PSI_ORDER: usize = 80;
/// Default `(I, J)` of the norm table.
pub const DEFAULT_TABLE_ORDER: usize = 24;
/// Tolerance of the certificate inequality and of the two ψ(1) evaluations.
pub const CERTIFICATE_TOL: f64 = 1e-6;

/// `c[k] = φ^{(k)}(0) / k!` for `k ≤ order`.
#[derive(Debug, Clone)]
pub struct PhiCoefficients<E> {
    pub c: Vec<E>,
    pub order: usize,
    pub h_max: usize,
    pub eps: f64,
    /// Highest `h` used for each `c[k+1]`.
    pub h_used: Vec<usize>,
}

impl<E: Clone> PhiCoefficients<E> {
    /// `Σ_{k≤n} c[k] t^k` evaluated through the backend.
    pub fn partial_sum<B: LieBackend<Elem = E>>(&self, backend: &B, n: usize, t: f64) -> E
    where
        B::Scalar: From<f64>,
    {
        let mut acc = backend.zero();
        let mut power = 1.0;
        for ck in self.c.iter().take(n + 1) {
            acc = backend.add(&acc, &backend.scale(&B::Scalar::from(power), ck));
            power *= t;
        }
        acc
    }
}

/// The `ψ` Taylor coefficients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsiCoefficients {
    pub d: Vec<f64>,
}

impl PsiCoefficients {
    /// `Σ d[k] t^k`.
    pub fn eval(&self, t: f64) -> f64 {
        self.d.iter().rev().fold(0.0, |acc, &dk| acc * t + dk)
    }

    /// `Σ_{k≤n} d[k]`.
    pub fn partial_sum(&self, n: usize) -> f64 {
        self.d.iter().take(n + 1).sum()
    }

    /// True when some `d[k]` with `k > 20` exceeds ten times its predecessor.
    pub fn diverges(&self) -> bool {
        self.d
            .windows(2)
            .enumerate()
            .any(|(k, w)| k + 1 > 20 && w[1] > 10.0 * w[0])
    }

    /// `ψ(1)` from the series, `None` when the divergence guard trips.
    pub fn value_at_one(&self) -> Option<f64> {
        (!self.diverges()).then(|| self.eval(1.0))
    }
}

/// Lazily filled table `W_h[m] = Σ_{n_1+…+n_h = m} [c_{n_1}, […, [c_{n_h}, b]…]]`.
struct NestedBrackets<E> {
    rows: Vec<Vec<E>>,
}

impl<E: Clone> NestedBrackets<E> {
    fn get<B: LieBackend<Elem = E>>(&mut self, backend: &B, c: &[E], h: usize, m: usize) -> E {
        while self.rows.len() <= h {
            self.rows.push(Vec::new());
        }
        while self.rows[h].len() <= m {
            let next = self.rows[h].len();
            let mut acc = backend.zero();
            for k in 0..=next {
                let inner = self.get(backend, c, h - 1, next - k);
                acc = backend.add(&acc, &backend.bracket(&c[k], &inner));
            }
            self.rows[h].push(acc);
        }
        self.rows[h][m].clone()
    }
}

/// The Maclaurin coefficients of `t ↦ φ(a, tb)` up to `order`.
///
/// `c[n+1] = (1/(n+1)) Σ_{h≥0} (-1)^h K_h Σ_{n_1+…+n_h=n} [c_{n_1}, […, [c_{n_h}, b]…]]`
/// with `n_i ≥ 0`. For each `n` the `h`-sum stops once `‖b‖ |K_h| S^h < eps` held
/// for two consecutive nonzero `K_h`, where `S = Σ_{k≤n} ‖c_k‖`, or at `h_max`.
pub fn phi_taylor<B: LieBackend>(
    backend: &B,
    a: &B::Elem,
    b: &B::Elem,
    order: usize,
    h_max: usize,
    eps: f64,
) -> Result<PhiCoefficients<B::Elem>> {
    let norm_a = backend.norm(a);
    if norm_a >= TWO_PI {
        return Err(Error::NormTooLarge {
            norm: norm_a,
            limit: TWO_PI,
        });
    }
    let k = backend.k_coefficients(h_max);
    let kf = crate::coeffs::kn_f64_table(h_max);
    let minus_one = backend.from_rational(&-crate::coeffs::Rational::from_integer(1.into()));
    let norm_b = backend.norm(b);

    let mut c = vec![a.clone()];
    let mut norms_sum = norm_a;
    let mut h_used = Vec::with_capacity(order);
    let mut table = NestedBrackets {
        rows: vec![std::iter::once(b.clone()).chain(std::iter::repeat_n(backend.zero(), order)).collect()],
    };
    for n in 0..order {
        let mut acc = backend.zero();
        let mut bound = norm_b;
        let mut below = 0;
        let mut used = 0;
        for h in 0..=h_max {
            if h > 0 {
                bound *= norms_sum;
            }
            if kf[h] == 0.0 {
                continue;
            }
            let w = table.get(backend, &c, h, n);
            let mut term = backend.scale(&k[h], &w);
            if h % 2 == 1 {
                term = backend.scale(&minus_one, &term);
            }
            acc = backend.add(&acc, &term);
            used = h;
            if bound * kf[h].abs() < eps {
                below += 1;
                if below >= 2 {
                    break;
                }
            } else {
                below = 0;
            }
        }
        let inv = backend.from_rational(&crate::coeffs::Rational::new(1.into(), (n as i64 + 1).into()));
        let next = backend.scale(&inv, &acc);
        norms_sum += backend.norm(&next);
        c.push(next);
        h_used.push(used);
    }
    Ok(PhiCoefficients {
        c,
        order,
        h_max,
        eps,
        h_used,
    })
}

/// `G^{(m)}(z0) / m!` for `m ≤ order`.
///
/// For `z0 ≤ π` the Maclaurin series is re-expanded binomially; beyond `π` the
/// coefficients come from the closed form through the Taylor recurrence of
/// `cot` (`cot' = -1 - cot²`). The binomial route avoids the cancellation the
/// `cot` recurrence suffers for small `z0`, where the far pole at `-2π` matters.
pub fn recentered_g(z0: f64, order: usize) -> Result<Vec<f64>> {
    if !(0.0..TWO_PI).contains(&z0) {
        return Err(Error::OutOfRange { value: z0 });
    }
    if z0 <= std::f64::consts::PI {
        Ok((0..=order).map(|m| binomial_recentered(z0, m)).collect())
    } else {
        Ok(cot_recentered(z0, order))
    }
}

fn binomial_recentered(z0: f64, m: usize) -> f64 {
    if z0 == 0.0 {
        return abs_kn_f64(m);
    }
    let r = z0 / TWO_PI;
    // g_m = Σ_{n≥m} |K_n| C(n,m) z0^{n-m} = Σ_n (|K_n|(2π)^n) · C(n,m) r^{n-m} / (2π)^m
    let mut weight = TWO_PI.powi(-(m as i32));
    let mut sum = 0.0;
    let mut n = m;
    loop {
        let term = scaled_abs_kn(n) * weight;
        sum += term;
        let ratio = (n + 1) as f64 / (n + 1 - m) as f64 * r;
        if n > m + 1 && ratio < 1.0 && weight * 2.0 * std::f64::consts::PI < 1e-17 * sum {
            break;
        }
        if n > 100_000 {
            break;
        }
        weight *= ratio;
        n += 1;
    }
    sum
}

fn cot_recentered(z0: f64, order: usize) -> Vec<f64> {
    let w0 = 0.5 * z0;
    // cot(w0 + e) = Σ p_k e^k
    let mut p = vec![1.0 / w0.tan()];
    for k in 0..order {
        let conv: f64 = (0..=k).map(|i| p[i] * p[k - i]).sum();
        let delta = if k == 0 { 1.0 } else { 0.0 };
        p.push(-(delta + conv) / (k + 1) as f64);
    }
    // in the variable ε = z - z0: q_k = p_k / 2^k
    let q: Vec<f64> = p.iter().enumerate().map(|(k, pk)| pk * 0.5f64.powi(k as i32)).collect();
    // (z/2) cot(z/2) = ((z0 + ε)/2) Σ q_k ε^k
    let h = |k: usize| 0.5 * z0 * q[k] + if k > 0 { 0.5 * q[k - 1] } else { 0.0 };
    (0..=order)
        .map(|k| match k {
            0 => 2.0 + 0.5 * z0 - h(0),
            1 => 0.5 - h(1),
            _ => -h(k),
        })
        .collect()
}

/// Taylor coefficients of `ψ`, `ψ' = ‖b‖ G(ψ)`, `ψ(0) = ‖a‖`.
///
/// `d[n+1] = (‖b‖/(n+1)) [t^n] G(ψ(t))`, with `G` recentered at `‖a‖` and composed
/// with the partial series `ψ - ‖a‖` through a table of its powers.
pub fn psi_taylor(q: &DomainQuery, order: usize) -> Result<PsiCoefficients> {
    if q.norm_a >= TWO_PI {
        return Err(Error::NormTooLarge {
            norm: q.norm_a,
            limit: TWO_PI,
        });
    }
    if order > MAX_PSI_ORDER {
        return Err(Error::InvalidArgument(format!(
            "psi order {order} exceeds the supported maximum {MAX_PSI_ORDER}"
        )));
    }
    let g = recentered_g(q.norm_a, order)?;
    let mut d = vec![q.norm_a];
    // powers[m][n] = [t^n] (ψ(t) - ψ(0))^m, filled column by column
    let mut powers: Vec<Vec<f64>> = vec![vec![0.0; order + 1]; order + 1];
    powers[0][0] = 1.0;
    for n in 0..order {
        if n >= 1 {
            powers[1][n] = d[n];
            for m in 2..=n {
                let mut acc = 0.0;
                for k in 1..=(n + 1 - m) {
                    acc += d[k] * powers[m - 1][n - k];
                }
                powers[m][n] = acc;
            }
        }
        let coeff: f64 = (0..=n).map(|m| g[m] * powers[m][n]).sum();
        d.push(q.norm_b * coeff / (n + 1) as f64);
    }
    Ok(PsiCoefficients { d })
}

/// `ψ(t)` by integrating the scalar majorant problem; `None` if `ψ` leaves
/// `(-2π, 2π)` before `t`.
pub fn psi_by_integration(q: &DomainQuery, t: f64) -> Result<Option<f64>> {
    let sm = cbhd_majorant(q.norm_a, q.norm_b)?;
    let settings = IntegratorSettings {
        rtol: 1e-12,
        atol: 1e-15,
        ..IntegratorSettings::default()
    };
    let tr = integrate_scalar_with(&sm, t, &settings)?;
    if tr.last_time() < t {
        return Ok(None);
    }
    Ok(tr.eval(t))
}

/// `‖Z_{i,j}(a,b)‖` for `i ≤ max_i`, `j ≤ max_j`, indexed `[i][j]`.
pub fn zij_norm_table<B: LieBackend>(backend: &B, a: &B::Elem, b: &B::Elem, max_i: usize, max_j: usize) -> Vec<Vec<f64>> {
    let table = z_table(backend, a, b, max_i, max_j, Route::AlongA);
    (0..=max_i)
        .map(|i| {
            (0..=max_j)
                .map(|j| table.get(i, j).map_or(0.0, |z| backend.norm(z)))
                .collect()
        })
        .collect()
}

/// Orders used by a certificate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CertificateOrders {
    #[serde(rename = "I")]
    pub max_i: usize,
    #[serde(rename = "J")]
    pub max_j: usize,
    #[serde(rename = "N")]
    pub psi_order: usize,
}

/// Numerical evidence that `Σ ‖Z_{i,j}(a,b)‖` converges.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceCertificate {
    pub query: DomainQuery,
    pub in_gamma: bool,
    /// `None` outside `Γ`.
    #[serde(serialize_with = "serialize_opt_sig15")]
    pub psi_at_1: Option<f64>,
    #[serde(serialize_with = "serialize_sig15")]
    pub partial_norm_sum: f64,
    /// `ψ(1) - Σ_{j≤J} d[j]`; `None` outside `Γ`.
    #[serde(serialize_with = "serialize_opt_sig15")]
    pub tail_bound: Option<f64>,
    pub orders: CertificateOrders,
    pub pass: bool,
    /// `ψ(1)` from the series; `None` when the divergence guard refused it.
    #[serde(skip)]
    pub psi_series: Option<f64>,
    /// `ψ(1)` from the integrator.
    #[serde(skip)]
    pub psi_integrated: Option<f64>,
    /// `Σ_{i≤I} ‖Z_{i,j}‖` for each `j ≤ J`; the last entry is a heuristic tail indicator.
    #[serde(skip)]
    pub column_sums: Vec<f64>,
    #[serde(skip)]
    pub beta_tilde: Option<f64>,
}

impl ConvergenceCertificate {
    /// `|ψ_series(1) - ψ_integrated(1)|` when both exist.
    pub fn psi_disagreement(&self) -> Option<f64> {
        Some((self.psi_series? - self.psi_integrated?).abs())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}

/// Evaluates the domain predicate, `ψ(1)` two ways and `Σ_{i≤I,j≤J} ‖Z_{i,j}‖`.
///
/// Passes iff the pair lies in `Γ` and the partial double sum stays below
/// `ψ(1) + 10^-6`. The series value of `ψ(1)` is reported unless the divergence
/// guard refuses it, in which case the integrated value is used.
pub fn certify<B: LieBackend>(
    backend: &B,
    a: &B::Elem,
    b: &B::Elem,
    max_i: usize,
    max_j: usize,
    psi_order: usize,
) -> Result<ConvergenceCertificate> {
    let query = DomainQuery::new(backend.norm(a), backend.norm(b))?;
    if query.norm_a >= TWO_PI {
        return Err(Error::NormTooLarge {
            norm: query.norm_a,
            limit: TWO_PI,
        });
    }
    let inside = in_gamma(&query);
    let beta_tilde = lifetime_bounds(&query).ok().map(|lb| lb.beta_tilde);

    let norms = zij_norm_table(backend, a, b, max_i, max_j);
    let column_sums: Vec<f64> = (0..=max_j).map(|j| norms.iter().map(|row| row[j]).sum()).collect();
    let partial_norm_sum = column_sums.iter().sum();

    let (psi_series, psi_integrated, psi_at_1, tail_bound) = if inside {
        let d = psi_taylor(&query, psi_order)?;
        let series = d.value_at_one();
        let integrated = psi_by_integration(&query, 1.0)?;
        let psi = series.or(integrated);
        let tail = psi.map(|p| p - d.partial_sum(max_j.min(psi_order)));
        (series, integrated, psi, tail)
    } else {
        (None, None, None, None)
    };
    let pass = inside && psi_at_1.is_some_and(|p| partial_norm_sum <= p + CERTIFICATE_TOL);
    Ok(ConvergenceCertificate {
        query,
        in_gamma: inside,
        psi_at_1,
        partial_norm_sum,
        tail_bound,
        orders: CertificateOrders {
            max_i,
            max_j,
            psi_order,
        },
        pass,
        psi_series,
        psi_integrated,
        column_sums,
        beta_tilde,
    })
}

/// `‖exp(Σ_{k≤N} c[k]) - exp(a)exp(b)‖ / ‖exp(a)exp(b)‖` in the spectral norm.
pub fn group_residual(a: &DMatrix<f64>, b: &DMatrix<f64>, order: usize) -> Result<f64> {
    let backend = MatrixAlgebra::new(a.nrows());
    let phi = phi_taylor(&backend, a, b, order, DEFAULT_H_MAX, DEFAULT_EPS)?;
    let sum = phi.c.iter().fold(backend.zero(), |acc, ck| acc + ck);
    let target = mat_exp(a) * mat_exp(b);
    Ok(lie_norm(&(mat_exp(&sum) - &target)) / lie_norm(&target))
}

/// `f_b(y) = Σ_h (-1)^h K_h (ad y)^h (b)` on matrices; undefined for `‖y‖* ≥ 2π`.
pub fn cbhd_field(b: &DMatrix<f64>, y: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let backend = MatrixAlgebra::new(b.nrows());
    todd_apply(&backend, y, b, DEFAULT_H_MAX, DEFAULT_EPS).ok().map(|s| s.value)
}

/// `z' = ‖b‖ G(z)`, `z(0) = ‖a‖` on `(-2π, 2π)`.
pub fn cbhd_majorant(norm_a: f64, norm_b: f64) -> Result<ScalarMajorant<'static>> {
    let domain = StripDomain::new(f64::INFINITY, TWO_PI, -TWO_PI)?;
    Ok(ScalarMajorant::new(
        Box::new(move |_, z| g_closed(z).ok().map(|g| norm_b * g)),
        norm_a,
        domain,
    ))
}

/// The CBHD problem `φ' = f_b(φ)`, `φ(0) = a` on `D(0, 2π)` with its majorant.
pub fn cbhd_problem(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
) -> Result<(VectorProblem<'static, DMatrix<f64>>, ScalarMajorant<'static>)> {
    let bb = b.clone();
    let field: Field<'static, DMatrix<f64>> = Box::new(move |_, y| cbhd_field(&bb, y));
    let domain = StripDomain::ball(f64::INFINITY, TWO_PI)?;
    let commutator = a * b - b * a;
    let probes = vec![a.clone(), b.clone(), commutator, a + b];
    let vp = VectorProblem::new(field, a.clone(), domain).with_probes(probes);
    let sm = cbhd_majorant(lie_norm(a), lie_norm(b))?;
    Ok((vp, sm))
}
