//! Real square matrices as a Banach-Lie algebra.
//!
//! The norm is `‖A‖* = 2·σ_max(A)`. Since `‖AB - BA‖₂ ≤ 2‖A‖₂‖B‖₂`, the factor 2
//! makes the commutator bracket Lie-sub-multiplicative.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::LieBackend;
use crate::coeffs::{kn_f64_table, rational_to_f64, Rational};
use crate::error::{Error, Result};
use crate::freelie::{NcPoly, X};

const POWER_ITER_TOL: f64 = 1e-12;
const POWER_ITER_MAX: usize = 10_000;

/// `n × n` real matrices with the commutator bracket.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatrixAlgebra {
    pub n: usize,
}

impl MatrixAlgebra {
    pub fn new(n: usize) -> Self {
        MatrixAlgebra { n }
    }
}

impl LieBackend for MatrixAlgebra {
    type Elem = DMatrix<f64>;
    type Scalar = f64;

    fn zero(&self) -> DMatrix<f64> {
        DMatrix::zeros(self.n, self.n)
    }

    fn add(&self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
        a + b
    }

    fn scale(&self, c: &f64, a: &DMatrix<f64>) -> DMatrix<f64> {
        a * *c
    }

    fn bracket(&self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
        a * b - b * a
    }

    fn norm(&self, a: &DMatrix<f64>) -> f64 {
        lie_norm(a)
    }

    fn from_rational(&self, q: &Rational) -> f64 {
        rational_to_f64(q)
    }

    fn is_zero(&self, a: &DMatrix<f64>) -> bool {
        a.iter().all(|&x| x == 0.0)
    }

    fn sub(&self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
        a - b
    }

    fn k_coefficients(&self, n_max: usize) -> Vec<f64> {
        kn_f64_table(n_max)
    }
}

/// Largest singular value by power iteration on `AᵀA`.
pub fn sigma_max(a: &DMatrix<f64>) -> f64 {
    let ata = a.transpose() * a;
    // start from the heaviest column so the start vector is not orthogonal to
    // the dominant eigenvector in practice
    let Some(col) = (0..ata.ncols()).max_by(|&i, &j| {
        ata.column(i)
            .norm_squared()
            .total_cmp(&ata.column(j).norm_squared())
    }) else {
        return 0.0;
    };
    let mut v = ata.column(col).into_owned();
    let n0 = v.norm();
    if n0 == 0.0 {
        return 0.0;
    }
    v /= n0;
    let mut lambda = 0.0f64;
    for _ in 0..POWER_ITER_MAX {
        let w = &ata * &v;
        let next = v.dot(&w);
        let wn = w.norm();
        if wn == 0.0 {
            break;
        }
        v = w / wn;
        let done = (next - lambda).abs() <= POWER_ITER_TOL * next.abs();
        lambda = next;
        if done {
            break;
        }
    }
    lambda.max(0.0).sqrt()
}

/// `‖A‖* = 2·σ_max(A)`.
pub fn lie_norm(a: &DMatrix<f64>) -> f64 {
    2.0 * sigma_max(a)
}

fn one_norm(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring around a degree-13 Padé approximant.
pub fn mat_exp(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let norm = one_norm(a);
    if norm == 0.0 {
        return id;
    }
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a / 2f64.powi(s);
    let b = &PADE13;
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9])
        + &a6 * b[7]
        + &a4 * b[5]
        + &a2 * b[3]
        + &id * b[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8])
        + &a6 * b[6]
        + &a4 * b[4]
        + &a2 * b[2]
        + &id * b[0];
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .expect("Padé denominator is nonsingular within the scaled range");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

fn denman_beavers_sqrt(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let mut y = a.clone();
    let mut z = DMatrix::<f64>::identity(n, n);
    for _ in 0..100 {
        let y_inv = y
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidArgument("matrix square root hit a singular iterate".into()))?;
        let z_inv = z
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidArgument("matrix square root hit a singular iterate".into()))?;
        let y_next = (&y + z_inv) * 0.5;
        let z_next = (&z + y_inv) * 0.5;
        let delta = (&y_next - &y).norm();
        y = y_next;
        z = z_next;
        if delta <= 1e-15 * y.norm() {
            return Ok(y);
        }
    }
    Err(Error::InvalidArgument(
        "Denman-Beavers iteration did not converge".into(),
    ))
}

/// Principal matrix logarithm by inverse scaling and squaring: square roots until
/// `‖A - I‖₂ < 1/4`, then the Mercator series to order 30.
pub fn mat_log(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let mut m = a.clone();
    let mut k = 0;
    while sigma_max(&(&m - &id)) >= 0.25 {
        if k > 60 {
            return Err(Error::InvalidArgument(
                "matrix logarithm: square roots do not approach the identity".into(),
            ));
        }
        m = denman_beavers_sqrt(&m)?;
        k += 1;
    }
    let x = &m - &id;
    let mut power = x.clone();
    let mut log = DMatrix::<f64>::zeros(n, n);
    for j in 1..=30 {
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        log += &power * (sign / j as f64);
        power = &power * &x;
    }
    Ok(log * 2f64.powi(k))
}

/// Evaluates a noncommutative polynomial at `x = a`, `y = b` by multiplying words out.
pub fn eval_poly_matrices(p: &NcPoly, a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut out = DMatrix::<f64>::zeros(n, n);
    for (w, c) in p.terms() {
        let mut m = DMatrix::<f64>::identity(n, n);
        for &l in w.letters() {
            m = if l == X { m * a } else { m * b };
        }
        out += m * rational_to_f64(c);
    }
    out
}

/// Entries uniform in `[-1, 1]`, rescaled so that `‖A‖* = target_norm`.
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize, target_norm: f64) -> DMatrix<f64> {
    loop {
        let m = DMatrix::<f64>::from_fn(n, n, |_, _| rng.gen_range(-1.0..=1.0));
        let norm = lie_norm(&m);
        if norm > 1e-8 {
            return m * (target_norm / norm);
        }
    }
}

/// `{"n": int, "data": [[f64, ...], ...]}`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    pub data: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        MatrixJson {
            n: m.nrows(),
            data: m
                .row_iter()
                .map(|r| r.iter().copied().collect())
                .collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<DMatrix<f64>> {
        if self.data.len() != self.n || self.data.iter().any(|r| r.len() != self.n) {
            return Err(Error::InvalidArgument(format!(
                "matrix data is not {n}×{n}",
                n = self.n
            )));
        }
        if self.data.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
        }
        Ok(DMatrix::from_fn(self.n, self.n, |i, j| self.data[i][j]))
    }
}

/// A pair `(a, b)` of matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairJson {
    pub a: MatrixJson,
    pub b: MatrixJson,
}

impl PairJson {
    pub fn to_matrices(&self) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let a = self.a.to_matrix()?;
        let b = self.b.to_matrix()?;
        if a.nrows() != b.nrows() {
            return Err(Error::InvalidArgument(
                "matrices a and b have different sizes".into(),
            ));
        }
        Ok((a, b))
    }
}
