//! Cauchy problems `y' = f(t, y), y(0) = x` in a normed space, integrated by an
//! adaptive Dormand–Prince 5(4) pair with dense output, and the comparison of a
//! vector solution with the solution of a scalar majorant problem
//! `z' = g(t, z), z(0) = ‖x‖`.
//!
//! When `‖f(t, y)‖ ≤ g(|t|, ‖y‖)` and `g` is nondecreasing in `z`, the scalar
//! solution dominates `‖φ(t)‖` and lives no longer than `φ`. [`check_majorization`]
//! samples the hypotheses, integrates both problems and measures both claims.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::liealg::lie_norm;
use crate::quad::{adaptive_simpson, DEFAULT_DEPTH, DEFAULT_TOL};

/// State spaces the integrator can work in.
pub trait NormedSpace: Clone {
    /// `self += s · other`
    fn add_scaled(&mut self, s: f64, other: &Self);
    fn scaled(&self, s: f64) -> Self;
    /// The norm used for domains and majorization (for matrices `‖·‖*`, not nalgebra's Frobenius `norm`).
    fn state_norm(&self) -> f64;
    fn is_finite(&self) -> bool;
    /// Weighted max-norm of a local error estimate, `≤ 1` means acceptable.
    fn error_ratio(err: &Self, y0: &Self, y1: &Self, atol: f64, rtol: f64) -> f64;
}

impl NormedSpace for f64 {
    fn add_scaled(&mut self, s: f64, other: &Self) {
        *self += s * other;
    }

    fn scaled(&self, s: f64) -> Self {
        self * s
    }

    fn state_norm(&self) -> f64 {
        self.abs()
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }

    fn error_ratio(err: &Self, y0: &Self, y1: &Self, atol: f64, rtol: f64) -> f64 {
        err.abs() / (atol + rtol * y0.abs().max(y1.abs()))
    }
}

/// Square matrices under the Lie norm `‖A‖* = 2σ_max(A)`.
impl NormedSpace for DMatrix<f64> {
    fn add_scaled(&mut self, s: f64, other: &Self) {
        *self += other * s;
    }

    fn scaled(&self, s: f64) -> Self {
        self * s
    }

    fn state_norm(&self) -> f64 {
        lie_norm(self)
    }

    fn is_finite(&self) -> bool {
        self.iter().all(|x| x.is_finite())
    }

    fn error_ratio(err: &Self, y0: &Self, y1: &Self, atol: f64, rtol: f64) -> f64 {
        err.iter()
            .zip(y0.iter().zip(y1.iter()))
            .map(|(e, (a, b))| e.abs() / (atol + rtol * a.abs().max(b.abs())))
            .fold(0.0, f64::max)
    }
}

/// `(-T, T) × (a, b)` for scalars, `(-T, T) × D(0, b)` for vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StripDomain {
    pub t_max: f64,
    pub b: f64,
    pub a: f64,
}

impl StripDomain {
    pub fn new(t_max: f64, b: f64, a: f64) -> Result<Self> {
        if !(t_max > 0.0) || !(b > 0.0) || !(a < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "strip needs T > 0, b > 0, a < 0; got T = {t_max}, b = {b}, a = {a}"
            )));
        }
        Ok(StripDomain { t_max, b, a })
    }

    /// Symmetric strip `a = -b`.
    pub fn ball(t_max: f64, b: f64) -> Result<Self> {
        Self::new(t_max, b, -b)
    }

    /// No time or norm restriction.
    pub fn unbounded() -> Self {
        StripDomain {
            t_max: f64::INFINITY,
            b: f64::INFINITY,
            a: f64::NEG_INFINITY,
        }
    }

    fn vector_level(&self, norm: f64) -> f64 {
        if self.b.is_infinite() {
            0.0
        } else {
            norm / self.b
        }
    }

    fn scalar_level(&self, z: f64) -> f64 {
        let upper = if self.b.is_infinite() { 0.0 } else { z / self.b };
        let lower = if self.a.is_infinite() { 0.0 } else { z / self.a };
        upper.max(lower)
    }
}

/// A time-dependent field; `None` marks points where it is undefined.
pub type Field<'a, E> = Box<dyn Fn(f64, &E) -> Option<E> + 'a>;

/// A scalar field `g(t, z)`; `None` marks points where it is undefined.
pub type ScalarField<'a> = Box<dyn Fn(f64, f64) -> Option<f64> + 'a>;

/// `y' = f(t, y), y(0) = x` on `(-T, T) × D(0, b)`.
pub struct VectorProblem<'a, E> {
    pub field: Field<'a, E>,
    pub initial: E,
    pub domain: StripDomain,
    /// Directions used to sample the majorization hypothesis.
    pub probes: Vec<E>,
}

impl<'a, E: NormedSpace + 'a> VectorProblem<'a, E> {
    pub fn new(field: Field<'a, E>, initial: E, domain: StripDomain) -> Self {
        VectorProblem {
            field,
            initial,
            domain,
            probes: Vec::new(),
        }
    }

    pub fn with_probes(mut self, probes: Vec<E>) -> Self {
        self.probes = probes;
        self
    }

    /// The same field with the initial datum moved to the origin: `f(t, y + x)`, `y(0) = 0`.
    pub fn translated(&self) -> VectorProblem<'_, E> {
        let x = self.initial.clone();
        let field = &self.field;
        let b = self.domain.b + self.initial.state_norm();
        VectorProblem {
            field: Box::new(move |t, y: &E| {
                let mut shifted = y.clone();
                shifted.add_scaled(1.0, &x);
                field(t, &shifted)
            }),
            initial: self.initial.scaled(0.0),
            domain: StripDomain {
                b,
                a: -b,
                ..self.domain
            },
            probes: self.probes.clone(),
        }
    }

    /// Largest difference quotient `‖f(t,y+δp) - f(t,y)‖ / ‖δp‖` over the probe samples.
    ///
    /// A cheap spot check of local Lipschitz continuity; the hypothesis itself
    /// cannot be verified from samples.
    pub fn lipschitz_estimate(&self, horizon: f64) -> f64 {
        let dirs = probe_directions(&self.probes, &self.initial);
        let radius = sample_radius(&self.domain, self.initial.state_norm());
        let mut worst: f64 = 0.0;
        for i in 0..6 {
            let t = horizon * i as f64 / 5.0;
            for j in 0..6 {
                let r = radius * j as f64 / 6.0;
                for p in &dirs {
                    for q in &dirs {
                        let y = p.scaled(r);
                        let mut y2 = y.clone();
                        let delta = 1e-6 * r.max(1.0);
                        y2.add_scaled(delta, q);
                        if let (Some(f1), Some(mut f2)) = ((self.field)(t, &y), (self.field)(t, &y2)) {
                            f2.add_scaled(-1.0, &f1);
                            worst = worst.max(f2.state_norm() / delta);
                        }
                    }
                }
            }
        }
        worst
    }
}

/// `z' = g(t, z), z(0) = z0` on `(-T, T) × (a, b)`.
pub struct ScalarMajorant<'a> {
    pub field: ScalarField<'a>,
    pub initial: f64,
    pub domain: StripDomain,
    /// Check that `g` is nondecreasing in `z` before comparing.
    pub monotone: bool,
    /// Require strict domination at interior points.
    pub strict: bool,
}

impl<'a> ScalarMajorant<'a> {
    pub fn new(field: ScalarField<'a>, initial: f64, domain: StripDomain) -> Self {
        ScalarMajorant {
            field,
            initial,
            domain,
            monotone: true,
            strict: false,
        }
    }

    pub fn strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    pub fn monotone(mut self, monotone: bool) -> Self {
        self.monotone = monotone;
        self
    }

    /// `g(t, z + c)` with `z(0) = 0`, the companion of [`VectorProblem::translated`] for `c = ‖x‖`.
    pub fn shifted(&self, c: f64) -> ScalarMajorant<'_> {
        let field = &self.field;
        ScalarMajorant {
            field: Box::new(move |t, z| field(t, z + c)),
            initial: 0.0,
            domain: StripDomain {
                b: self.domain.b + c,
                a: self.domain.a,
                ..self.domain
            },
            monotone: self.monotone,
            strict: self.strict,
        }
    }
}

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ExitReason {
    /// Reached the requested horizon or the strip's `T`.
    Horizon,
    /// The norm reached the strip's bound.
    DomainExit,
    /// The step size collapsed: blow-up or the end of the lifetime.
    StepUnderflow,
}

/// Integrator parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorSettings {
    pub rtol: f64,
    pub atol: f64,
    pub safety: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub max_steps: usize,
    /// Relative margin below the bound that counts as leaving the domain.
    pub exit_margin: f64,
    /// Absolute time resolution of the exit bisection.
    pub exit_time_tol: f64,
    /// A step below `underflow · max(1, |t|)` ends the integration.
    pub underflow: f64,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        IntegratorSettings {
            rtol: 1e-9,
            atol: 1e-12,
            safety: 0.9,
            min_ratio: 0.2,
            max_ratio: 5.0,
            max_steps: 1_000_000,
            exit_margin: 1e-9,
            exit_time_tol: 1e-10,
            underflow: 1e-12,
        }
    }
}

impl IntegratorSettings {
    /// Defaults with `rtol = tol`, `atol = tol / 1000`.
    pub fn with_tol(tol: f64) -> Self {
        IntegratorSettings {
            rtol: tol,
            atol: tol * 1e-3,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
struct DenseStep<E> {
    t0: f64,
    h: f64,
    r: [E; 5],
}

impl<E: NormedSpace> DenseStep<E> {
    fn eval(&self, t: f64) -> E {
        let theta = ((t - self.t0) / self.h).clamp(0.0, 1.0);
        let theta1 = 1.0 - theta;
        // r1 + θ(r2 + (1-θ)(r3 + θ(r4 + (1-θ) r5)))
        let mut acc = self.r[4].scaled(theta1);
        acc.add_scaled(1.0, &self.r[3]);
        let mut acc = acc.scaled(theta);
        acc.add_scaled(1.0, &self.r[2]);
        let mut acc = acc.scaled(theta1);
        acc.add_scaled(1.0, &self.r[1]);
        let mut acc = acc.scaled(theta);
        acc.add_scaled(1.0, &self.r[0]);
        acc
    }
}

/// A numerical solution on `[0, exit)` with dense output between grid points.
#[derive(Debug, Clone)]
pub struct Trajectory<E> {
    pub grid: Vec<f64>,
    pub values: Vec<E>,
    pub exit_reason: ExitReason,
    pub exit_time_estimate: f64,
    /// Integrated in reflected time `s = -t`; `grid` holds `s`.
    pub reversed: bool,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    steps: Vec<DenseStep<E>>,
}

impl<E: NormedSpace> Trajectory<E> {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn initial(&self) -> &E {
        &self.values[0]
    }

    pub fn last_time(&self) -> f64 {
        *self.grid.last().expect("trajectory has at least one point")
    }

    pub fn last_value(&self) -> &E {
        self.values.last().expect("trajectory has at least one point")
    }

    /// Dense-output value at `t ∈ [0, last_time]`.
    pub fn eval(&self, t: f64) -> Option<E> {
        if !(t >= 0.0) || t > self.last_time() {
            return None;
        }
        if self.steps.is_empty() {
            return Some(self.values[0].clone());
        }
        let k = self.grid.partition_point(|&g| g <= t).saturating_sub(1);
        let k = k.min(self.steps.len() - 1);
        if t == self.grid[k] {
            return Some(self.values[k].clone());
        }
        Some(self.steps[k].eval(t))
    }

    pub fn norms(&self) -> Vec<f64> {
        self.values.iter().map(NormedSpace::state_norm).collect()
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A21: f64 = 0.2;
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0];
const A7: [f64; 6] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
const ERR: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// dense output, Hairer's contd5
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

fn combine<E: NormedSpace>(y: &E, h: f64, coeffs: &[f64], k: &[E]) -> E {
    let mut out = y.clone();
    for (c, ki) in coeffs.iter().zip(k) {
        if *c != 0.0 {
            out.add_scaled(h * c, ki);
        }
    }
    out
}

enum StepOutcome<E> {
    Accepted { y1: E, k7: E, err: f64, r: [E; 5] },
    Rejected { err: f64 },
}

fn try_step<E: NormedSpace>(
    f: &dyn Fn(f64, &E) -> Option<E>,
    t: f64,
    y0: &E,
    k1: &E,
    h: f64,
    s: &IntegratorSettings,
) -> StepOutcome<E> {
    let rejected = StepOutcome::Rejected { err: f64::INFINITY };
    let mut k: Vec<E> = Vec::with_capacity(7);
    k.push(k1.clone());
    let rows: [&[f64]; 5] = [&[A21], &A3, &A4, &A5, &A6];
    for (stage, row) in rows.iter().enumerate() {
        let y = combine(y0, h, row, &k);
        match f(t + C[stage + 1] * h, &y) {
            Some(ks) if ks.is_finite() => k.push(ks),
            _ => return rejected,
        }
    }
    let y1 = combine(y0, h, &A7, &k);
    if !y1.is_finite() {
        return rejected;
    }
    let k7 = match f(t + h, &y1) {
        Some(k7) if k7.is_finite() => k7,
        _ => return rejected,
    };
    k.push(k7);
    let zero = y0.scaled(0.0);
    let err_vec = combine(&zero, h, &ERR, &k);
    let err = E::error_ratio(&err_vec, y0, &y1, s.atol, s.rtol);
    if !err.is_finite() || err > 1.0 {
        return StepOutcome::Rejected { err };
    }
    let mut ydiff = y1.clone();
    ydiff.add_scaled(-1.0, y0);
    let mut bspl = k[0].scaled(h);
    bspl.add_scaled(-1.0, &ydiff);
    let mut r4 = ydiff.clone();
    r4.add_scaled(-h, &k[6]);
    r4.add_scaled(-1.0, &bspl);
    let r5 = combine(&zero, h, &D, &k);
    let k7 = k.pop().expect("seven stages");
    StepOutcome::Accepted {
        y1,
        k7,
        err,
        r: [y0.clone(), ydiff, bspl, r4, r5],
    }
}

fn integrate<E: NormedSpace>(
    f: &dyn Fn(f64, &E) -> Option<E>,
    initial: E,
    level: &dyn Fn(&E) -> f64,
    horizon: f64,
    s: &IntegratorSettings,
) -> Result<Trajectory<E>> {
    if !(horizon >= 0.0) {
        return Err(Error::InvalidArgument(format!("horizon must be nonnegative, got {horizon}")));
    }
    let threshold = 1.0 - s.exit_margin;
    let mut traj = Trajectory {
        grid: vec![0.0],
        values: vec![initial.clone()],
        exit_reason: ExitReason::Horizon,
        exit_time_estimate: horizon,
        reversed: false,
        accepted_steps: 0,
        rejected_steps: 0,
        steps: Vec::new(),
    };
    if horizon == 0.0 {
        traj.exit_time_estimate = 0.0;
        return Ok(traj);
    }
    let mut k1 = f(0.0, &initial)
        .filter(NormedSpace::is_finite)
        .ok_or_else(|| Error::IntegrationFailure("field undefined at the initial point".into()))?;
    let mut t = 0.0;
    let mut y = initial;

    let d0 = y.state_norm();
    let d1 = k1.state_norm();
    let mut h = if d0 > 1e-5 && d1 > 1e-5 { 0.01 * d0 / d1 } else { 1e-6 };
    h = h.min(horizon);
    let mut last_rejected = false;

    loop {
        if horizon - t <= 1e-14 * t.abs().max(1.0) {
            traj.exit_reason = ExitReason::Horizon;
            traj.exit_time_estimate = t;
            return Ok(traj);
        }
        if h < s.underflow * t.abs().max(1.0) {
            traj.exit_reason = ExitReason::StepUnderflow;
            traj.exit_time_estimate = t;
            return Ok(traj);
        }
        if traj.accepted_steps + traj.rejected_steps >= s.max_steps {
            return Err(Error::IntegrationFailure(format!(
                "step budget {} exhausted at t = {t}",
                s.max_steps
            )));
        }
        let h_try = h.min(horizon - t);
        match try_step(f, t, &y, &k1, h_try, s) {
            StepOutcome::Rejected { err } => {
                traj.rejected_steps += 1;
                let fac = if err.is_finite() {
                    (s.safety * err.powf(-0.2)).max(s.min_ratio)
                } else {
                    0.5
                };
                h = h_try * fac.min(1.0);
                last_rejected = true;
            }
            StepOutcome::Accepted { y1, k7, err, r } => {
                traj.accepted_steps += 1;
                let step = DenseStep { t0: t, h: h_try, r };
                let t1 = if h_try == horizon - t { horizon } else { t + h_try };
                if level(&y1) >= threshold {
                    // bisect the crossing inside this step on the dense output
                    let (mut lo, mut hi) = (t, t1);
                    while hi - lo > s.exit_time_tol {
                        let mid = 0.5 * (lo + hi);
                        if level(&step.eval(mid)) >= threshold {
                            hi = mid;
                        } else {
                            lo = mid;
                        }
                    }
                    let y_exit = if hi == t1 { y1 } else { step.eval(hi) };
                    traj.grid.push(hi);
                    traj.values.push(y_exit);
                    traj.steps.push(step);
                    traj.exit_reason = ExitReason::DomainExit;
                    traj.exit_time_estimate = hi;
                    return Ok(traj);
                }
                traj.grid.push(t1);
                traj.values.push(y1.clone());
                traj.steps.push(step);
                t = t1;
                y = y1;
                k1 = k7;
                let mut fac = if err == 0.0 {
                    s.max_ratio
                } else {
                    (s.safety * err.powf(-0.2)).clamp(s.min_ratio, s.max_ratio)
                };
                if last_rejected {
                    fac = fac.min(1.0);
                }
                h = h_try * fac;
                last_rejected = false;
            }
        }
    }
}

/// Integrates a vector problem with `rtol = tol`, `atol = tol / 1000`.
pub fn integrate_vector<E: NormedSpace>(p: &VectorProblem<'_, E>, horizon: f64, tol: f64) -> Result<Trajectory<E>> {
    integrate_vector_with(p, horizon, &IntegratorSettings::with_tol(tol))
}

pub fn integrate_vector_with<E: NormedSpace>(
    p: &VectorProblem<'_, E>,
    horizon: f64,
    settings: &IntegratorSettings,
) -> Result<Trajectory<E>> {
    let norm = p.initial.state_norm();
    if !(norm < p.domain.b) {
        return Err(Error::BadInitial {
            norm,
            bound: p.domain.b,
        });
    }
    let domain = p.domain;
    let level = move |y: &E| domain.vector_level(y.state_norm());
    integrate(&*p.field, p.initial.clone(), &level, horizon.min(domain.t_max), settings)
}

/// Integrates a scalar problem with `rtol = tol`, `atol = tol / 1000`.
pub fn integrate_scalar(g: &ScalarMajorant<'_>, horizon: f64, tol: f64) -> Result<Trajectory<f64>> {
    integrate_scalar_with(g, horizon, &IntegratorSettings::with_tol(tol))
}

pub fn integrate_scalar_with(
    g: &ScalarMajorant<'_>,
    horizon: f64,
    settings: &IntegratorSettings,
) -> Result<Trajectory<f64>> {
    let z0 = g.initial;
    if !(z0 >= 0.0 && z0 < g.domain.b) {
        return Err(Error::BadInitial {
            norm: z0,
            bound: g.domain.b,
        });
    }
    let domain = g.domain;
    let level = move |z: &f64| domain.scalar_level(*z);
    let field = |t: f64, z: &f64| (g.field)(t, *z);
    integrate(&field, z0, &level, horizon.min(domain.t_max), settings)
}

/// `∫_{z0}^{z_max} du / g(u)`, the exit time of the autonomous problem `z' = g(z)`.
///
/// Points where `g` is infinite contribute zero, so a field with a pole at
/// `z_max` can be passed directly.
pub fn separable_exit_time<G: Fn(f64) -> f64>(g: G, z0: f64, z_max: f64) -> Result<f64> {
    if !(z_max > z0) {
        return Err(Error::InvalidArgument(format!("need z_max > z0, got {z0} and {z_max}")));
    }
    const SAMPLES: usize = 1000;
    for k in 0..SAMPLES {
        let z = if z_max.is_finite() {
            z0 + (z_max - z0) * k as f64 / SAMPLES as f64
        } else {
            z0 + k as f64
        };
        let v = g(z);
        if !(v > 0.0) {
            return Err(Error::NonPositiveField { at: z, value: v });
        }
    }
    let inv = |u: f64| {
        let v = g(u);
        if v.is_finite() {
            1.0 / v
        } else {
            0.0
        }
    };
    if z_max.is_finite() {
        return Ok(adaptive_simpson(inv, z0, z_max, DEFAULT_TOL, DEFAULT_DEPTH).value);
    }
    // an infinite upper limit is mapped onto [0, 1) by u = z0 + s/(1-s)
    let mapped = |s: f64| {
        if s >= 1.0 {
            return 0.0;
        }
        let u = z0 + s / (1.0 - s);
        inv(u) / ((1.0 - s) * (1.0 - s))
    };
    Ok(adaptive_simpson(mapped, 0.0, 1.0, DEFAULT_TOL, DEFAULT_DEPTH).value)
}

/// Options for [`check_majorization_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonOptions {
    /// Allowed excess `‖φ‖ - ψ` on the shared grid.
    pub tol: f64,
    /// Allowed excess of the scalar exit time over the vector one.
    pub lifetime_slack: f64,
    pub integrator: IntegratorSettings,
    /// Compare on `(-β̃, 0]` by integrating `f̂(s, y) = -f(-s, y)` forward.
    pub reverse_time: bool,
    /// Points per axis of the (t, ‖y‖) sampling grid for the hypotheses.
    pub sample_points: usize,
}

impl ComparisonOptions {
    pub fn new(tol: f64) -> Self {
        ComparisonOptions {
            tol,
            lifetime_slack: tol,
            integrator: IntegratorSettings::default(),
            reverse_time: false,
            sample_points: 30,
        }
    }

    pub fn with_lifetime_slack(mut self, slack: f64) -> Self {
        self.lifetime_slack = slack;
        self
    }

    pub fn reversed(mut self) -> Self {
        self.reverse_time = true;
        self
    }
}

/// `(t, ‖φ(t)‖, ψ(t))` on the shared comparison grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub t: f64,
    pub norm_phi: f64,
    pub psi: f64,
}

/// Outcome of a majorization run.
#[derive(Debug, Clone)]
pub struct MajorizationReport<E> {
    pub vector: Trajectory<E>,
    pub scalar: Trajectory<f64>,
    pub rows: Vec<ComparisonRow>,
    /// `max (‖φ(t_k)‖ - ψ(t_k))` over the shared grid.
    pub max_excess: f64,
    /// `min (ψ(t_k) - ‖φ(t_k)‖)` over grid points with `t_k > 0`.
    pub min_interior_gap: f64,
    pub dominated: bool,
    pub lifetime_ordered: bool,
    /// `Some` only for a strict majorant.
    pub strictly_dominated: Option<bool>,
    pub samples_checked: usize,
    pub lipschitz_estimate: f64,
    pub passed: bool,
}

impl<E> MajorizationReport<E> {
    pub fn vector_exit(&self) -> f64 {
        self.vector.exit_time_estimate
    }

    pub fn scalar_exit(&self) -> f64 {
        self.scalar.exit_time_estimate
    }
}

fn probe_directions<E: NormedSpace>(probes: &[E], initial: &E) -> Vec<E> {
    let mut dirs: Vec<E> = probes
        .iter()
        .filter(|p| p.state_norm() > 0.0)
        .map(|p| p.scaled(1.0 / p.state_norm()))
        .collect();
    if dirs.is_empty() && initial.state_norm() > 0.0 {
        dirs.push(initial.scaled(1.0 / initial.state_norm()));
    }
    dirs
}

fn sample_radius(domain: &StripDomain, initial_norm: f64) -> f64 {
    if domain.b.is_finite() {
        domain.b
    } else {
        10.0 * initial_norm.max(1.0)
    }
}

fn majorizes(norm_f: f64, g: f64, strict: bool) -> bool {
    let slack = 1e-12 * g.abs().max(1.0);
    if strict {
        norm_f < g + slack
    } else {
        norm_f <= g + slack
    }
}

/// Samples the hypotheses on a `(t, ‖y‖)` grid along the probe directions.
fn sample_hypotheses<E: NormedSpace>(
    f: &dyn Fn(f64, &E) -> Option<E>,
    vp: &VectorProblem<'_, E>,
    sm: &ScalarMajorant<'_>,
    horizon: f64,
    n: usize,
) -> Result<usize> {
    let dirs = probe_directions(&vp.probes, &vp.initial);
    let radius = sample_radius(&vp.domain, vp.initial.state_norm());
    let mut checked = 0;
    for i in 0..n {
        let t = if n > 1 { horizon * i as f64 / (n - 1) as f64 } else { 0.0 };
        let mut previous: Option<(f64, f64)> = None;
        for j in 0..n {
            let r = radius * j as f64 / n as f64;
            let Some(g) = (sm.field)(t, r) else { continue };
            if sm.monotone {
                if let Some((r_prev, g_prev)) = previous {
                    if g < g_prev - 1e-12 * g_prev.abs().max(1.0) {
                        return Err(Error::MajorantViolation {
                            t,
                            norm_y: r,
                            norm_f: g_prev,
                            g,
                        });
                    }
                    let _ = r_prev;
                }
                previous = Some((r, g));
            }
            for d in &dirs {
                let y = d.scaled(r);
                let Some(fy) = f(t, &y) else { continue };
                let norm_f = fy.state_norm();
                checked += 1;
                if !majorizes(norm_f, g, sm.strict) {
                    return Err(Error::MajorantViolation {
                        t,
                        norm_y: r,
                        norm_f,
                        g,
                    });
                }
            }
        }
    }
    Ok(checked)
}

/// [`check_majorization_with`] with default integrator settings.
pub fn check_majorization<E: NormedSpace>(
    vp: &VectorProblem<'_, E>,
    sm: &ScalarMajorant<'_>,
    horizon: f64,
    tol: f64,
) -> Result<MajorizationReport<E>> {
    check_majorization_with(vp, sm, horizon, &ComparisonOptions::new(tol))
}

/// Samples the majorization hypotheses, integrates both problems to `horizon`
/// and compares them on the union of their grids.
///
/// A sampled violation of `‖f(t,y)‖ ≤ g(|t|,‖y‖)` (or of the monotonicity of
/// `g`) aborts with [`Error::MajorantViolation`]: the inputs are wrong, and no
/// comparison would mean anything.
pub fn check_majorization_with<E: NormedSpace>(
    vp: &VectorProblem<'_, E>,
    sm: &ScalarMajorant<'_>,
    horizon: f64,
    opts: &ComparisonOptions,
) -> Result<MajorizationReport<E>> {
    let norm_x = vp.initial.state_norm();
    if !(norm_x < vp.domain.b) {
        return Err(Error::BadInitial {
            norm: norm_x,
            bound: vp.domain.b,
        });
    }
    if sm.initial < norm_x - 1e-12 * norm_x.max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "scalar initial value {} is below ‖x‖ = {norm_x}",
            sm.initial
        )));
    }
    let horizon = horizon.min(vp.domain.t_max).min(sm.domain.t_max);

    let original = &vp.field;
    let reflected = move |s: f64, y: &E| original(-s, y).map(|v| v.scaled(-1.0));
    let f: &dyn Fn(f64, &E) -> Option<E> = if opts.reverse_time { &reflected } else { &**original };
    // g depends on |t|, so the scalar side is unchanged under reflection

    let samples_checked = sample_hypotheses(f, vp, sm, horizon, opts.sample_points)?;
    let lipschitz_estimate = vp.lipschitz_estimate(horizon);

    let domain = vp.domain;
    let level = move |y: &E| domain.vector_level(y.state_norm());
    let mut vector = integrate(f, vp.initial.clone(), &level, horizon, &opts.integrator)?;
    vector.reversed = opts.reverse_time;
    let mut scalar = integrate_scalar_with(sm, horizon, &opts.integrator)?;
    scalar.reversed = opts.reverse_time;

    // the hypothesis along the computed trajectory itself
    for (t, y) in vector.grid.iter().zip(&vector.values) {
        let norm_y = y.state_norm();
        if let (Some(fy), Some(g)) = (f(*t, y), (sm.field)(*t, norm_y)) {
            let norm_f = fy.state_norm();
            if !majorizes(norm_f, g, sm.strict) {
                return Err(Error::MajorantViolation {
                    t: *t,
                    norm_y,
                    norm_f,
                    g,
                });
            }
        }
    }

    let t_end = vector.last_time().min(scalar.last_time());
    let mut times: Vec<f64> = vector
        .grid
        .iter()
        .chain(scalar.grid.iter())
        .copied()
        .filter(|&t| t <= t_end)
        .collect();
    times.sort_by(f64::total_cmp);
    times.dedup();

    let mut rows = Vec::with_capacity(times.len());
    let mut max_excess = f64::NEG_INFINITY;
    let mut min_interior_gap = f64::INFINITY;
    for t in times {
        let (Some(phi), Some(psi)) = (vector.eval(t), scalar.eval(t)) else {
            continue;
        };
        let norm_phi = phi.state_norm();
        max_excess = max_excess.max(norm_phi - psi);
        if t > 0.0 {
            min_interior_gap = min_interior_gap.min(psi - norm_phi);
        }
        rows.push(ComparisonRow { t, norm_phi, psi });
    }

    let dominated = max_excess <= opts.tol;
    let lifetime_ordered = scalar.exit_time_estimate <= vector.exit_time_estimate + opts.lifetime_slack;
    let strictly_dominated = sm.strict.then_some(min_interior_gap > 0.0);
    let passed = dominated && lifetime_ordered && strictly_dominated.unwrap_or(true);
    Ok(MajorizationReport {
        vector,
        scalar,
        rows,
        max_excess,
        min_interior_gap,
        dominated,
        lifetime_ordered,
        strictly_dominated,
        samples_checked,
        lipschitz_estimate,
        passed,
    })
}

/// Subintervals per integration step used by [`volterra_residual`].
const VOLTERRA_PANELS: usize = 8;

/// `max_k ‖y(t_k) - x - ∫_0^{t_k} f(u, y(u)) du‖ / max(1, ‖y(t_k)‖)`.
///
/// The integral is composite Simpson on each step, fed by the dense output.
/// Where the field is undefined the accumulation stops and the residual so far
/// is returned.
pub fn volterra_residual<E: NormedSpace>(traj: &Trajectory<E>, field: &dyn Fn(f64, &E) -> Option<E>) -> f64 {
    let reflected = |s: f64, y: &E| field(-s, y).map(|v| v.scaled(-1.0));
    let f: &dyn Fn(f64, &E) -> Option<E> = if traj.reversed { &reflected } else { field };
    let x = traj.initial();
    let mut integral = x.scaled(0.0);
    let mut worst: f64 = 0.0;
    for k in 0..traj.steps.len() {
        let (t0, t1) = (traj.grid[k], traj.grid[k + 1]);
        let h = (t1 - t0) / (2 * VOLTERRA_PANELS) as f64;
        let mut acc = x.scaled(0.0);
        for m in 0..=2 * VOLTERRA_PANELS {
            let u = if m == 2 * VOLTERRA_PANELS { t1 } else { t0 + m as f64 * h };
            let y = if m == 0 {
                traj.values[k].clone()
            } else if m == 2 * VOLTERRA_PANELS {
                traj.values[k + 1].clone()
            } else {
                traj.steps[k].eval(u)
            };
            let Some(fu) = f(u, &y) else { return worst };
            let w = if m == 0 || m == 2 * VOLTERRA_PANELS {
                1.0
            } else if m % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc.add_scaled(w, &fu);
        }
        integral.add_scaled(h / 3.0, &acc);
        let mut r = traj.values[k + 1].clone();
        r.add_scaled(-1.0, x);
        r.add_scaled(-1.0, &integral);
        worst = worst.max(r.state_norm() / traj.values[k + 1].state_norm().max(1.0));
    }
    worst
}

/// `y' = cos(t) A y + C` on matrices with its majorant `g(t, z) = (‖A‖*/2) z + ‖C‖*`.
///
/// Left multiplication by `A` has operator norm `σ_max(A) = ‖A‖*/2` in `‖·‖*`.
pub fn linear_matrix_problem(
    a: DMatrix<f64>,
    c: DMatrix<f64>,
    x: DMatrix<f64>,
) -> (VectorProblem<'static, DMatrix<f64>>, ScalarMajorant<'static>) {
    let lip = 0.5 * lie_norm(&a);
    let shift = lie_norm(&c);
    let norm_x = lie_norm(&x);
    let n = a.nrows();
    let probes = vec![x.clone(), c.clone(), a.clone(), DMatrix::identity(n, n)];
    let field: Field<'static, DMatrix<f64>> = Box::new(move |t, y| Some(&a * y * t.cos() + &c));
    let vp = VectorProblem::new(field, x, StripDomain::unbounded()).with_probes(probes);
    let sm = ScalarMajorant::new(Box::new(move |_, z| Some(lip * z + shift)), norm_x, StripDomain::unbounded());
    (vp, sm)
}
