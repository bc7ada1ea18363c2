//! Adaptive Simpson quadrature.

/// Integral value with the accumulated Richardson error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Default absolute tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Default recursion depth cap.
pub const DEFAULT_DEPTH: usize = 60;

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
}

/// `∫_a^b f` by adaptive Simpson with an explicit interval stack.
///
/// Each split halves the local tolerance. A panel is accepted when
/// `|S_left + S_right - S_whole| ≤ 15·tol`, when its tolerance falls under the
/// rounding level of its own value, or at the depth cap.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, max_depth: usize) -> Quadrature {
    if a == b {
        return Quadrature {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        };
    }
    if b < a {
        let q = adaptive_simpson(f, b, a, tol, max_depth);
        return Quadrature {
            value: -q.value,
            ..q
        };
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let mut evaluations = 3;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);

    let mut stack = vec![Panel {
        a,
        b,
        fa,
        fm,
        fb,
        whole,
        tol,
        depth: 0,
    }];
    let mut value = 0.0;
    let mut error = 0.0;
    while let Some(p) = stack.pop() {
        let m = 0.5 * (p.a + p.b);
        let lm = 0.5 * (p.a + m);
        let rm = 0.5 * (m + p.b);
        let flm = f(lm);
        let frm = f(rm);
        evaluations += 2;
        let left = (m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
        let right = (p.b - m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
        let delta = left + right - p.whole;
        let rounding = 1e-15 * (left.abs() + right.abs());
        if delta.abs() <= 15.0 * p.tol.max(rounding) || p.depth >= max_depth {
            value += left + right + delta / 15.0;
            error += delta.abs() / 15.0;
            continue;
        }
        stack.push(Panel {
            a: m,
            b: p.b,
            fa: p.fm,
            fm: frm,
            fb: p.fb,
            whole: right,
            tol: 0.5 * p.tol,
            depth: p.depth + 1,
        });
        stack.push(Panel {
            a: p.a,
            b: m,
            fa: p.fa,
            fm: flm,
            fb: p.fm,
            whole: left,
            tol: 0.5 * p.tol,
            depth: p.depth + 1,
        });
    }
    Quadrature {
        value,
        error,
        evaluations,
    }
}

/// Composite Simpson on `n` (rounded up to even) uniform panels.
pub fn composite_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = if n % 2 == 1 { n + 1 } else { n.max(2) };
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_up_to_cubic_are_exact() {
        let q = adaptive_simpson(|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 1e-12, 60);
        assert!((q.value - 2.0).abs() < 1e-14);
        assert!((composite_simpson(|x| x * x, 0.0, 3.0, 2) - 9.0).abs() < 1e-14);
    }

    #[test]
    fn smooth_integrals() {
        let q = adaptive_simpson(f64::sin, 0.0, std::f64::consts::PI, 1e-10, 60);
        assert!((q.value - 2.0).abs() < 1e-10);
        let q = adaptive_simpson(f64::exp, 1.0, 0.0, 1e-10, 60);
        assert!((q.value + (1f64.exp() - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn long_interval_with_peaked_integrand() {
        let q = adaptive_simpson(|u| 1.0 / (u * u), 1.0, 1e8, 1e-10, 60);
        assert!((q.value - (1.0 - 1e-8)).abs() < 1e-8, "{q:?}");
    }
}
