//! Adaptive Simpson quadrature.

/// Relative tolerance used for all `∫ w^n` evaluations.
pub const REL_TOL: f64 = 1e-10;
/// Absolute tolerance floor used for all `∫ w^n` evaluations.
pub const ABS_TOL: f64 = 1e-14;

const MAX_DEPTH: u32 = 48;
const MIN_DEPTH: u32 = 2;

/// Integrates `f` over `[a, b]` with adaptive Simpson and Richardson correction.
///
/// Orientation is respected: `b < a` yields the negated integral.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let eps = abs_tol.max(rel_tol * whole.abs());
    recurse(&f, a, b, fa, fm, fb, whole, eps, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    eps: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    let converged = delta.abs() <= 15.0 * eps && MAX_DEPTH - depth >= MIN_DEPTH;
    if depth == 0 || converged {
        return left + right + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn exact_for_cubics() {
        let v = adaptive_simpson(|x| x * x * x - 2.0 * x, 0.0, 3.0, REL_TOL, ABS_TOL);
        assert!((v - (81.0 / 4.0 - 9.0)).abs() < 1e-13);
    }

    #[test]
    fn sine_squared_to_tolerance() {
        let v = adaptive_simpson(|x: f64| x.sin().powi(2), 0.0, PI / 2.0, REL_TOL, ABS_TOL);
        assert!((v - PI / 4.0).abs() < 1e-10 * PI / 4.0);
    }

    #[test]
    fn reversed_interval_negates() {
        let a = adaptive_simpson(f64::exp, 0.0, 1.0, REL_TOL, ABS_TOL);
        let b = adaptive_simpson(f64::exp, 1.0, 0.0, REL_TOL, ABS_TOL);
        assert_eq!(a, -b);
        assert!((a - (1f64.exp() - 1.0)).abs() < 1e-10);
    }
}
