//! Small numerical toolbox: adaptive quadrature, bracketed root finding and
//! one-dimensional minimization. Enough for the closed-form verifications;
//! no general-purpose ambitions.

use crate::error::{GrowthError, Result};

/// Adaptive Simpson quadrature with Richardson correction.
///
/// Refines until the local error estimate `|S_2 - S_1| / 15` is below the
/// interval's share of `abs_tol`. Integrands here are piecewise analytic, so
/// convergence is fast away from isolated square-root kinks, which the
/// recursion depth cap still handles.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, abs_tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
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
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Integrates across a list of interior breakpoints, so that kinks or jumps
/// of the integrand land on subinterval boundaries.
pub fn integrate_piecewise<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    abs_tol: f64,
) -> f64 {
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|x| *x > a && *x < b)
        .collect();
    cuts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    cuts.dedup();
    let mut total = 0.0;
    let mut lo = a;
    let n = cuts.len() + 1;
    let per = abs_tol / n as f64;
    for hi in cuts.into_iter().chain(std::iter::once(b)) {
        total += integrate(f, lo, hi, per);
        lo = hi;
    }
    total
}

/// Bisection on a sign change. Returns the midpoint of the final bracket.
pub fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, x_tol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(GrowthError::Numerical(format!(
            "bisect: no sign change on [{lo}, {hi}] (f(lo)={flo}, f(hi)={fhi})"
        )));
    }
    while hi - lo > x_tol {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fmid = f(mid);
        if fmid == 0.0 {
            return Ok(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimization on `[lo, hi]`, assuming unimodality there.
pub fn golden_min<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, x_tol: f64) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > x_tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Global scan followed by golden-section polish; for objectives that are
/// smooth but not unimodal over the search interval.
pub fn scan_min<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, cells: usize, x_tol: f64) -> (f64, f64) {
    debug_assert!(cells >= 2);
    let h = (hi - lo) / cells as f64;
    let mut best_i = 0;
    let mut best = f64::INFINITY;
    for i in 0..=cells {
        let v = f(lo + h * i as f64);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let a = lo + h * best_i.saturating_sub(1) as f64;
    let b = (lo + h * (best_i + 1) as f64).min(hi);
    golden_min(f, a, b, x_tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomial_exactly() {
        // Simpson is exact on cubics; the adaptive wrapper must not spoil it.
        let v = integrate(&|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, 1e-13);
        assert!((v - (4.0 - 4.0 + 2.0)).abs() < 1e-12, "{v}");
    }

    #[test]
    fn integrates_transcendental_to_tolerance() {
        let v = integrate(&f64::exp, 0.0, 1.0, 1e-12);
        assert!((v - (std::f64::consts::E - 1.0)).abs() < 1e-11, "{v}");
    }

    #[test]
    fn piecewise_handles_jumps() {
        let f = |x: f64| if x < 0.3 { 2.0 } else { 1.0 };
        let v = integrate_piecewise(&f, 0.0, 1.0, &[0.3], 1e-12);
        assert!((v - 1.3).abs() < 1e-12, "{v}");
    }

    #[test]
    fn bisect_finds_root() {
        let r = bisect(&|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-12);
        assert!(bisect(&|x| x * x + 1.0, 0.0, 2.0, 1e-14).is_err());
    }

    #[test]
    fn golden_min_quadratic() {
        let (x, fx) = golden_min(&|x| (x - 1.25) * (x - 1.25) + 0.5, 0.0, 3.0, 1e-12);
        assert!((x - 1.25).abs() < 1e-9);
        assert!((fx - 0.5).abs() < 1e-12);
    }

    #[test]
    fn scan_min_skips_local_max() {
        // Rises to a hump then dips; plain golden section from the full
        // bracket could latch onto the wrong side.
        let f = |x: f64| -(x - 0.2) * (x - 0.2) * ((x - 2.0) * (x - 2.0) - 0.5);
        let (x, _) = scan_min(&f, 0.0, 4.0, 200, 1e-12);
        assert!(x > 1.0, "x {x}");
    }
}
