//! Statistical test helpers used by sampler-exactness and equivalence tests:
//! Kolmogorov–Smirnov statistics with asymptotic critical values, and the
//! chi-square survival function for uniformity tests.

/// Sorts a sample in place and returns it (convenience for test pipelines).
pub fn sorted(mut xs: Vec<f64>) -> Vec<f64> {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs
}

/// One-sample KS statistic `sup |F_n - F|` against a continuous CDF.
/// `sample` must be sorted ascending.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let n = sample.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sample.iter().enumerate() {
        let f = cdf(x);
        let hi = (i as f64 + 1.0) / n - f;
        let lo = f - i as f64 / n;
        d = d.max(hi).max(lo);
    }
    d
}

/// Two-sample KS statistic; both samples must be sorted ascending.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (n, m) = (a.len(), b.len());
    let mut i = 0;
    let mut j = 0;
    let mut d: f64 = 0.0;
    while i < n && j < m {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        let diff = (i as f64 / n as f64 - j as f64 / m as f64).abs();
        d = d.max(diff);
    }
    d
}

/// Asymptotic one-sample KS critical value at significance `alpha`.
pub fn ks_critical_one(alpha: f64, n: usize) -> f64 {
    ks_c(alpha) / (n as f64).sqrt()
}

/// Asymptotic two-sample KS critical value at significance `alpha`.
pub fn ks_critical_two(alpha: f64, n: usize, m: usize) -> f64 {
    ks_c(alpha) * ((n + m) as f64 / (n as f64 * m as f64)).sqrt()
}

fn ks_c(alpha: f64) -> f64 {
    (-0.5 * (alpha / 2.0).ln()).sqrt()
}

/// Pearson chi-square statistic for observed counts against expected counts.
pub fn chi_square_statistic(observed: &[u64], expected: &[f64]) -> f64 {
    assert_eq!(observed.len(), expected.len());
    observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| {
            let d = o as f64 - e;
            d * d / e
        })
        .sum()
}

/// Survival function of the chi-square distribution with `df` degrees of
/// freedom: `P{X > x}`. Only integer `df` is needed here, which keeps the
/// gamma-function evaluation exact (recursion from `Γ(1)` or `Γ(1/2)`).
pub fn chi_square_sf(x: f64, df: u32) -> f64 {
    assert!(df >= 1);
    if x <= 0.0 {
        return 1.0;
    }
    gamma_q(df as f64 / 2.0, x / 2.0)
}

/// ln Γ(a) for a positive half-integer `a`.
fn ln_gamma_half_integer(a: f64) -> f64 {
    let twice = (2.0 * a).round() as i64;
    assert!(
        twice as f64 == 2.0 * a && twice >= 1,
        "half-integer argument expected, got {a}"
    );
    let mut acc = 0.0;
    let mut z = a;
    while z > 1.5 {
        z -= 1.0;
        acc += z.ln();
    }
    // z is now 1 or 1/2.
    if (z - 0.5).abs() < 1e-12 {
        acc + 0.5 * std::f64::consts::PI.ln()
    } else {
        acc
    }
}

/// Regularized upper incomplete gamma Q(a, x) for half-integer a.
fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_contfrac(a, x)
    }
}

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let ln_ga = ln_gamma_half_integer(a);
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..500 {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * 1e-16 {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_ga).exp()
}

fn gamma_q_contfrac(a: f64, x: f64) -> f64 {
    let ln_ga = ln_gamma_half_integer(a);
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-x + a * x.ln() - ln_ga).exp()
}

/// Sample mean.
pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance (n - 1 denominator).
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamRng;

    #[test]
    fn ks_accepts_true_distribution() {
        let mut rng = StreamRng::new(11, 0);
        let sample = sorted((0..50_000).map(|_| rng.exp(2.0)).collect());
        let d = ks_statistic(&sample, |x| 1.0 - (-2.0 * x).exp());
        assert!(d < ks_critical_one(0.001, sample.len()), "d = {d}");
    }

    #[test]
    fn ks_rejects_wrong_rate() {
        let mut rng = StreamRng::new(11, 1);
        let sample = sorted((0..50_000).map(|_| rng.exp(2.0)).collect());
        let d = ks_statistic(&sample, |x| 1.0 - (-1.8_f64 * x).exp());
        assert!(d > ks_critical_one(0.001, sample.len()), "d = {d}");
    }

    #[test]
    fn ks_two_sample_same_law() {
        let mut rng = StreamRng::new(5, 0);
        let a = sorted((0..30_000).map(|_| rng.uniform()).collect());
        let b = sorted((0..30_000).map(|_| rng.uniform()).collect());
        let d = ks_two_sample(&a, &b);
        assert!(d < ks_critical_two(0.001, a.len(), b.len()), "d = {d}");
    }

    #[test]
    fn chi_square_sf_reference_values() {
        // P{X > x} for df = 2 is exp(-x/2): exact reference.
        for &x in &[0.5, 1.0, 3.0, 10.0] {
            let exact = (-x / 2.0_f64).exp();
            assert!((chi_square_sf(x, 2) - exact).abs() < 1e-12);
        }
        // df = 1: 2 * (1 - Phi(sqrt(x))); spot value at x = 3.841 is ~0.05.
        let p = chi_square_sf(3.841_458_820_694_124, 1);
        assert!((p - 0.05).abs() < 1e-6, "p = {p}");
        // df = 11 quantile at 0.01 is 24.725 (standard table value).
        let p = chi_square_sf(24.725, 11);
        assert!((p - 0.01).abs() < 2e-5, "p = {p}");
    }

    #[test]
    fn chi_square_uniform_counts_not_rejected() {
        let mut rng = StreamRng::new(99, 0);
        let mut counts = [0u64; 12];
        let n = 120_000;
        for _ in 0..n {
            counts[rng.below(12)] += 1;
        }
        let expected: Vec<f64> = vec![n as f64 / 12.0; 12];
        let stat = chi_square_statistic(&counts, &expected);
        assert!(chi_square_sf(stat, 11) > 0.01, "stat = {stat}");
    }
}
