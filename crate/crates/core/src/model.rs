//! Configurations, birth-rate kernels, and rate evaluation.
//!
//! A kernel describes the birth rate `b(x, η)` with enough structure for
//! exact sampling: every family here is built from radial step profiles (or a
//! truncated lattice power law), so the induced rate is piecewise constant in
//! the location. Four families are supported:
//!
//! * `TruncatedIndicator` — `min(k, #{y ∈ η : |x-y| <= radius})`
//! * `FreeIndicator`      — the same count without the cap (free branching)
//! * `Sum`                — `min(k, λ Σ f(|x-y|))` for a nonincreasing step
//!   profile `f` with compact support; the cap is optional
//! * `DiscretePowerLaw`   — lattice-only `min(k, Σ a_pow(x-y))` with
//!   `a_pow(x) = c_pow / (|x|+1)^α`, `a_pow(0) = 2 c_pow`, truncated at a
//!   radius where the discarded tail mass is below `1e-9`

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{GrowthError, Result};
use crate::profile::Profile1d;
use crate::rng::StreamRng;

/// Tail mass allowed to be discarded when truncating the power-law kernel.
pub const POWERLAW_TAIL_MASS: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Radial step profiles
// ---------------------------------------------------------------------------

/// A nonincreasing nonnegative step function of the distance, with compact
/// support: value `values[j]` on `[radii[j-1], radii[j])` (with `radii[-1]`
/// read as 0), zero from the last radius on.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFn {
    radii: Vec<f64>,
    values: Vec<f64>,
}

impl StepFn {
    pub fn new(radii: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if radii.is_empty() || radii.len() != values.len() {
            return Err(GrowthError::invalid(
                "step profile needs matching nonempty radius/value lists",
            ));
        }
        let mut prev = 0.0;
        for &r in &radii {
            if !(r > prev) || !r.is_finite() {
                return Err(GrowthError::invalid("step radii must increase from 0"));
            }
            prev = r;
        }
        let mut prev_v = f64::INFINITY;
        for &v in &values {
            if !(v >= 0.0) || !v.is_finite() || v > prev_v {
                return Err(GrowthError::invalid(
                    "step values must be nonnegative and nonincreasing",
                ));
            }
            prev_v = v;
        }
        if *values.last().unwrap() <= 0.0 {
            return Err(GrowthError::invalid("outermost step value must be positive"));
        }
        Ok(Self { radii, values })
    }

    /// The unit indicator of `[0, radius]`.
    pub fn indicator(radius: f64) -> Result<Self> {
        Self::new(vec![radius], vec![1.0])
    }

    /// Value at distance `d >= 0`.
    pub fn eval(&self, d: f64) -> f64 {
        // Support is treated as the closed ball: f(support) is the last value,
        // matching `|x-y| <= radius` in the indicator families.
        for (r, v) in self.radii.iter().zip(&self.values) {
            if d <= *r {
                return *v;
            }
        }
        0.0
    }

    pub fn support(&self) -> f64 {
        *self.radii.last().unwrap()
    }

    pub fn steps(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.radii.iter().copied().zip(self.values.iter().copied())
    }

    /// Peak value `f(0)`.
    pub fn peak(&self) -> f64 {
        self.values[0]
    }

    /// Smallest value attained inside the support.
    pub fn floor(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// `∫ f(|x|) dx` over `R^dim`.
    pub fn mass(&self, dim: usize) -> f64 {
        let mut prev = 0.0;
        let mut acc = 0.0;
        for (r, v) in self.steps() {
            acc += match dim {
                1 => v * 2.0 * (r - prev),
                2 => v * std::f64::consts::PI * (r * r - prev * prev),
                _ => unreachable!("dims 1 and 2 only"),
            };
            prev = r;
        }
        acc
    }
}

// ---------------------------------------------------------------------------
// Configurations
// ---------------------------------------------------------------------------

/// A finite duplicate-free set of particle positions in `R^d`, stored as a
/// flat coordinate array in insertion order.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    dim: usize,
    coords: Vec<f64>,
}

impl Configuration {
    pub fn new(dim: usize, points: &[Vec<f64>]) -> Result<Self> {
        if dim == 0 || dim > 2 {
            return Err(GrowthError::invalid("dimension must be 1 or 2"));
        }
        let mut cfg = Self {
            dim,
            coords: Vec::with_capacity(dim * points.len()),
        };
        let mut seen = HashSet::with_capacity(points.len());
        for p in points {
            if p.len() != dim {
                return Err(GrowthError::invalid(format!(
                    "point has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(GrowthError::invalid("coordinates must be finite"));
            }
            if !seen.insert(key_of(p)) {
                return Err(GrowthError::invalid(
                    "duplicate point: births at an occupied point are a null event",
                ));
            }
            cfg.coords.extend_from_slice(p);
        }
        Ok(cfg)
    }

    /// Single particle at the origin.
    pub fn origin(dim: usize) -> Self {
        Self::new(dim, &[vec![0.0; dim]]).expect("origin is always valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        self.points().any(|q| q == p)
    }

    /// Appends a point, rejecting exact duplicates.
    pub fn push(&mut self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim {
            return Err(GrowthError::invalid("dimension mismatch"));
        }
        if self.contains(p) {
            return Err(GrowthError::invalid("duplicate point"));
        }
        self.coords.extend_from_slice(p);
        Ok(())
    }
}

fn key_of(p: &[f64]) -> (u64, u64) {
    let a = p[0].to_bits();
    let b = if p.len() > 1 { p[1].to_bits() } else { 0 };
    (a, b)
}

pub(crate) fn dist(p: &[f64], q: &[f64]) -> f64 {
    match p.len() {
        1 => (p[0] - q[0]).abs(),
        2 => {
            let dx = p[0] - q[0];
            let dy = p[1] - q[1];
            (dx * dx + dy * dy).sqrt()
        }
        _ => unreachable!(),
    }
}

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

/// A birth-rate kernel; see the module docs for the families.
#[derive(Debug, Clone, PartialEq)]
pub enum BirthKernel {
    TruncatedIndicator {
        cap: f64,
        radius: f64,
    },
    FreeIndicator {
        radius: f64,
    },
    Sum {
        profile: StepFn,
        lambda: f64,
        cap: Option<f64>,
    },
    DiscretePowerLaw {
        alpha: f64,
        cap: f64,
        /// Truncation radius; `a_pow` is zeroed beyond it.
        r_max: i64,
        /// Normalizing constant making the untruncated kernel sum to 1 on Z.
        c_pow: f64,
    },
}

impl BirthKernel {
    pub fn truncated_indicator(cap: f64, radius: f64) -> Result<Self> {
        // cap = 0 is tolerated as the explicit null process used by
        // degenerate fixtures; anything negative is rejected.
        if !(cap >= 0.0) || !cap.is_finite() {
            return Err(GrowthError::invalid("cap must be nonnegative"));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(GrowthError::invalid("radius must be positive"));
        }
        Ok(BirthKernel::TruncatedIndicator { cap, radius })
    }

    pub fn free_indicator(radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(GrowthError::invalid("radius must be positive"));
        }
        Ok(BirthKernel::FreeIndicator { radius })
    }

    pub fn sum(profile: StepFn, lambda: f64, cap: Option<f64>) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(GrowthError::invalid("lambda must be positive"));
        }
        if let Some(k) = cap {
            if !(k >= 0.0) || !k.is_finite() {
                return Err(GrowthError::invalid("cap must be nonnegative"));
            }
        }
        Ok(BirthKernel::Sum { profile, lambda, cap })
    }

    /// Power-law lattice kernel with the truncation radius chosen so that the
    /// discarded tail mass is below [`POWERLAW_TAIL_MASS`].
    pub fn discrete_power_law(alpha: f64, cap: f64) -> Result<Self> {
        let r_max = powerlaw_truncation_radius(alpha)?;
        Self::discrete_power_law_with_radius(alpha, cap, r_max)
    }

    pub fn discrete_power_law_with_radius(alpha: f64, cap: f64, r_max: i64) -> Result<Self> {
        if !(alpha > 2.0) || !alpha.is_finite() {
            return Err(GrowthError::invalid("alpha must exceed 2"));
        }
        if !(cap >= 0.0) || !cap.is_finite() {
            return Err(GrowthError::invalid("cap must be nonnegative"));
        }
        if r_max < 1 {
            return Err(GrowthError::invalid("truncation radius must be >= 1"));
        }
        Ok(BirthKernel::DiscretePowerLaw {
            alpha,
            cap,
            r_max,
            c_pow: powerlaw_constant(alpha),
        })
    }

    /// Distance beyond which particles cannot interact.
    pub fn interaction_range(&self) -> f64 {
        match self {
            BirthKernel::TruncatedIndicator { radius, .. }
            | BirthKernel::FreeIndicator { radius } => *radius,
            BirthKernel::Sum { profile, .. } => profile.support(),
            BirthKernel::DiscretePowerLaw { r_max, .. } => *r_max as f64,
        }
    }

    pub fn cap(&self) -> Option<f64> {
        match self {
            BirthKernel::TruncatedIndicator { cap, .. } => Some(*cap),
            BirthKernel::FreeIndicator { .. } => None,
            BirthKernel::Sum { cap, .. } => *cap,
            BirthKernel::DiscretePowerLaw { cap, .. } => Some(*cap),
        }
    }

    /// Step-profile view for the continuum families (`None` for the lattice
    /// power law).
    pub fn continuum(&self) -> Option<(StepFn, f64, Option<f64>)> {
        match self {
            BirthKernel::TruncatedIndicator { cap, radius } => {
                Some((StepFn::indicator(*radius).unwrap(), 1.0, Some(*cap)))
            }
            BirthKernel::FreeIndicator { radius } => {
                Some((StepFn::indicator(*radius).unwrap(), 1.0, None))
            }
            BirthKernel::Sum { profile, lambda, cap } => {
                Some((profile.clone(), *lambda, *cap))
            }
            BirthKernel::DiscretePowerLaw { .. } => None,
        }
    }

    /// `a_pow` for the power-law family (zero beyond the truncation radius).
    pub fn a_pow(&self, delta: i64) -> f64 {
        match self {
            BirthKernel::DiscretePowerLaw { alpha, r_max, c_pow, .. } => {
                if delta == 0 {
                    2.0 * c_pow
                } else if delta.abs() <= *r_max {
                    c_pow / ((delta.abs() as f64) + 1.0).powf(*alpha)
                } else {
                    0.0
                }
            }
            _ => 0.0,
        }
    }

    /// Non-degeneracy witness `(c0, r)`: the rate is at least `c0` wherever
    /// some particle is within distance `r`.
    pub fn witness(&self) -> NonDegeneracyWitness {
        match self {
            BirthKernel::TruncatedIndicator { cap, radius } => NonDegeneracyWitness {
                c0: cap.min(1.0),
                r: *radius,
            },
            BirthKernel::FreeIndicator { radius } => NonDegeneracyWitness { c0: 1.0, r: *radius },
            BirthKernel::Sum { profile, lambda, cap } => {
                let base = lambda * profile.floor();
                NonDegeneracyWitness {
                    c0: cap.map_or(base, |k| k.min(base)),
                    r: profile.support(),
                }
            }
            BirthKernel::DiscretePowerLaw { alpha, cap, c_pow, .. } => NonDegeneracyWitness {
                c0: cap.min(c_pow / 2f64.powf(*alpha)),
                r: 1.0,
            },
        }
    }

    /// Dominating profile for the sublinearity condition: the uncapped
    /// single-particle contribution `a(x - y)`.
    pub fn dominating_rate(&self, x: &[f64], config: &Configuration) -> f64 {
        match self {
            BirthKernel::DiscretePowerLaw { .. } => config
                .points()
                .map(|y| self.a_pow((x[0] - y[0]).round() as i64))
                .sum(),
            _ => {
                let (profile, lambda, _) = self.continuum().unwrap();
                config
                    .points()
                    .map(|y| lambda * profile.eval(dist(x, y)))
                    .sum()
            }
        }
    }
}

/// Witness for the non-degeneracy condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonDegeneracyWitness {
    pub c0: f64,
    pub r: f64,
}

// ---------------------------------------------------------------------------
// Power-law constants
// ---------------------------------------------------------------------------

/// Riemann zeta for real `s > 2` by direct summation plus an Euler-Maclaurin
/// tail; accurate to ~1e-16 for the range used here.
fn zeta(s: f64) -> f64 {
    let m = 200.0;
    let mut sum = 0.0;
    let mut k = 1.0f64;
    while k < m {
        sum += k.powf(-s);
        k += 1.0;
    }
    sum + powerlaw_tail_from(m, s)
}

/// `Σ_{m >= m0} m^{-s}` via Euler-Maclaurin with three correction terms.
fn powerlaw_tail_from(m0: f64, s: f64) -> f64 {
    let f = m0.powf(-s);
    m0 * f / (s - 1.0) + 0.5 * f + s * f / (12.0 * m0)
        - s * (s + 1.0) * (s + 2.0) * f / (720.0 * m0 * m0 * m0)
}

/// `c_pow(α)`: with `a_pow(0) = 2 c_pow` and `a_pow(x) = c_pow (|x|+1)^{-α}`,
/// the sum over Z is `c_pow (2 + 2 Σ_{m>=2} m^{-α}) = 2 c_pow ζ(α)`.
pub fn powerlaw_constant(alpha: f64) -> f64 {
    1.0 / (2.0 * zeta(alpha))
}

/// Smallest radius R with `Σ_{|x| > R} a_pow(x) < POWERLAW_TAIL_MASS`.
pub fn powerlaw_truncation_radius(alpha: f64) -> Result<i64> {
    if !(alpha > 2.0) || !alpha.is_finite() {
        return Err(GrowthError::invalid("alpha must exceed 2"));
    }
    let c = powerlaw_constant(alpha);
    let tail = |r: i64| 2.0 * c * powerlaw_tail_from((r + 2) as f64, alpha);
    let mut hi = 1i64;
    while tail(hi) >= POWERLAW_TAIL_MASS {
        hi *= 2;
        if hi > 1 << 40 {
            return Err(GrowthError::Numerical(
                "power-law truncation radius did not converge".into(),
            ));
        }
    }
    let mut lo = hi / 2;
    while lo + 1 < hi {
        let mid = (lo + hi) / 2;
        if tail(mid) < POWERLAW_TAIL_MASS {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

// ---------------------------------------------------------------------------
// Rate evaluation
// ---------------------------------------------------------------------------

/// Pointwise birth rate `b(x, η)`.
pub fn evaluate_rate(kernel: &BirthKernel, x: &[f64], config: &Configuration) -> Result<f64> {
    if x.len() != config.dim() {
        return Err(GrowthError::invalid(format!(
            "location has {} coordinates, configuration is {}-dimensional",
            x.len(),
            config.dim()
        )));
    }
    if config.is_empty() {
        return Err(GrowthError::invalid("configuration is empty"));
    }
    match kernel {
        BirthKernel::TruncatedIndicator { cap, radius } => {
            let count = config.points().filter(|y| dist(x, y) <= *radius).count() as f64;
            Ok(count.min(*cap))
        }
        BirthKernel::FreeIndicator { radius } => {
            Ok(config.points().filter(|y| dist(x, y) <= *radius).count() as f64)
        }
        BirthKernel::Sum { profile, lambda, cap } => {
            let sum: f64 = config
                .points()
                .map(|y| lambda * profile.eval(dist(x, y)))
                .sum();
            Ok(cap.map_or(sum, |k| sum.min(k)))
        }
        BirthKernel::DiscretePowerLaw { cap, .. } => {
            if config.dim() != 1 {
                return Err(GrowthError::invalid("power-law kernel is 1D lattice-only"));
            }
            if x[0].fract() != 0.0 || config.points().any(|y| y[0].fract() != 0.0) {
                return Err(GrowthError::invalid(
                    "power-law kernel is lattice-only: coordinates must be integers",
                ));
            }
            let xi = x[0] as i64;
            let sum: f64 = config.points().map(|y| kernel.a_pow(xi - y[0] as i64)).sum();
            Ok(sum.min(*cap))
        }
    }
}

/// Builds the exact 1D rate profile of `b(·, η)` for a continuum kernel.
pub fn rate_profile_1d(kernel: &BirthKernel, config: &Configuration) -> Result<Profile1d> {
    let (step, lambda, cap) = kernel
        .continuum()
        .ok_or_else(|| GrowthError::invalid("lattice-only kernel has no continuum profile"))?;
    if config.dim() != 1 {
        return Err(GrowthError::invalid("1D profile requested for non-1D configuration"));
    }
    let mut profile = Profile1d::new(cap);
    for y in config.points() {
        add_bump_1d(&mut profile, &step, lambda, y[0]);
    }
    Ok(profile)
}

/// Adds one particle's contribution to a 1D profile: the radial step bump is
/// decomposed into nested rectangles.
pub(crate) fn add_bump_1d(profile: &mut Profile1d, step: &StepFn, lambda: f64, y: f64) {
    for j in 0..step.radii.len() {
        let outer_next = if j + 1 < step.values.len() { step.values[j + 1] } else { 0.0 };
        let height = lambda * (step.values[j] - outer_next);
        if height > 0.0 {
            profile.add_rect(y - step.radii[j], y + step.radii[j], height);
        }
    }
}

/// Total birth rate `∫ b(x, η) dx` (for the lattice power-law kernel, the sum
/// over sites).
///
/// 1D continuum kernels are computed exactly from the sorted breakpoint
/// decomposition. 2D capped kernels slice the plane: each horizontal slice is
/// an exact 1D step profile, and the slice totals are integrated adaptively
/// with subdivision at every circle extreme and circle-circle intersection,
/// to relative accuracy 1e-9.
pub fn total_rate(kernel: &BirthKernel, config: &Configuration) -> Result<f64> {
    if config.is_empty() {
        return Err(GrowthError::invalid("configuration is empty"));
    }
    match kernel {
        BirthKernel::DiscretePowerLaw { cap, r_max, .. } => {
            if config.dim() != 1 {
                return Err(GrowthError::invalid("power-law kernel is 1D lattice-only"));
            }
            let sites: Vec<i64> = config
                .points()
                .map(|y| {
                    if y[0].fract() != 0.0 {
                        Err(GrowthError::invalid("power-law kernel needs integer sites"))
                    } else {
                        Ok(y[0] as i64)
                    }
                })
                .collect::<Result<_>>()?;
            let lo = sites.iter().min().unwrap() - r_max;
            let hi = sites.iter().max().unwrap() + r_max;
            let mut total = 0.0;
            for x in lo..=hi {
                let u: f64 = sites.iter().map(|&y| kernel.a_pow(x - y)).sum();
                total += u.min(*cap);
            }
            Ok(total)
        }
        _ => match config.dim() {
            1 => Ok(rate_profile_1d(kernel, config)?.total()),
            2 => total_rate_2d(kernel, config),
            _ => unreachable!(),
        },
    }
}

fn total_rate_2d(kernel: &BirthKernel, config: &Configuration) -> Result<f64> {
    let (step, lambda, cap) = kernel
        .continuum()
        .ok_or_else(|| GrowthError::invalid("lattice-only kernel has no continuum profile"))?;
    let centers: Vec<[f64; 2]> = config.points().map(|p| [p[0], p[1]]).collect();
    let radii: Vec<f64> = step.radii.clone();
    let support = step.support();

    // Exact slice total at height y.
    let slice = |y: f64| -> f64 {
        let mut p = Profile1d::new(cap);
        for c in &centers {
            let dy = y - c[1];
            for j in 0..radii.len() {
                let outer_next = if j + 1 < step.values.len() {
                    step.values[j + 1]
                } else {
                    0.0
                };
                let height = lambda * (step.values[j] - outer_next);
                let rr = radii[j] * radii[j] - dy * dy;
                if height > 0.0 && rr > 0.0 {
                    let w = rr.sqrt();
                    p.add_rect(c[0] - w, c[0] + w, height);
                }
            }
        }
        p.total()
    };

    // Slice totals are analytic between circle extremes and intersection
    // heights; list those as mandatory cuts.
    let mut cuts: Vec<f64> = Vec::new();
    for c in &centers {
        for &r in &radii {
            cuts.push(c[1] - r);
            cuts.push(c[1] + r);
        }
    }
    for i in 0..centers.len() {
        for j in (i + 1)..centers.len() {
            for &ra in &radii {
                for &rb in &radii {
                    circle_intersection_ys(centers[i], ra, centers[j], rb, &mut cuts);
                }
            }
        }
    }
    let y_lo = centers.iter().map(|c| c[1]).fold(f64::INFINITY, f64::min) - support;
    let y_hi = centers.iter().map(|c| c[1]).fold(f64::NEG_INFINITY, f64::max) + support;

    // Two passes: a crude estimate fixes the absolute tolerance for the
    // refined pass at 1e-9 relative.
    let rough = crate::numeric::integrate_piecewise(&slice, y_lo, y_hi, &cuts, 1e-4);
    let tol = (rough.abs() * 1e-10).max(1e-300);
    Ok(crate::numeric::integrate_piecewise(&slice, y_lo, y_hi, &cuts, tol))
}

fn circle_intersection_ys(a: [f64; 2], ra: f64, b: [f64; 2], rb: f64, out: &mut Vec<f64>) {
    let dx = b[0] - a[0];
    let dy = b[1] - a[1];
    let d2 = dx * dx + dy * dy;
    if d2 == 0.0 {
        return;
    }
    let d = d2.sqrt();
    if d > ra + rb || d < (ra - rb).abs() {
        return;
    }
    let l = (ra * ra - rb * rb + d2) / (2.0 * d);
    let h2 = ra * ra - l * l;
    if h2 < 0.0 {
        return;
    }
    let h = h2.sqrt();
    let base_y = a[1] + l * dy / d;
    out.push(base_y + h * dx / d);
    out.push(base_y - h * dx / d);
}

// ---------------------------------------------------------------------------
// Condition checks
// ---------------------------------------------------------------------------

/// Outcome of one randomized check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub passes: u32,
    pub counterexample: Option<String>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Report from [`check_conditions`].
#[derive(Debug, Clone)]
pub struct ConditionsReport {
    pub trials: u32,
    pub sublinearity: CheckOutcome,
    pub monotonicity: CheckOutcome,
    pub invariance: CheckOutcome,
    pub non_degeneracy: CheckOutcome,
    pub witness: NonDegeneracyWitness,
}

impl ConditionsReport {
    pub fn all_passed(&self) -> bool {
        self.sublinearity.passed()
            && self.monotonicity.passed()
            && self.invariance.passed()
            && self.non_degeneracy.passed()
    }
}

/// Randomized verification of the structural conditions on the rate:
/// domination by the uncapped profile, monotonicity in the configuration,
/// rigid-motion invariance, and the non-degeneracy witness.
pub fn check_conditions(kernel: &BirthKernel, trials: u32, seed: u64) -> Result<ConditionsReport> {
    if trials < 1 {
        return Err(GrowthError::invalid("trials must be >= 1"));
    }
    let lattice = matches!(kernel, BirthKernel::DiscretePowerLaw { .. });
    let rate = |x: &[f64], cfg: &Configuration| evaluate_rate(kernel, x, cfg).unwrap();
    let witness = kernel.witness();
    let mut rng = StreamRng::new(seed, 0xC04D);

    let dims: &[usize] = if lattice { &[1] } else { &[1, 2] };
    let range = kernel.interaction_range();

    let mut sub = CheckOutcome::default();
    let mono = check_monotonicity(&rate, dims, range, lattice, trials, &mut rng);
    let mut inv = CheckOutcome::default();
    let mut nondeg = CheckOutcome::default();

    for t in 0..trials {
        let dim = dims[(t as usize) % dims.len()];
        let n = 1 + rng.below(10);
        let cfg = random_config(&mut rng, dim, range, lattice, n);
        let x = random_site(&mut rng, dim, range, lattice, &cfg);

        // (a) sublinearity: b <= Σ a(x - y).
        let b = rate(&x, &cfg);
        let dom = kernel.dominating_rate(&x, &cfg);
        if b <= dom + 1e-12 {
            sub.passes += 1;
        } else if sub.counterexample.is_none() {
            sub.counterexample = Some(format!("b={b} exceeds dominating {dom} at {x:?}"));
        }

        // (c) translation invariance (and reflection; rotation in 2D).
        let shift: Vec<f64> = (0..dim)
            .map(|_| {
                if lattice {
                    (rng.below(21) as f64) - 10.0
                } else {
                    rng.uniform_in(-5.0, 5.0)
                }
            })
            .collect();
        let moved_cfg = transform_config(&cfg, |p| {
            p.iter().zip(&shift).map(|(a, s)| a + s).collect()
        });
        let moved_x: Vec<f64> = x.iter().zip(&shift).map(|(a, s)| a + s).collect();
        let b_shift = rate(&moved_x, &moved_cfg);
        let mut ok = close(b, b_shift);
        if ok {
            let b_rot = if dim == 2 && !lattice {
                let theta = rng.uniform_in(0.0, std::f64::consts::TAU);
                let rot = |p: &[f64]| {
                    vec![
                        p[0] * theta.cos() - p[1] * theta.sin(),
                        p[0] * theta.sin() + p[1] * theta.cos(),
                    ]
                };
                let rcfg = transform_config(&cfg, |p| rot(p));
                rate(&rot(&x), &rcfg)
            } else {
                // 1D rotations are the reflection.
                let rcfg = transform_config(&cfg, |p| p.iter().map(|a| -a).collect());
                let rx: Vec<f64> = x.iter().map(|a| -a).collect();
                rate(&rx, &rcfg)
            };
            ok = close(b, b_rot);
            if !ok && inv.counterexample.is_none() {
                inv.counterexample = Some(format!("rotation changed b: {b} -> {b_rot}"));
            }
        } else if inv.counterexample.is_none() {
            inv.counterexample = Some(format!("translation changed b: {b} -> {b_shift}"));
        }
        if ok {
            inv.passes += 1;
        }

        // (d) non-degeneracy at a point near a particle.
        let pick = rng.below(cfg.len());
        let anchor: Vec<f64> = cfg.point(pick).to_vec();
        let near: Vec<f64> = if lattice {
            vec![anchor[0] + if rng.uniform() < 0.5 { 1.0 } else { -1.0 }]
        } else {
            let scale = witness.r * 0.999 * rng.uniform();
            let dir: Vec<f64> = match dim {
                1 => vec![if rng.uniform() < 0.5 { 1.0 } else { -1.0 }],
                _ => {
                    let th = rng.uniform_in(0.0, std::f64::consts::TAU);
                    vec![th.cos(), th.sin()]
                }
            };
            anchor.iter().zip(&dir).map(|(a, d)| a + scale * d).collect()
        };
        let b_near = rate(&near, &cfg);
        if b_near >= witness.c0 - 1e-12 {
            nondeg.passes += 1;
        } else if nondeg.counterexample.is_none() {
            nondeg.counterexample = Some(format!(
                "b={b_near} < c0={} within r={} of a particle",
                witness.c0, witness.r
            ));
        }
    }

    Ok(ConditionsReport {
        trials,
        sublinearity: sub,
        monotonicity: mono,
        invariance: inv,
        non_degeneracy: nondeg,
        witness,
    })
}

impl Default for CheckOutcome {
    fn default() -> Self {
        CheckOutcome { passes: 0, counterexample: None }
    }
}

/// Monotonicity check over random nested pairs, generic in the rate so test
/// fixtures can feed deliberately broken rates through the same machinery.
pub fn check_monotonicity<F>(
    rate: &F,
    dims: &[usize],
    range: f64,
    lattice: bool,
    trials: u32,
    rng: &mut StreamRng,
) -> CheckOutcome
where
    F: Fn(&[f64], &Configuration) -> f64,
{
    let mut out = CheckOutcome::default();
    for t in 0..trials {
        let dim = dims[(t as usize) % dims.len()];
        let n = 2 + rng.below(10);
        let sup = random_config(rng, dim, range, lattice, n);
        let keep = 1 + rng.below(sup.len() - 1);
        let sub_points: Vec<Vec<f64>> = (0..keep).map(|i| sup.point(i).to_vec()).collect();
        let sub = Configuration::new(dim, &sub_points).unwrap();
        let x = random_site(rng, dim, range, lattice, &sup);
        let b_small = rate(&x, &sub);
        let b_big = rate(&x, &sup);
        if b_small <= b_big + 1e-12 {
            out.passes += 1;
        } else if out.counterexample.is_none() {
            out.counterexample = Some(format!(
                "b(x, η)={b_small} > b(x, ζ)={b_big} for nested η ⊂ ζ at x={x:?}"
            ));
        }
    }
    out
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

fn random_config(
    rng: &mut StreamRng,
    dim: usize,
    range: f64,
    lattice: bool,
    n: usize,
) -> Configuration {
    let span = 3.0 * range.max(1.0);
    loop {
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..dim)
                    .map(|_| {
                        if lattice {
                            (rng.below(41) as f64) - 20.0
                        } else {
                            rng.uniform_in(-span, span)
                        }
                    })
                    .collect()
            })
            .collect();
        if let Ok(cfg) = Configuration::new(dim, &pts) {
            return cfg;
        }
    }
}

fn random_site(
    rng: &mut StreamRng,
    dim: usize,
    range: f64,
    lattice: bool,
    cfg: &Configuration,
) -> Vec<f64> {
    // Bias toward the support so the checks see nontrivial rates.
    let anchor = cfg.point(rng.below(cfg.len()));
    (0..dim)
        .map(|i| {
            if lattice {
                anchor[i] + (rng.below(11) as f64) - 5.0
            } else {
                anchor[i] + rng.uniform_in(-1.5 * range, 1.5 * range)
            }
        })
        .collect()
}

fn transform_config(cfg: &Configuration, f: impl Fn(&[f64]) -> Vec<f64>) -> Configuration {
    let pts: Vec<Vec<f64>> = cfg.points().map(|p| f(p)).collect();
    Configuration::new(cfg.dim(), &pts).expect("rigid motions preserve validity")
}

// ---------------------------------------------------------------------------
// Kernel spec strings
// ---------------------------------------------------------------------------

impl fmt::Display for BirthKernel {
    /// Canonical compact form, e.g. `trunc:k=2,r=1`; parse/format round-trips
    /// exactly (floats use the shortest representation that round-trips).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BirthKernel::TruncatedIndicator { cap, radius } => {
                write!(f, "trunc:k={cap},r={radius}")
            }
            BirthKernel::FreeIndicator { radius } => write!(f, "free:r={radius}"),
            BirthKernel::Sum { profile, lambda, cap } => {
                write!(f, "sum:lambda={lambda},steps=")?;
                for (i, (r, v)) in profile.steps().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    write!(f, "{r}:{v}")?;
                }
                if let Some(k) = cap {
                    write!(f, ",k={k}")?;
                }
                Ok(())
            }
            BirthKernel::DiscretePowerLaw { alpha, cap, r_max, .. } => {
                write!(f, "pow:alpha={alpha},k={cap},rmax={r_max}")
            }
        }
    }
}

impl FromStr for BirthKernel {
    type Err = GrowthError;

    fn from_str(s: &str) -> Result<Self> {
        let (tag, rest) = s
            .split_once(':')
            .ok_or_else(|| GrowthError::Parse(format!("kernel spec `{s}` lacks a family tag")))?;
        let mut fields = std::collections::BTreeMap::new();
        for part in rest.split(',') {
            let (k, v) = part.split_once('=').ok_or_else(|| {
                GrowthError::Parse(format!("kernel field `{part}` is not key=value"))
            })?;
            if fields.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return Err(GrowthError::Parse(format!("duplicate kernel field `{k}`")));
            }
        }
        let mut take_f64 = |key: &str| -> Result<Option<f64>> {
            match fields.remove(key) {
                None => Ok(None),
                Some(v) => v
                    .parse::<f64>()
                    .map(Some)
                    .map_err(|_| GrowthError::Parse(format!("bad number `{v}` for `{key}`"))),
            }
        };
        let kernel = match tag {
            "trunc" => {
                let k = take_f64("k")?.ok_or_else(|| miss("trunc", "k"))?;
                let r = take_f64("r")?.ok_or_else(|| miss("trunc", "r"))?;
                BirthKernel::truncated_indicator(k, r)?
            }
            "free" => {
                let r = take_f64("r")?.ok_or_else(|| miss("free", "r"))?;
                BirthKernel::free_indicator(r)?
            }
            "sum" => {
                let lambda = take_f64("lambda")?.ok_or_else(|| miss("sum", "lambda"))?;
                let cap = take_f64("k")?;
                let steps = fields
                    .remove("steps")
                    .ok_or_else(|| miss("sum", "steps"))?;
                let mut radii = Vec::new();
                let mut values = Vec::new();
                for pair in steps.split(';') {
                    let (r, v) = pair.split_once(':').ok_or_else(|| {
                        GrowthError::Parse(format!("step `{pair}` is not radius:value"))
                    })?;
                    radii.push(r.parse::<f64>().map_err(|_| bad_num(r))?);
                    values.push(v.parse::<f64>().map_err(|_| bad_num(v))?);
                }
                BirthKernel::sum(StepFn::new(radii, values)?, lambda, cap)?
            }
            "pow" => {
                let alpha = take_f64("alpha")?.ok_or_else(|| miss("pow", "alpha"))?;
                let cap = take_f64("k")?.ok_or_else(|| miss("pow", "k"))?;
                match fields.remove("rmax") {
                    Some(v) => {
                        let r = v
                            .parse::<i64>()
                            .map_err(|_| GrowthError::Parse(format!("bad rmax `{v}`")))?;
                        BirthKernel::discrete_power_law_with_radius(alpha, cap, r)?
                    }
                    None => BirthKernel::discrete_power_law(alpha, cap)?,
                }
            }
            other => {
                return Err(GrowthError::Parse(format!("unknown kernel family `{other}`")))
            }
        };
        if let Some(extra) = fields.keys().next() {
            return Err(GrowthError::Parse(format!(
                "unknown kernel field `{extra}` for `{tag}`"
            )));
        }
        Ok(kernel)
    }
}

fn miss(tag: &str, key: &str) -> GrowthError {
    GrowthError::Parse(format!("kernel `{tag}` is missing field `{key}`"))
}

fn bad_num(v: &str) -> GrowthError {
    GrowthError::Parse(format!("bad number `{v}`"))
}
