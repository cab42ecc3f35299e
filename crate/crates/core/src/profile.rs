//! Piecewise-constant rate profiles on the line.
//!
//! The 1D birth rate of every kernel family here is a step function of the
//! location, so the exact profile can be maintained incrementally: a birth
//! adds a symmetric step bump, and a cap clamps values from above. Clamping
//! commutes with later additions (`min(k, min(k, a) + b) = min(k, a + b)` for
//! nonnegative `a`, `b`), so saturated stretches can be merged and forgotten;
//! in the capped models the bulk saturates and the segment list stays short.

/// A piecewise-constant nonnegative function with bounded support.
///
/// `xs` holds segment boundaries (`xs.len() == vals.len() + 1`); `vals[i]` is
/// the value on `[xs[i], xs[i+1])`; the function is zero outside.
#[derive(Debug, Clone)]
pub struct Profile1d {
    cap: Option<f64>,
    xs: Vec<f64>,
    vals: Vec<f64>,
    total: f64,
    updates_since_rebuild: u32,
}

impl Profile1d {
    pub fn new(cap: Option<f64>) -> Self {
        if let Some(k) = cap {
            assert!(k >= 0.0, "cap must be nonnegative");
        }
        Self {
            cap,
            xs: Vec::new(),
            vals: Vec::new(),
            total: 0.0,
            updates_since_rebuild: 0,
        }
    }

    /// Total mass `∫ v(x) dx`, maintained incrementally and periodically
    /// recomputed to shed accumulated rounding.
    #[inline]
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn segment_count(&self) -> usize {
        self.vals.len()
    }

    /// Value at `x` (right-continuous, zero outside the support).
    pub fn eval(&self, x: f64) -> f64 {
        if self.xs.is_empty() || x < self.xs[0] || x >= *self.xs.last().unwrap() {
            return 0.0;
        }
        let i = match self.xs.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        if i < self.vals.len() {
            self.vals[i]
        } else {
            0.0
        }
    }

    /// Adds `c >= 0` on `[lo, hi)`, clamped at the cap.
    pub fn add_rect(&mut self, lo: f64, hi: f64, c: f64) {
        debug_assert!(lo < hi && c >= 0.0);
        if c == 0.0 {
            return;
        }
        if self.xs.is_empty() {
            let v = self.clamp(c);
            self.xs = vec![lo, hi];
            self.vals = vec![v];
            self.total += v * (hi - lo);
            self.after_update();
            return;
        }
        // Extend the support with zero-valued segments when the rectangle
        // sticks out, then split at lo and hi so the affected range is a
        // whole number of segments.
        if lo < self.xs[0] {
            self.xs.insert(0, lo);
            self.vals.insert(0, 0.0);
        }
        if hi > *self.xs.last().unwrap() {
            self.xs.push(hi);
            self.vals.push(0.0);
        }
        let a = self.split_at(lo);
        let b = self.split_at(hi);
        for i in a..b {
            let old = self.vals[i];
            let new = self.clamp(old + c);
            self.vals[i] = new;
            self.total += (new - old) * (self.xs[i + 1] - self.xs[i]);
        }
        self.merge_around(a, b);
        self.after_update();
    }

    #[inline]
    fn clamp(&self, v: f64) -> f64 {
        match self.cap {
            Some(k) => v.min(k),
            None => v,
        }
    }

    /// Ensures `x` is a segment boundary; returns the index of the segment
    /// that starts at `x`.
    fn split_at(&mut self, x: f64) -> usize {
        match self.xs.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
            Ok(i) => i,
            Err(i) => {
                // x falls strictly inside segment i-1.
                self.xs.insert(i, x);
                self.vals.insert(i, self.vals[i - 1]);
                i
            }
        }
    }

    /// Merges equal-valued neighbours in `[a-1, b+1]` and trims zero ends.
    fn merge_around(&mut self, a: usize, b: usize) {
        let lo = a.saturating_sub(1);
        let hi = (b + 1).min(self.vals.len());
        let mut i = hi;
        while i > lo.max(1) {
            i -= 1;
            if self.vals[i] == self.vals[i - 1] {
                self.vals.remove(i);
                self.xs.remove(i);
            }
        }
        while let Some(&v) = self.vals.last() {
            if v == 0.0 {
                self.vals.pop();
                self.xs.pop();
            } else {
                break;
            }
        }
        if self.vals.first() == Some(&0.0) {
            self.vals.remove(0);
            self.xs.remove(0);
        }
        if self.vals.is_empty() {
            self.xs.clear();
        }
    }

    fn after_update(&mut self) {
        self.updates_since_rebuild += 1;
        if self.updates_since_rebuild >= 4096 {
            self.recompute_total();
        }
    }

    fn recompute_total(&mut self) {
        self.total = self
            .vals
            .iter()
            .zip(self.xs.windows(2))
            .map(|(v, w)| v * (w[1] - w[0]))
            .sum();
        self.updates_since_rebuild = 0;
    }

    /// Exact inverse-CDF draw: maps `u ∈ [0, 1)` to a location with density
    /// `v(x) / total`. Requires positive total mass.
    pub fn sample(&self, u: f64) -> f64 {
        debug_assert!(self.total > 0.0);
        let mut target = u * self.total;
        let last = self.vals.len() - 1;
        for (i, (v, w)) in self.vals.iter().zip(self.xs.windows(2)).enumerate() {
            let mass = v * (w[1] - w[0]);
            if target < mass || i == last {
                let frac = if mass > 0.0 { target / mass } else { 0.5 };
                return w[0] + frac.min(1.0) * (w[1] - w[0]);
            }
            target -= mass;
        }
        unreachable!("empty profile sampled");
    }

    /// Iterates `(lo, hi, value)` over the segments.
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.vals
            .iter()
            .zip(self.xs.windows(2))
            .map(|(&v, w)| (w[0], w[1], v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn total_direct(p: &Profile1d) -> f64 {
        p.segments().map(|(lo, hi, v)| v * (hi - lo)).sum()
    }

    #[test]
    fn single_bump_is_exact() {
        let mut p = Profile1d::new(Some(2.0));
        p.add_rect(-1.0, 1.0, 1.0);
        assert_eq!(p.total(), 2.0);
        assert_eq!(p.eval(0.0), 1.0);
        assert_eq!(p.eval(1.5), 0.0);
    }

    #[test]
    fn overlapping_bumps_clamp_at_cap() {
        // Two unit bumps at 0 and 0.5 with cap 2: value 1 on the wings,
        // 2 on the overlap [-0.5, 1); total 1.0 + 2 * 1.5 = 4.
        let mut p = Profile1d::new(Some(2.0));
        p.add_rect(-1.0, 1.0, 1.0);
        p.add_rect(-0.5, 1.5, 1.0);
        assert_eq!(p.eval(-0.75), 1.0);
        assert_eq!(p.eval(0.0), 2.0);
        assert_eq!(p.eval(1.2), 1.0);
        assert!((p.total() - 4.0).abs() < 1e-12);
        // A third bump inside the saturated stretch leaves it saturated.
        p.add_rect(-0.5, 1.0, 1.0);
        assert_eq!(p.eval(0.3), 2.0);
    }

    #[test]
    fn saturated_bulk_merges() {
        let mut p = Profile1d::new(Some(2.0));
        for i in 0..200 {
            let x = i as f64 * 0.05;
            p.add_rect(x - 1.0, x + 1.0, 1.0);
        }
        // Bulk is capped at 2 and merged; only the two fronts stay resolved.
        assert!(p.segment_count() < 12, "segments {}", p.segment_count());
        assert!((p.total() - total_direct(&p)).abs() < 1e-9);
    }

    #[test]
    fn disjoint_bumps_leave_a_gap() {
        let mut p = Profile1d::new(None);
        p.add_rect(0.0, 1.0, 1.0);
        p.add_rect(5.0, 6.0, 3.0);
        assert_eq!(p.eval(2.0), 0.0);
        assert!((p.total() - 4.0).abs() < 1e-12);
        // Samples land only in the support.
        for i in 0..100 {
            let x = p.sample(i as f64 / 100.0);
            assert!((0.0..1.0).contains(&x) || (5.0..6.0).contains(&x), "{x}");
        }
    }

    #[test]
    fn sample_matches_masses() {
        let mut p = Profile1d::new(None);
        p.add_rect(0.0, 1.0, 1.0);
        p.add_rect(1.0, 2.0, 3.0);
        // Mass split 1:3, so u = 0.25 maps exactly to the boundary.
        assert!((p.sample(0.125) - 0.5).abs() < 1e-12);
        assert!((p.sample(0.25) - 1.0).abs() < 1e-12);
        assert!((p.sample(0.625) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn incremental_total_stays_exact() {
        let mut p = Profile1d::new(Some(1.7));
        let mut x = 0.0;
        for i in 0..10_000 {
            x += if i % 3 == 0 { 0.31 } else { -0.17 };
            p.add_rect(x - 1.0, x + 1.0, 1.0);
        }
        assert!((p.total() - total_direct(&p)).abs() < 1e-7 * p.total());
    }
}
