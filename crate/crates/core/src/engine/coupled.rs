//! Shared-noise coupling of two ordered birth processes (1D).
//!
//! Both processes are driven by one stream of Poisson marks `(s, x, u)`: a
//! mark is a birth of process `i` iff `u <= b_i(x, η^i_{s-})`. Marks are
//! generated from the upper process's own law (so every mark is an upper
//! birth) with `u` uniform under `b_hi(x)`; the lower process accepts the
//! mark with the exact conditional probability `b_lo(x)/b_hi(x)`. When the
//! supplied rates are ordered on nested configurations this realizes both
//! processes simultaneously and the lower remains included in the upper
//! pathwise; a rate-ordering breach is detected at the first mark where
//! `b_lo > b_hi` and reported as an error.

use std::collections::HashSet;

use crate::error::{GrowthError, Result};
use crate::model::{add_bump_1d, rate_profile_1d, BirthKernel, Configuration, StepFn};
use crate::profile::Profile1d;
use crate::rng::StreamRng;

use super::line::sample_offset_1d;
use super::{EventLog, SimOptions};

const BLOCK: usize = 256;

/// Sorted multiset of reals with O(sqrt)-ish insertion and rank queries;
/// backs exact neighbour counts for uncapped kernels, where the profile
/// would grow without bound.
#[derive(Debug, Default)]
pub(super) struct RankedList {
    blocks: Vec<Vec<f64>>,
    len: usize,
}

impl RankedList {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn insert(&mut self, x: f64) {
        if self.blocks.is_empty() {
            self.blocks.push(vec![x]);
            self.len = 1;
            return;
        }
        let bi = self
            .blocks
            .partition_point(|b| *b.last().unwrap() < x)
            .min(self.blocks.len() - 1);
        let block = &mut self.blocks[bi];
        let pos = block.partition_point(|&y| y < x);
        block.insert(pos, x);
        if block.len() > 2 * BLOCK {
            let tail = block.split_off(BLOCK);
            self.blocks.insert(bi + 1, tail);
        }
        self.len += 1;
    }

    /// Number of elements strictly below `x`.
    pub fn rank_lt(&self, x: f64) -> usize {
        let mut rank = 0;
        for b in &self.blocks {
            if *b.last().unwrap() < x {
                rank += b.len();
            } else {
                rank += b.partition_point(|&y| y < x);
                break;
            }
        }
        rank
    }

    /// Number of elements `<= x`.
    pub fn rank_le(&self, x: f64) -> usize {
        let mut rank = 0;
        for b in &self.blocks {
            if *b.last().unwrap() <= x {
                rank += b.len();
            } else {
                rank += b.partition_point(|&y| y <= x);
                break;
            }
        }
        rank
    }

    /// Count of elements in the closed interval `[lo, hi]`.
    pub fn count_closed(&self, lo: f64, hi: f64) -> usize {
        self.rank_le(hi) - self.rank_lt(lo)
    }

    /// `i`-th smallest element.
    pub fn select(&self, mut i: usize) -> f64 {
        for b in &self.blocks {
            if i < b.len() {
                return b[i];
            }
            i -= b.len();
        }
        panic!("select out of range");
    }
}

/// One process of the coupled pair.
enum Side {
    Capped {
        profile: Profile1d,
        step: StepFn,
        lambda: f64,
    },
    Uncapped {
        step: StepFn,
        lambda: f64,
        unit: f64,
        list: RankedList,
    },
}

impl Side {
    fn build(kernel: &BirthKernel, config: &Configuration) -> Result<Side> {
        let (step, lambda, cap) = kernel
            .continuum()
            .ok_or_else(|| GrowthError::invalid("lattice-only kernel cannot be coupled"))?;
        Ok(match cap {
            Some(_) => Side::Capped {
                profile: rate_profile_1d(kernel, config)?,
                step,
                lambda,
            },
            None => {
                let mut list = RankedList::default();
                for p in config.points() {
                    list.insert(p[0]);
                }
                let unit = lambda * step.mass(1);
                Side::Uncapped { step, lambda, unit, list }
            }
        })
    }

    fn total(&self) -> f64 {
        match self {
            Side::Capped { profile, .. } => profile.total(),
            Side::Uncapped { unit, list, .. } => unit * list.len() as f64,
        }
    }

    fn eval(&self, x: f64) -> f64 {
        match self {
            Side::Capped { profile, .. } => profile.eval(x),
            Side::Uncapped { step, lambda, list, .. } => {
                // b(x) = λ Σ_j (v_j - v_{j+1}) · #{y : |x-y| <= r_j}
                let mut sum = 0.0;
                let radii: Vec<(f64, f64)> = step.steps().collect();
                for (j, (r, v)) in radii.iter().enumerate() {
                    let next = if j + 1 < radii.len() { radii[j + 1].1 } else { 0.0 };
                    let count = list.count_closed(x - r, x + r) as f64;
                    sum += lambda * (v - next) * count;
                }
                sum
            }
        }
    }

    fn add(&mut self, x: f64) {
        match self {
            Side::Capped { profile, step, lambda } => add_bump_1d(profile, step, *lambda, x),
            Side::Uncapped { list, .. } => list.insert(x),
        }
    }

    fn sample(&self, rng: &mut StreamRng) -> f64 {
        match self {
            Side::Capped { profile, .. } => profile.sample(rng.uniform()),
            Side::Uncapped { step, list, .. } => {
                let parent = list.select(rng.below(list.len()));
                parent + sample_offset_1d(step, rng)
            }
        }
    }
}

/// Simulates two processes on one shared mark stream; returns `(lower,
/// upper)` logs. Requires `initial_lo ⊆ initial_hi` and rates ordered on
/// nested configurations (checked at every mark).
pub fn simulate_coupled(
    kernel_lo: &BirthKernel,
    kernel_hi: &BirthKernel,
    initial_lo: &Configuration,
    initial_hi: &Configuration,
    t_end: f64,
    seed: u64,
) -> Result<(EventLog, EventLog)> {
    simulate_coupled_with(
        kernel_lo,
        kernel_hi,
        initial_lo,
        initial_hi,
        t_end,
        seed,
        SimOptions::default(),
    )
}

pub fn simulate_coupled_with(
    kernel_lo: &BirthKernel,
    kernel_hi: &BirthKernel,
    initial_lo: &Configuration,
    initial_hi: &Configuration,
    t_end: f64,
    seed: u64,
    opts: SimOptions,
) -> Result<(EventLog, EventLog)> {
    if initial_lo.dim() != 1 || initial_hi.dim() != 1 {
        return Err(GrowthError::invalid("coupled simulation is 1D"));
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(GrowthError::invalid("t_end must be a nonnegative finite time"));
    }
    if initial_hi.is_empty() {
        return Err(GrowthError::invalid("upper initial configuration is empty"));
    }
    for p in initial_lo.points() {
        if !initial_hi.contains(p) {
            return Err(GrowthError::invalid("initial_lo must be contained in initial_hi"));
        }
    }
    let mut lo = Side::build(kernel_lo, initial_lo)?;
    let mut hi = Side::build(kernel_hi, initial_hi)?;
    let mut log_lo = EventLog::new(kernel_lo.clone(), initial_lo.clone(), seed);
    let mut log_hi = EventLog::new(kernel_hi.clone(), initial_hi.clone(), seed);
    let mut occupied: HashSet<u64> = initial_hi.points().map(|p| p[0].to_bits()).collect();
    let mut rng = StreamRng::new(seed, 0xC0);
    let mut t = 0.0;
    let mut events: u64 = 0;
    loop {
        let total = hi.total();
        if total <= 0.0 {
            break;
        }
        t += rng.exp(total);
        if t > t_end {
            break;
        }
        let (x, b_hi_x) = loop {
            let cand = hi.sample(&mut rng);
            if occupied.contains(&cand.to_bits()) {
                continue;
            }
            let b = hi.eval(cand);
            if b > 0.0 {
                break (cand, b);
            }
        };
        let b_lo_x = lo.eval(x);
        if b_lo_x > b_hi_x * (1.0 + 1e-9) + 1e-12 {
            return Err(GrowthError::InclusionViolation(format!(
                "b_lo({x}) = {b_lo_x} exceeds b_hi({x}) = {b_hi_x} at t = {t}"
            )));
        }
        let u = rng.uniform() * b_hi_x;
        occupied.insert(x.to_bits());
        log_hi.push_birth(t, &[x]);
        hi.add(x);
        if u <= b_lo_x {
            log_lo.push_birth(t, &[x]);
            lo.add(x);
        }
        events += 1;
        if events >= opts.max_events {
            return Err(GrowthError::ExplosionGuard { events, cap: opts.max_events });
        }
    }
    Ok((log_lo, log_hi))
}

/// The executable form of the lattice comparison underlying the linear
/// lower bound: under the continuum process with non-degeneracy witness
/// `(c0, r)`, a cell process on the grid of spacing `r/2` is run on the same
/// marks with rate `c0` wherever some particle's cell is within one step of
/// the location's cell. Returns the cell-birth sequence `(t, site)` (sites
/// are indices on the `r/2` grid) together with the continuum log; the cell
/// births are pathwise a subset of the continuum births.
pub fn simulate_dominated_cell_process(
    kernel: &BirthKernel,
    initial: &Configuration,
    t_end: f64,
    seed: u64,
) -> Result<(Vec<(f64, i64)>, EventLog)> {
    if initial.dim() != 1 {
        return Err(GrowthError::invalid("cell comparison is 1D"));
    }
    if initial.is_empty() {
        return Err(GrowthError::invalid("initial configuration is empty"));
    }
    let witness = kernel.witness();
    let (c0, r) = (witness.c0, witness.r);
    if !(c0 > 0.0) {
        return Err(GrowthError::invalid("kernel witness is degenerate"));
    }
    let cell = r / 2.0;
    let snap = |x: f64| -> i64 { (x / cell - 0.5).ceil() as i64 };
    let bump = |profile: &mut Profile1d, site: i64| {
        let z = site as f64 * cell;
        profile.add_rect(z - 1.5 * cell, z + 1.5 * cell, c0);
    };

    let mut lo_profile = Profile1d::new(Some(c0));
    for p in initial.points() {
        bump(&mut lo_profile, snap(p[0]));
    }
    let mut hi = Side::build(kernel, initial)?;
    let mut log_hi = EventLog::new(kernel.clone(), initial.clone(), seed);
    let mut cells: Vec<(f64, i64)> = Vec::new();
    let mut occupied: HashSet<u64> = initial.points().map(|p| p[0].to_bits()).collect();
    let mut rng = StreamRng::new(seed, 0xCE11);
    let mut t = 0.0;
    loop {
        let total = hi.total();
        if total <= 0.0 {
            break;
        }
        t += rng.exp(total);
        if t > t_end {
            break;
        }
        let (x, b_hi_x) = loop {
            let cand = hi.sample(&mut rng);
            if occupied.contains(&cand.to_bits()) {
                continue;
            }
            let b = hi.eval(cand);
            if b > 0.0 {
                break (cand, b);
            }
        };
        let b_lo_x = lo_profile.eval(x);
        if b_lo_x > b_hi_x * (1.0 + 1e-9) + 1e-12 {
            return Err(GrowthError::InclusionViolation(format!(
                "cell rate {b_lo_x} exceeds continuum rate {b_hi_x} at {x}"
            )));
        }
        let u = rng.uniform() * b_hi_x;
        occupied.insert(x.to_bits());
        log_hi.push_birth(t, &[x]);
        hi.add(x);
        if u <= b_lo_x {
            let site = snap(x);
            cells.push((t, site));
            bump(&mut lo_profile, site);
        }
    }
    Ok((cells, log_hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranked_list_ranks_and_selects() {
        let mut list = RankedList::default();
        let xs = [3.0, 1.0, 2.0, 2.0, -1.0, 10.0, 2.5];
        for &x in &xs {
            list.insert(x);
        }
        assert_eq!(list.len(), 7);
        assert_eq!(list.rank_lt(2.0), 2);
        assert_eq!(list.rank_le(2.0), 4);
        assert_eq!(list.count_closed(1.0, 3.0), 5);
        assert_eq!(list.select(0), -1.0);
        assert_eq!(list.select(6), 10.0);
        let mut big = RankedList::default();
        for i in 0..5000 {
            big.insert(((i * 2654435761u64) % 10_000) as f64);
        }
        assert_eq!(big.len(), 5000);
        assert_eq!(big.rank_lt(f64::INFINITY), 5000);
        let mut prev = f64::NEG_INFINITY;
        for i in 0..5000 {
            let v = big.select(i);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn identical_kernels_give_identical_logs() {
        let k = BirthKernel::truncated_indicator(2.0, 1.0).unwrap();
        let init = Configuration::origin(1);
        let (lo, hi) = simulate_coupled(&k, &k, &init, &init, 20.0, 13).unwrap();
        assert_eq!(lo.len(), hi.len());
        for (a, b) in lo.events().zip(hi.events()) {
            assert_eq!(a.time, b.time);
            assert_eq!(a.position, b.position);
        }
    }

    #[test]
    fn nested_caps_preserve_inclusion() {
        let k1 = BirthKernel::truncated_indicator(1.0, 1.0).unwrap();
        let k2 = BirthKernel::truncated_indicator(2.0, 1.0).unwrap();
        let init = Configuration::origin(1);
        let (lo, hi) = simulate_coupled(&k1, &k2, &init, &init, 15.0, 4).unwrap();
        assert!(lo.len() <= hi.len());
        assert!(!lo.is_empty());
        let hi_events: std::collections::HashSet<(u64, u64)> = hi
            .events()
            .map(|e| (e.time.to_bits(), e.position[0].to_bits()))
            .collect();
        for e in lo.events() {
            assert!(
                hi_events.contains(&(e.time.to_bits(), e.position[0].to_bits())),
                "lower birth missing upstairs"
            );
        }
    }

    #[test]
    fn misordered_kernels_are_detected() {
        // Claiming the cap-2 process is below the cap-1 process must trip
        // the breach detector once the configurations grow.
        let k1 = BirthKernel::truncated_indicator(1.0, 1.0).unwrap();
        let k2 = BirthKernel::truncated_indicator(2.0, 1.0).unwrap();
        let init = Configuration::origin(1);
        let err = simulate_coupled(&k2, &k1, &init, &init, 50.0, 2).unwrap_err();
        assert!(matches!(err, GrowthError::InclusionViolation(_)), "{err}");
    }

    #[test]
    fn capped_below_uncapped_inclusion() {
        let lo_k = BirthKernel::sum(
            StepFn::indicator(1.0).unwrap(),
            1.0,
            Some(1.5),
        )
        .unwrap();
        let hi_k = BirthKernel::free_indicator(1.0).unwrap();
        let init = Configuration::origin(1);
        let (lo, hi) = simulate_coupled(&lo_k, &hi_k, &init, &init, 4.0, 8).unwrap();
        assert!(lo.len() <= hi.len());
        let hi_set: std::collections::HashSet<u64> =
            hi.events().map(|e| e.position[0].to_bits()).collect();
        for e in lo.events() {
            assert!(hi_set.contains(&e.position[0].to_bits()));
        }
    }

    #[test]
    fn cell_comparison_is_dominated() {
        let k = BirthKernel::truncated_indicator(2.0, 1.0).unwrap();
        let init = Configuration::origin(1);
        let (cells, hi) = simulate_dominated_cell_process(&k, &init, 25.0, 31).unwrap();
        assert!(!cells.is_empty());
        assert!(cells.len() <= hi.len());
        let mut prev = 0.0;
        for &(t, _) in &cells {
            assert!(t >= prev);
            prev = t;
        }
    }
}
