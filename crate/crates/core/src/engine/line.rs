//! 1D drivers: exact profile-based next-event sampling for capped kernels,
//! and the parent-plus-offset mixture for uncapped ones.

use std::collections::HashSet;

use crate::error::{GrowthError, Result};
use crate::model::{add_bump_1d, rate_profile_1d, BirthKernel, Configuration, StepFn};
use crate::rng::StreamRng;

use super::{EventLog, SimOptions};

/// Capped 1D kernels: the rate profile `b(·, η)` is maintained exactly as a
/// clamped step function; every event is a birth.
pub(super) fn simulate_profile(
    kernel: &BirthKernel,
    initial: &Configuration,
    t_end: f64,
    seed: u64,
    rng: &mut StreamRng,
    opts: SimOptions,
) -> Result<EventLog> {
    let (step, lambda, _) = kernel.continuum().expect("continuum kernel");
    let mut profile = rate_profile_1d(kernel, initial)?;
    let mut occupied: HashSet<u64> = initial.points().map(|p| p[0].to_bits()).collect();
    let mut log = EventLog::new(kernel.clone(), initial.clone(), seed);
    let mut t = 0.0;
    let mut events: u64 = 0;
    loop {
        let total = profile.total();
        if total <= 0.0 {
            break;
        }
        t += rng.exp(total);
        if t > t_end {
            break;
        }
        let x = draw_unoccupied(rng, &mut occupied, |r| profile.sample(r.uniform()));
        log.push_birth(t, &[x]);
        add_bump_1d(&mut profile, &step, lambda, x);
        events += 1;
        if events >= opts.max_events {
            return Err(GrowthError::ExplosionGuard { events, cap: opts.max_events });
        }
    }
    Ok(log)
}

/// Uncapped 1D kernels: the total rate is `|η| · λ ∫f` and the location is a
/// uniform parent plus an offset drawn from the radial profile. Identical in
/// law to profile sampling, but O(1) per event with no profile bookkeeping.
pub(super) fn simulate_mixture(
    kernel: &BirthKernel,
    initial: &Configuration,
    t_end: f64,
    seed: u64,
    rng: &mut StreamRng,
    opts: SimOptions,
) -> Result<EventLog> {
    let (step, lambda, cap) = kernel.continuum().expect("continuum kernel");
    debug_assert!(cap.is_none());
    let unit = lambda * step.mass(1);
    let mut positions: Vec<f64> = initial.points().map(|p| p[0]).collect();
    let mut occupied: HashSet<u64> = positions.iter().map(|p| p.to_bits()).collect();
    let mut log = EventLog::new(kernel.clone(), initial.clone(), seed);
    let mut t = 0.0;
    let mut events: u64 = 0;
    loop {
        t += rng.exp(unit * positions.len() as f64);
        if t > t_end {
            break;
        }
        let x = draw_unoccupied(rng, &mut occupied, |r| {
            positions[r.below(positions.len())] + sample_offset_1d(&step, r)
        });
        log.push_birth(t, &[x]);
        positions.push(x);
        events += 1;
        if events >= opts.max_events {
            return Err(GrowthError::ExplosionGuard { events, cap: opts.max_events });
        }
    }
    Ok(log)
}

/// Draws until the candidate is not an occupied point. Exact duplicates are a
/// null event of the continuous law; float collisions are resolved by
/// redrawing, which keeps the run deterministic.
pub(super) fn draw_unoccupied(
    rng: &mut StreamRng,
    occupied: &mut HashSet<u64>,
    mut draw: impl FnMut(&mut StreamRng) -> f64,
) -> f64 {
    loop {
        let cand = draw(rng);
        if occupied.insert(cand.to_bits()) {
            return cand;
        }
    }
}

/// Signed offset with density proportional to the radial step profile.
pub(super) fn sample_offset_1d(step: &StepFn, rng: &mut StreamRng) -> f64 {
    let mut masses = 0.0;
    let mut prev = 0.0;
    for (r, v) in step.steps() {
        masses += v * (r - prev);
        prev = r;
    }
    let mut target = rng.uniform() * masses;
    let mut lo = 0.0;
    let mut d = step.support();
    for (r, v) in step.steps() {
        let m = v * (r - lo);
        if target < m {
            d = lo + target / v;
            break;
        }
        target -= m;
        lo = r;
    }
    if rng.uniform() < 0.5 {
        d
    } else {
        -d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::simulate;
    use crate::rng::replica_seed;

    #[test]
    fn first_waiting_time_has_mean_half() {
        // Single particle under the cap-2 unit-radius kernel: total rate 2,
        // so the first event time is Exponential with mean 1/2.
        let kernel = BirthKernel::truncated_indicator(2.0, 1.0).unwrap();
        let origin = Configuration::origin(1);
        let n = 100_000;
        let mut sum = 0.0;
        for i in 0..n {
            let log = simulate(&kernel, &origin, 10.0, replica_seed(41, i)).unwrap();
            sum += log.event(0).time;
        }
        let mean = sum / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean first event time {mean}");
    }

    #[test]
    fn free_branching_population_is_yule() {
        // Uncapped unit-radius branching: |η_t| is a Yule process of rate 2
        // per particle, so E|η_t| = exp(2t) exactly.
        let kernel = BirthKernel::free_indicator(1.0).unwrap();
        let origin = Configuration::origin(1);
        let t = 0.2;
        let n = 100_000;
        let mut sum = 0.0;
        for i in 0..n {
            let log = simulate(&kernel, &origin, t, replica_seed(17, i)).unwrap();
            sum += (1 + log.len()) as f64;
        }
        let mean = sum / n as f64;
        let expect = (2.0 * t).exp();
        assert!((mean - expect).abs() < 0.012, "mean population {mean} vs {expect}");
    }

    #[test]
    fn offsets_fill_the_support_symmetrically() {
        let step = StepFn::new(vec![0.5, 1.0], vec![2.0, 1.0]).unwrap();
        let mut rng = StreamRng::new(5, 5);
        let n = 200_000;
        let mut inner = 0u32;
        let mut positive = 0u32;
        for _ in 0..n {
            let d = sample_offset_1d(&step, &mut rng);
            assert!(d.abs() <= 1.0);
            if d.abs() < 0.5 {
                inner += 1;
            }
            if d > 0.0 {
                positive += 1;
            }
        }
        // Inner piece carries mass 2*0.5 of total 1.5.
        let frac = inner as f64 / n as f64;
        assert!((frac - 2.0 / 3.0).abs() < 0.005, "inner fraction {frac}");
        let pos = positive as f64 / n as f64;
        assert!((pos - 0.5).abs() < 0.005, "positive fraction {pos}");
    }
}
