//! Particle-capped branching random walk.
//!
//! Free unit-radius branching in 1D (each particle spawns at rate 2, the
//! child lands uniformly within distance 1), except that whenever a birth
//! would push the population past `n_cap`, the leftmost of the previously
//! live particles is removed; the newborn always survives the removal it
//! triggers, so at the cap the process keeps exactly `n_cap` particles (with
//! `n_cap = 1` it degenerates to a single symmetric jump walker). The log
//! records removals alongside births, each removal timestamped with the
//! birth that triggered it.

use std::collections::BTreeSet;

use crate::error::{GrowthError, Result};
use crate::model::{BirthKernel, Configuration};
use crate::rng::StreamRng;

use super::{EventLog, SimOptions};

/// Order-preserving bit pattern of an `f64` (total order on finite values).
#[inline]
fn order_key(x: f64) -> u64 {
    let b = x.to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b ^ (1 << 63)
    }
}

pub fn simulate_restricted_brw(n_cap: usize, t_end: f64, seed: u64) -> Result<EventLog> {
    simulate_restricted_brw_with(n_cap, t_end, seed, SimOptions::default())
}

pub fn simulate_restricted_brw_with(
    n_cap: usize,
    t_end: f64,
    seed: u64,
    opts: SimOptions,
) -> Result<EventLog> {
    if n_cap < 1 {
        return Err(GrowthError::invalid("n_cap must be at least 1"));
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(GrowthError::invalid("t_end must be a nonnegative finite time"));
    }
    let kernel = BirthKernel::free_indicator(1.0).expect("unit radius");
    let initial = Configuration::origin(1);
    let mut rng = StreamRng::new(seed, 0xB3);
    let mut log = EventLog::new(kernel, initial, seed);

    // Slab of positions; `live` supports O(1) uniform choice, the ordered
    // set O(log n) leftmost removal. `slot_of[id]` is the index in `live`.
    let mut slab: Vec<f64> = vec![0.0];
    let mut live: Vec<u32> = vec![0];
    let mut slot_of: Vec<u32> = vec![0];
    let mut ordered: BTreeSet<(u64, u32)> = BTreeSet::new();
    ordered.insert((order_key(0.0), 0));

    let mut t = 0.0;
    let mut events: u64 = 0;
    loop {
        t += rng.exp(2.0 * live.len() as f64);
        if t > t_end {
            break;
        }
        let x = loop {
            let parent = slab[live[rng.below(live.len())] as usize];
            let cand = parent + rng.uniform_in(-1.0, 1.0);
            if !ordered
                .range((order_key(cand), 0)..=(order_key(cand), u32::MAX))
                .any(|_| true)
            {
                break cand;
            }
        };
        // The victim is the leftmost of the pre-birth population.
        let victim = if live.len() >= n_cap {
            Some(*ordered.iter().next().expect("population is nonempty"))
        } else {
            None
        };

        let id = slab.len() as u32;
        slab.push(x);
        slot_of.push(live.len() as u32);
        live.push(id);
        ordered.insert((order_key(x), id));
        log.push_birth(t, &[x]);

        if let Some((key, victim)) = victim {
            ordered.remove(&(key, victim));
            let slot = slot_of[victim as usize] as usize;
            let moved = *live.last().unwrap();
            live.swap_remove(slot);
            if slot < live.len() {
                slot_of[moved as usize] = slot as u32;
            }
            log.push_remove(t, &[slab[victim as usize]]);
        }

        events += 1;
        if events >= opts.max_events {
            return Err(GrowthError::ExplosionGuard { events, cap: opts.max_events });
        }
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::EventKind;

    #[test]
    fn population_follows_cap_bookkeeping() {
        let n_cap = 16;
        let log = simulate_restricted_brw(n_cap, 30.0, 3).unwrap();
        let mut population = 1usize;
        let mut births = 0usize;
        for ev in log.events() {
            match ev.kind {
                EventKind::Birth => {
                    population += 1;
                    births += 1;
                }
                EventKind::Remove => population -= 1,
            }
            assert_eq!(population, (births + 1).min(n_cap));
        }
        assert_eq!(log.population(), population);
    }

    #[test]
    fn removals_are_leftmost_of_prior_population() {
        let log = simulate_restricted_brw(8, 20.0, 9).unwrap();
        let mut alive: Vec<f64> = vec![0.0];
        for ev in log.events() {
            match ev.kind {
                EventKind::Birth => alive.push(ev.position[0]),
                EventKind::Remove => {
                    // The newborn (last pushed) is exempt from its own removal.
                    let min = alive[..alive.len() - 1]
                        .iter()
                        .cloned()
                        .fold(f64::INFINITY, f64::min);
                    assert_eq!(ev.position[0], min, "removed particle is leftmost");
                    let i = alive.iter().position(|&p| p == min).unwrap();
                    alive.swap_remove(i);
                }
            }
        }
    }

    #[test]
    fn single_particle_walk_is_recurrent_scale() {
        // n_cap = 1: each birth immediately evicts the leftover particle, so
        // the survivor performs a rate-2 jump walk with uniform increments on
        // [-1, 1]; zero drift.
        let log = simulate_restricted_brw(1, 5000.0, 21).unwrap();
        let last = log.final_configuration().unwrap();
        assert_eq!(last.len(), 1);
        let x = last.point(0)[0];
        // Variance of position ~ t * rate * E[U^2] = 5000 * 2 / 3; 4 sigma.
        let sd = (5000.0 * 2.0 / 3.0_f64).sqrt();
        assert!(x.abs() < 4.0 * sd, "drifted to {x}");
    }
}
