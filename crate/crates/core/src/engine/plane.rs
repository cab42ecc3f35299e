//! 2D drivers.
//!
//! Capped kernels thin uniform cell proposals against a per-cell envelope:
//! cells have side equal to the interaction range, the envelope of a cell is
//! `min(cap, f(0)·λ·N₃)` with `N₃` the particle count in its 3×3
//! neighbourhood, and a proposal is accepted with probability `b(x, η) /
//! envelope`. Proposals advance time by exponentials of the total envelope
//! mass, which realizes the target jump process exactly. Uncapped kernels
//! use the same parent-plus-offset mixture as the 1D driver.

use std::collections::{HashMap, HashSet};

use crate::error::{GrowthError, Result};
use crate::model::{dist, BirthKernel, Configuration, StepFn};
use crate::rng::StreamRng;

use super::{EventLog, SimOptions};

/// Fenwick tree with appendable leaves; samples a leaf proportional to its
/// weight.
#[derive(Debug, Default)]
struct WeightTree {
    tree: Vec<f64>,
    weights: Vec<f64>,
    total: f64,
}

impl WeightTree {
    fn push(&mut self, w: f64) {
        self.weights.push(w);
        let i = self.weights.len(); // 1-based
        let mut s = w;
        let mut j = i - 1;
        let lo = i - (i & i.wrapping_neg());
        while j > lo {
            s += self.tree[j - 1];
            j -= j & j.wrapping_neg();
        }
        self.tree.push(s);
        self.total += w;
    }

    fn set(&mut self, idx: usize, w: f64) {
        let delta = w - self.weights[idx];
        if delta == 0.0 {
            return;
        }
        self.weights[idx] = w;
        self.total += delta;
        let mut i = idx + 1;
        while i <= self.tree.len() {
            self.tree[i - 1] += delta;
            i += i & i.wrapping_neg();
        }
    }

    fn total(&self) -> f64 {
        self.total
    }

    /// Index of the leaf containing prefix mass `target`.
    fn find(&self, mut target: f64) -> usize {
        let n = self.tree.len();
        let mut pos = 0usize;
        let mut mask = n.next_power_of_two();
        while mask > 0 {
            let next = pos + mask;
            if next <= n && self.tree[next - 1] < target {
                target -= self.tree[next - 1];
                pos = next;
            }
            mask >>= 1;
        }
        pos.min(n - 1)
    }

    /// Rebuild sums from the exact weights (sheds accumulated rounding).
    fn rebuild(&mut self) {
        let ws = std::mem::take(&mut self.weights);
        self.tree.clear();
        self.total = 0.0;
        for w in ws {
            self.push(w);
        }
    }
}

/// Per-cell state for the thinning driver.
struct CellField {
    cell: f64,
    cap: f64,
    peak: f64,
    slot_of: HashMap<(i64, i64), u32>,
    keys: Vec<(i64, i64)>,
    members: Vec<Vec<u32>>,
    n3: Vec<u32>,
    tree: WeightTree,
    updates: u32,
}

impl CellField {
    fn new(cell: f64, cap: f64, peak: f64) -> Self {
        CellField {
            cell,
            cap,
            peak,
            slot_of: HashMap::new(),
            keys: Vec::new(),
            members: Vec::new(),
            n3: Vec::new(),
            tree: WeightTree::default(),
            updates: 0,
        }
    }

    fn key(&self, p: &[f64]) -> (i64, i64) {
        ((p[0] / self.cell).floor() as i64, (p[1] / self.cell).floor() as i64)
    }

    fn slot(&mut self, key: (i64, i64)) -> u32 {
        if let Some(&s) = self.slot_of.get(&key) {
            return s;
        }
        let s = self.keys.len() as u32;
        self.slot_of.insert(key, s);
        self.keys.push(key);
        self.members.push(Vec::new());
        self.n3.push(0);
        self.tree.push(0.0);
        s
    }

    fn envelope(&self, n3: u32) -> f64 {
        (self.peak * n3 as f64).min(self.cap)
    }

    fn add_particle(&mut self, idx: u32, p: &[f64]) {
        let (kx, ky) = self.key(p);
        let home = self.slot((kx, ky));
        self.members[home as usize].push(idx);
        for dy in -1..=1 {
            for dx in -1..=1 {
                let s = self.slot((kx + dx, ky + dy)) as usize;
                self.n3[s] += 1;
                let w = self.envelope(self.n3[s]) * self.cell * self.cell;
                self.tree.set(s, w);
            }
        }
        self.updates += 1;
        if self.updates >= 65_536 {
            self.tree.rebuild();
            self.updates = 0;
        }
    }
}

/// Capped 2D kernels via envelope thinning.
pub(super) fn simulate_thinning(
    kernel: &BirthKernel,
    initial: &Configuration,
    t_end: f64,
    seed: u64,
    rng: &mut StreamRng,
    opts: SimOptions,
) -> Result<EventLog> {
    let (step, lambda, cap) = kernel.continuum().expect("continuum kernel");
    let cap = cap.expect("capped kernel");
    let mut field = CellField::new(step.support(), cap, lambda * step.peak());
    let mut coords: Vec<f64> = Vec::new();
    for (i, p) in initial.points().enumerate() {
        coords.extend_from_slice(p);
        field.add_particle(i as u32, p);
    }
    let mut log = EventLog::new(kernel.clone(), initial.clone(), seed);
    let mut t = 0.0;
    let mut events: u64 = 0;
    loop {
        let total = field.tree.total();
        if total <= 0.0 {
            break;
        }
        t += rng.exp(total);
        if t > t_end {
            break;
        }
        let slot = field.tree.find(rng.uniform() * total);
        let env = field.tree.weights[slot] / (field.cell * field.cell);
        if env <= 0.0 {
            continue; // rounding stray; carries no envelope mass
        }
        let (kx, ky) = field.keys[slot];
        let x = [
            (kx as f64 + rng.uniform()) * field.cell,
            (ky as f64 + rng.uniform()) * field.cell,
        ];
        let u = rng.uniform() * env;
        let b = rate_in_field(&field, &coords, &step, lambda, cap, &x);
        if u < b && !occupied_in_cell(&field, &coords, &x) {
            let idx = (coords.len() / 2) as u32;
            log.push_birth(t, &x);
            coords.extend_from_slice(&x);
            field.add_particle(idx, &x);
            events += 1;
            if events >= opts.max_events {
                return Err(GrowthError::ExplosionGuard { events, cap: opts.max_events });
            }
        }
    }
    Ok(log)
}

/// Exact `b(x, η)` from the 3×3 neighbourhood, with early exit once the cap
/// is reached.
fn rate_in_field(
    field: &CellField,
    coords: &[f64],
    step: &StepFn,
    lambda: f64,
    cap: f64,
    x: &[f64; 2],
) -> f64 {
    let (kx, ky) = field.key(x);
    let mut sum = 0.0;
    for dy in -1..=1 {
        for dx in -1..=1 {
            if let Some(&s) = field.slot_of.get(&(kx + dx, ky + dy)) {
                for &idx in &field.members[s as usize] {
                    let p = &coords[idx as usize * 2..idx as usize * 2 + 2];
                    sum += lambda * step.eval(dist(x, p));
                    if sum >= cap {
                        return cap;
                    }
                }
            }
        }
    }
    sum
}

fn occupied_in_cell(field: &CellField, coords: &[f64], x: &[f64; 2]) -> bool {
    if let Some(&s) = field.slot_of.get(&field.key(x)) {
        field.members[s as usize].iter().any(|&idx| {
            let p = &coords[idx as usize * 2..idx as usize * 2 + 2];
            p[0] == x[0] && p[1] == x[1]
        })
    } else {
        false
    }
}

/// Uncapped 2D kernels: uniform parent plus radial-step offset.
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
    let unit = lambda * step.mass(2);
    let mut positions: Vec<[f64; 2]> = initial.points().map(|p| [p[0], p[1]]).collect();
    let mut occupied: HashSet<(u64, u64)> =
        positions.iter().map(|p| (p[0].to_bits(), p[1].to_bits())).collect();
    let mut log = EventLog::new(kernel.clone(), initial.clone(), seed);
    let mut t = 0.0;
    let mut events: u64 = 0;
    loop {
        t += rng.exp(unit * positions.len() as f64);
        if t > t_end {
            break;
        }
        let x = loop {
            let parent = positions[rng.below(positions.len())];
            let (dx, dy) = sample_offset_2d(&step, rng);
            let cand = [parent[0] + dx, parent[1] + dy];
            if occupied.insert((cand[0].to_bits(), cand[1].to_bits())) {
                break cand;
            }
        };
        log.push_birth(t, &x);
        positions.push(x);
        events += 1;
        if events >= opts.max_events {
            return Err(GrowthError::ExplosionGuard { events, cap: opts.max_events });
        }
    }
    Ok(log)
}

/// Offset with planar density proportional to the radial step profile.
fn sample_offset_2d(step: &StepFn, rng: &mut StreamRng) -> (f64, f64) {
    let mut masses = Vec::new();
    let mut prev = 0.0;
    let mut total = 0.0;
    for (r, v) in step.steps() {
        let m = v * (r * r - prev * prev);
        masses.push((prev, r, m));
        total += m;
        prev = r;
    }
    let mut target = rng.uniform() * total;
    let mut radius = step.support();
    for (lo, hi, m) in masses {
        if target < m || hi == step.support() {
            let u = if m > 0.0 { (target / m).min(1.0) } else { 0.5 };
            radius = (lo * lo + u * (hi * hi - lo * lo)).sqrt();
            break;
        }
        target -= m;
    }
    let theta = rng.uniform_in(0.0, std::f64::consts::TAU);
    (radius * theta.cos(), radius * theta.sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::simulate;
    use crate::model::total_rate;
    use crate::rng::replica_seed;
    use crate::stats;

    #[test]
    fn weight_tree_sampling_matches_weights() {
        let mut tree = WeightTree::default();
        for w in [1.0, 0.0, 3.0, 2.0, 0.5] {
            tree.push(w);
        }
        tree.set(1, 1.5);
        assert!((tree.total() - 8.0).abs() < 1e-12);
        let mut rng = StreamRng::new(2, 2);
        let mut counts = [0u32; 5];
        let n = 100_000;
        for _ in 0..n {
            counts[tree.find(rng.uniform() * tree.total())] += 1;
        }
        for (i, &w) in [1.0, 1.5, 3.0, 2.0, 0.5].iter().enumerate() {
            let f = counts[i] as f64 / n as f64;
            assert!((f - w / 8.0).abs() < 0.01, "leaf {i}: {f}");
        }
    }

    #[test]
    fn first_event_time_is_exponential_with_total_rate() {
        // Thinning must reproduce the exact waiting law from a frozen
        // configuration: the first accepted mark of the two-particle k=5
        // configuration arrives at rate ∫ b.
        let kernel = BirthKernel::truncated_indicator(5.0, 1.0).unwrap();
        let cfg = Configuration::new(2, &[vec![0.0, 0.0], vec![0.6, 0.2]]).unwrap();
        let rate = total_rate(&kernel, &cfg).unwrap();
        let n = 20_000;
        let sample: Vec<f64> = (0..n)
            .map(|i| {
                simulate(&kernel, &cfg, 30.0, replica_seed(77, i))
                    .unwrap()
                    .event(0)
                    .time
            })
            .collect();
        let sample = stats::sorted(sample);
        let d = stats::ks_statistic(&sample, |x| 1.0 - (-rate * x).exp());
        assert!(d < stats::ks_critical_one(0.001, n as usize), "KS = {d}");
    }

    #[test]
    fn mixture_2d_population_is_yule() {
        let kernel = BirthKernel::free_indicator(1.0).unwrap();
        let origin = Configuration::origin(2);
        let t = 0.3;
        let n = 20_000;
        let mut sum = 0.0;
        for i in 0..n {
            // Total rate per particle is the disk area pi.
            let log = simulate(&kernel, &origin, t, replica_seed(3, i)).unwrap();
            sum += (1 + log.len()) as f64;
        }
        let mean = sum / n as f64;
        let expect = (std::f64::consts::PI * t).exp();
        assert!((mean - expect).abs() < 0.06, "{mean} vs {expect}");
    }
}
