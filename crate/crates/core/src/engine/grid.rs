//! Uniform spatial grid index.
//!
//! The cell size equals the kernel's interaction range, so every interaction
//! partner of a point sits in the 3^d cells around it.

use std::collections::HashMap;

use crate::model::{dist, BirthKernel, Configuration};

/// Maps integer cell coordinates to the particle indices they contain.
#[derive(Debug, Clone)]
pub struct GridIndex {
    cell: f64,
    dim: usize,
    map: HashMap<(i64, i64), Vec<u32>>,
}

impl GridIndex {
    pub fn new(cell: f64, dim: usize) -> Self {
        assert!(cell > 0.0 && (dim == 1 || dim == 2));
        GridIndex { cell, dim, map: HashMap::new() }
    }

    /// Builds the index of a whole configuration, with particle indices in
    /// configuration order.
    pub fn build(config: &Configuration, cell: f64) -> Self {
        let mut g = Self::new(cell, config.dim());
        for (i, p) in config.points().enumerate() {
            g.insert(i as u32, p);
        }
        g
    }

    pub fn cell_size(&self) -> f64 {
        self.cell
    }

    pub fn key(&self, p: &[f64]) -> (i64, i64) {
        let kx = (p[0] / self.cell).floor() as i64;
        let ky = if self.dim == 2 { (p[1] / self.cell).floor() as i64 } else { 0 };
        (kx, ky)
    }

    pub fn insert(&mut self, idx: u32, p: &[f64]) {
        self.map.entry(self.key(p)).or_default().push(idx);
    }

    pub fn particles_in(&self, key: (i64, i64)) -> &[u32] {
        self.map.get(&key).map_or(&[], |v| v.as_slice())
    }

    /// Candidate interaction partners of `p`: everything in the 3^d cells
    /// around it, in ascending index order.
    pub fn candidates(&self, p: &[f64]) -> Vec<u32> {
        let (kx, ky) = self.key(p);
        let mut out = Vec::new();
        let y_range = if self.dim == 2 { -1..=1 } else { 0..=0 };
        for dy in y_range {
            for dx in -1..=1 {
                out.extend_from_slice(self.particles_in((kx + dx, ky + dy)));
            }
        }
        out.sort_unstable();
        out
    }
}

/// Rate evaluation through the grid; exactly equal (bitwise) to the all-pairs
/// evaluation because candidates are summed in ascending index order and
/// out-of-range particles contribute exact zeros either way.
pub fn evaluate_rate_grid(
    kernel: &BirthKernel,
    x: &[f64],
    config: &Configuration,
    grid: &GridIndex,
) -> f64 {
    let (step, lambda, cap) = kernel.continuum().expect("continuum kernel");
    let mut sum = 0.0;
    for idx in grid.candidates(x) {
        let y = config.point(idx as usize);
        sum += lambda * step.eval(dist(x, y));
    }
    cap.map_or(sum, |k| sum.min(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::evaluate_rate;
    use crate::rng::StreamRng;

    #[test]
    fn grid_equals_brute_force_exactly() {
        let kernel = BirthKernel::truncated_indicator(3.0, 1.0).unwrap();
        let mut rng = StreamRng::new(8, 0);
        for trial in 0..200 {
            let dim = if trial % 2 == 0 { 1 } else { 2 };
            let n = 1 + rng.below(40);
            let pts: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..dim).map(|_| rng.uniform_in(-4.0, 4.0)).collect())
                .collect();
            let cfg = Configuration::new(dim, &pts).unwrap();
            let grid = GridIndex::build(&cfg, kernel.interaction_range());
            for _ in 0..20 {
                let x: Vec<f64> = (0..dim).map(|_| rng.uniform_in(-5.0, 5.0)).collect();
                let direct = evaluate_rate(&kernel, &x, &cfg).unwrap();
                let via_grid = evaluate_rate_grid(&kernel, &x, &cfg, &grid);
                assert_eq!(direct.to_bits(), via_grid.to_bits());
            }
        }
    }

    #[test]
    fn candidates_cover_all_in_range() {
        let mut rng = StreamRng::new(9, 0);
        let pts: Vec<Vec<f64>> = (0..100)
            .map(|_| vec![rng.uniform_in(-3.0, 3.0), rng.uniform_in(-3.0, 3.0)])
            .collect();
        let cfg = Configuration::new(2, &pts).unwrap();
        let grid = GridIndex::build(&cfg, 0.75);
        for _ in 0..50 {
            let x = [rng.uniform_in(-3.0, 3.0), rng.uniform_in(-3.0, 3.0)];
            let cands = grid.candidates(&x);
            for (i, p) in cfg.points().enumerate() {
                if dist(&x, p) <= 0.75 {
                    assert!(cands.contains(&(i as u32)), "missing in-range particle");
                }
            }
        }
    }
}
