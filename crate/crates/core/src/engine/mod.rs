//! Exact event-driven simulation of the birth process.
//!
//! A run is a realization of the pure-jump process driven by Poisson noise:
//! wait an exponential time with the configuration's total rate, then place
//! the birth with density `b(·, η) / total`. In 1D the location comes from
//! the exact piecewise-constant rate profile by inverse CDF; uncapped kernels
//! use the equivalent parent-plus-offset mixture; capped 2D kernels thin
//! cell proposals against a per-cell envelope. All paths realize the same
//! jump-process law exactly — no time discretization anywhere.

mod brw;
mod chains;
mod coupled;
mod grid;
mod line;
mod plane;

pub use brw::{simulate_restricted_brw, simulate_restricted_brw_with};
pub use chains::{
    gap_jump_density, gap_total_rate, simulate_gap_chain, simulate_two_point,
    simulate_two_point_jumps, GapChainState, GapTrajectory, TwoPointState, TwoPointTrajectory,
};
pub use coupled::{simulate_coupled, simulate_coupled_with, simulate_dominated_cell_process};
pub use grid::{evaluate_rate_grid, GridIndex};

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{GrowthError, Result};
use crate::model::{BirthKernel, Configuration};
use crate::rng::StreamRng;

/// Hard cap on births per run; misconfiguration must fail loudly rather
/// than hang, even though valid kernels cannot explode.
pub const DEFAULT_MAX_EVENTS: u64 = 100_000_000;

/// Tunables that do not affect the law of the process.
#[derive(Debug, Clone, Copy)]
pub struct SimOptions {
    pub max_events: u64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { max_events: DEFAULT_MAX_EVENTS }
    }
}

/// What happened at an event time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Birth,
    /// Only the particle-capped branching walk removes particles.
    Remove,
}

/// One recorded event (view into an [`EventLog`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event<'a> {
    pub time: f64,
    pub position: &'a [f64],
    pub kind: EventKind,
}

/// Ordered events of one run plus everything needed to replay it: dimension,
/// initial configuration, kernel and seed.
///
/// Birth times strictly increase; a removal carries the same timestamp as
/// the birth that triggered it and immediately follows it in the log.
#[derive(Debug, Clone)]
pub struct EventLog {
    dim: usize,
    seed: u64,
    kernel: BirthKernel,
    initial: Configuration,
    times: Vec<f64>,
    coords: Vec<f64>,
    kinds: Vec<EventKind>,
}

impl EventLog {
    pub fn new(kernel: BirthKernel, initial: Configuration, seed: u64) -> Self {
        EventLog {
            dim: initial.dim(),
            seed,
            kernel,
            initial,
            times: Vec::new(),
            coords: Vec::new(),
            kinds: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn kernel(&self) -> &BirthKernel {
        &self.kernel
    }

    pub fn initial(&self) -> &Configuration {
        &self.initial
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    pub fn event(&self, i: usize) -> Event<'_> {
        Event {
            time: self.times[i],
            position: &self.coords[i * self.dim..(i + 1) * self.dim],
            kind: self.kinds[i],
        }
    }

    pub fn events(&self) -> impl Iterator<Item = Event<'_>> + '_ {
        (0..self.len()).map(move |i| self.event(i))
    }

    pub(crate) fn push_birth(&mut self, t: f64, x: &[f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert!(
            self.kinds
                .iter()
                .rposition(|k| *k == EventKind::Birth)
                .map_or(t > 0.0, |i| t > self.times[i]),
            "birth times must strictly increase"
        );
        self.times.push(t);
        self.coords.extend_from_slice(x);
        self.kinds.push(EventKind::Birth);
    }

    pub(crate) fn push_remove(&mut self, t: f64, x: &[f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(self.times.last().copied(), Some(t), "removal pairs with its birth");
        self.times.push(t);
        self.coords.extend_from_slice(x);
        self.kinds.push(EventKind::Remove);
    }

    /// Number of live particles after the whole log.
    pub fn population(&self) -> usize {
        let births = self.kinds.iter().filter(|k| **k == EventKind::Birth).count();
        let removals = self.len() - births;
        self.initial.len() + births - removals
    }

    /// Replays the log up to and including time `t`.
    pub fn configuration_at(&self, t: f64) -> Result<Configuration> {
        let mut pts: Vec<Vec<f64>> = self.initial.points().map(|p| p.to_vec()).collect();
        for ev in self.events() {
            if ev.time > t {
                break;
            }
            match ev.kind {
                EventKind::Birth => pts.push(ev.position.to_vec()),
                EventKind::Remove => {
                    let i = pts
                        .iter()
                        .position(|p| p.as_slice() == ev.position)
                        .ok_or_else(|| GrowthError::Parse("removal of unknown particle".into()))?;
                    pts.swap_remove(i);
                }
            }
        }
        Configuration::new(self.dim, &pts)
    }

    pub fn final_configuration(&self) -> Result<Configuration> {
        self.configuration_at(f64::INFINITY)
    }

    /// Writes the JSON-lines form: one header record, then one record per
    /// event. The round trip is bit-exact.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        let header = JsonHeader {
            dim: self.dim,
            seed: self.seed,
            kernel: self.kernel.to_string(),
            initial: self.initial.points().map(|p| p.to_vec()).collect(),
        };
        serde_json::to_writer(&mut w, &header).map_err(io_err)?;
        w.write_all(b"\n")?;
        for ev in self.events() {
            let rec = JsonRecord {
                t: ev.time,
                x: ev.position.to_vec(),
                op: match ev.kind {
                    EventKind::Birth => "birth".to_string(),
                    EventKind::Remove => "remove".to_string(),
                },
            };
            serde_json::to_writer(&mut w, &rec).map_err(io_err)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header_line = lines
            .next()
            .ok_or_else(|| GrowthError::Parse("empty event log".into()))??;
        let header: JsonHeader =
            serde_json::from_str(&header_line).map_err(|e| GrowthError::Parse(e.to_string()))?;
        let kernel: BirthKernel = header.kernel.parse()?;
        let initial = Configuration::new(header.dim, &header.initial)?;
        let mut log = EventLog::new(kernel, initial, header.seed);
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: JsonRecord =
                serde_json::from_str(&line).map_err(|e| GrowthError::Parse(e.to_string()))?;
            if rec.x.len() != header.dim {
                return Err(GrowthError::Parse("event dimension mismatch".into()));
            }
            log.times.push(rec.t);
            log.coords.extend_from_slice(&rec.x);
            log.kinds.push(match rec.op.as_str() {
                "birth" => EventKind::Birth,
                "remove" => EventKind::Remove,
                other => return Err(GrowthError::Parse(format!("unknown op `{other}`"))),
            });
        }
        Ok(log)
    }
}

#[derive(Serialize, Deserialize)]
struct JsonHeader {
    dim: usize,
    seed: u64,
    kernel: String,
    initial: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct JsonRecord {
    t: f64,
    x: Vec<f64>,
    op: String,
}

fn io_err(e: serde_json::Error) -> GrowthError {
    GrowthError::Parse(e.to_string())
}

/// Exact simulation of the birth process up to `t_end`.
///
/// Deterministic given `(kernel, initial, t_end, seed)`. `t_end = 0` yields
/// an empty log; negative or non-finite `t_end` is rejected.
pub fn simulate(
    kernel: &BirthKernel,
    initial: &Configuration,
    t_end: f64,
    seed: u64,
) -> Result<EventLog> {
    simulate_with(kernel, initial, t_end, seed, SimOptions::default())
}

pub fn simulate_with(
    kernel: &BirthKernel,
    initial: &Configuration,
    t_end: f64,
    seed: u64,
    opts: SimOptions,
) -> Result<EventLog> {
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(GrowthError::invalid("t_end must be a nonnegative finite time"));
    }
    if initial.is_empty() {
        return Err(GrowthError::invalid("initial configuration is empty"));
    }
    let (_, _, cap) = kernel
        .continuum()
        .ok_or_else(|| GrowthError::invalid("lattice-only kernel: use the lattice module"))?;
    let mut rng = StreamRng::new(seed, 0);
    match (initial.dim(), cap.is_some()) {
        (1, true) => line::simulate_profile(kernel, initial, t_end, seed, &mut rng, opts),
        (1, false) => line::simulate_mixture(kernel, initial, t_end, seed, &mut rng, opts),
        (2, true) => plane::simulate_thinning(kernel, initial, t_end, seed, &mut rng, opts),
        (2, false) => plane::simulate_mixture(kernel, initial, t_end, seed, &mut rng, opts),
        _ => Err(GrowthError::invalid("dimensions 1 and 2 only")),
    }
}

/// Runs `replicas` independent jobs, indexed deterministically; results are
/// ordered by replica regardless of scheduling. This is the fan-out contract
/// the experiment drivers use.
pub fn run_replicas<T: Send>(replicas: usize, job: impl Fn(usize) -> T + Send + Sync) -> Vec<T> {
    use rayon::prelude::*;
    (0..replicas).into_par_iter().map(job).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k2() -> BirthKernel {
        BirthKernel::truncated_indicator(2.0, 1.0).unwrap()
    }

    #[test]
    fn zero_horizon_is_empty() {
        let log = simulate(&k2(), &Configuration::origin(1), 0.0, 1).unwrap();
        assert!(log.is_empty());
    }

    #[test]
    fn negative_horizon_is_rejected() {
        assert!(simulate(&k2(), &Configuration::origin(1), -1.0, 1).is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let a = simulate(&k2(), &Configuration::origin(1), 50.0, 7).unwrap();
        let b = simulate(&k2(), &Configuration::origin(1), 50.0, 7).unwrap();
        assert_eq!(a.times, b.times);
        assert_eq!(a.coords, b.coords);
        let c = simulate(&k2(), &Configuration::origin(1), 50.0, 8).unwrap();
        assert_ne!(a.times, c.times);
    }

    #[test]
    fn jsonl_round_trip_is_bit_exact() {
        let log = simulate(&k2(), &Configuration::origin(1), 20.0, 3).unwrap();
        let mut buf = Vec::new();
        log.write_jsonl(&mut buf).unwrap();
        let back = EventLog::read_jsonl(&buf[..]).unwrap();
        let mut buf2 = Vec::new();
        back.write_jsonl(&mut buf2).unwrap();
        assert_eq!(buf, buf2);
        assert_eq!(log.times, back.times);
        assert_eq!(log.coords, back.coords);
    }

    #[test]
    fn replay_matches_event_count() {
        let log = simulate(&k2(), &Configuration::origin(1), 30.0, 5).unwrap();
        let final_cfg = log.final_configuration().unwrap();
        assert_eq!(final_cfg.len(), 1 + log.len());
        let mid = log.event(log.len() / 2).time;
        let cfg_mid = log.configuration_at(mid).unwrap();
        assert_eq!(cfg_mid.len(), 1 + log.len() / 2 + 1);
    }

    #[test]
    fn explosion_guard_trips() {
        let err = simulate_with(
            &k2(),
            &Configuration::origin(1),
            1e6,
            9,
            SimOptions { max_events: 50 },
        )
        .unwrap_err();
        assert!(matches!(err, GrowthError::ExplosionGuard { .. }));
    }
}
