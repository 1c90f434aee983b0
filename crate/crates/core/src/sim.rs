//! Monte-Carlo estimation of path probabilities over a product chain.
//!
//! Paths are sampled with ChaCha8 (`rand_chacha`), seeded from the
//! configured 64-bit seed. Trials are split over a fixed number of workers;
//! worker `w` uses stream `w` of the seeded generator, so the result does not
//! depend on how many threads actually run. A successor is drawn by comparing
//! a uniform `u64` with `ceil(cumulative * 2^64)` computed exactly from the
//! rational row.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::checker::{CheckError, LabelTable};
use crate::engine::SatVector;
use crate::formula::PathFormula;
use crate::model::{Dtmc, StateIndex};
use crate::product::ProductChain;
use crate::rational::scaled_u64_threshold;

pub const WORKERS: u64 = 16;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("horizon must be at least 1")]
    NoHorizon,
    #[error("horizon {horizon} is shorter than the until bound {bound}")]
    HorizonTooShort { horizon: u64, bound: u64 },
    #[error("start state {start} out of range ({state_count} product states)")]
    StartOutOfRange { start: usize, state_count: usize },
    #[error("cannot sample `{0}`; only X, U and U[k1,k2] are supported")]
    Unsupported(String),
    #[error("bounded until with k1 > k2")]
    EmptyWindow,
    #[error(transparent)]
    Check(#[from] CheckError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SimConfig {
    pub trials: u64,
    pub horizon: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub estimate: f64,
    pub standard_error: f64,
    pub successes: u64,
    pub trials: u64,
    pub horizon: u64,
    pub seed: u64,
    /// Set for unbounded until, which is cut off at the horizon and so only
    /// bounds the true probability from below.
    pub lower_bound: bool,
}

/// A path objective on satisfaction vectors.
#[derive(Debug, Clone, Copy)]
pub enum SampledPath<'a> {
    Next(&'a SatVector),
    Until {
        sat1: &'a SatVector,
        sat2: &'a SatVector,
        k1: u64,
        k2: u64,
    },
}

/// Cumulative thresholds per base state; `None` stands for `2^64`.
struct Sampler {
    rows: Vec<Vec<(StateIndex, Option<u64>)>>,
}

impl Sampler {
    fn new(m: &Dtmc) -> Self {
        let rows = (0..m.state_count())
            .map(|s| {
                let mut cumulative = crate::rational::Rational::default();
                m.successors(s)
                    .iter()
                    .map(|(t, p)| {
                        cumulative += p;
                        (*t, scaled_u64_threshold(&cumulative))
                    })
                    .collect()
            })
            .collect();
        Sampler { rows }
    }

    fn step_base(&self, s: StateIndex, rng: &mut ChaCha8Rng) -> StateIndex {
        let u = rng.next_u64();
        let row = &self.rows[s];
        row.iter()
            .find(|(_, threshold)| threshold.map_or(true, |t| u < t))
            .or(row.last())
            .map(|(t, _)| *t)
            .expect("stochastic rows are nonempty")
    }

    /// One product step: every component moves independently.
    fn step(&self, pc: &ProductChain, state: usize, rng: &mut ChaCha8Rng) -> usize {
        (1..=pc.arity()).fold(state, |acc, i| {
            let stride = pc.stride(i);
            let current = pc.component(state, i);
            let next = self.step_base(current, rng);
            acc - current * stride + next * stride
        })
    }
}

fn trial(pc: &ProductChain, sampler: &Sampler, path: SampledPath, start: usize, rng: &mut ChaCha8Rng) -> bool {
    match path {
        SampledPath::Next(target) => target.get(sampler.step(pc, start, rng)),
        SampledPath::Until { sat1, sat2, k1, k2 } => {
            let mut s = start;
            for j in 0..=k2 {
                if j >= k1 && sat2.get(s) {
                    return true;
                }
                if !sat1.get(s) || j == k2 {
                    return false;
                }
                s = sampler.step(pc, s, rng);
            }
            false
        }
    }
}

/// Estimates the probability of `path` from product state `start`.
pub fn estimate_path(
    pc: &ProductChain,
    path: SampledPath,
    start: usize,
    config: &SimConfig,
) -> Result<Estimate, SimError> {
    if config.trials == 0 {
        return Err(SimError::NoTrials);
    }
    if config.horizon == 0 {
        return Err(SimError::NoHorizon);
    }
    if start >= pc.state_count() {
        return Err(SimError::StartOutOfRange {
            start,
            state_count: pc.state_count(),
        });
    }
    if let SampledPath::Until { k1, k2, .. } = path {
        if k1 > k2 {
            return Err(SimError::EmptyWindow);
        }
    }
    let sampler = Sampler::new(pc.base());
    let successes: u64 = (0..WORKERS)
        .into_par_iter()
        .map(|w| {
            let share = config.trials / WORKERS + u64::from(w < config.trials % WORKERS);
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(w);
            (0..share)
                .filter(|_| trial(pc, &sampler, path, start, &mut rng))
                .count() as u64
        })
        .sum();
    let p = successes as f64 / config.trials as f64;
    Ok(Estimate {
        estimate: p,
        standard_error: (p * (1.0 - p) / config.trials as f64).sqrt(),
        successes,
        trials: config.trials,
        horizon: config.horizon,
        seed: config.seed,
        lower_bound: false,
    })
}

/// Estimates `P(phi)` from `start`, where `phi` is a renamed core path
/// formula. Operand satisfaction is computed exactly; only the path measure
/// is sampled. Unbounded until runs to the horizon and is flagged as a lower
/// bound.
pub fn estimate(
    pc: &ProductChain,
    phi: &PathFormula,
    start: usize,
    config: &SimConfig,
) -> Result<Estimate, SimError> {
    if !matches!(
        phi,
        PathFormula::Next(_) | PathFormula::Until(..) | PathFormula::BoundedUntil(..)
    ) {
        return Err(SimError::Unsupported(phi.to_string()));
    }
    let mut table = LabelTable::new();
    for operand in phi.operands() {
        table.label(pc, operand)?;
    }
    let sat = |f| table.sat(f).expect("operand labeled");
    match phi {
        PathFormula::Next(f) => estimate_path(pc, SampledPath::Next(sat(f)), start, config),
        PathFormula::BoundedUntil(l, r, k1, k2) => {
            if config.horizon < *k2 {
                return Err(SimError::HorizonTooShort {
                    horizon: config.horizon,
                    bound: *k2,
                });
            }
            let path = SampledPath::Until {
                sat1: sat(l),
                sat2: sat(r),
                k1: *k1,
                k2: *k2,
            };
            estimate_path(pc, path, start, config)
        }
        PathFormula::Until(l, r) => {
            let path = SampledPath::Until {
                sat1: sat(l),
                sat2: sat(r),
                k1: 0,
                k2: config.horizon,
            };
            let mut e = estimate_path(pc, path, start, config)?;
            e.lower_bound = true;
            Ok(e)
        }
        other => unreachable!("`{other}` rejected above"),
    }
}
