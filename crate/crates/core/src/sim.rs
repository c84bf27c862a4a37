//! Monte Carlo trials of the exact policy.

use std::collections::HashMap;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::model::{restrict, Instance, KnowledgeState, Status, VertexId, World};
use crate::oracle::{simulate_policy, Outcome};
use crate::prob::{Exact, Probability};
use crate::solver::{ExactSolver, Move, Policy};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialBatch {
    pub n: u64,
    pub seed: u64,
    pub successes: u64,
    /// `successes / n`, reported as 0 for an empty batch.
    pub rate: f64,
    /// `sqrt(rate * (1 - rate) / n)`.
    pub stderr: f64,
    /// False for an empty batch.
    pub rate_defined: bool,
}

impl TrialBatch {
    fn new(n: u64, seed: u64, successes: u64) -> Self {
        if n == 0 {
            return TrialBatch {
                n,
                seed,
                successes,
                rate: 0.0,
                stderr: 0.0,
                rate_defined: false,
            };
        }
        let rate = successes as f64 / n as f64;
        TrialBatch {
            n,
            seed,
            successes,
            rate,
            stderr: (rate * (1.0 - rate) / n as f64).sqrt(),
            rate_defined: true,
        }
    }

    /// Whether `expected` lies within `sigmas` standard errors of the rate.
    pub fn within(&self, expected: f64, sigmas: f64) -> bool {
        (self.rate - expected).abs() <= sigmas * self.stderr
    }
}

/// Seed of trial `i` in a batch. Counter-based, so trials can run in any
/// order.
pub fn derive_trial_seed(seed: u64, i: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    rng.next_u64()
}

/// Each edge is independently down with its failure probability.
pub fn sample_world(instance: &Instance, trial_seed: u64) -> World {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
    let p_fail: HashMap<_, f64> = instance
        .edges
        .iter()
        .map(|e| (e.id, Probability::to_f64(&e.p_fail)))
        .collect();
    World::from_fn(instance, |e| {
        if rng.gen::<f64>() < p_fail[&e] {
            Status::Down
        } else {
            Status::Up
        }
    })
}

/// The exact policy with its decisions cached per vertex and forward-cone
/// knowledge.
pub struct CachedExactPolicy {
    solver: ExactSolver<Exact>,
    decisions: HashMap<(VertexId, KnowledgeState), Move>,
}

impl CachedExactPolicy {
    pub fn new(instance: &Instance) -> Result<Self> {
        Ok(CachedExactPolicy {
            solver: ExactSolver::new(instance)?,
            decisions: HashMap::new(),
        })
    }
}

impl Policy for CachedExactPolicy {
    fn next_move(&mut self, at: VertexId, knowledge: &KnowledgeState) -> Result<Move> {
        let key = (at, restrict(knowledge, self.solver.forward_cone(at)));
        if let Some(mv) = self.decisions.get(&key) {
            return Ok(*mv);
        }
        let mv = self.solver.next_move(at, &key.1)?;
        self.decisions.insert(key, mv);
        Ok(mv)
    }
}

/// Runs `n` trials of the exact policy. The batch depends only on
/// `(instance, n, seed)`.
pub fn run_trials(instance: &Instance, n: u64, seed: u64) -> Result<TrialBatch> {
    CachedExactPolicy::new(instance)?;
    let successes = (0..n)
        .into_par_iter()
        .map_init(
            || CachedExactPolicy::new(instance).expect("validated above"),
            |policy, i| {
                let world = sample_world(instance, derive_trial_seed(seed, i));
                let trace = simulate_policy(instance, &world, policy)?;
                Ok(u64::from(trace.outcome == Outcome::Reached))
            },
        )
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(TrialBatch::new(n, seed, successes))
}
