//! Seeded random instances for property tests, oracle sweeps and gap
//! searches.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{prune_extraneous, Edge, EdgeId, Instance, SightEntry, Task};
use crate::prob::Exact;

/// Which observers a generated sight entry may have.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SightKind {
    /// Any vertex at or before the edge's tail.
    #[default]
    Any,
    /// Only the edge's own tail.
    ImmediateOnly,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorConfig {
    pub min_vertices: u32,
    pub max_vertices: u32,
    /// Chance that each forward pair `i < j` gets an edge.
    pub edge_density: f64,
    /// Chance that each admissible (observer, edge) pair becomes a sight entry.
    pub sight_density: f64,
    /// Upper bound on edges after pruning; larger draws are rejected.
    pub max_edges: usize,
    /// Surplus sight entries are dropped at random.
    pub max_sight: usize,
    pub palette: Vec<Exact>,
    pub sight_kind: SightKind,
    pub seed: u64,
    pub max_attempts: usize,
}

/// Failure probabilities `{0, 1/4, 1/2, 3/4, 1}`.
pub fn quarter_palette() -> Vec<Exact> {
    (0..=4).map(|i| Exact::new(i.into(), 4.into())).collect()
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            min_vertices: 3,
            max_vertices: 6,
            edge_density: 0.5,
            sight_density: 0.3,
            max_edges: 9,
            max_sight: 4,
            palette: quarter_palette(),
            sight_kind: SightKind::Any,
            seed: 7,
            max_attempts: 10_000,
        }
    }
}

/// Draws `count` pruned, valid instances. The same config always yields the
/// same sequence.
pub fn generate(config: &GeneratorConfig, count: usize) -> Result<Vec<Instance>> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    (0..count).map(|_| generate_one(config, &mut rng)).collect()
}

fn generate_one(config: &GeneratorConfig, rng: &mut ChaCha8Rng) -> Result<Instance> {
    let min_v = config.min_vertices.max(2);
    let max_v = config.max_vertices.max(min_v);
    for _ in 0..config.max_attempts {
        let n = rng.gen_range(min_v..=max_v);
        let mut edges = Vec::new();
        for tail in 1..n {
            for head in tail + 1..=n {
                if rng.gen_bool(config.edge_density.clamp(0.0, 1.0)) {
                    let p_fail = config
                        .palette
                        .choose(rng)
                        .cloned()
                        .unwrap_or_else(|| Exact::new(0.into(), 1.into()));
                    edges.push(Edge {
                        id: EdgeId::new(tail, head),
                        p_fail,
                    });
                }
            }
        }
        let drawn = Instance {
            vertices: n,
            edges,
            sights: Vec::new(),
            task: Task { start: 1, dest: n },
        };
        let Ok(mut instance) = prune_extraneous(&drawn) else {
            continue;
        };
        if instance.edges.len() > config.max_edges {
            continue;
        }
        let mut sights = Vec::new();
        for edge in &instance.edges {
            let observers = match config.sight_kind {
                SightKind::Any => 1..=edge.id.tail,
                SightKind::ImmediateOnly => edge.id.tail..=edge.id.tail,
            };
            for observer in observers {
                if rng.gen_bool(config.sight_density.clamp(0.0, 1.0)) {
                    sights.push(SightEntry {
                        observer,
                        edge: edge.id,
                    });
                }
            }
        }
        if sights.len() > config.max_sight {
            sights.shuffle(rng);
            sights.truncate(config.max_sight);
        }
        sights.sort();
        instance.sights = sights;
        return Ok(instance);
    }
    Err(Error::GeneratorExhausted(config.max_attempts))
}
