//! Approximate solving with a bounded similarity cache.
//!
//! The recursion is the exact one; only the cache differs. Before a
//! continuation is computed, the cache is asked for an entry on the same
//! edge whose forward knowledge differs in at most `similarity_threshold`
//! edge statuses. If one exists its value is reused, and the queried key is
//! stored with that value as well. With threshold 0 nothing is ever
//! approximated and results equal the exact solver's bit for bit.
//!
//! The cache holds at most `max_entries` keys and evicts the least recently
//! used one. Exact hits refresh recency; similar hits do not refresh the
//! entry they borrowed from.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::model::{EdgeId, Instance, KnowledgeState, VertexId};
use crate::prob::{Exact, Probability, DEFAULT_TOLERANCE};
use crate::solver::{
    candidate_values, maximizers, success_with, tiebreak, ContinuationCache, ExactSolver, Index, MemoKey, Move,
};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Eviction {
    #[default]
    LeastRecentlyUsed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ApproxConfig {
    /// Largest Hamming distance between forward knowledge states that still
    /// counts as similar.
    pub similarity_threshold: usize,
    /// Cache capacity, at least 1.
    pub max_entries: usize,
    pub eviction: Eviction,
}

impl ApproxConfig {
    pub fn new(similarity_threshold: usize, max_entries: usize) -> Result<Self> {
        if max_entries == 0 {
            return Err(Error::ZeroCapacity);
        }
        Ok(ApproxConfig {
            similarity_threshold,
            max_entries,
            eviction: Eviction::LeastRecentlyUsed,
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CacheReport {
    pub exact_hits: usize,
    pub similar_hits: usize,
    pub misses: usize,
    pub evictions: usize,
    /// Largest number of entries held at any point.
    pub peak_entries: usize,
}

/// LRU cache with same-edge similarity lookups.
#[derive(Clone, Debug)]
pub struct SimilarityCache<V> {
    config: ApproxConfig,
    entries: HashMap<MemoKey, (V, u64)>,
    recency: BTreeMap<u64, MemoKey>,
    by_edge: HashMap<EdgeId, BTreeSet<KnowledgeState>>,
    clock: u64,
    report: CacheReport,
}

impl<V: Clone> SimilarityCache<V> {
    pub fn new(config: ApproxConfig) -> Self {
        SimilarityCache {
            config,
            entries: HashMap::new(),
            recency: BTreeMap::new(),
            by_edge: HashMap::new(),
            clock: 0,
            report: CacheReport::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn report(&self) -> CacheReport {
        self.report
    }

    fn tick(&mut self) -> u64 {
        self.clock += 1;
        self.clock
    }

    /// Exact entry, else the nearest similar one (most recent on ties).
    pub fn lookup(&mut self, key: &MemoKey) -> Option<V> {
        if let Some((value, stamp)) = self.entries.get(key) {
            let (value, old) = (value.clone(), *stamp);
            let now = self.tick();
            self.recency.remove(&old);
            self.recency.insert(now, key.clone());
            self.entries.get_mut(key).expect("present").1 = now;
            self.report.exact_hits += 1;
            return Some(value);
        }
        let threshold = self.config.similarity_threshold;
        if threshold > 0 {
            let nearest = self.by_edge.get(&key.edge).and_then(|states| {
                states
                    .iter()
                    .map(|k| (k.hamming(&key.knowledge), k))
                    .filter(|(d, _)| *d <= threshold)
                    .map(|(d, k)| {
                        let candidate = MemoKey {
                            edge: key.edge,
                            knowledge: k.clone(),
                        };
                        let stamp = self.entries[&candidate].1;
                        (d, std::cmp::Reverse(stamp), candidate)
                    })
                    .min()
            });
            if let Some((_, _, borrowed)) = nearest {
                let value = self.entries[&borrowed].0.clone();
                self.report.similar_hits += 1;
                self.insert(key.clone(), value.clone());
                return Some(value);
            }
        }
        self.report.misses += 1;
        None
    }

    pub fn insert(&mut self, key: MemoKey, value: V) {
        if let Some((_, old)) = self.entries.remove(&key) {
            self.recency.remove(&old);
        } else if self.entries.len() >= self.config.max_entries {
            if let Some((_, victim)) = self.recency.pop_first() {
                self.entries.remove(&victim);
                if let Some(states) = self.by_edge.get_mut(&victim.edge) {
                    states.remove(&victim.knowledge);
                }
                self.report.evictions += 1;
            }
        }
        let now = self.tick();
        self.recency.insert(now, key.clone());
        self.by_edge.entry(key.edge).or_default().insert(key.knowledge.clone());
        self.entries.insert(key, (value, now));
        self.report.peak_entries = self.report.peak_entries.max(self.entries.len());
    }
}

impl<P: Clone> ContinuationCache<P> for SimilarityCache<P> {
    fn lookup(&mut self, key: &MemoKey) -> Option<P> {
        SimilarityCache::lookup(self, key)
    }

    fn store(&mut self, key: MemoKey, value: P) {
        self.insert(key, value)
    }
}

/// Replays a fixed sequence of lookups (each miss is inserted at once) and
/// reports the cache's behaviour. Values are irrelevant here.
pub fn replay(keys: &[MemoKey], config: ApproxConfig) -> CacheReport {
    let mut cache = SimilarityCache::<()>::new(config);
    for key in keys {
        if cache.lookup(key).is_none() {
            cache.insert(key.clone(), ());
        }
    }
    cache.report()
}

/// The exact recursion running on a [`SimilarityCache`]. The cache persists
/// across queries on the same solver.
#[derive(Clone, Debug)]
pub struct ApproxSolver<P = Exact> {
    index: Index<P>,
    cache: SimilarityCache<P>,
}

impl<P: Probability> ApproxSolver<P> {
    pub fn new(instance: &Instance, config: ApproxConfig) -> Result<Self> {
        Self::with_tolerance(instance, config, DEFAULT_TOLERANCE)
    }

    pub fn with_tolerance(instance: &Instance, config: ApproxConfig, tolerance: f64) -> Result<Self> {
        Ok(ApproxSolver {
            index: Index::build(instance, tolerance)?,
            cache: SimilarityCache::new(config),
        })
    }

    pub fn success(&mut self, e: EdgeId, k: &KnowledgeState) -> Result<P> {
        success_with(&self.index, &mut self.cache, e, k)
    }

    pub fn candidate_values(&mut self, v: VertexId, k: &KnowledgeState) -> Result<Vec<(EdgeId, P)>> {
        candidate_values(&self.index, &mut self.cache, v, k)
    }

    pub fn best_value(&mut self, v: VertexId, k: &KnowledgeState) -> Result<P> {
        if v == self.index.task.dest {
            return Ok(P::one());
        }
        let values = self.candidate_values(v, k)?;
        let mut best = P::zero();
        for (_, value) in values {
            if self.index.is_better(&value, &best) {
                best = value;
            }
        }
        Ok(best)
    }

    pub fn next_move(&mut self, v: VertexId, k: &KnowledgeState) -> Result<Move> {
        let values = self.candidate_values(v, k)?;
        let optimal = maximizers(&self.index, &values);
        if optimal.is_empty() {
            return Ok(Move::Halt);
        }
        Ok(Move::Cross(tiebreak(&optimal)?))
    }

    pub fn report(&self) -> CacheReport {
        self.cache.report()
    }

    pub fn cache_len(&self) -> usize {
        self.cache.len()
    }
}

/// One-shot approximate success on a fresh cache.
pub fn approx_success<P: Probability>(
    instance: &Instance,
    e: EdgeId,
    k: &KnowledgeState,
    config: ApproxConfig,
) -> Result<(P, CacheReport)> {
    let mut solver = ApproxSolver::<P>::new(instance, config)?;
    let value = solver.success(e, k)?;
    Ok((value, solver.report()))
}

/// How the approximate solver fared against the exact one on an instance.
#[derive(Clone, Debug, PartialEq)]
pub struct AgreementRow {
    /// First moves agree in every initial scenario.
    pub decision_match: bool,
    /// Largest `|approx - exact|` of the root value over initial scenarios.
    pub value_gap: f64,
    pub scenarios: usize,
    pub report: CacheReport,
}

/// Runs every positive-probability initial scenario of each instance
/// through one approximate solver per instance, in reveal order, and
/// compares with the exact solver.
pub fn agreement_report(instances: &[Instance], config: ApproxConfig) -> Result<Vec<AgreementRow>> {
    instances
        .iter()
        .map(|instance| {
            let mut exact = ExactSolver::<Exact>::new(instance)?;
            let mut approx = ApproxSolver::<Exact>::new(instance, config)?;
            let start = instance.task.start;
            let mut row = AgreementRow {
                decision_match: true,
                value_gap: 0.0,
                scenarios: 0,
                report: CacheReport::default(),
            };
            for (k, weight) in exact.reveal_distribution(start, &KnowledgeState::new())? {
                if Probability::is_zero(&weight) {
                    continue;
                }
                row.scenarios += 1;
                let truth = exact.best_value(start, &k)?;
                let guess = approx.best_value(start, &k)?;
                let gap = Probability::to_f64(&(guess - truth)).abs();
                row.value_gap = row.value_gap.max(gap);
                if exact.next_move(start, &k)? != approx.next_move(start, &k)? {
                    row.decision_match = false;
                }
            }
            row.report = approx.report();
            Ok(row)
        })
        .collect()
}
