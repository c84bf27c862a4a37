//! Exact success probabilities and next-move decisions.
//!
//! `success(e, k)` is the probability that a pathfinder who has decided to
//! cross `e` with knowledge `k` eventually reaches the destination, given
//! that it keeps acting ideally. It factors as the chance of crossing `e`
//! times a continuation value at `head(e)`:
//!
//! ```text
//! success(e, k) = cross(e, k) * Σ_{k' ∈ reveal(head, k)} P(k') * max_f success(f, k')
//! ```
//!
//! The continuation only depends on what is known about edges ahead of
//! `head(e)`, so it is memoized on `(e, k restricted to the forward cone of
//! head(e))`. Knowledge about edges behind the pathfinder can never change a
//! later decision.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{self, validate, EdgeId, EdgeStatus, Instance, KnowledgeState, Status, Task, VertexId};
use crate::prob::{Exact, Probability, DEFAULT_TOLERANCE};

/// Per-edge parameters converted into the solver's arithmetic.
#[derive(Clone, Debug)]
pub(crate) struct EdgeParams<P> {
    pub p_fail: P,
    pub p_up: P,
}

/// Lookup tables shared by the exact and approximate solvers.
#[derive(Clone, Debug)]
pub(crate) struct Index<P> {
    pub task: Task,
    pub tolerance: f64,
    pub params: HashMap<EdgeId, EdgeParams<P>>,
    /// Outgoing edges per vertex, sorted by head.
    pub out: Vec<Vec<EdgeId>>,
    pub sight: Vec<BTreeSet<EdgeId>>,
    pub cone: Vec<BTreeSet<EdgeId>>,
    /// Sighted edges that are also ahead of the vertex.
    pub visible_ahead: Vec<Vec<EdgeId>>,
}

impl<P: Probability> Index<P> {
    pub fn build(instance: &Instance, tolerance: f64) -> Result<Self> {
        let report = validate(instance);
        if !report.is_ok() {
            return Err(Error::Invalid(report));
        }
        let n = instance.vertices as usize;
        let params = instance
            .edges
            .iter()
            .map(|e| {
                let p_fail = P::from_exact(&e.p_fail);
                let p_up = p_fail.complement();
                (e.id, EdgeParams { p_fail, p_up })
            })
            .collect();
        let mut out = vec![Vec::new(); n + 1];
        for e in &instance.edges {
            out[e.id.tail as usize].push(e.id);
        }
        for list in &mut out {
            list.sort_by_key(|e| e.head);
        }
        let mut sight = vec![BTreeSet::new(); n + 1];
        let mut cone = vec![BTreeSet::new(); n + 1];
        for v in 1..=instance.vertices {
            sight[v as usize] = model::sight_of(instance, v)?;
            cone[v as usize] = model::forward_cone(instance, v)?;
        }
        let visible_ahead = (0..=n)
            .map(|v| sight[v].intersection(&cone[v]).copied().collect())
            .collect();
        Ok(Index {
            task: instance.task,
            tolerance,
            params,
            out,
            sight,
            cone,
            visible_ahead,
        })
    }

    fn vertex(&self, v: VertexId) -> Result<usize> {
        if v == 0 || v as usize >= self.out.len() {
            return Err(Error::UnknownVertex(v));
        }
        Ok(v as usize)
    }

    pub fn param(&self, e: EdgeId) -> Result<&EdgeParams<P>> {
        self.params.get(&e).ok_or(Error::UnknownEdge(e))
    }

    pub fn out_edges(&self, v: VertexId) -> Result<&[EdgeId]> {
        Ok(&self.out[self.vertex(v)?])
    }

    pub fn cone(&self, v: VertexId) -> &BTreeSet<EdgeId> {
        &self.cone[v as usize]
    }

    pub fn cross_prob(&self, e: EdgeId, k: &KnowledgeState) -> Result<P> {
        let params = self.param(e)?;
        Ok(match k.get(e) {
            EdgeStatus::Up => P::one(),
            EdgeStatus::Down => P::zero(),
            EdgeStatus::Unknown => params.p_up.clone(),
        })
    }

    /// Every way the still-unknown visible-ahead edges of `v` can turn out,
    /// with its probability. Assignments are enumerated with the first edge
    /// varying slowest and `Up` before `Down`.
    pub fn reveal(&self, v: VertexId, k: &KnowledgeState) -> Result<Vec<(KnowledgeState, P)>> {
        let fresh: Vec<EdgeId> = self.visible_ahead[self.vertex(v)?]
            .iter()
            .copied()
            .filter(|e| !k.is_known(*e))
            .collect();
        let mut outcomes = vec![(k.clone(), P::one())];
        for e in fresh {
            let params = self.param(e)?;
            let mut next = Vec::with_capacity(outcomes.len() * 2);
            for (known, weight) in outcomes {
                for (status, p) in [(Status::Up, &params.p_up), (Status::Down, &params.p_fail)] {
                    next.push((known.clone().with(e, status)?, weight.mul(p)));
                }
            }
            outcomes = next;
        }
        Ok(outcomes)
    }

    pub fn is_better(&self, a: &P, b: &P) -> bool {
        a.compare(b, self.tolerance) == Ordering::Greater
    }

    pub fn ties(&self, a: &P, b: &P) -> bool {
        a.compare(b, self.tolerance) == Ordering::Equal
    }
}

/// Cache key for continuation values: the edge just crossed and what is
/// known about the edges ahead of its head.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MemoKey {
    pub edge: EdgeId,
    pub knowledge: KnowledgeState,
}

pub(crate) trait ContinuationCache<P> {
    fn lookup(&mut self, key: &MemoKey) -> Option<P>;
    fn store(&mut self, key: MemoKey, value: P);
}

/// `cross_prob(e, k)` times the (cached) continuation at `head(e)`.
pub(crate) fn success_with<P: Probability, C: ContinuationCache<P>>(
    index: &Index<P>,
    cache: &mut C,
    e: EdgeId,
    k: &KnowledgeState,
) -> Result<P> {
    let cross = index.cross_prob(e, k)?;
    if cross.is_zero() {
        return Ok(cross);
    }
    let key = MemoKey {
        edge: e,
        knowledge: model::restrict(k, index.cone(e.head)),
    };
    let cont = match cache.lookup(&key) {
        Some(v) => v,
        None => {
            let v = continuation(index, cache, &key)?;
            cache.store(key, v.clone());
            v
        }
    };
    Ok(cross.mul(&cont))
}

fn continuation<P: Probability, C: ContinuationCache<P>>(index: &Index<P>, cache: &mut C, key: &MemoKey) -> Result<P> {
    let head = key.edge.head;
    if head == index.task.dest {
        return Ok(P::one());
    }
    let mut total = P::zero();
    for (known, weight) in index.reveal(head, &key.knowledge)? {
        if weight.is_zero() {
            continue;
        }
        let best = best_onward(index, cache, head, &known)?;
        total = total.add(&weight.mul(&best));
    }
    Ok(total)
}

/// Largest success over the edges leaving `v` that are not known down; 0
/// when there are none.
fn best_onward<P: Probability, C: ContinuationCache<P>>(
    index: &Index<P>,
    cache: &mut C,
    v: VertexId,
    k: &KnowledgeState,
) -> Result<P> {
    let mut best = P::zero();
    for &f in index.out_edges(v)? {
        if k.is_down(f) {
            continue;
        }
        let value = success_with(index, cache, f, k)?;
        if index.is_better(&value, &best) {
            best = value;
        }
    }
    Ok(best)
}

/// Success values of every candidate edge leaving `v` (known-down edges are
/// never candidates).
pub(crate) fn candidate_values<P: Probability, C: ContinuationCache<P>>(
    index: &Index<P>,
    cache: &mut C,
    v: VertexId,
    k: &KnowledgeState,
) -> Result<Vec<(EdgeId, P)>> {
    index
        .out_edges(v)?
        .iter()
        .filter(|f| !k.is_down(**f))
        .map(|&f| Ok((f, success_with(index, cache, f, k)?)))
        .collect()
}

/// Edges attaining the maximum of `values`, or nothing when that maximum is 0.
pub(crate) fn maximizers<P: Probability>(index: &Index<P>, values: &[(EdgeId, P)]) -> BTreeSet<EdgeId> {
    let mut best = P::zero();
    for (_, v) in values {
        if index.is_better(v, &best) {
            best = v.clone();
        }
    }
    if best.is_zero() {
        return BTreeSet::new();
    }
    values
        .iter()
        .filter(|(_, v)| index.ties(v, &best))
        .map(|(e, _)| *e)
        .collect()
}

/// Among equally good edges, the one with the highest head index wins.
pub fn tiebreak<'a>(candidates: impl IntoIterator<Item = &'a EdgeId>) -> Result<EdgeId> {
    candidates
        .into_iter()
        .copied()
        .max_by_key(|e| (e.head, e.tail))
        .ok_or(Error::EmptyCandidates)
}

/// What the pathfinder does next.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Move {
    Cross(EdgeId),
    /// Every remaining continuation is known to fail.
    Halt,
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Move::Cross(e) => write!(f, "{e}"),
            Move::Halt => f.write_str("halt"),
        }
    }
}

/// Anything that can steer a pathfinder through a trial.
pub trait Policy {
    fn next_move(&mut self, at: VertexId, knowledge: &KnowledgeState) -> Result<Move>;
}

/// Adapts a closure into a [`Policy`].
pub struct FnPolicy<F>(pub F);

impl<F: FnMut(VertexId, &KnowledgeState) -> Move> Policy for FnPolicy<F> {
    fn next_move(&mut self, at: VertexId, knowledge: &KnowledgeState) -> Result<Move> {
        Ok((self.0)(at, knowledge))
    }
}

impl<P: Probability> Policy for ExactSolver<P> {
    fn next_move(&mut self, at: VertexId, knowledge: &KnowledgeState) -> Result<Move> {
        ExactSolver::next_move(self, at, knowledge)
    }
}

/// Asks whether the ideal pathfinder, holding `knowledge`, takes `edge`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecisionQuery {
    pub edge: EdgeId,
    /// Must hold a status for every edge the tail of `edge` can see.
    pub knowledge: KnowledgeState,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MemoStats {
    /// Distinct keys evaluated.
    pub entries: usize,
    pub hits: usize,
}

#[derive(Clone, Debug)]
struct Memo<P> {
    table: HashMap<MemoKey, P>,
    hits: usize,
    trace: Option<Vec<MemoKey>>,
}

impl<P> Default for Memo<P> {
    fn default() -> Self {
        Memo {
            table: HashMap::new(),
            hits: 0,
            trace: None,
        }
    }
}

impl<P: Clone> ContinuationCache<P> for Memo<P> {
    fn lookup(&mut self, key: &MemoKey) -> Option<P> {
        if let Some(trace) = &mut self.trace {
            trace.push(key.clone());
        }
        let found = self.table.get(key).cloned();
        if found.is_some() {
            self.hits += 1;
        }
        found
    }

    fn store(&mut self, key: MemoKey, value: P) {
        self.table.insert(key, value);
    }
}

/// Exact solver with an unbounded per-instance memo table.
///
/// With `P = Exact` every value is an exact rational and ties are exact;
/// with `P = f64` values within the configured tolerance tie.
#[derive(Clone, Debug)]
pub struct ExactSolver<P = Exact> {
    index: Index<P>,
    memo: Memo<P>,
}

impl<P: Probability> ExactSolver<P> {
    /// Fails if the instance does not validate.
    pub fn new(instance: &Instance) -> Result<Self> {
        Self::with_tolerance(instance, DEFAULT_TOLERANCE)
    }

    pub fn with_tolerance(instance: &Instance, tolerance: f64) -> Result<Self> {
        Ok(ExactSolver {
            index: Index::build(instance, tolerance)?,
            memo: Memo::default(),
        })
    }

    /// Starts recording every memo lookup, in order.
    pub fn record_lookups(&mut self) {
        self.memo.trace.get_or_insert_with(Vec::new);
    }

    pub fn lookup_trace(&self) -> &[MemoKey] {
        self.memo.trace.as_deref().unwrap_or(&[])
    }

    /// Edges ahead of `v`; a decision at `v` depends only on knowledge of these.
    pub fn forward_cone(&self, v: VertexId) -> &BTreeSet<EdgeId> {
        self.index.cone(v)
    }

    pub fn task(&self) -> Task {
        self.index.task
    }

    /// Memo table keys, for inspection.
    pub fn memo_keys(&self) -> impl Iterator<Item = &MemoKey> {
        self.memo.table.keys()
    }

    /// Probability of getting across `e` alive: 1 if known up, 0 if known
    /// down, `1 - p_fail` otherwise.
    pub fn cross_prob(&self, e: EdgeId, k: &KnowledgeState) -> Result<P> {
        self.index.cross_prob(e, k)
    }

    /// Distribution over knowledge after arriving at `v` and looking around.
    /// Only sighted edges ahead of `v` are revealed; the weights sum to 1.
    pub fn reveal_distribution(&self, v: VertexId, k: &KnowledgeState) -> Result<Vec<(KnowledgeState, P)>> {
        self.index.reveal(v, k)
    }

    pub fn success(&mut self, e: EdgeId, k: &KnowledgeState) -> Result<P> {
        success_with(&self.index, &mut self.memo, e, k)
    }

    /// Success of every edge leaving `v` that is not known down.
    pub fn candidate_values(&mut self, v: VertexId, k: &KnowledgeState) -> Result<Vec<(EdgeId, P)>> {
        candidate_values(&self.index, &mut self.memo, v, k)
    }

    /// Outgoing edges of `v` that attain the maximum success; empty when
    /// every candidate is worthless.
    pub fn optimal_set(&mut self, v: VertexId, k: &KnowledgeState) -> Result<BTreeSet<EdgeId>> {
        let values = self.candidate_values(v, k)?;
        Ok(maximizers(&self.index, &values))
    }

    /// Best success available from `v`, 0 at a dead end.
    pub fn best_value(&mut self, v: VertexId, k: &KnowledgeState) -> Result<P> {
        if v == self.index.task.dest {
            return Ok(P::one());
        }
        best_onward(&self.index, &mut self.memo, v, k)
    }

    pub fn next_move(&mut self, v: VertexId, k: &KnowledgeState) -> Result<Move> {
        let optimal = self.optimal_set(v, k)?;
        if optimal.is_empty() {
            return Ok(Move::Halt);
        }
        Ok(Move::Cross(tiebreak(&optimal)?))
    }

    /// True iff the queried edge is optimal, wins the tiebreak and has a
    /// positive success probability.
    pub fn decide(&mut self, query: &DecisionQuery) -> Result<bool> {
        let edge = query.edge;
        self.index.param(edge)?;
        let tail = self.index.vertex(edge.tail)?;
        if let Some(missing) = self.index.sight[tail].iter().find(|e| !query.knowledge.is_known(**e)) {
            return Err(Error::NotMaximallyRestrictive(*missing));
        }
        Ok(self.next_move(edge.tail, &query.knowledge)? == Move::Cross(edge))
    }

    pub fn memo_stats(&self) -> MemoStats {
        MemoStats {
            entries: self.memo.table.len(),
            hits: self.memo.hits,
        }
    }
}
