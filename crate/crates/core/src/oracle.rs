//! Brute-force reference computations.
//!
//! Nothing here shares code with the memoized solver. Values are obtained by
//! enumerating complete worlds consistent with what the pathfinder knows,
//! following each world forward and re-observing at every vertex, with no
//! forward-cone truncation and no caching between calls. This is slow, so
//! it refuses instances with more edges than a configurable cap.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{self, EdgeId, Instance, KnowledgeState, Status, VertexId, World};
use crate::prob::{Exact, Probability, DEFAULT_TOLERANCE};
use crate::solver::{tiebreak, ExactSolver, Move, Policy};

/// Default limit on the number of edges whose worlds get enumerated.
pub const DEFAULT_WORLD_CAP: usize = 20;
/// Worlds are bitmasks, so the cap can never exceed this.
const MAX_WORLD_CAP: usize = 30;

#[derive(Clone, Debug, PartialEq)]
pub struct WorldWeight<P> {
    pub world: World,
    pub weight: P,
}

fn check_cap(instance: &Instance, cap: usize) -> Result<()> {
    let edges = instance.edges.len();
    if edges > cap.min(MAX_WORLD_CAP) {
        return Err(Error::TooManyEdges { edges, cap });
    }
    Ok(())
}

/// All `2^|E|` worlds with their probabilities. Edges are taken in instance
/// order, the first varying slowest, `Up` before `Down`.
pub fn enumerate_worlds<P: Probability>(instance: &Instance, cap: usize) -> Result<Vec<WorldWeight<P>>> {
    check_cap(instance, cap)?;
    let mut worlds = vec![(Vec::new(), P::one())];
    for edge in &instance.edges {
        let p_fail = P::from_exact(&edge.p_fail);
        let p_up = p_fail.complement();
        let mut next = Vec::with_capacity(worlds.len() * 2);
        for (statuses, weight) in worlds {
            let mut up: Vec<(EdgeId, Status)> = statuses;
            let mut down = up.clone();
            up.push((edge.id, Status::Up));
            down.push((edge.id, Status::Down));
            next.push((up, weight.mul(&p_up)));
            next.push((down, weight.mul(&p_fail)));
        }
        worlds = next;
    }
    Ok(worlds
        .into_iter()
        .map(|(statuses, weight)| WorldWeight {
            world: World::from_statuses(instance, statuses.into_iter().collect()).expect("every edge assigned"),
            weight,
        })
        .collect())
}

/// Knowledge as a pair of bitmasks over edge positions: which edges are
/// known, and which of those are down.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Known {
    mask: u32,
    down: u32,
}

/// Brute-force evaluator for one instance.
#[derive(Clone, Debug)]
pub struct Oracle<P = Exact> {
    edges: Vec<EdgeId>,
    p_up: Vec<P>,
    p_fail: Vec<P>,
    out: BTreeMap<VertexId, Vec<usize>>,
    sight: BTreeMap<VertexId, u32>,
    dest: VertexId,
    start: VertexId,
    tolerance: f64,
}

impl<P: Probability> Oracle<P> {
    pub fn new(instance: &Instance, cap: usize) -> Result<Self> {
        let report = model::validate(instance);
        if !report.is_ok() {
            return Err(Error::Invalid(report));
        }
        check_cap(instance, cap)?;
        let edges: Vec<EdgeId> = instance.edge_ids().collect();
        let position = |e: EdgeId| edges.iter().position(|x| *x == e).expect("validated");
        let mut out: BTreeMap<VertexId, Vec<usize>> = BTreeMap::new();
        for (i, e) in edges.iter().enumerate() {
            out.entry(e.tail).or_default().push(i);
        }
        let mut sight: BTreeMap<VertexId, u32> = BTreeMap::new();
        for s in &instance.sights {
            *sight.entry(s.observer).or_default() |= 1 << position(s.edge);
        }
        let p_fail: Vec<P> = instance.edges.iter().map(|e| P::from_exact(&e.p_fail)).collect();
        Ok(Oracle {
            p_up: p_fail.iter().map(P::complement).collect(),
            p_fail,
            edges,
            out,
            sight,
            dest: instance.task.dest,
            start: instance.task.start,
            tolerance: DEFAULT_TOLERANCE,
        })
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    fn encode(&self, k: &KnowledgeState) -> Result<Known> {
        let mut known = Known { mask: 0, down: 0 };
        for (e, status) in k.iter() {
            let i = self.edges.iter().position(|x| *x == e).ok_or(Error::UnknownEdge(e))?;
            known.mask |= 1 << i;
            if status == Status::Down {
                known.down |= 1 << i;
            }
        }
        Ok(known)
    }

    /// Every world consistent with `known`, weighted by the probability of
    /// its unknown part. Worlds are down-bitmasks.
    fn consistent_worlds(&self, known: Known) -> Vec<(u32, P)> {
        let mut worlds = vec![(known.down, P::one())];
        for i in 0..self.edges.len() {
            if known.mask & (1 << i) != 0 {
                continue;
            }
            let mut next = Vec::with_capacity(worlds.len() * 2);
            for (down, weight) in worlds {
                next.push((down, weight.mul(&self.p_up[i])));
                next.push((down | (1 << i), weight.mul(&self.p_fail[i])));
            }
            worlds = next;
        }
        worlds
    }

    fn is_better(&self, a: &P, b: &P) -> bool {
        a.compare(b, self.tolerance) == std::cmp::Ordering::Greater
    }

    /// Expected success of crossing edge `i` now and acting ideally after.
    fn edge_value(&self, i: usize, known: Known) -> P {
        let head = self.edges[i].head;
        let seen = self.sight.get(&head).copied().unwrap_or(0);
        // Worlds leading to the same knowledge at the head are pooled.
        let mut pooled: BTreeMap<Known, P> = BTreeMap::new();
        for (down, weight) in self.consistent_worlds(known) {
            if down & (1 << i) != 0 {
                continue;
            }
            let mask = known.mask | (1 << i) | seen;
            let next = Known {
                mask,
                down: down & mask,
            };
            let slot = pooled.entry(next).or_insert_with(P::zero);
            *slot = slot.add(&weight);
        }
        pooled.into_iter().fold(P::zero(), |acc, (next, weight)| {
            acc.add(&weight.mul(&self.value_at(head, next)))
        })
    }

    fn value_at(&self, v: VertexId, known: Known) -> P {
        if v == self.dest {
            return P::one();
        }
        let mut best = P::zero();
        for &i in self.out.get(&v).map(Vec::as_slice).unwrap_or(&[]) {
            if known.down & (1 << i) != 0 {
                continue;
            }
            let value = self.edge_value(i, known);
            if self.is_better(&value, &best) {
                best = value;
            }
        }
        best
    }

    /// Best achievable success from `v` holding `k`; 1 at the destination.
    pub fn value(&self, v: VertexId, k: &KnowledgeState) -> Result<P> {
        Ok(self.value_at(v, self.encode(k)?))
    }

    /// Expected success of each edge leaving `v` that is not known down.
    pub fn edge_values(&self, v: VertexId, k: &KnowledgeState) -> Result<Vec<(EdgeId, P)>> {
        let known = self.encode(k)?;
        Ok(self
            .out
            .get(&v)
            .map(Vec::as_slice)
            .unwrap_or(&[])
            .iter()
            .filter(|&&i| known.down & (1 << i) == 0)
            .map(|&i| (self.edges[i], self.edge_value(i, known)))
            .collect())
    }

    /// The ideal move at `v`, derived from [`Oracle::edge_values`].
    pub fn best_move(&self, v: VertexId, k: &KnowledgeState) -> Result<Move> {
        let values = self.edge_values(v, k)?;
        let mut best = P::zero();
        for (_, value) in &values {
            if self.is_better(value, &best) {
                best = value.clone();
            }
        }
        if best.is_zero() {
            return Ok(Move::Halt);
        }
        let optimal: Vec<EdgeId> = values
            .iter()
            .filter(|(_, value)| value.compare(&best, self.tolerance).is_eq())
            .map(|(e, _)| *e)
            .collect();
        Ok(Move::Cross(tiebreak(&optimal)?))
    }

    pub fn start(&self) -> VertexId {
        self.start
    }
}

/// [`Oracle::value`] without keeping the evaluator around.
pub fn value<P: Probability>(instance: &Instance, v: VertexId, k: &KnowledgeState, cap: usize) -> Result<P> {
    Oracle::<P>::new(instance, cap)?.value(v, k)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Reached,
    FailedOnEdge(EdgeId),
    Halted,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrialTrace {
    pub visited: Vec<VertexId>,
    pub chosen: Vec<EdgeId>,
    pub outcome: Outcome,
}

/// Plays one trial in a fixed world.
pub fn simulate_policy<Pol: Policy + ?Sized>(
    instance: &Instance,
    world: &World,
    policy: &mut Pol,
) -> Result<TrialTrace> {
    let dest = instance.task.dest;
    let mut at = instance.task.start;
    let mut knowledge = model::observe(instance, &KnowledgeState::new(), at, world)?;
    let mut trace = TrialTrace {
        visited: vec![at],
        chosen: Vec::new(),
        outcome: Outcome::Halted,
    };
    while at != dest {
        let edge = match policy.next_move(at, &knowledge)? {
            Move::Halt => return Ok(trace),
            Move::Cross(edge) => edge,
        };
        if edge.tail != at || instance.edge(edge).is_none() {
            return Err(Error::EdgeNotFrom { edge, vertex: at });
        }
        if knowledge.is_down(edge) {
            return Err(Error::PolicyChoseKnownDown(edge));
        }
        trace.chosen.push(edge);
        if world.status(edge) != Some(Status::Up) {
            trace.outcome = Outcome::FailedOnEdge(edge);
            return Ok(trace);
        }
        knowledge.learn(edge, Status::Up)?;
        at = edge.head;
        trace.visited.push(at);
        knowledge = model::observe(instance, &knowledge, at, world)?;
    }
    trace.outcome = Outcome::Reached;
    Ok(trace)
}

/// Probability that `policy` reaches the destination, by world enumeration.
pub fn policy_value<P: Probability, Pol: Policy + ?Sized>(
    instance: &Instance,
    policy: &mut Pol,
    cap: usize,
) -> Result<P> {
    let mut total = P::zero();
    for ww in enumerate_worlds::<P>(instance, cap)? {
        if simulate_policy(instance, &ww.world, policy)?.outcome == Outcome::Reached {
            total = total.add(&ww.weight);
        }
    }
    Ok(total)
}

/// The ideal policy for the same graph with every line-of-sight removed:
/// at each vertex it follows the most reliable remaining path, ranked by
/// the product of `1 - p_fail`.
#[derive(Clone, Debug)]
pub struct SightBlindPolicy<P = Exact> {
    blind: Instance,
    best: BTreeMap<VertexId, P>,
    choice: BTreeMap<VertexId, Move>,
}

impl<P: Probability> SightBlindPolicy<P> {
    pub fn new(instance: &Instance) -> Self {
        Self::with_tolerance(instance, DEFAULT_TOLERANCE)
    }

    pub fn with_tolerance(instance: &Instance, tolerance: f64) -> Self {
        let blind = instance.without_sight();
        let dest = blind.task.dest;
        let mut best: BTreeMap<VertexId, P> = BTreeMap::new();
        let mut choice = BTreeMap::new();
        best.insert(dest, P::one());
        for v in (1..=blind.vertices).rev() {
            if v == dest {
                continue;
            }
            let scored: Vec<(EdgeId, P)> = blind
                .out_edges(v)
                .map(|e| {
                    let onward = best.get(&e.id.head).cloned().unwrap_or_else(P::zero);
                    (e.id, P::from_exact(&e.p_fail).complement().mul(&onward))
                })
                .collect();
            let mut top = P::zero();
            for (_, s) in &scored {
                if s.compare(&top, tolerance).is_gt() {
                    top = s.clone();
                }
            }
            let mv = if top.is_zero() {
                Move::Halt
            } else {
                let optimal: Vec<EdgeId> = scored
                    .iter()
                    .filter(|(_, s)| s.compare(&top, tolerance).is_eq())
                    .map(|(e, _)| *e)
                    .collect();
                Move::Cross(tiebreak(&optimal).expect("nonempty"))
            };
            best.insert(v, top);
            choice.insert(v, mv);
        }
        SightBlindPolicy { blind, best, choice }
    }

    /// The instance this policy was computed on (sight removed).
    pub fn blind_instance(&self) -> &Instance {
        &self.blind
    }

    pub fn first_move(&self) -> Move {
        self.choice.get(&self.blind.task.start).copied().unwrap_or(Move::Halt)
    }

    /// Reliability of the best path from `v`.
    pub fn value(&self, v: VertexId) -> P {
        self.best.get(&v).cloned().unwrap_or_else(P::zero)
    }
}

impl<P: Probability> Policy for SightBlindPolicy<P> {
    fn next_move(&mut self, at: VertexId, _knowledge: &KnowledgeState) -> Result<Move> {
        Ok(self.choice.get(&at).copied().unwrap_or(Move::Halt))
    }
}

/// Every status assignment to the edges the start vertex can see, first
/// edge varying slowest, `Up` before `Down`.
pub fn initial_scenarios(instance: &Instance) -> Result<Vec<KnowledgeState>> {
    let mut scenarios = vec![KnowledgeState::new()];
    for e in model::sight_of(instance, instance.task.start)? {
        scenarios = scenarios
            .into_iter()
            .flat_map(|k| [k.clone().with(e, Status::Up), k.with(e, Status::Down)])
            .collect::<Result<_>>()?;
    }
    Ok(scenarios)
}

/// True when, in some initial scenario of positive probability, the exact
/// first move differs from the sight-blind one.
pub fn is_greedy_gap(instance: &Instance) -> Result<bool> {
    let mut solver = ExactSolver::<Exact>::new(instance)?;
    let blind = SightBlindPolicy::<Exact>::new(instance).first_move();
    let start = instance.task.start;
    for (k, weight) in solver.reveal_distribution(start, &KnowledgeState::new())? {
        if !Probability::is_zero(&weight) && solver.next_move(start, &k)? != blind {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Generates `count` instances and keeps those where ignoring sight changes
/// the first move.
pub fn find_greedy_gap(config: &crate::generate::GeneratorConfig, count: usize) -> Result<Vec<Instance>> {
    let mut gaps = Vec::new();
    for instance in crate::generate::generate(config, count)? {
        if is_greedy_gap(&instance)? {
            gaps.push(instance);
        }
    }
    Ok(gaps)
}

/// Solver and oracle verdicts for one initial scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioCheck<P> {
    pub knowledge: KnowledgeState,
    pub solver_value: P,
    pub oracle_value: P,
    pub solver_move: Move,
    pub oracle_move: Move,
    pub agrees: bool,
}

/// Compares `solve` (value and first move at the start) with the oracle on
/// every scenario. `solve` is injectable so the harness itself can be tested
/// against a deliberately broken solver.
pub fn check_scenarios<P, F>(
    instance: &Instance,
    scenarios: &[KnowledgeState],
    cap: usize,
    tolerance: f64,
    mut solve: F,
) -> Result<Vec<ScenarioCheck<P>>>
where
    P: Probability,
    F: FnMut(&KnowledgeState) -> Result<(P, Move)>,
{
    let oracle = Oracle::<P>::new(instance, cap)?.with_tolerance(tolerance);
    let start = instance.task.start;
    scenarios
        .iter()
        .map(|k| {
            let (solver_value, solver_move) = solve(k)?;
            let oracle_value = oracle.value(start, k)?;
            let oracle_move = oracle.best_move(start, k)?;
            let agrees = solver_value.compare(&oracle_value, tolerance).is_eq() && solver_move == oracle_move;
            Ok(ScenarioCheck {
                knowledge: k.clone(),
                solver_value,
                oracle_value,
                solver_move,
                oracle_move,
                agrees,
            })
        })
        .collect()
}

/// [`check_scenarios`] against the real solver.
pub fn check_solver<P: Probability>(
    instance: &Instance,
    scenarios: &[KnowledgeState],
    cap: usize,
    tolerance: f64,
) -> Result<Vec<ScenarioCheck<P>>> {
    let mut solver = ExactSolver::<P>::with_tolerance(instance, tolerance)?;
    let start = instance.task.start;
    check_scenarios(instance, scenarios, cap, tolerance, |k| {
        Ok((solver.best_value(start, k)?, solver.next_move(start, k)?))
    })
}
