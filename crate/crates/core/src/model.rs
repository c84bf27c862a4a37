//! Problem instances, knowledge states and worlds.
//!
//! An [`Instance`] is a DAG whose vertices are numbered `1..=n` with every
//! edge pointing from a lower to a higher index. Each edge fails (is "down")
//! independently with its own probability, and each vertex may see the
//! status of some edges at or ahead of it. The pathfinder starts at the task
//! start and wants to reach the task destination.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::prob::{parse_probability, Exact};

pub type VertexId = u32;

/// An edge is named by its endpoints; the graph has no parallel edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId {
    pub tail: VertexId,
    pub head: VertexId,
}

impl EdgeId {
    pub const fn new(tail: VertexId, head: VertexId) -> Self {
        EdgeId { tail, head }
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.tail, self.head)
    }
}

impl FromStr for EdgeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::BadEdgeKey(s.to_string());
        let (tail, head) = s.trim().split_once('-').ok_or_else(bad)?;
        Ok(EdgeId {
            tail: tail.trim().parse().map_err(|_| bad())?,
            head: head.trim().parse().map_err(|_| bad())?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: EdgeId,
    /// Probability that the edge is down during a trial.
    pub p_fail: Exact,
}

/// `observer` sees the status of `edge`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SightEntry {
    pub observer: VertexId,
    pub edge: EdgeId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Task {
    pub start: VertexId,
    pub dest: VertexId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    /// Vertices are `1..=vertices`.
    pub vertices: u32,
    pub edges: Vec<Edge>,
    pub sights: Vec<SightEntry>,
    pub task: Task,
}

impl Instance {
    pub fn builder(vertices: u32, start: VertexId, dest: VertexId) -> InstanceBuilder {
        InstanceBuilder {
            instance: Instance {
                vertices,
                edges: Vec::new(),
                sights: Vec::new(),
                task: Task { start, dest },
            },
            error: None,
        }
    }

    pub fn has_vertex(&self, v: VertexId) -> bool {
        (1..=self.vertices).contains(&v)
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.edges.iter().find(|e| e.id == id)
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges.iter().map(|e| e.id)
    }

    pub fn out_edges(&self, v: VertexId) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.iter().filter(move |e| e.id.tail == v)
    }

    /// Copy of the instance with every line-of-sight removed.
    pub fn without_sight(&self) -> Instance {
        Instance {
            sights: Vec::new(),
            ..self.clone()
        }
    }

    /// `reach[v]` is true when `v` can be reached from `from`.
    fn reachable_from(&self, from: VertexId) -> Vec<bool> {
        let mut reach = vec![false; self.vertices as usize + 1];
        if self.has_vertex(from) {
            reach[from as usize] = true;
        }
        // Edges point forward, so one pass in tail order settles everything.
        let mut by_tail: Vec<&Edge> = self.edges.iter().collect();
        by_tail.sort_by_key(|e| e.id.tail);
        for e in by_tail {
            if self.has_vertex(e.id.tail) && self.has_vertex(e.id.head) && reach[e.id.tail as usize] {
                reach[e.id.head as usize] = true;
            }
        }
        reach
    }

    /// `coreach[v]` is true when `to` can be reached from `v`.
    fn reaching(&self, to: VertexId) -> Vec<bool> {
        let mut coreach = vec![false; self.vertices as usize + 1];
        if self.has_vertex(to) {
            coreach[to as usize] = true;
        }
        let mut by_head: Vec<&Edge> = self.edges.iter().collect();
        by_head.sort_by_key(|e| std::cmp::Reverse(e.id.head));
        for e in by_head {
            if self.has_vertex(e.id.tail) && self.has_vertex(e.id.head) && coreach[e.id.head as usize] {
                coreach[e.id.tail as usize] = true;
            }
        }
        coreach
    }

    fn edges_between(&self, from: VertexId, to: VertexId) -> BTreeSet<EdgeId> {
        let reach = self.reachable_from(from);
        let coreach = self.reaching(to);
        self.edges
            .iter()
            .filter(|e| self.has_vertex(e.id.tail) && self.has_vertex(e.id.head))
            .filter(|e| reach[e.id.tail as usize] && coreach[e.id.head as usize])
            .map(|e| e.id)
            .collect()
    }
}

/// Accumulates edges and sight entries; probabilities are given as decimal
/// strings so they stay exact.
#[derive(Debug)]
pub struct InstanceBuilder {
    instance: Instance,
    error: Option<Error>,
}

impl InstanceBuilder {
    pub fn edge(mut self, tail: VertexId, head: VertexId, p_fail: &str) -> Self {
        match parse_probability(p_fail) {
            Ok(p_fail) => self.instance.edges.push(Edge {
                id: EdgeId::new(tail, head),
                p_fail,
            }),
            Err(e) => {
                self.error.get_or_insert(e);
            }
        }
        self
    }

    pub fn sight(mut self, observer: VertexId, tail: VertexId, head: VertexId) -> Self {
        self.instance.sights.push(SightEntry {
            observer,
            edge: EdgeId::new(tail, head),
        });
        self
    }

    /// Fails on unparsable probabilities or structural violations.
    pub fn build(self) -> Result<Instance> {
        if let Some(e) = self.error {
            return Err(e);
        }
        let report = validate(&self.instance);
        if !report.is_ok() {
            return Err(Error::Invalid(report));
        }
        Ok(self.instance)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    Up,
    Down,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Up => "up",
            Status::Down => "down",
        })
    }
}

/// Status of an edge as far as some knowledge state is concerned.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeStatus {
    Up,
    Down,
    Unknown,
}

impl From<Option<Status>> for EdgeStatus {
    fn from(s: Option<Status>) -> Self {
        match s {
            Some(Status::Up) => EdgeStatus::Up,
            Some(Status::Down) => EdgeStatus::Down,
            None => EdgeStatus::Unknown,
        }
    }
}

/// What the pathfinder knows: a partial map from edges to statuses. Edges
/// that are absent are unknown, and an edge can never be both up and down.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KnowledgeState(BTreeMap<EdgeId, Status>);

/// `{1-2: up, 2-3: down}`, in edge order.
impl fmt::Display for KnowledgeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (e, s)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{e}: {s}")?;
        }
        f.write_str("}")
    }
}

impl KnowledgeState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, e: EdgeId) -> EdgeStatus {
        self.0.get(&e).copied().into()
    }

    pub fn status(&self, e: EdgeId) -> Option<Status> {
        self.0.get(&e).copied()
    }

    pub fn is_known(&self, e: EdgeId) -> bool {
        self.0.contains_key(&e)
    }

    pub fn is_down(&self, e: EdgeId) -> bool {
        self.0.get(&e) == Some(&Status::Down)
    }

    /// Records a status; learning the opposite of what is already known is
    /// an error.
    pub fn learn(&mut self, e: EdgeId, status: Status) -> Result<()> {
        match self.0.insert(e, status) {
            Some(old) if old != status => {
                self.0.insert(e, old);
                Err(Error::InconsistentKnowledge(e))
            }
            _ => Ok(()),
        }
    }

    pub fn with(mut self, e: EdgeId, status: Status) -> Result<Self> {
        self.learn(e, status)?;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (EdgeId, Status)> + '_ {
        self.0.iter().map(|(e, s)| (*e, *s))
    }

    /// Number of edges on which the two states disagree; unknown versus
    /// known counts as a disagreement.
    pub fn hamming(&self, other: &KnowledgeState) -> usize {
        let mut distance = 0;
        for (e, s) in &self.0 {
            if other.0.get(e) != Some(s) {
                distance += 1;
            }
        }
        distance + other.0.keys().filter(|e| !self.0.contains_key(e)).count()
    }

    pub fn is_consistent_with(&self, world: &World) -> bool {
        self.0.iter().all(|(e, s)| world.status(*e) == Some(*s))
    }
}

impl FromIterator<(EdgeId, Status)> for KnowledgeState {
    /// Later entries overwrite earlier ones.
    fn from_iter<I: IntoIterator<Item = (EdgeId, Status)>>(iter: I) -> Self {
        KnowledgeState(iter.into_iter().collect())
    }
}

/// One realization of every edge status for a trial.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct World(BTreeMap<EdgeId, Status>);

impl World {
    /// Builds a world assigning `status(e)` to every instance edge.
    pub fn from_fn(instance: &Instance, mut status: impl FnMut(EdgeId) -> Status) -> World {
        World(instance.edge_ids().map(|e| (e, status(e))).collect())
    }

    pub fn all(instance: &Instance, status: Status) -> World {
        World::from_fn(instance, |_| status)
    }

    /// Checks totality against the instance.
    pub fn from_statuses(instance: &Instance, statuses: BTreeMap<EdgeId, Status>) -> Result<World> {
        for e in statuses.keys() {
            if instance.edge(*e).is_none() {
                return Err(Error::UnknownEdge(*e));
            }
        }
        if let Some(missing) = instance.edge_ids().find(|e| !statuses.contains_key(e)) {
            return Err(Error::UnknownEdge(missing));
        }
        Ok(World(statuses))
    }

    pub fn status(&self, e: EdgeId) -> Option<Status> {
        self.0.get(&e).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (EdgeId, Status)> + '_ {
        self.0.iter().map(|(e, s)| (*e, *s))
    }
}

/// A single structural problem found by [`validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NoVertices,
    EdgeVertexMissing(EdgeId),
    TailNotBeforeHead(EdgeId),
    DuplicateEdge(EdgeId),
    ProbabilityOutOfRange(EdgeId),
    ObserverMissing(SightEntry),
    ObserverAfterTail(SightEntry),
    DanglingSight(SightEntry),
    DuplicateSight(SightEntry),
    TaskVertexMissing(VertexId),
    StartNotBeforeDest(Task),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoVertices => write!(f, "instance has no vertices"),
            Violation::EdgeVertexMissing(e) => write!(f, "edge {e}: endpoint is not a vertex"),
            Violation::TailNotBeforeHead(e) => write!(f, "edge {e}: tail<head violated"),
            Violation::DuplicateEdge(e) => write!(f, "edge {e}: duplicate edge"),
            Violation::ProbabilityOutOfRange(e) => write!(f, "edge {e}: p_fail outside [0, 1]"),
            Violation::ObserverMissing(s) => {
                write!(f, "sight ({}, {}): observer is not a vertex", s.observer, s.edge)
            }
            Violation::ObserverAfterTail(s) => {
                write!(f, "sight ({}, {}): observer≤tail violated", s.observer, s.edge)
            }
            Violation::DanglingSight(s) => {
                write!(f, "sight ({}, {}): edge does not exist", s.observer, s.edge)
            }
            Violation::DuplicateSight(s) => {
                write!(f, "sight ({}, {}): duplicate entry", s.observer, s.edge)
            }
            Violation::TaskVertexMissing(v) => write!(f, "task vertex {v} is not a vertex"),
            Violation::StartNotBeforeDest(t) => {
                write!(f, "task {}→{}: start<dest violated", t.start, t.dest)
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        let lines: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&lines.join("; "))
    }
}

/// Lists every structural violation; violations are data, not errors.
pub fn validate(instance: &Instance) -> ValidationReport {
    let mut violations = Vec::new();
    if instance.vertices == 0 {
        violations.push(Violation::NoVertices);
    }
    let mut seen = BTreeSet::new();
    for edge in &instance.edges {
        let id = edge.id;
        if !instance.has_vertex(id.tail) || !instance.has_vertex(id.head) {
            violations.push(Violation::EdgeVertexMissing(id));
        }
        if id.tail >= id.head {
            violations.push(Violation::TailNotBeforeHead(id));
        }
        if !seen.insert(id) {
            violations.push(Violation::DuplicateEdge(id));
        }
        if edge.p_fail < Exact::from_integer(0.into()) || edge.p_fail > Exact::from_integer(1.into()) {
            violations.push(Violation::ProbabilityOutOfRange(id));
        }
    }
    let mut seen_sight = BTreeSet::new();
    for sight in &instance.sights {
        if !instance.has_vertex(sight.observer) {
            violations.push(Violation::ObserverMissing(*sight));
        }
        if sight.observer > sight.edge.tail {
            violations.push(Violation::ObserverAfterTail(*sight));
        }
        if !seen.contains(&sight.edge) {
            violations.push(Violation::DanglingSight(*sight));
        }
        if !seen_sight.insert(*sight) {
            violations.push(Violation::DuplicateSight(*sight));
        }
    }
    let task = instance.task;
    for v in [task.start, task.dest] {
        if !instance.has_vertex(v) {
            violations.push(Violation::TaskVertexMissing(v));
        }
    }
    if task.start >= task.dest {
        violations.push(Violation::StartNotBeforeDest(task));
    }
    ValidationReport { violations }
}

/// Keeps exactly the edges that lie on some start→dest path, and drops sight
/// entries that referenced removed edges. Idempotent.
pub fn prune_extraneous(instance: &Instance) -> Result<Instance> {
    let report = validate(instance);
    if !report.is_ok() {
        return Err(Error::Invalid(report));
    }
    let Task { start, dest } = instance.task;
    let keep = instance.edges_between(start, dest);
    if keep.is_empty() {
        return Err(Error::NoPath { start, dest });
    }
    Ok(Instance {
        vertices: instance.vertices,
        edges: instance
            .edges
            .iter()
            .filter(|e| keep.contains(&e.id))
            .cloned()
            .collect(),
        sights: instance
            .sights
            .iter()
            .filter(|s| keep.contains(&s.edge))
            .copied()
            .collect(),
        task: instance.task,
    })
}

/// Edges that vertex `v` has line-of-sight to.
pub fn sight_of(instance: &Instance, v: VertexId) -> Result<BTreeSet<EdgeId>> {
    if !instance.has_vertex(v) {
        return Err(Error::UnknownVertex(v));
    }
    Ok(instance
        .sights
        .iter()
        .filter(|s| s.observer == v)
        .map(|s| s.edge)
        .collect())
}

/// Knowledge after standing at `v` in world `world`: everything in `known`
/// plus the true status of each edge `v` can see.
pub fn observe(instance: &Instance, known: &KnowledgeState, v: VertexId, world: &World) -> Result<KnowledgeState> {
    if let Some((e, _)) = known.iter().find(|(e, s)| world.status(*e) != Some(*s)) {
        return Err(Error::InconsistentKnowledge(e));
    }
    let mut next = known.clone();
    for e in sight_of(instance, v)? {
        let status = world.status(e).ok_or(Error::UnknownEdge(e))?;
        next.learn(e, status)?;
    }
    Ok(next)
}

/// Edges lying on some directed path from `v` to the destination.
pub fn forward_cone(instance: &Instance, v: VertexId) -> Result<BTreeSet<EdgeId>> {
    if !instance.has_vertex(v) {
        return Err(Error::UnknownVertex(v));
    }
    Ok(instance.edges_between(v, instance.task.dest))
}

/// Forgets everything outside `cone`.
pub fn restrict(known: &KnowledgeState, cone: &BTreeSet<EdgeId>) -> KnowledgeState {
    known.iter().filter(|(e, _)| cone.contains(e)).collect()
}
