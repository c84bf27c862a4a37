//! Acceptance criteria. Runs as a plain binary so every criterion prints
//! exactly one PASS/FAIL line; the process fails if any criterion does.

use std::collections::HashMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use sightpath::approx::{replay, ApproxConfig, ApproxSolver};
use sightpath::fixtures;
use sightpath::generate::{generate, GeneratorConfig, SightKind};
use sightpath::model::{EdgeId, Instance, KnowledgeState, Status, VertexId};
use sightpath::oracle::{
    self, enumerate_worlds, find_greedy_gap, initial_scenarios, policy_value, simulate_policy, Oracle,
    SightBlindPolicy, DEFAULT_WORLD_CAP,
};
use sightpath::prob::{Exact, Probability};
use sightpath::sim::run_trials;
use sightpath::solver::{ExactSolver, Move, Policy};
use sightpath::{Error, Result};

const SUITE_SIZE: usize = 200;
const SUITE_DEADLINE: Duration = Duration::from_secs(60);
const SIDE_SUITE_SIZE: usize = 50;
const MC_TRIALS: u64 = 100_000;
const MC_SEEDS: u64 = 20;
const MC_REQUIRED: usize = 19;
const MC_SIGMAS: f64 = 3.0;
const GAP_SEARCH_COUNT: usize = 500;
const GAP_SEARCH_SEED: u64 = 7;

fn q(n: i64, d: i64) -> Exact {
    Exact::new(n.into(), d.into())
}

fn e(t: u32, h: u32) -> EdgeId {
    EdgeId::new(t, h)
}

/// n ≤ 6, ≤ 9 edges, ≤ 4 sight entries, failure probabilities in quarters.
fn suite_config() -> GeneratorConfig {
    GeneratorConfig {
        min_vertices: 3,
        max_vertices: 6,
        max_edges: 9,
        max_sight: 4,
        sight_density: 0.35,
        seed: 2024,
        ..GeneratorConfig::default()
    }
}

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Result<Verdict> + 'a>);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Result<Verdict> {
    Ok(Verdict {
        pass,
        detail: detail.into(),
    })
}

fn oracle_equivalence(suite: &[Instance]) -> Result<Verdict> {
    let started = Instant::now();
    let mut scenarios = 0;
    let mut mismatches = Vec::new();
    for (i, inst) in suite.iter().enumerate() {
        let mut solver = ExactSolver::<Exact>::new(inst)?;
        let oracle = Oracle::<Exact>::new(inst, DEFAULT_WORLD_CAP)?;
        let s = inst.task.start;
        for k in initial_scenarios(inst)? {
            scenarios += 1;
            let value_ok = solver.best_value(s, &k)? == oracle.value(s, &k)?;
            let move_ok = solver.next_move(s, &k)? == oracle.best_move(s, &k)?;
            if !(value_ok && move_ok) {
                mismatches.push(i);
            }
        }
    }
    let elapsed = started.elapsed();
    verdict(
        mismatches.is_empty() && elapsed < SUITE_DEADLINE,
        format!(
            "{} instances, {scenarios} scenarios, mismatches {:?}, {:.1}s (limit {}s)",
            suite.len(),
            mismatches,
            elapsed.as_secs_f64(),
            SUITE_DEADLINE.as_secs()
        ),
    )
}

/// Most reliable s→d path by explicit path enumeration.
fn best_path_product(inst: &Instance, v: VertexId) -> Exact {
    if v == inst.task.dest {
        return q(1, 1);
    }
    inst.out_edges(v)
        .map(|edge| (q(1, 1) - &edge.p_fail) * best_path_product(inst, edge.id.head))
        .max()
        .unwrap_or_else(|| q(0, 1))
}

fn no_sight_closed_form() -> Result<Verdict> {
    let config = GeneratorConfig {
        sight_density: 0.0,
        seed: 11,
        ..suite_config()
    };
    let suite = generate(&config, SIDE_SUITE_SIZE)?;
    let mut value_failures = 0;
    let mut memo_failures = 0;
    for inst in &suite {
        let mut solver = ExactSolver::<Exact>::new(inst)?;
        let value = solver.best_value(inst.task.start, &KnowledgeState::new())?;
        if value != best_path_product(inst, inst.task.start) {
            value_failures += 1;
        }
        if solver.memo_stats().entries > inst.edges.len() {
            memo_failures += 1;
        }
    }
    verdict(
        value_failures == 0 && memo_failures == 0,
        format!(
            "{} instances, value mismatches {value_failures}, memo bound violations {memo_failures}",
            suite.len()
        ),
    )
}

/// Value from the start when every vertex sees only (some of) its own
/// outgoing edges: knowledge never outlives the vertex, so one value per
/// vertex suffices, averaged over the subsets of what it sees.
fn immediate_sight_value(inst: &Instance) -> Exact {
    let mut value: HashMap<VertexId, Exact> = HashMap::new();
    value.insert(inst.task.dest, q(1, 1));
    for v in (1..inst.task.dest).rev() {
        let out: Vec<_> = inst.out_edges(v).collect();
        let seen: Vec<EdgeId> = inst.sights.iter().filter(|s| s.observer == v).map(|s| s.edge).collect();
        let mut total = q(0, 1);
        for bits in 0u32..(1 << seen.len()) {
            let mut weight = q(1, 1);
            let mut down = Vec::new();
            for (j, edge) in seen.iter().enumerate() {
                let p = &inst.edge(*edge).unwrap().p_fail;
                if bits & (1 << j) != 0 {
                    weight *= p;
                    down.push(*edge);
                } else {
                    weight *= q(1, 1) - p;
                }
            }
            let best = out
                .iter()
                .filter(|edge| !down.contains(&edge.id))
                .map(|edge| {
                    let cross = if seen.contains(&edge.id) {
                        q(1, 1)
                    } else {
                        q(1, 1) - &edge.p_fail
                    };
                    cross * value.get(&edge.id.head).cloned().unwrap_or_else(|| q(0, 1))
                })
                .max()
                .unwrap_or_else(|| q(0, 1));
            total += weight * best;
        }
        value.insert(v, total);
    }
    value[&inst.task.start].clone()
}

fn immediate_neighbor_sight() -> Result<Verdict> {
    let config = GeneratorConfig {
        sight_kind: SightKind::ImmediateOnly,
        sight_density: 0.6,
        seed: 13,
        ..suite_config()
    };
    let suite = generate(&config, SIDE_SUITE_SIZE)?;
    let mut value_failures = 0;
    let mut memo_failures = 0;
    let mut with_sight = 0;
    for inst in &suite {
        if !inst.sights.is_empty() {
            with_sight += 1;
        }
        let mut solver = ExactSolver::<Exact>::new(inst)?;
        let s = inst.task.start;
        let mut expected = q(0, 1);
        for (k, weight) in solver.reveal_distribution(s, &KnowledgeState::new())? {
            expected += weight * solver.best_value(s, &k)?;
        }
        if expected != immediate_sight_value(inst) {
            value_failures += 1;
        }
        let empty_keyed = solver.memo_keys().filter(|key| key.knowledge.is_empty()).count();
        let all_empty = solver.memo_keys().all(|key| key.knowledge.is_empty());
        if empty_keyed > inst.edges.len() || !all_empty {
            memo_failures += 1;
        }
    }
    verdict(
        value_failures == 0 && memo_failures == 0 && with_sight > 0,
        format!(
            "{} instances ({with_sight} with sight), value mismatches {value_failures}, memo bound violations {memo_failures}",
            suite.len()
        ),
    )
}

fn greedy_witness() -> Result<Verdict> {
    let trap = fixtures::greedy_trap();
    let k = KnowledgeState::new();
    let mut solver = ExactSolver::<Exact>::new(&trap)?;
    let exact_move = solver.next_move(1, &k)?;
    let exact_value = solver.best_value(1, &k)?;
    let oracle_value = oracle::value::<Exact>(&trap, 1, &k, DEFAULT_WORLD_CAP)?;
    let blind = SightBlindPolicy::<Exact>::new(&trap);
    let fixture_ok = exact_move == Move::Cross(e(1, 2))
        && exact_value == q(27, 40)
        && oracle_value == q(27, 40)
        && blind.first_move() == Move::Cross(e(1, 5))
        && blind.value(1) == q(3, 5);
    let search = GeneratorConfig {
        seed: GAP_SEARCH_SEED,
        ..GeneratorConfig::default()
    };
    let gaps = find_greedy_gap(&search, GAP_SEARCH_COUNT)?;
    let further = gaps.iter().filter(|g| **g != trap).count();
    verdict(
        fixture_ok && further >= 1,
        format!(
            "trap: exact {exact_move} at {exact_value}, blind {} at {}; gap search found {further} of {GAP_SEARCH_COUNT}",
            blind.first_move(),
            blind.value(1)
        ),
    )
}

fn monte_carlo() -> Result<Verdict> {
    let b = fixtures::sighted_triangle();
    let mut solver = ExactSolver::<Exact>::new(&b)?;
    let expected = policy_value::<Exact, _>(&b, &mut solver, DEFAULT_WORLD_CAP)?;
    let target = Probability::to_f64(&expected);
    let mut passing = 0;
    for seed in 0..MC_SEEDS {
        if run_trials(&b, MC_TRIALS, seed)?.within(target, MC_SIGMAS) {
            passing += 1;
        }
    }
    verdict(
        expected == q(17, 20) && passing >= MC_REQUIRED,
        format!("policy value {expected}, {passing}/{MC_SEEDS} seeds within {MC_SIGMAS}σ (need {MC_REQUIRED})"),
    )
}

fn approximation_sanity(suite: &[Instance]) -> Result<Verdict> {
    let mut exact_failures = 0;
    let mut monotone_failures = 0;
    let mut capacity_failures = 0;
    for inst in suite {
        let s = inst.task.start;
        let scenarios = initial_scenarios(inst)?;
        let mut exact = ExactSolver::<Exact>::new(inst)?;
        exact.record_lookups();
        for capacity in [1, 3, 4096] {
            let config = ApproxConfig::new(0, capacity)?;
            let mut approx = ApproxSolver::<Exact>::new(inst, config)?;
            for k in &scenarios {
                if approx.candidate_values(s, k)? != exact.candidate_values(s, k)?
                    || approx.next_move(s, k)? != exact.next_move(s, k)?
                {
                    exact_failures += 1;
                }
            }
            if approx.report().peak_entries > capacity {
                capacity_failures += 1;
            }
        }
        for capacity in [2, 8, 4096] {
            let mut previous = 0;
            for threshold in 0..=4 {
                let report = replay(exact.lookup_trace(), ApproxConfig::new(threshold, capacity)?);
                if report.similar_hits < previous {
                    monotone_failures += 1;
                }
                if report.peak_entries > capacity {
                    capacity_failures += 1;
                }
                previous = report.similar_hits;
            }
            for threshold in 1..=3 {
                let mut approx = ApproxSolver::<Exact>::new(inst, ApproxConfig::new(threshold, capacity)?)?;
                for k in &scenarios {
                    approx.best_value(s, k)?;
                }
                if approx.report().peak_entries > capacity || approx.cache_len() > capacity {
                    capacity_failures += 1;
                }
            }
        }
    }
    verdict(
        exact_failures + monotone_failures + capacity_failures == 0,
        format!(
            "{} instances: threshold-0 mismatches {exact_failures}, non-monotone replays {monotone_failures}, capacity overruns {capacity_failures}",
            suite.len()
        ),
    )
}

/// Exact policy wrapped with an independent check of the halting rule.
struct Audited<'a> {
    solver: ExactSolver<Exact>,
    oracle: &'a Oracle<Exact>,
    onward: HashMap<(VertexId, KnowledgeState), bool>,
    violations: usize,
}

impl Policy for Audited<'_> {
    fn next_move(&mut self, at: VertexId, knowledge: &KnowledgeState) -> Result<Move> {
        let mv = self.solver.next_move(at, knowledge)?;
        let key = (at, knowledge.clone());
        let any_hope = match self.onward.get(&key) {
            Some(h) => *h,
            None => {
                let h = self
                    .oracle
                    .edge_values(at, knowledge)?
                    .iter()
                    .any(|(_, v)| !Probability::is_zero(v));
                self.onward.insert(key, h);
                h
            }
        };
        let consistent = match mv {
            Move::Halt => !any_hope,
            Move::Cross(edge) => any_hope && knowledge.status(edge) != Some(Status::Down),
        };
        if !consistent {
            self.violations += 1;
        }
        Ok(mv)
    }
}

fn trial_semantics(suite: &[Instance]) -> Result<Verdict> {
    let mut worlds = 0;
    let mut violations = 0;
    let mut known_down = 0;
    for inst in suite {
        let oracle = Oracle::<Exact>::new(inst, DEFAULT_WORLD_CAP)?;
        let mut policy = Audited {
            solver: ExactSolver::new(inst)?,
            oracle: &oracle,
            onward: HashMap::new(),
            violations: 0,
        };
        for ww in enumerate_worlds::<Exact>(inst, DEFAULT_WORLD_CAP)? {
            worlds += 1;
            match simulate_policy(inst, &ww.world, &mut policy) {
                Ok(_) => {}
                Err(Error::PolicyChoseKnownDown(_)) => known_down += 1,
                Err(other) => return Err(other),
            }
        }
        violations += policy.violations;
    }
    verdict(
        violations == 0 && known_down == 0,
        format!("{worlds} worlds simulated, halting-rule violations {violations}, known-down crossings {known_down}"),
    )
}

fn main() -> ExitCode {
    let suite = generate(&suite_config(), SUITE_SIZE).expect("suite generates");
    let criteria: Vec<Criterion> = vec![
        ("1 oracle equivalence", Box::new(|| oracle_equivalence(&suite))),
        ("2 no-sight closed form", Box::new(no_sight_closed_form)),
        ("3 immediate-neighbor sight", Box::new(immediate_neighbor_sight)),
        ("4 greedy witness", Box::new(greedy_witness)),
        ("5 monte carlo consistency", Box::new(monte_carlo)),
        ("6 approximation sanity", Box::new(|| approximation_sanity(&suite))),
        ("7 trial semantics", Box::new(|| trial_semantics(&suite))),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        let (pass, detail) = match run() {
            Ok(v) => (v.pass, v.detail),
            Err(err) => (false, format!("error: {err}")),
        };
        if !pass {
            failed += 1;
        }
        println!("criterion {name}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
