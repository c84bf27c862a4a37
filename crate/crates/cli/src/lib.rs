//! Command-line front end for the sightpath solvers.
//!
//! Exit codes: 0 on success, 1 on a domain failure or a mismatch, 2 when a
//! file cannot be read or parsed.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use sightpath::approx::{agreement_report, ApproxConfig, ApproxSolver, CacheReport};
use sightpath::generate::{generate, quarter_palette, GeneratorConfig, SightKind};
use sightpath::io::{read_instance, read_scenario, write_instance, FileError, Scenario};
use sightpath::model::{prune_extraneous, restrict, sight_of, validate, EdgeId, Instance, KnowledgeState};
use sightpath::oracle::{check_solver, find_greedy_gap, initial_scenarios, ScenarioCheck, DEFAULT_WORLD_CAP};
use sightpath::prob::{parse_probability, Exact, Mode, Probability, DEFAULT_TOLERANCE};
use sightpath::sim::{run_trials, TrialBatch};
use sightpath::solver::{DecisionQuery, ExactSolver, Move};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "sightpath",
    version,
    about = "Safest paths on DAGs with failing edges and line of sight"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check an instance file and list every violation.
    Validate { instance: PathBuf },
    /// Decide whether the pathfinder takes a given first edge.
    Decide {
        instance: PathBuf,
        scenario: PathBuf,
        #[arg(long)]
        edge: EdgeId,
        #[command(flatten)]
        arith: Arith,
    },
    /// Compare the exact solver with brute-force world enumeration.
    OracleCheck {
        instance: PathBuf,
        /// Check every status assignment of the start's sight (the default).
        #[arg(long, conflicts_with = "scenario")]
        all_scenarios: bool,
        /// Check a single scenario file instead.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_WORLD_CAP)]
        cap: usize,
        #[command(flatten)]
        arith: Arith,
    },
    /// Monte Carlo trials of the exact policy.
    Mc {
        instance: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Write random instances to a directory.
    Gen {
        #[command(flatten)]
        generator: GenArgs,
        #[arg(long, default_value_t = 500)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Search random instances for one where ignoring sight changes the first move.
    GapSearch {
        #[command(flatten)]
        generator: GenArgs,
        #[arg(long, default_value_t = 500)]
        count: usize,
        /// Directory to write the instances found.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve with the similarity cache.
    Approx {
        instance: PathBuf,
        scenario: PathBuf,
        #[arg(long, default_value_t = 0)]
        threshold: usize,
        #[arg(long, default_value_t = 1024)]
        cache_size: usize,
        #[arg(long)]
        edge: Option<EdgeId>,
        #[command(flatten)]
        arith: Arith,
    },
    /// Agreement table of the similarity cache against the exact solver.
    ApproxCompare {
        /// Directory of instance files; a generated suite when absent.
        dir: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        threshold: usize,
        #[arg(long, default_value_t = 1024)]
        cache_size: usize,
        #[command(flatten)]
        generator: GenArgs,
        #[arg(long, default_value_t = 50)]
        count: usize,
    },
}

#[derive(Debug, Args)]
pub struct Arith {
    #[arg(long, default_value_t = Mode::Rational)]
    pub mode: Mode,
    /// Tie tolerance in float mode.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value_t = 3)]
    pub min_vertices: u32,
    #[arg(long, default_value_t = 6)]
    pub max_vertices: u32,
    #[arg(long, default_value_t = 0.5)]
    pub edge_density: f64,
    #[arg(long, default_value_t = 0.3)]
    pub sight_density: f64,
    #[arg(long, default_value_t = 9)]
    pub max_edges: usize,
    #[arg(long, default_value_t = 4)]
    pub max_sight: usize,
    /// Comma-separated failure probabilities; quarters by default.
    #[arg(long, value_delimiter = ',')]
    pub palette: Vec<String>,
    /// Only let vertices see their own outgoing edges.
    #[arg(long)]
    pub immediate_only: bool,
}

impl GenArgs {
    fn config(&self) -> Result<GeneratorConfig, Failure> {
        let palette = if self.palette.is_empty() {
            quarter_palette()
        } else {
            self.palette
                .iter()
                .map(|p| parse_probability(p))
                .collect::<Result<_, _>>()
                .map_err(|e| Failure::input(e.to_string()))?
        };
        Ok(GeneratorConfig {
            min_vertices: self.min_vertices,
            max_vertices: self.max_vertices,
            edge_density: self.edge_density,
            sight_density: self.sight_density,
            max_edges: self.max_edges,
            max_sight: self.max_sight,
            palette,
            sight_kind: if self.immediate_only {
                SightKind::ImmediateOnly
            } else {
                SightKind::Any
            },
            seed: self.seed,
            ..GeneratorConfig::default()
        })
    }
}

/// Why a command stopped, with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn domain(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_DOMAIN,
            message: message.into(),
        }
    }

    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    /// A failure already reported on stdout.
    fn silent(code: i32) -> Self {
        Failure {
            code,
            message: String::new(),
        }
    }
}

impl From<sightpath::Error> for Failure {
    fn from(e: sightpath::Error) -> Self {
        Failure::domain(e.to_string())
    }
}

impl From<FileError> for Failure {
    fn from(e: FileError) -> Self {
        Failure::input(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::input(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return e.exit_code();
        }
    };
    match execute(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            if !failure.message.is_empty() {
                let _ = writeln!(err, "error: {}", failure.message);
            }
            failure.code
        }
    }
}

pub fn execute(command: Command, out: &mut dyn Write) -> Outcome {
    match command {
        Command::Validate { instance } => cmd_validate(&instance, out),
        Command::Decide {
            instance,
            scenario,
            edge,
            arith,
        } => {
            let inst = load(&instance, out)?;
            let k = start_knowledge(&inst, &read_scenario(&scenario, &inst)?)?;
            match arith.mode {
                Mode::Rational => cmd_decide::<Exact>(&inst, &k, edge, arith.tol, out),
                Mode::Float => cmd_decide::<f64>(&inst, &k, edge, arith.tol, out),
            }
        }
        Command::OracleCheck {
            instance,
            all_scenarios: _,
            scenario,
            cap,
            arith,
        } => {
            let inst = load(&instance, out)?;
            let scenarios = match scenario {
                Some(path) => vec![read_scenario(&path, &inst)?.knowledge()],
                None => initial_scenarios(&inst)?,
            };
            match arith.mode {
                Mode::Rational => report_checks(&check_solver::<Exact>(&inst, &scenarios, cap, arith.tol)?, out),
                Mode::Float => report_checks(&check_solver::<f64>(&inst, &scenarios, cap, arith.tol)?, out),
            }
        }
        Command::Mc { instance, trials, seed } => {
            let inst = load(&instance, out)?;
            write_batch(&run_trials(&inst, trials, seed)?, out)
        }
        Command::Gen {
            generator,
            count,
            out: dir,
        } => cmd_gen(&generator.config()?, count, &dir, out),
        Command::GapSearch {
            generator,
            count,
            out: dir,
        } => cmd_gap_search(&generator.config()?, count, dir.as_deref(), out),
        Command::Approx {
            instance,
            scenario,
            threshold,
            cache_size,
            edge,
            arith,
        } => {
            let inst = load(&instance, out)?;
            let k = start_knowledge(&inst, &read_scenario(&scenario, &inst)?)?;
            let config = ApproxConfig::new(threshold, cache_size)?;
            match arith.mode {
                Mode::Rational => cmd_approx::<Exact>(&inst, &k, edge, config, arith.tol, out),
                Mode::Float => cmd_approx::<f64>(&inst, &k, edge, config, arith.tol, out),
            }
        }
        Command::ApproxCompare {
            dir,
            threshold,
            cache_size,
            generator,
            count,
        } => {
            let instances = match dir {
                Some(dir) => load_dir(&dir, out)?,
                None => generate(&generator.config()?, count)?,
            };
            cmd_approx_compare(&instances, ApproxConfig::new(threshold, cache_size)?, out)
        }
    }
}

/// Reads, validates and prunes an instance. Violations are printed and
/// count as a domain failure.
pub fn load(path: &Path, out: &mut dyn Write) -> Result<Instance, Failure> {
    let inst = read_instance(path)?;
    let report = validate(&inst);
    if !report.is_ok() {
        writeln!(out, "{}: invalid", path.display())?;
        for v in &report.violations {
            writeln!(out, "  {v}")?;
        }
        return Err(Failure::silent(EXIT_DOMAIN));
    }
    Ok(prune_extraneous(&inst)?)
}

fn load_dir(dir: &Path, out: &mut dyn Write) -> Result<Vec<Instance>, Failure> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Failure::input(format!("{}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths.iter().map(|p| load(p, out)).collect()
}

/// What the pathfinder knows standing at the start. A full world is cut
/// down to what the start can see.
fn start_knowledge(inst: &Instance, scenario: &Scenario) -> Result<KnowledgeState, Failure> {
    Ok(match scenario {
        Scenario::Knowledge(k) => k.clone(),
        Scenario::World(_) => restrict(&scenario.knowledge(), &sight_of(inst, inst.task.start)?),
    })
}

pub fn cmd_validate(path: &Path, out: &mut dyn Write) -> Outcome {
    let inst = read_instance(path)?;
    let report = validate(&inst);
    if report.is_ok() {
        writeln!(out, "{}: ok", path.display())?;
        return Ok(());
    }
    writeln!(out, "{}: {} violation(s)", path.display(), report.violations.len())?;
    for v in &report.violations {
        writeln!(out, "  {v}")?;
    }
    Err(Failure::silent(EXIT_DOMAIN))
}

fn ensure_leaves_start(inst: &Instance, edge: EdgeId) -> Outcome {
    let start = inst.task.start;
    if inst.out_edges(start).any(|e| e.id == edge) {
        Ok(())
    } else {
        Err(sightpath::Error::EdgeNotFrom { edge, vertex: start }.into())
    }
}

fn write_decision<P: Probability>(
    out: &mut dyn Write,
    edge: EdgeId,
    takes: bool,
    value: &P,
    selected: Move,
) -> Outcome {
    writeln!(out, "decide {edge}: {takes}")?;
    writeln!(out, "success {edge}: {}", value.render())?;
    writeln!(out, "selected: {selected}")?;
    Ok(())
}

pub fn cmd_decide<P: Probability>(
    inst: &Instance,
    k: &KnowledgeState,
    edge: EdgeId,
    tol: f64,
    out: &mut dyn Write,
) -> Outcome {
    ensure_leaves_start(inst, edge)?;
    let mut solver = ExactSolver::<P>::with_tolerance(inst, tol)?;
    let takes = solver.decide(&DecisionQuery {
        edge,
        knowledge: k.clone(),
    })?;
    let value = solver.success(edge, k)?;
    let selected = solver.next_move(inst.task.start, k)?;
    write_decision(out, edge, takes, &value, selected)
}

/// Prints one line per scenario; any disagreement is a failure.
pub fn report_checks<P: Probability>(checks: &[ScenarioCheck<P>], out: &mut dyn Write) -> Outcome {
    let mut mismatches = 0;
    for c in checks {
        writeln!(
            out,
            "{}: solver {} via {}, oracle {} via {}: {}",
            c.knowledge,
            c.solver_value.render(),
            c.solver_move,
            c.oracle_value.render(),
            c.oracle_move,
            if c.agrees { "equal" } else { "MISMATCH" }
        )?;
        if !c.agrees {
            mismatches += 1;
        }
    }
    writeln!(out, "{} scenario(s), {mismatches} mismatch(es)", checks.len())?;
    if mismatches > 0 {
        Err(Failure::silent(EXIT_DOMAIN))
    } else {
        Ok(())
    }
}

pub fn write_batch(batch: &TrialBatch, out: &mut dyn Write) -> Outcome {
    writeln!(out, "trials: {}", batch.n)?;
    writeln!(out, "seed: {}", batch.seed)?;
    writeln!(out, "successes: {}", batch.successes)?;
    if batch.rate_defined {
        writeln!(out, "rate: {:.6}", batch.rate)?;
    } else {
        writeln!(out, "rate: 0 (undefined, no trials)")?;
    }
    writeln!(out, "stderr: {:.6}", batch.stderr)?;
    Ok(())
}

fn instance_file_name(i: usize) -> String {
    format!("instance-{i:04}.json")
}

fn write_all(dir: &Path, instances: &[Instance]) -> Outcome {
    fs::create_dir_all(dir).map_err(|e| Failure::input(format!("{}: {e}", dir.display())))?;
    for (i, inst) in instances.iter().enumerate() {
        write_instance(&dir.join(instance_file_name(i)), inst)?;
    }
    Ok(())
}

pub fn cmd_gen(config: &GeneratorConfig, count: usize, dir: &Path, out: &mut dyn Write) -> Outcome {
    let instances = generate(config, count)?;
    write_all(dir, &instances)?;
    writeln!(out, "wrote {} instance(s) to {}", instances.len(), dir.display())?;
    Ok(())
}

pub fn cmd_gap_search(config: &GeneratorConfig, count: usize, dir: Option<&Path>, out: &mut dyn Write) -> Outcome {
    let found = find_greedy_gap(config, count)?;
    writeln!(
        out,
        "{} gap instance(s) among {count} (seed {})",
        found.len(),
        config.seed
    )?;
    if let Some(dir) = dir {
        write_all(dir, &found)?;
    }
    if found.is_empty() {
        Err(Failure::silent(EXIT_DOMAIN))
    } else {
        Ok(())
    }
}

fn write_report(report: &CacheReport, out: &mut dyn Write) -> Outcome {
    writeln!(
        out,
        "cache: exact_hits {} similar_hits {} misses {} evictions {} peak_entries {}",
        report.exact_hits, report.similar_hits, report.misses, report.evictions, report.peak_entries
    )?;
    Ok(())
}

pub fn cmd_approx<P: Probability>(
    inst: &Instance,
    k: &KnowledgeState,
    edge: Option<EdgeId>,
    config: ApproxConfig,
    tol: f64,
    out: &mut dyn Write,
) -> Outcome {
    let start = inst.task.start;
    if let Some(missing) = sight_of(inst, start)?.into_iter().find(|e| !k.is_known(*e)) {
        return Err(sightpath::Error::NotMaximallyRestrictive(missing).into());
    }
    let mut solver = ApproxSolver::<P>::with_tolerance(inst, config, tol)?;
    match edge {
        Some(edge) => {
            ensure_leaves_start(inst, edge)?;
            let selected = solver.next_move(start, k)?;
            let value = solver.success(edge, k)?;
            write_decision(out, edge, selected == Move::Cross(edge), &value, selected)?;
        }
        None => {
            let value = solver.best_value(start, k)?;
            writeln!(out, "value: {}", value.render())?;
            writeln!(out, "selected: {}", solver.next_move(start, k)?)?;
        }
    }
    write_report(&solver.report(), out)
}

pub fn cmd_approx_compare(instances: &[Instance], config: ApproxConfig, out: &mut dyn Write) -> Outcome {
    let rows = agreement_report(instances, config)?;
    writeln!(
        out,
        "{:>5} {:>9} {:>6} {:>10} {:>6} {:>8} {:>6} {:>6} {:>5}",
        "#", "scenarios", "match", "value_gap", "exact", "similar", "miss", "evict", "peak"
    )?;
    for (i, row) in rows.iter().enumerate() {
        let r = &row.report;
        writeln!(
            out,
            "{i:>5} {:>9} {:>6} {:>10.6} {:>6} {:>8} {:>6} {:>6} {:>5}",
            row.scenarios,
            if row.decision_match { "yes" } else { "no" },
            row.value_gap,
            r.exact_hits,
            r.similar_hits,
            r.misses,
            r.evictions,
            r.peak_entries
        )?;
    }
    let matched = rows.iter().filter(|r| r.decision_match).count();
    let rate = if rows.is_empty() {
        0.0
    } else {
        matched as f64 / rows.len() as f64
    };
    let worst = rows.iter().map(|r| r.value_gap).fold(0.0, f64::max);
    writeln!(
        out,
        "match rate: {matched}/{} ({:.1}%), worst value gap {worst:.6}, threshold {}, cache size {}",
        rows.len(),
        100.0 * rate,
        config.similarity_threshold,
        config.max_entries
    )?;
    Ok(())
}
