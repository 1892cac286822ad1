//! Command-line surface: solving, schedule validation, reductions,
//! instance generation, representation round-trips, and the independent
//! reference oracle.
//!
//! Exit codes are a stable contract: 0 for YES/valid, 1 for NO/invalid,
//! 2 for structural errors and exhausted caps (caps additionally print a
//! `cap-exceeded` line on standard error).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use csmp_core::generators::{grid_instance, rst_gadget, OccupancyPattern, Point};
use csmp_core::graph::RootedGraph;
use csmp_core::instance::{
    parse_instance, relabel_terminals, serialize_instance, DestRobot, Instance, TerminalSet,
};
use csmp_core::oracle::{decide, OracleOutcome};
use csmp_core::planar::{free_analysis, kernelize_and_solve, KernelDecision, KernelOverrides};
use csmp_core::reductions::{reduce_bounded_treedepth, shorten_paths};
use csmp_core::representation::{
    extract_representation, find_realization, parse_representation, realize_moves,
    serialize_representation, HMove, HSchedule, REALIZATION_WORK_CAP,
};
use csmp_core::schedule::{parse_schedule, serialize_schedule, validate, Verdict};
use csmp_core::solver::{
    solve_bounded_ball, solve_iddfs_with, solve_optimal, solve_optimal_with, SearchLimits,
    SolveOutcome,
};
use csmp_core::{Error, Result};

#[derive(Parser)]
#[command(name = "csmp", version, about = "Coordinated sliding-motion planning toolkit")]
struct Cli {
    /// Worker threads reserved for batch use; outputs never depend on this.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find a minimum-makespan schedule within the move budget.
    Solve(SolveArgs),
    /// Check a schedule against an instance.
    Validate(ValidateArgs),
    /// Apply reduction rules in order, printing one trace line per change.
    Reduce(ReduceArgs),
    /// Construct instances.
    #[command(subcommand)]
    Generate(GenerateCmd),
    /// Extract and realize schedule representations.
    #[command(subcommand)]
    Repr(ReprCmd),
    /// Reference decision search; shares no code with `solve`.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Bfs,
    Iddfs,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file (CSMP text format).
    #[arg(short = 'i', long = "instance")]
    instance: PathBuf,
    /// Override the instance's move budget.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long, value_enum, default_value_t = Algo::Bfs)]
    algo: Algo,
    /// Restrict the search to the bounded ball around the main robot
    /// (single-destination instances; ignores --algo and --max-states).
    #[arg(long)]
    ball: bool,
    /// State cap for the search.
    #[arg(long, default_value_t = 10_000_000)]
    max_states: usize,
    /// Write the schedule here on YES.
    #[arg(short = 'o', long = "out")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(short = 'i', long = "instance")]
    instance: PathBuf,
    /// Schedule file to check.
    #[arg(short = 's', long = "schedule")]
    schedule: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Rule {
    Shorten,
    Prune,
    Planar,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(short = 'i', long = "instance")]
    instance: PathBuf,
    /// Comma-separated rules, applied in the order given.
    #[arg(long, value_delimiter = ',', required = true)]
    rules: Vec<Rule>,
    /// Clean-path threshold for the planar rule.
    #[arg(long)]
    clean_threshold: Option<usize>,
    /// Roadmap size cap for the planar rule.
    #[arg(long)]
    roadmap_cap: Option<usize>,
    /// Bench-sized planar settings (threshold 12, roadmap cap 5).
    #[arg(long)]
    desk_scale: bool,
    /// Separator size bound for the prune rule.
    #[arg(long, default_value_t = 2)]
    prune_depth: usize,
    /// Work cap for prune enumeration and the planar pipeline.
    #[arg(long)]
    work_cap: Option<usize>,
    /// Write the reduced instance here.
    #[arg(short = 'o', long = "out")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum GenerateCmd {
    /// Rectangular grid; the main robot crosses corner to corner.
    Grid(GridArgs),
    /// Steiner-tree hardness gadget over integer lattice points.
    Rst(RstArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PatternKind {
    Random,
    Corridor,
    Explicit,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    #[arg(long, value_enum)]
    pattern: PatternKind,
    /// Blocker probability for the random pattern.
    #[arg(long, required_if_eq("pattern", "random"))]
    density: Option<f64>,
    /// RNG seed; required for randomized patterns.
    #[arg(long, required_if_eq("pattern", "random"))]
    seed: Option<u64>,
    /// Comma-separated blocker vertices for the explicit pattern.
    #[arg(long, value_delimiter = ',')]
    blockers: Vec<usize>,
    /// Move budget of the generated instance.
    #[arg(long)]
    budget: usize,
    #[arg(short = 'o', long = "out")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RstArgs {
    /// Lattice points as `x,y` pairs separated by `;` (e.g. `0,0;2,0`).
    #[arg(long)]
    points: String,
    /// Steiner length bound; the gadget budget is ell + 1.
    #[arg(long)]
    ell: usize,
    #[arg(short = 'o', long = "out")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ReprCmd {
    /// Contract a valid schedule to its representation.
    Extract(ExtractArgs),
    /// Embed a representation into an instance; optionally reconstruct a
    /// schedule through the embedding.
    Realize(RealizeArgs),
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(short = 'i', long = "instance")]
    instance: PathBuf,
    #[arg(short = 's', long = "schedule")]
    schedule: PathBuf,
    /// Write the representation here.
    #[arg(short = 'o', long = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct RealizeArgs {
    #[arg(short = 'i', long = "instance")]
    instance: PathBuf,
    /// Representation file (REPR text format).
    #[arg(short = 'r', long = "representation")]
    representation: PathBuf,
    /// Solve on the representation and write the realized schedule here.
    #[arg(short = 'o', long = "out")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(short = 'i', long = "instance")]
    instance: PathBuf,
    /// Decision depth; defaults to the instance's budget.
    #[arg(long)]
    budget: Option<usize>,
    /// State cap for the reference search.
    #[arg(long, default_value_t = 10_000_000)]
    max_states: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads == 0 {
        eprintln!("error: --threads must be at least 1");
        return ExitCode::from(2);
    }
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Reduce(a) => cmd_reduce(a),
        Command::Generate(GenerateCmd::Grid(a)) => cmd_generate_grid(a),
        Command::Generate(GenerateCmd::Rst(a)) => cmd_generate_rst(a),
        Command::Repr(ReprCmd::Extract(a)) => cmd_repr_extract(a),
        Command::Repr(ReprCmd::Realize(a)) => cmd_repr_realize(a),
        Command::Oracle(a) => cmd_oracle(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Error::CapExceeded(msg)) => {
            eprintln!("cap-exceeded: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))
}

fn write_out(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)
        .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))
}

fn cmd_solve(a: SolveArgs) -> Result<u8> {
    let mut inst = parse_instance(&read_to_string(&a.instance)?)?;
    if let Some(b) = a.budget {
        inst.budget = b;
    }
    let budget = inst.budget;
    let (outcome, _) = if a.ball {
        let lambda = free_analysis(&inst)?.lambda;
        solve_bounded_ball(&inst, budget, lambda)?
    } else {
        let limits = SearchLimits { max_depth: Some(budget), max_states: a.max_states };
        match a.algo {
            Algo::Bfs => solve_optimal_with(&inst, limits),
            Algo::Iddfs => solve_iddfs_with(&inst, limits),
        }
    };
    match outcome {
        SolveOutcome::Solved(s) => {
            println!("YES {}", s.makespan());
            if let Some(out) = &a.out {
                write_out(out, &serialize_schedule(&s))?;
            }
            Ok(0)
        }
        SolveOutcome::NoWithinDepth | SolveOutcome::Infeasible => {
            println!("NO");
            Ok(1)
        }
        SolveOutcome::CapExceeded => Err(Error::CapExceeded("solver state cap".into())),
    }
}

fn cmd_validate(a: ValidateArgs) -> Result<u8> {
    let inst = parse_instance(&read_to_string(&a.instance)?)?;
    let sched = parse_schedule(&read_to_string(&a.schedule)?)?;
    match validate(&inst, &sched)? {
        Verdict::Valid => {
            println!("valid");
            Ok(0)
        }
        Verdict::Invalid(v) => {
            eprintln!("invalid at step {}: {}", v.time_step, v.rule);
            Ok(1)
        }
    }
}

fn cmd_reduce(a: ReduceArgs) -> Result<u8> {
    let mut cur = parse_instance(&read_to_string(&a.instance)?)?;
    for rule in &a.rules {
        match rule {
            Rule::Shorten => {
                let (next, events) = shorten_paths(&cur);
                for e in &events {
                    println!("{e}");
                }
                cur = next;
            }
            Rule::Prune => {
                let (next, events) = reduce_bounded_treedepth(
                    &cur,
                    a.prune_depth,
                    a.work_cap.unwrap_or(10_000_000),
                )?;
                for e in &events {
                    println!("{e}");
                }
                cur = next;
            }
            Rule::Planar => {
                let mut overrides = if a.desk_scale {
                    KernelOverrides::desk_scale()
                } else {
                    KernelOverrides::default()
                };
                if a.clean_threshold.is_some() {
                    overrides.clean_threshold = a.clean_threshold;
                }
                if a.roadmap_cap.is_some() {
                    overrides.roadmap_cap = a.roadmap_cap;
                }
                if a.work_cap.is_some() {
                    overrides.work_cap = a.work_cap;
                }
                let run = kernelize_and_solve(&cur, &overrides)?;
                for e in &run.trace {
                    println!("{e}");
                }
                cur = run.kernel;
                if let KernelDecision::Undecided(why) = run.decision {
                    return Err(Error::CapExceeded(why));
                }
            }
        }
    }
    if let Some(out) = &a.out {
        write_out(out, &serialize_instance(&cur))?;
    }
    Ok(0)
}

fn emit_instance(inst: &Instance, out: Option<&Path>) -> Result<u8> {
    let text = serialize_instance(inst);
    match out {
        Some(path) => write_out(path, &text)?,
        None => print!("{text}"),
    }
    Ok(0)
}

fn cmd_generate_grid(a: GridArgs) -> Result<u8> {
    if a.pattern != PatternKind::Explicit && !a.blockers.is_empty() {
        return Err(Error::InvalidInput(
            "--blockers only applies to the explicit pattern".into(),
        ));
    }
    if a.pattern != PatternKind::Random && a.density.is_some() {
        return Err(Error::InvalidInput(
            "--density only applies to the random pattern".into(),
        ));
    }
    let pattern = match a.pattern {
        PatternKind::Random => OccupancyPattern::Random { density: a.density.unwrap() },
        PatternKind::Corridor => OccupancyPattern::Corridor,
        PatternKind::Explicit => OccupancyPattern::Explicit(a.blockers.clone()),
    };
    let inst = grid_instance(a.rows, a.cols, &pattern, a.seed.unwrap_or(0), a.budget)?;
    emit_instance(&inst, a.out.as_deref())
}

fn parse_points(s: &str) -> Result<Vec<Point>> {
    let mut out = Vec::new();
    for tok in s.split(|c: char| c == ';' || c.is_whitespace()).filter(|t| !t.is_empty()) {
        let (x, y) = tok
            .split_once(',')
            .ok_or_else(|| Error::InvalidInput(format!("point '{tok}' is not 'x,y'")))?;
        let num = |v: &str| {
            v.trim()
                .parse::<i64>()
                .map_err(|_| Error::InvalidInput(format!("invalid coordinate '{v}'")))
        };
        out.push((num(x)?, num(y)?));
    }
    Ok(out)
}

fn cmd_generate_rst(a: RstArgs) -> Result<u8> {
    let points = parse_points(&a.points)?;
    let g = rst_gadget(&points, a.ell)?;
    if g.normalized {
        let shown: Vec<String> = g.points.iter().map(|(x, y)| format!("{x},{y}")).collect();
        eprintln!("note: points normalized to {}", shown.join(";"));
    }
    emit_instance(&g.instance, a.out.as_deref())
}

fn cmd_repr_extract(a: ExtractArgs) -> Result<u8> {
    let inst = parse_instance(&read_to_string(&a.instance)?)?;
    let sched = parse_schedule(&read_to_string(&a.schedule)?)?;
    let rep = extract_representation(&inst, &sched)?;
    write_out(&a.out, &serialize_representation(&inst, &rep))?;
    Ok(0)
}

/// Reads the robots' start and target vertices off a representation's
/// terminal labels, giving the instance the robots play on the
/// representation itself.
fn h_instance_from_labels(inst: &Instance, h: &RootedGraph) -> Result<Instance> {
    let ts = TerminalSet::of(inst);
    let m = inst.dest_robots.len() as u32;
    let at: std::collections::BTreeMap<u32, usize> =
        h.roots.iter().map(|(&v, &l)| (l, v)).collect();
    let lookup = |label: u32| -> Result<usize> {
        at.get(&label).copied().ok_or_else(|| {
            Error::InvalidInput(format!("representation misses terminal label {label}"))
        })
    };
    // A target shadowed by a start on the same instance vertex lives on that
    // start's representation vertex.
    let mut target_at: std::collections::BTreeMap<u32, usize> = Default::default();
    for (&v, &l) in ts.labels() {
        if let Some(shadowed) = ts.shadowed_target(v) {
            target_at.insert(shadowed, lookup(l)?);
        }
        if (m + 1..=2 * m).contains(&l) {
            target_at.insert(l, lookup(l)?);
        }
    }
    let dest = (0..inst.dest_robots.len())
        .map(|i| {
            let target = *target_at.get(&(m + 1 + i as u32)).ok_or_else(|| {
                Error::InvalidInput(format!(
                    "representation misses target label {}",
                    m + 1 + i as u32
                ))
            })?;
            Ok(DestRobot { start: lookup(1 + i as u32)?, target })
        })
        .collect::<Result<Vec<_>>>()?;
    let free = (0..inst.free_robots.len())
        .map(|j| lookup(2 * m + 1 + j as u32))
        .collect::<Result<Vec<_>>>()?;
    Instance::new(h.graph.clone(), dest, free, inst.budget, false)
}

fn cmd_repr_realize(a: RealizeArgs) -> Result<u8> {
    let inst = parse_instance(&read_to_string(&a.instance)?)?;
    let h = parse_representation(&inst, &read_to_string(&a.representation)?)?;
    let g = relabel_terminals(&inst);
    let Some(r) = find_realization(&h, &g, REALIZATION_WORK_CAP)? else {
        println!("NO");
        return Ok(1);
    };
    println!("YES");
    for (i, &v) in r.vertex_image.iter().enumerate() {
        println!("v {i} -> {v}");
    }
    if let Some(out) = &a.out {
        let hinst = h_instance_from_labels(&inst, &h)?;
        let (outcome, _) = solve_optimal(&hinst, Some(inst.budget));
        let hsched = match outcome {
            SolveOutcome::Solved(s) => s,
            SolveOutcome::CapExceeded => {
                return Err(Error::CapExceeded("solver state cap".into()))
            }
            _ => {
                eprintln!(
                    "no schedule within budget {} on the representation",
                    inst.budget
                );
                return Ok(1);
            }
        };
        let hs = HSchedule {
            moves: hsched
                .moves
                .iter()
                .map(|mv| HMove {
                    time_step: mv.time_step,
                    robot: mv.robot,
                    hpath: mv.path.clone(),
                })
                .collect(),
        };
        let sched = realize_moves(&h, &g, &r, &hs)?;
        match validate(&inst, &sched)? {
            Verdict::Valid => write_out(out, &serialize_schedule(&sched))?,
            Verdict::Invalid(v) => {
                return Err(Error::InvalidInput(format!(
                    "reconstructed schedule fails validation at step {}: {}",
                    v.time_step, v.rule
                )))
            }
        }
    }
    Ok(0)
}

fn cmd_oracle(a: OracleArgs) -> Result<u8> {
    let inst = parse_instance(&read_to_string(&a.instance)?)?;
    let budget = a.budget.unwrap_or(inst.budget);
    match decide(&inst, budget, a.max_states) {
        OracleOutcome::Yes(d) => {
            println!("YES {d}");
            Ok(0)
        }
        OracleOutcome::No => {
            println!("NO");
            Ok(1)
        }
        OracleOutcome::CapExceeded => Err(Error::CapExceeded("oracle state cap".into())),
    }
}
