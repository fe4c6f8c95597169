use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use exbal::bp::{bp_run, message_dump_json, BpProblem};
use exbal::dynamics::{run, Recording, RunConfig, RunResult, Scheduler, StopReason};
use exbal::experiments::random_outcome;
use exbal::generate::{pick_matching, random_graph, rng_for, GraphParams, MatchingRule};
use exbal::instance::{read_instance, Instance};
use exbal::rational::{format, int, parse, to_f64, Rational};
use exbal::tight::{gen_tight_lollipop, tight_eps};
use exbal::witness::{
    certify_with_margin, explore_with, has_balanced_outcome, max_fractional_weight_capped, structure_witness,
    Certification, TieBreak, WitnessReport, DEFAULT_ENUMERATION_CAP,
};
use exbal::{check_outcome, Allocation, Error, Outcome};

mod exit {
    pub const PARSE: u8 = 3;
    pub const INVARIANT: u8 = 4;
    pub const CAPACITY: u8 = 5;
    pub const INCONCLUSIVE: u8 = 6;
    pub const INPUT: u8 = 7;
    pub const IO: u8 = 8;
    pub const AMBIGUOUS: u8 = 9;
    pub const NO_WITNESS: u8 = 10;
    pub const INTERNAL: u8 = 70;
}

/// Failure of a command: a library error or a verdict the command refuses to report as success.
enum Failure {
    Lib(Error),
    Inconclusive(String),
    Checks(Vec<String>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Lib(Error::Io(e.to_string()))
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Lib(e) => match e {
                Error::Parse(_) => exit::PARSE,
                Error::Validation(_) => exit::INVARIANT,
                Error::Capacity { .. } => exit::CAPACITY,
                Error::Input(_) => exit::INPUT,
                Error::Io(_) => exit::IO,
                Error::AmbiguousOptimum(_) => exit::AMBIGUOUS,
                Error::NoWitness(_) => exit::NO_WITNESS,
                Error::Internal(_) => exit::INTERNAL,
            },
            Failure::Inconclusive(_) => exit::INCONCLUSIVE,
            Failure::Checks(_) => exit::INVARIANT,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Lib(e) => e.to_string(),
            Failure::Inconclusive(m) => format!("inconclusive: {m}"),
            Failure::Checks(list) => format!("{} check(s) failed:\n  {}", list.len(), list.join("\n  ")),
        }
    }
}

type CmdResult = Result<(), Failure>;

/// Edge-balancing dynamics, witnesses, and BP matching on exchange networks.
#[derive(Parser)]
#[command(name = "exbal", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the dynamics on an instance.
    Simulate(SimulateArgs),
    /// Report stability and balance of an instance's allocation.
    Check(CheckArgs),
    /// Explore from a vertex (or pick a start automatically) and build a witness.
    Explore(ExploreArgs),
    /// Maximum fractional matching by exhaustive enumeration.
    Maxfrac(MaxfracArgs),
    /// Max-product message passing to choose a matching.
    Bp(BpArgs),
    /// Emit the lollipop instance on which approximate balance is tight.
    GenTight(GenTightArgs),
    /// Seeded random sweep cross-checked against the oracle.
    Batch(BatchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum SchedulerKind {
    RoundRobin,
    Random,
    Trace,
}

#[derive(Clone, Copy, ValueEnum)]
enum InitKind {
    /// Lower-id endpoint gets 0, the other the full weight.
    Zeros,
    Equal,
    Random,
    /// The allocation stored in the instance.
    File,
}

#[derive(Args)]
struct SimulateArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "round-robin")]
    scheduler: SchedulerKind,
    /// Edge sequence for `--scheduler trace`: one `u v` pair per line.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Defaults to `file` when the instance has an allocation, else `equal`.
    #[arg(long, value_enum)]
    init: Option<InitKind>,
    #[arg(long, default_value = "1e-6")]
    stop_eps: String,
    #[arg(long, default_value_t = 1_000_000)]
    max_steps: u64,
    /// Write the trajectory as delimited text.
    #[arg(long)]
    trajectory: Option<PathBuf>,
    /// Record every k-th step only.
    #[arg(long)]
    every: Option<u64>,
    /// Write the final instance (with allocation) as JSON.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    instance: PathBuf,
    #[arg(long, default_value = "0")]
    eps: String,
    #[arg(long, default_value = "0")]
    delta: String,
}

#[derive(Args)]
struct ExploreArgs {
    instance: PathBuf,
    #[arg(long, conflicts_with = "auto", required_unless_present = "auto")]
    start: Option<usize>,
    /// Choose the start from unhappy and unstable edges.
    #[arg(long)]
    auto: bool,
    /// Only the forward half of the trail (with `--start`).
    #[arg(long, requires = "start")]
    forward: bool,
    /// Break ties between alternatives with this seed instead of by lowest id.
    #[arg(long, requires = "start")]
    tie_seed: Option<u64>,
    /// With `--auto`, try every vertex when the start rules fail.
    #[arg(long, requires = "auto")]
    exhaustive: bool,
    /// The allocation is only an ε-fixed point; require margins above n·ε.
    #[arg(long, default_value = "0")]
    eps: String,
    /// Write the witness report as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct MaxfracArgs {
    instance: PathBuf,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    cap: usize,
}

#[derive(Args)]
struct BpArgs {
    instance: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    max_iters: u64,
    /// Add `id · η` to each edge weight.
    #[arg(long)]
    perturb: Option<String>,
    /// Run the dynamics on the extracted matching from an equal split.
    #[arg(long)]
    then_simulate: bool,
    #[arg(long, default_value = "1e-6")]
    stop_eps: String,
    /// Write the final messages as JSON.
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Args)]
struct GenTightArgs {
    #[arg(long)]
    k: u32,
    /// Where to write the instance; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleKind {
    MaxWeight,
    RandomMaximal,
}

#[derive(Args)]
struct BatchArgs {
    #[arg(long, default_value_t = 200)]
    seeds: u64,
    #[arg(long, default_value_t = 0)]
    first_seed: u64,
    #[arg(long, default_value_t = 3)]
    min_vertices: usize,
    #[arg(long, default_value_t = 10)]
    max_vertices: usize,
    #[arg(long, default_value_t = 20)]
    max_edges: usize,
    #[arg(long, default_value_t = 5)]
    max_weight: u64,
    #[arg(long, value_enum, default_value = "max-weight")]
    matching: RuleKind,
    #[arg(long, default_value = "1e-9")]
    stop_eps: String,
    #[arg(long, default_value_t = 1_000_000)]
    max_steps: u64,
    /// Write one row per seed.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn rational_arg(name: &str, s: &str) -> Result<Rational, Failure> {
    let r = parse(s).map_err(|e| Error::Input(format!("--{name}: {e}")))?;
    if r < int(0) {
        return Err(Error::Input(format!("--{name} must be nonnegative")).into());
    }
    Ok(r)
}

fn write_file(path: &Path, text: &str) -> CmdResult {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(())
}

fn print_allocation(o: &Outcome) {
    for (v, x) in o.allocation().values().iter().enumerate() {
        println!("  x[{v}] = {} (~{:.9})", format(x), to_f64(x));
    }
}

fn read_trace(path: &Path) -> Result<Vec<(usize, usize)>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> =
            line.split(|c: char| c.is_whitespace() || c == ',' || c == '-').filter(|p| !p.is_empty()).collect();
        let pair = match parts.as_slice() {
            [a, b] => a.parse().ok().zip(b.parse().ok()),
            _ => None,
        };
        out.push(pair.ok_or_else(|| Error::Parse(format!("{} line {}: expected `u v`", path.display(), i + 1)))?);
    }
    Ok(out)
}

fn simulate(a: SimulateArgs) -> CmdResult {
    let inst = read_instance(&a.instance)?;
    let m = inst.matching_or_err()?.clone();
    let g = inst.graph.clone();
    let init = a.init.unwrap_or(if inst.allocation.is_some() { InitKind::File } else { InitKind::Equal });
    let x = match init {
        InitKind::Zeros => Allocation::lower_zero(&g, &m),
        InitKind::Equal => Allocation::equal_split(&g, &m),
        InitKind::Random => random_outcome((*g).clone(), (*m).clone(), a.seed).allocation().clone(),
        InitKind::File => {
            inst.allocation.clone().ok_or_else(|| Error::Input("--init file: instance has no allocation".into()))?
        }
    };
    let start = Outcome::new(g, m, x)?;
    let scheduler = match a.scheduler {
        SchedulerKind::RoundRobin => Scheduler::RoundRobin,
        SchedulerKind::Random => Scheduler::SeededRandom(a.seed),
        SchedulerKind::Trace => {
            let path = a.trace.as_ref().ok_or_else(|| Error::Input("--scheduler trace needs --trace FILE".into()))?;
            Scheduler::Trace(read_trace(path)?)
        }
    };
    let stop_eps = rational_arg("stop-eps", &a.stop_eps)?;
    let recording = match (a.trajectory.is_some(), a.every) {
        (false, _) => Recording::Off,
        (true, None) => Recording::Full,
        (true, Some(k)) => Recording::Every(k.max(1)),
    };
    let res = run(&start, &scheduler, &RunConfig::new(stop_eps.clone(), a.max_steps).recording(recording))?;
    report_run(&res);
    let n = res.outcome.graph().vertex_count() as i64;
    let r = check_outcome(&res.outcome, &stop_eps, &(&stop_eps * int(n)))?;
    println!(
        "eps_quasi_balanced({}): {}  delta_stable({}): {}",
        format(&stop_eps),
        r.eps_quasi_balanced,
        format(&r.delta),
        r.delta_stable
    );
    if let Some(path) = &a.trajectory {
        let f = fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        res.trajectory.write_csv(io::BufWriter::new(f))?;
    }
    if let Some(path) = &a.output {
        write_file(path, &Instance::from_outcome(&res.outcome).to_json())?;
    }
    Ok(())
}

fn report_run(res: &RunResult) {
    println!("stop: {} after {} steps ({} applied)", res.stop, res.steps, res.applied);
    print_allocation(&res.outcome);
}

fn check(a: CheckArgs) -> CmdResult {
    let o = read_instance(&a.instance)?.outcome()?;
    let r = check_outcome(&o, &rational_arg("eps", &a.eps)?, &rational_arg("delta", &a.delta)?)?;
    print!("{r}");
    Ok(())
}

fn explore_cmd(a: ExploreArgs) -> CmdResult {
    let o = read_instance(&a.instance)?.outcome()?;
    let eps = rational_arg("eps", &a.eps)?;
    let w = if a.auto {
        match certify_with_margin(&o, &eps, a.exhaustive)? {
            Certification::Witness { witness, start } => {
                println!("start: {start}");
                *witness
            }
            Certification::NothingToCertify => {
                println!("nothing to certify: the outcome is stable with no unhappy edges");
                return Ok(());
            }
            c @ Certification::Inconclusive { .. } => {
                let text = c.to_string();
                return Err(Failure::Inconclusive(text.trim_start_matches("inconclusive: ").to_string()));
            }
        }
    } else {
        let u0 = a.start.expect("clap requires --start without --auto");
        let tie = a.tie_seed.map_or(TieBreak::LowestId, TieBreak::Seeded);
        structure_witness(&o, explore_with(&o, u0, a.forward, tie)?)?
    };
    let walk: Vec<String> = w.trail.walk().iter().map(|v| v.to_string()).collect();
    println!("trail: {}", walk.join(" "));
    println!("class: {} (left {}, right {})", w.class.kind, w.class.left, w.class.right);
    if let Some(c) = &w.class.even_cycle {
        let c: Vec<String> = c.iter().map(|v| v.to_string()).collect();
        println!("even cycle: {}", c.join(" "));
    }
    println!("matching weight: {}", format(&w.matching_weight));
    match (&w.fractional_witness, &w.weight_gap) {
        (Some(y), Some(gap)) => {
            println!("witness: {}", y.render(o.graph()));
            println!("witness weight: {}", format(&(&w.matching_weight + gap)));
            println!("weight gap: {}", format(gap));
        }
        _ => println!("witness: none"),
    }
    if let Some(path) = &a.json {
        write_file(path, &WitnessReport::new(&w, &o).to_json())?;
    }
    Ok(())
}

fn maxfrac(a: MaxfracArgs) -> CmdResult {
    let inst = read_instance(&a.instance)?;
    let (best, y) = max_fractional_weight_capped(&inst.graph, a.cap)?;
    println!("max fractional weight: {}", format(&best));
    println!("maximizer: {}", y.render(&inst.graph));
    println!("integral: {}", y.is_integral());
    if let Some(m) = &inst.matching {
        println!("matching weight: {}", m.weight(&inst.graph));
        println!("has balanced outcome: {}", has_balanced_outcome(&inst.graph, m)?);
    }
    Ok(())
}

fn bp(a: BpArgs) -> CmdResult {
    let inst = read_instance(&a.instance)?;
    let g = &inst.graph;
    let problem = match &a.perturb {
        Some(eta) => BpProblem::perturbed(g, &rational_arg("perturb", eta)?),
        None => BpProblem::new(g),
    };
    let res = bp_run(&problem, a.max_iters)?;
    println!("status: {}", res.status);
    if let Some(path) = &a.dump {
        write_file(path, &message_dump_json(&res, g))?;
    }
    let Some(m) = &res.matching else {
        return Ok(());
    };
    let pairs: Vec<String> = m.pairs(g).iter().map(|(u, v)| format!("{u}-{v}")).collect();
    println!("matching: {}", pairs.join(" "));
    println!("has balanced outcome: {}", has_balanced_outcome(g, m)?);
    if a.then_simulate {
        let stop_eps = rational_arg("stop-eps", &a.stop_eps)?;
        let o = Outcome::new(g.clone(), std::sync::Arc::new(m.clone()), Allocation::equal_split(g, m))?;
        let run_res =
            run(&o, &Scheduler::RoundRobin, &RunConfig::new(stop_eps.clone(), 1_000_000).recording(Recording::Off))?;
        report_run(&run_res);
        let n = g.vertex_count() as i64;
        let r = check_outcome(&run_res.outcome, &stop_eps, &(&stop_eps * int(n)))?;
        println!(
            "eps_quasi_balanced: {}  delta_stable({}): {}",
            r.eps_quasi_balanced,
            format(&r.delta),
            r.delta_stable
        );
    }
    Ok(())
}

fn gen_tight(a: GenTightArgs) -> CmdResult {
    let o = gen_tight_lollipop(a.k)?;
    let text = Instance::from_outcome(&o).to_json();
    let eps = tight_eps(a.k);
    let summary = format!(
        "k={} eps={} imbalance 2eps={} gap (k+1)eps={}",
        a.k,
        format(&eps),
        format(&(&eps * int(2))),
        format(&(&eps * int(a.k as i64 + 1)))
    );
    match &a.output {
        Some(path) => {
            write_file(path, &text)?;
            println!("{summary}");
        }
        None => {
            eprintln!("{summary}");
            io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn batch(a: BatchArgs) -> CmdResult {
    let params = GraphParams {
        min_vertices: a.min_vertices,
        max_vertices: a.max_vertices,
        max_edges: a.max_edges,
        max_weight: a.max_weight,
    };
    if params.min_vertices > params.max_vertices || params.max_edges > DEFAULT_ENUMERATION_CAP {
        return Err(Error::Input(format!(
            "need min-vertices <= max-vertices and max-edges <= {DEFAULT_ENUMERATION_CAP}"
        ))
        .into());
    }
    let rule = match a.matching {
        RuleKind::MaxWeight => MatchingRule::MaxWeight,
        RuleKind::RandomMaximal => MatchingRule::RandomMaximal,
    };
    let stop_eps = rational_arg("stop-eps", &a.stop_eps)?;
    let mut rows = vec!["seed,n,m,balanced_exists,steps,stop,max_imbalance,min_slack,result".to_string()];
    let mut failures = Vec::new();
    let (mut balanced, mut certified, mut uncertified) = (0, 0, 0);
    for seed in a.first_seed..a.first_seed + a.seeds {
        let mut rng = rng_for(seed);
        let g = random_graph(&mut rng, &params);
        let m = pick_matching(&g, rule, &mut rng)?;
        let exists = has_balanced_outcome(&g, &m)?;
        let n = g.vertex_count();
        let o = random_outcome(g, m, seed);
        let res =
            run(&o, &Scheduler::RoundRobin, &RunConfig::new(stop_eps.clone(), a.max_steps).recording(Recording::Off))?;
        let r = check_outcome(&res.outcome, &stop_eps, &(&stop_eps * int(n as i64)))?;
        let result = if res.stop == StopReason::MaxSteps {
            failures.push(format!("seed {seed}: no eps-fixed point within {} steps", a.max_steps));
            "max-steps".to_string()
        } else if exists {
            balanced += 1;
            if !(r.eps_quasi_balanced && r.delta_stable) {
                failures.push(format!("seed {seed}: fixed point not eps-balanced"));
            }
            "eps-balanced".to_string()
        } else {
            match certify_with_margin(&res.outcome, &stop_eps, false)? {
                Certification::Witness { witness, .. } => {
                    certified += 1;
                    witness.class.kind.name().to_string()
                }
                other => {
                    uncertified += 1;
                    if rule == MatchingRule::MaxWeight {
                        failures.push(format!("seed {seed}: {other}"));
                    }
                    "uncertified".to_string()
                }
            }
        };
        rows.push(format!(
            "{seed},{n},{},{exists},{},{},{},{},{result}",
            res.outcome.graph().edge_count(),
            res.steps,
            match res.stop {
                StopReason::EpsFixedPoint => "eps-fixed-point",
                StopReason::MaxSteps => "max-steps",
                StopReason::TraceExhausted => "trace-exhausted",
                StopReason::NoMatchedEdges => "no-matched-edges",
            },
            format(&r.max_imbalance),
            r.min_slack.as_ref().map(format).unwrap_or_default(),
        ));
    }
    println!(
        "{} seeds: {balanced} with a balanced outcome, {certified} certified by a witness, {uncertified} uncertified",
        a.seeds
    );
    if let Some(path) = &a.csv {
        write_file(path, &(rows.join("\n") + "\n"))?;
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Checks(failures))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Check(a) => check(a),
        Command::Explore(a) => explore_cmd(a),
        Command::Maxfrac(a) => maxfrac(a),
        Command::Bp(a) => bp(a),
        Command::GenTight(a) => gen_tight(a),
        Command::Batch(a) => batch(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
