use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use bpp_core::benchmarks::parse_suite;
use bpp_core::dsl::{load_domain, load_plan, load_problem, LoadError, ParseDiagnostic, ProblemSpec};
use bpp_core::{oracle_plan, plan, validate_bat, validate_plan, Bat, FgpTheory, OracleConfig, OracleResult, Outcome, PlannerConfig, SearchStats};

const EXIT_OK: u8 = 0;
const EXIT_NO: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(name = "bpp", version, about = "Bounded planner for open-world action theories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a plan.
    Plan {
        domain: PathBuf,
        problem: PathBuf,
        #[command(flatten)]
        flags: PlanFlags,
    },
    /// Check a plan file against a problem.
    Validate { domain: PathBuf, problem: PathBuf, plan: PathBuf },
    /// Find a shortest plan by exhaustive breadth-first enumeration.
    Oracle {
        domain: PathBuf,
        problem: PathBuf,
        /// Override the problem's plan-length bound.
        #[arg(long)]
        bound: Option<usize>,
        /// Give up after generating this many situations.
        #[arg(long)]
        node_limit: Option<u64>,
        #[arg(long)]
        json: bool,
    },
    /// Check that a domain is a well-formed action theory.
    Check { domain: PathBuf },
    /// Run every instance of a suite manifest.
    Bench {
        suite: PathBuf,
        #[command(flatten)]
        flags: PlanFlags,
    },
}

#[derive(Args, Clone)]
struct PlanFlags {
    /// Override the problem's plan-length bound.
    #[arg(long)]
    bound: Option<usize>,
    /// Use h = 0 (uniform-cost search).
    #[arg(long)]
    no_heuristic: bool,
    /// Skip situations whose state was already generated.
    #[arg(long)]
    dup_detect: bool,
    /// Discard situations from which the relaxed graph cannot reach the goal.
    #[arg(long)]
    dead_end_prune: bool,
    /// Reserved; the planner is deterministic.
    #[arg(long)]
    seed: Option<u64>,
    /// Print a JSON result instead of text.
    #[arg(long)]
    json: bool,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Maximum number of expansions.
    #[arg(long)]
    node_limit: Option<u64>,
}

impl PlanFlags {
    fn config(&self, bound: usize) -> PlannerConfig {
        PlannerConfig {
            heuristic_on: !self.no_heuristic,
            duplicate_detection: self.dup_detect,
            dead_end_prune: self.dead_end_prune,
            node_limit: self.node_limit,
            time_limit: self.time_limit.map(Duration::from_secs_f64),
            ..PlannerConfig::new(bound)
        }
    }
}

/// Machine-readable result of `plan`, `oracle` and each `bench` row.
#[derive(Serialize)]
struct JsonResult {
    mode: &'static str,
    domain: String,
    problem: String,
    bound: usize,
    status: &'static str,
    plan: Option<Vec<String>>,
    plan_length: Option<usize>,
    stats: Option<SearchStats>,
    wall_time_ms: f64,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }

    fn internal(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INTERNAL, message: message.into() }
    }
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        Failure::usage(e.to_string())
    }
}

fn print_warnings(ws: &[ParseDiagnostic]) {
    for w in ws {
        eprintln!("{w}");
    }
}

struct Loaded {
    bat: Bat,
    problem: ProblemSpec,
    init: FgpTheory,
}

fn load(domain: &Path, problem: &Path) -> Result<Loaded, Failure> {
    let d = load_domain(domain)?;
    print_warnings(&d.warnings);
    let p = load_problem(problem, &d.value)?;
    print_warnings(&p.warnings);
    let init = p
        .value
        .initial_theory(&d.value)
        .map_err(|e| Failure::usage(format!("{}: {e}", problem.display())))?;
    Ok(Loaded { bat: d.value, problem: p.value, init })
}

fn status_of(outcome: &Outcome) -> &'static str {
    match outcome {
        Outcome::Plan(_) => "plan",
        Outcome::NoPlanWithinBound => "no_plan",
        Outcome::ResourceLimit => "resource_limit",
    }
}

fn run_plan(l: &Loaded, flags: &PlanFlags) -> Result<JsonResult, Failure> {
    let bound = flags.bound.unwrap_or(l.problem.bound);
    let r = plan(&l.bat, &l.init, &l.problem.goal, &flags.config(bound)).map_err(|e| Failure::internal(e.to_string()))?;
    let plan = r.outcome.plan().map(|p| p.iter().map(ToString::to_string).collect::<Vec<_>>());
    Ok(JsonResult {
        mode: "search",
        domain: l.bat.name.clone(),
        problem: l.problem.name.clone(),
        bound,
        status: status_of(&r.outcome),
        plan_length: plan.as_ref().map(Vec::len),
        plan,
        stats: Some(r.stats),
        wall_time_ms: r.elapsed.as_secs_f64() * 1e3,
    })
}

fn exit_for(status: &str) -> u8 {
    if status == "plan" {
        EXIT_OK
    } else {
        EXIT_NO
    }
}

fn report(res: &JsonResult, json: bool) -> u8 {
    if json {
        println!("{}", serde_json::to_string_pretty(res).expect("serializable"));
        return exit_for(res.status);
    }
    if res.mode == "oracle" {
        println!("; mode: oracle");
    }
    match &res.plan {
        Some(p) => {
            for a in p {
                println!("{a}");
            }
        }
        None if res.status == "no_plan" => println!("; no plan within bound {}", res.bound),
        None => println!("; resource limit reached"),
    }
    if let Some(s) = &res.stats {
        println!("; expansions: {}", s.expansions);
        println!("; generated: {}", s.generated);
        println!("; peak frontier: {}", s.peak_frontier);
    }
    println!("; wall time: {:.3} ms", res.wall_time_ms);
    if let Some(n) = res.plan_length {
        println!("; plan length: {n}");
    }
    exit_for(res.status)
}

fn cmd_plan(domain: &Path, problem: &Path, flags: &PlanFlags) -> Result<u8, Failure> {
    let l = load(domain, problem)?;
    let res = run_plan(&l, flags)?;
    Ok(report(&res, flags.json))
}

fn cmd_oracle(domain: &Path, problem: &Path, bound: Option<usize>, node_limit: Option<u64>, json: bool) -> Result<u8, Failure> {
    let l = load(domain, problem)?;
    let bound = bound.unwrap_or(l.problem.bound);
    let start = Instant::now();
    let r = oracle_plan(&l.bat, &l.init, &l.problem.goal, &OracleConfig { bound, node_limit })
        .map_err(|e| Failure::internal(e.to_string()))?;
    let (status, plan) = match &r {
        OracleResult::Plan(p) => ("plan", Some(p.iter().map(ToString::to_string).collect::<Vec<_>>())),
        OracleResult::NoPlan => ("no_plan", None),
        OracleResult::ResourceLimit => ("resource_limit", None),
    };
    let res = JsonResult {
        mode: "oracle",
        domain: l.bat.name.clone(),
        problem: l.problem.name.clone(),
        bound,
        status,
        plan_length: plan.as_ref().map(Vec::len),
        plan,
        stats: None,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    Ok(report(&res, json))
}

fn cmd_validate(domain: &Path, problem: &Path, plan_path: &Path) -> Result<u8, Failure> {
    let l = load(domain, problem)?;
    let p = load_plan(plan_path)?;
    match validate_plan(&l.bat, &l.init, &l.problem.goal, &p) {
        Ok(()) => {
            println!("valid plan of length {}", p.len());
            Ok(EXIT_OK)
        }
        Err(f) => {
            println!("invalid: {f}");
            Ok(EXIT_NO)
        }
    }
}

fn cmd_check(domain: &Path) -> Result<u8, Failure> {
    let text = std::fs::read_to_string(domain).map_err(|e| Failure::usage(format!("cannot read {}: {e}", domain.display())))?;
    match bpp_core::dsl::parse_domain_src(&text, Some(&domain.display().to_string())) {
        Ok(d) => {
            print_warnings(&d.warnings);
            // The parser already validates; run it again for the summary.
            match validate_bat(&d.value) {
                Ok(()) => {
                    println!(
                        "ok: domain {} with {} actions, {} fluents",
                        d.value.name,
                        d.value.schemas().len(),
                        d.value.signature().len()
                    );
                    Ok(EXIT_OK)
                }
                Err(vs) => {
                    for v in vs {
                        println!("{v}");
                    }
                    Ok(EXIT_NO)
                }
            }
        }
        Err(diags) => {
            for d in diags {
                println!("{d}");
            }
            Ok(EXIT_NO)
        }
    }
}

fn cmd_bench(suite: &Path, flags: &PlanFlags) -> Result<u8, Failure> {
    let text = std::fs::read_to_string(suite).map_err(|e| Failure::usage(format!("cannot read {}: {e}", suite.display())))?;
    let base = suite.parent().unwrap_or(Path::new("."));
    let entries = parse_suite(&text, base).map_err(|e| Failure::usage(format!("{}: {e}", suite.display())))?;
    let mut rows = Vec::new();
    for e in &entries {
        let l = load(&e.domain, &e.problem)?;
        let mut f = flags.clone();
        f.bound = flags.bound.or(e.bound);
        if f.time_limit.is_none() {
            f.time_limit = e.time_limit_secs.map(|s| s as f64);
        }
        let mut res = run_plan(&l, &f)?;
        res.problem = e.name.clone();
        rows.push(res);
    }
    if flags.json {
        println!("{}", serde_json::to_string_pretty(&rows).expect("serializable"));
    } else {
        println!("{:<28} {:>6} {:>10} {:>12} {:>12}", "instance", "bound", "result", "expansions", "time_ms");
        for r in &rows {
            let result = match r.plan_length {
                Some(n) => n.to_string(),
                None if r.status == "no_plan" => "no-plan".into(),
                None => "limit".into(),
            };
            let exp = r.stats.as_ref().map_or(0, |s| s.expansions);
            println!("{:<28} {:>6} {:>10} {:>12} {:>12.1}", r.problem, r.bound, result, exp, r.wall_time_ms);
        }
    }
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Plan { domain, problem, flags } => cmd_plan(domain, problem, flags),
        Command::Validate { domain, problem, plan } => cmd_validate(domain, problem, plan),
        Command::Oracle { domain, problem, bound, node_limit, json } => cmd_oracle(domain, problem, *bound, *node_limit, *json),
        Command::Check { domain } => cmd_check(domain),
        Command::Bench { suite, flags } => cmd_bench(suite, flags),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
