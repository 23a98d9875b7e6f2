//! Command-line front end; all optimization logic lives in the library.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use polybranch::bench::{
    aggregate, gen_instance, parse_approaches, parse_problem, profile_report, read_report,
    run_bench, write_problem, write_profile, write_report, write_trace, BenchOptions, GenParams,
    ProfileMetric, RunRow,
};
use polybranch::engine::{EngineConfig, SolveStatus};
use polybranch::poly::POProblem;
use polybranch::rules::{run_expert, solve_with_rule, ExpertConfig, ExpertKind, FallbackSpec, RuleId};

#[derive(Parser)]
#[command(name = "polybranch", version, about = "Spatial branch-and-bound workbench for polynomial optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance with a fixed rule or an expert policy.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        /// Fixed branching rule: dual, range, eigen, dual_rel, range_rel, eigen_rel.
        #[arg(long, conflicts_with = "expert")]
        rule: Option<String>,
        /// Expert policy: orule_s, brule_d, bvar_d.
        #[arg(long)]
        expert: Option<String>,
        /// Tie fallback for experts: a rule name, or `opt` for the per-instance best rule.
        #[arg(long, default_value = "opt")]
        fallback: String,
        /// Tie threshold on the best relative KPI (bvar_d only).
        #[arg(long = "tie-tau", default_value_t = 0.0)]
        tie_tau: f64,
        #[arg(long = "time-limit")]
        time_limit: Option<f64>,
        #[arg(long = "node-limit")]
        node_limit: Option<u64>,
        /// Stopping threshold applied to both the relative and absolute gap.
        #[arg(long = "gap-tol")]
        gap_tol: Option<f64>,
        /// Write the lb trace and node log to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run a set of approaches over a directory of instances.
    Bench {
        #[arg(long)]
        dir: PathBuf,
        /// Comma-separated approach tokens.
        #[arg(long)]
        approaches: String,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Node-limited, bit-reproducible mode: time columns carry node counts.
        #[arg(long)]
        deterministic: bool,
        #[arg(long = "time-limit")]
        time_limit: Option<f64>,
        #[arg(long = "node-limit")]
        node_limit: Option<u64>,
        #[arg(long = "gap-tol")]
        gap_tol: Option<f64>,
    },
    /// Generate random instances.
    Gen {
        #[arg(long)]
        vars: usize,
        #[arg(long)]
        degree: u32,
        #[arg(long)]
        density: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Emit performance-profile curves from a report.
    Profile {
        #[arg(long)]
        report: PathBuf,
        /// time, gap or pace.
        #[arg(long)]
        metric: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the metric table of a report.
    Aggregate {
        #[arg(long)]
        report: PathBuf,
    },
}

enum CliError {
    Input(String),
    Solver(String),
}

impl CliError {
    fn input(e: impl std::fmt::Display) -> CliError {
        CliError::Input(e.to_string())
    }
}

fn read_instance(path: &Path) -> Result<POProblem, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut problem = parse_problem(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    problem.name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "instance".into());
    Ok(problem)
}

fn engine_config(
    time_limit: Option<f64>,
    node_limit: Option<u64>,
    gap_tol: Option<f64>,
    deterministic: bool,
) -> EngineConfig {
    let mut cfg = EngineConfig { deterministic, node_limit, ..EngineConfig::default() };
    if let Some(t) = time_limit {
        cfg.time_limit = Some(t);
    }
    if deterministic {
        cfg.time_limit = None;
    }
    if let Some(g) = gap_tol {
        cfg.rel_gap_tol = g;
        cfg.abs_gap_tol = g;
    }
    cfg
}

fn cmd_solve(
    instance: &Path,
    rule: Option<String>,
    expert: Option<String>,
    fallback: &str,
    tie_tau: f64,
    cfg: &EngineConfig,
    trace: Option<PathBuf>,
) -> Result<(), CliError> {
    let problem = read_instance(instance)?;
    let result = match (rule, expert) {
        (Some(rule), None) => {
            let rule = RuleId::parse(&rule).map_err(CliError::input)?;
            solve_with_rule(&problem, cfg, rule)
        }
        (None, Some(expert)) => {
            let kind = match expert.as_str() {
                "orule_s" => ExpertKind::ORuleS,
                "brule_d" => ExpertKind::BRuleD,
                "bvar_d" => ExpertKind::BVarD,
                other => return Err(CliError::Input(format!("unknown expert `{other}`"))),
            };
            let fallback = match fallback {
                "opt" => FallbackSpec::Orule,
                rule => FallbackSpec::Rule(RuleId::parse(rule).map_err(CliError::input)?),
            };
            let expert_cfg =
                ExpertConfig { expert: kind, fallback, tie_tau, ..ExpertConfig::new(kind) };
            run_expert(&problem, cfg, &expert_cfg, None)
        }
        _ => return Err(CliError::Input("pass exactly one of --rule or --expert".into())),
    };

    let row = RunRow::from_result(&problem.name, result.policy_label, &result);
    println!("instance   {}", problem.name);
    println!("approach   {}", result.policy_label);
    println!("status     {}", result.status.as_str());
    println!("lb         {}", result.best_lb);
    println!("ub         {}", result.best_ub);
    match row.gap {
        Some(g) => println!("rel gap    {g}"),
        None => println!("rel gap    -"),
    }
    println!("nodes      {}", result.nodes_explored);
    println!("probe LPs  {}", result.probe_lp_solves);
    println!("time       {:.3}s", result.wall_time);
    if let Some(x) = &result.incumbent {
        println!("incumbent  {x:?}");
    }
    if let Some(path) = trace {
        fs::write(&path, write_trace(&result))
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        println!("trace      {}", path.display());
    }
    if result.status == SolveStatus::Failed {
        return Err(CliError::Solver(result.failure.unwrap_or_else(|| "solve failed".into())));
    }
    Ok(())
}

fn cmd_bench(
    dir: &Path,
    approaches: &str,
    out: &Path,
    jobs: usize,
    cfg: EngineConfig,
) -> Result<(), CliError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().map(|ext| ext == "pop").unwrap_or(false))
        .collect();
    paths.sort();
    let instances: Vec<(String, POProblem)> = paths
        .iter()
        .map(|p| read_instance(p).map(|problem| (problem.name.clone(), problem)))
        .collect::<Result<_, _>>()?;
    let approaches = parse_approaches(approaches).map_err(CliError::input)?;
    let opts = BenchOptions { engine: cfg, jobs };
    let outcome = run_bench(&instances, &approaches, &opts).map_err(CliError::input)?;
    let report = write_report(&outcome.rows).map_err(CliError::input)?;
    fs::write(out, report).map_err(|e| CliError::Input(format!("{}: {e}", out.display())))?;
    println!("wrote {} rows to {}", outcome.rows.len(), out.display());
    let failed: Vec<&str> = outcome
        .solves
        .iter()
        .filter(|(_, _, r)| r.status == SolveStatus::Failed)
        .map(|(name, _, _)| name.as_str())
        .collect();
    if !failed.is_empty() {
        return Err(CliError::Solver(format!("failed runs on: {}", failed.join(", "))));
    }
    Ok(())
}

fn cmd_gen(
    vars: usize,
    degree: u32,
    density: f64,
    seed: u64,
    count: u64,
    out: &Path,
) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::Input(format!("{}: {e}", out.display())))?;
    for k in 0..count {
        let params = GenParams { num_vars: vars, degree, density, seed: seed + k };
        let problem = gen_instance(&params).map_err(CliError::input)?;
        let path = out.join(format!("{}.pop", problem.name));
        fs::write(&path, write_problem(&problem))
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        println!("{}", path.display());
    }
    Ok(())
}

fn cmd_profile(report: &Path, metric: &str, out: &Path) -> Result<(), CliError> {
    let text = fs::read_to_string(report)
        .map_err(|e| CliError::Input(format!("{}: {e}", report.display())))?;
    let rows = read_report(&text).map_err(CliError::input)?;
    let metric = ProfileMetric::parse(metric)
        .ok_or_else(|| CliError::Input(format!("unknown metric `{metric}`")))?;
    let curves = profile_report(&rows, metric);
    fs::write(out, write_profile(&curves))
        .map_err(|e| CliError::Input(format!("{}: {e}", out.display())))?;
    println!("wrote {} curves to {}", curves.len(), out.display());
    Ok(())
}

fn cmd_aggregate(report: &Path) -> Result<(), CliError> {
    let text = fs::read_to_string(report)
        .map_err(|e| CliError::Input(format!("{}: {e}", report.display())))?;
    let rows = read_report(&text).map_err(CliError::input)?;
    let table = aggregate(&rows).map_err(CliError::input)?;
    println!("{table}");
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve {
            instance,
            rule,
            expert,
            fallback,
            tie_tau,
            time_limit,
            node_limit,
            gap_tol,
            trace,
        } => {
            let cfg = engine_config(time_limit, node_limit, gap_tol, false);
            cmd_solve(&instance, rule, expert, &fallback, tie_tau, &cfg, trace)
        }
        Command::Bench {
            dir,
            approaches,
            out,
            jobs,
            deterministic,
            time_limit,
            node_limit,
            gap_tol,
        } => {
            let cfg = engine_config(time_limit, node_limit, gap_tol, deterministic);
            cmd_bench(&dir, &approaches, &out, jobs, cfg)
        }
        Command::Gen { vars, degree, density, seed, count, out } => {
            cmd_gen(vars, degree, density, seed, count, &out)
        }
        Command::Profile { report, metric, out } => cmd_profile(&report, &metric, &out),
        Command::Aggregate { report } => cmd_aggregate(&report),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(CliError::Solver(message)) => {
            eprintln!("solver failure: {message}");
            ExitCode::from(3)
        }
    }
}
