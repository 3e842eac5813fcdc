//! Command-line interface: `learn`, `experiment`, `calibrate` and `validate`.
//!
//! Exit codes: 0 on success, 1 when a run fails, 2 for invalid
//! configuration, input files or flags.

mod config;

pub use config::{apply_overrides, RunConfig, Sweep};

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::env::{load_env, Environment};
use crate::error::{Error, Result};
use crate::estimation::ProbVector;
use crate::experiment::{delta_calibration, run_replications, symbolic_divergence_report};
use crate::output::sig9;
use crate::rules::load_rules;
use crate::{learner, par, rng};

#[derive(Debug, Parser)]
#[command(name = "menid", version, about = "Learn action outcome distributions from a fast test environment and a slow target environment")]
pub struct Cli {
    /// Worker threads for replications and Monte Carlo work.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,

    /// More log output (repeat for more).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Run configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,

    /// Override a configuration key, e.g. `--set T=0` or `--set sweep.T=[0,20]`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,

    /// Output directory; overrides `output_dir` from the configuration.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the learning loop once and write its experience log.
    Learn(ConfigArgs),
    /// Run the replication sweep and write reward curves.
    Experiment(ConfigArgs),
    /// Tabulate the error bound against the actual estimation error.
    Calibrate(CalibrateArgs),
    /// Check rule and environment files.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// True outcome distribution, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub dist: Vec<f64>,

    /// Largest sample size.
    #[arg(long, default_value_t = 400)]
    pub max_n: usize,

    /// Confidence parameters, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.1])]
    pub eps: Vec<f64>,

    /// Dirichlet draws per bound.
    #[arg(short = 'S', long, default_value_t = 100_000)]
    pub samples: usize,

    /// Independent observation streams to average over.
    #[arg(short = 'R', long, default_value_t = 1)]
    pub streams: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Run configuration naming the files to check.
    #[arg(long, conflicts_with_all = ["rules", "env"])]
    pub config: Option<PathBuf>,

    /// Rule file.
    #[arg(long, requires = "env")]
    pub rules: Option<PathBuf>,

    /// Environment file; repeat for several.
    #[arg(long)]
    pub env: Vec<PathBuf>,
}

/// Parse `std::env::args`, run, and return the process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .try_init();
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() { 2 } else { 1 }
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Learn(a) => cmd_learn(a, cli.jobs),
        Command::Experiment(a) => cmd_experiment(a, cli.jobs),
        Command::Calibrate(a) => cmd_calibrate(a, cli.jobs),
        Command::Validate(a) => cmd_validate(a),
    }
}

fn load(args: &ConfigArgs) -> Result<(RunConfig, PathBuf)> {
    let cfg = RunConfig::load(&args.config, &args.overrides)?;
    let out = args.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    Ok((cfg, out))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn cmd_learn(args: &ConfigArgs, jobs: usize) -> Result<()> {
    let (cfg, out) = load(args)?;
    let scenario = cfg.scenario()?;
    let lcfg = cfg.learner();
    lcfg.validate()?;
    let reward = scenario.reward(cfg.success_reward, cfg.penalty)?;
    let (mut target, mut test) = scenario.environments(lcfg.seed)?;
    let log = par::with_jobs(jobs, || {
        learner::run(&lcfg, &mut target, &mut test, &scenario.rules, &reward, &scenario.actions)
    })?;
    create_dir(&out)?;
    let path = out.join(format!("experiences_{}.csv", cfg.settings().label()));
    log.write_csv_path(&path)?;
    println!(
        "final score {} after {} target and {} test executions",
        sig9(log.score()),
        log.count(crate::env::EnvKind::Target),
        log.count(crate::env::EnvKind::Test)
    );
    println!("wrote {}", path.display());
    Ok(())
}

pub fn cmd_experiment(args: &ConfigArgs, jobs: usize) -> Result<()> {
    let (cfg, out) = load(args)?;
    let scenario = cfg.scenario()?;
    let plan = cfg.plan();
    plan.validate()?;
    let results = par::with_jobs(jobs, || run_replications(&plan, &scenario))?;
    create_dir(&out)?;
    let mut failed = 0;
    for r in &results {
        let label = r.settings.label();
        r.curve.write_csv_path(out.join(format!("reward_curve_{label}.csv")))?;
        for (rep, log) in r.logs() {
            log.write_csv_path(out.join(format!("experiences_{label}_{rep}.csv")))?;
        }
        failed += r.failures();
        println!(
            "{label}: mean final score {} (std {}) over {} replications",
            sig9(r.curve.final_mean()),
            sig9(r.curve.points.last().map_or(0.0, |p| p.std)),
            r.runs.len() - r.failures()
        );
    }
    let dseed = rng::derive_seed(plan.seed_base, "divergence", 0);
    let (mut a, mut b) = scenario.environments(dseed)?;
    let actions = scenario
        .actions
        .candidates(scenario.rules.rules(), a.current_state())?;
    let table = symbolic_divergence_report(&mut a, &mut b, &actions, cfg.divergence_repeats)?;
    table.write_csv_path(out.join("divergence.csv"))?;
    println!("wrote {} reward curves to {}", results.len(), out.display());
    if failed > 0 {
        return Err(Error::Runtime(format!("{failed} replications failed")));
    }
    Ok(())
}

pub fn cmd_calibrate(args: &CalibrateArgs, jobs: usize) -> Result<()> {
    let dist = ProbVector::new(args.dist.clone())?;
    if dist.len() < 2 {
        return Err(Error::InvalidParameter("--dist needs at least two outcomes".into()));
    }
    let table = par::with_jobs(jobs, || {
        delta_calibration(&dist, args.max_n, &args.eps, args.samples, args.streams, args.seed)
    })?;
    create_dir(&args.out)?;
    let path = args.out.join("calibration.csv");
    table.write_csv_path(&path)?;
    println!("wrote {} rows to {}", table.rows.len(), path.display());
    Ok(())
}

pub fn cmd_validate(args: &ValidateArgs) -> Result<()> {
    let (rules_path, env_paths) = match (&args.config, &args.rules) {
        (Some(c), _) => {
            let cfg = RunConfig::load(c, &[])?;
            cfg.learner().validate()?;
            cfg.plan().validate()?;
            cfg.scenario()?;
            (cfg.rules, cfg.environments)
        }
        (None, Some(r)) => (r.clone(), args.env.clone()),
        (None, None) => {
            return Err(Error::Config("give --config, or --rules with --env".into()));
        }
    };
    let rules = load_rules(&rules_path)?;
    println!("{}: {} rules", rules_path.display(), rules.rules().len());
    for p in &env_paths {
        let e = load_env(p)?;
        e.validate(&rules)?;
        println!("{}: {} environment {:?} ok", p.display(), e.kind, e.env_id);
    }
    Ok(())
}
