//! The `survey` and `montecarlo` subcommands.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use aerosurvey::harness::{
    combined_service_probability, monte_carlo_planners, run_survey_with, SharedModel,
};
use aerosurvey::{MapKind, PlannerKind, SurveyConfig};
use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::config::{load_config, validate, ConfigError};
use crate::output::{
    aggregate_csv, metrics_csv, trajectory_csv, write_atomic, write_grid, GridFormat,
};

pub const THREADS_ENV: &str = "AEROSURVEY_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "aerosurvey",
    version,
    about = "Aerial spectrum survey simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fly one survey and write metrics, trajectory and map snapshots.
    Survey(SurveyArgs),
    /// Average the metrics of many independent surveys per planner.
    Montecarlo(MonteCarloArgs),
}

#[derive(Debug, Args)]
pub struct SurveyArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub planner: Option<PlannerKind>,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    /// Measurement counts at which to dump map grids; 0 is the prior.
    #[arg(long, value_delimiter = ',')]
    pub snapshots: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct MonteCarloArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value_t = 50)]
    pub runs: usize,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "min_cost,grid,spiral,random"
    )]
    pub planners: Vec<PlannerKind>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

/// Thread cap from the environment; unset or 0 means rayon's default.
pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(n) => Ok(Some(n)),
            Err(_) => Err(CliError::Config(format!(
                "{THREADS_ENV} must be a non-negative integer, got `{s}`"
            ))),
        },
    }
}

fn prepare(
    config: &Path,
    seed: Option<u64>,
    planner: Option<PlannerKind>,
) -> Result<SurveyConfig, CliError> {
    let mut cfg = load_config(config)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(planner) = planner {
        cfg.planner = planner;
    }
    validate(&cfg)?;
    Ok(cfg)
}

/// Grids captured at one snapshot.
struct Snapshot {
    mean: Vec<Vec<f64>>,
    service_prob: Vec<f64>,
    unc_power: Option<Vec<f64>>,
    unc_service: Vec<f64>,
}

fn write_pair(
    values: &[f64],
    cfg: &SurveyConfig,
    dir: &Path,
    stem: &str,
    units: &str,
) -> Result<(), CliError> {
    for format in [GridFormat::Csv, GridFormat::Pgm] {
        let path = dir.join(format!("{stem}.{}", format.extension()));
        write_grid(values, &cfg.grid, &path, format, units).map_err(runtime)?;
    }
    Ok(())
}

pub fn cmd_survey(args: &SurveyArgs) -> Result<(), CliError> {
    let cfg = prepare(&args.config, args.seed, args.planner)?;
    let shared = SharedModel::new(&cfg).map_err(runtime)?;
    let mut wanted: Vec<usize> = args.snapshots.clone();
    wanted.sort_unstable();
    wanted.dedup();

    let mut snapshots = BTreeMap::new();
    let mut failure = None;
    let mut truth = Vec::new();
    let record = run_survey_with(&cfg, &shared, 0, |view| {
        if view.count == 0 {
            truth = (0..view.scenario.truth.num_transmitters())
                .map(|k| {
                    view.scenario
                        .truth
                        .grid_power(k)
                        .iter()
                        .copied()
                        .collect::<Vec<f64>>()
                })
                .collect();
        }
        if wanted.binary_search(&view.count).is_err() || failure.is_some() {
            return;
        }
        let probs = view.service_probabilities();
        let unc_power = if cfg.channel.prior_var() > 0.0 {
            match view.uncertainty(MapKind::Power) {
                Ok(f) => Some(f.values),
                Err(e) => {
                    failure = Some(e);
                    return;
                }
            }
        } else {
            None
        };
        let unc_service = match view.uncertainty(MapKind::Service) {
            Ok(f) => f.values,
            Err(e) => {
                failure = Some(e);
                return;
            }
        };
        snapshots.insert(
            view.count,
            Snapshot {
                mean: view
                    .states
                    .iter()
                    .map(|s| s.mean.iter().copied().collect())
                    .collect(),
                service_prob: combined_service_probability(&probs),
                unc_power,
                unc_service,
            },
        );
    })
    .map_err(runtime)?;
    if let Some(e) = failure {
        return Err(runtime(e));
    }

    // Outputs are only touched once the run has succeeded.
    let dir = &args.out_dir;
    std::fs::create_dir_all(dir).map_err(runtime)?;
    write_atomic(
        &dir.join("metrics.csv"),
        metrics_csv(&record.metrics).as_bytes(),
    )
    .map_err(runtime)?;
    write_atomic(
        &dir.join("trajectory.csv"),
        trajectory_csv(&record.measurements).as_bytes(),
    )
    .map_err(runtime)?;
    for (k, values) in truth.iter().enumerate() {
        write_pair(values, &cfg, dir, &format!("true_power_tx{k}"), "dBm")?;
    }
    for (count, snap) in &snapshots {
        let stem = format!("snapshot_{count:04}");
        for (k, mean) in snap.mean.iter().enumerate() {
            write_pair(mean, &cfg, dir, &format!("{stem}_mean_tx{k}"), "dBm")?;
        }
        write_pair(
            &snap.service_prob,
            &cfg,
            dir,
            &format!("{stem}_service_prob"),
            "probability",
        )?;
        write_pair(
            &snap.unc_service,
            &cfg,
            dir,
            &format!("{stem}_unc_service"),
            "bits",
        )?;
        if let Some(u) = &snap.unc_power {
            write_pair(
                u,
                &cfg,
                dir,
                &format!("{stem}_unc_power"),
                "normalized variance (dB^2 / dB^2)",
            )?;
        }
    }
    for t in wanted.iter().filter(|t| !snapshots.contains_key(t)) {
        eprintln!(
            "warning: snapshot {t} skipped, the survey stopped after {} measurements",
            record.measurements.len()
        );
    }
    Ok(())
}

pub fn cmd_montecarlo(args: &MonteCarloArgs) -> Result<(), CliError> {
    let cfg = prepare(&args.config, args.seed, None)?;
    if args.runs == 0 {
        return Err(CliError::Config("`runs` must be >= 1".into()));
    }
    if args.planners.is_empty() {
        return Err(CliError::Config(
            "`planners` must name at least one planner".into(),
        ));
    }
    for &planner in &args.planners {
        validate(&SurveyConfig {
            planner,
            ..cfg.clone()
        })?;
    }
    let threads = threads_from_env()?;
    let summaries =
        monte_carlo_planners(&cfg, &args.planners, args.runs, threads).map_err(runtime)?;
    std::fs::create_dir_all(&args.out_dir).map_err(runtime)?;
    for s in &summaries {
        let path = args.out_dir.join(format!("montecarlo_{}.csv", s.planner));
        write_atomic(&path, aggregate_csv(&s.rows).as_bytes()).map_err(runtime)?;
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Survey(a) => cmd_survey(a),
        Command::Montecarlo(a) => cmd_montecarlo(a),
    }
}
