use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rrt_core::config::SimulationConfig;
use rrt_core::distributions::UniformInterval;
use rrt_core::harness::{run_experiment, variance_check, RunOptions, SimulationOutput};
use rrt_core::population::{
    gamma_bounded, gamma_mean_concentration, gamma_proximity, optimal_alpha, summarize,
    truncation_bias, Population,
};
use rrt_core::report;
use rrt_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "rrt",
    version,
    about = "Randomized response estimation and simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Use 1000 populations x 1000 samples.
    #[arg(long)]
    full: bool,
    /// Override the worker count from the config.
    #[arg(long)]
    workers: Option<usize>,
    /// Override the summary path; without one the summary goes to stdout.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Monte Carlo study described by a config file.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        /// Keep every estimate and write the raw and quantile files.
        #[arg(long)]
        emit_raw: bool,
        #[arg(long)]
        raw: Option<PathBuf>,
    },
    /// Run one of the wage tables, filling unset tuning parameters.
    Table {
        #[arg(long, value_parser = clap::value_parser!(u32).range(2..=4))]
        paper_table: u32,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Summary statistics and concentration measures of a value file.
    PopulationStats {
        #[arg(long)]
        file: PathBuf,
        #[arg(long)]
        m: f64,
        #[arg(long = "M")]
        upper: f64,
    },
    /// Theoretical vs empirical variance of each estimator.
    VarianceCheck {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_parser = clap::value_parser!(u32).range(2..=4))]
        paper_table: Option<u32>,
    },
}

fn load(run: &RunArgs, table: Option<u32>) -> Result<SimulationConfig> {
    let mut cfg = SimulationConfig::load(&run.config)?;
    if let Some(t) = table {
        cfg.apply_table_preset(t)?;
    }
    if run.full {
        cfg.use_full_scale();
    }
    if run.workers.is_some() {
        cfg.workers = run.workers;
    }
    if run.summary.is_some() {
        cfg.output.summary = run.summary.clone();
    }
    Ok(cfg)
}

fn write_summary(output: &SimulationOutput, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => report::emit_summary(&output.summary, p),
        None => report::write_summary(&output.summary, std::io::stdout().lock()),
    }
}

fn simulate(run: &RunArgs, table: Option<u32>, emit_raw: bool, raw: Option<PathBuf>) -> Result<()> {
    let mut cfg = load(run, table)?;
    if raw.is_some() {
        cfg.output.raw = raw;
    }
    let spec = cfg.resolve()?;
    let retain_raw = emit_raw || spec.output.raw.is_some() || spec.output.quantiles.is_some();
    if emit_raw && spec.output.raw.is_none() && spec.output.quantiles.is_none() {
        return Err(Error::Config(
            "--emit-raw needs output.raw, output.quantiles or --raw".into(),
        ));
    }
    let output = run_experiment(&spec, RunOptions { retain_raw })?;
    write_summary(&output, spec.output.summary.as_deref())?;
    if let Some(p) = &spec.output.raw {
        report::emit_estimates(&output.raw, p)?;
    }
    if let Some(p) = &spec.output.quantiles {
        report::emit_quantiles(&output.raw, p)?;
    }
    Ok(())
}

fn check_variance(run: &RunArgs, table: Option<u32>) -> Result<()> {
    let spec = load(run, table)?.resolve()?;
    let output = run_experiment(&spec, RunOptions::default())?;
    let rows = variance_check(&spec, &output)?;
    report::write_variance_check(&rows, std::io::stdout().lock())
}

fn read_values(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let token = line.split([',', ';', '\t', ' ']).find(|t| !t.is_empty());
        let Some(token) = token else { continue };
        match token.trim().parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) if values.is_empty() && i == 0 => {}
            Err(_) => {
                return Err(Error::Config(format!(
                    "{}: line {} is not a number: {line:?}",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Ok(values)
}

fn population_stats(file: &Path, m: f64, upper: f64) -> Result<()> {
    let pop = Population::new(read_values(file)?)?;
    let iv = UniformInterval::rrt(m, upper)?;
    let s = summarize(&pop);
    let gamma = gamma_mean_concentration(&pop, upper)?;
    let gamma_b = gamma_bounded(&pop, &iv)?;
    let alpha_full = match optimal_alpha(gamma) {
        Ok(a) => format!("{a:.6}"),
        Err(_) => "n/a (values outside [0, M])".to_string(),
    };
    let mut out = std::io::stdout().lock();
    writeln!(out, "N: {}", s.size)?;
    writeln!(out, "total: {:.6}", s.total)?;
    writeln!(out, "mean: {:.6}", s.mean)?;
    writeln!(out, "variance (N-1): {:.6}", s.variance)?;
    writeln!(out, "sd: {:.6}", s.variance.sqrt())?;
    writeln!(out, "gamma_mean (0,M): {gamma:.6}")?;
    writeln!(
        out,
        "gamma_proximity (0,M): {:.6}",
        gamma_proximity(&pop, upper)?
    )?;
    writeln!(out, "gamma_bounded (m,M): {gamma_b:.6}")?;
    writeln!(out, "alpha_opt (0,M): {alpha_full}")?;
    writeln!(out, "alpha_opt (m,M): {:.6}", optimal_alpha(gamma_b)?)?;
    writeln!(
        out,
        "truncation_bias: {:.6}",
        truncation_bias(&pop, m, upper)?
    )?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { run, emit_raw, raw } => simulate(&run, None, emit_raw, raw),
        Command::Table { paper_table, run } => simulate(&run, Some(paper_table), false, None),
        Command::PopulationStats { file, m, upper } => population_stats(&file, m, upper),
        Command::VarianceCheck { run, paper_table } => check_variance(&run, paper_table),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            ExitCode::from(1)
        }
    }
}
