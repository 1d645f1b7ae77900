use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use dynsense::config::{ExperimentConfig, HopSetting, Method, ScenarioKind, ScheduleSetting};
use dynsense::harness::{gap_check, run_experiment, sweep_k, GapSetup, RunOptions};
use dynsense::io::write_csv_rows;
use dynsense_core::placement::HopLimit;
use log::{error, info};

#[derive(Parser)]
#[command(name = "dynsense", version, about = "Dynamic sensor placement experiments on graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bandlimited synthetic signals on a random sensor graph.
    SynthBl(RunArgs),
    /// Piecewise-constant synthetic signals on a random sensor graph.
    SynthPc(RunArgs),
    /// Gridded data (a CSV file, or the built-in stand-in).
    Real(RunArgs),
    /// Average MSE of the dynamic method for several sensor counts.
    SweepK {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',', default_value = "5,10,20")]
        k: Vec<usize>,
        #[arg(long, value_parser = parse_scenario, default_value = "real")]
        scenario: ScenarioKind,
    },
    /// Distributed versus centralized selection on random instances.
    GapCheck {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        instances: usize,
        #[arg(long, default_value_t = 30)]
        nodes: usize,
        #[arg(long, default_value_t = 4)]
        sensors: usize,
        /// Rows of the random selection matrix.
        #[arg(long, default_value_t = 8)]
        rank: usize,
        /// Hop count or `inf`.
        #[arg(long, value_parser = parse_hops, default_value = "inf")]
        hop_limit: HopLimit,
        #[arg(long, default_value = "out/gap-check")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML file overriding the scenario preset.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicates: Option<usize>,
    /// Output directory (default `out/<scenario>`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Execution of the per-sensor relocation loop.
    #[arg(long, value_parser = parse_schedule)]
    schedule: Option<ScheduleSetting>,
}

fn parse_scenario(s: &str) -> Result<ScenarioKind, String> {
    match s {
        "synthetic-bl" | "synth-bl" => Ok(ScenarioKind::SyntheticBl),
        "synthetic-pc" | "synth-pc" => Ok(ScenarioKind::SyntheticPc),
        "real" => Ok(ScenarioKind::Real),
        _ => Err(format!("unknown scenario {s:?}")),
    }
}

fn parse_schedule(s: &str) -> Result<ScheduleSetting, String> {
    match s {
        "sequential" => Ok(ScheduleSetting::Sequential),
        "parallel" => Ok(ScheduleSetting::Parallel),
        _ => Err(format!("unknown schedule {s:?}")),
    }
}

fn parse_hops(s: &str) -> Result<HopLimit, String> {
    if s == "inf" {
        return Ok(HopLimit::Unbounded);
    }
    s.parse().map(HopLimit::Hops).map_err(|_| format!("expected a hop count or `inf`, got {s:?}"))
}

fn resolve(scenario: ScenarioKind, args: &RunArgs) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(scenario, args.config.as_deref())?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(r) = args.replicates {
        cfg.replicates = r;
    }
    if let Some(s) = args.schedule {
        cfg.placement.schedule = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(args: &RunArgs, scenario: ScenarioKind) -> PathBuf {
    args.out.clone().unwrap_or_else(|| Path::new("out").join(scenario.to_string()))
}

fn run(scenario: ScenarioKind, args: &RunArgs) -> anyhow::Result<bool> {
    let cfg = resolve(scenario, args)?;
    let exp = run_experiment(&cfg, RunOptions { schedule: cfg.schedule(), oracle_dictionary: false })?;
    let dir = out_dir(args, scenario);
    exp.write_outputs(&dir).with_context(|| format!("writing results to {}", dir.display()))?;
    for &m in &cfg.methods {
        let recs: Vec<f64> = exp.records_for(m).map(|r| r.mean_mse()).collect();
        println!("{m:>13}  mean MSE {:.6e}", recs.iter().sum::<f64>() / recs.len() as f64);
    }
    if cfg.methods.contains(&Method::Dynamic) {
        for other in [Method::Static1, Method::Static2] {
            if cfg.methods.contains(&other) {
                let c = exp.compare(Method::Dynamic, other);
                println!(
                    "dynamic < {other}: {}/{} replicates, one-sided sign test p = {:.3e}",
                    c.wins,
                    c.wins + c.losses,
                    c.p_value
                );
            }
        }
    }
    println!("results in {}", dir.display());
    Ok(true)
}

fn execute(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::SynthBl(a) => run(ScenarioKind::SyntheticBl, &a),
        Command::SynthPc(a) => run(ScenarioKind::SyntheticPc, &a),
        Command::Real(a) => run(ScenarioKind::Real, &a),
        Command::SweepK { run, k, scenario } => {
            let cfg = resolve(scenario, &run)?;
            let rows = sweep_k(&cfg, &k, RunOptions { schedule: cfg.schedule(), oracle_dictionary: false })?;
            let dir = run.out.clone().unwrap_or_else(|| PathBuf::from("out/sweep-k"));
            std::fs::create_dir_all(&dir)?;
            write_csv_rows(&rows, std::fs::File::create(dir.join("sweep_k.csv"))?)?;
            std::fs::write(dir.join("config.echo"), cfg.to_toml())?;
            for r in &rows {
                println!("K = {:>3}  mean MSE {:.6e}", r.k, r.mean_mse);
            }
            Ok(true)
        }
        Command::GapCheck { seed, instances, nodes, sensors, rank, hop_limit, out } => {
            let setup = GapSetup { instances, nodes, sensors, rank, hop_limit, seed };
            let results = gap_check(&setup)?;
            let rows: Vec<_> = results.iter().map(|(row, _)| row.clone()).collect();
            std::fs::create_dir_all(&out)?;
            write_csv_rows(&rows, std::fs::File::create(out.join("gap.csv"))?)?;
            let failed: Vec<usize> = rows.iter().filter(|r| !r.holds).map(|r| r.instance).collect();
            info!("hop limit {:?}", HopSetting(hop_limit));
            println!("{}/{} instances within bounds", rows.len() - failed.len(), rows.len());
            if !failed.is_empty() {
                error!("bound violated on instances {failed:?}");
            }
            Ok(failed.is_empty())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            let invariant = e.downcast_ref::<dynsense::Error>().is_some_and(dynsense::Error::is_invariant_violation);
            error!("{e:#}");
            if invariant {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
