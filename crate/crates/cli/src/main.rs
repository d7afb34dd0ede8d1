use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use deep_mpc::harness::{
    compare_controllers, export_csv, export_plot_data, load_log_json, run_diagnostics, save_log_json, DiagnosticOptions, Scenario, ScenarioConfig,
    Variant,
};
use deep_mpc::Error;

const EXIT_INFEASIBLE: u8 = 2;
const EXIT_CHECKS_FAILED: u8 = 3;

#[derive(Parser)]
#[command(name = "deep-mpc", version, about = "Tube MPC with an online-adapted deep feature network")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario file; the built-in wing-rock benchmark when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, value_parser = parse_variant)]
    variant: Option<Variant>,
    /// Train the hidden stack inline instead of on a worker thread.
    #[arg(long)]
    sync_training: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one controller and write the log, CSV and plot data.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Run the diagnostics after the simulation.
        #[arg(long)]
        check: bool,
        /// Exit with status 3 when a diagnostic fails.
        #[arg(long)]
        strict: bool,
    },
    /// Run tube, shallow and deep controllers over several seeds.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Number of seeds, starting at `--seed` (default 0).
        #[arg(long, default_value_t = 10)]
        seeds: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Diagnostics on a saved log.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        strict: bool,
    },
    /// Print the governor reference as CSV.
    Governor {
        #[command(flatten)]
        common: Common,
    },
    /// Oracle scenario with exactly representable uncertainty and every check.
    Selftest {
        #[arg(long, default_value_t = 2000)]
        steps: usize,
    },
}

fn parse_variant(s: &str) -> std::result::Result<Variant, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn load_config(common: &Common) -> Result<ScenarioConfig> {
    let mut cfg = match &common.config {
        Some(path) => ScenarioConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
        None => ScenarioConfig::wing_rock(),
    };
    if let Some(seed) = common.seed {
        cfg.simulation.seed = seed;
    }
    if let Some(steps) = common.steps {
        cfg.simulation.steps = steps;
    }
    if let Some(v) = common.variant {
        cfg.simulation.variant = v;
    }
    if common.sync_training {
        cfg.trainer.asynchronous = false;
    }
    Ok(cfg)
}

fn print_checks(scenario: &Scenario, log: &deep_mpc::harness::SimulationLog, out: Option<&Path>) -> Result<bool> {
    let report = run_diagnostics(scenario, log, &DiagnosticOptions::default())?;
    print!("{}", report.to_text());
    if let Some(dir) = out {
        std::fs::write(dir.join("checks.csv"), report.to_csv()).with_context(|| format!("writing {}", dir.display()))?;
    }
    Ok(report.all_pass())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run { common, out, check, strict } => {
            let cfg = load_config(&common)?;
            let scenario = Scenario::prepare(&cfg)?;
            let log = scenario.run()?;
            export_csv(&log, &out.join("trajectory.csv"))?;
            save_log_json(&log, &out.join("log.json"))?;
            export_plot_data(&[&log], &scenario.schedule, &out.join("plot.dat"))?;
            std::fs::write(out.join("config.toml"), cfg.to_toml()).with_context(|| format!("writing {}", out.display()))?;
            let s = &log.summary;
            println!(
                "{} seed {}: {} steps, cost {:.6e}, final |x| {:.3e}, state violations {}, input violations {}, swaps {}",
                log.variant,
                log.seed,
                s.steps,
                s.cumulative_cost,
                s.final_norm,
                s.state_violations,
                s.input_violations,
                log.trainings.len()
            );
            if check || strict {
                let pass = print_checks(&scenario, &log, Some(&out))?;
                if strict && !pass {
                    return Ok(ExitCode::from(EXIT_CHECKS_FAILED));
                }
            }
        }
        Command::Compare { common, seeds, out } => {
            let cfg = load_config(&common)?;
            let first = cfg.simulation.seed;
            let seed_list: Vec<u64> = (first..first + seeds).collect();
            let cmp = compare_controllers(&cfg, &seed_list, &Variant::ALL)?;
            print!("{}", cmp.to_text());
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
                std::fs::write(dir.join("compare.txt"), cmp.to_text()).with_context(|| format!("writing {}", dir.display()))?;
                let logs: Vec<_> = Variant::ALL.iter().filter_map(|v| cmp.log(first, *v)).collect();
                let schedule = cfg.uncertainty.spec().schedule;
                export_plot_data(&logs, &schedule, &dir.join("plot.dat"))?;
            }
        }
        Command::Check { common, log, strict } => {
            let saved = load_log_json(&log)?;
            let mut cfg = load_config(&common)?;
            cfg.simulation.variant = saved.variant;
            let scenario = Scenario::prepare_with(&cfg, saved.variant, saved.seed)?;
            let pass = print_checks(&scenario, &saved, None)?;
            if strict && !pass {
                return Ok(ExitCode::from(EXIT_CHECKS_FAILED));
            }
        }
        Command::Governor { common } => {
            let cfg = load_config(&common)?;
            let scenario = Scenario::prepare(&cfg)?;
            print!("{}", scenario.reference.to_csv(scenario.model.input_dim()));
        }
        Command::Selftest { steps } => {
            let mut cfg = ScenarioConfig::oracle();
            cfg.simulation.steps = steps;
            let scenario = Scenario::prepare(&cfg)?;
            let log = scenario.run()?;
            if !print_checks(&scenario, &log, None)? {
                return Ok(ExitCode::from(EXIT_CHECKS_FAILED));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            let infeasible = err.chain().any(|e| {
                matches!(
                    e.downcast_ref::<Error>(),
                    Some(Error::Infeasible(_) | Error::EmptyTightenedSet { .. } | Error::Config(_) | Error::Unstabilizable(_))
                )
            });
            ExitCode::from(if infeasible { EXIT_INFEASIBLE } else { 1 })
        }
    }
}
