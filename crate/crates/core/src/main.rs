use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use jamroute::experiments::{self, ExperimentConfig};
use jamroute::netgen::{generate_instance, load_instance, save_instance};
use jamroute::routing::{route, RouteOptions};
use jamroute::{Algorithm, ChannelParams, GenSpec, Result};

#[derive(Parser)]
#[command(name = "jamroute", version, about = "Minimum-energy routing under jamming")]
struct Cli {
    /// Worker threads for sweeps (defaults to all cores).
    #[arg(long, global = true, env = "JAMROUTE_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Mer,
    Mereq,
    Merap,
    Optimal,
}

impl From<Algo> for Algorithm {
    fn from(a: Algo) -> Self {
        match a {
            Algo::Mer => Algorithm::Mer,
            Algo::Mereq => Algorithm::MerEq,
            Algo::Merap => Algorithm::MerAp,
            Algo::Optimal => Algorithm::Optimal,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance and write it as JSON.
    Gen {
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        nj: usize,
        #[arg(long, default_value_t = 10.0)]
        side: f64,
        #[arg(long, default_value_t = 1.0)]
        pj: f64,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        n0: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path; stdout when omitted.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Route one instance with one algorithm and print the plan as JSON.
    Route {
        instance: PathBuf,
        #[arg(long, value_enum)]
        algo: Algo,
        #[arg(long, default_value_t = 0.1)]
        pi: f64,
        /// Skip the success-ratio tightening of MER-AP.
        #[arg(long)]
        no_tighten: bool,
    },
    /// Run every algorithm on one instance and print a comparison table.
    Compare {
        instance: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        pi: f64,
        /// Include OPTIMAL even on large instances.
        #[arg(long)]
        optimal: bool,
    },
    /// Energy-saved sweep over one parameter axis.
    Sweep {
        #[command(flatten)]
        source: ConfigSource,
        #[command(flatten)]
        output: Output,
    },
    /// Multi-flow throughput and energy-per-bit study.
    Throughput {
        #[command(flatten)]
        source: ConfigSource,
        #[command(flatten)]
        output: Output,
    },
    /// Histogram of total power over random instances.
    Hist {
        #[command(flatten)]
        source: ConfigSource,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(clap::Args)]
struct ConfigSource {
    /// Experiment config (JSON).
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Built-in config: hist-a3-nj50, hist-a4-nj30, gap, throughput, energy-per-bit.
    #[arg(long)]
    preset: Option<String>,
    /// Override the base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the realization count.
    #[arg(long)]
    realizations: Option<usize>,
}

impl ConfigSource {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => ExperimentConfig::load(path)?,
            (None, Some(name)) => ExperimentConfig::preset(name)?,
            (None, None) => unreachable!("clap requires one of --config/--preset"),
        };
        if let Some(seed) = self.seed {
            cfg.base_seed = seed;
        }
        if let Some(r) = self.realizations {
            cfg.realizations = r;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(clap::Args)]
struct Output {
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

impl Output {
    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => write_file(path, text),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

fn report_failures(failures: &[String]) {
    for f in failures.iter().take(20) {
        eprintln!("warning: {f}");
    }
    if failures.len() > 20 {
        eprintln!("warning: {} more failures", failures.len() - 20);
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        // Only fails if a global pool already exists, which cannot happen here.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match cli.command {
        Command::Gen {
            n,
            nj,
            side,
            pj,
            alpha,
            n0,
            gamma,
            q,
            seed,
            out,
        } => {
            let spec = GenSpec {
                n,
                nj,
                side,
                pj,
                params: ChannelParams::new(alpha, n0, gamma, q)?,
                seed,
            };
            let inst = generate_instance(&spec)?;
            match out {
                Some(path) => save_instance(&inst, path)?,
                None => println!("{}", jamroute::netgen::instance_to_json(&inst)),
            }
        }
        Command::Route {
            instance,
            algo,
            pi,
            no_tighten,
        } => {
            let inst = load_instance(instance)?;
            let opts = RouteOptions {
                tighten: !no_tighten,
                ..RouteOptions::default()
            };
            let plan = route(&inst, algo.into(), pi, &opts)?;
            println!("{}", plan.to_json());
        }
        Command::Compare {
            instance,
            pi,
            optimal,
        } => {
            let inst = load_instance(instance)?;
            let opts = RouteOptions::default();
            println!("{:<8} {:>5} {:>14} {:>12}  route", "algo", "hops", "total_power", "e2e_outage");
            for alg in Algorithm::ALL {
                if alg == Algorithm::Optimal && inst.len() > experiments::OPTIMAL_MAX_NODES && !optimal {
                    continue;
                }
                match route(&inst, alg, pi, &opts) {
                    Ok(plan) => {
                        let path: Vec<String> = plan.nodes.iter().map(|v| v.to_string()).collect();
                        println!(
                            "{:<8} {:>5} {:>14.6e} {:>12.9}  {}",
                            alg.name(),
                            plan.hops(),
                            plan.total_power,
                            plan.e2e_outage,
                            path.join("-")
                        );
                    }
                    Err(e) => println!("{:<8} error: {e}", alg.name()),
                }
            }
        }
        Command::Sweep { source, output } => {
            let table = experiments::run_sweep(&source.load()?)?;
            report_failures(&table.failures);
            output.emit(&match output.format {
                Format::Csv => experiments::to_csv(&table.rows)?,
                Format::Json => to_json(&table),
            })?;
        }
        Command::Throughput { source, output } => {
            let table = experiments::run_throughput_study(&source.load()?)?;
            report_failures(&table.failures);
            output.emit(&match output.format {
                Format::Csv => experiments::to_csv(&table.rows)?,
                Format::Json => to_json(&table),
            })?;
        }
        Command::Hist { source, output } => {
            let table = experiments::run_histogram(&source.load()?)?;
            for s in &table.summaries {
                eprintln!(
                    "{}: mean {:.4e} std {:.4e} cv {:.3} ({} samples, {} out of range, {} failures)",
                    s.algorithm,
                    s.mean,
                    s.std,
                    s.coefficient_of_variation,
                    s.samples,
                    s.below_range + s.above_range,
                    s.failures
                );
            }
            output.emit(&match output.format {
                Format::Csv => experiments::to_csv(&table.rows)?,
                Format::Json => to_json(&table),
            })?;
        }
    }
    Ok(())
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("tables serialize");
    s.push('\n');
    s
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
