use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use delayed_oco::delay_sim::ScheduleSpec;
use delayed_oco::harness::{
    regret_slope, run_experiment, run_many, summary_table, DeltaRule, ExperimentConfig,
};
use delayed_oco::learners::Algorithm;
use delayed_oco::Result;

#[derive(Parser)]
#[command(
    name = "delayed-oco",
    version,
    about = "Online strongly convex optimization with delayed feedback"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm and write its per-round ledger as CSV.
    Run {
        #[arg(long, value_parser = parse_algorithm)]
        algo: Algorithm,
        #[command(flatten)]
        common: CommonArgs,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run several algorithms on a shared seed and schedule.
    Compare {
        /// Comma-separated list, e.g. ogd_sc,dogd,dogd_sc.
        #[arg(long, value_delimiter = ',', value_parser = parse_algorithm)]
        algos: Vec<Algorithm>,
        #[command(flatten)]
        common: CommonArgs,
        /// Directory receiving one <algo>.csv per algorithm.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Final regret divided by d ln T over a list of horizons.
    Slope {
        #[arg(long, value_parser = parse_algorithm, default_value = "dogd_sc")]
        algo: Algorithm,
        #[arg(
            long = "horizons",
            value_delimiter = ',',
            default_value = "250,500,1000,2000,4000"
        )]
        horizons: Vec<usize>,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Number of rounds.
    #[arg(long = "T", default_value_t = 1000)]
    horizon: usize,
    #[arg(long, default_value_t = 10)]
    dim: usize,
    /// Radius R of the decision ball.
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    /// Radius r of the ball guaranteed inside the decision set (defaults to R).
    #[arg(long)]
    inner_radius: Option<f64>,
    /// `periodic:2,3,2,1`, `constant:d`, `unit`, or a file with one delay per line.
    #[arg(long, default_value = "unit", value_parser = parse_schedule)]
    schedule: ScheduleSpec,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Fixed probe radius for bandit learners.
    #[arg(long, conflicts_with = "delta_rule")]
    delta: Option<f64>,
    /// `ln_t_over_t[:c]`, `inv_t_plus_d` or `fixed:<delta>`.
    #[arg(long, value_parser = parse_delta_rule)]
    delta_rule: Option<DeltaRule>,
}

fn parse_algorithm(s: &str) -> std::result::Result<Algorithm, String> {
    s.parse().map_err(|e: delayed_oco::Error| e.to_string())
}

fn parse_schedule(s: &str) -> std::result::Result<ScheduleSpec, String> {
    s.parse().map_err(|e: delayed_oco::Error| e.to_string())
}

fn parse_delta_rule(s: &str) -> std::result::Result<DeltaRule, String> {
    s.parse().map_err(|e: delayed_oco::Error| e.to_string())
}

impl CommonArgs {
    fn config(&self, algorithm: Algorithm) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(algorithm)
            .with_horizon(self.horizon)
            .with_schedule(self.schedule.clone())
            .with_seed(self.seed);
        cfg.dim = self.dim;
        cfg.radius = self.radius;
        cfg.inner_radius = self.inner_radius.unwrap_or(self.radius);
        cfg.delta_rule = self.delta.map(DeltaRule::Fixed).or(self.delta_rule);
        cfg
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { algo, common, out } => {
            let mut cfg = common.config(algo);
            cfg.output_path = Some(out.clone());
            let ledger = run_experiment(&cfg)?;
            ledger.write_csv(&out)?;
            println!(
                "{algo}: final cumulative loss {:.6}, regret {:.6} -> {}",
                ledger.final_cumulative_loss(),
                ledger.final_regret(),
                out.display()
            );
        }
        Command::Compare {
            algos,
            common,
            out_dir,
        } => {
            let configs: Vec<_> = algos.iter().map(|&a| common.config(a)).collect();
            // validate everything before spending time on runs
            for c in &configs {
                c.plan()?;
            }
            std::fs::create_dir_all(&out_dir).map_err(|e| delayed_oco::Error::Io {
                path: out_dir.clone(),
                source: e,
            })?;
            let mut results = Vec::new();
            for (algo, ledger) in algos.iter().zip(run_many(&configs)) {
                let ledger = ledger?;
                ledger.write_csv(&out_dir.join(format!("{algo}.csv")))?;
                results.push((*algo, ledger));
            }
            print!("{}", summary_table(&results));
        }
        Command::Slope {
            algo,
            horizons,
            common,
        } => {
            let cfg = common.config(algo);
            println!("{:>8} {:>16} {:>16}", "T", "regret", "regret/(d ln T)");
            for p in regret_slope(&cfg, &horizons)? {
                println!("{:>8} {:>16.6} {:>16.6}", p.horizon, p.regret, p.ratio);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
