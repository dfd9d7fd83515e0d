use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use wca::coreset::CoresetConfig;
use wca_cli::commands::{self, AssignArgs, BuildArgs, ClusterArgs, PlotArgs, VerifyArgs};

/// Weight-constrained anisotropic assignment, clustering and coresets.
#[derive(Parser)]
#[command(name = "wca", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Problem {
    /// Points CSV: header, d coordinate columns, optional `weight` column.
    #[arg(long)]
    points: PathBuf,
    /// JSON with `k`, `kappa` and `A`.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Balanced windows ω(X)/k·(1 ± slack), overriding `kappa`.
    #[arg(long)]
    balanced: Option<f64>,
}

#[derive(Args)]
struct Heuristic {
    /// Clusters opened by the seeding heuristic, as a multiple of k.
    #[arg(long, default_value_t = 1)]
    beta: usize,
    /// Assumed approximation factor of the heuristic.
    #[arg(long, default_value_t = 16.0)]
    alpha: f64,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl Heuristic {
    fn config(&self) -> CoresetConfig {
        CoresetConfig {
            beta: self.beta,
            alpha: self.alpha,
            repeats: self.repeats,
            seed: self.seed,
            ..CoresetConfig::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve the constrained assignment to fixed sites.
    Assign {
        #[command(flatten)]
        problem: Problem,
        #[arg(long)]
        sites: PathBuf,
        /// Also extract a compatible diagram.
        #[arg(long)]
        diagram: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a coreset and print its summary.
    BuildCoreset {
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        eps: f64,
        #[command(flatten)]
        heuristic: Heuristic,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cluster through a coreset and extend to the full data.
    Cluster {
        #[command(flatten)]
        problem: Problem,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        eps: f64,
        #[command(flatten)]
        heuristic: Heuristic,
        /// Alternating starts on the coreset.
        #[arg(long, default_value_t = 5)]
        starts: usize,
        /// Move sites to full-data centroids after extension.
        #[arg(long)]
        reoptimize: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a coreset file against its source data.
    Verify {
        #[command(flatten)]
        problem: Problem,
        #[arg(long)]
        coreset: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Points on a small circle whose sensitivities sum to nearly n.
    SensitivityDemo {
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 0.01)]
        r: f64,
        /// Directory for the instance, probe sites and report.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Print the direction net used for projection.
    Net {
        #[arg(long)]
        eps: f64,
        #[arg(long, short)]
        d: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a planar instance as SVG.
    Plot {
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        clustering: Option<PathBuf>,
        #[arg(long)]
        sites: Option<PathBuf>,
        #[arg(long)]
        diagram: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("WCA_THREADS") {
        let n: usize = match v.trim().parse() {
            Ok(n) if n > 0 => n,
            _ => bail!("WCA_THREADS must be a positive integer, got {v:?}"),
        };
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    init_threads()?;
    let (text, ok) = match cli.command {
        Command::Assign {
            problem,
            sites,
            diagram,
            out,
        } => (
            commands::cmd_assign(&AssignArgs {
                points: &problem.points,
                sites: &sites,
                config: problem.config.as_deref(),
                balanced: problem.balanced,
                diagram,
                out: out.as_deref(),
            })?,
            true,
        ),
        Command::BuildCoreset {
            points,
            config,
            k,
            eps,
            heuristic,
            out,
        } => (
            commands::cmd_build_coreset(&BuildArgs {
                points: &points,
                k,
                eps,
                config: config.as_deref(),
                coreset: heuristic.config(),
                out: out.as_deref(),
            })?,
            true,
        ),
        Command::Cluster {
            problem,
            k,
            eps,
            heuristic,
            starts,
            reoptimize,
            out,
        } => (
            commands::cmd_cluster(&ClusterArgs {
                points: &problem.points,
                k,
                eps,
                config: problem.config.as_deref(),
                balanced: problem.balanced,
                coreset: heuristic.config(),
                starts,
                reoptimize,
                out: out.as_deref(),
            })?,
            true,
        ),
        Command::Verify {
            problem,
            coreset,
            k,
            trials,
            seed,
            out,
        } => commands::cmd_verify(&VerifyArgs {
            points: &problem.points,
            coreset: &coreset,
            k,
            config: problem.config.as_deref(),
            balanced: problem.balanced,
            trials,
            seed,
            out: out.as_deref(),
        })?,
        Command::SensitivityDemo { n, r, emit } => {
            commands::cmd_sensitivity_demo(n, r, emit.as_deref())?
        }
        Command::Net { eps, d, out } => (commands::cmd_net(eps, d, out.as_deref())?, true),
        Command::Plot {
            points,
            clustering,
            sites,
            diagram,
            out,
        } => (
            commands::cmd_plot(&PlotArgs {
                points: &points,
                clustering: clustering.as_deref(),
                sites: sites.as_deref(),
                diagram: diagram.as_deref(),
                out: &out,
            })?,
            true,
        ),
    };
    print!("{text}");
    Ok(ok)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: check failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
