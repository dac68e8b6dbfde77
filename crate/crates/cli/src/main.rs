//! `coteach` — run label-noise training grids and inspect the pieces.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use coteach_core::data::{write_synthetic_idx, SyntheticIdxSpec};
use coteach_core::gradcheck::check_random_mlp;
use coteach_core::harness::{parse_grid_config, plot_dir, run_grid, summarize_dir};
use coteach_core::{build_q, NoiseKind};

#[derive(Parser)]
#[command(name = "coteach", about = "Desk-scale training laboratory for noisy labels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the experiment grid described by a JSON config file.
    Run {
        /// Path to the grid config (see README for the key reference).
        config: PathBuf,
    },
    /// Rebuild summary.csv from the run CSVs in an artifact directory.
    Summarize {
        /// Artifact directory previously produced by `run`.
        dir: PathBuf,
    },
    /// Rebuild the SVG charts from the run CSVs in an artifact directory.
    Plot {
        /// Artifact directory previously produced by `run`.
        dir: PathBuf,
    },
    /// Check analytic gradients of random MLPs against finite differences.
    CheckGrad {
        /// Number of random networks to check.
        #[arg(long, default_value_t = 20)]
        networks: u64,
        /// Parameter coordinates sampled per network.
        #[arg(long, default_value_t = 100)]
        coords: usize,
        /// Central-difference step.
        #[arg(long, default_value_t = 1e-5)]
        step: f64,
    },
    /// Print a noise transition matrix.
    MakeNoise {
        /// Noise kind: pair or symmetry.
        #[arg(long)]
        kind: NoiseKind,
        /// Noise rate in [0, 1).
        #[arg(long)]
        epsilon: f64,
        /// Class count.
        #[arg(long)]
        n: usize,
    },
    /// Generate a synthetic IDX image corpus (stand-in for MNIST files).
    SynthIdx {
        /// Directory to write the four IDX files into.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 60_000)]
        train: usize,
        #[arg(long, default_value_t = 10_000)]
        test: usize,
        #[arg(long, default_value_t = 29)]
        seed: u64,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { config } => {
            let text = fs::read_to_string(&config)
                .with_context(|| format!("reading config {}", config.display()))?;
            let cfg = parse_grid_config(&text)?;
            let report = run_grid(&cfg)?;
            println!("{} run files under {}", report.run_files.len(), cfg.output_dir.display());
            println!("summary: {}", report.summary_file.display());
            for p in &report.plot_files {
                println!("plot: {}", p.display());
            }
        }
        Command::Summarize { dir } => {
            let path = summarize_dir(&dir)?;
            println!("wrote {}", path.display());
            print!("{}", fs::read_to_string(&path)?);
        }
        Command::Plot { dir } => {
            for p in plot_dir(&dir)? {
                println!("wrote {}", p.display());
            }
        }
        Command::CheckGrad {
            networks,
            coords,
            step,
        } => {
            let mut worst = 0.0f64;
            for seed in 0..networks {
                let report = check_random_mlp(seed, coords, step)?;
                println!(
                    "network {seed}: max relative error {:.3e} over {} coordinates",
                    report.max_rel_err, report.coords_checked
                );
                worst = worst.max(report.max_rel_err);
            }
            println!("worst: {worst:.3e}");
            if worst >= 1e-4 {
                bail!("gradient check failed (threshold 1e-4)");
            }
        }
        Command::MakeNoise { kind, epsilon, n } => {
            let q = build_q(kind, n, epsilon)?;
            for i in 0..n {
                let row: Vec<String> = q.row(i).iter().map(|p| format!("{p:.4}")).collect();
                println!("[{}]", row.join(", "));
            }
        }
        Command::SynthIdx {
            out,
            train,
            test,
            seed,
        } => {
            let spec = SyntheticIdxSpec {
                train_n: train,
                test_n: test,
                seed,
                ..SyntheticIdxSpec::default()
            };
            let paths = write_synthetic_idx(&out, &spec)?;
            println!("wrote {}", paths.train_images.display());
            println!("wrote {}", paths.train_labels.display());
            println!("wrote {}", paths.test_images.display());
            println!("wrote {}", paths.test_labels.display());
        }
    }
    Ok(())
}
