use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use epicurve::config::PipelineConfig;
use epicurve::pipeline::{Overrides, Pipeline, Stage};

/// Epidemic-curve feature extraction, entropy-based association and
/// major-factor selection.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Pipeline configuration (TOML)
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory, overriding `output` in the config
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed for every fusion and response, overriding the config
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Top-ranked rows per report column
    #[arg(long, global = true)]
    top: Option<usize>,
    /// Bottom-ranked rows per report column
    #[arg(long, global = true)]
    bottom: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Smooth the rate curves and extract peak and span features
    Features,
    /// Discretize features, write association matrices and networks
    Associate,
    /// K-means fusion of feature blocks
    Fuse,
    /// Major-factor scans for each configured response
    Select,
    /// Ranked CE / SCE-drop tables from the scans
    Report,
    /// Ward.D2 trees, leaf codes and similarity heatmaps
    Cluster,
    /// Every stage in order, then the manifest
    All,
}

fn run(cli: &Cli) -> epicurve::Result<()> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| epicurve::Error::Config("--config <PATH> is required".into()))?;
    let mut cfg = PipelineConfig::load(path)?;
    if let Some(out) = &cli.out {
        cfg.output = std::env::current_dir()
            .map(|d| d.join(out))
            .unwrap_or_else(|_| out.clone());
    }
    let overrides = Overrides {
        seed: cli.seed,
        top: cli.top,
        bottom: cli.bottom,
    };
    let pipeline = Pipeline::new(cfg, overrides)?;
    let stage = match cli.command {
        Command::Features => Stage::Features,
        Command::Associate => Stage::Associate,
        Command::Fuse => Stage::Fuse,
        Command::Select => Stage::Select,
        Command::Report => Stage::Report,
        Command::Cluster => Stage::Cluster,
        Command::All => {
            let manifest = pipeline.run_all()?;
            println!("{}", manifest.display());
            return Ok(());
        }
    };
    for p in pipeline.run(stage)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
