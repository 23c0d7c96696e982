//! `armsight gen` — generate a synthetic dataset.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

use armsight_core::scene::{generate_dataset, GeneratorConfig};

use crate::rundir;

#[derive(Args)]
pub struct GenArgs {
    /// Robot preset ("ur3like" | "ur5like" | "ur10like") or path to a chain
    /// JSON file.
    #[arg(long, default_value = "ur5like")]
    pub robot: String,

    /// Output dataset directory.
    #[arg(long)]
    pub out: PathBuf,

    /// Number of recordings (one fixed camera pose each).
    #[arg(long, default_value_t = 3)]
    pub recordings: usize,

    /// Sweep step in radians per recording, comma separated (cycled).
    #[arg(long, value_delimiter = ',', default_values_t = [2.0, 1.55, 1.33])]
    pub steps: Vec<f64>,

    /// Per-recording sample caps, comma separated (cycled); use to pin
    /// recording sizes.
    #[arg(long, value_delimiter = ',', default_values_t = [252, 756, 1512])]
    pub max_samples: Vec<usize>,

    /// Image width in pixels.
    #[arg(long, default_value_t = 128)]
    pub width: usize,

    /// Image height in pixels.
    #[arg(long, default_value_t = 106)]
    pub height: usize,

    /// Directory of background PNGs (procedural noise when omitted).
    #[arg(long)]
    pub backgrounds: Option<PathBuf>,

    /// Train fraction of the random split.
    #[arg(long, default_value_t = 0.8)]
    pub train_ratio: f64,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Overwrite an existing non-empty output directory.
    #[arg(long)]
    pub force: bool,
}

pub fn run(args: GenArgs) -> Result<()> {
    let config = GeneratorConfig {
        robot: args.robot,
        n_recordings: args.recordings,
        steps: args.steps,
        max_samples: Some(args.max_samples),
        width: args.width,
        height: args.height,
        seed: args.seed,
        backgrounds_dir: args.backgrounds,
        train_ratio: args.train_ratio,
        camera: Default::default(),
    };
    config.validate().context("invalid generator settings")?;

    rundir::prepare(&args.out, args.force)?;
    rundir::write_config_echo(&args.out, "gen", serde_json::to_value(&config)?)?;

    let manifest = generate_dataset(&config, &args.out)
        .with_context(|| format!("generating dataset in {}", args.out.display()))?;

    // Recording summary in the dataset-table layout.
    println!("{:<12}{:<14}{}", "Recording", "Robot Type", "Number of Samples");
    let mut total = 0usize;
    for rec in 0..config.n_recordings {
        let n = manifest.records.iter().filter(|r| r.recording == rec).count();
        let robot = &manifest.records.iter().find(|r| r.recording == rec).map(|r| r.robot.as_str());
        println!("{:<12}{:<14}{}", format!("Rec {}", rec + 1), robot.unwrap_or("-"), n);
        total += n;
    }
    println!("{:<12}{:<14}{}", "Total", "", total);
    println!(
        "split: {} train / {} test",
        manifest.splits.train.len(),
        manifest.splits.test.len()
    );
    Ok(())
}
