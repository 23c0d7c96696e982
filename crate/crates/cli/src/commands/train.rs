//! `armsight train-seg` / `armsight train-joints`.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};

use armsight_core::jointnet::{self, JointNetConfig, TargetPoints};
use armsight_core::masknet::{self, MaskNetConfig};
use armsight_core::nn::save_checkpoint;
use armsight_core::scene::{load_manifest, load_split};

use crate::rundir;

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Profile {
    /// Reduced-size inputs and schedule for CPU-scale runs.
    Desk,
    /// The published hyperparameters (half-resolution inputs, 5000 epochs).
    Full,
}

#[derive(Args)]
pub struct CommonTrainArgs {
    /// Dataset directory (with manifest.json).
    #[arg(long)]
    pub data: PathBuf,

    /// Run directory for checkpoint, loss curve and config echo.
    #[arg(long)]
    pub out: PathBuf,

    #[arg(long, value_enum, default_value_t = Profile::Desk)]
    pub profile: Profile,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Override the profile's epoch count.
    #[arg(long)]
    pub epochs: Option<usize>,

    /// Override the profile's batch size.
    #[arg(long)]
    pub batch: Option<usize>,

    /// Override the schedule's starting learning rate.
    #[arg(long)]
    pub lr_start: Option<f64>,

    /// Override the schedule's final learning rate.
    #[arg(long)]
    pub lr_end: Option<f64>,

    /// Override the network input width.
    #[arg(long)]
    pub input_width: Option<usize>,

    /// Override the network input height.
    #[arg(long)]
    pub input_height: Option<usize>,

    /// Overwrite an existing non-empty run directory.
    #[arg(long)]
    pub force: bool,
}

#[derive(Args)]
pub struct TrainSegArgs {
    #[command(flatten)]
    pub common: CommonTrainArgs,

    /// Also evaluate the published literal loss form each epoch (extra
    /// loss-curve column).
    #[arg(long)]
    pub report_literal_loss: bool,
}

#[derive(Args)]
pub struct TrainJointsArgs {
    #[command(flatten)]
    pub common: CommonTrainArgs,

    /// Which points to regress: joint origins plus end-effector, or joints
    /// only.
    #[arg(long, value_enum, default_value_t = Targets::JointsEe)]
    pub targets: Targets,

    /// Override the momentum schedule start.
    #[arg(long)]
    pub momentum_start: Option<f64>,

    /// Override the momentum schedule end.
    #[arg(long)]
    pub momentum_end: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Targets {
    /// Joint origins plus the end-effector point.
    JointsEe,
    /// Joint origins only.
    Joints,
}

fn load_train_samples(
    data: &Path,
) -> Result<(armsight_core::scene::DatasetManifest, Vec<armsight_core::scene::LoadedSample>)> {
    let manifest = load_manifest(data)
        .with_context(|| format!("loading dataset manifest from {}", data.display()))?;
    let samples = load_split(data, &manifest, "train").context("loading train split")?;
    Ok((manifest, samples))
}

pub fn run_seg(args: TrainSegArgs) -> Result<()> {
    let c = &args.common;
    let mut config = match c.profile {
        Profile::Desk => MaskNetConfig::desk(),
        Profile::Full => MaskNetConfig::full(),
    };
    if let Some(v) = c.epochs {
        config.epochs = v;
    }
    if let Some(v) = c.batch {
        config.batch_size = v;
    }
    if let Some(v) = c.lr_start {
        config.lr_start = v;
    }
    if let Some(v) = c.lr_end {
        config.lr_end = v;
    }
    if let Some(v) = c.input_width {
        config.input_width = v;
    }
    if let Some(v) = c.input_height {
        config.input_height = v;
    }
    config.report_literal_loss = args.report_literal_loss;

    let (_, samples) = load_train_samples(&c.data)?;
    rundir::prepare(&c.out, c.force)?;
    rundir::write_config_echo(
        &c.out,
        "train-seg",
        serde_json::json!({"seed": c.seed, "data": c.data, "network": config}),
    )?;

    eprintln!("training mask network: {} samples, {} epochs", samples.len(), config.epochs);
    let (net, report) = masknet::train_masknet(&samples, &config, c.seed)?;

    save_checkpoint(&c.out, "masknet", &net, serde_json::to_value(&config)?, None)?;
    fs::write(c.out.join("loss_curve.csv"), report.to_csv())?;
    let final_loss = report.curve.last().map(|e| e.mean_loss).unwrap_or(f64::NAN);
    println!("trained mask network: final mean loss {final_loss:.6}");
    println!("run directory: {}", c.out.display());
    Ok(())
}

pub fn run_joints(args: TrainJointsArgs) -> Result<()> {
    let c = &args.common;
    let mut config = match c.profile {
        Profile::Desk => JointNetConfig::desk(),
        Profile::Full => JointNetConfig::full(),
    };
    if let Some(v) = c.epochs {
        config.epochs = v;
    }
    if let Some(v) = c.batch {
        config.batch_size = v;
    }
    if let Some(v) = c.lr_start {
        config.lr_start = v;
    }
    if let Some(v) = c.lr_end {
        config.lr_end = v;
    }
    if let Some(v) = c.input_width {
        config.input_width = v;
    }
    if let Some(v) = c.input_height {
        config.input_height = v;
    }
    if let Some(v) = args.momentum_start {
        config.momentum_start = v;
    }
    if let Some(v) = args.momentum_end {
        config.momentum_end = v;
    }
    config.targets = match args.targets {
        Targets::JointsEe => TargetPoints::JointsAndEndEffector,
        Targets::Joints => TargetPoints::JointsOnly,
    };

    let (_, samples) = load_train_samples(&c.data)?;
    rundir::prepare(&c.out, c.force)?;
    rundir::write_config_echo(
        &c.out,
        "train-joints",
        serde_json::json!({"seed": c.seed, "data": c.data, "network": config}),
    )?;

    eprintln!("training joint network: {} samples, {} epochs", samples.len(), config.epochs);
    let (net, norm, report) = jointnet::train_jointnet(&samples, &config, c.seed)?;

    save_checkpoint(&c.out, "jointnet", &net, serde_json::to_value(&config)?, Some(norm))?;
    fs::write(c.out.join("loss_curve.csv"), report.to_csv())?;
    let final_loss = report.curve.last().map(|e| e.mean_loss).unwrap_or(f64::NAN);
    println!("trained joint network: final mean loss {final_loss:.6} (normalized units)");
    println!("run directory: {}", c.out.display());
    Ok(())
}
