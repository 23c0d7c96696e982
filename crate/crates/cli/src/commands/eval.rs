//! `armsight eval` — the three-way evaluation protocol on the test split.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};

use armsight_core::nn::{load_checkpoint, TargetNormalization};
use armsight_core::pipeline::{
    centroid_baseline, evaluate_full, evaluate_joints_with, evaluate_mask, evaluate_separate,
    results_table, EvalReport,
};
use armsight_core::scene::{load_manifest, load_split};

use crate::rundir;

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Mask,
    Separate,
    Full,
}

#[derive(Args)]
pub struct EvalArgs {
    /// Dataset directory (with manifest.json).
    #[arg(long)]
    pub data: PathBuf,

    /// Run directory holding the mask-network checkpoint.
    #[arg(long)]
    pub seg_run: Option<PathBuf>,

    /// Run directory holding the joint-network checkpoint.
    #[arg(long)]
    pub joints_run: Option<PathBuf>,

    /// Output directory for the report files.
    #[arg(long)]
    pub out: PathBuf,

    /// Restrict to a subset of metrics (repeatable). Default: all three.
    #[arg(long, value_enum)]
    pub only: Vec<Metric>,

    /// Overwrite an existing non-empty output directory.
    #[arg(long)]
    pub force: bool,
}

pub fn run(args: EvalArgs) -> Result<()> {
    let manifest = load_manifest(&args.data)
        .with_context(|| format!("loading dataset manifest from {}", args.data.display()))?;
    if manifest.splits.test.is_empty() {
        bail!("dataset has no test split; refusing to evaluate on training data");
    }
    let test = load_split(&args.data, &manifest, "test").context("loading test split")?;
    let train = load_split(&args.data, &manifest, "train").context("loading train split")?;
    let robot = manifest.records.first().map(|r| r.robot.clone()).unwrap_or_default();

    let wanted = |m: Metric| args.only.is_empty() || args.only.contains(&m);

    let seg = args
        .seg_run
        .as_ref()
        .map(|dir| load_checkpoint(dir).context("loading mask checkpoint"))
        .transpose()?;
    let joints = args
        .joints_run
        .as_ref()
        .map(|dir| load_checkpoint(dir).context("loading joint checkpoint"))
        .transpose()?;

    rundir::prepare(&args.out, args.force)?;
    rundir::write_config_echo(
        &args.out,
        "eval",
        serde_json::json!({
            "data": args.data,
            "seg_run": args.seg_run,
            "joints_run": args.joints_run,
        }),
    )?;

    let mut mask_accuracy_pct = None;
    let mut separate = None;
    let mut full = None;

    if wanted(Metric::Mask) {
        let (_, seg_net) =
            seg.as_ref().ok_or_else(|| anyhow::anyhow!("--seg-run is required for the mask metric"))?;
        mask_accuracy_pct = Some(evaluate_mask(seg_net, &test)?);
    }
    if wanted(Metric::Separate) {
        let (meta, joint_net) = joints
            .as_ref()
            .ok_or_else(|| anyhow::anyhow!("--joints-run is required for the separate metric"))?;
        let norm = meta.normalization.clone().unwrap_or_else(TargetNormalization::identity);
        separate = Some(evaluate_separate(joint_net, &norm, &test)?);
    }
    if wanted(Metric::Full) {
        let (_, seg_net) = seg
            .as_ref()
            .ok_or_else(|| anyhow::anyhow!("--seg-run is required for the full metric"))?;
        let (meta, joint_net) = joints
            .as_ref()
            .ok_or_else(|| anyhow::anyhow!("--joints-run is required for the full metric"))?;
        let norm = meta.normalization.clone().unwrap_or_else(TargetNormalization::identity);
        full = Some(evaluate_full(seg_net, joint_net, &norm, &test)?);
    }

    let all_three = mask_accuracy_pct.is_some() && separate.is_some() && full.is_some();
    if all_three {
        let separate = separate.unwrap();
        let full = full.unwrap();
        let k = separate.per_point_m.len();
        let baseline = centroid_baseline(&train, k)?;
        let baseline_stats = evaluate_joints_with(|_| Ok(baseline.clone()), &test)?;

        let report = EvalReport {
            robot,
            sample_count: test.len(),
            mask_accuracy_pct: mask_accuracy_pct.unwrap(),
            separate_error_m: separate.mean_error_m,
            full_error_m: full.mean_error_m,
            per_point_separate_m: separate.per_point_m.clone(),
            per_point_full_m: full.per_point_m.clone(),
            per_recording_separate_m: separate.per_recording.clone(),
            baseline_error_m: baseline_stats.mean_error_m,
        };
        report.validate()?;
        fs::write(
            args.out.join("eval_report.json"),
            serde_json::to_string_pretty(&report)? + "\n",
        )?;
        let table = results_table(std::slice::from_ref(&report))?;
        fs::write(args.out.join("results.csv"), table.to_csv())?;
        fs::write(args.out.join("results.txt"), table.to_text())?;
        print!("{}", table.to_text());
    } else {
        // Partial metric subset: a reduced JSON, no table.
        let partial = serde_json::json!({
            "robot": robot,
            "sample_count": test.len(),
            "mask_accuracy_pct": mask_accuracy_pct,
            "separate_error_m": separate.as_ref().map(|s| s.mean_error_m),
            "full_error_m": full.as_ref().map(|s| s.mean_error_m),
        });
        fs::write(args.out.join("metrics.json"), serde_json::to_string_pretty(&partial)? + "\n")?;
        if let Some(acc) = mask_accuracy_pct {
            println!("mask accuracy: {acc:.2}%");
        }
        if let Some(s) = &separate {
            println!("coordinates error (separate): {:.2} cm", s.mean_error_m * 100.0);
        }
        if let Some(f) = &full {
            println!("coordinates error (full system): {:.2} cm", f.mean_error_m * 100.0);
        }
    }
    eprintln!("evaluation written to {}", args.out.display());
    Ok(())
}
