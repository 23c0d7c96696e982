//! The full cascade (mask → overlay → coordinates), the three-way evaluation
//! protocol and report output.
//!
//! Stage 2 accepts any mask source, so ground-truth-vs-predicted comparisons
//! are first class: the separate evaluation is literally the full evaluation
//! with the ground-truth mask provider.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jointnet::{joint_error, overlay, predict_joints, JointEstimate};
use crate::masknet::{binarize_mask, mask_accuracy, predict_mask};
use crate::nn::{Network, TargetNormalization, Tensor};
use crate::scene::dataset::LoadedSample;
use crate::scene::image::{ColorImage, MaskImage};
use crate::scene::CameraModel;

/// Wall-clock per stage, milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub mask_ms: f64,
    pub overlay_ms: f64,
    pub joints_ms: f64,
}

/// Output of one full cascade run.
#[derive(Debug, Clone)]
pub struct CascadeResult {
    pub prob_mask: Tensor<f32>,
    pub binary_mask: MaskImage,
    pub overlay: ColorImage,
    pub joints: JointEstimate,
    pub timings: StageTimings,
}

/// Default binarization threshold between the two stages.
pub const MASK_THRESHOLD: f32 = 0.5;

fn check_compatible(seg_net: &Network<f32>, joint_net: &Network<f32>) -> Result<(usize, usize)> {
    let (s, j) = (seg_net.input_shape(), joint_net.input_shape());
    if s != j {
        return Err(Error::Checkpoint(format!(
            "stage input shapes differ: mask {s:?} vs joints {j:?}"
        )));
    }
    Ok((s[2], s[1])) // (width, height)
}

/// Run mask prediction → threshold → overlay → joint regression on one color
/// image.
pub fn run_cascade(
    seg_net: &Network<f32>,
    joint_net: &Network<f32>,
    norm: &TargetNormalization,
    color: &ColorImage,
) -> Result<CascadeResult> {
    let (w, h) = check_compatible(seg_net, joint_net)?;
    let resized = color.resize(w, h);

    let t0 = Instant::now();
    let prob_mask = predict_mask(seg_net, &resized)?;
    let mask_ms = t0.elapsed().as_secs_f64() * 1e3;

    let t1 = Instant::now();
    let binary_mask = binarize_mask(&prob_mask, MASK_THRESHOLD);
    let masked = overlay(&resized, &binary_mask)?;
    let overlay_ms = t1.elapsed().as_secs_f64() * 1e3;

    let t2 = Instant::now();
    let joints = predict_joints(joint_net, norm, &masked)?;
    let joints_ms = t2.elapsed().as_secs_f64() * 1e3;

    if !joints.is_finite() {
        return Err(Error::Checkpoint("cascade produced non-finite joints".into()));
    }
    Ok(CascadeResult {
        prob_mask,
        binary_mask,
        overlay: masked,
        joints,
        timings: StageTimings { mask_ms, overlay_ms, joints_ms },
    })
}

/// Mean mask accuracy (%) of a mask provider over samples; ground truth is
/// compared at the provider's output resolution.
pub fn evaluate_mask_with<F>(provider: F, samples: &[LoadedSample]) -> Result<f64>
where
    F: Fn(&LoadedSample) -> Result<MaskImage> + Sync,
{
    if samples.is_empty() {
        return Err(Error::EmptyDataset("mask evaluation".into()));
    }
    let accs: Vec<f64> = samples
        .par_iter()
        .map(|s| {
            let pred = provider(s)?;
            let gt = s.mask.resize(pred.width, pred.height);
            mask_accuracy(&pred, &gt)
        })
        .collect::<Result<_>>()?;
    Ok(accs.iter().sum::<f64>() / accs.len() as f64)
}

/// Mean mask accuracy (%) of a trained mask network over the samples.
pub fn evaluate_mask(seg_net: &Network<f32>, samples: &[LoadedSample]) -> Result<f64> {
    evaluate_mask_with(
        |s| Ok(binarize_mask(&predict_mask(seg_net, &s.color)?, MASK_THRESHOLD)),
        samples,
    )
}

/// Where stage 2 gets its mask from during evaluation.
#[derive(Clone, Copy)]
pub enum MaskSource<'a> {
    /// The trained stage-1 network.
    Predicted(&'a Network<f32>),
    /// The dataset's ground-truth mask (oracle segmenter).
    GroundTruth,
}

/// Joint-error statistics over one split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointEvalStats {
    /// Mean Euclidean error, meters.
    pub mean_error_m: f64,
    /// Per-point mean errors, meters.
    pub per_point_m: Vec<f64>,
    /// (recording id, mean error) breakdown.
    pub per_recording: Vec<(usize, f64)>,
    pub sample_count: usize,
}

/// Cut a label's point list down to the K points a network regresses.
pub fn select_gt_points(label_points: &[[f64; 3]], k: usize) -> Result<JointEstimate> {
    if k == label_points.len() {
        Ok(JointEstimate { points: label_points.to_vec() })
    } else if k + 1 == label_points.len() {
        Ok(JointEstimate { points: label_points[..k].to_vec() })
    } else {
        Err(Error::ShapeMismatch(format!(
            "network regresses {k} points, label has {}",
            label_points.len()
        )))
    }
}

/// Evaluate any joint estimator (sample → estimate) against ground truth.
pub fn evaluate_joints_with<F>(estimator: F, samples: &[LoadedSample]) -> Result<JointEvalStats>
where
    F: Fn(&LoadedSample) -> Result<JointEstimate> + Sync,
{
    if samples.is_empty() {
        return Err(Error::EmptyDataset("joint evaluation".into()));
    }
    let results: Vec<(usize, f64, Vec<f64>)> = samples
        .par_iter()
        .map(|s| {
            let est = estimator(s)?;
            let gt = select_gt_points(&s.label.joints_cam, est.k())?;
            let (mean, per_point) = joint_error(&est, &gt)?;
            Ok((s.label.recording, mean, per_point))
        })
        .collect::<Result<Vec<_>>>()?;

    let n = results.len();
    let k = results[0].2.len();
    let mean_error_m = results.iter().map(|r| r.1).sum::<f64>() / n as f64;
    let mut per_point_m = vec![0.0; k];
    for (_, _, pp) in &results {
        for (acc, e) in per_point_m.iter_mut().zip(pp) {
            *acc += e;
        }
    }
    for v in &mut per_point_m {
        *v /= n as f64;
    }
    let mut recordings: Vec<usize> = results.iter().map(|r| r.0).collect();
    recordings.sort_unstable();
    recordings.dedup();
    let per_recording = recordings
        .into_iter()
        .map(|rec| {
            let errs: Vec<f64> =
                results.iter().filter(|r| r.0 == rec).map(|r| r.1).collect();
            (rec, errs.iter().sum::<f64>() / errs.len() as f64)
        })
        .collect();
    Ok(JointEvalStats { mean_error_m, per_point_m, per_recording, sample_count: n })
}

/// Mean joint error of stage 2 with the given mask source. With
/// [`MaskSource::GroundTruth`] this is the separate (oracle-mask) protocol;
/// with [`MaskSource::Predicted`] it is the full-system protocol.
pub fn evaluate_joints(
    joint_net: &Network<f32>,
    norm: &TargetNormalization,
    samples: &[LoadedSample],
    source: MaskSource,
) -> Result<JointEvalStats> {
    let shape = joint_net.input_shape().to_vec();
    let (h, w) = (shape[1], shape[2]);
    evaluate_joints_with(
        |s| {
            let color = s.color.resize(w, h);
            let mask = match source {
                MaskSource::GroundTruth => s.mask.resize(w, h),
                MaskSource::Predicted(seg_net) => {
                    let prob = predict_mask(seg_net, &s.color)?;
                    binarize_mask(&prob, MASK_THRESHOLD)
                }
            };
            let masked = overlay(&color, &mask)?;
            predict_joints(joint_net, norm, &masked)
        },
        samples,
    )
}

/// Stage-2 evaluation on ground-truth-mask overlays.
pub fn evaluate_separate(
    joint_net: &Network<f32>,
    norm: &TargetNormalization,
    samples: &[LoadedSample],
) -> Result<JointEvalStats> {
    evaluate_joints(joint_net, norm, samples, MaskSource::GroundTruth)
}

/// Full-system evaluation: predicted masks feed stage 2.
pub fn evaluate_full(
    seg_net: &Network<f32>,
    joint_net: &Network<f32>,
    norm: &TargetNormalization,
    samples: &[LoadedSample],
) -> Result<JointEvalStats> {
    check_compatible(seg_net, joint_net)?;
    evaluate_joints(joint_net, norm, samples, MaskSource::Predicted(seg_net))
}

/// The trivial predictor: the per-point mean of the training targets.
pub fn centroid_baseline(train_samples: &[LoadedSample], k: usize) -> Result<JointEstimate> {
    if train_samples.is_empty() {
        return Err(Error::EmptyDataset("centroid baseline".into()));
    }
    let mut points = vec![[0.0f64; 3]; k];
    for s in train_samples {
        let gt = select_gt_points(&s.label.joints_cam, k)?;
        for (acc, p) in points.iter_mut().zip(&gt.points) {
            for a in 0..3 {
                acc[a] += p[a];
            }
        }
    }
    for p in &mut points {
        for a in 0..3 {
            p[a] /= train_samples.len() as f64;
        }
    }
    Ok(JointEstimate { points })
}

/// Fixed palette for joint circles (RGB in [0,1]).
const JOINT_PALETTE: [[f32; 3]; 8] = [
    [0.94, 0.20, 0.20],
    [0.22, 0.60, 0.96],
    [0.25, 0.85, 0.35],
    [0.98, 0.80, 0.15],
    [0.80, 0.30, 0.90],
    [0.15, 0.85, 0.85],
    [0.98, 0.50, 0.12],
    [0.90, 0.90, 0.90],
];

/// Annotated image plus how many points were drawn / skipped.
#[derive(Debug, Clone)]
pub struct JointOverlayRender {
    pub image: ColorImage,
    pub drawn: usize,
    pub skipped_behind_camera: usize,
}

/// Project each 3D point through the camera and draw a filled circle with a
/// distinct color per joint index. Points behind the camera are skipped and
/// counted.
pub fn render_joint_overlay(
    camera: &CameraModel,
    color: &ColorImage,
    joints: &JointEstimate,
) -> Result<JointOverlayRender> {
    let mut image = color.clone();
    let radius = ((image.width.min(image.height) as f64) / 24.0).max(2.0);
    let sx = image.width as f64 / camera.width as f64;
    let sy = image.height as f64 / camera.height as f64;
    let mut drawn = 0;
    let mut skipped = 0;
    for (i, &p) in joints.points.iter().enumerate() {
        let (u, v) = match camera.project(p) {
            Ok(uv) => uv,
            Err(Error::BehindCamera { .. }) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let (u, v) = (u * sx, v * sy);
        let rgb = JOINT_PALETTE[i % JOINT_PALETTE.len()];
        let x0 = (u - radius).floor().max(0.0) as usize;
        let x1 = (u + radius).ceil().min(image.width as f64 - 1.0) as usize;
        let y0 = (v - radius).floor().max(0.0) as usize;
        let y1 = (v + radius).ceil().min(image.height as f64 - 1.0) as usize;
        for y in y0..=y1 {
            for x in x0..=x1 {
                let dx = x as f64 + 0.5 - u;
                let dy = y as f64 + 0.5 - v;
                if dx * dx + dy * dy <= radius * radius {
                    image.set_pixel(x, y, rgb);
                }
            }
        }
        drawn += 1;
    }
    Ok(JointOverlayRender { image, drawn, skipped_behind_camera: skipped })
}

/// One robot's evaluation summary; all metrics from the test split only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalReport {
    pub robot: String,
    pub sample_count: usize,
    pub mask_accuracy_pct: f64,
    /// Stage 2 on ground-truth masks, meters.
    pub separate_error_m: f64,
    /// Full cascade, meters.
    pub full_error_m: f64,
    pub per_point_separate_m: Vec<f64>,
    pub per_point_full_m: Vec<f64>,
    /// (recording, mean error meters) for the separate protocol.
    pub per_recording_separate_m: Vec<(usize, f64)>,
    /// Centroid-baseline error on the same split, meters.
    pub baseline_error_m: f64,
}

impl EvalReport {
    pub fn validate(&self) -> Result<()> {
        let finite = self.mask_accuracy_pct.is_finite()
            && self.separate_error_m.is_finite()
            && self.full_error_m.is_finite()
            && self.separate_error_m >= 0.0
            && self.full_error_m >= 0.0;
        if !finite {
            return Err(Error::Generator("report metrics must be finite and non-negative".into()));
        }
        Ok(())
    }
}

/// Metrics-by-robot table, emitted as CSV and aligned text. Errors print in
/// centimeters.
pub struct ResultsTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

pub fn results_table(reports: &[EvalReport]) -> Result<ResultsTable> {
    if reports.is_empty() {
        return Err(Error::EmptyDataset("results table needs at least one report".into()));
    }
    let mut header = vec!["Metric".to_string()];
    header.extend(reports.iter().map(|r| r.robot.clone()));
    let fmt_pct = |v: f64| format!("{v:.1}%");
    let fmt_cm = |v: f64| format!("{:.2} cm", v * 100.0);
    let rows = vec![
        std::iter::once("Mask Accuracy, %".to_string())
            .chain(reports.iter().map(|r| fmt_pct(r.mask_accuracy_pct)))
            .collect::<Vec<_>>(),
        std::iter::once("Coordinates Error (separate)".to_string())
            .chain(reports.iter().map(|r| fmt_cm(r.separate_error_m)))
            .collect(),
        std::iter::once("Coordinates Error (full system)".to_string())
            .chain(reports.iter().map(|r| fmt_cm(r.full_error_m)))
            .collect(),
    ];
    Ok(ResultsTable { header, rows })
}

fn csv_field(cell: &str) -> String {
    if cell.contains([',', '"', '\n']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

impl ResultsTable {
    pub fn to_csv(&self) -> String {
        let encode =
            |cells: &[String]| cells.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(",");
        let mut out = encode(&self.header) + "\n";
        for row in &self.rows {
            out.push_str(&encode(row));
            out.push('\n');
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut widths: Vec<usize> = self.header.iter().map(String::len).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let fmt_row = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect::<Vec<_>>()
                .join("  ")
        };
        let mut out = fmt_row(&self.header) + "\n";
        out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&fmt_row(row));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jointnet::JointNetConfig;
    use crate::masknet::MaskNetConfig;
    use crate::scene::dataset::{generate_dataset, load_split, GeneratorConfig};
    use crate::scene::CameraPoseDistribution;

    fn tiny_corpus() -> (tempfile::TempDir, Vec<LoadedSample>) {
        let dir = tempfile::tempdir().unwrap();
        let config = GeneratorConfig {
            n_recordings: 2,
            steps: vec![2.4, 2.1],
            max_samples: Some(vec![10, 10]),
            width: 48,
            height: 40,
            camera: CameraPoseDistribution::default(),
            ..GeneratorConfig::new("ur3like", 19)
        };
        let manifest = generate_dataset(&config, dir.path()).unwrap();
        let samples = load_split(dir.path(), &manifest, "train").unwrap();
        (dir, samples)
    }

    fn tiny_nets() -> (Network<f32>, Network<f32>, TargetNormalization) {
        let mut mask_cfg = MaskNetConfig::desk();
        mask_cfg.input_width = 48;
        mask_cfg.input_height = 40;
        mask_cfg.filters = 4;
        let seg = Network::from_specs(&mask_cfg.input_shape(), &mask_cfg.layer_specs(), 3).unwrap();
        let mut joint_cfg = JointNetConfig::desk();
        joint_cfg.input_width = 48;
        joint_cfg.input_height = 40;
        joint_cfg.filters = [4, 8, 8];
        let joints =
            Network::from_specs(&joint_cfg.input_shape(), &joint_cfg.layer_specs(7), 4).unwrap();
        (seg, joints, TargetNormalization::identity())
    }

    #[test]
    fn cascade_produces_consistent_result() {
        let (_dir, samples) = tiny_corpus();
        let (seg, joints, norm) = tiny_nets();
        let result = run_cascade(&seg, &joints, &norm, &samples[0].color).unwrap();
        assert_eq!(result.joints.k(), 7);
        assert!(result.joints.is_finite());
        // Overlay is black wherever the binary mask is zero.
        for y in 0..result.binary_mask.height {
            for x in 0..result.binary_mask.width {
                if result.binary_mask.get(x, y) == 0 {
                    assert_eq!(result.overlay.pixel(x, y), [0.0, 0.0, 0.0]);
                }
            }
        }
        assert!(result.timings.mask_ms >= 0.0);
    }

    #[test]
    fn oracle_mask_provider_scores_hundred_percent() {
        let (_dir, samples) = tiny_corpus();
        let acc = evaluate_mask_with(|s| Ok(s.mask.clone()), &samples).unwrap();
        assert_eq!(acc, 100.0);
    }

    #[test]
    fn all_background_provider_matches_fraction_arithmetic() {
        let (_dir, samples) = tiny_corpus();
        let acc = evaluate_mask_with(
            |s| Ok(MaskImage::new(s.mask.width, s.mask.height)),
            &samples,
        )
        .unwrap();
        let expected = samples
            .iter()
            .map(|s| 100.0 * (1.0 - s.mask.foreground_fraction()))
            .sum::<f64>()
            / samples.len() as f64;
        assert!((acc - expected).abs() < 1e-9);
    }

    #[test]
    fn oracle_regressor_has_zero_error() {
        let (_dir, samples) = tiny_corpus();
        let stats = evaluate_joints_with(
            |s| Ok(JointEstimate { points: s.label.joints_cam.clone() }),
            &samples,
        )
        .unwrap();
        assert_eq!(stats.mean_error_m, 0.0);
        assert!(stats.per_point_m.iter().all(|&e| e == 0.0));
        assert_eq!(stats.sample_count, samples.len());
    }

    #[test]
    fn full_with_oracle_segmenter_equals_separate_bitwise() {
        let (_dir, samples) = tiny_corpus();
        let (_, joints, norm) = tiny_nets();
        let separate = evaluate_separate(&joints, &norm, &samples).unwrap();
        let oracle_full =
            evaluate_joints(&joints, &norm, &samples, MaskSource::GroundTruth).unwrap();
        assert_eq!(separate, oracle_full);
    }

    #[test]
    fn empty_split_is_an_error() {
        let (seg, joints, norm) = tiny_nets();
        assert!(evaluate_mask(&seg, &[]).is_err());
        assert!(evaluate_separate(&joints, &norm, &[]).is_err());
    }

    #[test]
    fn corrupting_masks_degrades_accuracy_monotonically() {
        use rand::{Rng, SeedableRng};
        let (_dir, samples) = tiny_corpus();
        let corrupt = |rate: f64| {
            evaluate_mask_with(
                |s| {
                    // Deterministic per-sample flips derived from the id.
                    let salt: u64 =
                        s.record.id.bytes().fold(99, |acc, b| acc.wrapping_mul(31) + b as u64);
                    let mut local = rand_chacha::ChaCha8Rng::seed_from_u64(salt);
                    let mut m = s.mask.clone();
                    for v in &mut m.data {
                        if local.gen::<f64>() < rate {
                            *v = 1 - *v;
                        }
                    }
                    Ok(m)
                },
                &samples,
            )
            .unwrap()
        };
        let a = corrupt(0.1);
        let b = corrupt(0.3);
        let c = corrupt(0.5);
        assert!(a > b && b > c, "accuracy should fall with flip rate: {a} {b} {c}");
    }

    #[test]
    fn centroid_baseline_is_mean_of_targets() {
        let (_dir, samples) = tiny_corpus();
        let baseline = centroid_baseline(&samples, 7).unwrap();
        let mut expect = [0.0f64; 3];
        for s in &samples {
            for a in 0..3 {
                expect[a] += s.label.joints_cam[0][a];
            }
        }
        for a in 0..3 {
            expect[a] /= samples.len() as f64;
            assert!((baseline.points[0][a] - expect[a]).abs() < 1e-12);
        }
    }

    #[test]
    fn joint_overlay_draws_k_circles_on_the_robot() {
        let (_dir, samples) = tiny_corpus();
        let sample = &samples[0];
        let gt = JointEstimate { points: sample.label.joints_cam.clone() };
        let render = render_joint_overlay(&sample.label.camera, &sample.color, &gt).unwrap();
        assert_eq!(render.drawn, 7);
        assert_eq!(render.skipped_behind_camera, 0);
        // Circle centers coincide with mask foreground (within 2 px).
        for &p in &gt.points {
            let (u, v) = sample.label.camera.project(p).unwrap();
            assert!(sample.mask.foreground_near(u as i64, v as i64, 2));
        }
    }

    #[test]
    fn joint_overlay_skips_points_behind_camera() {
        let (_dir, samples) = tiny_corpus();
        let sample = &samples[0];
        let mut points = sample.label.joints_cam.clone();
        points[3] = [0.0, 0.0, -1.0];
        let render = render_joint_overlay(
            &sample.label.camera,
            &sample.color,
            &JointEstimate { points },
        )
        .unwrap();
        assert_eq!(render.drawn, 6);
        assert_eq!(render.skipped_behind_camera, 1);
    }

    fn fixture_reports() -> Vec<EvalReport> {
        // Published reference values used as fixture input.
        let mk = |robot: &str, acc: f64, sep_cm: f64, full_cm: f64| EvalReport {
            robot: robot.to_string(),
            sample_count: 100,
            mask_accuracy_pct: acc,
            separate_error_m: sep_cm / 100.0,
            full_error_m: full_cm / 100.0,
            per_point_separate_m: vec![],
            per_point_full_m: vec![],
            per_recording_separate_m: vec![],
            baseline_error_m: 0.5,
        };
        vec![
            mk("ur3like", 93.1, 2.5, 2.57),
            mk("ur5like", 98.1, 2.02, 2.42),
            mk("ur10like", 92.8, 3.21, 3.89),
        ]
    }

    #[test]
    fn results_table_reproduces_fixture_values() {
        let table = results_table(&fixture_reports()).unwrap();
        let text = table.to_text();
        for needle in
            ["93.1%", "98.1%", "92.8%", "2.50 cm", "2.02 cm", "3.21 cm", "2.57 cm", "2.42 cm", "3.89 cm"]
        {
            assert!(text.contains(needle), "missing {needle} in\n{text}");
        }
        assert!(text.contains("Mask Accuracy"));
        assert!(text.contains("Coordinates Error (separate)"));
        assert!(text.contains("Coordinates Error (full system)"));
    }

    #[test]
    fn results_table_single_report_has_three_metric_rows() {
        let table = results_table(&fixture_reports()[..1]).unwrap();
        let csv = table.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4); // header + 3 metric rows
        assert_eq!(lines[0], "Metric,ur3like");
    }

    #[test]
    fn results_csv_round_trips_through_a_parser() {
        let table = results_table(&fixture_reports()).unwrap();
        let csv_text = table.to_csv();
        let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
        let headers = reader.headers().unwrap().clone();
        assert_eq!(&headers[0], "Metric");
        assert_eq!(&headers[2], "ur5like");
        let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), 3);
        assert_eq!(&rows[0][2], "98.1%");
        assert_eq!(&rows[1][3], "3.21 cm");
    }

    #[test]
    fn eval_report_json_round_trip() {
        let report = &fixture_reports()[0];
        report.validate().unwrap();
        let text = serde_json::to_string_pretty(report).unwrap();
        let back: EvalReport = serde_json::from_str(&text).unwrap();
        assert_eq!(*report, back);
    }
}
