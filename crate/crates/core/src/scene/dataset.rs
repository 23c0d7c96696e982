//! Dataset generation, on-disk layout and the train/test split.
//!
//! Layout under the output directory:
//! `manifest.json`, `samples/<id>_color.png`, `samples/<id>_mask.png`,
//! `samples/<id>_label.json`. All JSON is UTF-8, 3D values are meters,
//! angles radians.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::image::{ColorImage, MaskImage};
use super::render::{render_sample, Background, RobotSample};
use super::{CameraModel, CameraPoseDistribution};
use crate::error::{Error, Result};
use crate::kinematics::{
    forward_kinematics, preset, sweep_configurations, validate_configuration, JointConfig,
    KinematicChain,
};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Everything the generator needs; echoed verbatim into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    /// Preset name ("ur3like" | "ur5like" | "ur10like") or a path to a chain
    /// JSON document.
    pub robot: String,
    pub n_recordings: usize,
    /// Sweep step (radians) per recording; cycled when shorter.
    pub steps: Vec<f64>,
    /// Optional per-recording sample caps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_samples: Option<Vec<usize>>,
    pub width: usize,
    pub height: usize,
    pub seed: u64,
    /// Directory of background images; procedural noise when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub backgrounds_dir: Option<PathBuf>,
    pub train_ratio: f64,
    pub camera: CameraPoseDistribution,
}

impl GeneratorConfig {
    pub fn new(robot: &str, seed: u64) -> Self {
        Self {
            robot: robot.to_string(),
            n_recordings: 3,
            steps: vec![2.0, 1.55, 1.33],
            max_samples: Some(vec![252, 756, 1512]),
            width: 128,
            height: 106,
            seed,
            backgrounds_dir: None,
            train_ratio: 0.8,
            camera: CameraPoseDistribution::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_recordings == 0 {
            return Err(Error::Generator("need at least one recording".into()));
        }
        if self.steps.is_empty() || self.steps.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::Generator("sweep steps must be positive".into()));
        }
        if !(self.train_ratio > 0.0 && self.train_ratio < 1.0) {
            return Err(Error::Generator(format!(
                "train ratio {} must be in (0, 1)",
                self.train_ratio
            )));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::Generator("image dimensions must be nonzero".into()));
        }
        Ok(())
    }

    /// Resolve the robot field to a chain (preset first, then JSON path).
    pub fn resolve_chain(&self) -> Result<KinematicChain> {
        if let Some(chain) = preset(&self.robot) {
            return Ok(chain);
        }
        let path = Path::new(&self.robot);
        if path.exists() {
            return KinematicChain::from_json(&fs::read_to_string(path)?);
        }
        Err(Error::Generator(format!(
            "unknown robot '{}': not a preset and not a file",
            self.robot
        )))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleRecord {
    pub id: String,
    pub robot: String,
    pub recording: usize,
    pub color_path: String,
    pub mask_path: String,
    pub label_path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Splits {
    pub train: Vec<String>,
    pub test: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub seed: u64,
    pub generator: GeneratorConfig,
    pub records: Vec<SampleRecord>,
    pub splits: Splits,
}

impl DatasetManifest {
    pub fn validate(&self) -> Result<()> {
        let mut all: Vec<&str> = self.records.iter().map(|r| r.id.as_str()).collect();
        all.sort_unstable();
        let mut split: Vec<&str> = self
            .splits
            .train
            .iter()
            .chain(self.splits.test.iter())
            .map(String::as_str)
            .collect();
        split.sort_unstable();
        if all != split {
            return Err(Error::Generator("splits are not a partition of the records".into()));
        }
        for id in &self.splits.train {
            if self.splits.test.contains(id) {
                return Err(Error::Generator(format!("id '{id}' in both splits")));
            }
        }
        Ok(())
    }
}

/// Per-sample ground-truth sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleLabel {
    pub robot: String,
    pub recording: usize,
    /// Joint angles, radians.
    pub angles: Vec<f64>,
    /// Camera-frame joint coordinates, meters: base, joints, end-effector.
    pub joints_cam: Vec<[f64; 3]>,
    pub camera: CameraModel,
}

/// Deterministic uniform split of record ids; train size is
/// `round(ratio·n)`, clamped so the test set is only empty when `n == 1`.
pub fn split_records(ids: &[String], ratio: f64, seed: u64) -> Result<Splits> {
    if ids.is_empty() {
        return Err(Error::EmptyDataset("cannot split zero records".into()));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Generator(format!("split ratio {ratio} must be in (0, 1)")));
    }
    let mut shuffled: Vec<String> = ids.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, 0x511));
    shuffled.shuffle(&mut rng);
    let n = shuffled.len();
    let n_train = ((ratio * n as f64).round() as usize).clamp(1, if n > 1 { n - 1 } else { 1 });
    let (train, test) = shuffled.split_at(n_train);
    let mut train = train.to_vec();
    let mut test = test.to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok(Splits { train, test })
}

fn mix_seed(seed: u64, salt: u64) -> u64 {
    // splitmix64 round over seed ^ salt.
    let mut z = seed ^ salt.wrapping_mul(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn load_backgrounds(dir: &Path) -> Result<Background> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .map(|e| e.eq_ignore_ascii_case("png"))
                .unwrap_or(false)
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Generator(format!("no PNG backgrounds in {}", dir.display())));
    }
    let images = paths.iter().map(|p| ColorImage::load_png(p)).collect::<Result<Vec<_>>>()?;
    Ok(Background::Images(images))
}

/// Fraction of configurations whose joints all project inside the image for
/// this camera pose. Cheap pose pre-check, no rasterization.
fn pose_coverage(chain: &KinematicChain, camera: &CameraModel, configs: &[JointConfig]) -> f64 {
    let visible = configs
        .iter()
        .filter(|config| {
            forward_kinematics(chain, config)
                .map(|points| {
                    points.iter().all(|&p| {
                        let q = camera.to_camera(p);
                        q[2] > 0.0
                            && camera.project(q).map(|(u, v)| camera.contains(u, v)).unwrap_or(false)
                    })
                })
                .unwrap_or(false)
        })
        .count();
    visible as f64 / configs.len().max(1) as f64
}

/// Per-recording result before files are written.
struct RecordingOutput {
    camera: CameraModel,
    samples: Vec<(JointConfig, u64)>, // config + per-sample seed
}

fn plan_recording(
    chain: &KinematicChain,
    config: &GeneratorConfig,
    recording: usize,
) -> Result<RecordingOutput> {
    let step = config.steps[recording % config.steps.len()];
    let rec_seed = mix_seed(config.seed, recording as u64 + 1);
    let sweep = sweep_configurations(chain, step, rec_seed)?;
    let valid: Vec<JointConfig> = sweep
        .into_iter()
        .filter(|c| validate_configuration(chain, c).unwrap_or(false))
        .collect();
    if valid.is_empty() {
        return Err(Error::Generator(format!(
            "recording {recording}: sweep with step {step} has no collision-free configuration"
        )));
    }

    // Draw camera poses until one sees enough of the sweep.
    let mut pose_rng = ChaCha8Rng::seed_from_u64(mix_seed(rec_seed, 0xCA3E7A));
    let mut best: Option<(f64, CameraModel)> = None;
    for _ in 0..16 {
        let cam = config.camera.sample(chain, config.width, config.height, &mut pose_rng)?;
        let coverage = pose_coverage(chain, &cam, &valid);
        if best.as_ref().map(|(c, _)| coverage > *c).unwrap_or(true) {
            best = Some((coverage, cam));
        }
        if coverage >= 0.4 {
            break;
        }
    }
    let (_, camera) = best.expect("at least one pose sampled");

    let samples = valid
        .into_iter()
        .enumerate()
        .map(|(i, c)| (c, mix_seed(rec_seed, 0xB0A + i as u64)))
        .collect();
    Ok(RecordingOutput { camera, samples })
}

/// Generate the full dataset under `out_dir` and return the manifest
/// (also written to `manifest.json`).
pub fn generate_dataset(config: &GeneratorConfig, out_dir: &Path) -> Result<DatasetManifest> {
    config.validate()?;
    let chain = config.resolve_chain()?;
    chain.validate()?;
    let background = match &config.backgrounds_dir {
        Some(dir) => load_backgrounds(dir)?,
        None => Background::Procedural,
    };

    let samples_dir = out_dir.join("samples");
    fs::create_dir_all(&samples_dir)?;

    let mut records = Vec::new();
    for recording in 0..config.n_recordings {
        let plan = plan_recording(&chain, config, recording)?;
        let cap = config
            .max_samples
            .as_ref()
            .map(|caps| caps[recording % caps.len()])
            .unwrap_or(usize::MAX);

        // Render in parallel; determinism comes from per-sample seeds, not
        // from scheduling.
        let rendered: Vec<Option<RobotSample>> = plan
            .samples
            .par_iter()
            .map(|(cfg, seed)| {
                match render_sample(&chain, cfg, &plan.camera, &background, *seed) {
                    Ok(sample) => Some(sample),
                    Err(Error::SampleRejected(_)) => None,
                    Err(_) => None,
                }
            })
            .collect();

        let accepted: Vec<RobotSample> = rendered.into_iter().flatten().take(cap).collect();
        if accepted.is_empty() {
            return Err(Error::Generator(format!(
                "recording {recording}: no sample passed the rendering gates"
            )));
        }

        for (i, sample) in accepted.iter().enumerate() {
            let id = format!("r{recording:02}_{i:05}");
            let color_path = format!("samples/{id}_color.png");
            let mask_path = format!("samples/{id}_mask.png");
            let label_path = format!("samples/{id}_label.json");
            sample.color.save_png(&out_dir.join(&color_path))?;
            sample.mask.save_png(&out_dir.join(&mask_path))?;
            let label = SampleLabel {
                robot: sample.robot.clone(),
                recording,
                angles: sample.angles.angles.clone(),
                joints_cam: sample.joints_cam.clone(),
                camera: sample.camera.clone(),
            };
            fs::write(
                out_dir.join(&label_path),
                serde_json::to_string_pretty(&label)? + "\n",
            )?;
            records.push(SampleRecord {
                id,
                robot: sample.robot.clone(),
                recording,
                color_path,
                mask_path,
                label_path,
            });
        }
    }

    let ids: Vec<String> = records.iter().map(|r| r.id.clone()).collect();
    let splits = split_records(&ids, config.train_ratio, config.seed)?;
    let manifest =
        DatasetManifest { seed: config.seed, generator: config.clone(), records, splits };
    manifest.validate()?;
    fs::write(
        out_dir.join(MANIFEST_FILE),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;
    Ok(manifest)
}

/// A record loaded back from disk.
#[derive(Debug, Clone)]
pub struct LoadedSample {
    pub record: SampleRecord,
    pub color: ColorImage,
    pub mask: MaskImage,
    pub label: SampleLabel,
}

pub fn load_manifest(dataset_dir: &Path) -> Result<DatasetManifest> {
    let manifest: DatasetManifest =
        serde_json::from_str(&fs::read_to_string(dataset_dir.join(MANIFEST_FILE))?)?;
    manifest.validate()?;
    Ok(manifest)
}

/// Load all samples of one split ("train" or "test"), in manifest id order.
pub fn load_split(
    dataset_dir: &Path,
    manifest: &DatasetManifest,
    split: &str,
) -> Result<Vec<LoadedSample>> {
    let ids = match split {
        "train" => &manifest.splits.train,
        "test" => &manifest.splits.test,
        other => return Err(Error::Generator(format!("unknown split '{other}'"))),
    };
    if ids.is_empty() {
        return Err(Error::EmptyDataset(format!("split '{split}' has no samples")));
    }
    let by_id: std::collections::HashMap<&str, &SampleRecord> =
        manifest.records.iter().map(|r| (r.id.as_str(), r)).collect();
    ids.par_iter()
        .map(|id| {
            let record = *by_id
                .get(id.as_str())
                .ok_or_else(|| Error::Generator(format!("split id '{id}' not in records")))?;
            let color = ColorImage::load_png(&dataset_dir.join(&record.color_path))?;
            let mask = MaskImage::load_png(&dataset_dir.join(&record.mask_path))?;
            let label: SampleLabel =
                serde_json::from_str(&fs::read_to_string(dataset_dir.join(&record.label_path))?)?;
            Ok(LoadedSample { record: record.clone(), color, mask, label })
        })
        .collect()
}
