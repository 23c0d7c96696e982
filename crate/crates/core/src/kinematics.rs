//! Articulated revolute chains: forward kinematics, configuration sweeps and
//! self-collision filtering.
//!
//! A chain is an ordered list of revolute joints. Joint `j` rotates about its
//! `axis` (expressed in the parent frame) and is followed by a rigid link
//! `offset` to the next joint, so the pose update per joint is
//! `T_j = T_{j-1} · Rot(axis_j, θ_j) · Trans(offset_j)`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math3d::{self, Vec3};

/// One revolute joint: rotation axis, the link that follows it, and limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointSpec {
    /// Unit rotation axis in the parent frame.
    pub axis: Vec3,
    /// Translation from this joint to the next (the link body), meters.
    pub offset: Vec3,
    /// Lower angle limit, radians.
    pub limit_lo: f64,
    /// Upper angle limit, radians.
    pub limit_hi: f64,
}

impl JointSpec {
    pub fn range(&self) -> f64 {
        self.limit_hi - self.limit_lo
    }

    fn validate(&self, index: usize) -> Result<()> {
        let n = math3d::norm(self.axis);
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidChain(format!(
                "joint {index} axis has norm {n}, expected a unit vector"
            )));
        }
        if !(self.limit_lo <= self.limit_hi) {
            return Err(Error::InvalidChain(format!(
                "joint {index} limits [{}, {}] are inverted",
                self.limit_lo, self.limit_hi
            )));
        }
        if !self.offset.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidChain(format!("joint {index} offset is not finite")));
        }
        Ok(())
    }
}

/// An ordered revolute-joint arm model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KinematicChain {
    /// Robot-family tag, e.g. "ur5like".
    pub name: String,
    /// Base-to-tip joint list.
    pub joints: Vec<JointSpec>,
    /// Capsule radius used for rendering and collision tests, meters.
    pub link_radius: f64,
    /// Uniform size factor already applied to offsets and radius.
    pub scale: f64,
}

impl KinematicChain {
    /// Validate invariants; call after constructing or deserializing.
    pub fn validate(&self) -> Result<()> {
        if self.joints.len() < 2 {
            return Err(Error::InvalidChain(format!(
                "chain '{}' has {} joints, need at least 2",
                self.name,
                self.joints.len()
            )));
        }
        if !(self.scale > 0.0) {
            return Err(Error::InvalidChain(format!("scale {} must be positive", self.scale)));
        }
        if !(self.link_radius > 0.0 && self.link_radius.is_finite()) {
            return Err(Error::InvalidChain(format!("link_radius {} invalid", self.link_radius)));
        }
        for (i, j) in self.joints.iter().enumerate() {
            j.validate(i)?;
        }
        Ok(())
    }

    pub fn n_joints(&self) -> usize {
        self.joints.len()
    }

    /// Upper bound on the distance of any chain point from the base.
    pub fn reach(&self) -> f64 {
        self.joints.iter().map(|j| math3d::norm(j.offset)).sum()
    }

    /// The all-midpoint configuration (straight arm for symmetric limits).
    pub fn home_configuration(&self) -> JointConfig {
        JointConfig {
            angles: self.joints.iter().map(|j| 0.5 * (j.limit_lo + j.limit_hi)).collect(),
        }
    }

    /// Load a chain from a JSON document (fields mirror this type).
    pub fn from_json(text: &str) -> Result<Self> {
        let chain: KinematicChain = serde_json::from_str(text)?;
        chain.validate()?;
        Ok(chain)
    }
}

/// A full set of joint angles for one chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointConfig {
    /// One angle per joint, radians.
    pub angles: Vec<f64>,
}

impl JointConfig {
    pub fn new(angles: Vec<f64>) -> Self {
        Self { angles }
    }

    /// Check length and limits against `chain`.
    pub fn validate_for(&self, chain: &KinematicChain) -> Result<()> {
        if self.angles.len() != chain.joints.len() {
            return Err(Error::ConfigLength {
                got: self.angles.len(),
                expected: chain.joints.len(),
            });
        }
        for (i, (&a, j)) in self.angles.iter().zip(&chain.joints).enumerate() {
            if a < j.limit_lo - 1e-12 || a > j.limit_hi + 1e-12 {
                return Err(Error::LimitViolation {
                    joint: i,
                    angle: a,
                    lo: j.limit_lo,
                    hi: j.limit_hi,
                });
            }
        }
        Ok(())
    }
}

/// Base-frame positions of the base, every joint origin and the end-effector:
/// `n_joints + 1` points, with `points[0]` always the origin.
pub fn forward_kinematics(chain: &KinematicChain, config: &JointConfig) -> Result<Vec<Vec3>> {
    config.validate_for(chain)?;
    let mut points = Vec::with_capacity(chain.joints.len() + 1);
    let mut pose = math3d::RigidTransform::identity();
    points.push(pose.translation);
    for (joint, &angle) in chain.joints.iter().zip(&config.angles) {
        let rot = math3d::RigidTransform {
            rotation: math3d::rotation_about_axis(joint.axis, angle),
            translation: [0.0; 3],
        };
        let link = math3d::RigidTransform {
            rotation: math3d::IDENTITY,
            translation: joint.offset,
        };
        pose = pose.compose(&rot).compose(&link);
        points.push(pose.translation);
    }
    Ok(points)
}

/// Centered grid of angles for one joint: `floor(range/step) + 1` values,
/// spaced `step` apart, symmetric inside the limits. A step larger than the
/// range yields the single midpoint.
fn joint_grid(joint: &JointSpec, step: f64) -> Vec<f64> {
    let range = joint.range();
    let n = (range / step + 1e-9).floor() as usize + 1;
    let span = (n - 1) as f64 * step;
    let start = joint.limit_lo + 0.5 * (range - span);
    (0..n).map(|i| start + i as f64 * step).collect()
}

/// Grid sweep over all joint ranges, deterministically permuted by `seed`.
///
/// The grid is built with nested loops (outermost = base joint); `seed` then
/// fixes a shuffle of the enumeration order so truncated prefixes of the
/// result cover the workspace evenly.
pub fn sweep_configurations(
    chain: &KinematicChain,
    step: f64,
    seed: u64,
) -> Result<Vec<JointConfig>> {
    if !(step > 0.0) {
        return Err(Error::InvalidChain(format!("sweep step {step} must be positive")));
    }
    let grids: Vec<Vec<f64>> = chain.joints.iter().map(|j| joint_grid(j, step)).collect();
    let total: usize = grids.iter().map(|g| g.len()).product();
    let mut configs = Vec::with_capacity(total);
    let mut angles = vec![0.0; grids.len()];
    enumerate_grid(&grids, 0, &mut angles, &mut configs);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    configs.shuffle(&mut rng);
    Ok(configs)
}

fn enumerate_grid(
    grids: &[Vec<f64>],
    depth: usize,
    angles: &mut [f64],
    out: &mut Vec<JointConfig>,
) {
    if depth == grids.len() {
        out.push(JointConfig::new(angles.to_vec()));
        return;
    }
    for &a in &grids[depth] {
        angles[depth] = a;
        enumerate_grid(grids, depth + 1, angles, out);
    }
}

/// Self-collision test over the link capsules of a posed chain.
///
/// Consecutive capsules touch at every joint by construction, so segments
/// are trimmed before the distance test: adjacent links lose `2·link_radius`
/// at the shared joint (a straight or right-angle elbow passes, a fold-back
/// where the links overlap along their length is rejected), and all other
/// pairs are compared between capsule cores (each segment shortened by
/// `link_radius` at both ends). Pairs whose trimmed segment vanishes are
/// skipped — links that short cannot fold onto each other. Returns `true`
/// when the configuration is accepted.
pub fn validate_configuration(chain: &KinematicChain, config: &JointConfig) -> Result<bool> {
    let points = forward_kinematics(chain, config)?;
    let r = chain.link_radius;
    let threshold = 2.0 * r;
    let n = points.len() - 1; // number of link segments
    for i in 0..n {
        for j in (i + 1)..n {
            let (a0, a1) = (points[i], points[i + 1]);
            let (b0, b1) = (points[j], points[j + 1]);
            let pair = if j == i + 1 {
                // Shared joint at points[j]: trim both sides away from it.
                match (trim_segment(a1, a0, threshold), trim_segment(b0, b1, threshold)) {
                    (Some(a), Some(b)) => Some((a, b)),
                    _ => None,
                }
            } else {
                match (core_segment(a0, a1, r), core_segment(b0, b1, r)) {
                    (Some(a), Some(b)) => Some((a, b)),
                    _ => None,
                }
            };
            let Some(((a0, a1), (b0, b1))) = pair else { continue };
            if math3d::segment_segment_distance(a0, a1, b0, b1) < threshold {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Shorten the segment by `cut` on the `from` end; `None` if it vanishes.
fn trim_segment(from: Vec3, to: Vec3, cut: f64) -> Option<(Vec3, Vec3)> {
    let len = math3d::norm(math3d::sub(to, from));
    if len <= cut + 1e-12 {
        return None;
    }
    let dir = math3d::scale(math3d::sub(to, from), 1.0 / len);
    Some((math3d::add(from, math3d::scale(dir, cut)), to))
}

/// The capsule core: the segment shortened by `cut` at both ends.
fn core_segment(a: Vec3, b: Vec3, cut: f64) -> Option<(Vec3, Vec3)> {
    let len = math3d::norm(math3d::sub(b, a));
    if len <= 2.0 * cut + 1e-12 {
        return None;
    }
    let dir = math3d::scale(math3d::sub(b, a), 1.0 / len);
    Some((math3d::add(a, math3d::scale(dir, cut)), math3d::sub(b, math3d::scale(dir, cut))))
}

/// Canonical six-joint arm geometry shared by the built-in presets.
///
/// Limits are intentionally distinct per joint so sweep grids grow in fine
/// steps; links are deliberately thick so the rendered body occupies a
/// realistic share of the image at the default framing.
fn canonical_joints() -> Vec<JointSpec> {
    let pi = std::f64::consts::PI;
    vec![
        JointSpec { axis: [0.0, 0.0, 1.0], offset: [0.0, 0.0, 0.52], limit_lo: -pi, limit_hi: pi },
        JointSpec { axis: [0.0, 1.0, 0.0], offset: [0.0, 0.0, 0.56], limit_lo: -1.8, limit_hi: 1.8 },
        JointSpec { axis: [0.0, 1.0, 0.0], offset: [0.0, 0.0, 0.54], limit_lo: -2.0, limit_hi: 2.0 },
        JointSpec { axis: [0.0, 1.0, 0.0], offset: [0.0, 0.0, 0.52], limit_lo: -1.5, limit_hi: 1.5 },
        JointSpec { axis: [0.0, 0.0, 1.0], offset: [0.0, 0.0, 0.50], limit_lo: -2.7, limit_hi: 2.7 },
        JointSpec { axis: [0.0, 1.0, 0.0], offset: [0.0, 0.0, 0.50], limit_lo: -1.2, limit_hi: 1.2 },
    ]
}

const CANONICAL_LINK_RADIUS: f64 = 0.36;

/// Built-in presets: same geometry, different size.
pub fn preset(name: &str) -> Option<KinematicChain> {
    let scale = match name {
        "ur3like" => 0.5,
        "ur5like" => 0.85,
        "ur10like" => 1.3,
        _ => return None,
    };
    let joints = canonical_joints()
        .into_iter()
        .map(|j| JointSpec { offset: math3d::scale(j.offset, scale), ..j })
        .collect();
    Some(KinematicChain {
        name: name.to_string(),
        joints,
        link_radius: CANONICAL_LINK_RADIUS * scale,
        scale,
    })
}

pub const PRESET_NAMES: [&str; 3] = ["ur3like", "ur5like", "ur10like"];
