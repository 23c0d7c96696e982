//! Pinhole camera, synthetic rendering and dataset generation — the stand-in
//! for a calibrated RGB-D capture rig with robot self-filtering.

pub mod dataset;
pub mod image;
pub mod render;

pub use dataset::{
    generate_dataset, load_manifest, load_split, split_records, DatasetManifest, GeneratorConfig,
    LoadedSample, SampleLabel, SampleRecord, Splits, MANIFEST_FILE,
};
pub use image::{ColorImage, MaskImage};
pub use render::{render_sample, Background, RobotSample};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::KinematicChain;
use crate::math3d::{self, RigidTransform, Vec3};

/// Pinhole intrinsics plus the base→camera rigid transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
    /// Maps base-frame points into the camera frame.
    pub extrinsic: RigidTransform,
}

impl CameraModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(Error::InvalidCamera(format!("focal ({}, {}) must be positive", self.fx, self.fy)));
        }
        if !(self.cx >= 0.0 && self.cx < self.width as f64) || !(self.cy >= 0.0 && self.cy < self.height as f64) {
            return Err(Error::InvalidCamera(format!(
                "principal point ({}, {}) outside {}×{}",
                self.cx, self.cy, self.width, self.height
            )));
        }
        let err = self.extrinsic.orthonormality_error();
        if err > 1e-6 {
            return Err(Error::InvalidCamera(format!("rotation not orthonormal (error {err:.2e})")));
        }
        let d = math3d::det(&self.extrinsic.rotation);
        if (d - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidCamera(format!("rotation determinant {d}, expected +1")));
        }
        Ok(())
    }

    /// Camera placed at `eye` looking at `target`, world +z up.
    pub fn look_at(
        eye: Vec3,
        target: Vec3,
        fx: f64,
        fy: f64,
        width: usize,
        height: usize,
    ) -> Result<Self> {
        let forward = math3d::normalize(math3d::sub(target, eye))
            .ok_or_else(|| Error::InvalidCamera("eye coincides with target".into()))?;
        let up = if forward[2].abs() > 0.999 { [0.0, 1.0, 0.0] } else { [0.0, 0.0, 1.0] };
        let right = math3d::normalize(math3d::cross(forward, up))
            .ok_or_else(|| Error::InvalidCamera("degenerate view direction".into()))?;
        let down = math3d::cross(forward, right);
        let rotation = [right, down, forward];
        let translation = math3d::scale(math3d::mat_vec(&rotation, eye), -1.0);
        let camera = CameraModel {
            fx,
            fy,
            cx: width as f64 / 2.0,
            cy: height as f64 / 2.0,
            width,
            height,
            extrinsic: RigidTransform { rotation, translation },
        };
        camera.validate()?;
        Ok(camera)
    }

    /// Base frame → camera frame.
    pub fn to_camera(&self, p_base: Vec3) -> Vec3 {
        self.extrinsic.apply(p_base)
    }

    /// Pinhole projection of a camera-frame point to continuous pixel
    /// coordinates: `u = fx·x/z + cx`, `v = fy·y/z + cy`.
    pub fn project(&self, p_cam: Vec3) -> Result<(f64, f64)> {
        if p_cam[2] <= 0.0 {
            return Err(Error::BehindCamera { z: p_cam[2] });
        }
        Ok((self.fx * p_cam[0] / p_cam[2] + self.cx, self.fy * p_cam[1] / p_cam[2] + self.cy))
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        u >= 0.0 && u < self.width as f64 && v >= 0.0 && v < self.height as f64
    }

    /// Ray direction (camera frame, unit z) through the center of pixel
    /// `(x, y)`.
    pub fn pixel_ray(&self, x: usize, y: usize) -> Vec3 {
        [
            (x as f64 + 0.5 - self.cx) / self.fx,
            (y as f64 + 0.5 - self.cy) / self.fy,
            1.0,
        ]
    }
}

/// Distribution of per-recording camera poses: uniform azimuth, bounded
/// elevation, distance a uniform multiple of the chain reach, always looking
/// at a point a little above the robot base.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraPoseDistribution {
    pub distance_min: f64,
    pub distance_max: f64,
    pub elevation_min_deg: f64,
    pub elevation_max_deg: f64,
    /// fx = fy = focal_per_width · image width.
    pub focal_per_width: f64,
}

impl Default for CameraPoseDistribution {
    fn default() -> Self {
        Self {
            distance_min: 1.0,
            distance_max: 1.35,
            elevation_min_deg: 18.0,
            elevation_max_deg: 60.0,
            focal_per_width: 0.88,
        }
    }
}

impl CameraPoseDistribution {
    /// Draw one camera pose for `chain` rendered at `width`×`height`.
    pub fn sample(
        &self,
        chain: &KinematicChain,
        width: usize,
        height: usize,
        rng: &mut impl Rng,
    ) -> Result<CameraModel> {
        let reach = chain.reach();
        let target = [0.0, 0.0, 0.32 * reach];
        let azimuth = rng.gen_range(0.0..std::f64::consts::TAU);
        let elevation = rng
            .gen_range(self.elevation_min_deg.to_radians()..self.elevation_max_deg.to_radians());
        let dist = rng.gen_range(self.distance_min..self.distance_max) * reach;
        let dir = [
            elevation.cos() * azimuth.cos(),
            elevation.cos() * azimuth.sin(),
            elevation.sin(),
        ];
        let eye = math3d::add(target, math3d::scale(dir, dist));
        let fx = self.focal_per_width * width as f64;
        CameraModel::look_at(eye, target, fx, fx, width, height)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::preset;
    use rand::SeedableRng;

    fn plain_camera() -> CameraModel {
        CameraModel {
            fx: 100.0,
            fy: 100.0,
            cx: 50.0,
            cy: 50.0,
            width: 100,
            height: 100,
            extrinsic: RigidTransform::identity(),
        }
    }

    #[test]
    fn optical_axis_hits_principal_point() {
        let cam = plain_camera();
        assert_eq!(cam.project([0.0, 0.0, 1.0]).unwrap(), (50.0, 50.0));
    }

    #[test]
    fn projection_is_pinhole_arithmetic() {
        let cam = plain_camera();
        let (u, v) = cam.project([0.1, 0.2, 1.0]).unwrap();
        assert!((u - 60.0).abs() < 1e-12);
        assert!((v - 70.0).abs() < 1e-12);
    }

    #[test]
    fn negative_depth_is_rejected() {
        let cam = plain_camera();
        assert!(matches!(cam.project([0.0, 0.0, -1.0]), Err(Error::BehindCamera { .. })));
    }

    #[test]
    fn identity_extrinsic_keeps_points() {
        let cam = plain_camera();
        assert_eq!(cam.to_camera([0.3, -0.4, 0.9]), [0.3, -0.4, 0.9]);
    }

    #[test]
    fn pure_translation_extrinsic() {
        let mut cam = plain_camera();
        cam.extrinsic.translation = [0.0, 0.0, 2.0];
        assert_eq!(cam.to_camera([0.0, 0.0, 0.0]), [0.0, 0.0, 2.0]);
    }

    #[test]
    fn extrinsic_round_trip_through_inverse() {
        let chain = preset("ur5like").unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let cam = CameraPoseDistribution::default().sample(&chain, 128, 106, &mut rng).unwrap();
        let inv = cam.extrinsic.inverse();
        for p in [[0.0, 0.0, 0.0], [0.4, -0.3, 0.8], [-1.0, 2.0, 0.5]] {
            let q = inv.apply(cam.to_camera(p));
            for k in 0..3 {
                assert!((q[k] - p[k]).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn sampled_poses_look_at_the_robot() {
        let chain = preset("ur3like").unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let cam = CameraPoseDistribution::default().sample(&chain, 64, 53, &mut rng).unwrap();
            cam.validate().unwrap();
            // The look-at target projects to the principal point with z > 0.
            let target = [0.0, 0.0, 0.32 * chain.reach()];
            let p = cam.to_camera(target);
            assert!(p[2] > 0.0);
            let (u, v) = cam.project(p).unwrap();
            assert!((u - cam.cx).abs() < 1e-6);
            assert!((v - cam.cy).abs() < 1e-6);
        }
    }

    #[test]
    fn invalid_camera_parameters_are_rejected() {
        let mut cam = plain_camera();
        cam.fx = 0.0;
        assert!(cam.validate().is_err());
        let mut cam = plain_camera();
        cam.cx = 100.0;
        assert!(cam.validate().is_err());
        let mut cam = plain_camera();
        cam.extrinsic.rotation[0][0] = 2.0;
        assert!(cam.validate().is_err());
    }
}
