//! Synthetic sample rendering: capsule-link robot over a varying background,
//! plus the exact mask and camera-frame joint coordinates that a calibrated
//! capture rig with robot self-filtering would produce.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::image::{ColorImage, MaskImage};
use super::CameraModel;
use crate::error::{Error, RejectReason, Result};
use crate::kinematics::{forward_kinematics, JointConfig, KinematicChain};
use crate::math3d::{self, Vec3};

/// Foreground-fraction gate for generated samples.
pub const FG_FRACTION_MIN: f64 = 0.02;
pub const FG_FRACTION_MAX: f64 = 0.30;

/// One dataset record, fully in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotSample {
    pub color: ColorImage,
    pub mask: MaskImage,
    pub angles: JointConfig,
    /// Camera-frame 3D positions: base, joint origins, end-effector.
    pub joints_cam: Vec<Vec3>,
    pub camera: CameraModel,
    /// Robot-family tag.
    pub robot: String,
}

/// Where background pixels come from.
#[derive(Debug, Clone)]
pub enum Background {
    /// Two-octave value noise, seeded per sample.
    Procedural,
    /// User-supplied images; one is picked per sample.
    Images(Vec<ColorImage>),
}

impl Background {
    fn fill(&self, width: usize, height: usize, rng: &mut ChaCha8Rng) -> ColorImage {
        match self {
            Background::Procedural => value_noise(width, height, rng),
            Background::Images(pool) => {
                let pick = rng.gen_range(0..pool.len());
                pool[pick].resize(width, height)
            }
        }
    }
}

/// Smooth random RGB field: bilinear-interpolated random lattices at a coarse
/// and a fine scale.
fn value_noise(width: usize, height: usize, rng: &mut ChaCha8Rng) -> ColorImage {
    let coarse = random_lattice(6, 5, rng);
    let fine = random_lattice(18, 15, rng);
    let mut img = ColorImage::new(width, height);
    for y in 0..height {
        for x in 0..width {
            let u = x as f64 / width as f64;
            let v = y as f64 / height as f64;
            let a = sample_lattice(&coarse, 6, 5, u, v);
            let b = sample_lattice(&fine, 18, 15, u, v);
            img.set_pixel(x, y, [
                (0.72 * a[0] + 0.28 * b[0]) as f32,
                (0.72 * a[1] + 0.28 * b[1]) as f32,
                (0.72 * a[2] + 0.28 * b[2]) as f32,
            ]);
        }
    }
    img
}

fn random_lattice(nx: usize, ny: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 3]> {
    (0..nx * ny).map(|_| [rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()]).collect()
}

fn sample_lattice(lattice: &[[f64; 3]], nx: usize, ny: usize, u: f64, v: f64) -> [f64; 3] {
    let fx = u * (nx - 1) as f64;
    let fy = v * (ny - 1) as f64;
    let (x0, y0) = (fx.floor() as usize, fy.floor() as usize);
    let (x1, y1) = ((x0 + 1).min(nx - 1), (y0 + 1).min(ny - 1));
    let (tx, ty) = (fx - x0 as f64, fy - y0 as f64);
    let mut out = [0.0; 3];
    for c in 0..3 {
        let top = lattice[y0 * nx + x0][c] * (1.0 - tx) + lattice[y0 * nx + x1][c] * tx;
        let bot = lattice[y1 * nx + x0][c] * (1.0 - tx) + lattice[y1 * nx + x1][c] * tx;
        out[c] = top * (1.0 - ty) + bot * ty;
    }
    out
}

const ROBOT_BASE_RGB: [f64; 3] = [0.62, 0.64, 0.68];

/// Render one sample: capsule-union mask, shaded color image, camera-frame
/// joints. Deterministic in all inputs; `seed` drives only the background and
/// the per-sample hue jitter.
///
/// Fails with [`Error::SampleRejected`] when a joint projects outside the
/// image or the mask falls outside the foreground gate; the caller is
/// expected to pick a different camera pose or drop the configuration.
pub fn render_sample(
    chain: &KinematicChain,
    config: &JointConfig,
    camera: &CameraModel,
    background: &Background,
    seed: u64,
) -> Result<RobotSample> {
    let points_base = forward_kinematics(chain, config)?;
    let joints_cam: Vec<Vec3> = points_base.iter().map(|&p| camera.to_camera(p)).collect();

    for (i, &p) in joints_cam.iter().enumerate() {
        if p[2] <= 0.0 {
            return Err(Error::SampleRejected(RejectReason::JointOutsideImage {
                joint: i,
                u: f64::NAN,
                v: f64::NAN,
            }));
        }
        let (u, v) = camera.project(p)?;
        if !camera.contains(u, v) {
            return Err(Error::SampleRejected(RejectReason::JointOutsideImage { joint: i, u, v }));
        }
    }

    let (width, height) = (camera.width, camera.height);
    let mut mask = MaskImage::new(width, height);
    let mut depth = vec![f64::INFINITY; width * height];
    let mut owner = vec![usize::MAX; width * height];
    let mut lateral = vec![0.0f64; width * height];

    // Rasterize each link capsule inside its projected bounding box; the
    // nearest link owns the pixel.
    for (link, seg) in joints_cam.windows(2).enumerate() {
        let (a, b) = (seg[0], seg[1]);
        let (ua, va) = camera.project(a)?;
        let (ub, vb) = camera.project(b)?;
        // Conservative pixel margin for the capsule radius at the nearest depth.
        let z_near = a[2].min(b[2]);
        let margin = (chain.link_radius / z_near * camera.fx.max(camera.fy)).ceil() + 1.0;
        let x0 = ((ua.min(ub) - margin).floor().max(0.0)) as usize;
        let x1 = ((ua.max(ub) + margin).ceil().min(width as f64 - 1.0)) as usize;
        let y0 = ((va.min(vb) - margin).floor().max(0.0)) as usize;
        let y1 = ((va.max(vb) + margin).ceil().min(height as f64 - 1.0)) as usize;
        for y in y0..=y1 {
            for x in x0..=x1 {
                let ray = camera.pixel_ray(x, y);
                let (dist, t) = math3d::ray_segment_distance([0.0; 3], ray, a, b);
                if dist < chain.link_radius {
                    mask.set(x, y, 1);
                    let i = y * width + x;
                    if t < depth[i] {
                        depth[i] = t;
                        owner[i] = link;
                        lateral[i] = dist / chain.link_radius;
                    }
                }
            }
        }
    }

    let fraction = mask.foreground_fraction();
    if !(FG_FRACTION_MIN..=FG_FRACTION_MAX).contains(&fraction) {
        return Err(Error::SampleRejected(RejectReason::ForegroundFraction { fraction }));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut color = background.fill(width, height, &mut rng);
    let jitter = [
        rng.gen_range(-0.08..0.08),
        rng.gen_range(-0.08..0.08),
        rng.gen_range(-0.08..0.08),
    ];

    // Depth range over robot pixels, for the shading ramp.
    let (mut z_min, mut z_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for (&m, &z) in mask.data.iter().zip(&depth) {
        if m == 1 {
            z_min = z_min.min(z);
            z_max = z_max.max(z);
        }
    }
    let z_span = (z_max - z_min).max(1e-9);

    for y in 0..height {
        for x in 0..width {
            if mask.get(x, y) == 1 {
                let i = y * width + x;
                // Depth ramp plus a cylindrical falloff toward the capsule
                // silhouette, so links read as lit 3D bodies.
                let shade = (1.0 - 0.40 * (depth[i] - z_min) / z_span)
                    * (1.0 - 0.45 * lateral[i] * lateral[i]);
                // Alternating per-link brightness keeps the articulation
                // visible on the otherwise flat body.
                let tint = if owner[i] % 2 == 0 { 1.08 } else { 0.92 };
                let rgb = [
                    ((ROBOT_BASE_RGB[0] + jitter[0]) * shade * tint).clamp(0.0, 1.0) as f32,
                    ((ROBOT_BASE_RGB[1] + jitter[1]) * shade * tint).clamp(0.0, 1.0) as f32,
                    ((ROBOT_BASE_RGB[2] + jitter[2]) * shade * tint).clamp(0.0, 1.0) as f32,
                ];
                color.set_pixel(x, y, rgb);
            }
        }
    }

    Ok(RobotSample {
        color,
        mask,
        angles: config.clone(),
        joints_cam,
        camera: camera.clone(),
        robot: chain.name.clone(),
    })
}
