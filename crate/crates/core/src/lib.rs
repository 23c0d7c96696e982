//! Perception of robot arms from a single color image.
//!
//! The crate covers the full loop needed to train and evaluate a two-stage
//! perception cascade without any camera/robot calibration at inference time:
//!
//! - [`kinematics`]: articulated chains, forward kinematics, configuration
//!   sweeps and self-collision filtering — the source of ground truth.
//! - [`scene`]: pinhole cameras, synthetic rendering of robot + background,
//!   dataset generation and on-disk layout.
//! - [`nn`]: a minimal tensor/layer/optimizer substrate with a verifiable
//!   gradient contract and an on-disk checkpoint format.
//! - [`masknet`]: stage 1, per-pixel robot-body classification trained with a
//!   class-balanced cross entropy.
//! - [`jointnet`]: stage 2, regression of 3D joint coordinates from a masked
//!   color image.
//! - [`pipeline`]: the full cascade, the three evaluation protocols and
//!   report/visualization output.

pub mod error;
pub mod jointnet;
pub mod kinematics;
pub mod masknet;
pub mod math3d;
pub mod nn;
pub mod pipeline;
pub mod scene;

pub use error::{Error, Result};
