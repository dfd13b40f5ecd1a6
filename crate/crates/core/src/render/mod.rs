//! Eye-in-hand RGB-D synthesis by raycasting the analytic scene primitives.

mod camera;
mod color;
mod image;
mod noise;
mod raycast;

pub use camera::CameraIntrinsics;
pub use color::{hsv_to_rgb, hue_distance, rgb_to_hsv};
pub use image::{read_pnm, write_pgm16, write_pgm8, write_ppm, Pnm, RgbdImage};
pub use noise::{apply_depth_noise, DepthNoiseParams};
pub use raycast::{
    cast, intersect_block, intersect_peg, intersect_table, render, render_labeled, Hit, Label, Ray,
    RenderScene, RenderSettings,
};

#[derive(Debug, thiserror::Error)]
pub enum RenderError {
    #[error("point is behind the camera")]
    BehindCamera,
    #[error("invalid camera: {0}")]
    Invalid(String),
    #[error("image format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
