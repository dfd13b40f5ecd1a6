//! Seeded image augmentations for the grayscale and depth channels.
//!
//! Every op maps a [`Plane`] to a plane of identical dimensions and clamps the
//! result to the channel's valid range. Gray planes hold integer values in
//! `[0, 255]`; depth planes hold meters in `[0, max]` with 0 marking invalid.

mod histogram;
mod jpeg;
mod ops;
mod pipeline;
mod sheet;

pub use histogram::{clahe, hist_eq};
pub use jpeg::{jpeg_artifacts, quantization_table};
pub use ops::{
    blur, brightness_contrast, coarse_dropout, filter2d, gaussian_kernel, motion_kernel, noise,
    solarize, threshold_dilate, to_grayscale, BlurKind, DropoutKind, FilterKind, NoiseKind,
};
pub use pipeline::{apply_pipeline, AugOp, AugSpec, AugStep, ChannelKind, FloatRange, IntRange};
pub use sheet::{contact_sheet, preview_tiles};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AugError {
    #[error("op `{op}` is not registered for the {channel:?} channel")]
    UnknownOp { op: String, channel: ChannelKind },
    #[error("spec is for the {spec:?} channel but the image is {image:?}")]
    ChannelMismatch { spec: ChannelKind, image: ChannelKind },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("dimension mismatch: {0}")]
    Dimensions(String),
}

/// Value range and rounding rule of an image channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Channel {
    Gray,
    Depth { max: f32 },
}

impl Channel {
    pub fn kind(&self) -> ChannelKind {
        match self {
            Channel::Gray => ChannelKind::Gray,
            Channel::Depth { .. } => ChannelKind::Depth,
        }
    }

    pub fn max(&self) -> f32 {
        match self {
            Channel::Gray => 255.0,
            Channel::Depth { max } => *max,
        }
    }

    /// Clamp to the valid range; gray values are also rounded to integers.
    #[inline]
    pub fn finish(&self, v: f32) -> f32 {
        match self {
            Channel::Gray => v.round().clamp(0.0, 255.0),
            Channel::Depth { max } => {
                if v.is_nan() {
                    0.0
                } else {
                    v.clamp(0.0, *max)
                }
            }
        }
    }
}

/// Single-channel image, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f32>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self, AugError> {
        if data.len() != width * height {
            return Err(AugError::Dimensions(format!(
                "{} values for a {width}×{height} plane",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: f32) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    /// Replicate-padded read.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f32 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.data[y * self.width + x]
    }

    pub fn map(&self, f: impl Fn(f32) -> f32) -> Plane {
        Plane {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|v| f(*v)).collect(),
        }
    }

    pub fn to_u8(&self) -> Vec<u8> {
        self.data.iter().map(|v| v.round().clamp(0.0, 255.0) as u8).collect()
    }

    pub fn from_u8(width: usize, height: usize, data: &[u8]) -> Self {
        Self {
            width,
            height,
            data: data.iter().map(|v| f32::from(*v)).collect(),
        }
    }
}
