use serde::{Deserialize, Serialize};

use crate::augment::Plane;

/// Channel-major image with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageTensor {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub data: Vec<f32>,
}

impl ImageTensor {
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn channel(&self, c: usize) -> &[f32] {
        let n = self.width * self.height;
        &self.data[c * n..(c + 1) * n]
    }
}

/// Modality-masked observation; absent modalities are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    /// Gray channel first (when present), then depth.
    pub image: Option<ImageTensor>,
    /// Six joint angles mapped to `[-1, 1]` by their limits, then tip position in meters.
    pub proprio: Option<Vec<f32>>,
    /// Target minus tip, scaled.
    pub target: Option<[f32; 3]>,
}

impl Observation {
    /// Concatenation of the non-image features.
    pub fn vector(&self) -> Vec<f32> {
        let mut v = Vec::new();
        if let Some(p) = &self.proprio {
            v.extend_from_slice(p);
        }
        if let Some(t) = &self.target {
            v.extend_from_slice(t);
        }
        v
    }

    pub fn is_finite(&self) -> bool {
        let img = self.image.as_ref().is_none_or(|i| i.data.iter().all(|v| v.is_finite()));
        img && self.vector().iter().all(|v| v.is_finite())
    }
}

/// Box-filter by an integer factor.
pub(crate) fn downsample_mean(p: &Plane, factor: usize) -> Plane {
    if factor == 1 {
        return p.clone();
    }
    let (w, h) = (p.width / factor, p.height / factor);
    let norm = (factor * factor) as f32;
    let mut out = Plane::filled(w, h, 0.0);
    for y in 0..h {
        for x in 0..w {
            let mut sum = 0.0;
            for dy in 0..factor {
                let row = (y * factor + dy) * p.width + x * factor;
                sum += p.data[row..row + factor].iter().sum::<f32>();
            }
            out.data[y * w + x] = (sum / norm).round();
        }
    }
    out
}

/// Box-filter depth, averaging only valid (non-zero) samples.
pub(crate) fn downsample_depth(p: &Plane, factor: usize) -> Plane {
    if factor == 1 {
        return p.clone();
    }
    let (w, h) = (p.width / factor, p.height / factor);
    let mut out = Plane::filled(w, h, 0.0);
    for y in 0..h {
        for x in 0..w {
            let (mut sum, mut n) = (0.0f32, 0u32);
            for dy in 0..factor {
                let row = (y * factor + dy) * p.width + x * factor;
                for v in &p.data[row..row + factor] {
                    if *v > 0.0 {
                        sum += v;
                        n += 1;
                    }
                }
            }
            out.data[y * w + x] = if n == 0 { 0.0 } else { sum / n as f32 };
        }
    }
    out
}
