use serde::{Deserialize, Serialize};

use crate::env::HsvRange;
use crate::render::{hue_distance, rgb_to_hsv};

/// HSV target with per-channel tolerances; hue in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SegmentationParams {
    pub hsv_center: [f64; 3],
    pub hsv_tolerance: [f64; 3],
    /// Connected components smaller than this many pixels are dropped.
    pub min_area: usize,
}

impl Default for SegmentationParams {
    fn default() -> Self {
        Self::from_range(&crate::env::ColorRanges::default().block, 0.85)
    }
}

impl SegmentationParams {
    /// Accept every color the range can produce under shading that darkens value
    /// by at most `max_shading` (fraction of the lit value).
    pub fn from_range(range: &HsvRange, max_shading: f64) -> Self {
        let [hlo, hhi] = range.hue;
        let span = if hhi >= hlo { hhi - hlo } else { hhi + 360.0 - hlo };
        let mid = |r: [f64; 2]| 0.5 * (r[0] + r[1]);
        let half = |r: [f64; 2]| 0.5 * (r[1] - r[0]);
        let v_lo = range.value[0] * (1.0 - max_shading);
        let v_hi = range.value[1];
        Self {
            hsv_center: [(hlo + 0.5 * span).rem_euclid(360.0), mid(range.saturation), 0.5 * (v_lo + v_hi)],
            // margins absorb 8-bit rounding of dark shaded pixels
            hsv_tolerance: [0.5 * span + 6.0, half(range.saturation) + 0.08, 0.5 * (v_hi - v_lo) + 0.01],
            min_area: 20,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.hsv_tolerance.iter().any(|t| !(*t >= 0.0)) {
            return Err("segmentation.hsv_tolerance: must be non-negative".into());
        }
        Ok(())
    }

    pub fn matches(&self, rgb: [u8; 3]) -> bool {
        let [h, s, v] = rgb_to_hsv(rgb);
        let [hc, sc, vc] = self.hsv_center;
        let [ht, st, vt] = self.hsv_tolerance;
        hue_distance(h, hc) <= ht && (s - sc).abs() <= st && (v - vc).abs() <= vt
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    pub width: usize,
    pub height: usize,
    pub data: Vec<bool>,
}

impl Mask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![false; width * height],
        }
    }

    pub fn get(&self, u: usize, v: usize) -> bool {
        self.data[v * self.width + u]
    }

    pub fn set(&mut self, u: usize, v: usize, value: bool) {
        self.data[v * self.width + u] = value;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|m| **m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|m| *m)
    }

    /// Intersection over union; two empty masks score 1.
    pub fn iou(&self, other: &Mask) -> f64 {
        let (mut inter, mut union) = (0usize, 0usize);
        for (a, b) in self.data.iter().zip(&other.data) {
            inter += usize::from(*a && *b);
            union += usize::from(*a || *b);
        }
        if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        }
    }

    /// Clear 4-connected components with fewer than `min_area` pixels.
    pub fn remove_small_components(&mut self, min_area: usize) {
        let (w, h) = (self.width, self.height);
        let mut seen = vec![false; w * h];
        let mut stack = Vec::new();
        let mut component = Vec::new();
        for start in 0..w * h {
            if !self.data[start] || seen[start] {
                continue;
            }
            component.clear();
            stack.push(start);
            seen[start] = true;
            while let Some(i) = stack.pop() {
                component.push(i);
                let (u, v) = (i % w, i / w);
                let mut visit = |j: usize| {
                    if self.data[j] && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                };
                if u > 0 {
                    visit(i - 1);
                }
                if u + 1 < w {
                    visit(i + 1);
                }
                if v > 0 {
                    visit(i - w);
                }
                if v + 1 < h {
                    visit(i + w);
                }
            }
            if component.len() < min_area {
                for i in &component {
                    self.data[*i] = false;
                }
            }
        }
    }
}

/// Pixels whose HSV lies within tolerance of the target color, minus small blobs.
pub fn segment_block(width: usize, height: usize, rgb: &[u8], params: &SegmentationParams) -> Mask {
    assert_eq!(rgb.len(), width * height * 3, "rgb buffer does not match dimensions");
    let mut mask = Mask {
        width,
        height,
        data: rgb.chunks_exact(3).map(|p| params.matches([p[0], p[1], p[2]])).collect(),
    };
    mask.remove_small_components(params.min_area);
    mask
}
