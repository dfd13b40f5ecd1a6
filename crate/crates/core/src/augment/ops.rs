use rand::Rng;
use rand_distr::StandardNormal;

use super::{AugError, Channel, Plane};

/// Rec. 601 luma, rounded.
pub fn to_grayscale(width: usize, height: usize, rgb: &[u8]) -> Result<Plane, AugError> {
    if rgb.len() != width * height * 3 {
        return Err(AugError::Dimensions(format!(
            "{} bytes for a {width}×{height} rgb image",
            rgb.len()
        )));
    }
    let data = rgb
        .chunks_exact(3)
        .map(|p| {
            let y = 0.299 * f64::from(p[0]) + 0.587 * f64::from(p[1]) + 0.114 * f64::from(p[2]);
            y.round() as f32
        })
        .collect();
    Plane::new(width, height, data)
}

/// `out = α·(in − 128) + 128 + β` in gray units; depth uses the range midpoint.
pub fn brightness_contrast(img: &Plane, ch: Channel, alpha: f32, beta: f32) -> Plane {
    let mid = ch.max() * (128.0 / 255.0);
    let beta = beta * ch.max() / 255.0;
    // expanded so that α = 1, β = 0 is exact in floating point
    img.map(|v| ch.finish(alpha * v + ((1.0 - alpha) * mid + beta)))
}

pub fn solarize(img: &Plane, ch: Channel, threshold: f32) -> Plane {
    let max = ch.max();
    img.map(|v| ch.finish(if v >= threshold { max - v } else { v }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlurKind {
    Gaussian { size: usize },
    Motion { size: usize, angle: f64 },
    Median { size: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterKind {
    Emboss,
    Sharpen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    Gaussian,
    Multiplicative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropoutKind {
    Salt,
    Pepper,
}

fn check_odd(size: usize) -> Result<(), AugError> {
    if size == 0 || size % 2 == 0 {
        return Err(AugError::Parameter(format!("kernel size {size} must be odd and positive")));
    }
    Ok(())
}

/// Normalized 1-D Gaussian with σ = size / 6.
pub fn gaussian_kernel(size: usize) -> Vec<f64> {
    let sigma = size as f64 / 6.0;
    let c = (size as f64 - 1.0) / 2.0;
    let w: Vec<f64> = (0..size)
        .map(|i| {
            let x = i as f64 - c;
            (-x * x / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|v| v / s).collect()
}

/// Normalized `size × size` one-pixel-wide line through the center at `angle`.
pub fn motion_kernel(size: usize, angle: f64) -> Vec<f64> {
    let mut k = vec![0.0; size * size];
    let c = (size as f64 - 1.0) / 2.0;
    let (s, co) = angle.sin_cos();
    let samples = 4 * size;
    for i in 0..=samples {
        let t = -c + 2.0 * c * (i as f64) / (samples as f64);
        let x = (c + t * co).round() as usize;
        let y = (c + t * s).round() as usize;
        k[y.min(size - 1) * size + x.min(size - 1)] = 1.0;
    }
    let sum: f64 = k.iter().sum();
    k.into_iter().map(|v| v / sum).collect()
}

/// Replicate-padded 2-D correlation, returning unclamped values.
fn correlate(img: &Plane, kernel: &[f64], kw: usize, kh: usize) -> Vec<f64> {
    let (rx, ry) = ((kw / 2) as isize, (kh / 2) as isize);
    let mut out = Vec::with_capacity(img.data.len());
    for y in 0..img.height as isize {
        for x in 0..img.width as isize {
            let mut acc = 0.0;
            for ky in 0..kh as isize {
                for kx in 0..kw as isize {
                    let w = kernel[(ky * kw as isize + kx) as usize];
                    if w != 0.0 {
                        acc += w * f64::from(img.get_clamped(x + kx - rx, y + ky - ry));
                    }
                }
            }
            out.push(acc);
        }
    }
    out
}

fn finish_all(img: &Plane, ch: Channel, values: impl IntoIterator<Item = f64>) -> Plane {
    Plane {
        width: img.width,
        height: img.height,
        data: values.into_iter().map(|v| ch.finish(v as f32)).collect(),
    }
}

pub fn blur(img: &Plane, ch: Channel, kind: BlurKind) -> Result<Plane, AugError> {
    match kind {
        BlurKind::Gaussian { size } => {
            check_odd(size)?;
            let k = gaussian_kernel(size);
            let horizontal = correlate(img, &k, size, 1);
            let tmp = Plane {
                width: img.width,
                height: img.height,
                data: horizontal.iter().map(|v| *v as f32).collect(),
            };
            // second pass reads the first pass at f32; keep it exact for the DC case
            let vertical = correlate(&tmp, &k, 1, size);
            Ok(finish_all(img, ch, vertical))
        }
        BlurKind::Motion { size, angle } => {
            check_odd(size)?;
            let k = motion_kernel(size, angle);
            Ok(finish_all(img, ch, correlate(img, &k, size, size)))
        }
        BlurKind::Median { size } => {
            check_odd(size)?;
            let r = (size / 2) as isize;
            let mut window = Vec::with_capacity(size * size);
            let mut data = Vec::with_capacity(img.data.len());
            for y in 0..img.height as isize {
                for x in 0..img.width as isize {
                    window.clear();
                    for dy in -r..=r {
                        for dx in -r..=r {
                            window.push(img.get_clamped(x + dx, y + dy));
                        }
                    }
                    let mid = window.len() / 2;
                    let (_, m, _) = window.select_nth_unstable_by(mid, |a, b| a.total_cmp(b));
                    data.push(ch.finish(*m));
                }
            }
            Ok(Plane {
                width: img.width,
                height: img.height,
                data,
            })
        }
    }
}

const SHARPEN: [f64; 9] = [0.0, -1.0, 0.0, -1.0, 5.0, -1.0, 0.0, -1.0, 0.0];
const EMBOSS: [f64; 9] = [-2.0, -1.0, 0.0, -1.0, 1.0, 1.0, 0.0, 1.0, 2.0];

/// Fixed 3×3 kernels. Emboss adds 128 gray levels (scaled to the channel range).
pub fn filter2d(img: &Plane, ch: Channel, kind: FilterKind) -> Plane {
    match kind {
        FilterKind::Sharpen => finish_all(img, ch, correlate(img, &SHARPEN, 3, 3)),
        FilterKind::Emboss => {
            let offset = f64::from(ch.max()) * 128.0 / 255.0;
            let vals = correlate(img, &EMBOSS, 3, 3);
            finish_all(img, ch, vals.into_iter().map(|v| v + offset))
        }
    }
}

/// Per-pixel i.i.d. noise; one normal draw per pixel in row-major order.
pub fn noise<R: Rng + ?Sized>(img: &Plane, ch: Channel, kind: NoiseKind, sigma: f32, rng: &mut R) -> Plane {
    let data = img
        .data
        .iter()
        .map(|&v| {
            let n: f32 = rng.sample(StandardNormal);
            let out = match kind {
                NoiseKind::Gaussian => v + sigma * n,
                NoiseKind::Multiplicative => v * (1.0 + sigma * n),
            };
            ch.finish(out)
        })
        .collect();
    Plane {
        width: img.width,
        height: img.height,
        data,
    }
}

/// Pixels farther than `threshold` become invalid; the newly invalidated mask is
/// then dilated by a Euclidean disc (radius 1 is the plus shape).
pub fn threshold_dilate(img: &Plane, threshold: f32, radius: usize) -> Plane {
    let (w, h) = (img.width, img.height);
    let mask: Vec<bool> = img.data.iter().map(|v| *v > threshold).collect();
    let r = radius as isize;
    let mut out = img.clone();
    for y in 0..h as isize {
        for x in 0..w as isize {
            if !mask[y as usize * w + x as usize] {
                continue;
            }
            for dy in -r..=r {
                for dx in -r..=r {
                    if dx * dx + dy * dy > r * r {
                        continue;
                    }
                    let (nx, ny) = (x + dx, y + dy);
                    if nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h {
                        out.data[ny as usize * w + nx as usize] = 0.0;
                    }
                }
            }
        }
    }
    out
}

/// `n_holes` rectangles of `hole_w × hole_h` at uniform positions, filled with
/// the channel maximum (salt) or zero (pepper). Holes may overlap.
pub fn coarse_dropout<R: Rng + ?Sized>(
    img: &Plane,
    ch: Channel,
    kind: DropoutKind,
    n_holes: usize,
    hole_w: usize,
    hole_h: usize,
    rng: &mut R,
) -> Plane {
    let fill = match kind {
        DropoutKind::Salt => ch.max(),
        DropoutKind::Pepper => 0.0,
    };
    let (w, h) = (img.width, img.height);
    let (hw, hh) = (hole_w.min(w), hole_h.min(h));
    let mut out = img.clone();
    for _ in 0..n_holes {
        let x0 = rng.random_range(0..=w - hw);
        let y0 = rng.random_range(0..=h - hh);
        for y in y0..y0 + hh {
            out.data[y * w + x0..y * w + x0 + hw].fill(fill);
        }
    }
    out
}
