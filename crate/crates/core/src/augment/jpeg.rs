use std::f64::consts::PI;

use super::{AugError, Plane};

/// Standard JPEG luminance quantization table (ITU T.81, Annex K).
const LUMA_TABLE: [u16; 64] = [
    16, 11, 10, 16, 24, 40, 51, 61, //
    12, 12, 14, 19, 26, 58, 60, 55, //
    14, 13, 16, 24, 40, 57, 69, 56, //
    14, 17, 22, 29, 51, 87, 80, 62, //
    18, 22, 37, 56, 68, 109, 103, 77, //
    24, 35, 55, 64, 81, 104, 113, 92, //
    49, 64, 78, 87, 103, 121, 120, 101, //
    72, 92, 95, 98, 112, 100, 103, 99,
];

/// Luminance table scaled by `quality` with the IJG convention, kept in 16-bit
/// range; quality 100 gives all ones. The DC step is capped at 16 so that a
/// flat block never moves by more than one gray level.
pub fn quantization_table(quality: u32) -> Result<[f64; 64], AugError> {
    if !(1..=100).contains(&quality) {
        return Err(AugError::Parameter(format!("jpeg quality {quality} outside 1..=100")));
    }
    let scale = if quality < 50 { 5000 / quality } else { 200 - 2 * quality };
    let mut q = [0.0; 64];
    for (dst, base) in q.iter_mut().zip(LUMA_TABLE) {
        *dst = ((u32::from(base) * scale + 50) / 100).clamp(1, 32767) as f64;
    }
    q[0] = q[0].min(16.0);
    Ok(q)
}

fn dct_basis() -> [[f64; 8]; 8] {
    let mut c = [[0.0; 8]; 8];
    for (k, row) in c.iter_mut().enumerate() {
        let a = if k == 0 { (1.0f64 / 8.0).sqrt() } else { (2.0f64 / 8.0).sqrt() };
        for (n, v) in row.iter_mut().enumerate() {
            *v = a * ((2 * n + 1) as f64 * k as f64 * PI / 16.0).cos();
        }
    }
    c
}

/// Lossy round trip through 8×8 DCT quantization. Partial blocks at the right
/// and bottom edges are padded by replication.
pub fn jpeg_artifacts(img: &Plane, quality: u32) -> Result<Plane, AugError> {
    let q = quantization_table(quality)?;
    let c = dct_basis();
    let (w, h) = (img.width, img.height);
    let mut out = img.clone();
    let mut block = [[0.0f64; 8]; 8];
    let mut tmp = [[0.0f64; 8]; 8];
    for by in (0..h).step_by(8) {
        for bx in (0..w).step_by(8) {
            for (y, row) in block.iter_mut().enumerate() {
                for (x, v) in row.iter_mut().enumerate() {
                    *v = f64::from(img.get_clamped((bx + x) as isize, (by + y) as isize)) - 128.0;
                }
            }
            // forward: C · B · Cᵀ
            for u in 0..8 {
                for x in 0..8 {
                    tmp[u][x] = (0..8).map(|y| c[u][y] * block[y][x]).sum();
                }
            }
            for u in 0..8 {
                for v in 0..8 {
                    let coef: f64 = (0..8).map(|x| tmp[u][x] * c[v][x]).sum();
                    let qv = q[u * 8 + v];
                    block[u][v] = (coef / qv).round() * qv;
                }
            }
            // inverse: Cᵀ · F · C
            for y in 0..8 {
                for v in 0..8 {
                    tmp[y][v] = (0..8).map(|u| c[u][y] * block[u][v]).sum();
                }
            }
            for y in 0..8 {
                for x in 0..8 {
                    let (px, py) = (bx + x, by + y);
                    if px < w && py < h {
                        let val: f64 = (0..8).map(|v| tmp[y][v] * c[v][x]).sum::<f64>() + 128.0;
                        out.data[py * w + px] = val.round().clamp(0.0, 255.0) as f32;
                    }
                }
            }
        }
    }
    Ok(out)
}
