use super::{AugError, Plane};

fn histogram<'a>(values: impl Iterator<Item = &'a f32>) -> [f64; 256] {
    let mut h = [0.0; 256];
    for v in values {
        h[v.round().clamp(0.0, 255.0) as usize] += 1.0;
    }
    h
}

/// CDF remap of a histogram onto `[0, 255]`. A histogram with a single
/// occupied bin maps to the identity.
fn equalize_lut(hist: &[f64; 256]) -> [f32; 256] {
    let mut lut = [0.0f32; 256];
    let occupied = hist.iter().filter(|c| **c > 0.0).count();
    if occupied <= 1 {
        for (i, v) in lut.iter_mut().enumerate() {
            *v = i as f32;
        }
        return lut;
    }
    let total: f64 = hist.iter().sum();
    let cdf_min = *hist.iter().find(|c| **c > 0.0).unwrap();
    let mut cdf = 0.0;
    for (i, c) in hist.iter().enumerate() {
        cdf += c;
        lut[i] = ((cdf - cdf_min) / (total - cdf_min) * 255.0).round().clamp(0.0, 255.0) as f32;
    }
    lut
}

pub fn hist_eq(img: &Plane) -> Plane {
    let lut = equalize_lut(&histogram(img.data.iter()));
    img.map(|v| lut[v.round().clamp(0.0, 255.0) as usize])
}

/// Contrast-limited adaptive equalization on a `tiles × tiles` grid.
///
/// `clip` is relative to the mean bin height of a tile; excess counts are spread
/// evenly over all bins. Mappings of the four nearest tile centers are blended
/// bilinearly.
pub fn clahe(img: &Plane, clip: f64, tiles: usize) -> Result<Plane, AugError> {
    if tiles == 0 || tiles > img.width || tiles > img.height {
        return Err(AugError::Parameter(format!(
            "clahe: {tiles} tiles for a {}×{} image",
            img.width, img.height
        )));
    }
    if !(clip > 0.0) {
        return Err(AugError::Parameter(format!("clahe: clip {clip} must be positive")));
    }
    let (w, h) = (img.width, img.height);
    let bounds = |n: usize, i: usize| (i * n / tiles, (i + 1) * n / tiles);
    let mut luts = Vec::with_capacity(tiles * tiles);
    for ty in 0..tiles {
        let (y0, y1) = bounds(h, ty);
        for tx in 0..tiles {
            let (x0, x1) = bounds(w, tx);
            let mut hist = histogram((y0..y1).flat_map(|y| img.data[y * w + x0..y * w + x1].iter()));
            let occupied = hist.iter().filter(|c| **c > 0.0).count();
            if clip.is_finite() && occupied > 1 {
                let n = ((x1 - x0) * (y1 - y0)) as f64;
                let limit = (clip * n / 256.0).max(1.0);
                let mut excess = 0.0;
                for c in hist.iter_mut() {
                    if *c > limit {
                        excess += *c - limit;
                        *c = limit;
                    }
                }
                let share = excess / 256.0;
                for c in hist.iter_mut() {
                    *c += share;
                }
            }
            luts.push(equalize_lut(&hist));
        }
    }

    // tile-center coordinates of a pixel, clamped at the borders
    let locate = |p: usize, n: usize| {
        let size = n as f64 / tiles as f64;
        let f = ((p as f64 + 0.5) / size - 0.5).clamp(0.0, (tiles - 1) as f64);
        let i0 = f.floor() as usize;
        let i1 = (i0 + 1).min(tiles - 1);
        (i0, i1, f - i0 as f64)
    };
    let mut data = Vec::with_capacity(w * h);
    for y in 0..h {
        let (ty0, ty1, fy) = locate(y, h);
        for x in 0..w {
            let (tx0, tx1, fx) = locate(x, w);
            let bin = img.data[y * w + x].round().clamp(0.0, 255.0) as usize;
            let m = |ty: usize, tx: usize| f64::from(luts[ty * tiles + tx][bin]);
            let top = m(ty0, tx0) * (1.0 - fx) + m(ty0, tx1) * fx;
            let bottom = m(ty1, tx0) * (1.0 - fx) + m(ty1, tx1) * fx;
            let v = top * (1.0 - fy) + bottom * fy;
            data.push(v.round().clamp(0.0, 255.0) as f32);
        }
    }
    Ok(Plane {
        width: w,
        height: h,
        data,
    })
}
