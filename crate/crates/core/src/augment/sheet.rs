use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{apply_pipeline, AugError, AugSpec, AugStep, Channel, Plane};

/// Labeled previews of `spec` on `img`: the input, each op applied alone, then
/// `samples` draws of the full pipeline. Each tile uses its own generator
/// stream of `seed`, so the sheet is reproducible.
pub fn preview_tiles(
    img: &Plane,
    ch: Channel,
    spec: &AugSpec,
    seed: u64,
    samples: usize,
) -> Result<Vec<(String, Plane)>, AugError> {
    spec.validate()?;
    let mut tiles = vec![("input".to_string(), img.clone())];
    let stream = |i: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64 + 1);
        rng
    };
    for (i, step) in spec.ops.iter().enumerate() {
        let single = AugSpec {
            channel: spec.channel,
            ops: vec![AugStep {
                p: 1.0,
                op: step.op.clone(),
            }],
        };
        let out = apply_pipeline(img, ch, &single, &mut stream(i))?;
        tiles.push((step.op.name().to_string(), out));
    }
    for k in 0..samples {
        let out = apply_pipeline(img, ch, spec, &mut stream(spec.ops.len() + k))?;
        tiles.push((format!("pipeline#{k}"), out));
    }
    Ok(tiles)
}

/// Tile equally sized planes row-major into a grid with `gap` pixels of `fill`
/// between tiles.
pub fn contact_sheet(tiles: &[Plane], columns: usize, gap: usize, fill: f32) -> Result<Plane, AugError> {
    let Some(first) = tiles.first() else {
        return Err(AugError::Dimensions("no tiles".into()));
    };
    let (w, h) = (first.width, first.height);
    if let Some(t) = tiles.iter().find(|t| t.width != w || t.height != h) {
        return Err(AugError::Dimensions(format!("tile {}×{} differs from {w}×{h}", t.width, t.height)));
    }
    let columns = columns.clamp(1, tiles.len());
    let rows = tiles.len().div_ceil(columns);
    let width = columns * w + (columns - 1) * gap;
    let height = rows * h + (rows - 1) * gap;
    let mut sheet = Plane::filled(width, height, fill);
    for (i, tile) in tiles.iter().enumerate() {
        let (x0, y0) = ((i % columns) * (w + gap), (i / columns) * (h + gap));
        for y in 0..h {
            let dst = (y0 + y) * width + x0;
            sheet.data[dst..dst + w].copy_from_slice(&tile.data[y * w..(y + 1) * w]);
        }
    }
    Ok(sheet)
}
