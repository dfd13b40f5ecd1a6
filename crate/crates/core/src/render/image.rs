use std::io::{self, BufRead, BufReader, Read, Write};

use super::RenderError;

/// Aligned color and depth channels. Depth is in meters; 0 marks an invalid pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbdImage {
    pub width: usize,
    pub height: usize,
    /// Row-major, 3 bytes per pixel.
    pub rgb: Vec<u8>,
    /// Row-major, meters.
    pub depth: Vec<f32>,
}

impl RgbdImage {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            rgb: vec![0; width * height * 3],
            depth: vec![0.0; width * height],
        }
    }

    #[inline]
    pub fn index(&self, u: usize, v: usize) -> usize {
        v * self.width + u
    }

    pub fn pixel(&self, u: usize, v: usize) -> [u8; 3] {
        let i = 3 * self.index(u, v);
        [self.rgb[i], self.rgb[i + 1], self.rgb[i + 2]]
    }

    pub fn depth_at(&self, u: usize, v: usize) -> f32 {
        self.depth[self.index(u, v)]
    }

    pub fn write_ppm<W: Write>(&self, out: W) -> io::Result<()> {
        write_ppm(out, self.width, self.height, &self.rgb)
    }

    /// 16-bit PGM with depth rounded to millimeters.
    pub fn write_depth_pgm<W: Write>(&self, out: W) -> io::Result<()> {
        let mm: Vec<u16> = self
            .depth
            .iter()
            .map(|d| (f64::from(*d) * 1000.0).round().clamp(0.0, 65535.0) as u16)
            .collect();
        write_pgm16(out, self.width, self.height, &mm)
    }
}

pub fn write_ppm<W: Write>(mut out: W, width: usize, height: usize, rgb: &[u8]) -> io::Result<()> {
    assert_eq!(rgb.len(), width * height * 3);
    write!(out, "P6\n{width} {height}\n255\n")?;
    out.write_all(rgb)
}

pub fn write_pgm8<W: Write>(mut out: W, width: usize, height: usize, gray: &[u8]) -> io::Result<()> {
    assert_eq!(gray.len(), width * height);
    write!(out, "P5\n{width} {height}\n255\n")?;
    out.write_all(gray)
}

/// 16-bit samples are written big-endian, as netpbm requires.
pub fn write_pgm16<W: Write>(mut out: W, width: usize, height: usize, data: &[u16]) -> io::Result<()> {
    assert_eq!(data.len(), width * height);
    write!(out, "P5\n{width} {height}\n65535\n")?;
    let mut buf = Vec::with_capacity(data.len() * 2);
    for v in data {
        buf.extend_from_slice(&v.to_be_bytes());
    }
    out.write_all(&buf)
}

/// Decoded binary netpbm image.
#[derive(Debug, Clone, PartialEq)]
pub enum Pnm {
    Rgb { width: usize, height: usize, data: Vec<u8> },
    Gray8 { width: usize, height: usize, data: Vec<u8> },
    Gray16 { width: usize, height: usize, data: Vec<u16> },
}

fn header_token<R: BufRead>(r: &mut R) -> Result<String, RenderError> {
    let mut tok = String::new();
    let mut byte = [0u8; 1];
    loop {
        if r.read(&mut byte)? == 0 {
            break;
        }
        let c = byte[0] as char;
        if c == '#' {
            let mut skip = String::new();
            r.read_line(&mut skip)?;
            continue;
        }
        if c.is_ascii_whitespace() {
            if tok.is_empty() {
                continue;
            }
            break;
        }
        tok.push(c);
    }
    if tok.is_empty() {
        return Err(RenderError::Format("truncated header".into()));
    }
    Ok(tok)
}

pub fn read_pnm<R: Read>(input: R) -> Result<Pnm, RenderError> {
    let mut r = BufReader::new(input);
    let magic = header_token(&mut r)?;
    let parse = |s: String| {
        s.parse::<usize>()
            .map_err(|_| RenderError::Format(format!("bad header field {s:?}")))
    };
    let width = parse(header_token(&mut r)?)?;
    let height = parse(header_token(&mut r)?)?;
    let maxval = parse(header_token(&mut r)?)?;
    let n = width * height;
    match (magic.as_str(), maxval) {
        ("P6", 255) => {
            let mut data = vec![0u8; n * 3];
            r.read_exact(&mut data)?;
            Ok(Pnm::Rgb { width, height, data })
        }
        ("P5", 255) => {
            let mut data = vec![0u8; n];
            r.read_exact(&mut data)?;
            Ok(Pnm::Gray8 { width, height, data })
        }
        ("P5", 65535) => {
            let mut raw = vec![0u8; n * 2];
            r.read_exact(&mut raw)?;
            let data = raw
                .chunks_exact(2)
                .map(|c| u16::from_be_bytes([c[0], c[1]]))
                .collect();
            Ok(Pnm::Gray16 { width, height, data })
        }
        (m, v) => Err(RenderError::Format(format!(
            "unsupported netpbm variant {m} with maxval {v}"
        ))),
    }
}
