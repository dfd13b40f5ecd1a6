use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{
    blur, brightness_contrast, clahe, coarse_dropout, filter2d, hist_eq, jpeg_artifacts, noise,
    solarize, threshold_dilate, AugError, BlurKind, Channel, DropoutKind, FilterKind, NoiseKind,
    Plane,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Gray,
    Depth,
}

/// Closed interval `[lo, hi]` sampled uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloatRange(pub [f64; 2]);

/// Closed integer interval `[lo, hi]` sampled uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntRange(pub [u32; 2]);

impl FloatRange {
    fn check(&self, name: &str) -> Result<(), AugError> {
        let [lo, hi] = self.0;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(AugError::Parameter(format!("{name}: empty range [{lo}, {hi}]")));
        }
        Ok(())
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        self.0[0] + (self.0[1] - self.0[0]) * u
    }
}

impl IntRange {
    fn check(&self, name: &str, min: u32, max: u32) -> Result<(), AugError> {
        let [lo, hi] = self.0;
        if lo > hi || lo < min || hi > max {
            return Err(AugError::Parameter(format!(
                "{name}: range [{lo}, {hi}] must be non-empty within [{min}, {max}]"
            )));
        }
        Ok(())
    }

    fn check_odd(&self, name: &str) -> Result<(), AugError> {
        self.check(name, 1, 255)?;
        let [lo, hi] = self.0;
        if lo == hi && lo % 2 == 0 {
            return Err(AugError::Parameter(format!("{name}: range [{lo}, {hi}] has no odd size")));
        }
        Ok(())
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        rng.random_range(self.0[0]..=self.0[1])
    }

    fn sample_odd<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let lo = self.0[0] | 1;
        let count = (self.0[1] - lo) / 2 + 1;
        (lo + 2 * rng.random_range(0..count)) as usize
    }
}

/// A registered augmentation with its parameter ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum AugOp {
    BrightnessContrast { alpha: FloatRange, beta: FloatRange },
    MotionBlur { size: IntRange, angle: FloatRange },
    GaussianBlur { size: IntRange },
    MedianBlur { size: IntRange },
    Solarize { threshold: FloatRange },
    Emboss,
    Sharpen,
    HistEq,
    Clahe { clip: FloatRange, tiles: IntRange },
    ImageCompression { quality: IntRange },
    MultiplicativeNoise { sigma: FloatRange },
    GaussianNoise { sigma: FloatRange },
    ThresholdDilate { threshold: FloatRange, radius: IntRange },
    CoarsePepper { holes: IntRange, size: IntRange },
    CoarseSalt { holes: IntRange, size: IntRange },
}

impl AugOp {
    pub fn name(&self) -> &'static str {
        match self {
            AugOp::BrightnessContrast { .. } => "brightness_contrast",
            AugOp::MotionBlur { .. } => "motion_blur",
            AugOp::GaussianBlur { .. } => "gaussian_blur",
            AugOp::MedianBlur { .. } => "median_blur",
            AugOp::Solarize { .. } => "solarize",
            AugOp::Emboss => "emboss",
            AugOp::Sharpen => "sharpen",
            AugOp::HistEq => "hist_eq",
            AugOp::Clahe { .. } => "clahe",
            AugOp::ImageCompression { .. } => "image_compression",
            AugOp::MultiplicativeNoise { .. } => "multiplicative_noise",
            AugOp::GaussianNoise { .. } => "gaussian_noise",
            AugOp::ThresholdDilate { .. } => "threshold_dilate",
            AugOp::CoarsePepper { .. } => "coarse_pepper",
            AugOp::CoarseSalt { .. } => "coarse_salt",
        }
    }

    /// Whether the op is registered for the channel.
    pub fn supports(&self, channel: ChannelKind) -> bool {
        use AugOp::*;
        match channel {
            ChannelKind::Gray => matches!(
                self,
                BrightnessContrast { .. }
                    | MotionBlur { .. }
                    | GaussianBlur { .. }
                    | MedianBlur { .. }
                    | Solarize { .. }
                    | Emboss
                    | HistEq
                    | Sharpen
                    | Clahe { .. }
                    | ImageCompression { .. }
                    | MultiplicativeNoise { .. }
                    | GaussianNoise { .. }
            ),
            ChannelKind::Depth => matches!(
                self,
                ThresholdDilate { .. }
                    | Sharpen
                    | Emboss
                    | MotionBlur { .. }
                    | GaussianBlur { .. }
                    | MedianBlur { .. }
                    | MultiplicativeNoise { .. }
                    | GaussianNoise { .. }
                    | CoarsePepper { .. }
                    | CoarseSalt { .. }
            ),
        }
    }

    pub fn validate(&self) -> Result<(), AugError> {
        let name = self.name();
        let f = |r: &FloatRange, field: &str| r.check(&format!("{name}.{field}"));
        match self {
            AugOp::BrightnessContrast { alpha, beta } => {
                f(alpha, "alpha")?;
                f(beta, "beta")
            }
            AugOp::MotionBlur { size, angle } => {
                size.check_odd(&format!("{name}.size"))?;
                f(angle, "angle")
            }
            AugOp::GaussianBlur { size } | AugOp::MedianBlur { size } => {
                size.check_odd(&format!("{name}.size"))
            }
            AugOp::Solarize { threshold } => f(threshold, "threshold"),
            AugOp::Emboss | AugOp::Sharpen | AugOp::HistEq => Ok(()),
            AugOp::Clahe { clip, tiles } => {
                f(clip, "clip")?;
                if clip.0[0] <= 0.0 {
                    return Err(AugError::Parameter(format!("{name}.clip: must be positive")));
                }
                tiles.check(&format!("{name}.tiles"), 1, 64)
            }
            AugOp::ImageCompression { quality } => quality.check(&format!("{name}.quality"), 1, 100),
            AugOp::MultiplicativeNoise { sigma } | AugOp::GaussianNoise { sigma } => {
                f(sigma, "sigma")?;
                if sigma.0[0] < 0.0 {
                    return Err(AugError::Parameter(format!("{name}.sigma: must be non-negative")));
                }
                Ok(())
            }
            AugOp::ThresholdDilate { threshold, radius } => {
                f(threshold, "threshold")?;
                radius.check(&format!("{name}.radius"), 0, 64)
            }
            AugOp::CoarsePepper { holes, size } | AugOp::CoarseSalt { holes, size } => {
                holes.check(&format!("{name}.holes"), 0, 10_000)?;
                size.check(&format!("{name}.size"), 1, 10_000)
            }
        }
    }

    /// Sample parameters and apply.
    pub fn apply<R: Rng + ?Sized>(&self, img: &Plane, ch: Channel, rng: &mut R) -> Result<Plane, AugError> {
        Ok(match self {
            AugOp::BrightnessContrast { alpha, beta } => {
                let a = alpha.sample(rng) as f32;
                let b = beta.sample(rng) as f32;
                brightness_contrast(img, ch, a, b)
            }
            AugOp::MotionBlur { size, angle } => {
                let size = size.sample_odd(rng);
                blur(img, ch, BlurKind::Motion { size, angle: angle.sample(rng) })?
            }
            AugOp::GaussianBlur { size } => blur(img, ch, BlurKind::Gaussian { size: size.sample_odd(rng) })?,
            AugOp::MedianBlur { size } => blur(img, ch, BlurKind::Median { size: size.sample_odd(rng) })?,
            AugOp::Solarize { threshold } => solarize(img, ch, threshold.sample(rng) as f32),
            AugOp::Emboss => filter2d(img, ch, FilterKind::Emboss),
            AugOp::Sharpen => filter2d(img, ch, FilterKind::Sharpen),
            AugOp::HistEq => hist_eq(img),
            AugOp::Clahe { clip, tiles } => {
                let c = clip.sample(rng);
                let t = tiles.sample(rng) as usize;
                clahe(img, c, t.min(img.width).min(img.height))?
            }
            AugOp::ImageCompression { quality } => jpeg_artifacts(img, quality.sample(rng))?,
            AugOp::MultiplicativeNoise { sigma } => {
                let s = sigma.sample(rng) as f32;
                noise(img, ch, NoiseKind::Multiplicative, s, rng)
            }
            AugOp::GaussianNoise { sigma } => {
                let s = sigma.sample(rng) as f32;
                noise(img, ch, NoiseKind::Gaussian, s, rng)
            }
            AugOp::ThresholdDilate { threshold, radius } => {
                let t = threshold.sample(rng) as f32;
                threshold_dilate(img, t, radius.sample(rng) as usize)
            }
            AugOp::CoarsePepper { holes, size } | AugOp::CoarseSalt { holes, size } => {
                let kind = if matches!(self, AugOp::CoarseSalt { .. }) {
                    DropoutKind::Salt
                } else {
                    DropoutKind::Pepper
                };
                let n = holes.sample(rng) as usize;
                let hw = size.sample(rng) as usize;
                let hh = size.sample(rng) as usize;
                coarse_dropout(img, ch, kind, n, hw, hh, rng)
            }
        })
    }
}

/// One pipeline entry: an op and the probability that it fires.
#[derive(Debug, Clone, PartialEq)]
pub struct AugStep {
    pub p: f64,
    pub op: AugOp,
}

// Flattened on disk as `{ op = "...", p = 0.3, <params> }`.
impl Serialize for AugStep {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut table = match toml::Value::try_from(&self.op).map_err(serde::ser::Error::custom)? {
            toml::Value::Table(t) => t,
            _ => return Err(serde::ser::Error::custom("op did not serialize to a table")),
        };
        table.insert("p".into(), toml::Value::Float(self.p));
        table.serialize(s)
    }
}

impl<'de> Deserialize<'de> for AugStep {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let mut table = toml::Table::deserialize(d)?;
        let p = match table.remove("p") {
            None => 1.0,
            Some(toml::Value::Float(f)) => f,
            Some(toml::Value::Integer(i)) => i as f64,
            Some(other) => {
                return Err(serde::de::Error::custom(format!("p: expected a number, got {other}")))
            }
        };
        let op = AugOp::deserialize(toml::Value::Table(table)).map_err(serde::de::Error::custom)?;
        Ok(AugStep { p, op })
    }
}

/// Ordered list of augmentations for one channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AugSpec {
    pub channel: ChannelKind,
    #[serde(default)]
    pub ops: Vec<AugStep>,
}

impl AugSpec {
    pub fn empty(channel: ChannelKind) -> Self {
        Self {
            channel,
            ops: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), AugError> {
        for step in &self.ops {
            if !(0.0..=1.0).contains(&step.p) {
                return Err(AugError::Parameter(format!(
                    "{}.p: probability {} outside [0, 1]",
                    step.op.name(),
                    step.p
                )));
            }
            if !step.op.supports(self.channel) {
                return Err(AugError::UnknownOp {
                    op: step.op.name().to_string(),
                    channel: self.channel,
                });
            }
            step.op.validate()?;
        }
        Ok(())
    }

    /// The twelve grayscale augmentations, each firing with probability 0.3.
    pub fn default_gray() -> Self {
        let fr = |lo, hi| FloatRange([lo, hi]);
        let ir = |lo, hi| IntRange([lo, hi]);
        let ops = vec![
            AugOp::BrightnessContrast { alpha: fr(0.8, 1.2), beta: fr(-20.0, 20.0) },
            AugOp::MotionBlur { size: ir(3, 5), angle: fr(0.0, PI) },
            AugOp::GaussianBlur { size: ir(3, 5) },
            AugOp::MedianBlur { size: ir(3, 3) },
            AugOp::Solarize { threshold: fr(192.0, 255.0) },
            AugOp::Emboss,
            AugOp::HistEq,
            AugOp::Sharpen,
            AugOp::Clahe { clip: fr(1.0, 4.0), tiles: ir(2, 8) },
            AugOp::ImageCompression { quality: ir(30, 90) },
            AugOp::MultiplicativeNoise { sigma: fr(0.0, 0.05) },
            AugOp::GaussianNoise { sigma: fr(0.0, 8.0) },
        ];
        Self {
            channel: ChannelKind::Gray,
            ops: ops.into_iter().map(|op| AugStep { p: 0.3, op }).collect(),
        }
    }

    /// The ten depth augmentations with ranges roughly twice as wide as the gray ones.
    pub fn default_depth() -> Self {
        let fr = |lo, hi| FloatRange([lo, hi]);
        let ir = |lo, hi| IntRange([lo, hi]);
        let ops = vec![
            AugOp::ThresholdDilate { threshold: fr(0.35, 1.0), radius: ir(1, 3) },
            AugOp::Sharpen,
            AugOp::Emboss,
            AugOp::MotionBlur { size: ir(3, 9), angle: fr(0.0, PI) },
            AugOp::GaussianBlur { size: ir(3, 9) },
            AugOp::MedianBlur { size: ir(3, 5) },
            AugOp::MultiplicativeNoise { sigma: fr(0.0, 0.1) },
            AugOp::GaussianNoise { sigma: fr(0.0, 0.02) },
            AugOp::CoarsePepper { holes: ir(1, 8), size: ir(2, 12) },
            AugOp::CoarseSalt { holes: ir(1, 8), size: ir(2, 12) },
        ];
        Self {
            channel: ChannelKind::Depth,
            ops: ops.into_iter().map(|op| AugStep { p: 0.3, op }).collect(),
        }
    }
}

/// Apply `spec` in order; each op fires independently with its probability.
pub fn apply_pipeline<R: Rng + ?Sized>(
    img: &Plane,
    ch: Channel,
    spec: &AugSpec,
    rng: &mut R,
) -> Result<Plane, AugError> {
    if spec.channel != ch.kind() {
        return Err(AugError::ChannelMismatch {
            spec: spec.channel,
            image: ch.kind(),
        });
    }
    spec.validate()?;
    let mut out = img.clone();
    for step in &spec.ops {
        let fire: f64 = rng.random();
        if fire < step.p {
            out = step.op.apply(&out, ch, rng)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample_gray() -> Plane {
        let data = (0..48 * 40).map(|i| ((i * 29 + i / 48 * 3) % 256) as f32).collect();
        Plane::new(48, 40, data).unwrap()
    }

    fn sample_depth() -> Plane {
        let data = (0..48 * 40).map(|i| 0.3 + 0.001 * ((i * 7) % 500) as f32).collect();
        Plane::new(48, 40, data).unwrap()
    }

    #[test]
    fn defaults_register_every_listed_op() {
        let g = AugSpec::default_gray();
        let d = AugSpec::default_depth();
        assert_eq!(g.ops.len(), 12);
        assert_eq!(d.ops.len(), 10);
        g.validate().unwrap();
        d.validate().unwrap();
        assert!(g.ops.iter().chain(&d.ops).all(|s| s.p == 0.3));
    }

    #[test]
    fn empty_and_zero_probability_specs_are_identity() {
        let img = sample_gray();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(apply_pipeline(&img, Channel::Gray, &AugSpec::empty(ChannelKind::Gray), &mut rng).unwrap(), img);
        let mut spec = AugSpec::default_gray();
        spec.ops.iter_mut().for_each(|s| s.p = 0.0);
        assert_eq!(apply_pipeline(&img, Channel::Gray, &spec, &mut rng).unwrap(), img);
    }

    #[test]
    fn pipeline_is_seed_deterministic() {
        let mut spec = AugSpec::default_gray();
        spec.ops.iter_mut().for_each(|s| s.p = 0.7);
        let img = sample_gray();
        let a = apply_pipeline(&img, Channel::Gray, &spec, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = apply_pipeline(&img, Channel::Gray, &spec, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, img);
    }

    #[test]
    fn channel_checks() {
        let img = sample_depth();
        let ch = Channel::Depth { max: 2.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            apply_pipeline(&img, ch, &AugSpec::default_gray(), &mut rng),
            Err(AugError::ChannelMismatch { .. })
        ));
        let spec = AugSpec {
            channel: ChannelKind::Depth,
            ops: vec![AugStep { p: 0.5, op: AugOp::HistEq }],
        };
        assert!(matches!(apply_pipeline(&img, ch, &spec, &mut rng), Err(AugError::UnknownOp { .. })));
    }

    #[test]
    fn spec_parses_from_toml() {
        let text = r#"
            channel = "depth"
            [[ops]]
            op = "gaussian_blur"
            p = 0.5
            size = [3, 7]
            [[ops]]
            op = "coarse_salt"
            holes = [1, 2]
            size = [4, 4]
        "#;
        let spec: AugSpec = toml::from_str(text).unwrap();
        assert_eq!(spec.ops.len(), 2);
        assert_eq!(spec.ops[0].p, 0.5);
        assert_eq!(spec.ops[1].p, 1.0);
        spec.validate().unwrap();

        let back: AugSpec = toml::from_str(&toml::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);

        let typo = text.replace("size = [3, 7]", "sise = [3, 7]");
        let err = toml::from_str::<AugSpec>(&typo).unwrap_err().to_string();
        assert!(err.contains("sise"), "{err}");
        let unknown = text.replace("gaussian_blur", "gaussian_blurr");
        assert!(toml::from_str::<AugSpec>(&unknown).is_err());
    }

    #[test]
    fn bad_ranges_are_rejected() {
        let spec = AugSpec {
            channel: ChannelKind::Gray,
            ops: vec![AugStep { p: 0.5, op: AugOp::GaussianBlur { size: IntRange([4, 4]) } }],
        };
        assert!(spec.validate().is_err());
        let spec = AugSpec {
            channel: ChannelKind::Gray,
            ops: vec![AugStep { p: 1.5, op: AugOp::Sharpen }],
        };
        assert!(spec.validate().is_err());
        let spec = AugSpec {
            channel: ChannelKind::Gray,
            ops: vec![AugStep { p: 0.5, op: AugOp::Solarize { threshold: FloatRange([10.0, 5.0]) } }],
        };
        assert!(spec.validate().is_err());
    }
}
