//! Synthetic stimuli for the four motion classes the engines distinguish:
//! whole-scene panning, object motion against a static background, an
//! expanding disc and a laterally translating disc.
//!
//! Textures are binary. Each row alternates between the two levels with run
//! lengths of one or two pixels drawn from a seeded ChaCha stream, so a
//! one-pixel pan changes about two thirds of the pixels in every row.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::frontend::GrayFrame;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StimulusKind {
    GlobalPan,
    Differential,
    LoomDisc,
    TranslateDisc,
}

impl std::str::FromStr for StimulusKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "global-pan" => Ok(StimulusKind::GlobalPan),
            "differential" => Ok(StimulusKind::Differential),
            "loom-disc" => Ok(StimulusKind::LoomDisc),
            "translate-disc" => Ok(StimulusKind::TranslateDisc),
            other => Err(Error::config("kind", format!("unknown stimulus `{other}`"))),
        }
    }
}

/// Pixel rectangle `[x, x + w) x [y, y + h)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Region {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StimulusSpec {
    pub kind: StimulusKind,
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    /// Horizontal displacement in pixels per tick (texture or disc).
    pub velocity: i64,
    /// Disc radius at tick 0.
    pub radius: f64,
    /// Radius increase per tick (loom only).
    pub radius_growth: f64,
    /// Disc center at tick 0; defaults to the sensor center.
    pub center: Option<(f64, f64)>,
    /// Disc level, or the first texture level.
    pub object_level: f64,
    /// Background level, or the second texture level.
    pub background_level: f64,
    pub seed: u64,
    /// Moving patch for differential stimuli; defaults to the 8x8 tile that
    /// holds the sensor center.
    pub region: Option<Region>,
}

impl StimulusSpec {
    pub fn new(kind: StimulusKind, width: usize, height: usize, frames: usize) -> Self {
        StimulusSpec {
            kind,
            width,
            height,
            frames,
            velocity: 1,
            radius: 2.0,
            radius_growth: 1.0,
            center: None,
            object_level: 0.2,
            background_level: 0.8,
            seed: 1,
            region: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::config("width", "sensor must be at least 1x1"));
        }
        if self.frames < 2 {
            return Err(Error::config("frames", "need at least 2 frames"));
        }
        for (key, v) in [("object", self.object_level), ("background", self.background_level)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::config(key, "luminance level must lie in [0, 1]"));
            }
        }
        if !(self.radius >= 0.0 && self.radius.is_finite()) {
            return Err(Error::config("radius", "must be a non-negative number"));
        }
        if !self.radius_growth.is_finite() {
            return Err(Error::config("radius-growth", "must be finite"));
        }
        if let Some((cx, cy)) = self.center {
            if !(cx.is_finite() && cy.is_finite()) {
                return Err(Error::config("center", "must be finite"));
            }
        }
        if self.kind == StimulusKind::Differential {
            let r = self.region();
            if r.w == 0 || r.h == 0 || r.x + r.w > self.width || r.y + r.h > self.height {
                return Err(Error::config("region", "must be a non-empty rectangle inside the sensor"));
            }
        }
        Ok(())
    }

    pub fn region(&self) -> Region {
        self.region.unwrap_or_else(|| {
            let tile = 8;
            let x = (self.width / 2) / tile * tile;
            let y = (self.height / 2) / tile * tile;
            Region {
                x,
                y,
                w: tile.min(self.width - x),
                h: tile.min(self.height - y),
            }
        })
    }

    pub fn disc_center(&self) -> (f64, f64) {
        self.center
            .unwrap_or((self.width as f64 / 2.0, self.height as f64 / 2.0))
    }

    /// Disc center and radius at `tick` (disc stimuli).
    pub fn disc_at(&self, tick: usize) -> ((f64, f64), f64) {
        let (cx, cy) = self.disc_center();
        let t = tick as f64;
        match self.kind {
            StimulusKind::TranslateDisc => ((cx + self.velocity as f64 * t, cy), self.radius),
            _ => ((cx, cy), (self.radius + self.radius_growth * t).max(0.0)),
        }
    }
}

fn level_byte(level: f64) -> u8 {
    (level * 255.0).round() as u8
}

/// Whether the center of pixel `(x, y)` lies inside the disc.
pub fn in_disc(x: usize, y: usize, center: (f64, f64), radius: f64) -> bool {
    let dx = x as f64 + 0.5 - center.0;
    let dy = y as f64 + 0.5 - center.1;
    dx * dx + dy * dy <= radius * radius
}

/// Row-wise binary texture with runs of length 1 or 2; `true` marks the
/// first level.
pub fn binary_texture(width: usize, height: usize, rng: &mut ChaCha8Rng) -> Vec<bool> {
    let mut out = Vec::with_capacity(width * height);
    for _ in 0..height {
        let mut level: bool = rng.gen();
        let mut filled = 0;
        while filled < width {
            let run = rng.gen_range(1..=2).min(width - filled);
            out.extend(std::iter::repeat_n(level, run));
            filled += run;
            level = !level;
        }
    }
    out
}

/// Renders every frame of the stimulus.
pub fn generate(spec: &StimulusSpec) -> Result<Vec<GrayFrame>> {
    spec.validate()?;
    let (w, h) = (spec.width, spec.height);
    let obj = level_byte(spec.object_level);
    let bg = level_byte(spec.background_level);
    let pick = |t: bool| if t { obj } else { bg };
    let shift = |x: usize, tick: usize, period: usize| -> usize {
        let d = spec.velocity as i128 * tick as i128;
        (x as i128 - d).rem_euclid(period as i128) as usize
    };

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let frames = match spec.kind {
        StimulusKind::GlobalPan => {
            let tex = binary_texture(w, h, &mut rng);
            (0..spec.frames)
                .map(|t| {
                    let mut data = Vec::with_capacity(w * h);
                    for y in 0..h {
                        for x in 0..w {
                            data.push(pick(tex[y * w + shift(x, t, w)]));
                        }
                    }
                    data
                })
                .collect::<Vec<_>>()
        }
        StimulusKind::Differential => {
            let background = binary_texture(w, h, &mut rng);
            let r = spec.region();
            rng.set_stream(1);
            let patch = binary_texture(r.w, r.h, &mut rng);
            (0..spec.frames)
                .map(|t| {
                    let mut data: Vec<u8> = background.iter().map(|&b| pick(b)).collect();
                    for py in 0..r.h {
                        for px in 0..r.w {
                            data[(r.y + py) * w + r.x + px] = pick(patch[py * r.w + shift(px, t, r.w)]);
                        }
                    }
                    data
                })
                .collect()
        }
        StimulusKind::LoomDisc | StimulusKind::TranslateDisc => (0..spec.frames)
            .map(|t| {
                let (c, radius) = spec.disc_at(t);
                let mut data = Vec::with_capacity(w * h);
                for y in 0..h {
                    for x in 0..w {
                        data.push(if in_disc(x, y, c, radius) { obj } else { bg });
                    }
                }
                data
            })
            .collect(),
    };
    frames
        .into_iter()
        .map(|data| GrayFrame::new(w, h, data))
        .collect()
}
