//! Pixel front end: turns consecutive luminance frames into ON/OFF bipolar
//! event maps.
//!
//! Two pixel models are provided. The APS model differences two consecutive
//! frames on a linear luminance scale. The DVS model keeps a per-pixel
//! log-luminance reference and fires when the current log level leaves the
//! threshold band around it, snapping the reference on every event. Both run
//! once per frame tick, so a pixel carries at most one event per tick.

use crate::error::{Error, Result};

/// 8-bit grayscale frame as read from disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayFrame {
    pub width: usize,
    pub height: usize,
    pub data: Vec<u8>,
}

impl GrayFrame {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidFrame(format!("empty frame {width}x{height}")));
        }
        if data.len() != width * height {
            return Err(Error::InvalidFrame(format!(
                "{width}x{height} frame needs {} bytes, got {}",
                width * height,
                data.len()
            )));
        }
        Ok(GrayFrame {
            width,
            height,
            data,
        })
    }
}

/// Normalized luminance, one sample per pixel in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LuminanceFrame {
    width: usize,
    height: usize,
    samples: Vec<f64>,
}

impl LuminanceFrame {
    pub fn new(width: usize, height: usize, samples: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidFrame(format!("empty frame {width}x{height}")));
        }
        if samples.len() != width * height {
            return Err(Error::InvalidFrame(format!(
                "{width}x{height} frame needs {} samples, got {}",
                width * height,
                samples.len()
            )));
        }
        if let Some(i) = samples.iter().position(|s| !(0.0..=1.0).contains(s)) {
            return Err(Error::InvalidFrame(format!(
                "sample {i} = {} outside [0, 1]",
                samples[i]
            )));
        }
        Ok(LuminanceFrame {
            width,
            height,
            samples,
        })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.samples[y * self.width + x]
    }

    fn check_same_dims(&self, other: &LuminanceFrame) -> Result<()> {
        check_dims((self.width, self.height), (other.width, other.height))
    }
}

pub(crate) fn check_dims(expected: (usize, usize), actual: (usize, usize)) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch {
            expected_w: expected.0,
            expected_h: expected.1,
            actual_w: actual.0,
            actual_h: actual.1,
        });
    }
    Ok(())
}

/// Maps raw 8-bit values to `raw / 255` after checking the frame against the
/// configured sensor size.
pub fn to_luminance(raw: &GrayFrame, sensor: (usize, usize)) -> Result<LuminanceFrame> {
    check_dims(sensor, (raw.width, raw.height))?;
    let samples = raw.data.iter().map(|&v| f64::from(v) / 255.0).collect();
    LuminanceFrame::new(raw.width, raw.height, samples)
}

/// Event polarity carried by a firing pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum Polarity {
    Off = 0,
    On = 1,
}

impl Polarity {
    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::On => "ON",
            Polarity::Off => "OFF",
        }
    }
}

/// Per-pixel bipolar channel state for one tick.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Channel {
    #[default]
    None = 0,
    On = 1,
    Off = 2,
}

impl Channel {
    pub fn is_active(self) -> bool {
        self != Channel::None
    }

    pub fn polarity(self) -> Option<Polarity> {
        match self {
            Channel::None => None,
            Channel::On => Some(Polarity::On),
            Channel::Off => Some(Polarity::Off),
        }
    }

    /// ON and OFF exchanged, NONE fixed.
    pub fn flipped(self) -> Channel {
        match self {
            Channel::None => Channel::None,
            Channel::On => Channel::Off,
            Channel::Off => Channel::On,
        }
    }
}

/// One address event: pixel `(x, y)` fired with `polarity` at tick `frame`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EventRecord {
    pub frame: u32,
    pub x: u32,
    pub y: u32,
    pub polarity: Polarity,
}

impl EventRecord {
    /// Canonical stream order: `(frame, y, x)`.
    pub fn sort_key(&self) -> (u32, u32, u32) {
        (self.frame, self.y, self.x)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipolarEventMap {
    width: usize,
    height: usize,
    frame_index: u32,
    channels: Vec<Channel>,
}

impl BipolarEventMap {
    pub fn quiet(width: usize, height: usize, frame_index: u32) -> Self {
        BipolarEventMap {
            width,
            height,
            frame_index,
            channels: vec![Channel::None; width * height],
        }
    }

    pub fn from_channels(
        width: usize,
        height: usize,
        frame_index: u32,
        channels: Vec<Channel>,
    ) -> Result<Self> {
        if width == 0 || height == 0 || channels.len() != width * height {
            return Err(Error::InvalidFrame(format!(
                "{width}x{height} event map with {} channels",
                channels.len()
            )));
        }
        Ok(BipolarEventMap {
            width,
            height,
            frame_index,
            channels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn frame_index(&self) -> u32 {
        self.frame_index
    }

    pub fn set_frame_index(&mut self, frame_index: u32) {
        self.frame_index = frame_index;
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn channel(&self, x: usize, y: usize) -> Channel {
        self.channels[y * self.width + x]
    }

    pub fn channel_at(&self, index: usize) -> Channel {
        self.channels[index]
    }

    pub fn count(&self, which: Channel) -> usize {
        self.channels.iter().filter(|&&c| c == which).count()
    }

    pub fn active_count(&self) -> usize {
        self.channels.iter().filter(|c| c.is_active()).count()
    }

    /// Events in `(y, x)` order.
    pub fn events(&self) -> impl Iterator<Item = EventRecord> + '_ {
        let width = self.width;
        let frame = self.frame_index;
        self.channels.iter().enumerate().filter_map(move |(i, c)| {
            c.polarity().map(|polarity| EventRecord {
                frame,
                x: (i % width) as u32,
                y: (i / width) as u32,
                polarity,
            })
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensorMode {
    Aps,
    Dvs,
}

impl std::str::FromStr for SensorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "aps" => Ok(SensorMode::Aps),
            "dvs" => Ok(SensorMode::Dvs),
            other => Err(Error::config("frontend.mode", format!("`{other}` is not aps or dvs"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontendConfig {
    pub mode: SensorMode,
    /// Linear luminance difference threshold (APS).
    pub theta_aps: f64,
    /// Log-luminance threshold (DVS).
    pub theta_dvs: f64,
    /// Added to luminance before taking logarithms.
    pub log_floor: f64,
    /// Ticks per frame; informational only.
    pub frame_period: u32,
}

impl Default for FrontendConfig {
    fn default() -> Self {
        FrontendConfig {
            mode: SensorMode::Aps,
            theta_aps: 0.1,
            theta_dvs: 0.2,
            log_floor: 1e-3,
            frame_period: 1,
        }
    }
}

impl FrontendConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta_aps > 0.0 && self.theta_aps < 1.0) {
            return Err(Error::config("frontend.theta_aps", "must lie in (0, 1)"));
        }
        if !(self.theta_dvs > 0.0 && self.theta_dvs.is_finite()) {
            return Err(Error::config("frontend.theta_dvs", "must be positive"));
        }
        if !(self.log_floor > 0.0 && self.log_floor.is_finite()) {
            return Err(Error::config("frontend.log_floor", "must be positive"));
        }
        if self.frame_period == 0 {
            return Err(Error::config("frontend.frame_period", "must be at least 1"));
        }
        Ok(())
    }
}

/// Sampler plus thresholding: fires where consecutive samples differ by more
/// than `theta_aps`.
pub fn aps_step(
    prev: &LuminanceFrame,
    cur: &LuminanceFrame,
    cfg: &FrontendConfig,
) -> Result<BipolarEventMap> {
    prev.check_same_dims(cur)?;
    let theta = cfg.theta_aps;
    let channels = prev
        .samples
        .iter()
        .zip(&cur.samples)
        .map(|(&p, &c)| {
            let delta = c - p;
            if delta > theta {
                Channel::On
            } else if delta < -theta {
                Channel::Off
            } else {
                Channel::None
            }
        })
        .collect();
    Ok(BipolarEventMap {
        width: cur.width,
        height: cur.height,
        frame_index: 0,
        channels,
    })
}

/// Per-pixel log-luminance references of the DVS model.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DvsState {
    width: usize,
    height: usize,
    reference: Vec<f64>,
}

impl DvsState {
    pub fn uninitialized() -> Self {
        DvsState::default()
    }

    pub fn from_frame(first: &LuminanceFrame, cfg: &FrontendConfig) -> Self {
        DvsState {
            width: first.width,
            height: first.height,
            reference: first.samples.iter().map(|&s| (s + cfg.log_floor).ln()).collect(),
        }
    }

    pub fn is_initialized(&self) -> bool {
        !self.reference.is_empty()
    }

    pub fn reference(&self) -> &[f64] {
        &self.reference
    }

    /// Advances the references in place and returns the tick's event map.
    pub fn update(&mut self, cur: &LuminanceFrame, cfg: &FrontendConfig) -> Result<BipolarEventMap> {
        if !self.is_initialized() {
            return Err(Error::UninitializedState);
        }
        check_dims((self.width, self.height), (cur.width, cur.height))?;
        let theta = cfg.theta_dvs;
        let floor = cfg.log_floor;
        let channels = self
            .reference
            .iter_mut()
            .zip(&cur.samples)
            .map(|(reference, &s)| {
                let level = (s + floor).ln();
                if level - *reference > theta {
                    *reference = level;
                    Channel::On
                } else if *reference - level > theta {
                    *reference = level;
                    Channel::Off
                } else {
                    Channel::None
                }
            })
            .collect();
        Ok(BipolarEventMap {
            width: cur.width,
            height: cur.height,
            frame_index: 0,
            channels,
        })
    }
}

/// Pure form of [`DvsState::update`].
pub fn dvs_step(
    state: &DvsState,
    cur: &LuminanceFrame,
    cfg: &FrontendConfig,
) -> Result<(BipolarEventMap, DvsState)> {
    let mut next = state.clone();
    let map = next.update(cur, cfg)?;
    Ok((map, next))
}

/// What the front end remembers between ticks.
#[derive(Debug, Clone, PartialEq)]
pub enum FrontendState {
    Aps { previous: LuminanceFrame },
    Dvs(DvsState),
}

pub fn frontend_reset(first: &LuminanceFrame, cfg: &FrontendConfig) -> FrontendState {
    match cfg.mode {
        SensorMode::Aps => FrontendState::Aps {
            previous: first.clone(),
        },
        SensorMode::Dvs => FrontendState::Dvs(DvsState::from_frame(first, cfg)),
    }
}

/// Stateful driver that numbers ticks and dispatches on the pixel model.
///
/// The first frame seeds the state and yields an all-quiet map at tick 0.
#[derive(Debug, Clone)]
pub struct Frontend {
    cfg: FrontendConfig,
    state: Option<FrontendState>,
    next_tick: u32,
}

impl Frontend {
    pub fn new(cfg: FrontendConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Frontend {
            cfg,
            state: None,
            next_tick: 0,
        })
    }

    pub fn config(&self) -> &FrontendConfig {
        &self.cfg
    }

    pub fn push(&mut self, frame: LuminanceFrame) -> Result<BipolarEventMap> {
        let tick = self.next_tick;
        let mut map = match &mut self.state {
            None => {
                let map = BipolarEventMap::quiet(frame.width, frame.height, 0);
                self.state = Some(frontend_reset(&frame, &self.cfg));
                map
            }
            Some(FrontendState::Aps { previous }) => {
                let map = aps_step(previous, &frame, &self.cfg)?;
                *previous = frame;
                map
            }
            Some(FrontendState::Dvs(state)) => state.update(&frame, &self.cfg)?,
        };
        map.set_frame_index(tick);
        self.next_tick += 1;
        Ok(map)
    }
}
