//! Line-oriented `key = value` pipeline configuration.
//!
//! ```text
//! # comments start with '#'
//! frontend.mode = dvs
//! layout.center_w = 8
//! oms.trip_fraction = 0.6
//! ```
//!
//! Unknown keys are rejected; absent keys keep their defaults.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::frontend::FrontendConfig;
use crate::layout::LayoutConfig;
use crate::ld::LdConfig;
use crate::oms::{OmsConfig, SurroundWeight};
use crate::ratio::Ratio;

/// Layout parameters whose sensor size may come from the input instead.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayoutSettings {
    pub width: Option<usize>,
    pub height: Option<usize>,
    pub center_w: usize,
    pub center_h: usize,
    pub surround_stride: usize,
    pub neighborhood: usize,
}

impl Default for LayoutSettings {
    fn default() -> Self {
        LayoutSettings {
            width: None,
            height: None,
            center_w: LayoutConfig::DEFAULT_CENTER,
            center_h: LayoutConfig::DEFAULT_CENTER,
            surround_stride: LayoutConfig::DEFAULT_STRIDE,
            neighborhood: LayoutConfig::DEFAULT_NEIGHBORHOOD,
        }
    }
}

impl LayoutSettings {
    /// Fills in the sensor size. A configured size must agree with `sensor`.
    pub fn resolve(&self, sensor: (usize, usize)) -> Result<LayoutConfig> {
        if let Some(w) = self.width {
            if w != sensor.0 {
                return Err(Error::config(
                    "layout.width",
                    format!("configured {w} but input is {} wide", sensor.0),
                ));
            }
        }
        if let Some(h) = self.height {
            if h != sensor.1 {
                return Err(Error::config(
                    "layout.height",
                    format!("configured {h} but input is {} high", sensor.1),
                ));
            }
        }
        let cfg = LayoutConfig {
            width: sensor.0,
            height: sensor.1,
            center_w: self.center_w,
            center_h: self.center_h,
            surround_stride: self.surround_stride,
            neighborhood: self.neighborhood,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// The layout when the sensor size is configured explicitly.
    pub fn explicit(&self) -> Result<LayoutConfig> {
        match (self.width, self.height) {
            (Some(w), Some(h)) => self.resolve((w, h)),
            (None, _) => Err(Error::config("layout.width", "required here")),
            (_, None) => Err(Error::config("layout.height", "required here")),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.center_w == 0 {
            return Err(Error::config("layout.center_w", "must be at least 1"));
        }
        if self.center_h == 0 {
            return Err(Error::config("layout.center_h", "must be at least 1"));
        }
        if self.surround_stride < 2 {
            return Err(Error::config("layout.surround_stride", "must be at least 2"));
        }
        if self.neighborhood == 0 {
            return Err(Error::config("layout.neighborhood", "must be at least 1"));
        }
        if let (Some(w), Some(h)) = (self.width, self.height) {
            self.resolve((w, h))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineSet {
    pub oms: bool,
    pub ld: bool,
}

impl Default for EngineSet {
    fn default() -> Self {
        EngineSet { oms: true, ld: true }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InputSpec {
    pub path: Option<PathBuf>,
    /// Set for headerless 8-bit input.
    pub raw_dims: Option<(usize, usize)>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PipelineConfig {
    pub frontend: FrontendConfig,
    pub layout: LayoutSettings,
    pub oms: OmsConfig,
    pub ld: LdConfig,
    pub engines: EngineSet,
    pub input: InputSpec,
    pub output_dir: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.engines.oms && !self.engines.ld {
            return Err(Error::config("engines", "enable at least one of engines.oms, engines.ld"));
        }
        self.frontend.validate()?;
        self.layout.validate()?;
        self.oms.validate()?;
        self.ld.validate()?;
        if let Some((w, h)) = self.input.raw_dims {
            if w == 0 || h == 0 {
                return Err(Error::config("input.raw_dims", "must be positive"));
            }
        }
        Ok(())
    }

    /// Parses configuration text; see the module docs for the grammar.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = PipelineConfig::default();
        let mut seen = BTreeSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::ConfigParse {
                    line: line_no,
                    message: format!("expected `key = value`, got `{line}`"),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_owned()) {
                return Err(Error::ConfigParse {
                    line: line_no,
                    message: format!("duplicate key `{key}`"),
                });
            }
            cfg.set(key, value).map_err(|e| match e {
                Error::ConfigParse { message, .. } => Error::ConfigParse {
                    line: line_no,
                    message,
                },
                other => other,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "frontend.mode" => self.frontend.mode = value.parse()?,
            "frontend.theta_aps" => self.frontend.theta_aps = num(key, value)?,
            "frontend.theta_dvs" => self.frontend.theta_dvs = num(key, value)?,
            "frontend.log_floor" => self.frontend.log_floor = num(key, value)?,
            "frontend.frame_period" => self.frontend.frame_period = num(key, value)?,
            "layout.width" => self.layout.width = Some(num(key, value)?),
            "layout.height" => self.layout.height = Some(num(key, value)?),
            "layout.center_w" => self.layout.center_w = num(key, value)?,
            "layout.center_h" => self.layout.center_h = num(key, value)?,
            "layout.surround_stride" => self.layout.surround_stride = num(key, value)?,
            "layout.neighborhood" => self.layout.neighborhood = num(key, value)?,
            "oms.g_center" => self.oms.g_center = ratio(key, value)?,
            "oms.g_surround" => {
                self.oms.g_surround = if value.eq_ignore_ascii_case("balanced") {
                    SurroundWeight::Balanced
                } else {
                    SurroundWeight::Fixed(ratio(key, value)?)
                }
            }
            "oms.trip_fraction" => self.oms.trip_fraction = ratio(key, value)?,
            "oms.min_center_activity" => self.oms.min_center_activity = num(key, value)?,
            "oms.idle_value" => self.oms.idle_value = num(key, value)?,
            "ld.g_on" => self.ld.g_on = ratio(key, value)?,
            "ld.g_off" => self.ld.g_off = ratio(key, value)?,
            "ld.band_halfwidth" => self.ld.band_halfwidth = ratio(key, value)?,
            "ld.min_activity" => self.ld.min_activity = num(key, value)?,
            "ld.idle_value" => self.ld.idle_value = num(key, value)?,
            "engines.oms" => self.engines.oms = boolean(key, value)?,
            "engines.ld" => self.engines.ld = boolean(key, value)?,
            "input.path" => self.input.path = Some(PathBuf::from(value)),
            "input.raw_dims" => self.input.raw_dims = Some(parse_dims(value).map_err(|e| Error::config(key, e))?),
            "output.dir" => self.output_dir = Some(PathBuf::from(value)),
            other => {
                return Err(Error::ConfigParse {
                    line: 0,
                    message: format!("unknown key `{other}`"),
                })
            }
        }
        Ok(())
    }
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(key, format!("`{value}` is not a valid number")))
}

fn ratio(key: &str, value: &str) -> Result<Ratio> {
    value
        .parse()
        .map_err(|_| Error::config(key, format!("`{value}` is not a non-negative decimal")))
}

fn boolean(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::config(key, format!("`{value}` is not a boolean"))),
    }
}

/// Parses `WxH`.
pub fn parse_dims(value: &str) -> std::result::Result<(usize, usize), String> {
    let (w, h) = value
        .trim()
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("`{value}` is not WxH"))?;
    let w: usize = w.trim().parse().map_err(|_| format!("bad width in `{value}`"))?;
    let h: usize = h.trim().parse().map_err(|_| format!("bad height in `{value}`"))?;
    if w == 0 || h == 0 {
        return Err(format!("`{value}` has a zero dimension"));
    }
    Ok((w, h))
}

pub fn read_config(path: &Path) -> Result<PipelineConfig> {
    let bytes = super::read_file(path)?;
    let text = String::from_utf8(bytes).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        offset: e.utf8_error().valid_up_to() as u64,
        message: "config is not UTF-8".into(),
    })?;
    PipelineConfig::parse(&text)
}
