//! Looming detection.
//!
//! Within one field's center, ON events pull the node up through `g_on` and
//! OFF events pull it down through `g_off`. A translating edge pair produces
//! both and settles near half scale, inside the window comparator's rejection
//! band. An expanding boundary produces only one polarity and escapes it.

use crate::error::{Error, Result};
use crate::frontend::{check_dims, BipolarEventMap, Channel};
use crate::layout::{RfId, RfLayout};
use crate::ratio::Ratio;

#[derive(Debug, Clone, PartialEq)]
pub struct LdConfig {
    pub g_on: Ratio,
    pub g_off: Ratio,
    /// Half-width of the rejection window around 0.5.
    pub band_halfwidth: Ratio,
    pub min_activity: u32,
    pub idle_value: f64,
}

impl Default for LdConfig {
    fn default() -> Self {
        LdConfig {
            g_on: Ratio::ONE,
            g_off: Ratio::ONE,
            band_halfwidth: Ratio::new(1, 4).expect("1/4"),
            min_activity: 2,
            idle_value: 0.5,
        }
    }
}

impl LdConfig {
    /// Comparator reference levels `0.5 - delta` and `0.5 + delta`, each the
    /// correctly rounded value of the exact level.
    pub fn window(&self) -> (f64, f64) {
        let (p, q) = (self.band_halfwidth.numer(), self.band_halfwidth.denom());
        let low = (q - 2 * p) as f64 / (2 * q) as f64;
        let high = (q + 2 * p) as f64 / (2 * q) as f64;
        (low, high)
    }

    pub fn validate(&self) -> Result<()> {
        if self.g_on.is_zero() {
            return Err(Error::config("ld.g_on", "must be positive"));
        }
        if self.g_off.is_zero() {
            return Err(Error::config("ld.g_off", "must be positive"));
        }
        if !(self.band_halfwidth.is_proper_fraction()
            && self.band_halfwidth < Ratio::new(1, 2).expect("1/2"))
        {
            return Err(Error::config("ld.band_halfwidth", "must lie in (0, 0.5)"));
        }
        if self.min_activity == 0 {
            return Err(Error::config("ld.min_activity", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.idle_value) {
            return Err(Error::config("ld.idle_value", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LoomPolarity {
    None,
    DarkLoom,
    BrightLoom,
}

impl LoomPolarity {
    pub fn as_str(self) -> &'static str {
        match self {
            LoomPolarity::None => "NONE",
            LoomPolarity::DarkLoom => "DARK_LOOM",
            LoomPolarity::BrightLoom => "BRIGHT_LOOM",
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            LoomPolarity::None => LoomPolarity::None,
            LoomPolarity::DarkLoom => LoomPolarity::BrightLoom,
            LoomPolarity::BrightLoom => LoomPolarity::DarkLoom,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LdResult {
    pub rf: RfId,
    pub n_on: u32,
    pub n_off: u32,
    pub v_norm: f64,
    pub spike: bool,
    pub polarity: LoomPolarity,
}

/// ON and OFF counts over the field's center pixels.
pub fn ld_counts(events: &BipolarEventMap, layout: &RfLayout, rf: RfId) -> Result<(u32, u32)> {
    check_dims(
        (layout.width(), layout.height()),
        (events.width(), events.height()),
    )?;
    Ok(count_polarities(events, &layout.field(rf)?.center))
}

fn count_polarities(events: &BipolarEventMap, center: &[u32]) -> (u32, u32) {
    let ch = events.channels();
    let (mut on, mut off) = (0, 0);
    for &i in center {
        match ch[i as usize] {
            Channel::On => on += 1,
            Channel::Off => off += 1,
            Channel::None => {}
        }
    }
    (on, off)
}

pub fn ld_voltage(n_on: u32, n_off: u32, cfg: &LdConfig) -> f64 {
    if n_on == 0 && n_off == 0 {
        return cfg.idle_value;
    }
    let (g_on, g_off) = crate::oms::scaled_pair(cfg.g_on, cfg.g_off);
    let up = g_on as f64 * f64::from(n_on);
    let down = g_off as f64 * f64::from(n_off);
    up / (up + down)
}

/// Window comparator on the analog node value: fires when the node leaves
/// `[0.5 - delta, 0.5 + delta]`.
pub fn ld_decide(v_norm: f64, n_on: u32, n_off: u32, cfg: &LdConfig) -> (bool, LoomPolarity) {
    let activity = u64::from(n_on) + u64::from(n_off);
    if activity < u64::from(cfg.min_activity) {
        return (false, LoomPolarity::None);
    }
    let (low, high) = cfg.window();
    if v_norm > high {
        (true, LoomPolarity::BrightLoom)
    } else if v_norm < low {
        (true, LoomPolarity::DarkLoom)
    } else {
        (false, LoomPolarity::None)
    }
}

/// Integer form of the window test. With `up = g_on * n_on`,
/// `down = g_off * n_off` and `delta = p / q`, the node escapes above when
/// `up * (q - 2p) > down * (q + 2p)` and below when
/// `up * (q + 2p) < down * (q - 2p)`.
pub fn ld_decide_digital(n_on: u32, n_off: u32, cfg: &LdConfig) -> (bool, LoomPolarity) {
    if u64::from(n_on) + u64::from(n_off) < u64::from(cfg.min_activity) {
        return (false, LoomPolarity::None);
    }
    let (on, off) = (cfg.g_on, cfg.g_off);
    let up = u128::from(on.numer()) * u128::from(off.denom()) * u128::from(n_on);
    let down = u128::from(off.numer()) * u128::from(on.denom()) * u128::from(n_off);
    let (p, q) = (
        u128::from(cfg.band_halfwidth.numer()),
        u128::from(cfg.band_halfwidth.denom()),
    );
    if up * (q - 2 * p) > down * (q + 2 * p) {
        (true, LoomPolarity::BrightLoom)
    } else if up * (q + 2 * p) < down * (q - 2 * p) {
        (true, LoomPolarity::DarkLoom)
    } else {
        (false, LoomPolarity::None)
    }
}

pub fn ld_step(events: &BipolarEventMap, layout: &RfLayout, cfg: &LdConfig) -> Result<Vec<LdResult>> {
    check_dims(
        (layout.width(), layout.height()),
        (events.width(), events.height()),
    )?;
    Ok(layout
        .fields()
        .iter()
        .map(|f| {
            let (n_on, n_off) = count_polarities(events, &f.center);
            let v_norm = ld_voltage(n_on, n_off, cfg);
            let (spike, polarity) = ld_decide(v_norm, n_on, n_off, cfg);
            debug_assert_eq!((spike, polarity), ld_decide_digital(n_on, n_off, cfg));
            LdResult {
                rf: f.id,
                n_on,
                n_off,
                v_norm,
                spike,
                polarity,
            }
        })
        .collect())
}
