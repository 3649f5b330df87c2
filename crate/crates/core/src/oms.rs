//! Object motion sensitivity.
//!
//! Active center pixels pull the accumulation node toward full scale through
//! `g_center`, active surround pixels drain it through `g_surround`, and the
//! settled divider value is compared with the buffer trip point. ON and OFF
//! events count alike.

use crate::error::{Error, Result};
use crate::frontend::{check_dims, BipolarEventMap};
use crate::layout::{RfId, RfLayout};
use crate::ratio::Ratio;

/// Surround conductance: fixed, or balanced per field so that
/// `g_surround * |S| = g_center * |C|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurroundWeight {
    Balanced,
    Fixed(Ratio),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OmsConfig {
    pub g_center: Ratio,
    pub g_surround: SurroundWeight,
    pub trip_fraction: Ratio,
    pub min_center_activity: u32,
    /// Node value reported when no device conducts.
    pub idle_value: f64,
}

impl Default for OmsConfig {
    fn default() -> Self {
        OmsConfig {
            g_center: Ratio::ONE,
            g_surround: SurroundWeight::Balanced,
            trip_fraction: Ratio::new(3, 5).expect("3/5"),
            min_center_activity: 1,
            idle_value: 0.0,
        }
    }
}

impl OmsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.g_center.is_zero() {
            return Err(Error::config("oms.g_center", "must be positive"));
        }
        if let SurroundWeight::Fixed(g) = self.g_surround {
            if g.is_zero() {
                return Err(Error::config("oms.g_surround", "must be positive"));
            }
        }
        if !self.trip_fraction.is_proper_fraction() {
            return Err(Error::config("oms.trip_fraction", "must lie in (0, 1)"));
        }
        if self.min_center_activity == 0 {
            return Err(Error::config("oms.min_center_activity", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.idle_value) {
            return Err(Error::config("oms.idle_value", "must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Conductances for a field with the given center and surround sizes.
    pub fn weights_for(&self, center_size: usize, surround_size: usize) -> Result<OmsWeights> {
        let surround = match self.g_surround {
            SurroundWeight::Fixed(g) => g,
            SurroundWeight::Balanced if surround_size == 0 => self.g_center,
            SurroundWeight::Balanced => u64::try_from(center_size)
                .ok()
                .zip(u64::try_from(surround_size).ok())
                .and_then(|(c, s)| Ratio::new(c, s))
                .and_then(|r| self.g_center.checked_mul(r))
                .ok_or_else(|| Error::config("oms.g_surround", "balanced weight out of range"))?,
        };
        Ok(OmsWeights {
            center: self.g_center,
            surround,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OmsWeights {
    pub center: Ratio,
    pub surround: Ratio,
}

impl OmsWeights {
    /// Both conductances scaled to integers by the product of their
    /// denominators. Only the ratio matters to the divider.
    pub fn common_denominator(&self) -> (u64, u64) {
        scaled_pair(self.center, self.surround)
    }
}

pub(crate) fn scaled_pair(a: Ratio, b: Ratio) -> (u64, u64) {
    (a.numer() * b.denom(), b.numer() * a.denom())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmsResult {
    pub rf: RfId,
    pub c_on: u32,
    pub s_on: u32,
    pub v_norm: f64,
    pub spike: bool,
}

/// Active center and surround pixel counts of one field.
pub fn oms_counts(events: &BipolarEventMap, layout: &RfLayout, rf: RfId) -> Result<(u32, u32)> {
    check_dims(
        (layout.width(), layout.height()),
        (events.width(), events.height()),
    )?;
    let f = layout.field(rf)?;
    Ok(count_active(events, &f.center, &f.surround))
}

fn count_active(events: &BipolarEventMap, center: &[u32], surround: &[u32]) -> (u32, u32) {
    let ch = events.channels();
    let c = center.iter().filter(|&&i| ch[i as usize].is_active()).count();
    let s = surround.iter().filter(|&&i| ch[i as usize].is_active()).count();
    (c as u32, s as u32)
}

/// Settled divider voltage as a fraction of full scale.
pub fn oms_analog_voltage(c_on: u32, s_on: u32, weights: &OmsWeights, idle_value: f64) -> f64 {
    if c_on == 0 && s_on == 0 {
        return idle_value;
    }
    let (gc, gs) = weights.common_denominator();
    let up = gc as f64 * f64::from(c_on);
    let down = gs as f64 * f64::from(s_on);
    up / (up + down)
}

/// Buffer decision on the analog node value.
pub fn oms_decide(v_norm: f64, c_on: u32, cfg: &OmsConfig) -> bool {
    c_on >= cfg.min_center_activity && v_norm >= cfg.trip_fraction.to_f64()
}

/// Integer form of the same decision:
/// `g_center * c_on * (1 - tau) >= tau * g_surround * s_on`, cleared of
/// denominators.
pub fn oms_decide_digital(c_on: u32, s_on: u32, weights: &OmsWeights, cfg: &OmsConfig) -> bool {
    if c_on < cfg.min_center_activity {
        return false;
    }
    let (gc, gs, tau) = (weights.center, weights.surround, cfg.trip_fraction);
    let (p, q) = (u128::from(tau.numer()), u128::from(tau.denom()));
    let lhs = u128::from(gc.numer()) * u128::from(gs.denom()) * u128::from(c_on) * (q - p);
    let rhs = p * u128::from(gs.numer()) * u128::from(gc.denom()) * u128::from(s_on);
    lhs >= rhs
}

/// Per-field OMS evaluation with conductances resolved once per layout.
#[derive(Debug, Clone)]
pub struct OmsEngine {
    dims: (usize, usize),
    cfg: OmsConfig,
    weights: Vec<OmsWeights>,
}

impl OmsEngine {
    pub fn new(layout: &RfLayout, cfg: OmsConfig) -> Result<Self> {
        cfg.validate()?;
        let weights = layout
            .fields()
            .iter()
            .map(|f| cfg.weights_for(f.center.len(), f.surround.len()))
            .collect::<Result<_>>()?;
        Ok(OmsEngine {
            dims: (layout.width(), layout.height()),
            cfg,
            weights,
        })
    }

    pub fn config(&self) -> &OmsConfig {
        &self.cfg
    }

    pub fn weights(&self, rf: RfId) -> Result<&OmsWeights> {
        self.weights.get(rf as usize).ok_or(Error::UnknownRf(rf))
    }

    /// Evaluates every field of `layout`, which must be the layout the engine
    /// was built for.
    pub fn step(&self, layout: &RfLayout, events: &BipolarEventMap) -> Result<Vec<OmsResult>> {
        check_dims(self.dims, (layout.width(), layout.height()))?;
        check_dims(self.dims, (events.width(), events.height()))?;
        if layout.len() != self.weights.len() {
            return Err(Error::config("layout", "engine was built for a different layout"));
        }
        Ok(layout
            .fields()
            .iter()
            .zip(&self.weights)
            .map(|(f, w)| {
                let (c_on, s_on) = count_active(events, &f.center, &f.surround);
                let v_norm = oms_analog_voltage(c_on, s_on, w, self.cfg.idle_value);
                let spike = oms_decide(v_norm, c_on, &self.cfg);
                debug_assert_eq!(spike, oms_decide_digital(c_on, s_on, w, &self.cfg));
                OmsResult {
                    rf: f.id,
                    c_on,
                    s_on,
                    v_norm,
                    spike,
                }
            })
            .collect())
    }
}

/// Counts, voltage and decision for every field.
pub fn oms_step(events: &BipolarEventMap, layout: &RfLayout, cfg: &OmsConfig) -> Result<Vec<OmsResult>> {
    OmsEngine::new(layout, cfg.clone())?.step(layout, events)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub percent: u32,
    pub c_on: u32,
    pub s_on: u32,
    pub v_norm: f64,
    pub spike: bool,
}

/// Node voltage with the whole center active while the active share of the
/// surround rises from 10 % to 100 % in 10 % steps (counts rounded to the
/// nearest pixel).
pub fn surround_sweep(center_size: u32, surround_size: u32, cfg: &OmsConfig) -> Result<Vec<SweepPoint>> {
    cfg.validate()?;
    let w = cfg.weights_for(center_size as usize, surround_size as usize)?;
    Ok((1..=10)
        .map(|k| {
            let s_on = (k * surround_size + 5) / 10;
            let v_norm = oms_analog_voltage(center_size, s_on, &w, cfg.idle_value);
            SweepPoint {
                percent: k * 10,
                c_on: center_size,
                s_on,
                v_norm,
                spike: oms_decide(v_norm, center_size, cfg),
            }
        })
        .collect())
}
