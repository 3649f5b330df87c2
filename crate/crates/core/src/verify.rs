//! Exhaustive agreement check between the analog divider decisions and their
//! integer cross-multiplication forms.

use std::fmt;

use crate::ld::{ld_decide, ld_decide_digital, ld_voltage, LdConfig, LoomPolarity};
use crate::oms::{
    oms_analog_voltage, oms_decide, oms_decide_digital, OmsConfig, OmsWeights, SurroundWeight,
};
use crate::ratio::Ratio;

pub const OMS_MAX_CENTER: u32 = 16;
pub const OMS_MAX_SURROUND: u32 = 48;
pub const LD_MAX_COUNT: u32 = 32;

/// Cases enumerated per OMS parameter set.
pub const OMS_CASES_PER_SET: u64 = (OMS_MAX_CENTER as u64 + 1) * (OMS_MAX_SURROUND as u64 + 1);
/// Cases enumerated per LD parameter set.
pub const LD_CASES_PER_SET: u64 = (LD_MAX_COUNT as u64 + 1) * (LD_MAX_COUNT as u64 + 1);

#[derive(Debug, Clone, PartialEq)]
pub enum Mismatch {
    Oms {
        weights: OmsWeights,
        trip: Ratio,
        c_on: u32,
        s_on: u32,
        v_norm: f64,
        analog: bool,
        digital: bool,
    },
    Ld {
        g_on: Ratio,
        g_off: Ratio,
        band: Ratio,
        n_on: u32,
        n_off: u32,
        v_norm: f64,
        analog: (bool, LoomPolarity),
        digital: (bool, LoomPolarity),
    },
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mismatch::Oms {
                weights,
                trip,
                c_on,
                s_on,
                v_norm,
                analog,
                digital,
            } => write!(
                f,
                "OMS g_center={} g_surround={} trip={} c_on={c_on} s_on={s_on} v_norm={v_norm:.9} analog={analog} digital={digital}",
                weights.center, weights.surround, trip
            ),
            Mismatch::Ld {
                g_on,
                g_off,
                band,
                n_on,
                n_off,
                v_norm,
                analog,
                digital,
            } => write!(
                f,
                "LD g_on={g_on} g_off={g_off} band={band} n_on={n_on} n_off={n_off} v_norm={v_norm:.9} analog={}/{} digital={}/{}",
                analog.0,
                analog.1.as_str(),
                digital.0,
                digital.1.as_str()
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerifyReport {
    pub oms_sets: u64,
    pub ld_sets: u64,
    pub oms_cases: u64,
    pub ld_cases: u64,
    pub mismatches: Vec<Mismatch>,
}

impl VerifyReport {
    pub fn total_cases(&self) -> u64 {
        self.oms_cases + self.ld_cases
    }

    pub fn is_ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Enumerates every `(c_on, s_on)` in range. The analog path uses `analog`,
/// the integer path `digital`; they differ only in fault-injection tests.
pub fn check_oms(
    weights: &OmsWeights,
    analog: &OmsConfig,
    digital: &OmsConfig,
    out: &mut Vec<Mismatch>,
) -> u64 {
    let mut cases = 0;
    for c_on in 0..=OMS_MAX_CENTER {
        for s_on in 0..=OMS_MAX_SURROUND {
            let v_norm = oms_analog_voltage(c_on, s_on, weights, analog.idle_value);
            let a = oms_decide(v_norm, c_on, analog);
            let d = oms_decide_digital(c_on, s_on, weights, digital);
            if a != d {
                out.push(Mismatch::Oms {
                    weights: *weights,
                    trip: analog.trip_fraction,
                    c_on,
                    s_on,
                    v_norm,
                    analog: a,
                    digital: d,
                });
            }
            cases += 1;
        }
    }
    cases
}

pub fn check_ld(analog: &LdConfig, digital: &LdConfig, out: &mut Vec<Mismatch>) -> u64 {
    let mut cases = 0;
    for n_on in 0..=LD_MAX_COUNT {
        for n_off in 0..=LD_MAX_COUNT {
            let v_norm = ld_voltage(n_on, n_off, analog);
            let a = ld_decide(v_norm, n_on, n_off, analog);
            let d = ld_decide_digital(n_on, n_off, digital);
            if a != d {
                out.push(Mismatch::Ld {
                    g_on: analog.g_on,
                    g_off: analog.g_off,
                    band: analog.band_halfwidth,
                    n_on,
                    n_off,
                    v_norm,
                    analog: a,
                    digital: d,
                });
            }
            cases += 1;
        }
    }
    cases
}

fn r(n: u64, d: u64) -> Ratio {
    Ratio::new(n, d).expect("grid ratio")
}

/// Parameter sets swept by [`run_verify`].
#[derive(Debug, Clone)]
pub struct VerifyPlan {
    pub oms: Vec<(OmsWeights, OmsConfig)>,
    pub ld: Vec<LdConfig>,
}

impl Default for VerifyPlan {
    fn default() -> Self {
        let oms_center = [r(1, 1), r(2, 1), r(4, 1), r(1, 2), r(3, 7), r(5, 3)];
        let oms_surround = [r(1, 1), r(1, 3), r(1, 4), r(2, 1), r(7, 10), r(3, 1)];
        let trips = [
            r(1, 2),
            r(11, 20),
            r(3, 5),
            r(13, 20),
            r(7, 10),
            r(3, 4),
            r(4, 5),
            r(9, 10),
            r(1, 10),
            r(1, 3),
        ];
        let mut oms = Vec::new();
        for &gc in &oms_center {
            for &gs in &oms_surround {
                for &trip in &trips {
                    let cfg = OmsConfig {
                        g_center: gc,
                        g_surround: SurroundWeight::Fixed(gs),
                        trip_fraction: trip,
                        ..OmsConfig::default()
                    };
                    oms.push((
                        OmsWeights {
                            center: gc,
                            surround: gs,
                        },
                        cfg,
                    ));
                }
            }
        }

        let ld_weights = [r(1, 1), r(2, 1), r(1, 2), r(3, 7), r(5, 4)];
        let bands = [r(1, 10), r(1, 5), r(1, 4), r(3, 10), r(1, 3), r(9, 20)];
        let mut ld = Vec::new();
        for &g_on in &ld_weights {
            for &g_off in &ld_weights {
                for &band_halfwidth in &bands {
                    ld.push(LdConfig {
                        g_on,
                        g_off,
                        band_halfwidth,
                        ..LdConfig::default()
                    });
                }
            }
        }
        VerifyPlan { oms, ld }
    }
}

pub fn run_verify(plan: &VerifyPlan) -> VerifyReport {
    let mut report = VerifyReport::default();
    for (weights, cfg) in &plan.oms {
        report.oms_cases += check_oms(weights, cfg, cfg, &mut report.mismatches);
        report.oms_sets += 1;
    }
    for cfg in &plan.ld {
        report.ld_cases += check_ld(cfg, cfg, &mut report.mismatches);
        report.ld_sets += 1;
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_plan_agrees_everywhere() {
        let plan = VerifyPlan::default();
        let report = run_verify(&plan);
        assert!(report.is_ok(), "{}", report.mismatches[0]);
        assert_eq!(report.oms_cases, report.oms_sets * 17 * 49);
        assert_eq!(report.ld_cases, report.ld_sets * 33 * 33);
        assert!(report.total_cases() >= 50_000);
    }

    #[test]
    fn single_default_set_counts() {
        let plan = VerifyPlan {
            oms: vec![(
                OmsConfig::default().weights_for(1, 1).unwrap(),
                OmsConfig::default(),
            )],
            ld: vec![LdConfig::default()],
        };
        let report = run_verify(&plan);
        assert!(report.is_ok());
        assert_eq!(report.total_cases(), 17 * 49 + 33 * 33);
    }

    #[test]
    fn skewed_trip_point_is_caught() {
        let analog = OmsConfig::default();
        let digital = OmsConfig {
            trip_fraction: r(13, 20),
            ..OmsConfig::default()
        };
        let w = analog.weights_for(1, 1).unwrap();
        let mut out = Vec::new();
        check_oms(&w, &analog, &digital, &mut out);
        assert!(!out.is_empty());
        // v = 0.6 exactly with c_on = 3, s_on = 2
        assert!(out.iter().any(|m| matches!(m, Mismatch::Oms { c_on: 3, s_on: 2, .. })));
        assert!(out[0].to_string().starts_with("OMS "));
    }

    #[test]
    fn skewed_band_is_caught() {
        let analog = LdConfig::default();
        let digital = LdConfig {
            band_halfwidth: r(1, 5),
            ..LdConfig::default()
        };
        let mut out = Vec::new();
        check_ld(&analog, &digital, &mut out);
        assert!(out.iter().any(|m| matches!(m, Mismatch::Ld { n_on: 3, n_off: 1, .. })));
    }

    #[test]
    fn all_zero_counts_agree_on_silence() {
        for (w, cfg) in VerifyPlan::default().oms {
            assert!(!oms_decide(oms_analog_voltage(0, 0, &w, cfg.idle_value), 0, &cfg));
            assert!(!oms_decide_digital(0, 0, &w, &cfg));
        }
        for cfg in VerifyPlan::default().ld {
            assert!(!ld_decide(ld_voltage(0, 0, &cfg), 0, 0, &cfg).0);
            assert!(!ld_decide_digital(0, 0, &cfg).0);
        }
    }
}
