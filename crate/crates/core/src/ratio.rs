//! Exact positive rationals for weights and thresholds.
//!
//! The decision logic has two independent routes: a floating-point divider and
//! an integer cross-multiplication. Keeping every parameter as an exact ratio
//! lets the integer route be exact while the divider route still sees the
//! correctly rounded `f64` of the same value.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest accepted numerator or denominator after reduction.
pub const MAX_TERM: u64 = 1 << 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ratio {
    num: u64,
    den: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Ratio {
    pub const ONE: Ratio = Ratio { num: 1, den: 1 };

    /// Builds `num / den` in lowest terms. Zero denominators and terms above
    /// [`MAX_TERM`] are rejected.
    pub fn new(num: u64, den: u64) -> Option<Ratio> {
        if den == 0 {
            return None;
        }
        let g = gcd(num, den).max(1);
        let (num, den) = (num / g, den / g);
        if num > MAX_TERM || den > MAX_TERM {
            return None;
        }
        Some(Ratio { num, den })
    }

    pub fn integer(n: u32) -> Ratio {
        Ratio {
            num: u64::from(n),
            den: 1,
        }
    }

    /// Converts through the shortest decimal that round-trips to `value`, so
    /// `0.6` becomes exactly 3/5 rather than the binary approximation.
    pub fn from_f64(value: f64) -> Option<Ratio> {
        if !value.is_finite() || value < 0.0 {
            return None;
        }
        format!("{value}").parse().ok()
    }

    pub fn numer(self) -> u64 {
        self.num
    }

    pub fn denom(self) -> u64 {
        self.den
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }

    /// Strictly between 0 and 1.
    pub fn is_proper_fraction(self) -> bool {
        self.num > 0 && self.num < self.den
    }

    pub fn checked_mul(self, other: Ratio) -> Option<Ratio> {
        let g1 = gcd(self.num, other.den).max(1);
        let g2 = gcd(other.num, self.den).max(1);
        let num = (self.num / g1).checked_mul(other.num / g2)?;
        let den = (self.den / g2).checked_mul(other.den / g1)?;
        Ratio::new(num, den)
    }
}

impl Default for Ratio {
    fn default() -> Self {
        Ratio::ONE
    }
}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ratio {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (u128::from(self.num) * u128::from(other.den))
            .cmp(&(u128::from(other.num) * u128::from(self.den)))
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Denominators of the form 2^a 5^b have a finite decimal expansion.
        let mut d = self.den;
        while d.is_multiple_of(2) {
            d /= 2;
        }
        while d.is_multiple_of(5) {
            d /= 5;
        }
        if d == 1 {
            write!(f, "{}", self.to_f64())
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Ratio {
    type Err = Error;

    /// Accepts `123`, `0.25`, `.5`, `1e-3` and `3/7`.
    fn from_str(s: &str) -> Result<Ratio> {
        let bad = |why: &str| Error::config("<number>", format!("`{s}`: {why}"));
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: u64 = n.trim().parse().map_err(|_| bad("bad numerator"))?;
            let d: u64 = d.trim().parse().map_err(|_| bad("bad denominator"))?;
            return Ratio::new(n, d).ok_or_else(|| bad("out of range"));
        }
        let (mantissa, exp) = match s.find(['e', 'E']) {
            Some(i) => {
                let e: i32 = s[i + 1..].parse().map_err(|_| bad("bad exponent"))?;
                (&s[..i], e)
            }
            None => (s, 0),
        };
        let mantissa = mantissa.strip_prefix('+').unwrap_or(mantissa);
        let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad("not a number"));
        }
        if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
            return Err(bad("not a non-negative decimal"));
        }
        let digits = format!("{int_part}{frac_part}");
        let digits = digits.trim_start_matches('0');
        let mut num: u128 = if digits.is_empty() {
            0
        } else {
            digits.parse().map_err(|_| bad("too many digits"))?
        };
        let scale = exp - frac_part.len() as i32;
        let mut den: u128 = 1;
        if scale >= 0 {
            for _ in 0..scale {
                num = num.checked_mul(10).ok_or_else(|| bad("out of range"))?;
            }
        } else {
            for _ in 0..(-scale) {
                den = den.checked_mul(10).ok_or_else(|| bad("out of range"))?;
            }
        }
        if num == 0 {
            return Ok(Ratio { num: 0, den: 1 });
        }
        let (mut a, mut b) = (num, den);
        while b != 0 {
            (a, b) = (b, a % b);
        }
        let (num, den) = (num / a, den / a);
        let num = u64::try_from(num).map_err(|_| bad("out of range"))?;
        let den = u64::try_from(den).map_err(|_| bad("too precise"))?;
        Ratio::new(num, den).ok_or_else(|| bad("out of range"))
    }
}
