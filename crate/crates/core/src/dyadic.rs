//! Dyadic rationals `num / 2^exp`, used for distance thresholds and for
//! printing truncated distances exactly.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported denominator exponent.
pub const MAX_EXP: u32 = 63;

/// A nonnegative dyadic rational in lowest terms.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Dyadic {
    num: u64,
    exp: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { num: 0, exp: 0 };
    pub const ONE: Dyadic = Dyadic { num: 1, exp: 0 };

    pub fn new(num: u64, exp: u32) -> Result<Self> {
        if exp > MAX_EXP {
            return Err(Error::InvalidDelta(format!(
                "denominator 2^{exp} exceeds 2^{MAX_EXP}"
            )));
        }
        let mut d = Dyadic { num, exp };
        d.normalize();
        Ok(d)
    }

    /// `2^-l`.
    pub fn pow2_neg(l: u32) -> Result<Self> {
        Dyadic::new(1, l)
    }

    /// `1 - 2^-r`.
    pub fn one_minus_pow2_neg(r: u32) -> Result<Self> {
        if r == 0 || r > MAX_EXP {
            return Err(Error::InvalidDelta(format!("1-2^-{r} is out of range")));
        }
        Dyadic::new((1u64 << r) - 1, r)
    }

    fn normalize(&mut self) {
        if self.num == 0 {
            self.exp = 0;
            return;
        }
        let tz = self.num.trailing_zeros().min(self.exp);
        self.num >>= tz;
        self.exp -= tz;
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    /// Number of binary digits after the point.
    pub fn exponent(&self) -> u32 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    /// Whether `0 < self < 1`.
    pub fn in_unit_open(&self) -> bool {
        self.num > 0 && (self.num >> self.exp) == 0
    }

    /// `self * 2^bits`, if that is an integer.
    pub fn scaled(&self, bits: u32) -> Option<u128> {
        if self.exp > bits {
            return None;
        }
        Some((self.num as u128) << (bits - self.exp))
    }

    /// Exact comparison against `x / 2^bits` (bits <= 64).
    pub fn cmp_scaled(&self, x: u128, bits: u32) -> Ordering {
        // self = num / 2^exp; compare num * 2^bits with x * 2^exp.
        let lhs = BigUint::from(self.num) << bits as usize;
        let rhs = BigUint::from(x) << self.exp as usize;
        lhs.cmp(&rhs)
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(
            self.num.into(),
            num_bigint::BigInt::one() << self.exp as usize,
        )
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / 2f64.powi(self.exp as i32)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = (self.num as u128) << (MAX_EXP - self.exp);
        let rhs = (other.num as u128) << (MAX_EXP - other.exp);
        lhs.cmp(&rhs)
    }
}

/// Exact decimal expansion of `num / 2^exp`.
pub fn decimal_string(num: &BigUint, exp: u32) -> String {
    if exp == 0 {
        return num.to_string();
    }
    let five = BigUint::from(5u32).pow(exp);
    let digits = (num * five).to_string();
    let exp = exp as usize;
    let (int_part, frac_part) = if digits.len() > exp {
        let split = digits.len() - exp;
        (digits[..split].to_string(), digits[split..].to_string())
    } else {
        ("0".to_string(), format!("{}{}", "0".repeat(exp - digits.len()), digits))
    };
    let frac = frac_part.trim_end_matches('0');
    if frac.is_empty() {
        int_part
    } else {
        format!("{int_part}.{frac}")
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&decimal_string(&BigUint::from(self.num), self.exp))
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.num, self.exp)
    }
}

fn parse_pow2_neg(s: &str) -> Option<u32> {
    s.strip_prefix("2^-")?.parse().ok()
}

impl FromStr for Dyadic {
    type Err = Error;

    /// Accepts `0.0625`, `1/16`, `2^-4`, `1-2^-3` and integers.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidDelta(format!("cannot read {s:?} as a dyadic rational"));
        if let Some(l) = parse_pow2_neg(s) {
            return Dyadic::pow2_neg(l);
        }
        if let Some(rest) = s.strip_prefix("1-") {
            let r = parse_pow2_neg(rest).ok_or_else(bad)?;
            return Dyadic::one_minus_pow2_neg(r);
        }
        if let Some((p, q)) = s.split_once('/') {
            let p: u64 = p.trim().parse().map_err(|_| bad())?;
            let q: u64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0 || !q.is_power_of_two() {
                return Err(Error::InvalidDelta(format!(
                    "{s:?}: denominator must be a power of two"
                )));
            }
            return Dyadic::new(p, q.trailing_zeros());
        }
        let (int_part, frac_part) = s.split_once('.').unwrap_or((s, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.bytes().all(|c| c.is_ascii_digit()) || !frac_part.bytes().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let digits = format!("{int_part}{frac_part}");
        let scaled: BigUint = if digits.is_empty() {
            BigUint::zero()
        } else {
            digits.parse().map_err(|_| bad())?
        };
        let d = frac_part.len() as u32;
        let five = BigUint::from(5u32).pow(d);
        if !(&scaled % &five).is_zero() {
            return Err(Error::InvalidDelta(format!("{s:?} is not a dyadic rational")));
        }
        let num = scaled / five;
        let num: u64 = num
            .try_into()
            .map_err(|_| Error::InvalidDelta(format!("{s:?} is too large")))?;
        Dyadic::new(num, d)
    }
}

impl TryFrom<String> for Dyadic {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Dyadic> for String {
    fn from(d: Dyadic) -> String {
        d.to_string()
    }
}
