//! The point families: concatenations `M_{a_1} M_{a_2} ...` of Morse blocks
//! where selected blocks are complemented.
//!
//! * `lemma1`: every block plain.
//! * `t1`: block `j` complemented iff `j` is even and `j` lies in `W_i`.
//! * `t2`: odd block `2t - 1` complemented iff `alpha(t) = 1`; even blocks plain.
//! * `r3`: every block complemented.
//!
//! Points serialize as one-line descriptors:
//!
//! ```text
//! morse
//! const bit=<0|1>
//! lemma1 gaps=<list>
//! t1 i=<int> gaps=<list>
//! t2 beta=<bits> gaps=<list>
//! r3 gaps=<list>
//! shift k=<bigint> of=<descriptor>
//! ```

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::symseq::{constant_point, morse_point, BlockBody, Body, SymbolicPoint};
use crate::words::Word;

/// Largest accepted block exponent.
pub const MAX_EXPONENT: u32 = 1 << 16;

/// A finite working prefix of the increasing exponent sequence `{a_n}`,
/// with block boundaries `s_k = sum_{n <= k} 2^{a_n}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GapSequence {
    exponents: Vec<u32>,
    /// `sums[k] = s_k`, with `sums[0] = 0`.
    sums: Vec<BigUint>,
    parity_locked: bool,
}

impl GapSequence {
    /// A gap sequence without the parity requirement.
    pub fn new(exponents: Vec<u32>) -> Result<Self> {
        if exponents.is_empty() {
            return Err(Error::InvalidGaps("at least one exponent is required".into()));
        }
        if let Some(&a) = exponents.iter().find(|&&a| a == 0 || a > MAX_EXPONENT) {
            return Err(Error::InvalidGaps(format!(
                "exponent {a} outside 1..={MAX_EXPONENT}"
            )));
        }
        if let Some(w) = exponents.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidGaps(format!(
                "exponents must increase strictly ({} then {})",
                w[0], w[1]
            )));
        }
        let mut sums = Vec::with_capacity(exponents.len() + 1);
        sums.push(BigUint::zero());
        for &a in &exponents {
            let next = sums.last().unwrap() + (BigUint::one() << a as usize);
            sums.push(next);
        }
        Ok(GapSequence {
            exponents,
            sums,
            parity_locked: false,
        })
    }

    /// A gap sequence with `a_n = n (mod 2)` enforced.
    pub fn parity_locked(exponents: Vec<u32>) -> Result<Self> {
        let mut g = GapSequence::new(exponents)?;
        g.check_parity()?;
        g.parity_locked = true;
        Ok(g)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    /// Number of blocks `N`.
    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn is_parity_locked(&self) -> bool {
        self.parity_locked
    }

    /// `a_n` for 1-based `n`.
    pub fn exponent(&self, n: usize) -> u32 {
        self.exponents[n - 1]
    }

    /// `2^{a_j}`.
    pub fn block_len(&self, j: usize) -> BigUint {
        BigUint::one() << self.exponents[j - 1] as usize
    }

    /// `s_k`, for `k` in `0..=N`.
    pub fn boundary(&self, k: usize) -> &BigUint {
        &self.sums[k]
    }

    pub fn boundaries(&self) -> &[BigUint] {
        &self.sums
    }

    /// `s_N`, the last evaluable index.
    pub fn horizon(&self) -> &BigUint {
        self.sums.last().unwrap()
    }

    /// Block `j` with `s_{j-1} < idx <= s_j`, and the 0-based offset
    /// `idx - s_{j-1} - 1` inside it.
    pub fn locate(&self, idx: &BigUint) -> Option<(usize, BigUint)> {
        if idx.is_zero() || idx > self.horizon() {
            return None;
        }
        // first k with s_k >= idx
        let j = self.sums.partition_point(|s| s < idx);
        Some((j, idx - &self.sums[j - 1] - 1u32))
    }

    /// First position whose exponent has the wrong parity.
    pub fn parity_violation(&self) -> Option<(usize, u32)> {
        self.exponents
            .iter()
            .enumerate()
            .map(|(i, &a)| (i + 1, a))
            .find(|&(n, a)| (a as usize) % 2 != n % 2)
    }

    pub fn parity_conforms(&self) -> bool {
        self.parity_violation().is_none()
    }

    fn check_parity(&self) -> Result<()> {
        match self.parity_violation() {
            Some((position, exponent)) => Err(Error::ParityViolation { position, exponent }),
            None => Ok(()),
        }
    }

    /// The prefix of the first `n` blocks.
    pub fn truncated(&self, n: usize) -> Result<GapSequence> {
        if n == 0 || n > self.len() {
            return Err(Error::OutOfRange(format!("cannot keep {n} of {} blocks", self.len())));
        }
        let mut g = GapSequence::new(self.exponents[..n].to_vec())?;
        g.parity_locked = self.parity_locked;
        Ok(g)
    }
}

impl fmt::Display for GapSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&join_list(&self.exponents))
    }
}

fn join_list(xs: &[u32]) -> String {
    xs.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

/// Parses a comma-separated exponent list such as `3,4,9,16`.
pub fn parse_gap_list(s: &str) -> Result<Vec<u32>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| Error::InvalidGaps(format!("cannot read {t:?} in gap list {s:?}")))
        })
        .collect()
}

/// Whether `j` lies in `W_i = { 2^n (2i - 1) : n >= 1 }`.
pub fn w_set_member(i: u64, j: u64) -> bool {
    if i == 0 || j == 0 || j % 2 == 1 {
        return false;
    }
    let odd_part = j >> j.trailing_zeros();
    Some(odd_part) == i.checked_mul(2).map(|x| x - 1)
}

/// The index `i` with `j` in `W_i`, for even `j`.
pub fn w_set_index(j: u64) -> Option<u64> {
    if j == 0 || j % 2 == 1 {
        return None;
    }
    let odd_part = j >> j.trailing_zeros();
    Some((odd_part + 1) / 2)
}

/// An explicit coding `alpha(n) = beta(v_2(n) + 1)` of points of `{0,1}^N`.
///
/// Two distinct codes whose `beta` first differ at coordinate `k` differ at
/// every `n = 2^{k-1} (mod 2^k)`, so infinitely often. `beta` is a finite
/// prefix; coordinates past its end read as 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AlphaCode {
    beta: Word,
}

impl AlphaCode {
    pub fn beta(&self) -> &Word {
        &self.beta
    }

    /// `beta(c)` for 1-based `c`.
    pub fn beta_at(&self, c: usize) -> u8 {
        self.beta.get(c - 1).unwrap_or(0)
    }

    /// `alpha(n)` for 1-based `n`.
    pub fn alpha_at(&self, n: u64) -> u8 {
        assert!(n >= 1, "alpha is indexed from 1");
        self.beta_at(n.trailing_zeros() as usize + 1)
    }

    /// First coordinate where the underlying `beta` sequences differ.
    pub fn first_difference(&self, other: &AlphaCode) -> Option<usize> {
        let n = self.beta.len().max(other.beta.len());
        (1..=n).find(|&c| self.beta_at(c) != other.beta_at(c))
    }
}

pub fn alpha_code(beta: Word) -> AlphaCode {
    AlphaCode { beta }
}

/// Per-block ratios `s_{n-1} / 2^{a_n}` and the verdicts drawn from them.
#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    pub exponents: Vec<u32>,
    /// `ratios[n - 1] = s_{n-1} / 2^{a_n}`, as exact fractions.
    pub ratios: Vec<String>,
    pub ratios_f64: Vec<f64>,
    /// Smallest `n >= 2` from which the ratios decrease strictly.
    pub decreasing_from: Option<usize>,
    pub eventually_decreasing: bool,
    pub final_ratio_within_tolerance: bool,
    pub parity_locked: bool,
    pub parity_conforms: bool,
    pub passed: bool,
}

/// `s_{n-1} / 2^{a_n}` for every `n`.
pub fn gap_ratios(g: &GapSequence) -> Vec<BigRational> {
    (1..=g.len())
        .map(|n| {
            BigRational::new(
                BigInt::from(g.boundary(n - 1).clone()),
                BigInt::from(g.block_len(n)),
            )
        })
        .collect()
}

/// Checks that `s_{n-1} / 2^{a_n}` is eventually decreasing and ends at or
/// below `ratio_tolerance`.
pub fn validate_gaps(g: &GapSequence, ratio_tolerance: &BigRational) -> GapReport {
    let ratios = gap_ratios(g);
    let n = ratios.len();
    // ratios[0] is always 0, so the trend is read from n = 2 on.
    let mut start = n;
    while start > 2 && ratios[start - 2] > ratios[start - 1] {
        start -= 1;
    }
    let eventually_decreasing = n <= 2 || start < n;
    let decreasing_from = (n >= 2 && start < n).then_some(start);
    let within = ratios.last().map_or(true, |r| r <= ratio_tolerance);
    GapReport {
        exponents: g.exponents().to_vec(),
        ratios: ratios.iter().map(|r| r.to_string()).collect(),
        ratios_f64: ratios.iter().map(|r| r.to_f64().unwrap_or(f64::NAN)).collect(),
        decreasing_from,
        eventually_decreasing,
        final_ratio_within_tolerance: within,
        parity_locked: g.is_parity_locked(),
        parity_conforms: g.parity_conforms(),
        passed: eventually_decreasing && within,
    }
}

/// `r_n = 3 * 2^{a_n} - s_{n-1}`: `sigma^{r_n}(m)` begins with `M_{a_1} ... M_{a_n}`.
pub fn shift_exponent_rn(g: &GapSequence, n: usize) -> Result<BigUint> {
    if n < 2 || n > g.len() {
        return Err(Error::OutOfRange(format!(
            "r_n needs 2 <= n <= {}, got {n}",
            g.len()
        )));
    }
    Ok(g.block_len(n) * 3u32 - g.boundary(n - 1))
}

fn block_point(descriptor: Descriptor, gaps: &GapSequence, flips: Vec<u8>) -> SymbolicPoint {
    SymbolicPoint::new(
        descriptor,
        Body::Blocks(Arc::new(BlockBody {
            gaps: gaps.clone(),
            flips,
        })),
    )
}

/// `x = M_{a_1} M_{a_2} M_{a_3} ...`
pub fn point_lemma1(g: &GapSequence) -> Result<SymbolicPoint> {
    g.check_parity()?;
    Ok(block_point(
        Descriptor::Lemma1 {
            gaps: g.exponents().to_vec(),
        },
        g,
        vec![0; g.len()],
    ))
}

/// `x^i`: even block `j` complemented exactly when `j` is in `W_i`.
pub fn point_theorem1(i: u64, g: &GapSequence) -> Result<SymbolicPoint> {
    if i == 0 {
        return Err(Error::OutOfRange("x^i needs i >= 1".into()));
    }
    g.check_parity()?;
    let flips = (1..=g.len() as u64)
        .map(|j| u8::from(w_set_member(i, j)))
        .collect();
    Ok(block_point(
        Descriptor::T1 {
            i,
            gaps: g.exponents().to_vec(),
        },
        g,
        flips,
    ))
}

/// `x^alpha = M^{alpha_1}_{a_1} M^0_{a_2} M^{alpha_2}_{a_3} M^0_{a_4} ...`
pub fn point_theorem2(alpha: &AlphaCode, g: &GapSequence) -> Result<SymbolicPoint> {
    let flips = (1..=g.len() as u64)
        .map(|j| if j % 2 == 1 { alpha.alpha_at((j + 1) / 2) } else { 0 })
        .collect();
    Ok(block_point(
        Descriptor::T2 {
            beta: alpha.beta().clone(),
            gaps: g.exponents().to_vec(),
        },
        g,
        flips,
    ))
}

/// `complement(M_{a_1}) complement(M_{a_2}) ...`
pub fn point_remark3(g: &GapSequence) -> Result<SymbolicPoint> {
    g.check_parity()?;
    Ok(block_point(
        Descriptor::Remark3 {
            gaps: g.exponents().to_vec(),
        },
        g,
        vec![1; g.len()],
    ))
}

/// Construction tag plus parameters; enough to rebuild a point exactly.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Descriptor {
    Morse,
    Constant { bit: u8 },
    Lemma1 { gaps: Vec<u32> },
    T1 { i: u64, gaps: Vec<u32> },
    T2 { beta: Word, gaps: Vec<u32> },
    Remark3 { gaps: Vec<u32> },
    Shift { k: BigUint, of: Box<Descriptor> },
}

impl Descriptor {
    /// Builds the point this descriptor names.
    pub fn build(&self) -> Result<SymbolicPoint> {
        let locked = |gaps: &[u32]| GapSequence::parity_locked(gaps.to_vec());
        let point = match self {
            Descriptor::Morse => morse_point(),
            Descriptor::Constant { bit } => constant_point(*bit)?,
            Descriptor::Lemma1 { gaps } => point_lemma1(&locked(gaps)?)?,
            Descriptor::T1 { i, gaps } => point_theorem1(*i, &locked(gaps)?)?,
            Descriptor::T2 { beta, gaps } => {
                point_theorem2(&alpha_code(beta.clone()), &GapSequence::new(gaps.clone())?)?
            }
            Descriptor::Remark3 { gaps } => point_remark3(&locked(gaps)?)?,
            Descriptor::Shift { k, of } => of.build()?.shift(k),
        };
        Ok(point)
    }

    /// The gap list of the underlying construction, if any.
    pub fn gaps(&self) -> Option<&[u32]> {
        match self {
            Descriptor::Morse | Descriptor::Constant { .. } => None,
            Descriptor::Lemma1 { gaps }
            | Descriptor::T1 { gaps, .. }
            | Descriptor::T2 { gaps, .. }
            | Descriptor::Remark3 { gaps } => Some(gaps),
            Descriptor::Shift { of, .. } => of.gaps(),
        }
    }
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Descriptor::Morse => f.write_str("morse"),
            Descriptor::Constant { bit } => write!(f, "const bit={bit}"),
            Descriptor::Lemma1 { gaps } => write!(f, "lemma1 gaps={}", join_list(gaps)),
            Descriptor::T1 { i, gaps } => write!(f, "t1 i={i} gaps={}", join_list(gaps)),
            Descriptor::T2 { beta, gaps } => {
                write!(f, "t2 beta={beta} gaps={}", join_list(gaps))
            }
            Descriptor::Remark3 { gaps } => write!(f, "r3 gaps={}", join_list(gaps)),
            Descriptor::Shift { k, of } => write!(f, "shift k={k} of={of}"),
        }
    }
}

fn take_field<'a>(fields: &mut Vec<(&'a str, &'a str)>, key: &str, tag: &str) -> Result<&'a str> {
    let pos = fields
        .iter()
        .position(|(k, _)| *k == key)
        .ok_or_else(|| Error::Descriptor(format!("`{tag}` needs `{key}=`")))?;
    Ok(fields.remove(pos).1)
}

impl FromStr for Descriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (tag, rest) = s.split_once(char::is_whitespace).unwrap_or((s, ""));
        let rest = rest.trim();
        if tag == "shift" {
            let rest = rest
                .strip_prefix("k=")
                .ok_or_else(|| Error::Descriptor("`shift` needs `k=<bigint> of=<descriptor>`".into()))?;
            let (k, of) = rest
                .split_once(char::is_whitespace)
                .ok_or_else(|| Error::Descriptor("`shift` needs `of=<descriptor>`".into()))?;
            let k: BigUint = k
                .parse()
                .map_err(|_| Error::Descriptor(format!("shift amount {k:?} is not a nonnegative integer")))?;
            let of = of
                .trim_start()
                .strip_prefix("of=")
                .ok_or_else(|| Error::Descriptor("`shift` needs `of=<descriptor>`".into()))?;
            return Ok(Descriptor::Shift {
                k,
                of: Box::new(of.parse()?),
            });
        }
        let mut fields = Vec::new();
        for token in rest.split_whitespace() {
            let (k, v) = token
                .split_once('=')
                .ok_or_else(|| Error::Descriptor(format!("expected key=value, found {token:?}")))?;
            if fields.iter().any(|(seen, _)| *seen == k) {
                return Err(Error::Descriptor(format!("repeated field `{k}`")));
            }
            fields.push((k, v));
        }
        let descriptor = match tag {
            "morse" => Descriptor::Morse,
            "const" => {
                let bit = match take_field(&mut fields, "bit", tag)? {
                    "0" => 0,
                    "1" => 1,
                    other => return Err(Error::Descriptor(format!("bit={other} is not 0 or 1"))),
                };
                Descriptor::Constant { bit }
            }
            "lemma1" => Descriptor::Lemma1 {
                gaps: parse_gap_list(take_field(&mut fields, "gaps", tag)?)?,
            },
            "t1" => {
                let i = take_field(&mut fields, "i", tag)?;
                let i: u64 = i
                    .parse()
                    .map_err(|_| Error::Descriptor(format!("i={i} is not a positive integer")))?;
                Descriptor::T1 {
                    i,
                    gaps: parse_gap_list(take_field(&mut fields, "gaps", tag)?)?,
                }
            }
            "t2" => {
                let beta = take_field(&mut fields, "beta", tag)?;
                if beta.is_empty() {
                    return Err(Error::Descriptor("beta= needs at least one bit".into()));
                }
                Descriptor::T2 {
                    beta: beta.parse().map_err(|e: Error| Error::Descriptor(e.to_string()))?,
                    gaps: parse_gap_list(take_field(&mut fields, "gaps", tag)?)?,
                }
            }
            "r3" => Descriptor::Remark3 {
                gaps: parse_gap_list(take_field(&mut fields, "gaps", tag)?)?,
            },
            other => return Err(Error::Descriptor(format!("unknown tag `{other}`"))),
        };
        if let Some((k, _)) = fields.first() {
            return Err(Error::Descriptor(format!("unexpected field `{k}` for `{tag}`")));
        }
        Ok(descriptor)
    }
}

/// Parses and builds a point in one step.
pub fn parse_point(s: &str) -> Result<SymbolicPoint> {
    s.parse::<Descriptor>()?.build()
}
