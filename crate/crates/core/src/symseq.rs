//! Points of the one-sided 2-shift as lazily evaluated infinite sequences,
//! the shift map, prefixes, and the truncated metric
//! `d(u, v) = sum_i [u_i != v_i] / 2^i`.
//!
//! Indices are 1-based and arbitrary precision. Block-built points are only
//! defined up to the last configured block boundary (their horizon).

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::constructions::{Descriptor, GapSequence};
use crate::dyadic;
use crate::error::{Error, Result};
use crate::words::{Word, MAX_BLOCK_ORDER};

/// Longest prefix materialized by [`prefix`].
pub const PREFIX_CAP: usize = 1 << MAX_BLOCK_ORDER;

/// Default metric precision `L`.
pub const DEFAULT_PRECISION: u32 = 32;

#[inline]
pub(crate) fn parity64(x: u64) -> u8 {
    (x.count_ones() & 1) as u8
}

#[inline]
pub(crate) fn parity_big(x: &BigUint) -> u8 {
    (x.count_ones() & 1) as u8
}

/// Symbol `t(p)` of the Morse sequence at 0-based offset `p`.
#[inline]
pub fn morse_symbol(p: &BigUint) -> u8 {
    parity_big(p)
}

/// Concatenation of Morse blocks `M_{a_j}`, each possibly complemented.
#[derive(Debug)]
pub(crate) struct BlockBody {
    pub gaps: GapSequence,
    /// `flips[j - 1]` is 1 when block `j` carries the complement.
    pub flips: Vec<u8>,
}

#[derive(Clone, Debug)]
pub(crate) enum Body {
    Constant(u8),
    Morse,
    Blocks(Arc<BlockBody>),
}

/// A point `u = u_1 u_2 u_3 ...` of the 2-shift.
#[derive(Clone)]
pub struct SymbolicPoint {
    descriptor: Descriptor,
    body: Body,
    shift: BigUint,
}

impl fmt::Debug for SymbolicPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymbolicPoint({})", self.descriptor)
    }
}

impl SymbolicPoint {
    pub(crate) fn new(descriptor: Descriptor, body: Body) -> Self {
        SymbolicPoint {
            descriptor,
            body,
            shift: BigUint::zero(),
        }
    }

    pub fn descriptor(&self) -> &Descriptor {
        &self.descriptor
    }

    /// Total shift applied to the underlying construction.
    pub fn total_shift(&self) -> &BigUint {
        &self.shift
    }

    /// Gap sequence and per-block complement flags, for block-built points.
    pub(crate) fn blocks(&self) -> Option<&BlockBody> {
        match &self.body {
            Body::Blocks(b) => Some(b),
            _ => None,
        }
    }

    /// Whether this point is a concatenation of (possibly complemented)
    /// Morse blocks, i.e. a member of one of the constructed families.
    pub fn is_block_built(&self) -> bool {
        self.blocks().is_some()
    }

    /// Largest evaluable index, or `None` when every index is evaluable.
    pub fn horizon(&self) -> Option<BigUint> {
        match &self.body {
            Body::Blocks(b) => {
                let end = b.gaps.horizon();
                Some(if *end > self.shift {
                    end - &self.shift
                } else {
                    BigUint::zero()
                })
            }
            _ => None,
        }
    }

    /// Whether indices `1..=n` are all evaluable.
    pub fn evaluable_through(&self, n: &BigUint) -> bool {
        self.horizon().map_or(true, |h| *n <= h)
    }

    /// Symbol at the 1-based index `n`.
    pub fn symbol_at(&self, n: &BigUint) -> Result<u8> {
        if n.is_zero() {
            return Err(Error::OutOfRange("symbol indices start at 1".into()));
        }
        let idx = n + &self.shift;
        match &self.body {
            Body::Constant(b) => Ok(*b),
            Body::Morse => Ok(morse_symbol(&(idx - 1u32))),
            Body::Blocks(b) => {
                let (j, offset) = b
                    .gaps
                    .locate(&idx)
                    .ok_or_else(|| Error::horizon(n, self.horizon().unwrap_or_default()))?;
                Ok(morse_symbol(&offset) ^ b.flips[j - 1])
            }
        }
    }

    pub fn symbol_at_u64(&self, n: u64) -> Result<u8> {
        self.symbol_at(&BigUint::from(n))
    }

    /// Sequential reader starting at the 1-based index `start`.
    pub fn cursor(&self, start: &BigUint) -> Result<Cursor<'_>> {
        if start.is_zero() {
            return Err(Error::OutOfRange("symbol indices start at 1".into()));
        }
        let offset = start - 1u32 + &self.shift;
        let inner = match &self.body {
            Body::Constant(b) => CursorInner::Constant(*b),
            Body::Morse => CursorInner::Morse(MorseCounter::at(&offset)),
            Body::Blocks(b) => {
                let idx = &offset + 1u32;
                match b.gaps.locate(&idx) {
                    None => CursorInner::Done,
                    Some((j, within)) => {
                        let remaining = b.gaps.block_len(j) - &within;
                        let mut state = BlockCursor {
                            body: b,
                            block: j,
                            counter: MorseCounter::at(&within),
                            flip: b.flips[j - 1],
                            left: 0,
                            left_rest: remaining,
                        };
                        state.refill();
                        CursorInner::Blocks(state)
                    }
                }
            }
        };
        Ok(Cursor { inner })
    }

    pub fn cursor_u64(&self, start: u64) -> Result<Cursor<'_>> {
        self.cursor(&BigUint::from(start))
    }

    /// `sigma^k(self)`.
    pub fn shift(&self, k: &BigUint) -> SymbolicPoint {
        SymbolicPoint {
            descriptor: Descriptor::Shift {
                k: k.clone(),
                of: Box::new(self.descriptor.clone()),
            },
            body: self.body.clone(),
            shift: &self.shift + k,
        }
    }

    /// The first `n` symbols.
    pub fn prefix(&self, n: usize) -> Result<Word> {
        prefix(self, n)
    }
}

/// Counts Morse offsets as `hi * 2^64 + lo`, keeping the popcount parity of
/// `hi` so each step costs one 64-bit popcount.
#[derive(Clone, Debug)]
struct MorseCounter {
    lo: u64,
    hi: BigUint,
    hi_parity: u8,
}

impl MorseCounter {
    fn at(offset: &BigUint) -> Self {
        let lo = offset.iter_u64_digits().next().unwrap_or(0);
        let hi: BigUint = offset >> 64u32;
        let hi_parity = parity_big(&hi);
        MorseCounter { lo, hi, hi_parity }
    }

    #[inline]
    fn bit(&self) -> u8 {
        parity64(self.lo) ^ self.hi_parity
    }

    #[inline]
    fn step(&mut self) {
        self.lo = self.lo.wrapping_add(1);
        if self.lo == 0 {
            self.hi += 1u32;
            self.hi_parity = parity_big(&self.hi);
        }
    }
}

#[derive(Clone, Debug)]
struct BlockCursor<'a> {
    body: &'a BlockBody,
    /// 1-based block number.
    block: usize,
    counter: MorseCounter,
    flip: u8,
    /// Symbols left in the current block: `left + left_rest`.
    left: u64,
    left_rest: BigUint,
}

impl BlockCursor<'_> {
    fn refill(&mut self) {
        let take = self.left_rest.to_u64().unwrap_or(u64::MAX);
        self.left = take;
        self.left_rest -= take;
    }

    /// Moves to the next block; false at the end of the gap sequence.
    fn next_block(&mut self) -> bool {
        if self.block >= self.body.gaps.len() {
            return false;
        }
        self.block += 1;
        self.counter = MorseCounter::at(&BigUint::zero());
        self.flip = self.body.flips[self.block - 1];
        self.left_rest = self.body.gaps.block_len(self.block);
        self.refill();
        true
    }
}

#[derive(Clone, Debug)]
enum CursorInner<'a> {
    Constant(u8),
    Morse(MorseCounter),
    Blocks(BlockCursor<'a>),
    Done,
}

/// Sequential symbol reader; yields `None` past the point's horizon.
#[derive(Clone, Debug)]
pub struct Cursor<'a> {
    inner: CursorInner<'a>,
}

impl Iterator for Cursor<'_> {
    type Item = u8;

    #[inline]
    fn next(&mut self) -> Option<u8> {
        match &mut self.inner {
            CursorInner::Constant(b) => Some(*b),
            CursorInner::Morse(c) => {
                let bit = c.bit();
                c.step();
                Some(bit)
            }
            CursorInner::Blocks(state) => {
                if state.left == 0 {
                    if !state.left_rest.is_zero() {
                        state.refill();
                    } else if !state.next_block() {
                        self.inner = CursorInner::Done;
                        return None;
                    }
                }
                let bit = state.counter.bit() ^ state.flip;
                state.counter.step();
                state.left -= 1;
                Some(bit)
            }
            CursorInner::Done => None,
        }
    }
}

/// The Morse sequence `m`: `m_n` is the parity of the binary digit sum of `n - 1`.
pub fn morse_point() -> SymbolicPoint {
    SymbolicPoint::new(Descriptor::Morse, Body::Morse)
}

/// The constant point `bbb...`.
pub fn constant_point(bit: u8) -> Result<SymbolicPoint> {
    if bit > 1 {
        return Err(Error::InvalidArgument(format!("{bit} is not a bit")));
    }
    Ok(SymbolicPoint::new(Descriptor::Constant { bit }, Body::Constant(bit)))
}

/// `sigma^k(x)`.
pub fn shift(x: &SymbolicPoint, k: &BigUint) -> SymbolicPoint {
    x.shift(k)
}

/// The word `x_1 ... x_n`.
pub fn prefix(x: &SymbolicPoint, n: usize) -> Result<Word> {
    if n > PREFIX_CAP {
        return Err(Error::capacity("prefix length", n, PREFIX_CAP));
    }
    let bits: Vec<u8> = x.cursor(&BigUint::one())?.take(n).collect();
    if bits.len() < n {
        return Err(Error::horizon(n, x.horizon().unwrap_or_default()));
    }
    Ok(Word::from_bits_unchecked(bits))
}

/// `sum_{i <= L} [u_i != v_i] / 2^i`, stored as the integer numerator over `2^L`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TruncatedDistance {
    #[serde(serialize_with = "crate::report::ser_biguint")]
    numerator: BigUint,
    precision: u32,
}

impl TruncatedDistance {
    pub fn new(numerator: BigUint, precision: u32) -> Result<Self> {
        if precision == 0 {
            return Err(Error::InvalidPrecision("precision must be positive".into()));
        }
        if numerator.bits() > precision as u64 {
            return Err(Error::InvalidArgument(format!(
                "numerator {numerator} does not fit {precision} bits"
            )));
        }
        Ok(TruncatedDistance {
            numerator,
            precision,
        })
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    /// The truncated value, a lower bound on the true distance.
    pub fn value(&self) -> BigRational {
        BigRational::new(self.numerator.clone().into(), self.denominator())
    }

    /// `2^-L`; the true distance lies in `[value, value + error_bound]`.
    pub fn error_bound(&self) -> BigRational {
        BigRational::new(1.into(), self.denominator())
    }

    pub fn upper(&self) -> BigRational {
        self.value() + self.error_bound()
    }

    fn denominator(&self) -> num_bigint::BigInt {
        num_bigint::BigInt::one() << self.precision as usize
    }

    pub fn to_f64(&self) -> f64 {
        self.value().to_f64().unwrap_or(f64::NAN)
    }

    /// Exact decimal of the lower bound.
    pub fn lower_decimal(&self) -> String {
        dyadic::decimal_string(&self.numerator, self.precision)
    }

    /// Exact decimal of the upper bound.
    pub fn upper_decimal(&self) -> String {
        dyadic::decimal_string(&(&self.numerator + 1u32), self.precision)
    }
}

/// Truncated distance between `u` and `v` using the first `precision` symbols.
pub fn truncated_distance(
    u: &SymbolicPoint,
    v: &SymbolicPoint,
    precision: u32,
) -> Result<TruncatedDistance> {
    if precision == 0 {
        return Err(Error::InvalidPrecision("precision must be positive".into()));
    }
    let n = precision as usize;
    let a = prefix(u, n)?;
    let b = prefix(v, n)?;
    let mut numerator = BigUint::zero();
    for (x, y) in a.as_bits().iter().zip(b.as_bits()) {
        numerator <<= 1u32;
        if x != y {
            numerator += 1u32;
        }
    }
    TruncatedDistance::new(numerator, precision)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{point_lemma1, GapSequence};
    use crate::words::morse_block;
    use proptest::prelude::*;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    #[test]
    fn morse_point_examples() {
        let m = morse_point();
        assert_eq!(m.symbol_at_u64(1).unwrap(), 0);
        let first8: Vec<u8> = (1..=8).map(|n| m.symbol_at_u64(n).unwrap()).collect();
        assert_eq!(first8, vec![0, 1, 1, 0, 1, 0, 0, 1]);
        // popcount(10) = 2, so m_11 = 0; the materialized prefix agrees.
        assert_eq!(m.symbol_at_u64(11).unwrap(), 0);
        assert_eq!(morse_block(4).unwrap().get(10), Some(0));
        assert!(m.symbol_at_u64(0).is_err());
    }

    #[test]
    fn shift_examples() {
        let m = morse_point();
        let s0 = shift(&m, &big(0));
        for n in 1..=64 {
            assert_eq!(s0.symbol_at_u64(n).unwrap(), m.symbol_at_u64(n).unwrap());
        }
        assert_eq!(prefix(&shift(&m, &big(1)), 4).unwrap().to_string(), "1101");
        assert_eq!(prefix(&shift(&m, &big(10)), 6).unwrap().to_string(), "010110");
    }

    #[test]
    fn prefix_examples() {
        let m = morse_point();
        assert_eq!(prefix(&m, 4).unwrap().to_string(), "0110");
        assert_eq!(prefix(&m, 1).unwrap().get(0), Some(m.symbol_at_u64(1).unwrap()));
        assert!(matches!(
            prefix(&m, PREFIX_CAP + 1),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn morse_prefix_matches_recurrence() {
        let m = morse_point();
        let full = prefix(&m, 1 << 20).unwrap();
        for k in 0..=20u32 {
            let block = morse_block(k).unwrap();
            assert_eq!(full.slice(0, 1 << k).unwrap(), block, "k = {k}");
        }
    }

    #[test]
    fn distance_examples() {
        let m = morse_point();
        assert!(truncated_distance(&m, &m, 32).unwrap().is_zero());
        let zeros = constant_point(0).unwrap();
        let ones = constant_point(1).unwrap();
        let d = truncated_distance(&zeros, &ones, 8).unwrap();
        assert_eq!(d.value(), BigRational::new(255.into(), 256.into()));
        assert_eq!(d.lower_decimal(), "0.99609375");
        assert_eq!(d.upper_decimal(), "1");
        // First r symbols complementary: distance at precision r is sum 2^-m.
        let r = 6;
        let comp = constant_point(1).unwrap();
        let d = truncated_distance(&zeros, &comp, r).unwrap();
        assert_eq!(d.value(), BigRational::new(63.into(), 64.into()));
    }

    #[test]
    fn cursor_handles_block_edges_and_horizon() {
        let g = GapSequence::new(vec![1, 2, 3]).unwrap();
        let x = point_lemma1(&g).unwrap();
        let all: Vec<u8> = x.cursor_u64(1).unwrap().collect();
        assert_eq!(all.len(), 14);
        let s: String = all.iter().map(|b| (b'0' + b) as char).collect();
        assert_eq!(s, "01011001101001");
        let tail: Vec<u8> = x.cursor_u64(6).unwrap().collect();
        assert_eq!(tail, all[5..].to_vec());
        assert_eq!(x.cursor_u64(15).unwrap().next(), None);
        assert!(matches!(
            x.symbol_at_u64(15),
            Err(Error::HorizonExceeded { .. })
        ));
        assert_eq!(x.horizon(), Some(big(14)));
        assert_eq!(shift(&x, &big(4)).horizon(), Some(big(10)));
        assert_eq!(shift(&x, &big(40)).horizon(), Some(big(0)));
    }

    #[test]
    fn morse_counter_crosses_64_bit_boundary() {
        let m = morse_point();
        let start = (BigUint::one() << 64u32) - 3u32;
        let via_cursor: Vec<u8> = m.cursor(&start).unwrap().take(6).collect();
        let direct: Vec<u8> = (0..6u32)
            .map(|i| m.symbol_at(&(&start + i)).unwrap())
            .collect();
        assert_eq!(via_cursor, direct);
    }

    #[test]
    fn huge_blocks_evaluate_lazily() {
        let g = GapSequence::new(vec![3, 70, 200]).unwrap();
        let x = crate::constructions::point_theorem2(
            &crate::constructions::alpha_code("1".parse().unwrap()),
            &g,
        )
        .unwrap();
        let s2 = g.boundary(2).clone();
        // Last symbol of M_70 has offset 2^70 - 1, whose popcount is 70.
        assert_eq!(x.symbol_at(&s2).unwrap(), 0);
        let before: Vec<u8> = x.cursor(&(&s2 - 1u32)).unwrap().take(4).collect();
        // M_70 ends "10"; block 3 uses alpha(2) = beta(2) = 0, so plain M_200.
        assert_eq!(before, vec![1, 0, 0, 1]);
    }

    proptest! {
        #[test]
        fn shift_composes(a in 0u64..5000, b in 0u64..5000, n in 1u64..2000) {
            let m = morse_point();
            let lhs = shift(&shift(&m, &big(a)), &big(b));
            let rhs = shift(&m, &big(a + b));
            prop_assert_eq!(lhs.symbol_at_u64(n).unwrap(), rhs.symbol_at_u64(n).unwrap());
            prop_assert_eq!(lhs.symbol_at_u64(n).unwrap(), m.symbol_at_u64(n + a + b).unwrap());
        }

        #[test]
        fn cursor_matches_random_access(start in 1u64..3000, len in 1usize..200) {
            let g = GapSequence::new(vec![1, 2, 5, 8, 11]).unwrap();
            let x = crate::constructions::point_theorem1(1, &g).unwrap();
            let seq: Vec<u8> = x.cursor_u64(start).unwrap().take(len).collect();
            for (i, bit) in seq.iter().enumerate() {
                prop_assert_eq!(*bit, x.symbol_at_u64(start + i as u64).unwrap());
            }
        }

        #[test]
        fn metric_axioms(a in 0u64..4000, b in 0u64..4000, c in 0u64..4000, l in 1u32..40) {
            let m = morse_point();
            let (u, v, w) = (shift(&m, &big(a)), shift(&m, &big(b)), shift(&m, &big(c)));
            let uv = truncated_distance(&u, &v, l).unwrap();
            let vu = truncated_distance(&v, &u, l).unwrap();
            prop_assert_eq!(&uv, &vu);
            let uw = truncated_distance(&u, &w, l).unwrap();
            let wv = truncated_distance(&w, &v, l).unwrap();
            let slack = uv.error_bound() * BigRational::from_integer(2.into());
            prop_assert!(uv.value() <= uw.value() + wv.value() + slack);
            prop_assert!(uv.value() < BigRational::one());
            prop_assert_eq!(uv.is_zero(), prefix(&u, l as usize).unwrap() == prefix(&v, l as usize).unwrap());
        }

        #[test]
        fn shift_of_agreeing_points_is_close(k in 0u64..32000, l in 1u32..=32) {
            // Codes first differing at coordinate 4 give points that agree
            // through s_14 and differ on block 15.
            let g = GapSequence::new((1..=16).collect()).unwrap();
            let u = crate::constructions::point_theorem2(
                &crate::constructions::alpha_code("1000".parse().unwrap()), &g).unwrap();
            let v = crate::constructions::point_theorem2(
                &crate::constructions::alpha_code("1001".parse().unwrap()), &g).unwrap();
            let agree = g.boundary(14).to_u64().unwrap();
            let d = truncated_distance(&shift(&u, &big(k)), &shift(&v, &big(k)), l).unwrap();
            if k + l as u64 <= agree {
                prop_assert!(d.is_zero());
            } else {
                prop_assert!(!d.is_zero());
            }
        }
    }
}
