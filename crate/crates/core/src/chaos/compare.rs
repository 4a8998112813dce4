//! Conservative three-way comparison of a truncated distance against `delta`.

use num_bigint::BigUint;
use num_traits::Zero;
use serde::Serialize;

use crate::dyadic::Dyadic;

/// Outcome of comparing `d(u, v)` with `delta`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Below,
    AtLeast,
    Indeterminate,
}

/// `delta * 2^bits`, an integer because `delta` has at most `bits` binary digits.
pub(crate) fn scaled_threshold(delta: &Dyadic, bits: u32) -> u128 {
    delta
        .scaled(bits)
        .expect("grid deltas are validated against the precision")
}

/// Compares `X / 2^L + tail` with `C / 2^L`, where the tail lies in `[0, 2^-L]`.
///
/// `X = C - 1` is the one undecided value: the distance is below `delta`
/// exactly when some later coordinate agrees, which `agrees_later` reports.
#[inline]
pub(crate) fn compare(x: u64, c: u128, agrees_later: impl FnOnce() -> bool) -> Verdict {
    let x = x as u128;
    if x + 1 < c {
        Verdict::Below
    } else if x >= c {
        Verdict::AtLeast
    } else if agrees_later() {
        Verdict::Below
    } else {
        Verdict::Indeterminate
    }
}

/// Folds pair verdicts into the min-over-pairs (lower) and max-over-pairs
/// (upper) verdicts.
#[derive(Clone, Copy, Debug)]
pub(crate) struct PairFold {
    any_below: bool,
    all_below: bool,
    any_atleast: bool,
    all_atleast: bool,
}

impl PairFold {
    pub fn new() -> Self {
        PairFold {
            any_below: false,
            all_below: true,
            any_atleast: false,
            all_atleast: true,
        }
    }

    #[inline]
    pub fn push(&mut self, v: Verdict) {
        self.any_below |= v == Verdict::Below;
        self.all_below &= v == Verdict::Below;
        self.any_atleast |= v == Verdict::AtLeast;
        self.all_atleast &= v == Verdict::AtLeast;
    }

    /// Verdict for the minimum pairwise distance.
    pub fn lower(&self) -> Verdict {
        if self.any_below {
            Verdict::Below
        } else if self.all_atleast {
            Verdict::AtLeast
        } else {
            Verdict::Indeterminate
        }
    }

    /// Verdict for the maximum pairwise distance.
    pub fn upper(&self) -> Verdict {
        if self.all_below {
            Verdict::Below
        } else if self.any_atleast {
            Verdict::AtLeast
        } else {
            Verdict::Indeterminate
        }
    }
}

/// Tallies of `(below, at-least, indeterminate)` over a range of shifts `k`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    #[serde(serialize_with = "crate::report::ser_biguint")]
    pub below: BigUint,
    #[serde(serialize_with = "crate::report::ser_biguint")]
    pub atleast: BigUint,
    #[serde(serialize_with = "crate::report::ser_biguint")]
    pub indeterminate: BigUint,
}

impl Counts {
    pub fn total(&self) -> BigUint {
        &self.below + &self.atleast + &self.indeterminate
    }

    pub(crate) fn add(&mut self, v: Verdict, n: &BigUint) {
        match v {
            Verdict::Below => self.below += n,
            Verdict::AtLeast => self.atleast += n,
            Verdict::Indeterminate => self.indeterminate += n,
        }
    }

    pub(crate) fn add_counts(&mut self, other: &Counts) {
        self.below += &other.below;
        self.atleast += &other.atleast;
        self.indeterminate += &other.indeterminate;
    }

    pub(crate) fn from_u64(c: [u64; 3]) -> Self {
        Counts {
            below: c[0].into(),
            atleast: c[1].into(),
            indeterminate: c[2].into(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.total().is_zero()
    }
}

#[inline]
pub(crate) fn slot(v: Verdict) -> usize {
    match v {
        Verdict::Below => 0,
        Verdict::AtLeast => 1,
        Verdict::Indeterminate => 2,
    }
}

/// An extreme truncated numerator over a range of `k`, with the first `k`
/// attaining it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Extreme {
    pub numerator: u64,
    #[serde(serialize_with = "crate::report::ser_biguint")]
    pub k: BigUint,
}

/// Everything one engine reports for a contiguous range of `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Tally {
    pub lower: Vec<Counts>,
    pub upper: Vec<Counts>,
    /// Smallest max-over-pairs numerator.
    pub min_of_max: Option<Extreme>,
    /// Largest min-over-pairs numerator.
    pub max_of_min: Option<Extreme>,
}

impl Tally {
    pub fn new(deltas: usize) -> Self {
        Tally {
            lower: vec![Counts::default(); deltas],
            upper: vec![Counts::default(); deltas],
            min_of_max: None,
            max_of_min: None,
        }
    }

    pub fn offer_min_of_max(&mut self, numerator: u64, k: &BigUint) {
        if self.min_of_max.as_ref().map_or(true, |e| numerator < e.numerator) {
            self.min_of_max = Some(Extreme { numerator, k: k.clone() });
        }
    }

    pub fn offer_max_of_min(&mut self, numerator: u64, k: &BigUint) {
        if self.max_of_min.as_ref().map_or(true, |e| numerator > e.numerator) {
            self.max_of_min = Some(Extreme { numerator, k: k.clone() });
        }
    }

    /// Appends a tally for the `k` range that immediately follows this one.
    pub fn absorb(&mut self, next: &Tally) {
        for (a, b) in self.lower.iter_mut().zip(&next.lower) {
            a.add_counts(b);
        }
        for (a, b) in self.upper.iter_mut().zip(&next.upper) {
            a.add_counts(b);
        }
        if let Some(e) = &next.min_of_max {
            self.offer_min_of_max(e.numerator, &e.k);
        }
        if let Some(e) = &next.max_of_min {
            self.offer_max_of_min(e.numerator, &e.k);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparison_boundaries() {
        // delta = 1/2 at L = 4: C = 8.
        assert_eq!(compare(6, 8, || unreachable!()), Verdict::Below);
        assert_eq!(compare(8, 8, || unreachable!()), Verdict::AtLeast);
        assert_eq!(compare(7, 8, || true), Verdict::Below);
        assert_eq!(compare(7, 8, || false), Verdict::Indeterminate);
        // delta = 1: only the all-different window is undecided.
        assert_eq!(compare(15, 16, || false), Verdict::Indeterminate);
    }

    #[test]
    fn folds() {
        use Verdict::*;
        let fold = |vs: &[Verdict]| {
            let mut f = PairFold::new();
            vs.iter().for_each(|&v| f.push(v));
            (f.lower(), f.upper())
        };
        assert_eq!(fold(&[Below, AtLeast]), (Below, AtLeast));
        assert_eq!(fold(&[Below, Below]), (Below, Below));
        assert_eq!(fold(&[AtLeast, AtLeast]), (AtLeast, AtLeast));
        assert_eq!(fold(&[Indeterminate, AtLeast]), (Indeterminate, AtLeast));
        assert_eq!(fold(&[Indeterminate, Below]), (Below, Indeterminate));
    }

    #[test]
    fn extremes_keep_first_witness() {
        let mut t = Tally::new(0);
        t.offer_min_of_max(5, &3u32.into());
        t.offer_min_of_max(5, &4u32.into());
        t.offer_max_of_min(2, &7u32.into());
        let mut u = Tally::new(0);
        u.offer_min_of_max(1, &9u32.into());
        u.offer_max_of_min(2, &10u32.into());
        t.absorb(&u);
        assert_eq!(t.min_of_max.unwrap().k, BigUint::from(9u32));
        assert_eq!(t.max_of_min.unwrap().k, BigUint::from(7u32));
    }
}
