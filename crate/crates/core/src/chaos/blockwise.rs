//! Exact sweep for tuples of block-built points sharing one gap sequence and
//! one shift. Within a block every pair either agrees or differs at every
//! coordinate, so all shifts whose window and lookahead stay inside a block
//! share their verdicts and are counted in one step. Shifts near a block end
//! are evaluated one at a time.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use super::compare::{compare, PairFold, Tally, Verdict};
use super::Setup;
use crate::error::{Error, Result};
use crate::symseq::SymbolicPoint;

pub(crate) struct Layout<'a> {
    /// `sums[j] = s_j`.
    sums: &'a [BigUint],
    shift: BigUint,
    /// `diff[q][j - 1]`: whether pair `q` differs on block `j`.
    diff: Vec<Vec<bool>>,
    /// `next_agree[q][j - 1]`: first block after `j` where pair `q` agrees.
    next_agree: Vec<Vec<Option<usize>>>,
}

/// Whether the tuple qualifies for the blockwise engine.
pub(crate) fn eligible(points: &[SymbolicPoint]) -> bool {
    let Some(first) = points.first() else { return false };
    let Some(b0) = first.blocks() else { return false };
    points.iter().all(|p| {
        p.blocks()
            .is_some_and(|b| b.gaps.exponents() == b0.gaps.exponents())
            && p.total_shift() == first.total_shift()
    })
}

impl<'a> Layout<'a> {
    pub fn new(points: &'a [SymbolicPoint], pairs: &[(usize, usize)]) -> Result<Self> {
        if !eligible(points) {
            return Err(Error::NotApplicable(
                "the blockwise engine needs block-built points with one gap sequence and one shift".into(),
            ));
        }
        let bodies: Vec<_> = points.iter().map(|p| p.blocks().unwrap()).collect();
        let n = bodies[0].gaps.len();
        let diff: Vec<Vec<bool>> = pairs
            .iter()
            .map(|&(i, j)| (0..n).map(|b| bodies[i].flips[b] != bodies[j].flips[b]).collect())
            .collect();
        let next_agree = diff
            .iter()
            .map(|d| {
                let mut out = vec![None; n];
                let mut next = None;
                for b in (0..n).rev() {
                    out[b] = next;
                    if !d[b] {
                        next = Some(b + 1);
                    }
                }
                out
            })
            .collect();
        Ok(Layout {
            sums: bodies[0].gaps.boundaries(),
            shift: points[0].total_shift().clone(),
            diff,
            next_agree,
        })
    }

    fn blocks(&self) -> usize {
        self.sums.len() - 1
    }

    /// Block `j` with `s_{j-1} < pos <= s_j`.
    fn block_of(&self, pos: &BigUint) -> Option<usize> {
        if pos.is_zero() || pos > &self.sums[self.blocks()] {
            return None;
        }
        Some(self.sums.partition_point(|s| s < pos))
    }

    /// First position after block `j` where pair `q` agrees.
    fn agree_after_block(&self, q: usize, j: usize) -> Option<&BigUint> {
        self.next_agree[q][j - 1].map(|jj| &self.sums[jj - 1])
    }
}

fn small(x: &BigUint, cap: u64) -> u64 {
    x.to_u64().map_or(cap, |v| v.min(cap))
}

/// Per-window tallies for windows `[lo, hi)` of `k`.
pub(crate) fn run(setup: &Setup<'_>, windows: &[(BigUint, BigUint)]) -> Result<Vec<Tally>> {
    let layout = Layout::new(setup.points, &setup.pairs)?;
    windows
        .iter()
        .map(|(lo, hi)| run_window(setup, &layout, lo, hi))
        .collect()
}

fn run_window(setup: &Setup<'_>, layout: &Layout<'_>, lo: &BigUint, hi: &BigUint) -> Result<Tally> {
    let mut tally = Tally::new(setup.thresholds.len());
    if lo >= hi {
        return Ok(tally);
    }
    let bits = setup.precision.bits as u64;
    let s = &layout.shift;
    // body coordinates: K = k + shift, window covers K+1 ..= K+L
    let k_lo = lo + s;
    let k_hi = hi + s - 1u32;
    let last = &layout.sums[layout.blocks()];
    if &k_hi + bits > *last {
        return Err(Error::horizon(hi - 1u32 + bits, last - s));
    }
    let mut j = layout
        .block_of(&(&k_lo + 1u32))
        .expect("window start lies inside the horizon");
    loop {
        let start = &layout.sums[j - 1];
        if start > &k_hi {
            break;
        }
        let end = &layout.sums[j];
        // interior: K in [s_{j-1}, s_j - L - 1]
        let a = start.max(&k_lo).clone();
        if end >= &(BigUint::from(bits) + 1u32) {
            let b = (end - bits - 1u32).min(k_hi.clone());
            if a <= b {
                interior(setup, layout, j, &a, &b, &mut tally);
            }
        }
        // edge: K in [max(s_{j-1}, s_j - L), s_j - 1]
        let edge_from = if end > &BigUint::from(bits) {
            start.max(&(end - bits)).clone()
        } else {
            start.clone()
        };
        let mut kk = edge_from.max(k_lo.clone());
        let edge_to = (end - 1u32).min(k_hi.clone());
        while kk <= edge_to {
            single(setup, layout, &kk, &mut tally);
            kk += 1u32;
        }
        if j == layout.blocks() {
            break;
        }
        j += 1;
    }
    Ok(tally)
}

/// Shifts `K` in `[a, b]` whose window and lookahead lie inside block `j`.
fn interior(setup: &Setup<'_>, layout: &Layout<'_>, j: usize, a: &BigUint, b: &BigUint, tally: &mut Tally) {
    let bits = setup.precision.bits;
    let full = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
    let reach = BigUint::from(bits) + setup.precision.resolve_limit;
    let pairs = setup.pairs.len();
    let xs: Vec<u64> = (0..pairs).map(|q| if layout.diff[q][j - 1] { full } else { 0 }).collect();
    // A differing pair resolves to "below" once K + L + R reaches its next agreement.
    let unlock: Vec<Option<BigUint>> = (0..pairs)
        .map(|q| {
            if !layout.diff[q][j - 1] {
                return None;
            }
            layout.agree_after_block(q, j).map(|s| {
                let q_pos = s + 1u32;
                if q_pos > reach {
                    q_pos - &reach
                } else {
                    BigUint::zero()
                }
            })
        })
        .collect();
    let mut cuts: Vec<BigUint> = unlock
        .iter()
        .flatten()
        .filter(|t| *t > a && *t <= b)
        .cloned()
        .collect();
    cuts.sort();
    cuts.dedup();
    let mut bounds = vec![a.clone()];
    bounds.extend(cuts);
    let lo_x = xs.iter().copied().min().unwrap_or(0);
    let hi_x = xs.iter().copied().max().unwrap_or(0);
    let first_k = a - &layout.shift;
    tally.offer_min_of_max(hi_x, &first_k);
    tally.offer_max_of_min(lo_x, &first_k);
    for (n, from) in bounds.iter().enumerate() {
        let to = bounds.get(n + 1).map_or(b + 1u32, |t| t.clone());
        let len = &to - from;
        for (d, &c) in setup.thresholds.iter().enumerate() {
            let mut fold = PairFold::new();
            for q in 0..pairs {
                let v = compare(xs[q], c, || {
                    if layout.diff[q][j - 1] {
                        unlock[q].as_ref().is_some_and(|t| from >= t)
                    } else {
                        setup.precision.resolve_limit >= 1
                    }
                });
                fold.push(v);
            }
            tally.lower[d].add(fold.lower(), &len);
            tally.upper[d].add(fold.upper(), &len);
        }
    }
}

/// One shift `K` near a block end.
fn single(setup: &Setup<'_>, layout: &Layout<'_>, kk: &BigUint, tally: &mut Tally) {
    let bits = setup.precision.bits as u64;
    let pairs = setup.pairs.len();
    let mut xs = vec![0u64; pairs];
    let mut j = layout.block_of(&(kk + 1u32)).expect("window inside horizon");
    let mut room = small(&(&layout.sums[j] - kk), bits + 1);
    let mut pos = 1u64;
    while pos <= bits {
        let take = room.min(bits - pos + 1);
        for q in 0..pairs {
            let fill = if layout.diff[q][j - 1] { 1 } else { 0 };
            for _ in 0..take {
                xs[q] = (xs[q] << 1) | fill;
            }
        }
        pos += take;
        if pos <= bits {
            j += 1;
            room = small(&(&layout.sums[j] - &layout.sums[j - 1]), bits + 1);
        } else {
            room -= take;
        }
    }
    // Block holding position K + L + 1, if any.
    let next_block = if room > 0 {
        Some(j)
    } else if j < layout.blocks() {
        Some(j + 1)
    } else {
        None
    };
    let window_end = kk + bits;
    let limit = &window_end + setup.precision.resolve_limit;
    let agrees_later = |q: usize| -> bool {
        let Some(nb) = next_block else { return false };
        let first = if !layout.diff[q][nb - 1] {
            &window_end + 1u32
        } else {
            match layout.agree_after_block(q, nb) {
                Some(s) => s + 1u32,
                None => return false,
            }
        };
        first <= limit
    };
    let k = kk - &layout.shift;
    let lo_x = xs.iter().copied().min().unwrap_or(0);
    let hi_x = xs.iter().copied().max().unwrap_or(0);
    tally.offer_min_of_max(hi_x, &k);
    tally.offer_max_of_min(lo_x, &k);
    let mut refined: Vec<Option<bool>> = vec![None; pairs];
    let one = BigUint::one();
    for (d, &c) in setup.thresholds.iter().enumerate() {
        let mut fold = PairFold::new();
        for q in 0..pairs {
            let v: Verdict = compare(xs[q], c, || *refined[q].get_or_insert_with(|| agrees_later(q)));
            fold.push(v);
        }
        tally.lower[d].add(fold.lower(), &one);
        tally.upper[d].add(fold.upper(), &one);
    }
}
