//! Brute-force and closed-form checks that share no code path with the
//! estimators they validate.
//!
//! Block layouts are rebuilt here from descriptors, with `W_i` membership by
//! enumeration and the 2-adic valuation by repeated halving. Pair counts
//! compare the difference stream against the binary digits of `delta`
//! directly instead of forming truncated numerators. Words are materialized
//! with [`morse_block`] and [`complement`].

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::Serialize;
use serde_json::{json, Value};

use crate::chaos::{estimate_df_at, Counts, DeltaGrid, Engine, EstimateOptions, Precision};
use crate::constructions::{shift_exponent_rn, w_set_index, Descriptor, GapSequence};
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::symseq::SymbolicPoint;
use crate::words::{complement, concat, find_bbb_pattern, morse_block, Word, MAX_BLOCK_ORDER};

/// Longest word scanned by the quadratic pattern scanner.
pub const QUADRATIC_SCAN_CAP: usize = 1 << 14;

/// Longest word materialized by the linear checks.
pub const LINEAR_CAP: usize = 1 << 24;

/// One verification outcome with its witnesses.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub passed: bool,
    pub summary: String,
    pub details: Value,
}

impl CheckReport {
    fn new(check: &str, passed: bool, summary: String, details: Value) -> Self {
        CheckReport {
            check: check.to_string(),
            passed,
            summary,
            details,
        }
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.check, self.summary)
    }
}

/// A maximal stretch of positions where a pair agrees or differs throughout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Run {
    /// First position, 1-based.
    pub start: u64,
    /// Last position, inclusive.
    pub end: u64,
    pub differ: bool,
}

/// Block intervals `(s_{j-1}, s_j]` of a family tuple with each point's
/// plain/complement pattern.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockSchedule {
    pub gaps: Vec<u32>,
    /// `bounds[j] = s_j`, `bounds[0] = 0`.
    pub bounds: Vec<BigUint>,
    /// `flips[p][j - 1]` for point `p` and block `j`.
    pub flips: Vec<Vec<u8>>,
    /// Common shift applied to every point.
    pub shift: u64,
}

fn in_w_set_by_enumeration(i: u64, j: u64) -> bool {
    let mut v = match (2 * i).checked_sub(1).and_then(|o| o.checked_mul(2)) {
        Some(v) => v,
        None => return false,
    };
    while v <= j {
        if v == j {
            return true;
        }
        match v.checked_mul(2) {
            Some(n) => v = n,
            None => break,
        }
    }
    false
}

fn two_adic_valuation(mut n: u64) -> usize {
    let mut v = 0;
    while n % 2 == 0 {
        n /= 2;
        v += 1;
    }
    v
}

fn beta_bit(beta: &Word, c: usize) -> u8 {
    beta.get(c - 1).unwrap_or(0)
}

/// Unwraps nested shifts into a base family descriptor and a total shift.
fn unshift(d: &Descriptor) -> Result<(&Descriptor, u64)> {
    let mut total = BigUint::from(0u32);
    let mut cur = d;
    while let Descriptor::Shift { k, of } = cur {
        total += k;
        cur = of;
    }
    let total = total
        .to_u64()
        .ok_or_else(|| Error::capacity("oracle shift", &total, u64::MAX))?;
    Ok((cur, total))
}

fn family_layout(d: &Descriptor) -> Result<(Vec<u32>, Vec<u8>)> {
    let flips_for = |gaps: &[u32], f: &dyn Fn(u64) -> u8| -> Vec<u8> {
        (1..=gaps.len() as u64).map(f).collect()
    };
    Ok(match d {
        Descriptor::Lemma1 { gaps } => (gaps.clone(), flips_for(gaps, &|_| 0)),
        Descriptor::Remark3 { gaps } => (gaps.clone(), flips_for(gaps, &|_| 1)),
        Descriptor::T1 { i, gaps } => (
            gaps.clone(),
            flips_for(gaps, &|j| u8::from(j % 2 == 0 && in_w_set_by_enumeration(*i, j))),
        ),
        Descriptor::T2 { beta, gaps } => (
            gaps.clone(),
            flips_for(gaps, &|j| {
                if j % 2 == 1 {
                    let t = (j + 1) / 2;
                    beta_bit(beta, two_adic_valuation(t) + 1)
                } else {
                    0
                }
            }),
        ),
        other => {
            return Err(Error::NotApplicable(format!(
                "`{other}` is not a block-built family point"
            )))
        }
    })
}

impl BlockSchedule {
    /// Layout of points from one family with a common gap list and shift.
    pub fn new(points: &[SymbolicPoint]) -> Result<Self> {
        let mut gaps: Option<Vec<u32>> = None;
        let mut shift: Option<u64> = None;
        let mut flips = Vec::new();
        for p in points {
            let (base, s) = unshift(p.descriptor())?;
            let (g, f) = family_layout(base)?;
            if gaps.as_ref().is_some_and(|g0| *g0 != g) {
                return Err(Error::NotApplicable("points use different gap sequences".into()));
            }
            if shift.is_some_and(|s0| s0 != s) {
                return Err(Error::NotApplicable("points carry different shifts".into()));
            }
            gaps = Some(g);
            shift = Some(s);
            flips.push(f);
        }
        let gaps = gaps.ok_or_else(|| Error::InvalidArgument("no points given".into()))?;
        let mut bounds = vec![BigUint::from(0u32)];
        for &a in &gaps {
            let next = bounds.last().unwrap() + (BigUint::one() << a);
            bounds.push(next);
        }
        Ok(BlockSchedule {
            gaps,
            bounds,
            flips,
            shift: shift.unwrap(),
        })
    }

    /// `s_N`.
    pub fn end(&self) -> &BigUint {
        self.bounds.last().unwrap()
    }

    /// Last evaluable index of the (shifted) points.
    pub fn horizon(&self) -> BigUint {
        let shift = BigUint::from(self.shift);
        if *self.end() > shift {
            self.end() - shift
        } else {
            BigUint::from(0u32)
        }
    }

    /// Whether points `a` and `b` differ on block `j`.
    pub fn differs(&self, a: usize, b: usize, j: usize) -> bool {
        self.flips[a][j - 1] != self.flips[b][j - 1]
    }

    /// Blocks where `a` and `b` differ: the complement-block witnesses.
    pub fn complement_blocks(&self, a: usize, b: usize) -> Vec<usize> {
        (1..=self.gaps.len()).filter(|&j| self.differs(a, b, j)).collect()
    }

    /// Merged runs of the pair's difference stream over body positions
    /// `1..=s_N`, clipped to positions that fit in `u64`.
    pub fn pair_runs(&self, a: usize, b: usize) -> Vec<Run> {
        let mut runs: Vec<Run> = Vec::new();
        for j in 1..=self.gaps.len() {
            let differ = self.differs(a, b, j);
            let Some(start) = (&self.bounds[j - 1] + 1u32).to_u64() else {
                break;
            };
            let end = self.bounds[j].to_u64().unwrap_or(u64::MAX);
            match runs.last_mut() {
                Some(r) if r.differ == differ => r.end = end,
                _ => runs.push(Run { start, end, differ }),
            }
        }
        runs
    }
}

/// Reads the difference stream of a pair from its runs.
struct RunReader<'a> {
    runs: &'a [Run],
    idx: usize,
    pos: u64,
}

impl<'a> RunReader<'a> {
    fn at(runs: &'a [Run], pos: u64) -> Self {
        let idx = runs.partition_point(|r| r.end < pos);
        RunReader { runs, idx, pos }
    }

    /// Difference bit at the current position, then advance; `None` past the end.
    fn next(&mut self) -> Option<bool> {
        let r = self.runs.get(self.idx)?;
        let bit = r.differ;
        self.pos += 1;
        if self.pos > r.end {
            self.idx += 1;
        }
        Some(bit)
    }

    /// First agreeing position at or after the current one.
    fn next_agreement(&self) -> Option<u64> {
        let r = self.runs.get(self.idx)?;
        if !r.differ {
            Some(self.pos)
        } else {
            self.runs.get(self.idx + 1).map(|n| n.start)
        }
    }
}

/// `delta`'s binary digit `i` (1-based) after the point.
fn delta_bit(delta: &Dyadic, i: u32) -> bool {
    i <= delta.exponent() && (delta.numerator() >> (delta.exponent() - i)) & 1 == 1
}

/// Decides `d < delta` for the window starting at body position `start`.
fn decide(runs: &[Run], start: u64, delta: &Dyadic, p: Precision, end: u64) -> usize {
    const BELOW: usize = 0;
    const ATLEAST: usize = 1;
    const UNDECIDED: usize = 2;
    let l = p.bits;
    let mut rd = RunReader::at(runs, start);
    // from coordinate L + 1 on, any agreement within reach settles "below"
    let settle = |rd: RunReader<'_>| -> usize {
        let reach = (start + l as u64 - 1).saturating_add(p.resolve_limit).min(end);
        match rd.next_agreement() {
            Some(q) if q <= reach => BELOW,
            _ => UNDECIDED,
        }
    };
    if *delta == Dyadic::ONE {
        for _ in 0..l {
            if !rd.next().expect("window inside horizon") {
                return BELOW;
            }
        }
        return settle(rd);
    }
    let mut i = 1;
    while i <= l {
        let e = rd.next().expect("window inside horizon");
        let b = delta_bit(delta, i);
        if e && !b {
            return ATLEAST;
        }
        if !e && b {
            // below unless every later digit in the window is e = 1, b = 0
            for j in i + 1..=l {
                let e = rd.next().expect("window inside horizon");
                if !e || delta_bit(delta, j) {
                    return BELOW;
                }
            }
            return settle(rd);
        }
        i += 1;
    }
    ATLEAST
}

/// Exact `(below, at-least, indeterminate)` for one pair at several `delta`
/// and cumulative horizons, from the block schedule alone.
pub fn exact_pair_counts_many(
    u: &SymbolicPoint,
    v: &SymbolicPoint,
    deltas: &[Dyadic],
    checkpoints: &[u64],
    precision: Precision,
) -> Result<Vec<Vec<Counts>>> {
    if u.descriptor() == v.descriptor() {
        return Err(Error::Diagonal(u.descriptor().to_string()));
    }
    let sched = BlockSchedule::new(&[u.clone(), v.clone()])?;
    if checkpoints.is_empty() || checkpoints[0] < 2 || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "checkpoints must be at least 2 and increase strictly".into(),
        ));
    }
    if let Some(d) = deltas
        .iter()
        .find(|d| d.is_zero() || **d > Dyadic::ONE || d.exponent() > precision.bits)
    {
        return Err(Error::InvalidDelta(format!("{d} is unusable at precision {}", precision.bits)));
    }
    let last = *checkpoints.last().unwrap();
    let need = last - 1 + precision.bits as u64;
    if BigUint::from(need) > sched.horizon() {
        return Err(Error::horizon(need, sched.horizon()));
    }
    let runs = sched.pair_runs(0, 1);
    let end = runs.last().map_or(0, |r| r.end);
    let mut tally = vec![[0u64; 3]; deltas.len()];
    let mut out = Vec::new();
    let mut next_cp = 0;
    for k in 1..last {
        let start = k + sched.shift + 1;
        for (d, delta) in deltas.iter().enumerate() {
            tally[d][decide(&runs, start, delta, precision, end)] += 1;
        }
        if k + 1 == checkpoints[next_cp] {
            out.push(
                tally
                    .iter()
                    .map(|c| Counts::from_u64(*c))
                    .collect(),
            );
            next_cp += 1;
        }
    }
    Ok(out)
}

/// Exact counts for one `delta` at horizon `m`.
pub fn exact_pair_counts(
    u: &SymbolicPoint,
    v: &SymbolicPoint,
    delta: &Dyadic,
    m: u64,
    precision: Precision,
) -> Result<Counts> {
    Ok(exact_pair_counts_many(u, v, std::slice::from_ref(delta), &[m], precision)?
        .remove(0)
        .remove(0))
}

/// The Morse prefix of length `n`, built by the doubling recurrence.
fn morse_prefix_word(n: usize) -> Result<Word> {
    let order = (usize::BITS - n.saturating_sub(1).leading_zeros()).max(0);
    if order > MAX_BLOCK_ORDER {
        return Err(Error::capacity("materialized prefix", n, 1usize << MAX_BLOCK_ORDER));
    }
    Ok(morse_block(order)?.slice(0, n).expect("block covers the prefix"))
}

/// First `n` symbols of a point, built from words without the lazy evaluator.
pub fn materialize(point: &SymbolicPoint, n: usize) -> Result<Word> {
    if n > LINEAR_CAP {
        return Err(Error::capacity("materialized prefix", n, LINEAR_CAP));
    }
    let (base, shift) = unshift(point.descriptor())?;
    let total = n
        .checked_add(shift as usize)
        .filter(|&t| t <= LINEAR_CAP)
        .ok_or_else(|| Error::capacity("materialized prefix", n as u64 + shift, LINEAR_CAP))?;
    let word = match base {
        Descriptor::Morse => morse_prefix_word(total)?,
        Descriptor::Constant { bit } => Word::from_bits(vec![*bit; total])?,
        family => {
            let (gaps, flips) = family_layout(family)?;
            let mut w = Word::empty();
            for (a, f) in gaps.iter().zip(&flips) {
                if w.len() >= total {
                    break;
                }
                if *a > MAX_BLOCK_ORDER || (1usize << a) > LINEAR_CAP {
                    let block = morse_prefix_word(total - w.len())?;
                    w = concat(&w, &if *f == 1 { complement(&block) } else { block });
                    break;
                }
                let block = morse_block(*a)?;
                w = concat(&w, &if *f == 1 { complement(&block) } else { block });
            }
            if w.len() < total {
                return Err(Error::horizon(total, w.len()));
            }
            w
        }
    };
    Ok(word.slice(shift as usize, n).expect("length checked"))
}

/// `sigma^{r_n}(m)` starts with `M_{a_1} ... M_{a_n}`, checked on words.
pub fn verify_lemma1(g: &GapSequence, n: usize) -> Result<CheckReport> {
    verify_lemma1_with_cap(g, n, LINEAR_CAP)
}

pub fn verify_lemma1_with_cap(g: &GapSequence, n: usize, cap: usize) -> Result<CheckReport> {
    if let Some((position, exponent)) = g.parity_violation() {
        return Err(Error::ParityViolation { position, exponent });
    }
    let r = shift_exponent_rn(g, n)?;
    let s = g.boundary(n).clone();
    let total = &r + &s;
    if total > BigUint::from(cap) {
        return Err(Error::capacity("lemma1 prefix", &total, cap));
    }
    let (r, s) = (r.to_usize().unwrap(), s.to_usize().unwrap());
    let m = morse_prefix_word(r + s)?;
    let shifted = m.slice(r, s).expect("length checked");
    let mut blocks = Word::empty();
    for j in 1..=n {
        blocks = concat(&blocks, &morse_block(g.exponent(j))?);
    }
    let mismatch = shifted
        .as_bits()
        .iter()
        .zip(blocks.as_bits())
        .position(|(a, b)| a != b)
        .map(|p| p + 1);
    Ok(CheckReport::new(
        "lemma1-shift-prefix",
        mismatch.is_none(),
        match mismatch {
            None => format!("shift r_{n} = {r} of the Morse sequence starts with the first {n} blocks (length {s})"),
            Some(i) => format!("shift r_{n} = {r} first differs from the block concatenation at index {i}"),
        },
        json!({ "n": n, "r_n": r, "s_n": s, "gaps": g.exponents(), "first_mismatch": mismatch }),
    ))
}

/// No factor `BBb` in the Morse prefix of length `prefix_len`.
pub fn verify_property_p(prefix_len: usize) -> Result<CheckReport> {
    verify_property_p_with_cap(prefix_len, QUADRATIC_SCAN_CAP)
}

pub fn verify_property_p_with_cap(prefix_len: usize, cap: usize) -> Result<CheckReport> {
    if prefix_len > cap {
        return Err(Error::capacity("quadratic scan length", prefix_len, cap));
    }
    let w = morse_prefix_word(prefix_len)?;
    let mut report = verify_property_p_word(&w);
    report.summary = format!("Morse prefix of length {prefix_len}: {}", report.summary);
    Ok(report)
}

/// The overlap scan on an arbitrary word (used for controls).
pub fn verify_property_p_word(w: &Word) -> CheckReport {
    let hit = find_bbb_pattern(w);
    CheckReport::new(
        "overlap-free",
        hit.is_none(),
        match &hit {
            None => "no factor BBb".to_string(),
            Some(h) => format!("factor BBb at start {} with |B| = {}", h.start, h.block_len),
        },
        json!({ "length": w.len(), "witness": hit }),
    )
}

/// No `k` in `1..=horizon` where `s^k(u)` and `s^(k+r)(v)` agree on a full
/// window of `window_len` coordinates (default `14 r`).
pub fn verify_step2_window(
    u: &SymbolicPoint,
    v: &SymbolicPoint,
    r: u64,
    window_len: Option<u64>,
    horizon: u64,
) -> Result<CheckReport> {
    if r == 0 {
        return Err(Error::InvalidArgument("r must be positive".into()));
    }
    let w = window_len.unwrap_or(14 * r);
    if w == 0 {
        return Err(Error::InvalidArgument("window length must be positive".into()));
    }
    let len = |extra: u64| -> Result<usize> {
        (horizon + extra + w)
            .to_usize()
            .ok_or_else(|| Error::capacity("window scan", horizon, LINEAR_CAP))
    };
    let a = materialize(u, len(0)?)?;
    let b = materialize(v, len(r)?)?;
    let (a, b) = (a.as_bits(), b.as_bits());
    let w = w as usize;
    let r = r as usize;
    let mut witness = None;
    let mut longest = 0usize;
    'outer: for k in 1..=horizon as usize {
        // agreement of u_{k+1..} with v_{k+r+1..}
        let mut run = 0;
        while run < w && a[k + run] == b[k + r + run] {
            run += 1;
        }
        longest = longest.max(run);
        if run == w {
            witness = Some(k);
            break 'outer;
        }
    }
    let window = witness.map(|k| {
        a[k..k + w]
            .iter()
            .map(|&x| (b'0' + x) as char)
            .collect::<String>()
    });
    Ok(CheckReport::new(
        "shifted-window-disagreement",
        witness.is_none(),
        match witness {
            None => format!(
                "no aligned agreement of length {w} for shift offset {r} up to k = {horizon}; longest agreement {longest}"
            ),
            Some(k) => format!("agreement of length {w} at k = {k}"),
        },
        json!({
            "r": r,
            "window_len": w,
            "horizon": horizon,
            "longest_agreement": longest,
            "witness_k": witness,
            "window": window,
        }),
    ))
}

/// Number of `n <= big_n` where the codes of `beta1` and `beta2` differ.
pub fn alpha_difference_count(beta1: &Word, beta2: &Word, big_n: u64) -> Result<u64> {
    let span = beta1.len().max(beta2.len());
    if (1..=span).all(|c| beta_bit(beta1, c) == beta_bit(beta2, c)) {
        return Err(Error::InvalidArgument(format!(
            "betas {beta1} and {beta2} agree on the inspected prefix"
        )));
    }
    Ok((1..=big_n)
        .filter(|&n| {
            let c = two_adic_valuation(n) + 1;
            beta_bit(beta1, c) != beta_bit(beta2, c)
        })
        .count() as u64)
}

/// Every even `j <= limit` lies in exactly one `W_i`, by enumeration of
/// `2^n (2i - 1)` and by odd-part extraction.
pub fn verify_w_partition(limit: u64) -> Result<CheckReport> {
    let size = limit
        .checked_add(1)
        .and_then(|s| s.to_usize())
        .filter(|&s| s <= LINEAR_CAP * 4)
        .ok_or_else(|| Error::capacity("partition limit", limit, LINEAR_CAP * 4))?;
    let mut owners = vec![0u32; size];
    let mut owner_of = vec![0u64; size];
    let mut i = 1u64;
    while 2 * (2 * i - 1) <= limit {
        let mut v = 2 * (2 * i - 1);
        while v <= limit {
            owners[v as usize] += 1;
            owner_of[v as usize] = i;
            v *= 2;
        }
        i += 1;
    }
    let bad = (1..=limit).find(|&j| {
        let n = owners[j as usize];
        if j % 2 == 1 {
            n != 0 || w_set_index(j).is_some()
        } else {
            n != 1 || w_set_index(j) != Some(owner_of[j as usize])
        }
    });
    Ok(CheckReport::new(
        "w-partition",
        bad.is_none(),
        match bad {
            None => format!("every even j <= {limit} lies in exactly one W_i; both methods agree"),
            Some(j) => format!("j = {j} has {} owners", owners[j as usize]),
        },
        json!({ "limit": limit, "counterexample": bad }),
    ))
}

/// The lazy Morse point matches the doubling recurrence on `2^k` prefixes.
pub fn verify_morse_identity(max_order: u32) -> Result<CheckReport> {
    let m = crate::symseq::morse_point();
    let bad = (1..=max_order).find_map(|k| {
        let lazy = crate::symseq::prefix(&m, 1usize << k);
        match (lazy, morse_block(k)) {
            (Ok(a), Ok(b)) if a == b => None,
            _ => Some(k),
        }
    });
    Ok(CheckReport::new(
        "morse-identity",
        bad.is_none(),
        match bad {
            None => format!("popcount prefixes equal the recurrence for k = 1..={max_order}"),
            Some(k) => format!("mismatch at order {k}"),
        },
        json!({ "max_order": max_order, "first_bad_order": bad }),
    ))
}

/// Symbolwise estimates equal the exact block counts for every pair of the
/// tuple, every grid value and every checkpoint.
pub fn verify_oracle_match(
    tuple: &[SymbolicPoint],
    grid: &DeltaGrid,
    checkpoints: &[u64],
    precision: Precision,
) -> Result<CheckReport> {
    let cps: Vec<BigUint> = checkpoints.iter().map(|&c| c.into()).collect();
    let opts = EstimateOptions {
        grid: grid.clone(),
        precision,
        engine: Engine::Symbolwise,
    };
    let mut mismatches = Vec::new();
    let mut indeterminate = BigUint::from(0u32);
    let mut compared = 0u64;
    for i in 0..tuple.len() {
        for j in i + 1..tuple.len() {
            let pair = [tuple[i].clone(), tuple[j].clone()];
            let est = estimate_df_at(&pair, &opts, &cps)?;
            let exact = exact_pair_counts_many(&pair[0], &pair[1], grid.deltas(), checkpoints, precision)?;
            for (e, x) in est.iter().zip(&exact) {
                for (d, counts) in x.iter().enumerate() {
                    compared += 1;
                    indeterminate += &counts.indeterminate;
                    if e.lower_counts[d] != *counts || e.upper_counts[d] != *counts {
                        mismatches.push(json!({
                            "pair": [pair[0].descriptor().to_string(), pair[1].descriptor().to_string()],
                            "delta": grid.deltas()[d].to_string(),
                            "m": e.horizon.to_string(),
                            "estimate": e.lower_counts[d],
                            "exact": counts,
                        }));
                    }
                }
            }
        }
    }
    let passed = mismatches.is_empty();
    Ok(CheckReport::new(
        "estimator-oracle-match",
        passed,
        format!(
            "{compared} (pair, delta, m) cells compared, {} mismatches, {indeterminate} indeterminate",
            mismatches.len()
        ),
        json!({
            "compared": compared,
            "indeterminate": indeterminate.to_string(),
            "mismatches": mismatches,
        }),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::parse_point;
    use crate::symseq::truncated_distance;
    use proptest::prelude::*;

    fn pt(d: &str) -> SymbolicPoint {
        parse_point(d).unwrap()
    }

    #[test]
    fn schedule_tiles_and_matches_constructions() {
        let pts: Vec<_> = ["t1 i=1 gaps=1,2,3,4,5,6,7,8", "t1 i=3 gaps=1,2,3,4,5,6,7,8", "r3 gaps=1,2,3,4,5,6,7,8"]
            .iter()
            .map(|d| pt(d))
            .collect();
        let s = BlockSchedule::new(&pts).unwrap();
        for (p, point) in pts.iter().enumerate() {
            assert_eq!(s.flips[p], point.blocks().unwrap().flips);
        }
        let runs = s.pair_runs(0, 1);
        assert_eq!(runs[0].start, 1);
        assert_eq!(BigUint::from(runs.last().unwrap().end), *s.end());
        assert!(runs.windows(2).all(|w| w[0].end + 1 == w[1].start && w[0].differ != w[1].differ));
        assert_eq!(s.complement_blocks(0, 1), vec![2, 4, 8]);
        assert!(BlockSchedule::new(&[pt("morse"), pt("lemma1 gaps=1,2")]).is_err());
        assert!(BlockSchedule::new(&[pt("lemma1 gaps=1,2"), pt("r3 gaps=1,2,3")]).is_err());
    }

    #[test]
    fn small_pair_counts_by_enumeration() {
        // x^1 and x^2 over gaps (3,4,9): only block 2 differs.
        let (u, v) = (pt("t1 i=1 gaps=3,4,9"), pt("t1 i=2 gaps=3,4,9"));
        let p = Precision::default();
        let half = Dyadic::pow2_neg(1).unwrap();
        let m = 24;
        let got = exact_pair_counts(&u, &v, &half, m, p).unwrap();
        let mut want = [0u64; 2];
        for k in 1..m {
            let d = truncated_distance(&u.shift(&k.into()), &v.shift(&k.into()), 32).unwrap();
            // windows here never sit exactly one unit below 1/2
            want[(d.value() >= half.to_rational()) as usize] += 1;
        }
        assert_eq!((got.below.to_u64().unwrap(), got.atleast.to_u64().unwrap()), (want[0], want[1]));
        assert_eq!(got.indeterminate, BigUint::from(0u32));

        let one = exact_pair_counts(&u, &v, &half, 2, p).unwrap();
        assert_eq!(one.total(), BigUint::one());

        // delta = 1: below unless the whole window differs
        let full = exact_pair_counts(&u, &v, &Dyadic::ONE, m, p).unwrap();
        assert_eq!(full.below, BigUint::from(m - 1));
        assert!(exact_pair_counts(&u, &u.clone(), &half, 4, p).is_err());
    }

    #[test]
    fn lemma1_examples() {
        let g = GapSequence::parity_locked(vec![1, 2]).unwrap();
        let r = verify_lemma1(&g, 2).unwrap();
        assert!(r.passed, "{r}");
        assert_eq!(r.details["r_n"], 10);
        let g = GapSequence::parity_locked(vec![1, 2, 3]).unwrap();
        assert!(verify_lemma1(&g, 3).unwrap().passed);
        let bad = GapSequence::new(vec![2, 3]).unwrap();
        assert!(matches!(verify_lemma1(&bad, 2), Err(Error::ParityViolation { .. })));
        let big = GapSequence::parity_locked((1..=24).collect()).unwrap();
        assert!(matches!(verify_lemma1(&big, 24), Err(Error::Capacity { .. })));
    }

    #[test]
    fn property_p_examples() {
        assert!(verify_property_p(1 << 10).unwrap().passed);
        let control = verify_property_p_word(&"01010".parse().unwrap());
        assert!(!control.passed);
        assert!(verify_property_p((1 << 14) + 1).is_err());
    }

    #[test]
    fn step2_examples() {
        let x = pt("lemma1 gaps=3,4,9");
        // gaps (3,4,9) end at 536; use the 16 block for a 10^4 horizon
        assert!(verify_step2_window(&x, &x, 1, None, 400).unwrap().passed);
        let y = pt("lemma1 gaps=3,4,9,16");
        assert!(verify_step2_window(&y, &y, 1, None, 10_000).unwrap().passed);
        assert!(verify_step2_window(&y, &y, 3, None, 10_000).unwrap().passed);
        let z = pt("const bit=0");
        let c = verify_step2_window(&z, &z, 1, None, 100).unwrap();
        assert!(!c.passed);
        assert_eq!(c.details["witness_k"], 1);
    }

    #[test]
    fn alpha_difference_examples() {
        let w = |s: &str| s.parse::<Word>().unwrap();
        assert_eq!(alpha_difference_count(&w("1"), &w("0"), 10).unwrap(), 5);
        assert_eq!(alpha_difference_count(&w("01"), &w("00"), 8).unwrap(), 2);
        assert!(alpha_difference_count(&w("10"), &w("1"), 8).is_err());
    }

    #[test]
    fn partition_and_identity() {
        assert!(verify_w_partition(10_000).unwrap().passed);
        assert!(verify_morse_identity(12).unwrap().passed);
    }

    #[test]
    fn materialize_matches_lazy_points() {
        for d in ["morse", "const bit=1", "t1 i=2 gaps=1,2,3,4,5,6", "t2 beta=101 gaps=2,3,5", "shift k=7 of=r3 gaps=1,2,3,4,5"] {
            let p = pt(d);
            let n = 40;
            assert_eq!(materialize(&p, n).unwrap(), crate::symseq::prefix(&p, n).unwrap(), "{d}");
        }
    }

    proptest! {
        #[test]
        fn oracle_matches_estimator(i in 1u64..5, j in 1u64..5, bits in 3u32..12, m in 2u64..400, shift in 0u64..50) {
            prop_assume!(i != j);
            let gaps = "1,2,3,4,5,6,7,8";
            let u = pt(&format!("t1 i={i} gaps={gaps}")).shift(&shift.into());
            let v = pt(&format!("t1 i={j} gaps={gaps}")).shift(&shift.into());
            let m = m.min(510 - shift - bits as u64 + 1);
            prop_assume!(m >= 2);
            let grid: DeltaGrid = format!("2^-{bits},0.5,0.75,1-2^-{bits},1").parse().unwrap();
            let p = Precision::new(bits).unwrap().with_resolve_limit(20);
            let report = verify_oracle_match(&[u, v], &grid, &[m], p).unwrap();
            prop_assert!(report.passed, "{}", report.details);
        }
    }
}
