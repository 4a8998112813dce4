//! Symbol-by-symbol sweep over shifts `k`, with sliding `L`-bit windows.

use num_bigint::BigUint;
use rayon::prelude::*;

use super::compare::{compare, slot, Counts, PairFold, Tally};
use super::Setup;
use crate::error::{Error, Result};
use crate::symseq::{Cursor, SymbolicPoint};

/// Shifts handled per parallel task.
pub(crate) const CHUNK: u64 = 1 << 15;

/// Finds the first agreeing coordinate past a window end, reusing earlier
/// scans while the window end moves forward.
struct Lookahead<'a> {
    cursors: Option<(Cursor<'a>, Cursor<'a>)>,
    /// Index the cursors read next; every index scanned before it disagreed
    /// (except `agree_at`, where scanning stopped).
    next: u64,
    agree_at: Option<u64>,
    exhausted: bool,
}

impl<'a> Lookahead<'a> {
    fn new() -> Self {
        Lookahead {
            cursors: None,
            next: 0,
            agree_at: None,
            exhausted: false,
        }
    }

    /// Whether some index in `(from, limit]` carries equal symbols.
    fn agrees_in(&mut self, u: &'a SymbolicPoint, v: &'a SymbolicPoint, from: u64, limit: u64) -> Result<bool> {
        if let Some(q) = self.agree_at {
            if q > from {
                return Ok(q <= limit);
            }
            self.agree_at = None;
        }
        if self.exhausted && self.next <= from + 1 {
            // the horizon was reached before `from + 1`
            return Ok(false);
        }
        if self.cursors.is_none() || self.next <= from {
            self.cursors = Some((u.cursor_u64(from + 1)?, v.cursor_u64(from + 1)?));
            self.next = from + 1;
            self.exhausted = false;
        }
        if self.exhausted {
            return Ok(false);
        }
        let (cu, cv) = self.cursors.as_mut().unwrap();
        while self.next <= limit {
            let (Some(a), Some(b)) = (cu.next(), cv.next()) else {
                self.exhausted = true;
                return Ok(false);
            };
            let pos = self.next;
            self.next += 1;
            if a == b {
                self.agree_at = Some(pos);
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Sweeps `k` over each window `[lo, hi)` and returns one tally per window.
pub(crate) fn run(setup: &Setup<'_>, windows: &[(u64, u64)]) -> Result<Vec<Tally>> {
    let tasks: Vec<(usize, u64, u64)> = windows
        .iter()
        .enumerate()
        .flat_map(|(w, &(lo, hi))| {
            (lo..hi)
                .step_by(CHUNK as usize)
                .map(move |a| (w, a, (a + CHUNK).min(hi)))
        })
        .collect();
    let parts: Vec<(usize, Tally)> = tasks
        .par_iter()
        .map(|&(w, a, b)| sweep_chunk(setup, a, b).map(|t| (w, t)))
        .collect::<Result<_>>()?;
    let mut out: Vec<Tally> = windows.iter().map(|_| Tally::new(setup.thresholds.len())).collect();
    for (w, t) in &parts {
        out[*w].absorb(t);
    }
    Ok(out)
}

fn sweep_chunk(setup: &Setup<'_>, a: u64, b: u64) -> Result<Tally> {
    let points = setup.points;
    let bits = setup.precision.bits;
    let mask = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
    let resolve = setup.precision.resolve_limit;
    let deltas = setup.thresholds.len();

    let mut cursors = points
        .iter()
        .map(|p| p.cursor_u64(a + 1))
        .collect::<Result<Vec<_>>>()?;
    let short = |p: &SymbolicPoint, idx: u64| Error::horizon(idx, p.horizon().unwrap_or_default());
    let mut win = vec![0u64; points.len()];
    for (i, c) in cursors.iter_mut().enumerate() {
        for off in 1..=bits as u64 {
            let bit = c.next().ok_or_else(|| short(&points[i], a + off))?;
            win[i] = (win[i] << 1) | bit as u64;
        }
    }

    let mut lookahead: Vec<Lookahead> = setup.pairs.iter().map(|_| Lookahead::new()).collect();
    let mut lower = vec![[0u64; 3]; deltas];
    let mut upper = vec![[0u64; 3]; deltas];
    let mut min_of_max: Option<(u64, u64)> = None;
    let mut max_of_min: Option<(u64, u64)> = None;
    let mut xs = vec![0u64; setup.pairs.len()];

    for k in a..b {
        if k > a {
            let idx = k + bits as u64;
            for (i, c) in cursors.iter_mut().enumerate() {
                let bit = c.next().ok_or_else(|| short(&points[i], idx))?;
                win[i] = ((win[i] << 1) | bit as u64) & mask;
            }
        }
        let (mut lo_x, mut hi_x) = (u64::MAX, 0u64);
        for (q, &(i, j)) in setup.pairs.iter().enumerate() {
            let x = win[i] ^ win[j];
            xs[q] = x;
            lo_x = lo_x.min(x);
            hi_x = hi_x.max(x);
        }
        if min_of_max.map_or(true, |(x, _)| hi_x < x) {
            min_of_max = Some((hi_x, k));
        }
        if max_of_min.map_or(true, |(x, _)| lo_x > x) {
            max_of_min = Some((lo_x, k));
        }
        let end = k + bits as u64;
        let limit = end.saturating_add(resolve);
        for (d, &c) in setup.thresholds.iter().enumerate() {
            let mut fold = PairFold::new();
            for (q, &(i, j)) in setup.pairs.iter().enumerate() {
                let mut failure = None;
                let v = compare(xs[q], c, || {
                    match lookahead[q].agrees_in(&points[i], &points[j], end, limit) {
                        Ok(found) => found,
                        Err(e) => {
                            failure = Some(e);
                            false
                        }
                    }
                });
                if let Some(e) = failure {
                    return Err(e);
                }
                fold.push(v);
            }
            lower[d][slot(fold.lower())] += 1;
            upper[d][slot(fold.upper())] += 1;
        }
    }

    let mut tally = Tally::new(deltas);
    tally.lower = lower.into_iter().map(Counts::from_u64).collect();
    tally.upper = upper.into_iter().map(Counts::from_u64).collect();
    if let Some((x, k)) = min_of_max {
        tally.offer_min_of_max(x, &BigUint::from(k));
    }
    if let Some((x, k)) = max_of_min {
        tally.offer_max_of_min(x, &BigUint::from(k));
    }
    Ok(tally)
}
