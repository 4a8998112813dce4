//! Finite-horizon estimates of the lower and upper distribution functions
//!
//! ```text
//! Phi(delta)  ~ #{0 < k < m : min_{pairs} d(s^k u, s^k v) < delta} / (m - 1)
//! Phi*(delta) ~ #{0 < k < m : max_{pairs} d(s^k u, s^k v) < delta} / (m - 1)
//! ```
//!
//! and evidence-level classification of tuples. Distances are truncated at
//! `L` coordinates and compared conservatively (see [`compare`]).
//!
//! Two engines produce identical tallies: a symbolwise sweep that works for
//! any points, and a blockwise engine for tuples of block-built points with a
//! common gap sequence, which handles horizons far beyond 64 bits.

mod blockwise;
pub mod compare;
mod sweep;

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Serialize, Serializer};

pub use compare::{Counts, Extreme, Verdict};
use compare::{scaled_threshold, Tally};

use crate::dyadic::{decimal_string, Dyadic};
use crate::error::{Error, Result};
use crate::symseq::{SymbolicPoint, DEFAULT_PRECISION};

/// Default cap on coordinates inspected past the window to settle `X = C - 1`.
pub const DEFAULT_RESOLVE_LIMIT: u64 = 1 << 20;

/// Largest window length for [`shifted_pair_distality`].
pub const MAX_DISTALITY_WINDOW: u32 = 128;

/// Sorted, deduplicated dyadic thresholds in `(0, 1]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeltaGrid {
    deltas: Vec<Dyadic>,
}

impl DeltaGrid {
    pub fn new(mut deltas: Vec<Dyadic>) -> Result<Self> {
        if deltas.is_empty() {
            return Err(Error::InvalidDelta("the grid is empty".into()));
        }
        if let Some(d) = deltas.iter().find(|d| d.is_zero() || **d > Dyadic::ONE) {
            return Err(Error::InvalidDelta(format!("{d} lies outside (0, 1]")));
        }
        deltas.sort();
        deltas.dedup();
        Ok(DeltaGrid { deltas })
    }

    /// `{2^-l : l = 1..8} ∪ {1 - 2^-r : r = 1..8}`.
    pub fn default_grid() -> Self {
        let mut v: Vec<Dyadic> = (1..=8).map(|l| Dyadic::pow2_neg(l).unwrap()).collect();
        v.extend((1..=8).map(|r| Dyadic::one_minus_pow2_neg(r).unwrap()));
        DeltaGrid::new(v).unwrap()
    }

    pub fn deltas(&self) -> &[Dyadic] {
        &self.deltas
    }

    pub fn len(&self) -> usize {
        self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }

    /// Position of `delta` in the grid.
    pub fn index_of(&self, delta: &Dyadic) -> Option<usize> {
        self.deltas.binary_search(delta).ok()
    }

    fn check_precision(&self, bits: u32) -> Result<()> {
        match self.deltas.iter().find(|d| d.exponent() > bits) {
            Some(d) => Err(Error::InvalidDelta(format!(
                "{d} needs {} binary digits but the precision is {bits}",
                d.exponent()
            ))),
            None => Ok(()),
        }
    }
}

impl Default for DeltaGrid {
    fn default() -> Self {
        DeltaGrid::default_grid()
    }
}

impl FromStr for DeltaGrid {
    type Err = Error;

    /// Comma-separated dyadic values, e.g. `2^-4,0.5,1-2^-3`.
    fn from_str(s: &str) -> Result<Self> {
        let deltas = s
            .split(',')
            .map(|t| t.trim().parse())
            .collect::<Result<Vec<Dyadic>>>()?;
        DeltaGrid::new(deltas)
    }
}

impl fmt::Display for DeltaGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.deltas.iter().map(Dyadic::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

/// Truncation length `L` plus the lookahead allowed when `X = C - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Precision {
    pub bits: u32,
    pub resolve_limit: u64,
}

impl Precision {
    pub fn new(bits: u32) -> Result<Self> {
        if bits == 0 || bits > 64 {
            return Err(Error::InvalidPrecision(format!("L = {bits} is outside 1..=64")));
        }
        Ok(Precision {
            bits,
            resolve_limit: DEFAULT_RESOLVE_LIMIT,
        })
    }

    pub fn with_resolve_limit(mut self, limit: u64) -> Self {
        self.resolve_limit = limit;
        self
    }

    fn check(&self) -> Result<()> {
        Precision::new(self.bits).map(|_| ())
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision::new(DEFAULT_PRECISION).unwrap()
    }
}

/// Which sweep produces the tallies.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Engine {
    /// Blockwise when the tuple qualifies, symbolwise otherwise.
    #[default]
    Auto,
    Symbolwise,
    Blockwise,
}

impl Engine {
    pub fn as_str(&self) -> &'static str {
        match self {
            Engine::Auto => "auto",
            Engine::Symbolwise => "symbolwise",
            Engine::Blockwise => "blockwise",
        }
    }

    /// The engine actually used for `tuple`.
    pub fn resolve(self, tuple: &[SymbolicPoint]) -> Engine {
        match self {
            Engine::Auto if blockwise::eligible(tuple) => Engine::Blockwise,
            Engine::Auto => Engine::Symbolwise,
            e => e,
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Engine::Auto),
            "symbolwise" => Ok(Engine::Symbolwise),
            "blockwise" => Ok(Engine::Blockwise),
            other => Err(Error::InvalidArgument(format!("unknown engine `{other}`"))),
        }
    }
}

impl Serialize for Engine {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

pub(crate) struct Setup<'a> {
    pub points: &'a [SymbolicPoint],
    pub pairs: Vec<(usize, usize)>,
    /// `delta * 2^L` per grid entry.
    pub thresholds: Vec<u128>,
    pub precision: Precision,
}

/// Rejects tuples with fewer than two points or a repeated descriptor.
pub fn check_tuple(tuple: &[SymbolicPoint]) -> Result<()> {
    if tuple.len() < 2 {
        return Err(Error::InvalidArgument("a tuple needs at least two points".into()));
    }
    for (i, p) in tuple.iter().enumerate() {
        if tuple[..i].iter().any(|q| q.descriptor() == p.descriptor()) {
            return Err(Error::Diagonal(p.descriptor().to_string()));
        }
    }
    Ok(())
}

fn check_checkpoints(checkpoints: &[BigUint]) -> Result<()> {
    if checkpoints.is_empty() {
        return Err(Error::InvalidArgument("no checkpoints given".into()));
    }
    if checkpoints[0] < BigUint::from(2u32) {
        return Err(Error::InvalidArgument("checkpoints must be at least 2".into()));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("checkpoints must increase strictly".into()));
    }
    Ok(())
}

/// Tallies for the windows `[c_{i-1}, c_i)` of `k`, with `c_0 = 1`.
fn tally_windows(
    tuple: &[SymbolicPoint],
    grid: &DeltaGrid,
    checkpoints: &[BigUint],
    precision: Precision,
    engine: Engine,
) -> Result<(Engine, Vec<Tally>)> {
    check_tuple(tuple)?;
    precision.check()?;
    grid.check_precision(precision.bits)?;
    check_checkpoints(checkpoints)?;
    let last = checkpoints.last().unwrap();
    let need = last - 1u32 + precision.bits;
    for p in tuple {
        if !p.evaluable_through(&need) {
            return Err(Error::horizon(&need, p.horizon().unwrap_or_default()));
        }
    }
    let n = tuple.len();
    let setup = Setup {
        points: tuple,
        pairs: (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect(),
        thresholds: grid
            .deltas()
            .iter()
            .map(|d| scaled_threshold(d, precision.bits))
            .collect(),
        precision,
    };
    let mut bounds = vec![BigUint::one()];
    bounds.extend(checkpoints.iter().cloned());
    let engine = engine.resolve(tuple);
    let tallies = match engine {
        Engine::Blockwise => {
            let windows: Vec<(BigUint, BigUint)> =
                bounds.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect();
            blockwise::run(&setup, &windows)?
        }
        _ => {
            let windows = bounds
                .windows(2)
                .map(|w| match (w[0].to_u64(), w[1].to_u64()) {
                    (Some(a), Some(b)) => Ok((a, b)),
                    _ => Err(Error::capacity(
                        "symbolwise checkpoint",
                        &w[1],
                        "2^64 - 1 (use the blockwise engine)",
                    )),
                })
                .collect::<Result<Vec<_>>>()?;
            sweep::run(&setup, &windows)?
        }
    };
    Ok((engine, tallies))
}

fn ratio(num: &BigUint, den: &BigUint) -> BigRational {
    BigRational::new(BigInt::from(num.clone()), BigInt::from(den.clone()))
}

/// Empirical `Phi` and `Phi*` over `0 < k < m` on a grid of `delta`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistributionEstimate {
    #[serde(serialize_with = "crate::report::ser_biguint")]
    pub horizon: BigUint,
    pub deltas: Vec<Dyadic>,
    pub precision: u32,
    /// Min-over-pairs tallies, one per delta.
    pub lower_counts: Vec<Counts>,
    /// Max-over-pairs tallies, one per delta.
    pub upper_counts: Vec<Counts>,
    pub phi_hat: Vec<f64>,
    pub phi_star_hat: Vec<f64>,
}

impl DistributionEstimate {
    fn new(horizon: BigUint, grid: &DeltaGrid, precision: u32, lower: Vec<Counts>, upper: Vec<Counts>) -> Self {
        let den = &horizon - 1u32;
        let f = |c: &Counts| ratio(&c.below, &den).to_f64().unwrap_or(f64::NAN);
        DistributionEstimate {
            phi_hat: lower.iter().map(f).collect(),
            phi_star_hat: upper.iter().map(f).collect(),
            horizon,
            deltas: grid.deltas().to_vec(),
            precision,
            lower_counts: lower,
            upper_counts: upper,
        }
    }

    /// Exact `below / (m - 1)` of the min-over-pairs tally.
    pub fn phi_hat_exact(&self, i: usize) -> BigRational {
        ratio(&self.lower_counts[i].below, &(&self.horizon - 1u32))
    }

    /// Exact `below / (m - 1)` of the max-over-pairs tally.
    pub fn phi_star_hat_exact(&self, i: usize) -> BigRational {
        ratio(&self.upper_counts[i].below, &(&self.horizon - 1u32))
    }

    pub fn index_of(&self, delta: &Dyadic) -> Option<usize> {
        self.deltas.iter().position(|d| d == delta)
    }
}

/// Options shared by [`estimate_df_at`] and [`classify_tuple`].
#[derive(Clone, Debug)]
pub struct EstimateOptions {
    pub grid: DeltaGrid,
    pub precision: Precision,
    pub engine: Engine,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions {
            grid: DeltaGrid::default_grid(),
            precision: Precision::default(),
            engine: Engine::Auto,
        }
    }
}

/// Estimates at horizon `m`.
pub fn estimate_df(
    tuple: &[SymbolicPoint],
    grid: &DeltaGrid,
    m: &BigUint,
    precision: Precision,
) -> Result<DistributionEstimate> {
    let opts = EstimateOptions {
        grid: grid.clone(),
        precision,
        engine: Engine::Auto,
    };
    Ok(estimate_df_at(tuple, &opts, std::slice::from_ref(m))?.remove(0))
}

/// Estimates at each checkpoint from a single sweep.
pub fn estimate_df_at(
    tuple: &[SymbolicPoint],
    opts: &EstimateOptions,
    checkpoints: &[BigUint],
) -> Result<Vec<DistributionEstimate>> {
    let (_, tallies) = tally_windows(tuple, &opts.grid, checkpoints, opts.precision, opts.engine)?;
    Ok(cumulative(&opts.grid, opts.precision.bits, checkpoints, &tallies))
}

fn cumulative(grid: &DeltaGrid, bits: u32, checkpoints: &[BigUint], tallies: &[Tally]) -> Vec<DistributionEstimate> {
    let mut acc = Tally::new(grid.len());
    checkpoints
        .iter()
        .zip(tallies)
        .map(|(m, t)| {
            acc.absorb(t);
            DistributionEstimate::new(m.clone(), grid, bits, acc.lower.clone(), acc.upper.clone())
        })
        .collect()
}

/// Finite-horizon evidence class of a tuple.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    ScrambledEvidence,
    Condition1Fails,
    Condition2Fails,
    Inconclusive,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::ScrambledEvidence => "scrambled-evidence",
            Classification::Condition1Fails => "not-scrambled:condition1-fails",
            Classification::Condition2Fails => "not-scrambled:condition2-fails",
            Classification::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Classification {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// Classification settings. The first checkpoint ends the burn-in: only
/// shifts `k >= checkpoints[0]` feed the tail statistics.
#[derive(Clone, Debug)]
pub struct ClassifyConfig {
    pub checkpoints: Vec<BigUint>,
    pub options: EstimateOptions,
    /// Smallness threshold; defaults to `2^-(L-2)`.
    pub threshold: Option<Dyadic>,
    /// Lower bound the limsup of min-pair distances must reach for
    /// scrambled evidence.
    pub separation: Dyadic,
}

impl ClassifyConfig {
    pub fn new(checkpoints: Vec<BigUint>) -> Self {
        ClassifyConfig {
            checkpoints,
            options: EstimateOptions::default(),
            threshold: None,
            separation: Dyadic::pow2_neg(2).unwrap(),
        }
    }

    pub fn threshold(&self) -> Result<Dyadic> {
        match self.threshold {
            Some(t) => Ok(t),
            None => {
                let bits = self.options.precision.bits;
                if bits < 3 {
                    return Err(Error::InvalidPrecision(format!(
                        "the default threshold 2^-(L-2) needs L >= 3, got {bits}"
                    )));
                }
                Dyadic::pow2_neg(bits - 2)
            }
        }
    }
}

/// A tail statistic at one checkpoint, as a truncated numerator over `2^L`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailStat {
    #[serde(serialize_with = "crate::report::ser_biguint")]
    pub checkpoint: BigUint,
    /// Extreme over the window that ends at this checkpoint.
    pub window: Extreme,
    /// Extreme over the whole tail so far.
    pub running: Extreme,
    /// Exact bounds of the running value: `[X, X + 1] / 2^L`.
    pub running_lower: String,
    pub running_upper: String,
}

/// `Phi` at one checkpoint for a `delta` near the diameter.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtremalRow {
    #[serde(serialize_with = "crate::report::ser_biguint")]
    pub checkpoint: BigUint,
    pub delta: Dyadic,
    #[serde(serialize_with = "crate::report::ser_biguint")]
    pub below: BigUint,
    pub phi_hat: f64,
}

/// Evidence for or against the tuple being scrambled.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TupleVerdict {
    pub descriptors: Vec<String>,
    #[serde(serialize_with = "crate::report::ser_biguint_vec")]
    pub checkpoints: Vec<BigUint>,
    pub precision: u32,
    pub threshold: Dyadic,
    pub separation: Dyadic,
    pub engine: Engine,
    /// Running minimum over the tail of the max-over-pairs distance.
    pub liminf_max_estimate: Vec<TailStat>,
    /// Running maximum over the tail of the min-over-pairs distance.
    pub limsup_min_estimate: Vec<TailStat>,
    pub classification: Classification,
    pub extremal_evidence: Vec<ExtremalRow>,
    pub estimates: Vec<DistributionEstimate>,
}

impl TupleVerdict {
    /// Running liminf-of-max numerator at the final checkpoint.
    pub fn final_liminf_max(&self) -> u64 {
        self.liminf_max_estimate.last().unwrap().running.numerator
    }

    /// Running limsup-of-min numerator at the final checkpoint.
    pub fn final_limsup_min(&self) -> u64 {
        self.limsup_min_estimate.last().unwrap().running.numerator
    }
}

/// Classifies `tuple` from the shifts `k` in `[checkpoints[0], checkpoints[last])`.
///
/// With `T = threshold * 2^L` and `S = separation * 2^L`, and running tail
/// numerators `a` (min over `k` of the max pair) and `b` (max over `k` of the
/// min pair):
///
/// * condition 2 fails when `b + 1 <= T`;
/// * condition 1 fails when `a > T`;
/// * scrambled evidence when `a + 1 <= T` and `b >= S`;
/// * inconclusive otherwise.
pub fn classify_tuple(tuple: &[SymbolicPoint], config: &ClassifyConfig) -> Result<TupleVerdict> {
    let opts = &config.options;
    let bits = opts.precision.bits;
    if config.checkpoints.len() < 2 {
        return Err(Error::InvalidArgument(
            "classification needs at least two checkpoints: the first ends the burn-in".into(),
        ));
    }
    let threshold = config.threshold()?;
    let t_num = threshold.scaled(bits).ok_or_else(|| {
        Error::InvalidArgument(format!("threshold {threshold} needs more than {bits} binary digits"))
    })?;
    let s_num = config.separation.scaled(bits).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "separation {} needs more than {bits} binary digits",
            config.separation
        ))
    })?;
    let (engine, tallies) = tally_windows(tuple, &opts.grid, &config.checkpoints, opts.precision, opts.engine)?;
    let estimates = cumulative(&opts.grid, bits, &config.checkpoints, &tallies);

    let bounds = |x: u64| {
        (
            decimal_string(&BigUint::from(x), bits),
            decimal_string(&(BigUint::from(x) + 1u32), bits),
        )
    };
    let mut liminf = Vec::new();
    let mut limsup = Vec::new();
    let mut run_min: Option<Extreme> = None;
    let mut run_max: Option<Extreme> = None;
    for (c, t) in config.checkpoints.iter().zip(&tallies).skip(1) {
        let w_min = t.min_of_max.clone().expect("tail windows are nonempty");
        let w_max = t.max_of_min.clone().expect("tail windows are nonempty");
        if run_min.as_ref().map_or(true, |e| w_min.numerator < e.numerator) {
            run_min = Some(w_min.clone());
        }
        if run_max.as_ref().map_or(true, |e| w_max.numerator > e.numerator) {
            run_max = Some(w_max.clone());
        }
        let rmin = run_min.clone().unwrap();
        let rmax = run_max.clone().unwrap();
        let (lo, hi) = bounds(rmin.numerator);
        liminf.push(TailStat {
            checkpoint: c.clone(),
            window: w_min,
            running: rmin,
            running_lower: lo,
            running_upper: hi,
        });
        let (lo, hi) = bounds(rmax.numerator);
        limsup.push(TailStat {
            checkpoint: c.clone(),
            window: w_max,
            running: rmax,
            running_lower: lo,
            running_upper: hi,
        });
    }
    let a = run_min.unwrap().numerator as u128;
    let b = run_max.unwrap().numerator as u128;
    let classification = if b + 1 <= t_num {
        Classification::Condition2Fails
    } else if a > t_num {
        Classification::Condition1Fails
    } else if a + 1 <= t_num && b >= s_num {
        Classification::ScrambledEvidence
    } else {
        Classification::Inconclusive
    };

    let half = Dyadic::pow2_neg(1).unwrap();
    let mut extremal = Vec::new();
    for est in &estimates {
        for (i, d) in est.deltas.iter().enumerate() {
            if *d >= half && *d < Dyadic::ONE {
                extremal.push(ExtremalRow {
                    checkpoint: est.horizon.clone(),
                    delta: *d,
                    below: est.lower_counts[i].below.clone(),
                    phi_hat: est.phi_hat[i],
                });
            }
        }
    }

    Ok(TupleVerdict {
        descriptors: tuple.iter().map(|p| p.descriptor().to_string()).collect(),
        checkpoints: config.checkpoints.clone(),
        precision: bits,
        threshold,
        separation: config.separation,
        engine,
        liminf_max_estimate: liminf,
        limsup_min_estimate: limsup,
        classification,
        extremal_evidence: extremal,
        estimates,
    })
}

/// Smallest truncated distance between `s^k(u)` and `s^(k+r)(v)` for
/// `0 <= k <= horizon`, at precision `window_len`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DistalityReport {
    pub r: u64,
    pub window_len: u32,
    pub horizon: u64,
    /// Numerator of the minimum over `2^window_len`.
    pub min_numerator: String,
    pub min_distance: String,
    pub argmin_k: u64,
    /// Whether the minimum is at least `2^-window_len`, i.e. no aligned
    /// window of that length agrees.
    pub floor_holds: bool,
    /// False when either point lies outside the block-built families.
    pub applicable: bool,
}

/// [`shifted_pair_distality_with`] at window length `14 r`.
pub fn shifted_pair_distality(u: &SymbolicPoint, v: &SymbolicPoint, r: u64, horizon: u64) -> Result<DistalityReport> {
    let w = r
        .checked_mul(14)
        .filter(|&w| w <= MAX_DISTALITY_WINDOW as u64)
        .ok_or_else(|| {
            Error::InvalidArgument(format!("window 14r = 14*{r} exceeds {MAX_DISTALITY_WINDOW}"))
        })?;
    shifted_pair_distality_with(u, v, r, w as u32, horizon)
}

pub fn shifted_pair_distality_with(
    u: &SymbolicPoint,
    v: &SymbolicPoint,
    r: u64,
    window_len: u32,
    horizon: u64,
) -> Result<DistalityReport> {
    if r == 0 {
        return Err(Error::InvalidArgument("r must be positive".into()));
    }
    if window_len == 0 || window_len > MAX_DISTALITY_WINDOW {
        return Err(Error::InvalidArgument(format!(
            "window length {window_len} is outside 1..={MAX_DISTALITY_WINDOW}"
        )));
    }
    let w = window_len as u64;
    let mask = if window_len == 128 { u128::MAX } else { (1u128 << window_len) - 1 };
    let mut cu = u.cursor_u64(1)?;
    let mut cv = v.cursor_u64(1 + r)?;
    let read = |c: &mut crate::symseq::Cursor<'_>, p: &SymbolicPoint, idx: u64| {
        c.next()
            .ok_or_else(|| Error::horizon(idx, p.horizon().unwrap_or_default()))
    };
    let (mut wu, mut wv) = (0u128, 0u128);
    for i in 1..=w {
        wu = (wu << 1) | read(&mut cu, u, i)? as u128;
        wv = (wv << 1) | read(&mut cv, v, i + r)? as u128;
    }
    let mut best = (wu ^ wv, 0u64);
    for k in 1..=horizon {
        wu = ((wu << 1) | read(&mut cu, u, k + w)? as u128) & mask;
        wv = ((wv << 1) | read(&mut cv, v, k + r + w)? as u128) & mask;
        let x = wu ^ wv;
        if x < best.0 {
            best = (x, k);
        }
    }
    Ok(DistalityReport {
        r,
        window_len,
        horizon,
        min_numerator: best.0.to_string(),
        min_distance: decimal_string(&BigUint::from(best.0), window_len),
        argmin_k: best.1,
        floor_holds: best.0 >= 1,
        applicable: u.is_block_built() && v.is_block_built(),
    })
}

/// CSV with `# key=value` header lines and one row per `(delta, m)`.
pub fn estimates_to_csv(estimates: &[DistributionEstimate], header: &[(String, String)]) -> String {
    let mut out = String::new();
    for (k, v) in header {
        out.push_str(&format!("# {k}={v}\n"));
    }
    out.push_str("delta,m,below,atleast,indeterminate,phi_hat,phi_star_hat\n");
    for est in estimates {
        for (i, d) in est.deltas.iter().enumerate() {
            let c = &est.lower_counts[i];
            out.push_str(&format!(
                "{},{},{},{},{},{:.12},{:.12}\n",
                d, est.horizon, c.below, c.atleast, c.indeterminate, est.phi_hat[i], est.phi_star_hat[i]
            ));
        }
    }
    out
}
