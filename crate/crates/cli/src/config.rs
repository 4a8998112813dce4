use num_bigint::BigUint;
use serde::Serialize;

use scrambled_core::constructions::{parse_gap_list, parse_point};
use scrambled_core::{DeltaGrid, Engine, Precision, SymbolicPoint};

use crate::{Failure, TupleArgs};

const FAMILY_TAGS: [&str; 4] = ["lemma1", "t1", "t2", "r3"];

/// Appends ` gaps=<list>` when the innermost descriptor is a family point
/// without its own gap list.
pub fn with_default_gaps(descriptor: &str, gaps: Option<&str>) -> String {
    let d = descriptor.trim();
    let inner = d.rsplit("of=").next().unwrap_or(d);
    let tag = inner.split_whitespace().next().unwrap_or("");
    match gaps {
        Some(g) if FAMILY_TAGS.contains(&tag) && !inner.contains("gaps=") => format!("{d} gaps={g}"),
        _ => d.to_string(),
    }
}

/// Fully resolved run parameters, echoed into every output header.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub tuple: Vec<String>,
    pub checkpoints: Vec<String>,
    pub precision: u32,
    pub resolve_limit: u64,
    pub engine: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_grid: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub separation: Option<String>,
}

impl RunConfig {
    pub fn header(&self) -> Vec<(String, String)> {
        let mut h = vec![("command".to_string(), self.command.clone())];
        for (i, d) in self.tuple.iter().enumerate() {
            h.push((format!("point{}", i + 1), d.clone()));
        }
        h.push(("checkpoints".into(), self.checkpoints.join(",")));
        h.push(("precision".into(), self.precision.to_string()));
        h.push(("resolve_limit".into(), self.resolve_limit.to_string()));
        h.push(("engine".into(), self.engine.clone()));
        for (k, v) in [
            ("delta_grid", &self.delta_grid),
            ("threshold", &self.threshold),
            ("separation", &self.separation),
        ] {
            if let Some(v) = v {
                h.push((k.into(), v.clone()));
            }
        }
        h
    }

    pub fn header_text(&self) -> String {
        self.header().iter().map(|(k, v)| format!("# {k}={v}\n")).collect()
    }
}

/// Parsed tuple with everything needed to run an estimate.
pub struct Tuple {
    pub descriptors: Vec<String>,
    pub points: Vec<SymbolicPoint>,
    pub checkpoints: Vec<BigUint>,
    pub precision: Precision,
    pub engine: Engine,
}

impl Tuple {
    pub fn parse(args: &TupleArgs) -> Result<Self, Failure> {
        let mut descriptors = Vec::new();
        let mut points = Vec::new();
        for raw in &args.tuple {
            let d = with_default_gaps(raw, args.gaps.as_deref());
            let p = parse_point(&d).map_err(|e| Failure::Usage(format!("point `{raw}`: {e}")))?;
            descriptors.push(p.descriptor().to_string());
            points.push(p);
        }
        let spec = match (&args.checkpoints, &args.horizon) {
            (Some(c), _) => c.clone(),
            (None, Some(h)) => h.clone(),
            (None, None) => return Err(Failure::Usage("give --checkpoints or --horizon".into())),
        };
        let gaps = common_gaps(&points, args.gaps.as_deref())?;
        let checkpoints = parse_checkpoints(&spec, gaps.as_deref())?;
        let mut precision = Precision::new(args.precision)?;
        if let Some(r) = args.resolve_limit {
            precision = precision.with_resolve_limit(r);
        }
        let engine: Engine = args.engine.parse()?;
        Ok(Tuple {
            descriptors,
            points,
            checkpoints,
            precision,
            engine,
        })
    }

    pub fn config(&self, command: &str) -> RunConfig {
        RunConfig {
            command: command.into(),
            tuple: self.descriptors.clone(),
            checkpoints: self.checkpoints.iter().map(|c| c.to_string()).collect(),
            precision: self.precision.bits,
            resolve_limit: self.precision.resolve_limit,
            engine: self.engine.resolve(&self.points).as_str().into(),
            delta_grid: None,
            threshold: None,
            separation: None,
        }
    }
}

fn common_gaps(points: &[SymbolicPoint], fallback: Option<&str>) -> Result<Option<Vec<u32>>, Failure> {
    if let Some(g) = points.iter().find_map(|p| p.descriptor().gaps()) {
        return Ok(Some(g.to_vec()));
    }
    Ok(fallback.map(parse_gap_list).transpose()?)
}

/// Boundaries `s_0..=s_N` of a gap list.
pub fn boundaries(gaps: &[u32]) -> Vec<BigUint> {
    let mut s = vec![BigUint::from(0u32)];
    for &a in gaps {
        let next = s.last().unwrap() + (BigUint::from(1u32) << a);
        s.push(next);
    }
    s
}

/// Parses `8,24,s3,s16-32` into horizons.
pub fn parse_checkpoints(spec: &str, gaps: Option<&[u32]>) -> Result<Vec<BigUint>, Failure> {
    let items: Vec<&str> = spec.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(Failure::Usage("empty checkpoint list".into()));
    }
    let sums = gaps.map(boundaries);
    let mut out = Vec::new();
    for item in items {
        let value = if let Some(rest) = item.strip_prefix('s') {
            let sums = sums
                .as_ref()
                .ok_or_else(|| Failure::Usage(format!("`{item}` needs a gap list")))?;
            let (idx, offset) = match rest.find(['+', '-']) {
                Some(p) => (&rest[..p], Some((&rest[p..p + 1], &rest[p + 1..]))),
                None => (rest, None),
            };
            let j: usize = idx.parse().map_err(|_| Failure::Usage(format!("bad checkpoint `{item}`")))?;
            let base = sums
                .get(j)
                .ok_or_else(|| Failure::Usage(format!("`{item}`: only {} blocks", sums.len() - 1)))?
                .clone();
            match offset {
                None => base,
                Some((sign, c)) => {
                    let c: BigUint = c.parse().map_err(|_| Failure::Usage(format!("bad offset in `{item}`")))?;
                    if sign == "+" {
                        base + c
                    } else if c <= base {
                        base - c
                    } else {
                        return Err(Failure::Usage(format!("`{item}` is negative")));
                    }
                }
            }
        } else {
            item.parse::<BigUint>()
                .map_err(|_| Failure::Usage(format!("bad checkpoint `{item}`")))?
        };
        out.push(value);
    }
    Ok(out)
}

pub fn parse_grid(spec: Option<&str>) -> Result<DeltaGrid, Failure> {
    Ok(match spec {
        Some(s) => s.parse()?,
        None => DeltaGrid::default_grid(),
    })
}

/// Smallest extension of a parity-locked gap list whose last boundary
/// reaches `need`: each new exponent is the next larger one with the
/// parity of its position.
pub fn extend_gaps(mut gaps: Vec<u32>, need: &BigUint) -> Vec<u32> {
    while boundaries(&gaps).last().unwrap() < need {
        let pos = gaps.len() as u32 + 1;
        let mut a = gaps.last().map_or(1, |a| a + 1);
        if a % 2 != pos % 2 {
            a += 1;
        }
        gaps.push(a);
    }
    gaps
}
