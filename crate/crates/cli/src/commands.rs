use std::fs;
use std::io::Write;
use std::path::Path;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde_json::json;

use scrambled_core::chaos::{estimates_to_csv, shifted_pair_distality_with, MAX_DISTALITY_WINDOW};
use scrambled_core::constructions::{parse_gap_list, parse_point};
use scrambled_core::oracle::{verify_oracle_match, verify_property_p_word};
use scrambled_core::{
    alpha_difference_count, classify_tuple, estimate_df_at, verify_lemma1, verify_property_p, verify_step2_window,
    CheckReport, ClassifyConfig, Dyadic, EstimateOptions, GapSequence, Word,
};

use crate::config::{extend_gaps, parse_grid, with_default_gaps, Tuple};
use crate::{plot, ClassifyArgs, Cli, Command, DfArgs, Failure, Format, GenArgs, Suite, VerifyArgs};

pub fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let out = cli.out.as_deref();
    match cli.command {
        Command::Gen(a) => gen(a, out),
        Command::Df(a) => df(a, out),
        Command::Classify(a) => classify(a, out),
        Command::Verify(a) => verify(a, out),
        Command::Plot(a) => {
            let svg = plot::render(&a)?;
            emit(out, &svg)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn gen(a: GenArgs, out: Option<&Path>) -> Result<(), Failure> {
    let d = with_default_gaps(&a.descriptor, a.gaps.as_deref());
    let p = parse_point(&d)?;
    let prefix = p.prefix(a.length)?;
    let text = match a.format {
        Format::Json => serde_json::to_string_pretty(&json!({
            "point": p.descriptor().to_string(),
            "length": a.length,
            "prefix": prefix.to_string(),
        }))? + "\n",
        _ => format!("# point={}\n# length={}\n{prefix}\n", p.descriptor(), a.length),
    };
    emit(out, &text)
}

fn df(a: DfArgs, out: Option<&Path>) -> Result<(), Failure> {
    let t = Tuple::parse(&a.tuple)?;
    let grid = parse_grid(a.delta_grid.as_deref())?;
    let mut config = t.config("df");
    config.delta_grid = Some(grid.to_string());
    let opts = EstimateOptions {
        grid,
        precision: t.precision,
        engine: t.engine,
    };
    let est = estimate_df_at(&t.points, &opts, &t.checkpoints)?;
    let text = match a.format {
        Format::Json => serde_json::to_string_pretty(&json!({ "config": config, "estimates": est }))? + "\n",
        _ => estimates_to_csv(&est, &config.header()),
    };
    emit(out, &text)
}

fn classify(a: ClassifyArgs, out: Option<&Path>) -> Result<(), Failure> {
    let t = Tuple::parse(&a.tuple)?;
    let mut cfg = ClassifyConfig::new(t.checkpoints.clone());
    cfg.options.grid = parse_grid(a.delta_grid.as_deref())?;
    cfg.options.precision = t.precision;
    cfg.options.engine = t.engine;
    cfg.threshold = a.threshold.as_deref().map(str::parse::<Dyadic>).transpose()?;
    cfg.separation = a.separation.parse()?;
    let v = classify_tuple(&t.points, &cfg)?;
    let mut config = t.config("classify");
    config.delta_grid = Some(cfg.options.grid.to_string());
    config.threshold = Some(v.threshold.to_string());
    config.separation = Some(v.separation.to_string());
    let text = match a.format {
        Format::Json => serde_json::to_string_pretty(&json!({ "config": config, "verdict": v }))? + "\n",
        _ => {
            let bits = v.precision;
            let mut s = config.header_text();
            s += &format!("classification={}\n", v.classification);
            s += "checkpoint,min_of_max,at_k,running_min_of_max,max_of_min,at_k,running_max_of_min\n";
            for (lo, hi) in v.liminf_max_estimate.iter().zip(&v.limsup_min_estimate) {
                s += &format!(
                    "{},{}/2^{bits},{},[{}; {}],{}/2^{bits},{},[{}; {}]\n",
                    lo.checkpoint,
                    lo.window.numerator,
                    lo.window.k,
                    lo.running_lower,
                    lo.running_upper,
                    hi.window.numerator,
                    hi.window.k,
                    hi.running_lower,
                    hi.running_upper
                );
            }
            if !v.extremal_evidence.is_empty() {
                s += "extremal: checkpoint,delta,below,phi_hat\n";
                for r in &v.extremal_evidence {
                    s += &format!("{},{},{},{:.12}\n", r.checkpoint, r.delta, r.below, r.phi_hat);
                }
            }
            s
        }
    };
    emit(out, &text)
}

fn verify(a: VerifyArgs, out: Option<&Path>) -> Result<(), Failure> {
    let (header, reports) = match a.suite {
        Suite::P { prefix, word } => match word {
            Some(w) => (
                vec![("suite", "p".to_string()), ("word", w.clone())],
                vec![verify_property_p_word(&w.parse::<Word>()?)],
            ),
            None => (
                vec![("suite", "p".to_string()), ("prefix", prefix.to_string())],
                vec![verify_property_p(prefix)?],
            ),
        },
        Suite::Lemma1 { gaps, n } => {
            let g = GapSequence::new(parse_gap_list(&gaps)?)?;
            let n = n.unwrap_or(g.len());
            if n < 2 || n > g.len() {
                return Err(Failure::Usage(format!("--n must lie in 2..={}", g.len())));
            }
            (
                vec![("suite", "lemma1".into()), ("gaps", gaps), ("n", n.to_string())],
                vec![verify_lemma1(&g, n)?],
            )
        }
        Suite::Step2 { gaps, r, horizon, window } => step2(&gaps, r, horizon, window)?,
        Suite::Lemma2 { beta1, beta2, n } => {
            let (w1, w2): (Word, Word) = (beta1.parse()?, beta2.parse()?);
            let count = alpha_difference_count(&w1, &w2, n)?;
            let k = (1..)
                .find(|&c: &usize| w1.get(c - 1).unwrap_or(0) != w2.get(c - 1).unwrap_or(0))
                .unwrap();
            let floor = n >> k.min(63);
            let report = CheckReport {
                check: "coding-difference-count".into(),
                passed: count >= floor,
                summary: format!(
                    "{count} indices n <= {n} with differing codes; first beta difference at {k}, floor {floor}"
                ),
                details: json!({ "count": count, "first_difference": k, "floor": floor }),
            };
            (
                vec![
                    ("suite", "lemma2".into()),
                    ("beta1", beta1),
                    ("beta2", beta2),
                    ("n", n.to_string()),
                ],
                vec![report],
            )
        }
        Suite::OracleMatch { tuple, delta_grid } => {
            let t = Tuple::parse(&tuple)?;
            let grid = parse_grid(delta_grid.as_deref())?;
            let cps = t
                .checkpoints
                .iter()
                .map(|c| c.to_u64().ok_or_else(|| Failure::Usage(format!("checkpoint {c} exceeds u64"))))
                .collect::<Result<Vec<_>, _>>()?;
            let mut h = vec![("suite", "oracle-match".to_string())];
            h.extend(t.descriptors.iter().map(|d| ("point", d.clone())));
            h.push(("checkpoints", t.checkpoints.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")));
            h.push(("precision", t.precision.bits.to_string()));
            h.push(("resolve_limit", t.precision.resolve_limit.to_string()));
            h.push(("delta_grid", grid.to_string()));
            (h, vec![verify_oracle_match(&t.points, &grid, &cps, t.precision)?])
        }
    };
    let passed = reports.iter().all(|r| r.passed);
    let text = match a.format {
        Format::Json => {
            let config: serde_json::Map<String, serde_json::Value> =
                header.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
            serde_json::to_string_pretty(&json!({ "config": config, "passed": passed, "checks": reports }))? + "\n"
        }
        _ => {
            let mut s: String = std::iter::once(("command", "verify".to_string()))
                .chain(header)
                .map(|(k, v)| format!("# {k}={v}\n"))
                .collect();
            for r in &reports {
                s += &format!("{r}\n");
            }
            s
        }
    };
    emit(out, &text)?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}

type SuiteOutput = (Vec<(&'static str, String)>, Vec<CheckReport>);

/// Every ordered pair from `lemma1` and `t1 i=1..4` on the given gaps,
/// extended when the horizon reaches past them.
fn step2(gaps: &str, r: u64, horizon: u64, window: Option<u64>) -> Result<SuiteOutput, Failure> {
    let w = window.unwrap_or(14 * r);
    let given = parse_gap_list(gaps)?;
    let need = BigUint::from(horizon) + w + r + 1u32;
    let g = extend_gaps(given.clone(), &need);
    let list = g.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",");
    let mut names = vec![format!("lemma1 gaps={list}")];
    names.extend((1..=4).map(|i| format!("t1 i={i} gaps={list}")));
    let points = names.iter().map(|n| parse_point(n)).collect::<Result<Vec<_>, _>>()?;
    let mut reports = Vec::new();
    for (a, u) in points.iter().enumerate() {
        for (b, v) in points.iter().enumerate() {
            let mut rep = verify_step2_window(u, v, r, Some(w), horizon)?;
            let pair = format!("({}, {})", short(&names[a]), short(&names[b]));
            if w <= MAX_DISTALITY_WINDOW as u64 {
                let d = shifted_pair_distality_with(u, v, r, w as u32, horizon)?;
                rep.summary += &format!("; min distance {} at k = {}", d.min_distance, d.argmin_k);
                rep.details["min_distance"] = json!(d.min_distance);
                rep.details["argmin_k"] = json!(d.argmin_k);
            }
            rep.summary = format!("{pair} {}", rep.summary);
            rep.details["pair"] = json!([names[a], names[b]]);
            reports.push(rep);
        }
    }
    let mut header = vec![
        ("suite", "step2".to_string()),
        ("gaps", gaps.to_string()),
        ("r", r.to_string()),
        ("horizon", horizon.to_string()),
        ("window", w.to_string()),
    ];
    if g != given {
        header.push(("gaps_used", list));
    }
    Ok((header, reports))
}

fn short(name: &str) -> &str {
    name.split(" gaps=").next().unwrap_or(name)
}
