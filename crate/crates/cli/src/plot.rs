//! Static SVG chart of `phi_hat` (solid) and `phi_star_hat` (dashed)
//! against `log2 m`, read back from a `df` CSV.

use std::fmt::Write;

use num_bigint::BigUint;

use crate::{Failure, PlotArgs};

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

struct Series {
    delta: String,
    points: Vec<(f64, f64, f64)>,
}

fn log2(m: &BigUint) -> f64 {
    let bits = m.bits();
    if bits <= 52 {
        return (m.iter_u64_digits().next().unwrap_or(0) as f64).log2();
    }
    let top = (m >> (bits - 52)).iter_u64_digits().next().unwrap_or(0) as f64;
    top.log2() + (bits - 52) as f64
}

fn read(args: &PlotArgs) -> Result<Vec<Series>, Failure> {
    let keep: Option<Vec<String>> = args
        .deltas
        .as_ref()
        .map(|d| d.split(',').map(|s| s.trim().to_string()).collect());
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(&args.input)
        .map_err(|e| Failure::Usage(format!("{}: {e}", args.input.display())))?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Failure::Usage(format!("CSV lacks column `{name}`")))
    };
    let (cd, cm, cp, cs) = (col("delta")?, col("m")?, col("phi_hat")?, col("phi_star_hat")?);
    let mut series: Vec<Series> = Vec::new();
    for row in reader.records() {
        let row = row?;
        let delta = row[cd].to_string();
        if keep.as_ref().is_some_and(|k| !k.contains(&delta)) {
            continue;
        }
        let m: BigUint = row[cm]
            .parse()
            .map_err(|_| Failure::Usage(format!("bad m `{}`", &row[cm])))?;
        let point = (log2(&m), row[cp].parse::<f64>()?, row[cs].parse::<f64>()?);
        match series.iter_mut().find(|s| s.delta == delta) {
            Some(s) => s.points.push(point),
            None => series.push(Series {
                delta,
                points: vec![point],
            }),
        }
    }
    if series.is_empty() {
        return Err(Failure::Usage("no rows to plot".into()));
    }
    Ok(series)
}

pub fn render(args: &PlotArgs) -> Result<String, Failure> {
    let series = read(args)?;
    let (w, h) = (args.width as f64, args.height as f64);
    let (left, right, top, bottom) = (60.0, 150.0, 20.0, 45.0);
    let (pw, ph) = (w - left - right, h - top - bottom);
    let xs = series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
    let (mut x0, mut x1) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if x1 - x0 < 1e-9 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + (1.0 - y.clamp(0.0, 1.0)) * ph;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#
    )?;
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#)?;
    writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    )?;
    for i in 0..=4 {
        let y = i as f64 / 4.0;
        writeln!(
            s,
            r##"<line x1="{left}" x2="{}" y1="{py:.1}" y2="{py:.1}" stroke="#ddd"/><text x="{}" y="{:.1}" text-anchor="end">{y}</text>"##,
            left + pw,
            left - 6.0,
            sy(y) + 4.0,
            py = sy(y)
        )?;
    }
    for i in 0..=5 {
        let x = x0 + (x1 - x0) * i as f64 / 5.0;
        writeln!(
            s,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{x:.1}</text>"#,
            sx(x),
            top + ph + 16.0
        )?;
    }
    writeln!(
        s,
        r#"<text x="{:.1}" y="{}" text-anchor="middle">log2 m</text>"#,
        left + pw / 2.0,
        h - 8.0
    )?;
    for (i, ser) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        for (dash, pick) in [("", 1usize), (r#" stroke-dasharray="5,3""#, 2)] {
            let pts: Vec<String> = ser
                .points
                .iter()
                .map(|p| {
                    let y = if pick == 1 { p.1 } else { p.2 };
                    format!("{:.2},{:.2}", sx(p.0), sy(y))
                })
                .collect();
            writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"/>"#,
                pts.join(" ")
            )?;
        }
        let ly = top + 14.0 * (i as f64 + 1.0);
        writeln!(
            s,
            r#"<line x1="{}" x2="{}" y1="{ly}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">delta={}</text>"#,
            left + pw + 10.0,
            left + pw + 30.0,
            left + pw + 35.0,
            ly + 4.0,
            ser.delta
        )?;
    }
    let ly = top + 14.0 * (series.len() as f64 + 2.0);
    writeln!(
        s,
        r#"<text x="{}" y="{ly}">solid: phi_hat</text><text x="{}" y="{}">dashed: phi_star_hat</text>"#,
        left + pw + 10.0,
        left + pw + 10.0,
        ly + 14.0
    )?;
    s.push_str("</svg>\n");
    Ok(s)
}
