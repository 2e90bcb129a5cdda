//! Deterministic SVG line plots: fixed canvas, fixed tick rules, fixed
//! number formatting, so identical data gives identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};

use crate::output::Table;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axes {
    Linear,
    LogLog,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// Parses a CSV file whose fields are all numeric.
pub fn read_table(path: &Path) -> Result<Table> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_table(&text)
}

pub fn parse_table(text: &str) -> Result<Table> {
    if text.trim().is_empty() {
        bail!("empty CSV input");
    }
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers()?.iter().map(|s| s.trim().to_string()).collect();
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.with_context(|| format!("malformed CSV at data row {}", i + 1))?;
        let row = rec
            .iter()
            .map(|f| f.trim().parse::<f64>().with_context(|| format!("non-numeric field {f:?} at data row {}", i + 1)))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        bail!("CSV has a header but no data rows");
    }
    Ok(Table { header, rows })
}

/// Pulls `(x, y)` series out of a table by column name.
pub fn series(table: &Table, x: &str, ys: &[String]) -> Result<Vec<Series>> {
    let col = |name: &str| {
        table.header.iter().position(|h| h == name).with_context(|| format!("no column {name:?} (have {:?})", table.header))
    };
    let xi = col(x)?;
    ys.iter()
        .map(|y| {
            let yi = col(y)?;
            Ok(Series { name: y.clone(), points: table.rows.iter().map(|r| (r[xi], r[yi])).collect() })
        })
        .collect()
}

/// Least-squares slope of the first series in plotted coordinates.
pub fn slope(s: &Series, axes: Axes) -> Option<f64> {
    let pts: Vec<(f64, f64)> = s.points.iter().filter_map(|&p| map_point(p, axes)).collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / m, sy / m);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for p in &pts {
        sxx += (p.0 - mx) * (p.0 - mx);
        sxy += (p.0 - mx) * (p.1 - my);
    }
    (sxx > 0.0).then(|| sxy / sxx)
}

fn map_point((x, y): (f64, f64), axes: Axes) -> Option<(f64, f64)> {
    let p = match axes {
        Axes::Linear => (x, y),
        Axes::LogLog if x > 0.0 && y > 0.0 => (x.log10(), y.log10()),
        Axes::LogLog => return None,
    };
    (p.0.is_finite() && p.1.is_finite()).then_some(p)
}

/// Tick positions (in plotted coordinates) with their labels, all inside
/// `[lo, hi]`. Log axes use whole decades when at least two fit, and fall
/// back to round steps of the exponent otherwise.
fn ticks(lo: f64, hi: f64, axes: Axes) -> Vec<(f64, String)> {
    if axes == Axes::LogLog {
        let (a, b) = (lo.ceil() as i64, hi.floor() as i64);
        if b > a {
            let step = ((b - a) / 8).max(1);
            return (a..=b).filter(|k| (k - a) % step == 0).map(|k| (k as f64, format!("1e{k}"))).collect();
        }
    }
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = mag * if norm < 1.5 { 1.0 } else if norm < 3.5 { 2.0 } else if norm < 7.5 { 5.0 } else { 10.0 };
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last)
        .map(|i| {
            let v = i as f64 * step;
            let v = if v == 0.0 { 0.0 } else { v };
            let label = match axes {
                Axes::Linear => format!("{v:.decimals$}"),
                Axes::LogLog => format!("1e{v:.decimals$}"),
            };
            (v, label)
        })
        .collect()
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        let pad = 0.02 * (hi - lo);
        (lo - pad, hi + pad)
    } else {
        let w = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
        (lo - w, hi + w)
    }
}

pub fn render(title: &str, x_label: &str, series: &[Series], axes: Axes, annotate_slope: bool) -> Result<String> {
    let mapped: Vec<Vec<(f64, f64)>> =
        series.iter().map(|s| s.points.iter().filter_map(|&p| map_point(p, axes)).collect()).collect();
    let all: Vec<&(f64, f64)> = mapped.iter().flatten().collect();
    if all.is_empty() {
        bail!("nothing to plot: no finite points{}", if axes == Axes::LogLog { " with positive coordinates" } else { "" });
    }
    let fold = |f: fn(&(f64, f64)) -> f64| {
        all.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(f(p)), b.max(f(p))))
    };
    let (x0, x1) = padded(fold(|p| p.0).0, fold(|p| p.0).1);
    let (y0, y1) = padded(fold(|p| p.1).0, fold(|p| p.1).1);
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#)?;
    writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#)?;
    writeln!(s, r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title))?;
    writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#)?;
    for (v, label) in ticks(x0, x1, axes) {
        let x = sx(v);
        writeln!(s, r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#dddddd"/>"##, TOP + ph)?;
        writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#, TOP + ph + 18.0)?;
    }
    for (v, label) in ticks(y0, y1, axes) {
        let y = sy(v);
        writeln!(s, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##, LEFT + pw)?;
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#, LEFT - 6.0, y + 4.0)?;
    }
    writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, HEIGHT - 14.0, escape(x_label))?;
    for (i, (ser, pts)) in series.iter().zip(&mapped).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" "))?;
        let ly = TOP + 16.0 + 16.0 * i as f64;
        writeln!(s, r#"<text x="{:.2}" y="{ly:.2}" text-anchor="end" fill="{color}">{}</text>"#, LEFT + pw - 8.0, escape(&ser.name))?;
    }
    if annotate_slope {
        if let Some(m) = series.first().and_then(|f| slope(f, axes)) {
            writeln!(s, r#"<text x="{:.2}" y="{:.2}">fitted slope {m:.4}</text>"#, LEFT + 8.0, TOP + ph - 8.0)?;
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(k: f64) -> Series {
        Series { name: "y".into(), points: (1..=20).map(|i| (i as f64, (i as f64).powf(k))).collect() }
    }

    #[test]
    fn rendering_is_deterministic() {
        let a = render("t", "x", &[line(-0.5)], Axes::LogLog, true).unwrap();
        let b = render("t", "x", &[line(-0.5)], Axes::LogLog, true).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("fitted slope -0.5000"));
    }

    #[test]
    fn empty_and_malformed_inputs_are_errors() {
        assert!(parse_table("").is_err());
        assert!(parse_table("x,y\n").is_err());
        assert!(parse_table("x,y\n1,abc\n").is_err());
        assert!(parse_table("x,y\n1,2,3\n").is_err());
        let t = parse_table("x,y\n1,2\n3,4\n").unwrap();
        assert_eq!(t.rows, vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
    }

    #[test]
    fn linear_ticks_are_round() {
        let t = ticks(0.0, 1.0, Axes::Linear);
        let labels: Vec<&str> = t.iter().map(|x| x.1.as_str()).collect();
        assert_eq!(labels, ["0.0", "0.2", "0.4", "0.6", "0.8", "1.0"]);
        let t = ticks(-2.3, 1.1, Axes::LogLog);
        let labels: Vec<&str> = t.iter().map(|x| x.1.as_str()).collect();
        assert_eq!(labels, ["1e-2", "1e-1", "1e0", "1e1"]);
        let t = ticks(0.1, 0.9, Axes::LogLog);
        assert!(t.len() >= 3 && t.iter().all(|x| x.0 >= 0.1 && x.0 <= 0.9));
    }
}
