//! Line charts written as plain SVG. Output depends only on the manifest rows.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::config::Study;
use crate::manifest::ResultManifest;
use crate::studies::Table;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlotError(pub String);

impl std::fmt::Display for PlotError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for PlotError {}

type Series = Vec<(String, Vec<(f64, f64)>)>;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in vals {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = if hi > lo { 0.06 * (hi - lo) } else { 0.5 * lo.abs().max(1.0) };
    (lo - pad, hi + pad)
}

/// A line chart with markers and a legend on the right.
pub fn line_chart(title: &str, xlabel: &str, ylabel: &str, series: &Series) -> String {
    let pts = || series.iter().flat_map(|(_, p)| p.iter().copied());
    let (x0, x1) = range(pts().map(|p| p.0));
    let (y0, y1) = range(pts().map(|p| p.1));
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#, LEFT + pw / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let (px, py) = (sx(fx), sy(fy));
        let _ = writeln!(
            s,
            r##"<line x1="{px:.1}" y1="{:.1}" x2="{px:.1}" y2="{:.1}" stroke="#ccc"/><text x="{px:.1}" y="{:.1}" text-anchor="middle">{}</text>"##,
            TOP,
            TOP + ph,
            TOP + ph + 16.0,
            tick_label(fx)
        );
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{py:.1}" x2="{:.1}" y2="{py:.1}" stroke="#ccc"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"##,
            LEFT + pw,
            LEFT - 6.0,
            py + 4.0,
            tick_label(fy)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        H - 12.0,
        escape(xlabel)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(ylabel)
    );
    for (i, (name, p)) in series.iter().enumerate() {
        let c = COLORS[i % COLORS.len()];
        let path: Vec<String> = p.iter().map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="2"/>"#, path.join(" "));
        for &(x, y) in p {
            let _ = writeln!(s, r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{c}"/>"#, sx(x), sy(y));
        }
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = LEFT + pw + 14.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{c}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn column(t: &Table, name: &str) -> Result<usize, PlotError> {
    t.column(name)
        .ok_or_else(|| PlotError(format!("study {}: manifest lacks column {name}", t.study)))
}

/// Group `(x, y)` pairs by α in first-appearance order, skipping rows with
/// missing values.
fn by_alpha(t: &Table, x: Option<usize>, y: usize) -> Result<Series, PlotError> {
    let a = column(t, "alpha")?;
    let mut order: Vec<String> = Vec::new();
    let mut groups: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for r in &t.rows {
        if r.values[a].as_f64().is_none() {
            continue;
        }
        let key = format!("α = {}", r.values[a].to_cell());
        let g = groups.entry(key.clone()).or_default();
        if !order.contains(&key) {
            order.push(key.clone());
        }
        let xv = match x {
            Some(x) => r.values[x].as_f64(),
            None => Some(g.len() as f64),
        };
        if let (Some(xv), Some(yv)) = (xv, r.values[y].as_f64()) {
            g.push((xv, yv));
        }
    }
    Ok(order
        .into_iter()
        .map(|k| {
            let v = groups.remove(&k).unwrap_or_default();
            (k, v)
        })
        .collect())
}

/// Plot files for a manifest as `(file name, SVG text)`; studies without a
/// figure yield nothing.
pub fn render_plots(m: &ResultManifest) -> Result<Vec<(String, String)>, PlotError> {
    let t = m.table();
    if t.rows.is_empty() {
        return Err(PlotError(format!("study {}: manifest has no rows", t.study)));
    }
    match t.study {
        Study::Convergence => {
            let eps = column(&t, "eps")?;
            let shifted = by_alpha(&t, Some(eps), column(&t, "shifted")?)?;
            let overlap = by_alpha(&t, Some(eps), column(&t, "overlap")?)?;
            Ok(vec![
                (
                    "shifted.svg".into(),
                    line_chart("Relative ground energy minus 1/ε", "ε", "λ_rel − 1/ε", &shifted),
                ),
                ("overlap.svg".into(), line_chart("Overlap with the limit profile", "ε", "overlap", &overlap)),
            ])
        }
        Study::Hardy => {
            let value = column(&t, "value")?;
            let series = by_alpha(&t, None, value)?;
            Ok(vec![(
                "hardy.svg".into(),
                line_chart("Hardy quotient under refinement", "refinement step", "quotient", &series),
            )])
        }
        _ => Ok(Vec::new()),
    }
}
