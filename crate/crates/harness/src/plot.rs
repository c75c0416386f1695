//! Log-scale SVG line plots of sweep CSVs.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::Path;

use crate::csv_io::write_file;
use crate::error::{io_err, HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    GapVsT,
    GapVsEta,
}

impl std::str::FromStr for PlotKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gap-vs-T" | "gap-vs-t" => Ok(PlotKind::GapVsT),
            "gap-vs-eta" => Ok(PlotKind::GapVsEta),
            _ => Err(HarnessError::Schema(format!("unknown plot kind `{s}`"))),
        }
    }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const FLOOR: f64 = 1e-16;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

#[derive(Default)]
struct Series {
    gap: Vec<(f64, f64)>,
    bound: Vec<(f64, f64)>,
}

fn schema(msg: impl Into<String>) -> HarnessError {
    HarnessError::Schema(msg.into())
}

fn read_series(csv_text: &str, kind: PlotKind) -> Result<BTreeMap<String, Series>> {
    let body: String = csv_text.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n");
    if body.trim().is_empty() {
        return Err(schema("empty CSV"));
    }
    let mut rd = csv::ReaderBuilder::new().from_reader(body.as_bytes());
    let header = rd.headers()?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| schema(format!("missing column `{name}`")))
    };
    let x_col = col(match kind {
        PlotKind::GapVsT => "iterations",
        PlotKind::GapVsEta => "eta",
    })?;
    let (gap_col, transfer_col) = (col("final_gap")?, col("transfer")?);
    let bound_col = header.iter().position(|h| h == "bound");
    let num = |s: &str, what: &str| -> Result<f64> {
        s.parse().map_err(|_| schema(format!("column {what}: `{s}` is not a number")))
    };
    let mut out: BTreeMap<String, Series> = BTreeMap::new();
    for rec in rd.records() {
        let rec = rec?;
        let x = num(rec.get(x_col).unwrap_or(""), "x")?;
        let gap = num(rec.get(gap_col).unwrap_or(""), "final_gap")?;
        let s = out.entry(rec.get(transfer_col).unwrap_or("").to_string()).or_default();
        s.gap.push((x, gap));
        if let Some(b) = bound_col.and_then(|c| rec.get(c)).filter(|b| !b.is_empty()) {
            s.bound.push((x, num(b, "bound")?));
        }
    }
    if out.is_empty() {
        return Err(schema("CSV has no data rows"));
    }
    for s in out.values_mut() {
        s.gap.sort_by(|a, b| a.0.total_cmp(&b.0));
        s.bound.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    Ok(out)
}

struct Scale {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Scale {
    fn new(values: impl Iterator<Item = f64> + Clone, force_log: bool) -> Self {
        let log = force_log || values.clone().all(|v| v > 0.0);
        let t = |v: f64| if log { v.max(FLOOR).log10() } else { v };
        let lo = values.clone().map(t).fold(f64::INFINITY, f64::min);
        let hi = values.map(t).fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = if hi - lo < 1e-12 { (lo - 0.5, hi + 0.5) } else { (lo, hi) };
        Scale { lo, hi, log }
    }

    fn unit(&self, v: f64) -> f64 {
        let v = if self.log { v.max(FLOOR).log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn label(&self, u: f64) -> String {
        let v = self.lo + u * (self.hi - self.lo);
        if self.log { format!("1e{v:.1}") } else { format!("{v:.3}") }
    }
}

fn polyline(points: &[(f64, f64)], xs: &Scale, ys: &Scale, attrs: &str) -> String {
    let pts: Vec<String> = points
        .iter()
        .map(|&(x, y)| {
            let px = MARGIN + xs.unit(x) * (WIDTH - 2.0 * MARGIN);
            let py = HEIGHT - MARGIN - ys.unit(y) * (HEIGHT - 2.0 * MARGIN);
            format!("{px:.2},{py:.2}")
        })
        .collect();
    format!("<polyline {attrs} fill=\"none\" points=\"{}\"/>\n", pts.join(" "))
}

/// Renders the SVG: one solid series per transfer mode, bounds dashed.
pub fn render(csv_text: &str, kind: PlotKind) -> Result<String> {
    let series = read_series(csv_text, kind)?;
    let all = || series.values().flat_map(|s| s.gap.iter().chain(&s.bound));
    let xs = Scale::new(all().map(|p| p.0), false);
    let ys = Scale::new(all().map(|p| p.1), true);
    let (xlabel, title) = match kind {
        PlotKind::GapVsT => ("T", "final gap vs iterations"),
        PlotKind::GapVsEta => ("eta", "final gap vs oracle accuracy"),
    };
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(svg, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let _ = writeln!(svg, "<text x=\"{}\" y=\"24\" text-anchor=\"middle\">{title}</text>", WIDTH / 2.0);
    let (x0, y0, x1, y1) = (MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN, MARGIN);
    let _ = writeln!(svg, "<line class=\"axis\" x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>");
    let _ = writeln!(svg, "<line class=\"axis\" x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>");
    for i in 0..=4 {
        let u = i as f64 / 4.0;
        let px = x0 + u * (x1 - x0);
        let py = y0 - u * (y0 - y1);
        let _ = writeln!(svg, "<text class=\"tick\" x=\"{px:.1}\" y=\"{:.1}\" font-size=\"10\" text-anchor=\"middle\">{}</text>", y0 + 14.0, xs.label(u));
        let _ = writeln!(svg, "<text class=\"tick\" x=\"{:.1}\" y=\"{py:.1}\" font-size=\"10\" text-anchor=\"end\">{}</text>", x0 - 4.0, ys.label(u));
    }
    let _ = writeln!(svg, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{xlabel}</text>", WIDTH / 2.0, HEIGHT - 16.0);
    let _ = writeln!(svg, "<text x=\"16\" y=\"{}\" transform=\"rotate(-90 16 {})\" text-anchor=\"middle\">gap</text>", HEIGHT / 2.0, HEIGHT / 2.0);
    for (i, (name, s)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        svg.push_str(&polyline(
            &s.gap,
            &xs,
            &ys,
            &format!("class=\"series\" data-transfer=\"{name}\" stroke=\"{color}\" stroke-width=\"2\""),
        ));
        if !s.bound.is_empty() {
            svg.push_str(&polyline(
                &s.bound,
                &xs,
                &ys,
                &format!("class=\"bound\" data-transfer=\"{name}\" stroke=\"{color}\" stroke-dasharray=\"6 4\""),
            ));
        }
        let ly = MARGIN + 16.0 * i as f64;
        let _ = writeln!(svg, "<text class=\"legend\" x=\"{}\" y=\"{ly:.1}\" fill=\"{color}\" font-size=\"12\">{name}</text>", x1 - 90.0);
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn emit_plot(csv_path: &Path, kind: PlotKind, out: &Path) -> Result<()> {
    let text = std::fs::read_to_string(csv_path).map_err(io_err(csv_path))?;
    write_file(out, &render(&text, kind)?)
}
