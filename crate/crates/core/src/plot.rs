//! Standalone SVG line and scatter plots on a fixed 800x600 canvas.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("empty-plot: nothing to draw")]
    Empty,
    #[error("non-finite: {0}")]
    NonFinite(String),
    #[error("length-mismatch: {0}")]
    LengthMismatch(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 600.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

pub fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl Series {
    pub fn new(name: impl Into<String>, xs: Vec<f64>, ys: Vec<f64>) -> Self {
        Series { name: name.into(), xs, ys }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn check_finite<'a>(what: &str, vals: impl IntoIterator<Item = &'a f64>) -> Result<(), PlotError> {
    match vals.into_iter().position(|v| !v.is_finite()) {
        Some(i) => Err(PlotError::NonFinite(format!("{what} value {i}"))),
        None => Ok(()),
    }
}

/// Data range padded so that a constant range still has width.
fn span(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    if hi - lo < 1e-12 {
        let pad = if lo.abs() > 1e-12 { lo.abs() * 0.1 } else { 1.0 };
        (lo - pad, hi + pad)
    } else {
        (lo, hi)
    }
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }

    fn open(&self, out: &mut String, title: &str, xlabel: &str, ylabel: &str) {
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(out, r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="16">{}</text>"#, WIDTH / 2.0, escape(title));
        let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
        let _ = writeln!(
            out,
            r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
            x1 - x0,
            y1 - y0
        );
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let xv = self.x.0 + f * (self.x.1 - self.x.0);
            let yv = self.y.0 + f * (self.y.1 - self.y.0);
            let (px, py) = (self.px(xv), self.py(yv));
            let _ = writeln!(out, r#"<line x1="{px:.2}" y1="{y1:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#, y1 + 5.0);
            let _ = writeln!(out, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, y1 + 20.0, tick(xv));
            let _ = writeln!(out, r#"<line x1="{:.2}" y1="{py:.2}" x2="{x0:.2}" y2="{py:.2}" stroke="black"/>"#, x0 - 5.0);
            let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 8.0, py + 4.0, tick(yv));
        }
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, HEIGHT - 15.0, escape(xlabel));
        let _ = writeln!(
            out,
            r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            escape(ylabel)
        );
    }
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".to_string() } else { s.to_string() }
}

fn legend(out: &mut String, entries: &[(String, &str)]) {
    for (row, (name, fill)) in entries.iter().enumerate() {
        let y = TOP + 10.0 + 20.0 * row as f64;
        let x = WIDTH - RIGHT + 15.0;
        let _ = writeln!(out, r#"<g class="legend">"#);
        let _ = writeln!(out, r#"<rect x="{x:.2}" y="{:.2}" width="12" height="12" fill="{fill}"/>"#, y - 10.0);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{y:.2}">{}</text>"#, x + 18.0, escape(name));
        let _ = writeln!(out, "</g>");
    }
}

/// One polyline per series, with a legend.
pub fn line_plot(series: &[Series], title: &str, xlabel: &str, ylabel: &str) -> Result<String, PlotError> {
    if series.is_empty() || series.iter().all(|s| s.xs.is_empty()) {
        return Err(PlotError::Empty);
    }
    for s in series {
        if s.xs.len() != s.ys.len() {
            return Err(PlotError::LengthMismatch(format!("series {}: {} x vs {} y", s.name, s.xs.len(), s.ys.len())));
        }
        check_finite(&s.name, s.xs.iter().chain(&s.ys))?;
    }
    let frame = Frame {
        x: span(series.iter().flat_map(|s| s.xs.iter().copied())),
        y: span(series.iter().flat_map(|s| s.ys.iter().copied())),
    };
    let mut out = String::new();
    frame.open(&mut out, title, xlabel, ylabel);
    for (i, s) in series.iter().enumerate() {
        let pts: Vec<String> = s.xs.iter().zip(&s.ys).map(|(x, y)| format!("{:.2},{:.2}", frame.px(*x), frame.py(*y))).collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{}" stroke-width="2" points="{}"/>"#, color(i), pts.join(" "));
    }
    let entries: Vec<(String, &str)> = series.iter().enumerate().map(|(i, s)| (s.name.clone(), color(i))).collect();
    legend(&mut out, &entries);
    out.push_str("</svg>\n");
    Ok(out)
}

/// 2-D scatter colored by integer label; the legend lists labels in
/// increasing order.
pub fn scatter_plot(xs: &[f64], ys: &[f64], labels: &[usize], title: &str) -> Result<String, PlotError> {
    if xs.is_empty() {
        return Err(PlotError::Empty);
    }
    if xs.len() != ys.len() || xs.len() != labels.len() {
        return Err(PlotError::LengthMismatch(format!("{} x, {} y, {} labels", xs.len(), ys.len(), labels.len())));
    }
    check_finite("scatter", xs.iter().chain(ys))?;
    let frame = Frame { x: span(xs.iter().copied()), y: span(ys.iter().copied()) };
    let mut out = String::new();
    frame.open(&mut out, title, "x", "y");
    for ((x, y), l) in xs.iter().zip(ys).zip(labels) {
        let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="{}"/>"#, frame.px(*x), frame.py(*y), color(*l));
    }
    let mut distinct: Vec<usize> = labels.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let entries: Vec<(String, &str)> = distinct.iter().map(|l| (format!("cluster {l}"), color(*l))).collect();
    legend(&mut out, &entries);
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn write_svg<P: AsRef<Path>>(path: P, svg: &str) -> Result<(), PlotError> {
    Ok(std::fs::write(path, svg)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn polylines(svg: &str) -> Vec<Vec<(f64, f64)>> {
        svg.lines()
            .filter(|l| l.starts_with("<polyline"))
            .map(|l| {
                let pts = l.split("points=\"").nth(1).unwrap().trim_end_matches("\"/>");
                pts.split(' ')
                    .map(|p| {
                        let (x, y) = p.split_once(',').unwrap();
                        (x.parse().unwrap(), y.parse().unwrap())
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn constant_series_is_horizontal() {
        let svg = line_plot(&[Series::new("c", vec![0.0, 1.0, 2.0], vec![3.0; 3])], "t", "x", "y").unwrap();
        let lines = polylines(&svg);
        assert_eq!(lines.len(), 1);
        assert!(lines[0].iter().all(|p| p.1 == lines[0][0].1));
        assert!(svg.contains(r#"viewBox="0 0 800 600""#));
        roxmltree::Document::parse(&svg).unwrap();
    }

    #[test]
    fn three_curves_with_legend() {
        let s: Vec<Series> = ["a", "b", "c"]
            .iter()
            .enumerate()
            .map(|(i, n)| Series::new(*n, vec![0.0, 1.0], vec![0.0, i as f64]))
            .collect();
        let svg = line_plot(&s, "VGT <probes>", "ln r", "ln N").unwrap();
        let doc = roxmltree::Document::parse(&svg).unwrap();
        assert_eq!(doc.descendants().filter(|n| n.has_tag_name("polyline")).count(), 3);
        assert_eq!(doc.descendants().filter(|n| n.attribute("class") == Some("legend")).count(), 3);
        assert_eq!(svg, line_plot(&s, "VGT <probes>", "ln r", "ln N").unwrap());
    }

    #[test]
    fn scatter_and_errors() {
        let svg = scatter_plot(&[0.0, 1.0, 2.0], &[1.0, 0.0, 1.0], &[0, 2, 2], "clusters").unwrap();
        let doc = roxmltree::Document::parse(&svg).unwrap();
        assert_eq!(doc.descendants().filter(|n| n.has_tag_name("circle")).count(), 3);
        assert!(matches!(line_plot(&[], "", "", ""), Err(PlotError::Empty)));
        assert!(matches!(scatter_plot(&[], &[], &[], ""), Err(PlotError::Empty)));
        let bad = Series::new("n", vec![0.0], vec![f64::NAN]);
        assert!(matches!(line_plot(&[bad], "", "", ""), Err(PlotError::NonFinite(_))));
    }
}
