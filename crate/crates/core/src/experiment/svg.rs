//! Minimal deterministic SVG charts.

use std::fmt::Write;

use super::output::Provenance;

const W: f64 = 480.0;
const H: f64 = 320.0;
const MARGIN: f64 = 48.0;

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let range = |it: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = it.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
            if !lo.is_finite() {
                (0.0, 1.0)
            } else if lo == hi {
                (lo - 0.5, hi + 0.5)
            } else {
                (lo, hi)
            }
        };
        Self {
            x: range(&mut xs.clone()),
            y: range(&mut ys.clone()),
        }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (W - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        H - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (H - 2.0 * MARGIN)
    }
}

fn open(provenance: &Provenance, title: &str, xlabel: &str, ylabel: &str, frame: &Frame) -> String {
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#).unwrap();
    for line in provenance.lines() {
        writeln!(s, "<!-- {} -->", line.replace("--", "- -")).unwrap();
    }
    writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="20" font-size="14" text-anchor="middle">{}</text>"#, W / 2.0, escape(title)).unwrap();
    let (x0, x1, y0, y1) = (MARGIN, W - MARGIN, MARGIN, H - MARGIN);
    writeln!(s, r#"<path d="M{x0} {y0} L{x0} {y1} L{x1} {y1}" stroke="black" fill="none"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"#, W / 2.0, H - 10.0, escape(xlabel)).unwrap();
    writeln!(s, r#"<text x="14" y="{}" font-size="12" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#, H / 2.0, H / 2.0, escape(ylabel)).unwrap();
    for (v, px, py, anchor) in [
        (frame.x.0, x0, y1 + 14.0, "start"),
        (frame.x.1, x1, y1 + 14.0, "end"),
    ] {
        writeln!(s, r#"<text x="{px:.2}" y="{py:.2}" font-size="10" text-anchor="{anchor}">{}</text>"#, tick(v)).unwrap();
    }
    for (v, py) in [(frame.y.0, y1), (frame.y.1, y0 + 8.0)] {
        writeln!(s, r#"<text x="{:.2}" y="{py:.2}" font-size="10" text-anchor="end">{}</text>"#, x0 - 4.0, tick(v)).unwrap();
    }
    s
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub(crate) fn histogram(provenance: &Provenance, title: &str, xlabel: &str, edges: &[f64], counts: &[usize]) -> String {
    let frame = Frame::new(edges.iter().copied(), [0.0].into_iter().chain(counts.iter().map(|&c| c as f64)));
    let mut s = open(provenance, title, xlabel, "count", &frame);
    for (i, &c) in counts.iter().enumerate() {
        let (x0, x1) = (frame.px(edges[i]), frame.px(edges[i + 1]));
        let (y0, y1) = (frame.py(c as f64), frame.py(0.0));
        writeln!(s, r##"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="#4477aa"/>"##, (x1 - x0).max(0.5), y1 - y0).unwrap();
    }
    s.push_str("</svg>\n");
    s
}

pub(crate) fn scatter(provenance: &Provenance, title: &str, xlabel: &str, ylabel: &str, xs: &[f64], ys: &[f64]) -> String {
    let frame = Frame::new(xs.iter().copied(), ys.iter().copied());
    let mut s = open(provenance, title, xlabel, ylabel, &frame);
    for (&x, &y) in xs.iter().zip(ys) {
        writeln!(s, r##"<circle cx="{:.2}" cy="{:.2}" r="2" fill="#4477aa" fill-opacity="0.5"/>"##, frame.px(x), frame.py(y)).unwrap();
    }
    s.push_str("</svg>\n");
    s
}

/// One polyline per named series over shared `x` values.
pub(crate) fn lines(provenance: &Provenance, title: &str, xlabel: &str, ylabel: &str, x: &[f64], series: &[(&str, Vec<f64>)]) -> String {
    const COLORS: [&str; 4] = ["#4477aa", "#ee6677", "#228833", "#ccbb44"];
    let frame = Frame::new(x.iter().copied(), series.iter().flat_map(|(_, v)| v.iter().copied()).collect::<Vec<_>>().into_iter());
    let mut s = open(provenance, title, xlabel, ylabel, &frame);
    for (k, (name, ys)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = x
            .iter()
            .zip(ys)
            .filter(|(_, y)| y.is_finite())
            .map(|(&a, &b)| format!("{:.2},{:.2}", frame.px(a), frame.py(b)))
            .collect();
        writeln!(s, r#"<polyline points="{}" stroke="{color}" fill="none" stroke-width="2"/>"#, pts.join(" ")).unwrap();
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="11" fill="{color}">{}</text>"#, W - MARGIN - 90.0, MARGIN + 14.0 * (k as f64 + 1.0), escape(name)).unwrap();
    }
    s.push_str("</svg>\n");
    s
}
