//! Minimal hand-written SVG line plots and heatmaps.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

pub struct Labels<'a> {
    pub title: &'a str,
    pub x: &'a str,
    pub y: &'a str,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn open(labels: &Labels, timestamp: Option<&str>) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    if let Some(ts) = timestamp {
        let _ = writeln!(s, "<!-- generated {ts} -->");
    }
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(labels.title));
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        LEFT + (W - LEFT - RIGHT) / 2.0,
        H - 15.0,
        escape(labels.x)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        TOP + (H - TOP - BOTTOM) / 2.0,
        TOP + (H - TOP - BOTTOM) / 2.0,
        escape(labels.y)
    );
    s
}

struct Scale {
    lo: f64,
    hi: f64,
    log: bool,
    a: f64,
    b: f64,
}

impl Scale {
    fn new(lo: f64, hi: f64, log: bool, a: f64, b: f64) -> Self {
        let (lo, hi) = if log { (lo.log10(), hi.log10()) } else { (lo, hi) };
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        Self { lo, hi, log, a, b }
    }

    fn map(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        self.a + (v - self.lo) / (self.hi - self.lo) * (self.b - self.a)
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        (0..=4)
            .map(|k| {
                let t = self.lo + (self.hi - self.lo) * k as f64 / 4.0;
                let v = if self.log { 10f64.powf(t) } else { t };
                (self.a + (self.b - self.a) * k as f64 / 4.0, format!("{v:.3e}"))
            })
            .collect()
    }
}

fn axes(s: &mut String, xs: &Scale, ys: &Scale) {
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, H - BOTTOM, TOP);
    let _ = writeln!(s, r#"<rect x="{x0}" y="{y1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#, x1 - x0, y0 - y1);
    for (px, label) in xs.ticks() {
        let _ = writeln!(s, r#"<line x1="{px:.1}" y1="{y0}" x2="{px:.1}" y2="{:.1}" stroke="black"/>"#, y0 + 5.0);
        let _ = writeln!(s, r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle" font-size="10">{label}</text>"#, y0 + 18.0);
    }
    for (py, label) in ys.ticks() {
        let _ = writeln!(s, r#"<line x1="{:.1}" y1="{py:.1}" x2="{x0}" y2="{py:.1}" stroke="black"/>"#, x0 - 5.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="10">{label}</text>"#, x0 - 7.0, py + 3.0);
    }
}

fn extent(vals: impl Iterator<Item = f64>, log: bool) -> (f64, f64) {
    vals.filter(|v| v.is_finite() && (!log || *v > 0.0))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
}

pub fn line_plot(labels: &Labels, series: &[Series], log_x: bool, timestamp: Option<&str>) -> String {
    let mut s = open(labels, timestamp);
    let (xl, xh) = extent(series.iter().flat_map(|c| c.points.iter().map(|p| p.0)), log_x);
    let (yl, yh) = extent(series.iter().flat_map(|c| c.points.iter().map(|p| p.1)), false);
    let (xl, xh) = if xl.is_finite() { (xl, xh) } else { (0.0, 1.0) };
    let (yl, yh) = if yl.is_finite() { (yl, yh) } else { (0.0, 1.0) };
    let xs = Scale::new(xl, xh, log_x, LEFT, W - RIGHT);
    let ys = Scale::new(yl, yh, false, H - BOTTOM, TOP);
    axes(&mut s, &xs, &ys);
    for (k, c) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = c
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite() && (!log_x || *x > 0.0))
            .map(|(x, y)| format!("{:.2},{:.2}", xs.map(*x), ys.map(*y)))
            .collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        let ly = TOP + 15.0 + 16.0 * k as f64;
        let lx = W - RIGHT + 10.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{:.1}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 18.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" font-size="10">{}</text>"#, lx + 22.0, ly + 3.0, escape(&c.label));
    }
    s.push_str("</svg>\n");
    s
}

/// Grey-to-blue ramp over [0, 1]; NaN cells are drawn red.
fn color(t: f64) -> String {
    if !t.is_finite() {
        return "#ff0000".into();
    }
    let t = t.clamp(0.0, 1.0);
    let r = (240.0 * (1.0 - t) + 8.0 * t).round() as u8;
    let g = (240.0 * (1.0 - t) + 48.0 * t).round() as u8;
    let b = (240.0 * (1.0 - t) + 107.0 * t).round() as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Heatmap of row-major `values` (x fastest) on log-scaled axes.
pub fn heatmap(labels: &Labels, xs: &[f64], ys: &[f64], values: &[f64], log_axes: bool, timestamp: Option<&str>) -> String {
    let mut s = open(labels, timestamp);
    let sx = Scale::new(xs[0], xs[xs.len() - 1], log_axes, LEFT, W - RIGHT);
    let sy = Scale::new(ys[0], ys[ys.len() - 1], log_axes, H - BOTTOM, TOP);
    let (vl, vh) = extent(values.iter().copied(), false);
    let span = if vh > vl { vh - vl } else { 1.0 };
    let cell = |v: &[f64], i: usize, s: &Scale| -> (f64, f64) {
        let c = s.map(v[i]);
        let prev = if i > 0 { s.map(v[i - 1]) } else { 2.0 * c - s.map(v[(i + 1).min(v.len() - 1)]) };
        let next = if i + 1 < v.len() { s.map(v[i + 1]) } else { 2.0 * c - prev };
        ((prev + c) / 2.0, (c + next) / 2.0)
    };
    for iy in 0..ys.len() {
        let (ya, yb) = cell(ys, iy, &sy);
        for ix in 0..xs.len() {
            let (xa, xb) = cell(xs, ix, &sx);
            let v = values[iy * xs.len() + ix];
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                xa.min(xb),
                ya.min(yb),
                (xb - xa).abs(),
                (yb - ya).abs(),
                color((v - vl) / span)
            );
        }
    }
    axes(&mut s, &sx, &sy);
    let lx = W - RIGHT + 20.0;
    for k in 0..=10 {
        let t = k as f64 / 10.0;
        let y = H - BOTTOM - t * (H - TOP - BOTTOM);
        let _ = writeln!(s, r#"<rect x="{lx}" y="{:.1}" width="16" height="{:.1}" fill="{}"/>"#, y - (H - TOP - BOTTOM) / 10.0, (H - TOP - BOTTOM) / 10.0, color(t));
        if k % 5 == 0 {
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" font-size="10">{:.3}</text>"#, lx + 20.0, y + 3.0, vl + t * span);
        }
    }
    s.push_str("</svg>\n");
    s
}
