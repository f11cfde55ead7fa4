//! Minimal SVG charts.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 56.0;
const COLORS: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (W - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        H - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (H - 2.0 * MARGIN)
    }

    fn axes(&self, out: &mut String, title: &str, xlabel: &str, ylabel: &str) {
        let _ = write!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>
<line x1="{MARGIN}" y1="{}" x2="{}" y2="{}" stroke="black"/>
<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{}" stroke="black"/>
<text x="{}" y="{}" text-anchor="middle">{}</text>
<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>
"#,
            W / 2.0,
            escape(title),
            H - MARGIN,
            W - MARGIN,
            H - MARGIN,
            H - MARGIN,
            W / 2.0,
            H - 12.0,
            escape(xlabel),
            H / 2.0,
            H / 2.0,
            escape(ylabel),
        );
        for t in 0..=4 {
            let fx = self.x.0 + (self.x.1 - self.x.0) * t as f64 / 4.0;
            let fy = self.y.0 + (self.y.1 - self.y.0) * t as f64 / 4.0;
            let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, self.px(fx), H - MARGIN + 16.0, tick(fx));
            let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, MARGIN - 4.0, self.py(fy) + 4.0, tick(fy));
        }
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else {
        format!("{v:.2}")
    }
}

/// `log2(value)` against the scale index, one polyline per series.
pub fn decay_plot(title: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    let logged: Vec<(&str, Vec<(f64, f64)>)> = series
        .iter()
        .map(|(l, pts)| (l.as_str(), pts.iter().filter(|p| p.1 > 0.0).map(|&(x, y)| (x, y.log2())).collect()))
        .collect();
    let frame = Frame {
        x: bounds(logged.iter().flat_map(|s| s.1.iter().map(|p| p.0))),
        y: bounds(logged.iter().flat_map(|s| s.1.iter().map(|p| p.1))),
    };
    let mut out = String::new();
    frame.axes(&mut out, title, "j", "log2 per-scale term");
    for (i, (label, pts)) in logged.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.1},{:.1}", frame.px(x), frame.py(y))).collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
        if i < 12 {
            let y = MARGIN + 14.0 * i as f64;
            let _ = writeln!(out, r#"<text x="{:.1}" y="{y:.1}" fill="{color}">{}</text>"#, W - MARGIN - 150.0, escape(label));
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Histogram of the finite values in `bins` equal bins.
pub fn histogram(title: &str, values: &[f64], bins: usize) -> String {
    let bins = bins.max(1);
    let vals: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let (lo, hi) = bounds(vals.iter().copied());
    let mut counts = vec![0usize; bins];
    for v in &vals {
        let b = (((v - lo) / (hi - lo)) * bins as f64).floor() as usize;
        counts[b.min(bins - 1)] += 1;
    }
    let top = counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let frame = Frame { x: (lo, hi), y: (0.0, top) };
    let mut out = String::new();
    frame.axes(&mut out, title, "ratio", "count");
    let width = (hi - lo) / bins as f64;
    for (b, &c) in counts.iter().enumerate() {
        let x0 = frame.px(lo + width * b as f64);
        let x1 = frame.px(lo + width * (b + 1) as f64);
        let y = frame.py(c as f64);
        let _ = writeln!(out, r##"<rect x="{x0:.1}" y="{y:.1}" width="{:.1}" height="{:.1}" fill="#1f77b4" stroke="white"/>"##, x1 - x0, frame.py(0.0) - y);
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_counts_every_finite_value() {
        let s = histogram("t", &[1.0, 1.5, 2.0, f64::NAN, 2.0], 4);
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert_eq!(s.matches("<rect x=").count(), 4);
    }

    #[test]
    fn decay_plot_skips_nonpositive_values() {
        let s = decay_plot("d", &[("a".into(), vec![(0.0, 1.0), (1.0, 0.5), (2.0, 0.0)])]);
        let line = s.lines().find(|l| l.starts_with("<polyline")).unwrap();
        assert_eq!(line.matches(',').count(), 2);
    }
}
