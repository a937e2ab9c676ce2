//! Static SVG figures built from lines, rectangles and text.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let pad = |(a, b): (f64, f64)| if b > a { (a, b) } else { (a - 0.5, a + 0.5) };
        Self { x: pad(x), y: pad(y) }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (H - TOP - BOTTOM)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn open(out: &mut String, title: &str, xlabel: &str, ylabel: &str, f: &Frame) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        W / 2.0,
        escape(title)
    );
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    let _ = writeln!(out, "<path d=\"M{x0},{y0} L{x0},{y1} L{x1},{y1}\" stroke=\"black\" fill=\"none\"/>");
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = f.x.0 + t * (f.x.1 - f.x.0);
        let yv = f.y.0 + t * (f.y.1 - f.y.0);
        let (px, py) = (f.px(xv), f.py(yv));
        let _ = writeln!(out, "<line x1=\"{px:.2}\" y1=\"{y1}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"black\"/>", y1 + 5.0);
        let _ = writeln!(out, "<text x=\"{px:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>", y1 + 18.0, tick(xv));
        let _ = writeln!(out, "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{x0}\" y2=\"{py:.2}\" stroke=\"black\"/>", x0 - 5.0);
        let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>", x0 - 8.0, py + 4.0, tick(yv));
    }
    let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>", (x0 + x1) / 2.0, H - 12.0, escape(xlabel));
    let _ = writeln!(
        out,
        "<text x=\"16\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">{}</text>",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(ylabel)
    );
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn legend(out: &mut String, labels: &[&str]) {
    for (i, l) in labels.iter().enumerate() {
        let y = TOP + 8.0 + 16.0 * i as f64;
        let x = W - RIGHT - 170.0;
        let c = COLORS[i % COLORS.len()];
        let _ = writeln!(out, "<rect x=\"{x}\" y=\"{:.1}\" width=\"12\" height=\"4\" fill=\"{c}\"/>", y - 4.0);
        let _ = writeln!(out, "<text x=\"{:.1}\" y=\"{y:.1}\">{}</text>", x + 18.0, escape(l));
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
}

/// Polylines with markers, one per series.
pub fn line_chart(title: &str, xlabel: &str, ylabel: &str, series: &[(&str, Vec<(f64, f64)>)]) -> String {
    let xr = range(series.iter().flat_map(|s| s.1.iter().map(|p| p.0)));
    let yr = range(series.iter().flat_map(|s| s.1.iter().map(|p| p.1)));
    let f = Frame::new(if xr.0.is_finite() { xr } else { (0.0, 1.0) }, if yr.0.is_finite() { yr } else { (0.0, 1.0) });
    let mut out = String::new();
    open(&mut out, title, xlabel, ylabel, &f);
    for (i, (_, pts)) in series.iter().enumerate() {
        let c = COLORS[i % COLORS.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y))).collect();
        if !path.is_empty() {
            let _ = writeln!(out, "<polyline points=\"{}\" stroke=\"{c}\" fill=\"none\" stroke-width=\"2\"/>", path.join(" "));
        }
        for &(x, y) in pts {
            let _ = writeln!(out, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{c}\"/>", f.px(x), f.py(y));
        }
    }
    legend(&mut out, &series.iter().map(|s| s.0).collect::<Vec<_>>());
    out.push_str("</svg>\n");
    out
}

/// Bars of observed frequencies with a reference pmf drawn as points.
pub fn histogram(title: &str, observed: &[f64], reference: &[f64]) -> String {
    let m = observed.len().max(reference.len()).max(1);
    let top = observed.iter().chain(reference).copied().fold(0.0f64, f64::max);
    let f = Frame::new((-0.5, m as f64 - 0.5), (0.0, if top > 0.0 { top * 1.1 } else { 1.0 }));
    let mut out = String::new();
    open(&mut out, title, "count", "probability", &f);
    let bw = f.px(1.0) - f.px(0.0);
    for (k, &p) in observed.iter().enumerate() {
        let x = f.px(k as f64) - 0.4 * bw;
        let y = f.py(p);
        let _ = writeln!(
            out,
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\" opacity=\"0.7\"/>",
            0.8 * bw,
            f.py(0.0) - y,
            COLORS[0]
        );
    }
    for (k, &p) in reference.iter().enumerate() {
        let _ = writeln!(out, "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"{}\"/>", f.px(k as f64), f.py(p), COLORS[1]);
    }
    legend(&mut out, &["empirical", "Poisson"]);
    out.push_str("</svg>\n");
    out
}

/// Box plots (quartiles, whiskers at the extremes) per labelled group.
pub fn box_plot(title: &str, ylabel: &str, groups: &[(String, Vec<f64>)]) -> String {
    let yr = range(groups.iter().flat_map(|g| g.1.iter().copied()));
    let f = Frame::new((-0.5, groups.len().max(1) as f64 - 0.5), if yr.0.is_finite() { yr } else { (0.0, 1.0) });
    let mut out = String::new();
    open(&mut out, title, "n", ylabel, &f);
    for (i, (label, values)) in groups.iter().enumerate() {
        let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
        let cx = f.px(i as f64);
        let _ = writeln!(out, "<text x=\"{cx:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>", TOP - 6.0, escape(label));
        if v.is_empty() {
            continue;
        }
        v.sort_by(f64::total_cmp);
        let q = |p: f64| v[((v.len() - 1) as f64 * p).round() as usize];
        let (lo, q1, med, q3, hi) = (v[0], q(0.25), q(0.5), q(0.75), v[v.len() - 1]);
        let half = 0.2 * (f.px(1.0) - f.px(0.0));
        let c = COLORS[i % COLORS.len()];
        let _ = writeln!(out, "<line x1=\"{cx:.2}\" y1=\"{:.2}\" x2=\"{cx:.2}\" y2=\"{:.2}\" stroke=\"{c}\"/>", f.py(lo), f.py(hi));
        let _ = writeln!(
            out,
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"white\" stroke=\"{c}\" stroke-width=\"2\"/>",
            cx - half,
            f.py(q3),
            2.0 * half,
            f.py(q1) - f.py(q3)
        );
        let _ = writeln!(
            out,
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{c}\" stroke-width=\"3\"/>",
            cx - half,
            f.py(med),
            cx + half,
            f.py(med)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn well_formed() {
        let a = line_chart("r", "n", "ratio", &[("x", vec![(1.0, 0.5), (2.0, 0.6)])]);
        let b = histogram("h", &[0.2, 0.5], &[0.3, 0.3, 0.1]);
        let c = box_plot("b", "G", &[("256".into(), vec![0.5, 0.6, 0.7]), ("1024".into(), vec![])]);
        for s in [a, b, c] {
            assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
            assert!(!s.contains("NaN"));
        }
    }
}
