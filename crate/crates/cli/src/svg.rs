//! Single-panel SVG of `x` against `t`, sampling instants marked.

use std::fmt::Write;

use ptc_core::Trajectory;

const W: f64 = 800.0;
const H: f64 = 480.0;
const PAD: f64 = 60.0;

/// Values spanning more than this factor are drawn on a signed log scale.
const LOG_SPAN: f64 = 1e6;

pub fn render(traj: &Trajectory, title: &str) -> String {
    let mut pts: Vec<(f64, f64, bool)> = traj
        .steps
        .iter()
        .map(|s| (s.t, s.x, true))
        .chain(traj.dense.iter().map(|d| (d.t, d.x, false)))
        .filter(|p| p.0.is_finite() && p.1.is_finite())
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let max_abs = pts.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    let min_abs = pts
        .iter()
        .map(|p| p.1.abs())
        .filter(|v| *v > 0.0)
        .fold(f64::INFINITY, f64::min);
    let log = max_abs / min_abs > LOG_SPAN;
    let ymap = |x: f64| if log { x.signum() * (1.0 + x.abs() / min_abs).log10() } else { x };
    let (t_lo, t_hi) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)));
    let (y_lo, y_hi) = pts
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(ymap(p.1)), hi.max(ymap(p.1))));
    let span = |lo: f64, hi: f64| if hi > lo { hi - lo } else { 1.0 };
    let px = |t: f64| PAD + (t - t_lo) / span(t_lo, t_hi) * (W - 2.0 * PAD);
    let py = |x: f64| H - PAD - (ymap(x) - y_lo) / span(y_lo, y_hi) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    let _ = writeln!(s, r#"<text x="{}" y="30" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#, W / 2.0, escape(title));
    let ylabel = if log { "sign(x)·log10(1+|x|/m)" } else { "x" };
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">t [{t_lo:.4}, {t_hi:.4}]</text>"#,
        W / 2.0,
        H - 20.0
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" font-family="sans-serif" font-size="12" transform="rotate(-90 15 {})">{ylabel}</text>"#,
        H / 2.0,
        H / 2.0
    );
    if !pts.is_empty() {
        let mut d = String::new();
        for (i, p) in pts.iter().enumerate() {
            let _ = write!(d, "{}{:.2},{:.2} ", if i == 0 { "M" } else { "L" }, px(p.0), py(p.1));
        }
        let _ = writeln!(s, r#"<path d="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#, d.trim_end());
        for p in pts.iter().filter(|p| p.2) {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="crimson"/>"#, px(p.0), py(p.1));
        }
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use ptc_core::model::{DensePoint, Step};

    #[test]
    fn marks_every_sample() {
        let traj = Trajectory {
            steps: (0..4).map(|k| Step { k, t: k as f64, x: 1.0 / (1.0 + k as f64), hold: None }).collect(),
            dense: vec![DensePoint { k: 0, t: 0.5, x: 0.7 }],
            ..Trajectory::default()
        };
        let svg = render(&traj, "a<b");
        assert_eq!(svg.matches("<circle").count(), 4);
        assert!(svg.contains("a&lt;b"));
        assert!(svg.starts_with("<svg"));
    }
}
