//! Minimal static SVG: opinion trajectories and the sweep heatmap.

use std::fmt::Write as _;

use endonet::analysis::thresholds::{consensus_boundary, diameter_boundary, divergence_boundary};
use endonet::analysis::Diameter;
use endonet::sweep::SweepCell;

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 56.0;

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

    fn axes(&self, out: &mut String, xlabel: &str, ylabel: &str) {
        let (x0, x1, y0, y1) = (self.px(self.x.0), self.px(self.x.1), self.py(self.y.0), self.py(self.y.1));
        let _ = writeln!(out, r#"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#, x1 - x0, y0 - y1);
        for k in 0..=4 {
            let fx = self.x.0 + (self.x.1 - self.x.0) * k as f64 / 4.0;
            let fy = self.y.0 + (self.y.1 - self.y.0) * k as f64 / 4.0;
            let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"#, self.px(fx), y0 + 16.0, tick(fx));
            let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"#, x0 - 6.0, self.py(fy) + 4.0, tick(fy));
        }
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">{xlabel}</text>"#, (x0 + x1) / 2.0, H - 12.0);
        let _ = writeln!(
            out,
            r#"<text x="16" y="{:.2}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {:.2})">{ylabel}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0
        );
    }
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn header(title: &str) -> String {
    let mut out = format!(r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    out.push('\n');
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{:.2}" y="24" font-size="14" text-anchor="middle">{title}</text>"#, W / 2.0);
    out
}

/// One polyline per agent, periods on the horizontal axis.
pub fn trajectory_svg(profiles: &[&[f64]], title: &str) -> String {
    let mut out = header(title);
    let steps = profiles.len().saturating_sub(1).max(1) as f64;
    let lo = profiles.iter().flat_map(|p| p.iter()).copied().fold(0.0, f64::min);
    let hi = profiles.iter().flat_map(|p| p.iter()).copied().fold(1.0, f64::max);
    let frame = Frame { x: (0.0, steps), y: (lo, hi) };
    frame.axes(&mut out, "t", "opinion");
    let n = profiles.first().map_or(0, |p| p.len());
    for i in 0..n {
        let hue = 360.0 * i as f64 / n.max(1) as f64;
        let pts: Vec<String> =
            profiles.iter().enumerate().map(|(t, p)| format!("{:.2},{:.2}", frame.px(t as f64), frame.py(p[i]))).collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="hsl({hue:.0},70%,40%)" stroke-width="0.8" points="{}"/>"#, pts.join(" "));
    }
    out.push_str("</svg>\n");
    out
}

fn diameter_color(d: Option<Diameter>) -> &'static str {
    match d {
        Some(Diameter::Finite(1)) => "#1a9850",
        Some(Diameter::Finite(2)) => "#91cf60",
        Some(Diameter::Finite(3)) => "#d9ef8b",
        Some(Diameter::Finite(4)) => "#fee08b",
        Some(Diameter::Finite(_)) => "#fc8d59",
        Some(Diameter::Infinite) => "#d73027",
        None => "#bbbbbb",
    }
}

/// Cells coloured by period-1 diameter, split runs marked with a triangle,
/// and the analytic diameter and region boundaries drawn on top.
pub fn heatmap_svg(cells: &[SweepCell], f_values: &[f64], v_values: &[f64], title: &str) -> String {
    let mut out = header(title);
    let (f0, f1) = (f_values[0], f_values[f_values.len() - 1]);
    let (v0, v1) = (v_values[0], v_values[v_values.len() - 1]);
    let df = (f1 - f0) / (f_values.len() - 1) as f64;
    let dv = (v1 - v0) / (v_values.len() - 1) as f64;
    let frame = Frame { x: (f0 - df / 2.0, f1 + df / 2.0), y: (v0 - dv / 2.0, v1 + dv / 2.0) };
    for c in cells {
        let (x0, x1) = (frame.px(c.f - df / 2.0), frame.px(c.f + df / 2.0));
        let (y0, y1) = (frame.py(c.v + dv / 2.0), frame.py(c.v - dv / 2.0));
        let _ = writeln!(
            out,
            r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
            x1 - x0,
            y1 - y0,
            diameter_color(c.diameter_t1)
        );
        if c.components_final.is_some_and(|k| k >= 2) {
            let (cx, cy, r) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0, (x1 - x0).min(y1 - y0) * 0.3);
            let _ = writeln!(
                out,
                r##"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="#b2182b"/>"##,
                cx,
                cy - r,
                cx - r,
                cy + r,
                cx + r,
                cy + r
            );
        }
    }
    let curve = |out: &mut String, g: &dyn Fn(f64) -> f64, style: &str| {
        let pts: Vec<String> = (0..=200)
            .map(|k| f0 + (f1 - f0) * k as f64 / 200.0)
            .filter(|&f| (frame.y.0..=frame.y.1).contains(&g(f)))
            .map(|f| format!("{:.2},{:.2}", frame.px(f), frame.py(g(f))))
            .collect();
        if pts.len() > 1 {
            let _ = writeln!(out, r#"<polyline fill="none" {style} points="{}"/>"#, pts.join(" "));
        }
    };
    for z in 0..=5 {
        curve(&mut out, &|f| diameter_boundary(f, z), r#"stroke="black" stroke-width="1.2""#);
    }
    curve(&mut out, &consensus_boundary, r##"stroke="#2166ac" stroke-width="1.6" stroke-dasharray="6 3""##);
    curve(&mut out, &divergence_boundary, r##"stroke="#b2182b" stroke-width="1.6" stroke-dasharray="6 3""##);
    frame.axes(&mut out, "f", "V");
    out.push_str("</svg>\n");
    out
}
