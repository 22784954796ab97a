//! Static SVG chart of `log₁₀(residual)` against iteration.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 16.0;
const MARGIN_TOP: f64 = 32.0;
const MARGIN_BOTTOM: f64 = 48.0;

/// Smallest residual drawn; exact zeros are clamped here.
pub const FLOOR: f64 = 1e-300;

/// Plot points `(iteration, log₁₀ r)`. `stride` maps history index to
/// iteration number for strided histories.
pub fn log_points(history: &[f64], stride: usize) -> Vec<(f64, f64)> {
    history
        .iter()
        .enumerate()
        .map(|(i, &r)| ((i * stride.max(1)) as f64, r.max(FLOOR).log10()))
        .collect()
}

/// Renders the chart. `tolerance` adds a dashed horizontal line.
pub fn render_svg(title: &str, history: &[f64], stride: usize, tolerance: Option<f64>) -> Result<String> {
    if history.is_empty() {
        return Err(Error::Precondition("residual history is empty".into()));
    }
    if history.iter().any(|r| r.is_nan()) {
        return Err(Error::NonFinite);
    }
    let pts = log_points(history, stride);
    let x_max = pts.last().map_or(1.0, |p| p.0).max(1.0);
    let mut y_lo = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let mut y_hi = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    if let Some(t) = tolerance.filter(|t| *t > 0.0) {
        y_lo = y_lo.min(t.log10());
        y_hi = y_hi.max(t.log10());
    }
    let (y_lo, y_hi) = (y_lo.floor(), y_hi.ceil().max(y_lo.floor() + 1.0));
    let y_hi = if y_hi.is_finite() { y_hi } else { y_lo + 1.0 };

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + x / x_max * plot_w;
    let sy = |y: f64| MARGIN_TOP + (y_hi - y.min(y_hi)) / (y_hi - y_lo) * plot_h;

    let mut svg = String::new();
    let w = &mut svg;
    writeln!(w, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#).unwrap();
    writeln!(w, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
    writeln!(w, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title)).unwrap();

    // decade grid and labels
    let step = ((y_hi - y_lo) / 10.0).ceil().max(1.0);
    let mut y = y_lo;
    while y <= y_hi + 1e-9 {
        let py = sy(y);
        writeln!(w, r##"<line x1="{MARGIN_LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#ddd"/>"##, WIDTH - MARGIN_RIGHT).unwrap();
        writeln!(w, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{}</text>"#, MARGIN_LEFT - 6.0, py + 4.0, y as i64).unwrap();
        y += step;
    }
    for k in 0..=4 {
        let xv = x_max * k as f64 / 4.0;
        writeln!(w, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, sx(xv), HEIGHT - MARGIN_BOTTOM + 18.0, xv.round() as u64).unwrap();
    }
    writeln!(w, r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#).unwrap();
    writeln!(w, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">iteration</text>"#, MARGIN_LEFT + plot_w / 2.0, HEIGHT - 10.0).unwrap();
    writeln!(w, r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">residual</text>"#, MARGIN_TOP + plot_h / 2.0, MARGIN_TOP + plot_h / 2.0).unwrap();

    if let Some(t) = tolerance.filter(|t| *t > 0.0) {
        let py = sy(t.log10());
        writeln!(w, r##"<line class="tolerance" x1="{MARGIN_LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#c00" stroke-dasharray="6 4"/>"##, WIDTH - MARGIN_RIGHT).unwrap();
    }
    let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
    writeln!(w, r##"<polyline class="residual" fill="none" stroke="#1f5fbf" stroke-width="1.5" points="{}"/>"##, coords.join(" ")).unwrap();
    writeln!(w, "</svg>").unwrap();
    Ok(svg)
}

pub fn write_svg(path: impl AsRef<Path>, title: &str, history: &[f64], stride: usize, tolerance: Option<f64>) -> Result<()> {
    let svg = render_svg(title, history, stride, tolerance)?;
    std::fs::write(path, svg)?;
    Ok(())
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn polyline_ys(svg: &str) -> Vec<f64> {
        let line = svg.lines().find(|l| l.contains("class=\"residual\"")).unwrap();
        let pts = line.split("points=\"").nth(1).unwrap().trim_end_matches("\"/>");
        pts.split(' ').map(|p| p.split(',').nth(1).unwrap().parse().unwrap()).collect()
    }

    fn tolerance_y(svg: &str) -> f64 {
        let line = svg.lines().find(|l| l.contains("class=\"tolerance\"")).unwrap();
        line.split("y1=\"").nth(1).unwrap().split('"').next().unwrap().parse().unwrap()
    }

    #[test]
    fn empty_history_is_rejected() {
        assert!(matches!(render_svg("x", &[], 1, None), Err(Error::Precondition(_))));
    }

    #[test]
    fn converged_run_ends_below_tolerance_line() {
        let hist = [1.0, 1e-3, 1e-6, 1e-9];
        let svg = render_svg("run <1>", &hist, 1, Some(1e-8)).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("run &lt;1&gt;"));
        let ys = polyline_ys(&svg);
        assert_eq!(ys.len(), 4);
        // SVG y grows downward
        assert!(*ys.last().unwrap() >= tolerance_y(&svg));
        assert!(ys.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn zeros_and_single_points_render() {
        assert!(render_svg("z", &[0.0], 1, None).is_ok());
        assert!(render_svg("z", &[1.0, 0.0], 5, Some(1e-8)).is_ok());
        assert!(matches!(render_svg("z", &[f64::NAN], 1, None), Err(Error::NonFinite)));
    }

    #[test]
    fn stride_scales_iterations() {
        let pts = log_points(&[1.0, 0.1, 0.01], 10);
        assert_eq!(pts[2], (20.0, -2.0));
    }
}
