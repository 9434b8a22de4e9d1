//! Deterministic SVG strips of path snapshots.

use std::fmt::Write;

use elastic_geodesics::bspline::{DiscreteCurve, DiscretePath, SplineBasis, SplineSpace};
use elastic_geodesics::vec2::Point;
use elastic_geodesics::Axis;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderStyle {
    /// θ-sites per polyline.
    pub samples: usize,
    /// Panel size in pixels.
    pub panel: f64,
    /// Margin around the bounding box, as a fraction of its extent.
    pub margin: f64,
}

impl Default for RenderStyle {
    fn default() -> Self {
        Self {
            samples: 200,
            panel: 240.0,
            margin: 0.05,
        }
    }
}

/// `k` equally spaced times from 0 to 1.
pub fn frame_times(k: usize) -> Vec<f64> {
    match k {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..k).map(|i| i as f64 / (k - 1) as f64).collect(),
    }
}

fn sample_curve(curve: &DiscreteCurve<f64>, samples: usize) -> Result<Vec<Point<f64>>, CliError> {
    let basis = SplineBasis::new(&curve.config, Axis::Theta)?;
    let (lo, hi) = basis.domain();
    let closed = curve.config.closed;
    let denom = if closed { samples } else { samples.saturating_sub(1).max(1) } as f64;
    let mut pts: Vec<Point<f64>> = (0..samples)
        .map(|i| curve.point(&basis, lo + (hi - lo) * i as f64 / denom))
        .collect();
    if closed && !pts.is_empty() {
        pts.push(pts[0]);
    }
    Ok(pts)
}

fn fmt(v: f64) -> String {
    // Avoid "-0.000000" so identical geometry prints identically.
    let s = format!("{v:.6}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        "0.000000".to_string()
    } else {
        s
    }
}

fn polyline(pts: &[Point<f64>]) -> String {
    pts.iter().map(|p| format!("{},{}", fmt(p[0]), fmt(-p[1]))).collect::<Vec<_>>().join(" ")
}

/// One panel per time, side by side. Every panel shares a viewBox in
/// (x, −y) coordinates, the bounding box of all drawn curves plus the
/// margin, so user units are ambient units with the y axis flipped.
pub fn render_svg(
    path: &DiscretePath<f64>,
    times: &[f64],
    target: Option<&DiscreteCurve<f64>>,
    style: &RenderStyle,
) -> Result<String, CliError> {
    if times.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(CliError::Input("frame times must lie in [0, 1]".into()));
    }
    let space = SplineSpace::new(path.config)?;
    let frames: Vec<Vec<Point<f64>>> = times
        .iter()
        .map(|&t| sample_curve(&path.curve_at(space.time_basis(), t), style.samples))
        .collect::<Result<_, _>>()?;
    let target_pts = target.map(|c| sample_curve(c, style.samples)).transpose()?;

    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in frames.iter().flatten().chain(target_pts.iter().flatten()) {
        let q = [p[0], -p[1]];
        for k in 0..2 {
            lo[k] = lo[k].min(q[k]);
            hi[k] = hi[k].max(q[k]);
        }
    }
    if !lo[0].is_finite() {
        lo = [-1.0, -1.0];
        hi = [1.0, 1.0];
    }
    let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
    let pad = [
        style.margin * (hi[0] - lo[0]).max(1e-3 * extent),
        style.margin * (hi[1] - lo[1]).max(1e-3 * extent),
    ];
    let vb = [lo[0] - pad[0], lo[1] - pad[1], hi[0] - lo[0] + 2.0 * pad[0], hi[1] - lo[1] + 2.0 * pad[1]];
    let view_box = format!("{} {} {} {}", fmt(vb[0]), fmt(vb[1]), fmt(vb[2]), fmt(vb[3]));

    let w = style.panel;
    let label = 16.0;
    let total_w = w * frames.len().max(1) as f64;
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{tw}" height="{th}" viewBox="0 0 {tw} {th}">"#,
        tw = fmt(total_w),
        th = fmt(w + label)
    )
    .unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    for (k, (t, pts)) in times.iter().zip(&frames).enumerate() {
        let x0 = w * k as f64;
        writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">t={t:.2}</text>"#,
            fmt(x0 + w / 2.0),
            fmt(label - 4.0)
        )
        .unwrap();
        writeln!(
            out,
            r#"<svg class="frame" x="{}" y="{}" width="{}" height="{}" viewBox="{view_box}" preserveAspectRatio="xMidYMid meet">"#,
            fmt(x0),
            fmt(label),
            fmt(w),
            fmt(w)
        )
        .unwrap();
        if let Some(tp) = &target_pts {
            writeln!(
                out,
                r##"<polyline class="target" points="{}" fill="none" stroke="#888888" stroke-width="1" stroke-dasharray="4 3" vector-effect="non-scaling-stroke"/>"##,
                polyline(tp)
            )
            .unwrap();
        }
        writeln!(
            out,
            r##"<polyline class="curve" points="{}" fill="none" stroke="#1f4e9c" stroke-width="1.5" vector-effect="non-scaling-stroke"/>"##,
            polyline(pts)
        )
        .unwrap();
        writeln!(out, "</svg>").unwrap();
    }
    writeln!(out, "</svg>").unwrap();
    Ok(out)
}
