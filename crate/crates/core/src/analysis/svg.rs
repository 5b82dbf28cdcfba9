//! Static SVG charts: log-log capital distribution curves and weight-vs-step
//! trajectories. Output is a pure function of the input.

use std::fmt::Write as _;
use std::path::Path;

use crate::analysis::curve::CapitalCurve;
use crate::analysis::io::write_atomic;
use crate::error::Result;
use crate::simulate::Trajectory;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 32.0;
const MARGIN_BOTTOM: f64 = 48.0;

const PALETTE: [&str; 20] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#aec7e8", "#ffbb78", "#98df8a", "#ff9896", "#c5b0d5", "#c49c94",
    "#f7b6d2", "#c7c7c7", "#dbdb8d", "#9edae5",
];

/// A labelled curve to draw in one color.
#[derive(Debug, Clone, Copy)]
pub struct CurveSeries<'a> {
    pub label: &'a str,
    pub curve: &'a CapitalCurve,
    pub color: &'a str,
}

#[derive(Debug, Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    fn spanning(values: impl Iterator<Item = f64>) -> Self {
        let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
        if !lo.is_finite() {
            return Axis { lo: 0.0, hi: 1.0 };
        }
        if hi - lo < 1e-12 {
            return Axis {
                lo: lo - 0.5,
                hi: hi + 0.5,
            };
        }
        let pad = 0.05 * (hi - lo);
        Axis {
            lo: lo - pad,
            hi: hi + pad,
        }
    }

    fn x(&self, v: f64) -> f64 {
        MARGIN_LEFT + (v - self.lo) / (self.hi - self.lo) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT
            - MARGIN_BOTTOM
            - (v - self.lo) / (self.hi - self.lo) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }

    fn ticks(&self, step: f64) -> impl Iterator<Item = f64> {
        let first = (self.lo / step).ceil() as i64;
        let last = (self.hi / step).floor() as i64;
        (first..=last).map(move |k| k as f64 * step)
    }
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        out,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn frame(
    out: &mut String,
    xs: &Axis,
    ys: &Axis,
    x_label: &str,
    y_label: &str,
    x_step: f64,
    y_step: f64,
) {
    let (left, right) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let (top, bottom) = (MARGIN_TOP, HEIGHT - MARGIN_BOTTOM);
    let _ = writeln!(
        out,
        r#"<rect x="{left:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        right - left,
        bottom - top
    );
    for t in xs.ticks(x_step) {
        let x = xs.x(t);
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{bottom:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            bottom + 4.0,
            bottom + 16.0,
            tick_label(t)
        );
    }
    for t in ys.ticks(y_step) {
        let y = ys.y(t);
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{left:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            left - 4.0,
            left - 6.0,
            y + 4.0,
            tick_label(t)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (left + right) / 2.0,
        HEIGHT - 10.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
        (top + bottom) / 2.0,
        (top + bottom) / 2.0,
        escape(y_label)
    );
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Log-log scatter of one or more capital distribution curves.
pub fn curves_svg(title: &str, series: &[CurveSeries<'_>]) -> String {
    let points = || series.iter().flat_map(|s| s.curve.points.iter());
    let xs = Axis::spanning(points().map(|p| p.log10_rank));
    let ys = Axis::spanning(points().map(|p| p.log10_weight));
    let mut out = String::new();
    header(&mut out, title);
    frame(
        &mut out,
        &xs,
        &ys,
        "log10 rank",
        "log10 weight",
        nice_step(xs.hi - xs.lo),
        nice_step(ys.hi - ys.lo),
    );
    for (k, s) in series.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<g class="curve" fill="none" stroke="{}">"#,
            escape(s.color)
        );
        for p in &s.curve.points {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" data-log-rank="{:.6}" data-log-weight="{:.6}"/>"#,
                xs.x(p.log10_rank),
                ys.y(p.log10_weight),
                p.log10_rank,
                p.log10_weight
            );
        }
        let _ = writeln!(out, "</g>");
        let ly = MARGIN_TOP + 14.0 + 14.0 * k as f64;
        let lx = WIDTH - MARGIN_RIGHT - 120.0;
        let _ = writeln!(
            out,
            r#"<circle cx="{lx:.2}" cy="{:.2}" r="3" fill="none" stroke="{}" class="legend"/><text x="{:.2}" y="{ly:.2}">{}</text>"#,
            ly - 4.0,
            escape(s.color),
            lx + 8.0,
            escape(s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Market weights against step, one polyline per stock. A dashed line
/// marks the end of growth for two-phase runs.
pub fn trajectory_svg(title: &str, traj: &Trajectory) -> String {
    let steps = || traj.records.iter().map(|r| r.step as f64);
    let xs = Axis::spanning(steps());
    let max_w = traj
        .records
        .iter()
        .flat_map(|r| r.composition.weights())
        .fold(0.0f64, f64::max);
    let ys = Axis::spanning([0.0, max_w.max(1e-9)].into_iter());
    let mut out = String::new();
    header(&mut out, title);
    frame(
        &mut out,
        &xs,
        &ys,
        "step",
        "market weight",
        nice_step(xs.hi - xs.lo),
        nice_step(ys.hi - ys.lo),
    );
    let weights: Vec<Vec<f64>> = traj
        .records
        .iter()
        .map(|r| r.composition.weights())
        .collect();
    for stock in 0..traj.terminal.parts() {
        let mut pts = String::new();
        for (r, w) in traj.records.iter().zip(&weights) {
            if !pts.is_empty() {
                pts.push(' ');
            }
            let _ = write!(pts, "{:.2},{:.2}", xs.x(r.step as f64), ys.y(w[stock]));
        }
        let _ = writeln!(
            out,
            r#"<polyline class="stock" data-stock="{stock}" fill="none" stroke="{}" stroke-width="1" points="{pts}"/>"#,
            PALETTE[stock % PALETTE.len()]
        );
    }
    if let Some(t) = traj.scenario.threshold() {
        let x = xs.x(t as f64);
        let _ = writeln!(
            out,
            r#"<line class="threshold" x1="{x:.2}" y1="{MARGIN_TOP:.2}" x2="{x:.2}" y2="{:.2}" stroke="gray" stroke-dasharray="4 3"/>"#,
            HEIGHT - MARGIN_BOTTOM
        );
    }
    out.push_str("</svg>\n");
    out
}

pub fn render_curves(path: &Path, title: &str, series: &[CurveSeries<'_>]) -> Result<()> {
    let svg = curves_svg(title, series);
    write_atomic(path, |w| w.write_all(svg.as_bytes()))
}

pub fn render_trajectory(path: &Path, title: &str, traj: &Trajectory) -> Result<()> {
    let svg = trajectory_svg(title, traj);
    write_atomic(path, |w| w.write_all(svg.as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::curve::capital_curve;
    use crate::polya::ModelParams;
    use crate::simulate::{run, ScenarioConfig};

    #[test]
    fn single_point_curve() {
        let c = capital_curve(&[5.0], None).unwrap();
        let svg = curves_svg(
            "one",
            &[CurveSeries {
                label: "t",
                curve: &c,
                color: "blue",
            }],
        );
        let markers: Vec<_> = svg
            .lines()
            .filter(|l| l.contains("data-log-rank"))
            .collect();
        assert_eq!(markers.len(), 1);
        assert!(markers[0].contains(r#"data-log-rank="0.000000" data-log-weight="0.000000""#));
        // Centered, since the axes pad symmetrically around a single value.
        assert!(markers[0].contains(&format!(
            r#"cx="{:.2}""#,
            (MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0
        )));
    }

    #[test]
    fn identical_input_identical_svg() {
        let c = capital_curve(&[5.0, 3.0, 1.0, 1.0], None).unwrap();
        let s = [CurveSeries {
            label: "a<b",
            curve: &c,
            color: "red",
        }];
        assert_eq!(curves_svg("x", &s), curves_svg("x", &s));
        assert!(curves_svg("x", &s).contains("a&lt;b"));
    }

    #[test]
    fn one_polyline_per_stock() {
        let cfg = ScenarioConfig::two_phase(ModelParams::new(1.0, 20).unwrap(), 100, 300, 4)
            .with_record_every(5);
        let t = run(&cfg).unwrap();
        let svg = trajectory_svg("traj", &t);
        assert_eq!(svg.matches("<polyline").count(), 20);
        assert_eq!(svg.matches(r#"class="threshold""#).count(), 1);
        assert_eq!(svg, trajectory_svg("traj", &t));
    }
}
