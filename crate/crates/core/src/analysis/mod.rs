//! Capital distribution curves, stability statistics, file formats and charts.

pub mod curve;
pub mod io;
pub mod stability;
pub mod svg;

pub use curve::{capital_curve, CapitalCurve, CurvePoint, MarketSnapshot};
pub use io::{
    read_curve, read_snapshot, write_curve, write_jsonl, write_snapshot, write_trajectory,
};
pub use stability::{kendall_tau, stability_stats, StabilityReport};
pub use svg::{curves_svg, render_curves, render_trajectory, trajectory_svg, CurveSeries};
