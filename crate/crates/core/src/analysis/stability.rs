use std::ops::RangeInclusive;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::simulate::Trajectory;

/// Temporal stability of market weights over a window of steps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    pub window_start: usize,
    pub window_end: usize,
    /// Per stock: largest `|w_i(t) - w_i(terminal)|` over recorded `t` in the window.
    pub max_deviation: Vec<f64>,
    /// Kendall tau-b between weights at the first and last recorded step of the window.
    pub kendall_tau: f64,
}

impl StabilityReport {
    /// Largest deviation over all stocks.
    pub fn overall_max_deviation(&self) -> f64 {
        self.max_deviation.iter().copied().fold(0.0, f64::max)
    }
}

pub fn stability_stats(
    traj: &Trajectory,
    window: RangeInclusive<usize>,
) -> Result<StabilityReport> {
    let in_window: Vec<_> = traj
        .records
        .iter()
        .filter(|r| window.contains(&r.step))
        .collect();
    let (first, last) = match (in_window.first(), in_window.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => {
            return Err(Error::InvalidParameter(format!(
                "no recorded steps in window {}..={}",
                window.start(),
                window.end()
            )))
        }
    };
    let terminal = traj.terminal.weights();
    let mut max_deviation = vec![0.0f64; terminal.len()];
    for r in &in_window {
        for ((dev, w), t) in max_deviation
            .iter_mut()
            .zip(r.composition.weights())
            .zip(&terminal)
        {
            *dev = dev.max((w - t).abs());
        }
    }
    Ok(StabilityReport {
        window_start: first.step,
        window_end: last.step,
        max_deviation,
        kendall_tau: kendall_tau(&first.composition.weights(), &last.composition.weights())?,
    })
}

/// Kendall tau-b rank correlation.
///
/// When either side is completely tied the coefficient is undefined; this
/// returns 1 if both sides are completely tied and 0 otherwise.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter(
            "rank correlation needs vectors of equal length".into(),
        ));
    }
    let n = x.len();
    let (mut concordant, mut discordant) = (0i64, 0i64);
    let (mut ties_x, mut ties_y) = (0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let dx = x[i].partial_cmp(&x[j]).expect("finite weights");
            let dy = y[i].partial_cmp(&y[j]).expect("finite weights");
            use std::cmp::Ordering::Equal;
            match (dx, dy) {
                (Equal, Equal) => {
                    ties_x += 1;
                    ties_y += 1;
                }
                (Equal, _) => ties_x += 1,
                (_, Equal) => ties_y += 1,
                _ if dx == dy => concordant += 1,
                _ => discordant += 1,
            }
        }
    }
    let pairs = (n * n.saturating_sub(1) / 2) as i64;
    let denom = (((pairs - ties_x) * (pairs - ties_y)) as f64).sqrt();
    if denom == 0.0 {
        return Ok(if ties_x == pairs && ties_y == pairs {
            1.0
        } else {
            0.0
        });
    }
    Ok((concordant - discordant) as f64 / denom)
}
