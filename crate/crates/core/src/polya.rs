//! Exact Polya urn probabilities in log space.
//!
//! With `m` colors of equal prior weight `alpha` (total `theta = m * alpha`),
//! the probability of reaching composition `(n_1, ..., n_m)` after
//! `n = sum n_i` draws is
//!
//! ```text
//! p(n) = n! / theta^[n] * prod_i alpha^[n_i] / n_i!
//! ```
//!
//! where `a^[k] = a (a + 1) ... (a + k - 1)` is the rising factorial.
//! Everything here is computed as a natural logarithm; `theta^[n]` leaves the
//! range of `f64` around `n = 170`.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Rising factorials with at most this many factors are summed term by term;
/// longer ones go through the log-gamma difference.
const DIRECT_SUM_MAX_FACTORS: usize = 64;

/// Symmetric prior: `m` colors, each with weight `alpha`.
///
/// `theta` is always derived as `m * alpha` and cannot be set on its own.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    alpha: f64,
    stocks: usize,
}

impl ModelParams {
    pub fn new(alpha: f64, stocks: usize) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must be a positive finite number, got {alpha}"
            )));
        }
        if stocks == 0 {
            return Err(Error::InvalidParameter(
                "number of colors must be at least 1".into(),
            ));
        }
        Ok(Self { alpha, stocks })
    }

    /// Prior weight of each color.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Number of colors (stocks), `m`.
    pub fn stocks(&self) -> usize {
        self.stocks
    }

    /// Total prior weight `m * alpha`.
    pub fn theta(&self) -> f64 {
        self.stocks as f64 * self.alpha
    }

    pub(crate) fn check_color(&self, color: usize) -> Result<()> {
        if color >= self.stocks {
            return Err(Error::ColorOutOfRange {
                color,
                stocks: self.stocks,
            });
        }
        Ok(())
    }

    pub(crate) fn check_composition(&self, x: &Composition) -> Result<()> {
        if x.parts() != self.stocks {
            return Err(Error::IncompatibleComposition {
                found: x.counts().to_vec(),
                level: x.level(),
                parts: self.stocks,
            });
        }
        Ok(())
    }
}

impl Serialize for ModelParams {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("ModelParams", 3)?;
        s.serialize_field("alpha", &self.alpha)?;
        s.serialize_field("stocks", &self.stocks)?;
        s.serialize_field("theta", &self.theta())?;
        s.end()
    }
}

/// Ball counts per color, `(n_1, ..., n_m)`. The chain state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Composition(Vec<usize>);

impl Composition {
    pub fn new(counts: Vec<usize>) -> Self {
        Self(counts)
    }

    /// The empty configuration `(0, ..., 0)`.
    pub fn zeros(parts: usize) -> Self {
        Self(vec![0; parts])
    }

    pub fn counts(&self) -> &[usize] {
        &self.0
    }

    pub fn parts(&self) -> usize {
        self.0.len()
    }

    /// Total number of balls, `n`.
    pub fn level(&self) -> usize {
        self.0.iter().sum()
    }

    /// Counts divided by the level. All zeros for the empty configuration.
    pub fn weights(&self) -> Vec<f64> {
        let n = self.level();
        if n == 0 {
            return vec![0.0; self.0.len()];
        }
        let n = n as f64;
        self.0.iter().map(|&c| c as f64 / n).collect()
    }

    /// L1 distance to another composition with the same number of parts.
    pub fn l1_distance(&self, other: &Composition) -> usize {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(&a, &b)| a.abs_diff(b))
            .sum()
    }

    pub(crate) fn increment(&mut self, color: usize) {
        self.0[color] += 1;
    }

    pub(crate) fn decrement(&mut self, color: usize) {
        self.0[color] -= 1;
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

impl From<Vec<usize>> for Composition {
    fn from(counts: Vec<usize>) -> Self {
        Self(counts)
    }
}

impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for Composition {
    type Err = Error;

    /// Parses a comma-separated list such as `3,2,1`.
    fn from_str(s: &str) -> Result<Self> {
        let counts = s
            .split(',')
            .map(|part| {
                part.trim().parse::<usize>().map_err(|_| {
                    Error::InvalidParameter(format!(
                        "composition entries must be non-negative integers, got {part:?}"
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self(counts))
    }
}

/// `ln(a (a + 1) ... (a + k - 1))`; zero for `k = 0`.
pub fn log_rising_factorial(a: f64, k: usize) -> Result<f64> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::Domain(format!(
            "rising factorial base must be positive, got {a}"
        )));
    }
    Ok(if k <= DIRECT_SUM_MAX_FACTORS {
        log_rising_factorial_direct(a, k)
    } else {
        log_rising_factorial_gamma(a, k)
    })
}

pub(crate) fn log_rising_factorial_direct(a: f64, k: usize) -> f64 {
    (0..k).map(|j| (a + j as f64).ln()).sum()
}

pub(crate) fn log_rising_factorial_gamma(a: f64, k: usize) -> f64 {
    libm::lgamma(a + k as f64) - libm::lgamma(a)
}

/// `ln(n!)`.
pub fn log_factorial(n: usize) -> f64 {
    if n <= DIRECT_SUM_MAX_FACTORS {
        log_rising_factorial_direct(1.0, n)
    } else {
        libm::lgamma(n as f64 + 1.0)
    }
}

/// Log of the multinomial coefficient `n! / (n_1! ... n_m!)`.
pub fn log_multinomial(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    log_factorial(n)
        - sorted(counts)
            .iter()
            .map(|&c| log_factorial(c))
            .sum::<f64>()
}

// Per-color terms are summed in sorted order so permuting the counts gives
// bit-identical results.
fn sorted(counts: &[usize]) -> Vec<usize> {
    let mut v = counts.to_vec();
    v.sort_unstable();
    v
}

// prod_i alpha^[k_i] / theta^[n]; alpha and theta are validated positive.
fn log_ordered_prob(params: &ModelParams, counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    let numerator: f64 = sorted(counts)
        .iter()
        .map(|&k| log_rising_factorial(params.alpha, k).expect("alpha > 0"))
        .sum();
    numerator - log_rising_factorial(params.theta(), n).expect("theta > 0")
}

/// Log-probability of composition `x` under the Polya urn.
pub fn log_polya_pmf(params: &ModelParams, x: &Composition) -> Result<f64> {
    params.check_composition(x)?;
    Ok(log_multinomial(x.counts()) + log_ordered_prob(params, x.counts()))
}

/// Probability of composition `x`; `exp` of [`log_polya_pmf`].
pub fn polya_pmf(params: &ModelParams, x: &Composition) -> Result<f64> {
    log_polya_pmf(params, x).map(f64::exp)
}

/// Log-probability of drawing the given colors in exactly this order.
///
/// The urn is exchangeable, so only the per-color counts matter.
pub fn log_sequence_prob(params: &ModelParams, colors: &[usize]) -> Result<f64> {
    let mut counts = vec![0usize; params.stocks];
    for &c in colors {
        params.check_color(c)?;
        counts[c] += 1;
    }
    Ok(log_ordered_prob(params, &counts))
}

/// Log-density of the symmetric Dirichlet distribution `Dir(alpha, ..., alpha)`
/// at a point `w` of the probability simplex.
///
/// Boundary points are accepted when `alpha >= 1`: the density there is
/// `0` (log `-inf`) for `alpha > 1` and `Gamma(m)` for `alpha = 1`.
pub fn log_dirichlet_density(params: &ModelParams, w: &[f64]) -> Result<f64> {
    if w.len() != params.stocks {
        return Err(Error::InvalidParameter(format!(
            "point has {} coordinates, expected {}",
            w.len(),
            params.stocks
        )));
    }
    if w.iter().any(|&x| !x.is_finite() || x < 0.0) {
        return Err(Error::Domain(format!(
            "Dirichlet point must have non-negative finite coordinates, got {w:?}"
        )));
    }
    let total: f64 = w.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "Dirichlet point must sum to 1, got {total}"
        )));
    }
    let alpha = params.alpha;
    if alpha < 1.0 && w.contains(&0.0) {
        return Err(Error::Domain(format!(
            "Dirichlet density is singular on the boundary for alpha = {alpha} < 1"
        )));
    }
    let norm = libm::lgamma(params.theta()) - params.stocks as f64 * libm::lgamma(alpha);
    let shape: f64 = if alpha == 1.0 {
        0.0
    } else {
        w.iter().map(|&x| (alpha - 1.0) * x.ln()).sum()
    };
    Ok(norm + shape)
}
