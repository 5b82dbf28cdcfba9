use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polya::Composition;

/// Market capitalizations on one date.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketSnapshot {
    pub date: String,
    pub entries: Vec<(String, f64)>,
}

impl MarketSnapshot {
    /// Capitalizations must be positive and finite, tickers unique.
    pub fn new(date: impl Into<String>, entries: Vec<(String, f64)>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for (ticker, cap) in &entries {
            if !(cap.is_finite() && *cap > 0.0) {
                return Err(Error::Domain(format!(
                    "capitalization of {ticker} must be positive, got {cap}"
                )));
            }
            if !seen.insert(ticker.as_str()) {
                return Err(Error::Domain(format!("duplicate ticker {ticker}")));
            }
        }
        Ok(Self {
            date: date.into(),
            entries,
        })
    }

    pub fn caps(&self) -> Vec<f64> {
        self.entries.iter().map(|(_, c)| *c).collect()
    }
}

/// One row of a capital distribution curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub rank: usize,
    pub weight: f64,
    pub log10_rank: f64,
    pub log10_weight: f64,
}

/// Normalized weights ranked in descending order, with their log10 pairs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CapitalCurve {
    pub points: Vec<CurvePoint>,
}

impl CapitalCurve {
    pub fn ranks(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.rank).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.weight).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn from_composition(x: &Composition, top_k: Option<usize>) -> Result<Self> {
        let values: Vec<f64> = x.counts().iter().map(|&c| c as f64).collect();
        capital_curve(&values, top_k)
    }

    pub fn from_snapshot(s: &MarketSnapshot, top_k: Option<usize>) -> Result<Self> {
        capital_curve(&s.caps(), top_k)
    }
}

/// Builds the curve from raw sizes (ball counts or capitalizations).
///
/// Weights are normalized by the total of all entries, so zero entries count
/// toward the total but are left out of the curve. Ties keep input order.
pub fn capital_curve(values: &[f64], top_k: Option<usize>) -> Result<CapitalCurve> {
    if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::Domain(
            "sizes must be non-negative and finite".into(),
        ));
    }
    let total: f64 = values.iter().sum();
    if total <= 0.0 {
        return Err(Error::Domain(
            "capital curve needs at least one positive entry".into(),
        ));
    }
    let mut weights: Vec<f64> = values.iter().map(|v| v / total).collect();
    // Vec::sort_by is stable.
    weights.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    let keep = top_k.unwrap_or(usize::MAX);
    let points = weights
        .into_iter()
        .filter(|&w| w > 0.0)
        .take(keep)
        .enumerate()
        .map(|(k, weight)| {
            let rank = k + 1;
            CurvePoint {
                rank,
                weight,
                log10_rank: (rank as f64).log10(),
                log10_weight: weight.log10(),
            }
        })
        .collect();
    Ok(CapitalCurve { points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn composition_drops_zeros() {
        let c = CapitalCurve::from_composition(&Composition::new(vec![3, 1, 0]), None).unwrap();
        assert_eq!(c.weights(), [0.75, 0.25]);
        assert_eq!(c.ranks(), [1, 2]);
        assert_eq!(c.points[0].log10_rank, 0.0);
    }

    #[test]
    fn snapshot_weights() {
        let s = MarketSnapshot::new(
            "d",
            vec![
                ("A".into(), 100.0),
                ("B".into(), 100.0),
                ("C".into(), 200.0),
            ],
        )
        .unwrap();
        let c = CapitalCurve::from_snapshot(&s, None).unwrap();
        assert_eq!(c.weights(), [0.5, 0.25, 0.25]);
    }

    #[test]
    fn top_k_truncates() {
        let values: Vec<f64> = (1..=3000).map(|v| v as f64).collect();
        let c = capital_curve(&values, Some(100)).unwrap();
        assert_eq!(c.len(), 100);
        assert_eq!(c.points[0].weight, 3000.0 / values.iter().sum::<f64>());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(capital_curve(&[0.0, 0.0], None).is_err());
        assert!(capital_curve(&[], None).is_err());
        assert!(capital_curve(&[1.0, -1.0], None).is_err());
        assert!(MarketSnapshot::new("d", vec![("A".into(), -3.0)]).is_err());
        assert!(MarketSnapshot::new("d", vec![("A".into(), 1.0), ("A".into(), 2.0)]).is_err());
    }

    proptest! {
        #[test]
        fn curve_is_sorted_normalized_and_scale_free(
            values in proptest::collection::vec(0.0f64..1e6, 1..60),
            scale in 1e-3f64..1e3,
        ) {
            prop_assume!(values.iter().any(|&v| v > 0.0));
            let c = capital_curve(&values, None).unwrap();
            for w in c.points.windows(2) {
                prop_assert!(w[0].weight >= w[1].weight);
            }
            let sum: f64 = c.weights().iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
            for p in &c.points {
                prop_assert!((10f64.powf(p.log10_weight) - p.weight).abs() < 1e-12);
            }

            let scaled: Vec<f64> = values.iter().map(|v| v * scale).collect();
            let s = capital_curve(&scaled, None).unwrap();
            prop_assert_eq!(s.len(), c.len());
            for (a, b) in s.points.iter().zip(&c.points) {
                prop_assert!((a.weight - b.weight).abs() < 1e-12);
            }
        }
    }
}
