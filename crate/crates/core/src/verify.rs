//! Enumeration-based checks of the equilibrium identities.
//!
//! Distributions over `C_n` are dense vectors indexed by [`SimplexIndex`] and
//! kernels are sparse row-stochastic matrices (each row has at most `m^2`
//! non-zeros), so all checks are exact up to floating-point rounding.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{downup_term, updown_term, StepKind};
use crate::polya::{log_polya_pmf, Composition, ModelParams};
use crate::simplex::SimplexIndex;

/// Exact checks refuse simplexes with more states than this.
pub const MAX_EXACT_STATES: usize = 200_000;

/// Probability mass over one simplex `C_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionVector {
    index: SimplexIndex,
    probs: Vec<f64>,
}

impl DistributionVector {
    /// Entries must be non-negative and sum to 1 within `1e-10`.
    pub fn new(index: SimplexIndex, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != index.size() {
            return Err(Error::InvalidParameter(format!(
                "distribution has {} entries, simplex has {}",
                probs.len(),
                index.size()
            )));
        }
        if probs.iter().any(|&p| !(p >= 0.0 && p.is_finite())) {
            return Err(Error::Domain(
                "distribution entries must be non-negative".into(),
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::Domain(format!(
                "distribution must sum to 1, got {total}"
            )));
        }
        Ok(Self { index, probs })
    }

    /// Empirical distribution from visit counts, one per state.
    pub fn from_counts(index: SimplexIndex, counts: &[u64]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::Domain("no observations".into()));
        }
        let probs = counts.iter().map(|&c| c as f64 / total as f64).collect();
        Self::new(index, probs)
    }

    pub fn index(&self) -> &SimplexIndex {
        &self.index
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob_of(&self, x: &Composition) -> Result<f64> {
        Ok(self.probs[self.index.rank(x)?])
    }
}

/// Sparse row-stochastic transition matrix between two simplexes.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    source: SimplexIndex,
    target: SimplexIndex,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl KernelMatrix {
    fn from_rows(source: SimplexIndex, target: SimplexIndex, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut row_start = Vec::with_capacity(rows.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_start.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            for (c, v) in row {
                match cols.last() {
                    Some(&last) if last == c && cols.len() > *row_start.last().unwrap() => {
                        *vals.last_mut().unwrap() += v;
                    }
                    _ => {
                        cols.push(c);
                        vals.push(v);
                    }
                }
            }
            row_start.push(cols.len());
        }
        Self {
            source,
            target,
            row_start,
            cols,
            vals,
        }
    }

    pub fn source(&self) -> &SimplexIndex {
        &self.source
    }

    pub fn target(&self) -> &SimplexIndex {
        &self.target
    }

    pub fn rows(&self) -> usize {
        self.source.size()
    }

    pub fn cols(&self) -> usize {
        self.target.size()
    }

    /// Non-zero entries `(column, probability)` of row `a`.
    pub fn row(&self, a: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_start[a]..self.row_start[a + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        let span = self.row_start[a]..self.row_start[a + 1];
        match self.cols[span.clone()].binary_search(&b) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn row_sum(&self, a: usize) -> f64 {
        self.row(a).map(|(_, v)| v).sum()
    }

    /// Row vector times matrix, `p^T K`.
    pub fn left_multiply(&self, p: &[f64]) -> Result<Vec<f64>> {
        if p.len() != self.rows() {
            return Err(Error::InvalidParameter(format!(
                "vector of length {} does not match {} rows",
                p.len(),
                self.rows()
            )));
        }
        let mut out = vec![0.0; self.cols()];
        for (a, &pa) in p.iter().enumerate() {
            for (b, v) in self.row(a) {
                out[b] += pa * v;
            }
        }
        Ok(out)
    }

    /// Matrix product `self * other`.
    pub fn compose(&self, other: &KernelMatrix) -> Result<KernelMatrix> {
        if self.target != other.source {
            return Err(Error::InvalidParameter(
                "kernel product needs matching intermediate simplex".into(),
            ));
        }
        let rows = (0..self.rows())
            .into_par_iter()
            .map(|a| {
                self.row(a)
                    .flat_map(|(k, v)| other.row(k).map(move |(b, w)| (b, v * w)))
                    .collect()
            })
            .collect();
        Ok(KernelMatrix::from_rows(
            self.source.clone(),
            other.target.clone(),
            rows,
        ))
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.rows())
            .map(|a| {
                let mut dense = vec![0.0; self.cols()];
                for (b, v) in self.row(a) {
                    dense[b] = v;
                }
                dense
            })
            .collect()
    }
}

fn guarded_index(m: usize, n: usize) -> Result<SimplexIndex> {
    let index = SimplexIndex::new(m, n)?;
    if index.size() > MAX_EXACT_STATES {
        return Err(Error::SimplexTooLarge {
            parts: m,
            level: n,
            what: format!(
                "{} states exceeds the exact-verification limit of {MAX_EXACT_STATES}; use Monte Carlo checks instead",
                index.size()
            ),
        });
    }
    Ok(index)
}

fn build_rows<F>(source: &SimplexIndex, row_fn: F) -> Vec<Vec<(usize, f64)>>
where
    F: Fn(&[usize]) -> Vec<(usize, f64)> + Sync,
{
    (0..source.size())
        .into_par_iter()
        .map(|a| {
            let x = source.unrank(a).expect("a < size");
            row_fn(x.counts())
        })
        .collect()
}

/// Materializes one of the three kernels starting from level `n`.
pub fn build_kernel(params: &ModelParams, kind: StepKind, n: usize) -> Result<KernelMatrix> {
    let m = params.stocks();
    let source = guarded_index(m, n)?;
    match kind {
        StepKind::Up => {
            let target = guarded_index(m, n + 1)?;
            let rows = build_rows(&source, |x| {
                let mut y = x.to_vec();
                let denom = params.theta() + n as f64;
                (0..m)
                    .map(|i| {
                        y[i] += 1;
                        let b = target.rank_unchecked(&y);
                        y[i] -= 1;
                        (b, (params.alpha() + x[i] as f64) / denom)
                    })
                    .collect()
            });
            Ok(KernelMatrix::from_rows(source, target, rows))
        }
        StepKind::Down => {
            if n == 0 {
                return Err(Error::Domain("DOWN kernel needs level n >= 1".into()));
            }
            let target = guarded_index(m, n - 1)?;
            let rows = build_rows(&source, |x| {
                let mut y = x.to_vec();
                (0..m)
                    .filter(|&i| x[i] > 0)
                    .map(|i| {
                        y[i] -= 1;
                        let b = target.rank_unchecked(&y);
                        y[i] += 1;
                        (b, x[i] as f64 / n as f64)
                    })
                    .collect()
            });
            Ok(KernelMatrix::from_rows(source, target, rows))
        }
        StepKind::DownUp => {
            if n == 0 {
                return Err(Error::Domain("DOWN/UP kernel needs level n >= 1".into()));
            }
            let target = source.clone();
            let rows = build_rows(&source, |x| {
                composite_row(&target, x, |i, j| downup_term(params, x, n, i, j))
            });
            Ok(KernelMatrix::from_rows(source, target, rows))
        }
    }
}

/// The UP/DOWN composite on `C_n` (add a ball, then remove one).
pub fn build_updown_kernel(params: &ModelParams, n: usize) -> Result<KernelMatrix> {
    let source = guarded_index(params.stocks(), n)?;
    let target = source.clone();
    let rows = build_rows(&source, |x| {
        // term(i, j): ball leaves color i, enters color j.
        composite_row(&target, x, |i, j| updown_term(params, x, n, j, i))
    });
    Ok(KernelMatrix::from_rows(source, target, rows))
}

// Row of a level-preserving composite: x - e_i + e_j with probability term(i, j).
fn composite_row<F>(index: &SimplexIndex, x: &[usize], term: F) -> Vec<(usize, f64)>
where
    F: Fn(usize, usize) -> f64,
{
    let m = x.len();
    let here = index.rank_unchecked(x);
    let mut row = Vec::with_capacity(m * m);
    let mut stay = 0.0;
    let mut y = x.to_vec();
    for i in 0..m {
        for j in 0..m {
            let p = term(i, j);
            if i == j {
                stay += p;
                continue;
            }
            if p == 0.0 || x[i] == 0 {
                continue;
            }
            y[i] -= 1;
            y[j] += 1;
            row.push((index.rank_unchecked(&y), p));
            y[i] += 1;
            y[j] -= 1;
        }
    }
    row.push((here, stay));
    row
}

/// The Polya pmf over all of `C_n` as a dense vector.
pub fn polya_distribution(params: &ModelParams, n: usize) -> Result<DistributionVector> {
    let index = guarded_index(params.stocks(), n)?;
    let probs = index
        .iter()
        .map(|x| log_polya_pmf(params, &x).map(f64::exp))
        .collect::<Result<Vec<_>>>()?;
    DistributionVector::new(index, probs)
}

/// Parameters echoed into every report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReportParams {
    pub alpha: f64,
    pub stocks: usize,
    pub theta: f64,
    pub level: usize,
}

impl ReportParams {
    fn new(params: &ModelParams, level: usize) -> Self {
        Self {
            alpha: params.alpha(),
            stocks: params.stocks(),
            theta: params.theta(),
            level,
        }
    }
}

/// Outcome of one check: the largest residual and where it occurred.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub params: ReportParams,
    pub residual: f64,
    pub argmax_state: Vec<Composition>,
}

impl CheckReport {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.residual < tolerance
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> (f64, usize) {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .enumerate()
        .fold(
            (0.0, 0),
            |best, (k, d)| if d > best.0 { (d, k) } else { best },
        )
}

fn stationarity_report(
    name: &str,
    params: &ModelParams,
    n: usize,
    kernel: &KernelMatrix,
) -> Result<CheckReport> {
    let pi = polya_distribution(params, n)?;
    let moved = kernel.left_multiply(pi.probs())?;
    let (residual, at) = max_abs_diff(&moved, pi.probs());
    Ok(CheckReport {
        check: name.into(),
        params: ReportParams::new(params, n),
        residual,
        argmax_state: vec![pi.index().unrank(at)?],
    })
}

/// `|| pi P - pi ||_inf` for the DOWN/UP kernel on `C_n`.
pub fn check_stationarity(params: &ModelParams, n: usize) -> Result<CheckReport> {
    let kernel = build_kernel(params, StepKind::DownUp, n)?;
    stationarity_report("stationarity", params, n, &kernel)
}

/// Same as [`check_stationarity`] for the UP/DOWN composite.
pub fn check_stationarity_updown(params: &ModelParams, n: usize) -> Result<CheckReport> {
    let kernel = build_updown_kernel(params, n)?;
    stationarity_report("stationarity_updown", params, n, &kernel)
}

fn detailed_balance_report(
    name: &str,
    params: &ModelParams,
    n: usize,
    kernel: &KernelMatrix,
) -> Result<CheckReport> {
    let pi = polya_distribution(params, n)?;
    let p = pi.probs();
    // Pairs with no direct transition in either direction have zero flow both
    // ways, so scanning the non-zeros of every row covers all ordered pairs.
    let mut worst = (0.0, 0, 0);
    for a in 0..kernel.rows() {
        for (b, q_ab) in kernel.row(a) {
            let violation = (p[a] * q_ab - p[b] * kernel.get(b, a)).abs();
            if violation > worst.0 {
                worst = (violation, a, b);
            }
        }
    }
    let index = pi.index();
    Ok(CheckReport {
        check: name.into(),
        params: ReportParams::new(params, n),
        residual: worst.0,
        argmax_state: vec![index.unrank(worst.1)?, index.unrank(worst.2)?],
    })
}

/// Largest `|pi(a) q(a->b) - pi(b) q(b->a)|` over state pairs for DOWN/UP on `C_n`.
pub fn check_detailed_balance(params: &ModelParams, n: usize) -> Result<CheckReport> {
    let kernel = build_kernel(params, StepKind::DownUp, n)?;
    detailed_balance_report("detailed_balance", params, n, &kernel)
}

/// Same as [`check_detailed_balance`] for the UP/DOWN composite.
pub fn check_detailed_balance_updown(params: &ModelParams, n: usize) -> Result<CheckReport> {
    let kernel = build_updown_kernel(params, n)?;
    detailed_balance_report("detailed_balance_updown", params, n, &kernel)
}

/// Pushes `pi_n` through the UP kernel (compare with `pi_{n+1}`) or the DOWN
/// kernel (compare with `pi_{n-1}`).
pub fn check_pushforward(params: &ModelParams, n: usize, kind: StepKind) -> Result<CheckReport> {
    let (name, target_level) = match kind {
        StepKind::Up => ("pushforward_up", n + 1),
        StepKind::Down if n >= 1 => ("pushforward_down", n - 1),
        StepKind::Down => return Err(Error::Domain("DOWN pushforward needs level n >= 1".into())),
        StepKind::DownUp => {
            return Err(Error::InvalidParameter(
                "pushforward compares adjacent levels; use check_stationarity for DOWN/UP".into(),
            ))
        }
    };
    let kernel = build_kernel(params, kind, n)?;
    let from = polya_distribution(params, n)?;
    let to = polya_distribution(params, target_level)?;
    let pushed = kernel.left_multiply(from.probs())?;
    let (residual, at) = max_abs_diff(&pushed, to.probs());
    Ok(CheckReport {
        check: name.into(),
        params: ReportParams::new(params, n),
        residual,
        argmax_state: vec![to.index().unrank(at)?],
    })
}

/// Largest `|pi_{n-1}(a) u(a -> a + e_i) - pi_n(a + e_i) d(a + e_i -> a)|`.
pub fn check_cross_level_balance(params: &ModelParams, n: usize) -> Result<CheckReport> {
    if n == 0 {
        return Err(Error::Domain(
            "cross-level balance needs level n >= 1".into(),
        ));
    }
    let lower = polya_distribution(params, n - 1)?;
    let upper = polya_distribution(params, n)?;
    let m = params.stocks();
    let mut worst = (0.0, 0, 0);
    for (a, x) in lower.index().iter().enumerate() {
        let mut y = x.counts().to_vec();
        for i in 0..m {
            let up = (params.alpha() + y[i] as f64) / (params.theta() + (n - 1) as f64);
            y[i] += 1;
            let b = upper.index().rank_unchecked(&y);
            let down = y[i] as f64 / n as f64;
            y[i] -= 1;
            let violation = (lower.probs()[a] * up - upper.probs()[b] * down).abs();
            if violation > worst.0 {
                worst = (violation, a, b);
            }
        }
    }
    Ok(CheckReport {
        check: "cross_level_balance".into(),
        params: ReportParams::new(params, n),
        residual: worst.0,
        argmax_state: vec![
            lower.index().unrank(worst.1)?,
            upper.index().unrank(worst.2)?,
        ],
    })
}

/// All checks at one level, in a fixed order. UP pushforward starts from
/// `n - 1` so every check targets the same level `n`.
pub fn run_all_checks(params: &ModelParams, n: usize) -> Result<Vec<CheckReport>> {
    if n == 0 {
        return Err(Error::Domain("verification needs level n >= 1".into()));
    }
    Ok(vec![
        check_stationarity(params, n)?,
        check_stationarity_updown(params, n)?,
        check_detailed_balance(params, n)?,
        check_detailed_balance_updown(params, n)?,
        check_pushforward(params, n - 1, StepKind::Up)?,
        check_pushforward(params, n, StepKind::Down)?,
        check_cross_level_balance(params, n)?,
    ])
}

/// `1/2 sum |p_i - q_i|`.
pub fn total_variation(p: &DistributionVector, q: &DistributionVector) -> Result<f64> {
    if p.index != q.index {
        return Err(Error::InvalidParameter(
            "total variation needs distributions over the same simplex".into(),
        ));
    }
    Ok(0.5
        * p.probs
            .iter()
            .zip(&q.probs)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(alpha: f64, m: usize) -> ModelParams {
        ModelParams::new(alpha, m).unwrap()
    }

    fn comp(v: &[usize]) -> Composition {
        Composition::new(v.to_vec())
    }

    #[test]
    fn up_kernel_small_case() {
        let k = build_kernel(&params(1.0, 2), StepKind::Up, 1).unwrap();
        let dense = k.to_dense();
        let expected = [[2.0 / 3.0, 1.0 / 3.0, 0.0], [0.0, 1.0 / 3.0, 2.0 / 3.0]];
        assert_eq!(dense.len(), 2);
        for (row, exp) in dense.iter().zip(&expected) {
            for (v, e) in row.iter().zip(exp) {
                assert!((v - e).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn single_color_kernels_are_identity() {
        let p = params(2.0, 1);
        for n in 1..6 {
            for kind in [StepKind::Up, StepKind::Down, StepKind::DownUp] {
                let k = build_kernel(&p, kind, n).unwrap();
                assert_eq!(k.to_dense(), vec![vec![1.0]]);
            }
        }
        assert_eq!(
            build_kernel(&p, StepKind::Up, 0).unwrap().to_dense(),
            vec![vec![1.0]]
        );
    }

    #[test]
    fn kernel_rejects_level_zero() {
        let p = params(1.0, 2);
        assert!(build_kernel(&p, StepKind::Down, 0).is_err());
        assert!(build_kernel(&p, StepKind::DownUp, 0).is_err());
    }

    #[test]
    fn guard_refuses_huge_simplex() {
        let p = params(1.0, 6);
        // C(105, 5) states, far above the limit.
        assert!(matches!(
            polya_distribution(&p, 100),
            Err(Error::SimplexTooLarge { .. })
        ));
    }

    #[test]
    fn downup_equals_down_then_up_small() {
        let p = params(1.0, 2);
        let du = build_kernel(&p, StepKind::DownUp, 2).unwrap().to_dense();
        let down = build_kernel(&p, StepKind::Down, 2).unwrap().to_dense();
        let up = build_kernel(&p, StepKind::Up, 1).unwrap().to_dense();
        for a in 0..3 {
            for b in 0..3 {
                let prod: f64 = (0..2).map(|k| down[a][k] * up[k][b]).sum();
                assert!((du[a][b] - prod).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn distribution_examples() {
        let d = polya_distribution(&params(1.0, 2), 2).unwrap();
        for &v in d.probs() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
        assert_eq!(
            polya_distribution(&params(3.0, 1), 7).unwrap().probs(),
            &[1.0]
        );
        let d = polya_distribution(&params(2.0, 2), 2).unwrap();
        for (v, e) in d.probs().iter().zip([0.3, 0.4, 0.3]) {
            assert!((v - e).abs() < 1e-15);
        }
    }

    #[test]
    fn stationarity_examples() {
        assert!(check_stationarity(&params(1.0, 2), 10).unwrap().residual < 1e-12);
        assert!(check_stationarity(&params(5.0, 3), 20).unwrap().residual < 1e-12);
        assert_eq!(
            check_stationarity(&params(0.4, 1), 9).unwrap().residual,
            0.0
        );
    }

    #[test]
    fn detailed_balance_examples() {
        let p = params(1.0, 2);
        let pi = polya_distribution(&p, 2).unwrap();
        let k = build_kernel(&p, StepKind::DownUp, 2).unwrap();
        let a = pi.index().rank(&comp(&[1, 1])).unwrap();
        let b = pi.index().rank(&comp(&[0, 2])).unwrap();
        assert!((pi.probs()[a] * k.get(a, b) - 1.0 / 9.0).abs() < 1e-15);
        assert!((pi.probs()[b] * k.get(b, a) - 1.0 / 9.0).abs() < 1e-15);

        let p3 = params(1.0, 3);
        let k = build_kernel(&p3, StepKind::DownUp, 4).unwrap();
        let idx = k.source();
        for (a, x) in idx.iter().enumerate() {
            for (b, y) in idx.iter().enumerate() {
                if x.l1_distance(&y) > 2 {
                    assert_eq!(k.get(a, b), 0.0);
                }
            }
        }

        let r = check_detailed_balance(&params(2.0, 3), 12).unwrap();
        assert!(r.residual < 1e-12);
        assert_eq!(r.argmax_state.len(), 2);
    }

    #[test]
    fn pushforward_examples() {
        let r = check_pushforward(&params(1.0, 2), 1, StepKind::Up).unwrap();
        assert!(r.residual < 1e-15);
        assert_eq!(
            check_pushforward(&params(1.0, 1), 3, StepKind::Down)
                .unwrap()
                .residual,
            0.0
        );
        assert!(
            check_pushforward(&params(0.5, 4), 8, StepKind::Down)
                .unwrap()
                .residual
                < 1e-12
        );
        assert!(check_pushforward(&params(1.0, 2), 0, StepKind::Down).is_err());
        assert!(check_pushforward(&params(1.0, 2), 3, StepKind::DownUp).is_err());
    }

    #[test]
    fn cross_level_examples() {
        let p = params(1.0, 2);
        let lower = polya_distribution(&p, 1).unwrap();
        let upper = polya_distribution(&p, 2).unwrap();
        let a = comp(&[0, 1]);
        let b = comp(&[1, 1]);
        let forward = lower.prob_of(&a).unwrap() * crate::kernels::up_prob(&p, &a, 0).unwrap();
        let backward = upper.prob_of(&b).unwrap() * crate::kernels::down_prob(&p, &b, 0).unwrap();
        assert!((forward - 1.0 / 6.0).abs() < 1e-15);
        assert!((forward - backward).abs() < 1e-15);

        assert!(
            check_cross_level_balance(&params(3.0, 3), 15)
                .unwrap()
                .residual
                < 1e-12
        );
        assert!(check_cross_level_balance(&p, 0).is_err());
    }

    #[test]
    fn total_variation_examples() {
        let idx = SimplexIndex::new(2, 2).unwrap();
        let u = DistributionVector::new(idx.clone(), vec![1.0 / 3.0; 3]).unwrap();
        let q = DistributionVector::new(idx.clone(), vec![0.3, 0.4, 0.3]).unwrap();
        assert_eq!(total_variation(&u, &u).unwrap(), 0.0);
        assert!((total_variation(&u, &q).unwrap() - 1.0 / 15.0).abs() < 1e-15);
        let a = DistributionVector::new(idx.clone(), vec![1.0, 0.0, 0.0]).unwrap();
        let b = DistributionVector::new(idx, vec![0.0, 0.0, 1.0]).unwrap();
        assert_eq!(total_variation(&a, &b).unwrap(), 1.0);

        let other =
            DistributionVector::new(SimplexIndex::new(2, 1).unwrap(), vec![0.5, 0.5]).unwrap();
        assert!(total_variation(&u, &other).is_err());
    }

    #[test]
    fn distribution_vector_validation() {
        let idx = SimplexIndex::new(2, 1).unwrap();
        assert!(DistributionVector::new(idx.clone(), vec![0.5, 0.6]).is_err());
        assert!(DistributionVector::new(idx.clone(), vec![1.5, -0.5]).is_err());
        assert!(DistributionVector::new(idx.clone(), vec![1.0]).is_err());
        assert!(DistributionVector::from_counts(idx, &[0, 0]).is_err());
    }

    #[test]
    fn reports_serialize_to_expected_fields() {
        let r = check_stationarity(&params(1.0, 2), 3).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys, ["argmax_state", "check", "params", "residual"]);
        assert_eq!(v["params"]["theta"], 2.0);
        assert!(v["argmax_state"][0].is_array());
    }

    fn dist_strategy() -> impl Strategy<Value = DistributionVector> {
        proptest::collection::vec(0.0f64..1.0, 6).prop_filter_map("non-zero mass", |raw| {
            let total: f64 = raw.iter().sum();
            if total <= 1e-9 {
                return None;
            }
            let probs = raw.iter().map(|v| v / total).collect();
            DistributionVector::new(SimplexIndex::new(3, 2).unwrap(), probs).ok()
        })
    }

    proptest! {
        #[test]
        fn tv_is_a_metric(p in dist_strategy(), q in dist_strategy(), r in dist_strategy()) {
            let pq = total_variation(&p, &q).unwrap();
            let qp = total_variation(&q, &p).unwrap();
            prop_assert!((pq - qp).abs() < 1e-15);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&pq));
            prop_assert!(total_variation(&p, &p).unwrap() < 1e-15);
            let pr = total_variation(&p, &r).unwrap();
            let rq = total_variation(&r, &q).unwrap();
            prop_assert!(pq <= pr + rq + 1e-12);
        }
    }
}
