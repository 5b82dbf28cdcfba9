//! Transition kernels on compositions.
//!
//! * UP (`C_n -> C_{n+1}`): add a ball of color `i` with probability
//!   `(alpha + n_i) / (theta + n)`.
//! * DOWN (`C_n -> C_{n-1}`): remove a ball of color `i` with probability `n_i / n`.
//! * DOWN/UP (`C_n -> C_n`): a DOWN move followed by an UP move from the
//!   intermediate state. One ball moves from `i` to `j` with probability
//!   `(n_i / n) (n_j + alpha) / (n + theta - 1)` for `i != j`; the state is
//!   unchanged with probability `sum_i (n_i / n) (n_i + alpha - 1) / (n + theta - 1)`.
//!
//! The reverse composite UP/DOWN is available as a variant.
//!
//! Samplers use inverse-CDF over colors scanned left to right, so a fixed
//! seed reproduces a trajectory exactly.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::polya::{Composition, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Up,
    Down,
    DownUp,
}

impl std::fmt::Display for StepKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StepKind::Up => "up",
            StepKind::Down => "down",
            StepKind::DownUp => "down_up",
        })
    }
}

/// One sampled move of the chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionEvent {
    pub kind: StepKind,
    pub source: Composition,
    pub target: Composition,
    pub moved_color_out: Option<usize>,
    pub moved_color_in: Option<usize>,
}

fn require_nonempty(x: &Composition) -> Result<usize> {
    match x.level() {
        0 => Err(Error::Domain(
            "cannot remove a ball from the empty configuration".into(),
        )),
        n => Ok(n),
    }
}

/// Probability that an UP move adds a ball of color `i`.
pub fn up_prob(params: &ModelParams, x: &Composition, i: usize) -> Result<f64> {
    params.check_composition(x)?;
    params.check_color(i)?;
    Ok((params.alpha() + x.counts()[i] as f64) / (params.theta() + x.level() as f64))
}

/// Probability that a DOWN move removes a ball of color `i`.
pub fn down_prob(params: &ModelParams, x: &Composition, i: usize) -> Result<f64> {
    params.check_composition(x)?;
    params.check_color(i)?;
    let n = require_nonempty(x)?;
    Ok(x.counts()[i] as f64 / n as f64)
}

/// Probability that a DOWN/UP move takes a ball out of color `i` and puts
/// one into color `j`. For `i == j` this is color `i`'s share of the return
/// probability.
pub fn downup_prob(params: &ModelParams, x: &Composition, i: usize, j: usize) -> Result<f64> {
    params.check_composition(x)?;
    params.check_color(i)?;
    params.check_color(j)?;
    let n = require_nonempty(x)?;
    Ok(downup_term(params, x.counts(), n, i, j))
}

pub(crate) fn downup_term(
    params: &ModelParams,
    counts: &[usize],
    n: usize,
    i: usize,
    j: usize,
) -> f64 {
    let ni = counts[i] as f64;
    if ni == 0.0 {
        return 0.0;
    }
    // After removing one ball of color i the intermediate count of j is n_j - [i == j].
    let nj_after = counts[j] as f64 - if i == j { 1.0 } else { 0.0 };
    (ni / n as f64) * (nj_after + params.alpha()) / (n as f64 + params.theta() - 1.0)
}

/// Total probability that a DOWN/UP move leaves `x` unchanged.
pub fn downup_return_prob(params: &ModelParams, x: &Composition) -> Result<f64> {
    params.check_composition(x)?;
    let n = require_nonempty(x)?;
    Ok((0..params.stocks())
        .map(|i| downup_term(params, x.counts(), n, i, i))
        .sum())
}

/// Probability that an UP/DOWN move adds a ball of color `j` and then
/// removes a ball of color `i`.
pub fn updown_prob(params: &ModelParams, x: &Composition, j: usize, i: usize) -> Result<f64> {
    params.check_composition(x)?;
    params.check_color(i)?;
    params.check_color(j)?;
    Ok(updown_term(params, x.counts(), x.level(), j, i))
}

pub(crate) fn updown_term(
    params: &ModelParams,
    counts: &[usize],
    n: usize,
    j: usize,
    i: usize,
) -> f64 {
    let up = (params.alpha() + counts[j] as f64) / (params.theta() + n as f64);
    let ni_after = counts[i] as f64 + if i == j { 1.0 } else { 0.0 };
    up * ni_after / (n as f64 + 1.0)
}

fn pick_up_color<R: Rng + ?Sized>(params: &ModelParams, counts: &[usize], rng: &mut R) -> usize {
    let n: usize = counts.iter().sum();
    let total = params.theta() + n as f64;
    let u = rng.random::<f64>() * total;
    let mut cumulative = 0.0;
    for (i, &c) in counts.iter().enumerate() {
        cumulative += params.alpha() + c as f64;
        if u < cumulative {
            return i;
        }
    }
    // u landed in the rounding gap above the last cumulative sum.
    counts.len() - 1
}

fn pick_down_color<R: Rng + ?Sized>(counts: &[usize], n: usize, rng: &mut R) -> usize {
    let u = rng.random_range(0..n);
    let mut cumulative = 0;
    for (i, &c) in counts.iter().enumerate() {
        cumulative += c;
        if u < cumulative {
            return i;
        }
    }
    unreachable!("u < n = sum of counts")
}

pub fn sample_up<R: Rng + ?Sized>(
    params: &ModelParams,
    x: &Composition,
    rng: &mut R,
) -> Result<TransitionEvent> {
    params.check_composition(x)?;
    let i = pick_up_color(params, x.counts(), rng);
    let mut target = x.clone();
    target.increment(i);
    Ok(TransitionEvent {
        kind: StepKind::Up,
        source: x.clone(),
        target,
        moved_color_out: None,
        moved_color_in: Some(i),
    })
}

pub fn sample_down<R: Rng + ?Sized>(
    params: &ModelParams,
    x: &Composition,
    rng: &mut R,
) -> Result<TransitionEvent> {
    params.check_composition(x)?;
    let n = require_nonempty(x)?;
    let i = pick_down_color(x.counts(), n, rng);
    let mut target = x.clone();
    target.decrement(i);
    Ok(TransitionEvent {
        kind: StepKind::Down,
        source: x.clone(),
        target,
        moved_color_out: Some(i),
        moved_color_in: None,
    })
}

/// A DOWN sample followed by an UP sample from the intermediate state.
pub fn sample_downup<R: Rng + ?Sized>(
    params: &ModelParams,
    x: &Composition,
    rng: &mut R,
) -> Result<TransitionEvent> {
    let down = sample_down(params, x, rng)?;
    let up = sample_up(params, &down.target, rng)?;
    Ok(TransitionEvent {
        kind: StepKind::DownUp,
        source: down.source,
        target: up.target,
        moved_color_out: down.moved_color_out,
        moved_color_in: up.moved_color_in,
    })
}

/// An UP sample followed by a DOWN sample. Reported with kind
/// [`StepKind::DownUp`] since it is also a level-preserving composite.
pub fn sample_updown<R: Rng + ?Sized>(
    params: &ModelParams,
    x: &Composition,
    rng: &mut R,
) -> Result<TransitionEvent> {
    let up = sample_up(params, x, rng)?;
    let down = sample_down(params, &up.target, rng)?;
    Ok(TransitionEvent {
        kind: StepKind::DownUp,
        source: up.source,
        target: down.target,
        moved_color_out: down.moved_color_out,
        moved_color_in: up.moved_color_in,
    })
}

/// In-place DOWN/UP step used by the simulation hot loop. Returns `(out, in)`.
pub(crate) fn step_downup_in_place<R: Rng + ?Sized>(
    params: &ModelParams,
    counts: &mut [usize],
    n: usize,
    rng: &mut R,
) -> (usize, usize) {
    let out = pick_down_color(counts, n, rng);
    counts[out] -= 1;
    let into = pick_up_color(params, counts, rng);
    counts[into] += 1;
    (out, into)
}

pub(crate) fn step_up_in_place<R: Rng + ?Sized>(
    params: &ModelParams,
    counts: &mut [usize],
    rng: &mut R,
) -> usize {
    let i = pick_up_color(params, counts, rng);
    counts[i] += 1;
    i
}

pub(crate) fn step_down_in_place<R: Rng + ?Sized>(
    counts: &mut [usize],
    n: usize,
    rng: &mut R,
) -> usize {
    let i = pick_down_color(counts, n, rng);
    counts[i] -= 1;
    i
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplex::SimplexIndex;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(alpha: f64, m: usize) -> ModelParams {
        ModelParams::new(alpha, m).unwrap()
    }

    fn comp(v: &[usize]) -> Composition {
        Composition::new(v.to_vec())
    }

    #[test]
    fn up_prob_examples() {
        assert_eq!(up_prob(&params(1.0, 2), &comp(&[1, 1]), 0).unwrap(), 0.5);
        assert_eq!(up_prob(&params(3.3, 1), &comp(&[7]), 0).unwrap(), 1.0);
        assert_eq!(up_prob(&params(1.0, 2), &comp(&[0, 0]), 0).unwrap(), 0.5);
        assert!(matches!(
            up_prob(&params(1.0, 2), &comp(&[0, 0]), 2),
            Err(Error::ColorOutOfRange { .. })
        ));
    }

    #[test]
    fn down_prob_examples() {
        let p = params(1.0, 2);
        assert_eq!(down_prob(&p, &comp(&[3, 1]), 0).unwrap(), 0.75);
        assert_eq!(down_prob(&p, &comp(&[0, 5]), 0).unwrap(), 0.0);
        assert_eq!(
            down_prob(&params(1.0, 3), &comp(&[2, 2, 2]), 1).unwrap(),
            1.0 / 3.0
        );
        assert!(matches!(
            down_prob(&p, &comp(&[0, 0]), 0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn downup_prob_examples() {
        let p = params(1.0, 2);
        assert!((downup_prob(&p, &comp(&[1, 1]), 0, 1).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((downup_prob(&p, &comp(&[0, 2]), 1, 0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(downup_prob(&p, &comp(&[0, 2]), 0, 1).unwrap(), 0.0);
        assert!(downup_prob(&p, &comp(&[0, 2]), 0, 5).is_err());
        assert!(downup_prob(&p, &comp(&[0, 0]), 0, 1).is_err());
    }

    #[test]
    fn rows_are_stochastic() {
        for &alpha in &[0.3, 1.0, 2.5] {
            for m in 1..=4 {
                let p = params(alpha, m);
                for n in 0..=8 {
                    for x in SimplexIndex::new(m, n).unwrap().iter() {
                        let up: f64 = (0..m).map(|i| up_prob(&p, &x, i).unwrap()).sum();
                        assert!((up - 1.0).abs() < 1e-12);
                        let ud: f64 = (0..m)
                            .flat_map(|j| (0..m).map(move |i| (j, i)))
                            .map(|(j, i)| updown_prob(&p, &x, j, i).unwrap())
                            .sum();
                        assert!((ud - 1.0).abs() < 1e-12);
                        if n == 0 {
                            continue;
                        }
                        let down: f64 = (0..m).map(|i| down_prob(&p, &x, i).unwrap()).sum();
                        assert!((down - 1.0).abs() < 1e-12);
                        let du: f64 = (0..m)
                            .flat_map(|i| (0..m).map(move |j| (i, j)))
                            .map(|(i, j)| downup_prob(&p, &x, i, j).unwrap())
                            .sum();
                        assert!((du - 1.0).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn sample_up_from_origin_hits_unit_vector() {
        let p = params(0.7, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let ev = sample_up(&p, &Composition::zeros(5), &mut rng).unwrap();
            assert_eq!(ev.target.level(), 1);
            assert_eq!(ev.target.counts().iter().filter(|&&c| c == 1).count(), 1);
            assert_eq!(ev.target.counts()[ev.moved_color_in.unwrap()], 1);
        }
    }

    #[test]
    fn sample_down_from_last_coordinate() {
        let p = params(1.0, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = comp(&[0, 0, 0, 6]);
        for _ in 0..100 {
            let ev = sample_down(&p, &x, &mut rng).unwrap();
            assert_eq!(ev.target, comp(&[0, 0, 0, 5]));
            assert_eq!(ev.moved_color_out, Some(3));
        }
        assert!(sample_down(&p, &Composition::zeros(4), &mut rng).is_err());
        assert!(sample_downup(&p, &Composition::zeros(4), &mut rng).is_err());
    }

    #[test]
    fn event_shapes() {
        let p = params(1.5, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = comp(&[2, 3, 1]);
        for _ in 0..500 {
            let up = sample_up(&p, &x, &mut rng).unwrap();
            assert_eq!(up.target.level(), 7);
            assert_eq!(up.source.l1_distance(&up.target), 1);
            let down = sample_down(&p, &x, &mut rng).unwrap();
            assert_eq!(down.target.level(), 5);
            assert_eq!(down.source.l1_distance(&down.target), 1);
            for ev in [
                sample_downup(&p, &x, &mut rng).unwrap(),
                sample_updown(&p, &x, &mut rng).unwrap(),
            ] {
                assert_eq!(ev.target.level(), 6);
                let d = ev.source.l1_distance(&ev.target);
                assert!(d == 0 || d == 2);
                assert_eq!(d == 0, ev.moved_color_out == ev.moved_color_in);
            }
        }
    }

    #[test]
    fn downup_sampler_frequency() {
        let p = params(1.0, 2);
        let x = comp(&[1, 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let draws = 1_000_000;
        let mut moved = 0usize;
        for _ in 0..draws {
            let ev = sample_downup(&p, &x, &mut rng).unwrap();
            if ev.moved_color_out == Some(0) && ev.moved_color_in == Some(1) {
                moved += 1;
            }
        }
        let freq = moved as f64 / draws as f64;
        assert!(
            (freq - 1.0 / 3.0).abs() < 0.002,
            "empirical q(0->1) = {freq}"
        );
    }
}
