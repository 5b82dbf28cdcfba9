//! Trajectory engine: pure growth, and growth followed by fluctuation at a
//! fixed capitalization level.
//!
//! Every run starts from the empty configuration `(0, ..., 0)`.
//!
//! Seeds: a run with seed `s` draws from `ChaCha8Rng::seed_from_u64(s)` on
//! stream 0. Replica `r` of an ensemble with base seed `s` uses the same
//! generator on stream `r`, so replica 0 reproduces the single run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{step_down_in_place, step_downup_in_place, step_up_in_place, StepKind};
use crate::polya::{Composition, ModelParams};
use crate::simplex::SimplexIndex;
use crate::verify::DistributionVector;

/// Upper bound on `stocks * recorded steps` held in memory by one trajectory.
pub const MAX_RECORDED_CELLS: usize = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ScenarioMode {
    GrowthOnly,
    /// UP moves until the level reaches `threshold`, then fluctuation moves.
    TwoPhase {
        threshold: usize,
    },
}

/// How the market fluctuates once growth stops.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Fluctuation {
    /// One DOWN then one UP per step; the level stays at the threshold.
    #[default]
    DownUpPair,
    /// A single DOWN or UP per step with probability 1/2 each; the level
    /// drifts by one per step (an empty market always grows).
    Alternating,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub params: ModelParams,
    pub mode: ScenarioMode,
    pub total_steps: usize,
    pub seed: u64,
    pub record_every: usize,
    pub fluctuation: Fluctuation,
}

impl ScenarioConfig {
    pub fn growth(params: ModelParams, total_steps: usize, seed: u64) -> Self {
        Self {
            params,
            mode: ScenarioMode::GrowthOnly,
            total_steps,
            seed,
            record_every: 1,
            fluctuation: Fluctuation::default(),
        }
    }

    pub fn two_phase(params: ModelParams, threshold: usize, total_steps: usize, seed: u64) -> Self {
        Self {
            params,
            mode: ScenarioMode::TwoPhase { threshold },
            total_steps,
            seed,
            record_every: 1,
            fluctuation: Fluctuation::default(),
        }
    }

    pub fn with_record_every(mut self, record_every: usize) -> Self {
        self.record_every = record_every;
        self
    }

    pub fn with_fluctuation(mut self, fluctuation: Fluctuation) -> Self {
        self.fluctuation = fluctuation;
        self
    }

    /// Step at which growth stops, if it stops before the end.
    pub fn threshold(&self) -> Option<usize> {
        match self.mode {
            ScenarioMode::GrowthOnly => None,
            ScenarioMode::TwoPhase { threshold } => Some(threshold),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.record_every == 0 {
            return Err(Error::InvalidParameter(
                "record_every must be at least 1".into(),
            ));
        }
        if let ScenarioMode::TwoPhase { threshold } = self.mode {
            if threshold > self.total_steps {
                return Err(Error::InvalidParameter(format!(
                    "threshold level {threshold} exceeds total steps {}",
                    self.total_steps
                )));
            }
            if threshold == 0 && self.total_steps > 0 && self.fluctuation == Fluctuation::DownUpPair
            {
                return Err(Error::Domain(
                    "threshold 0 leaves no ball for the DOWN half of a DOWN/UP step".into(),
                ));
            }
        }
        let recordings = self.total_steps / self.record_every + 3;
        if recordings.saturating_mul(self.params.stocks()) > MAX_RECORDED_CELLS {
            return Err(Error::InvalidParameter(format!(
                "recording {recordings} steps of {} stocks exceeds {MAX_RECORDED_CELLS} cells; raise record_every",
                self.params.stocks()
            )));
        }
        Ok(())
    }

    fn is_recorded(&self, step: usize) -> bool {
        step.is_multiple_of(self.record_every)
            || step == self.total_steps
            || Some(step) == self.threshold()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Growth,
    Equilibrium,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Phase::Growth => "growth",
            Phase::Equilibrium => "equilibrium",
        })
    }
}

/// State after `step` moves. `kind` is the move that produced it (none at step 0).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub step: usize,
    pub phase: Phase,
    pub kind: Option<StepKind>,
    pub composition: Composition,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub scenario: ScenarioConfig,
    /// Ensemble stream this run used (0 for a single run).
    pub replica: u64,
    pub records: Vec<Record>,
    pub terminal: Composition,
}

impl Trajectory {
    /// First recorded state at or after `step`.
    pub fn record_at_or_after(&self, step: usize) -> Option<&Record> {
        let k = self.records.partition_point(|r| r.step < step);
        self.records.get(k)
    }

    /// Checks the level bookkeeping of every record.
    pub fn check_level_invariants(&self) -> Result<()> {
        let threshold = self.scenario.threshold();
        let alternating = self.scenario.fluctuation == Fluctuation::Alternating;
        for r in &self.records {
            let level = r.composition.level();
            let expected = match threshold {
                Some(t) if r.step > t => {
                    if alternating {
                        continue;
                    }
                    t
                }
                _ => r.step,
            };
            if level != expected {
                return Err(Error::Domain(format!(
                    "level {level} at step {} (expected {expected})",
                    r.step
                )));
            }
        }
        Ok(())
    }
}

/// Generator for stream `stream` of seed `seed`.
pub fn scenario_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

struct Recorder<'a> {
    cfg: &'a ScenarioConfig,
    records: Vec<Record>,
}

impl<'a> Recorder<'a> {
    fn new(cfg: &'a ScenarioConfig) -> Self {
        let capacity = cfg.total_steps / cfg.record_every + 3;
        let mut records = Vec::with_capacity(capacity);
        records.push(Record {
            step: 0,
            phase: Phase::Growth,
            kind: None,
            composition: Composition::zeros(cfg.params.stocks()),
        });
        Self { cfg, records }
    }

    fn observe(&mut self, step: usize, phase: Phase, kind: StepKind, counts: &[usize]) {
        if self.cfg.is_recorded(step) {
            self.records.push(Record {
                step,
                phase,
                kind: Some(kind),
                composition: Composition::new(counts.to_vec()),
            });
        }
    }
}

fn simulate<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    replica: u64,
    rng: &mut R,
) -> Result<Trajectory> {
    cfg.validate()?;
    let params = &cfg.params;
    let growth_steps = cfg.threshold().unwrap_or(cfg.total_steps);
    let mut counts = vec![0usize; params.stocks()];
    let mut level = 0usize;
    let mut recorder = Recorder::new(cfg);

    for step in 1..=growth_steps {
        step_up_in_place(params, &mut counts, rng);
        level += 1;
        recorder.observe(step, Phase::Growth, StepKind::Up, &counts);
    }
    for step in growth_steps + 1..=cfg.total_steps {
        let kind = match cfg.fluctuation {
            Fluctuation::DownUpPair => {
                step_downup_in_place(params, &mut counts, level, rng);
                StepKind::DownUp
            }
            Fluctuation::Alternating => {
                if level > 0 && rng.random_bool(0.5) {
                    step_down_in_place(&mut counts, level, rng);
                    level -= 1;
                    StepKind::Down
                } else {
                    step_up_in_place(params, &mut counts, rng);
                    level += 1;
                    StepKind::Up
                }
            }
        };
        recorder.observe(step, Phase::Equilibrium, kind, &counts);
    }

    Ok(Trajectory {
        scenario: *cfg,
        replica,
        records: recorder.records,
        terminal: Composition::new(counts),
    })
}

/// Pure Polya growth: `total_steps` UP moves from the empty market.
pub fn run_growth<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Result<Trajectory> {
    if cfg.mode != ScenarioMode::GrowthOnly {
        return Err(Error::InvalidParameter(
            "run_growth needs a growth-only scenario".into(),
        ));
    }
    simulate(cfg, 0, rng)
}

/// Growth up to the threshold level, then fluctuation for the remaining steps.
pub fn run_two_phase<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Result<Trajectory> {
    if !matches!(cfg.mode, ScenarioMode::TwoPhase { .. }) {
        return Err(Error::InvalidParameter(
            "run_two_phase needs a two-phase scenario".into(),
        ));
    }
    simulate(cfg, 0, rng)
}

/// Runs a scenario with the generator derived from its own seed.
pub fn run(cfg: &ScenarioConfig) -> Result<Trajectory> {
    simulate(cfg, 0, &mut scenario_rng(cfg.seed, 0))
}

/// Independent replicas, run in parallel. Replica `r` uses stream `r` of
/// `base_seed`; the result does not depend on scheduling.
pub fn run_ensemble(
    cfg: &ScenarioConfig,
    replicas: usize,
    base_seed: u64,
) -> Result<Vec<Trajectory>> {
    if replicas == 0 {
        return Err(Error::InvalidParameter(
            "ensemble needs at least one replica".into(),
        ));
    }
    cfg.validate()?;
    let cfg = ScenarioConfig {
        seed: base_seed,
        ..*cfg
    };
    (0..replicas as u64)
        .into_par_iter()
        .map(|r| simulate(&cfg, r, &mut scenario_rng(base_seed, r)))
        .collect()
}

/// Terminal states of an ensemble as an empirical distribution over `C_n`.
pub fn terminal_distribution(trajectories: &[Trajectory]) -> Result<DistributionVector> {
    let first = trajectories
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty ensemble".into()))?;
    let index = SimplexIndex::new(first.terminal.parts(), first.terminal.level())?;
    let mut counts = vec![0u64; index.size()];
    for t in trajectories {
        counts[index.rank(&t.terminal)?] += 1;
    }
    DistributionVector::from_counts(index, &counts)
}

/// Long-run occupation frequencies of the DOWN/UP chain on `C_level`.
///
/// The chain starts from a pure-growth sample at `level`, discards `burn_in`
/// composite steps, then counts the state after each of `steps` further steps.
pub fn equilibrium_occupation<R: Rng + ?Sized>(
    params: &ModelParams,
    level: usize,
    steps: usize,
    burn_in: usize,
    rng: &mut R,
) -> Result<DistributionVector> {
    if level == 0 {
        return Err(Error::Domain("DOWN/UP chain needs level >= 1".into()));
    }
    let index = SimplexIndex::new(params.stocks(), level)?;
    let mut counts = vec![0usize; params.stocks()];
    for _ in 0..level {
        step_up_in_place(params, &mut counts, rng);
    }
    for _ in 0..burn_in {
        step_downup_in_place(params, &mut counts, level, rng);
    }
    let mut visits = vec![0u64; index.size()];
    for _ in 0..steps {
        step_downup_in_place(params, &mut counts, level, rng);
        visits[index.rank_unchecked(&counts)] += 1;
    }
    DistributionVector::from_counts(index, &visits)
}
