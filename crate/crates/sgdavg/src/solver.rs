//! Projected stochastic gradient descent with simultaneous tracking of all
//! requested averaging schemes in a single pass.

use crate::averaging::{suffix_len, AveragingScheme, EpochSuffixAverage};
use crate::domain::Domain;
use crate::problems::Problem;
use crate::rng::RngStream;
use crate::schedule::StepSchedule;
use crate::vector::Vector;
use std::collections::{BTreeSet, HashMap};
use thiserror::Error;

/// Gaps this slightly negative are floating-point noise and clamp to zero;
/// anything more negative means the declared optimum is wrong.
const GAP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("oracle returned a non-finite gradient at round {round}")]
    NonFiniteGradient { round: u64 },
    #[error("scheme {scheme}: negative gap {gap:e}; declared optimum cannot be right")]
    NegativeGap { scheme: String, gap: f64 },
    #[error("initial point lies outside the domain")]
    InfeasibleStart,
    #[error("uniform initialization requires a bounded domain")]
    UnboundedInit,
    #[error("horizon must be at least 1")]
    EmptyHorizon,
    #[error("checkpoint {round} outside 1..=T or out of order")]
    BadCheckpoint { round: u64 },
    #[error("distance tracking requires a known optimum")]
    OptimumUnknown,
}

/// Where a run starts.
#[derive(Debug, Clone, PartialEq)]
pub enum InitPolicy {
    Origin,
    UniformInDomain,
    Explicit(Vector),
}

impl InitPolicy {
    pub fn label(&self) -> &'static str {
        match self {
            InitPolicy::Origin => "origin",
            InitPolicy::UniformInDomain => "uniform",
            InitPolicy::Explicit(_) => "explicit",
        }
    }
}

/// Everything a single SGD run needs besides the problem itself.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Number of oracle calls `T`.
    pub horizon: u64,
    pub schedule: StepSchedule,
    pub schemes: Vec<AveragingScheme>,
    pub init: InitPolicy,
    /// Rounds at which per-scheme values and the iterate distance are
    /// recorded; strictly ascending, within `1..=T`.
    pub checkpoints: Vec<u64>,
    /// The run's private random stream.
    pub rng: RngStream,
    /// Keep `w_1..w_{T+1}` in the result (test hook for batch
    /// recomputation; memory grows with `T`).
    pub store_iterates: bool,
}

impl RunConfig {
    pub fn new(
        horizon: u64,
        schedule: StepSchedule,
        schemes: Vec<AveragingScheme>,
        rng: RngStream,
    ) -> Self {
        Self {
            horizon,
            schedule,
            schemes,
            init: InitPolicy::Origin,
            checkpoints: Vec::new(),
            rng,
            store_iterates: false,
        }
    }
}

/// Final output of one scheme.
#[derive(Debug, Clone)]
pub struct SchemeOutput {
    pub label: String,
    pub point: Vector,
    pub objective: f64,
    /// `F(point) - F(w*)` clamped at zero, when the optimum is known.
    pub gap: Option<f64>,
}

impl SchemeOutput {
    /// Gap when the optimum is known, raw objective otherwise; the quantity
    /// reports aggregate.
    pub fn value(&self) -> f64 {
        self.gap.unwrap_or(self.objective)
    }
}

/// Snapshot of all schemes at one recorded round.
#[derive(Debug, Clone)]
pub struct CheckpointRecord {
    pub round: u64,
    /// Per-scheme gap (or raw objective when no optimum is known), aligned
    /// with the result's scheme order.
    pub values: Vec<f64>,
    /// `||w_t - w*||^2` of the queried iterate, when the optimum is known.
    pub dist_sq: Option<f64>,
}

/// Outcome of one run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub schemes: Vec<SchemeOutput>,
    pub checkpoints: Vec<CheckpointRecord>,
    /// `max_{1 <= t <= T} t * ||w_t - w*||^2`, tracked every round when the
    /// optimum is known.
    pub max_scaled_distance: Option<f64>,
    pub oracle_calls: u64,
    /// `(base_seed, replicate_index)` of the stream that drove the run.
    pub seed: (u64, u64),
    /// Populated only by the epoch-GD baseline.
    pub epoch_lengths: Option<Vec<u64>>,
    /// `w_1..w_{T+1}` when `store_iterates` was set.
    pub iterates: Option<Vec<Vector>>,
}

/// `||w_t - w*||^2` for a problem with a known optimum.
pub fn track_distance(problem: &Problem, w: &Vector) -> Result<f64, SolverError> {
    let w_star = problem
        .optimum
        .as_ref()
        .ok_or(SolverError::OptimumUnknown)?;
    Ok(w.dist_sq(w_star))
}

pub(crate) fn initial_point(
    problem: &Problem,
    init: &InitPolicy,
    rng: &mut RngStream,
) -> Result<Vector, SolverError> {
    let w = match init {
        InitPolicy::Origin => Vector::zeros(problem.dim),
        InitPolicy::Explicit(v) => {
            if v.dim() != problem.dim {
                return Err(SolverError::InfeasibleStart);
            }
            v.clone()
        }
        InitPolicy::UniformInDomain => match problem.domain {
            Domain::Box { lower, upper } => Vector::new(
                (0..problem.dim)
                    .map(|_| rng.uniform(lower, upper))
                    .collect(),
            ),
            Domain::Ball { radius } => loop {
                let v = Vector::new(
                    (0..problem.dim)
                        .map(|_| rng.uniform(-radius, radius))
                        .collect(),
                );
                if v.norm() <= radius {
                    break v;
                }
            },
            Domain::Unconstrained => return Err(SolverError::UnboundedInit),
        },
    };
    if problem.domain.contains(&w) {
        Ok(w)
    } else {
        Err(SolverError::InfeasibleStart)
    }
}

pub(crate) fn gap_for(
    problem: &Problem,
    label: &str,
    objective: f64,
) -> Result<Option<f64>, SolverError> {
    match problem.f_min {
        Some(f_min) => {
            let gap = objective - f_min;
            if gap < -GAP_TOLERANCE {
                Err(SolverError::NegativeGap {
                    scheme: label.to_string(),
                    gap,
                })
            } else {
                Ok(Some(gap.max(0.0)))
            }
        }
        None => Ok(None),
    }
}

fn validate_checkpoints(checkpoints: &[u64], horizon: u64) -> Result<(), SolverError> {
    let mut prev = 0;
    for &c in checkpoints {
        if c < 1 || c > horizon || c <= prev {
            return Err(SolverError::BadCheckpoint { round: c });
        }
        prev = c;
    }
    Ok(())
}

/// Runs projected SGD for exactly `T` oracle calls, producing iterates
/// `w_1..w_{T+1}` and maintaining every requested scheme incrementally:
/// `Last` is `w_{T+1}`, `FullAverage` the mean of `w_1..w_T`,
/// `SuffixAverage(alpha)` the mean of the last `ceil(alpha T)` queried
/// iterates, `EpochSuffix` the running mean of the current epoch. The run is
/// a pure function of `(problem, config)` including the stream seed.
pub fn run_sgd(problem: &Problem, config: &RunConfig) -> Result<RunResult, SolverError> {
    if config.horizon == 0 {
        return Err(SolverError::EmptyHorizon);
    }
    validate_checkpoints(&config.checkpoints, config.horizon)?;
    let horizon = config.horizon;
    let dim = problem.dim;
    let mut rng = config.rng.clone();
    let seed = (rng.base_seed(), rng.replicate_index());
    let mut w = initial_point(problem, &config.init, &mut rng)?;

    // Prefix sums of the queried iterates let every average at round p be
    // read off as (S_p - S_{p-k}) / k; snapshots are kept only at the rounds
    // some suffix will later subtract.
    let mut prefix = Vector::zeros(dim);
    let mut snapshot_rounds: BTreeSet<u64> = BTreeSet::new();
    let report_rounds: Vec<u64> = config
        .checkpoints
        .iter()
        .copied()
        .chain(std::iter::once(horizon))
        .collect();
    for scheme in &config.schemes {
        if let AveragingScheme::SuffixAverage { alpha } = scheme {
            for &p in &report_rounds {
                let start = p - suffix_len(p, *alpha);
                if start > 0 {
                    snapshot_rounds.insert(start);
                }
            }
        }
    }
    let mut snapshots: HashMap<u64, Vector> = HashMap::new();
    let mut epoch_accs: Vec<(usize, EpochSuffixAverage)> = config
        .schemes
        .iter()
        .enumerate()
        .filter_map(|(i, s)| match s {
            AveragingScheme::EpochSuffix { growth } => {
                Some((i, EpochSuffixAverage::new(dim, *growth)))
            }
            _ => None,
        })
        .collect();

    let suffix_mean = |prefix: &Vector, snapshots: &HashMap<u64, Vector>, p: u64, alpha: f64| {
        let k = suffix_len(p, alpha);
        let start = p - k;
        if start == 0 {
            prefix.scale(1.0 / k as f64)
        } else {
            prefix.sub_scaled(&snapshots[&start], k as f64)
        }
    };

    let mut iterates = config.store_iterates.then(Vec::new);
    let mut checkpoints_out = Vec::with_capacity(config.checkpoints.len());
    let mut next_checkpoint = 0usize;
    let mut max_scaled_distance: Option<f64> = None;
    let mut oracle_calls = 0u64;

    for t in 1..=horizon {
        if let Some(w_star) = &problem.optimum {
            let scaled = t as f64 * w.dist_sq(w_star);
            max_scaled_distance = Some(max_scaled_distance.map_or(scaled, |m| m.max(scaled)));
        }
        let grad = problem.oracle(&w, &mut rng);
        oracle_calls += 1;
        if !grad.is_finite() {
            return Err(SolverError::NonFiniteGradient { round: t });
        }
        prefix.add_assign(&w);
        if snapshot_rounds.contains(&t) {
            snapshots.insert(t, prefix.clone());
        }
        for (_, acc) in &mut epoch_accs {
            acc.push(&w);
        }
        if let Some(store) = &mut iterates {
            store.push(w.clone());
        }
        let dist_sq = problem.optimum.as_ref().map(|w_star| w.dist_sq(w_star));

        let eta = config.schedule.step_size(t);
        w = problem.domain.project(&w.axpy(-eta, &grad));

        if next_checkpoint < config.checkpoints.len() && config.checkpoints[next_checkpoint] == t {
            next_checkpoint += 1;
            assert!(
                problem.domain.contains(&w),
                "iterate left the domain at round {t}"
            );
            let mut values = Vec::with_capacity(config.schemes.len());
            for (i, scheme) in config.schemes.iter().enumerate() {
                let point = match scheme {
                    AveragingScheme::Last => w.clone(),
                    AveragingScheme::FullAverage => prefix.scale(1.0 / t as f64),
                    AveragingScheme::SuffixAverage { alpha } => {
                        suffix_mean(&prefix, &snapshots, t, *alpha)
                    }
                    AveragingScheme::EpochSuffix { .. } => epoch_accs
                        .iter()
                        .find(|(idx, _)| *idx == i)
                        .map(|(_, acc)| acc.mean().clone())
                        .expect("epoch accumulator exists"),
                };
                let objective = problem.eval(&point);
                let value = gap_for(problem, &scheme.label(), objective)?.unwrap_or(objective);
                values.push(value);
            }
            checkpoints_out.push(CheckpointRecord {
                round: t,
                values,
                dist_sq,
            });
        }
    }
    if let Some(store) = &mut iterates {
        store.push(w.clone());
    }

    let mut outputs = Vec::with_capacity(config.schemes.len());
    for (i, scheme) in config.schemes.iter().enumerate() {
        let point = match scheme {
            AveragingScheme::Last => w.clone(),
            AveragingScheme::FullAverage => prefix.scale(1.0 / horizon as f64),
            AveragingScheme::SuffixAverage { alpha } => {
                suffix_mean(&prefix, &snapshots, horizon, *alpha)
            }
            AveragingScheme::EpochSuffix { .. } => epoch_accs
                .iter()
                .find(|(idx, _)| *idx == i)
                .map(|(_, acc)| acc.mean().clone())
                .expect("epoch accumulator exists"),
        };
        let label = scheme.label();
        let objective = problem.eval(&point);
        let gap = gap_for(problem, &label, objective)?;
        outputs.push(SchemeOutput {
            label,
            point,
            objective,
            gap,
        });
    }

    Ok(RunResult {
        schemes: outputs,
        checkpoints: checkpoints_out,
        max_scaled_distance,
        oracle_calls,
        seed,
        epoch_lengths: None,
        iterates,
    })
}
