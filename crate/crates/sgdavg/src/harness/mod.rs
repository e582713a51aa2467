//! Experiment orchestration: replicate management, aggregation, rate
//! estimation, bound conformance, sweeps and CSV emission.

pub mod conformance;
pub mod csvout;
pub mod figures;
pub mod rate;
pub mod sweep;

use crate::averaging::AveragingScheme;
use crate::epoch::{run_epoch_gd, EpochGdConfig, EPOCH_GD_LABEL};
use crate::problems::Problem;
use crate::rng::derive_replicate_stream;
use crate::schedule::StepSchedule;
use crate::solver::{run_sgd, InitPolicy, RunConfig, SolverError};
use crate::svmlight::ParseError;
use rayon::prelude::*;
use std::io;
use std::time::Duration;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("run failed at T={horizon} replicate={replicate} seed=({base_seed},{stream_index}): {source}")]
    RunFailed {
        horizon: u64,
        replicate: u32,
        base_seed: u64,
        stream_index: u64,
        #[source]
        source: SolverError,
    },
    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),
    #[error("bound does not apply: {0}")]
    PairingMismatch(String),
    #[error(
        "quantile resolution insufficient: need replicates >= 100 and replicates * delta >= 5"
    )]
    QuantileResolution,
    #[error("scheme {0:?} not present in report")]
    UnknownScheme(String),
    #[error("rate estimation needs at least {needed} usable grid points, got {got}")]
    GridTooSmall { needed: usize, got: usize },
    #[error("writing {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// A full experiment: one problem, a grid of horizons, `replicates`
/// independent runs per horizon.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub problem: Problem,
    /// Ascending horizons, each at least 4.
    pub t_grid: Vec<u64>,
    pub replicates: u32,
    pub base_seed: u64,
    pub schemes: Vec<AveragingScheme>,
    /// Step multiplier: `eta_t = step_c / (step_lambda * t)`.
    pub step_c: f64,
    /// Overrides the problem's strong-convexity modulus in the schedule
    /// when set (step-size sweeps).
    pub step_lambda: Option<f64>,
    pub init: InitPolicy,
    pub include_epoch_gd: bool,
    /// Run replicates on a thread pool; results are identical either way.
    pub parallel: bool,
}

impl ExperimentSpec {
    pub fn new(problem: Problem, t_grid: Vec<u64>, replicates: u32, base_seed: u64) -> Self {
        Self {
            problem,
            t_grid,
            replicates,
            base_seed,
            schemes: vec![
                AveragingScheme::Last,
                AveragingScheme::FullAverage,
                AveragingScheme::suffix(0.5),
            ],
            step_c: 1.0,
            step_lambda: None,
            init: InitPolicy::Origin,
            include_epoch_gd: false,
            parallel: true,
        }
    }

    pub fn schedule(&self) -> StepSchedule {
        StepSchedule::new(self.step_c, self.step_lambda.unwrap_or(self.problem.lambda))
    }

    fn validate(&self) -> Result<(), HarnessError> {
        if self.t_grid.is_empty() {
            return Err(HarnessError::InvalidSpec("empty horizon grid".into()));
        }
        if self.t_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(HarnessError::InvalidSpec(
                "horizon grid must be strictly ascending".into(),
            ));
        }
        if self.t_grid[0] < 4 {
            return Err(HarnessError::InvalidSpec(
                "horizons must be at least 4".into(),
            ));
        }
        if self.replicates == 0 {
            return Err(HarnessError::InvalidSpec(
                "need at least one replicate".into(),
            ));
        }
        let mut labels: Vec<String> = self.schemes.iter().map(|s| s.label()).collect();
        if self.include_epoch_gd {
            labels.push(EPOCH_GD_LABEL.to_string());
            if self.t_grid[0] < 8 {
                return Err(HarnessError::InvalidSpec(
                    "epoch baseline needs horizons of at least its first epoch (8)".into(),
                ));
            }
        }
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(HarnessError::InvalidSpec("duplicate scheme labels".into()));
        }
        Ok(())
    }

    /// Stream index for the SGD run of `(replicate, grid position)`.
    fn sgd_stream_index(&self, replicate: u32, grid_pos: usize) -> u64 {
        replicate as u64 * self.t_grid.len() as u64 + grid_pos as u64
    }

    /// Stream index for the epoch-GD run: the same formula shifted past all
    /// SGD indices so the two baselines never share a stream.
    fn epoch_stream_index(&self, replicate: u32, grid_pos: usize) -> u64 {
        (self.replicates as u64 + replicate as u64) * self.t_grid.len() as u64 + grid_pos as u64
    }

    pub fn metadata(&self) -> Vec<(String, String)> {
        let grid = self
            .t_grid
            .iter()
            .map(|t| t.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let schemes = self
            .schemes
            .iter()
            .map(|s| s.label())
            .collect::<Vec<_>>()
            .join(",");
        vec![
            ("problem".into(), self.problem.name.clone()),
            ("dim".into(), self.problem.dim.to_string()),
            ("t_grid".into(), grid),
            ("replicates".into(), self.replicates.to_string()),
            ("base_seed".into(), self.base_seed.to_string()),
            ("schemes".into(), schemes),
            ("step_c".into(), self.step_c.to_string()),
            (
                "step_lambda".into(),
                self.step_lambda.unwrap_or(self.problem.lambda).to_string(),
            ),
            ("init".into(), self.init.label().to_string()),
            ("epoch_gd".into(), self.include_epoch_gd.to_string()),
            (
                "seed_derivation".into(),
                "sgd: replicate*|grid|+pos; epoch_gd: (replicates+replicate)*|grid|+pos".into(),
            ),
        ]
    }
}

/// Aggregates for one `(scheme, horizon)` cell.
#[derive(Debug, Clone)]
pub struct ReportRow {
    pub scheme: String,
    pub horizon: u64,
    /// Mean suboptimality gap over replicates (raw objective when the
    /// problem has no known optimum).
    pub mean_gap: f64,
    /// Sample standard deviation over replicates (0 for a single replicate).
    pub std_gap: f64,
    /// `mean_gap * T`.
    pub mean_scaled_gap: f64,
    /// `std_gap * T`.
    pub std_scaled_gap: f64,
    pub replicates: u32,
    /// Per-replicate values in replicate order; kept in memory for
    /// conformance checks, not serialized.
    pub samples: Vec<f64>,
}

impl ReportRow {
    pub fn standard_error(&self) -> f64 {
        self.std_gap / (self.replicates as f64).sqrt()
    }
}

/// Aggregated experiment output: one row per `(scheme, horizon)`, ordered by
/// scheme label then ascending horizon.
#[derive(Debug, Clone)]
pub struct Report {
    pub rows: Vec<ReportRow>,
    pub metadata: Vec<(String, String)>,
    pub total_oracle_calls: u64,
    pub wall_time: Duration,
}

impl Report {
    pub fn row(&self, scheme: &str, horizon: u64) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.scheme == scheme && r.horizon == horizon)
    }

    pub fn scheme_rows(&self, scheme: &str) -> Vec<&ReportRow> {
        self.rows.iter().filter(|r| r.scheme == scheme).collect()
    }

    pub fn scheme_labels(&self) -> Vec<String> {
        let mut labels: Vec<String> = self.rows.iter().map(|r| r.scheme.clone()).collect();
        labels.dedup();
        labels
    }
}

fn sample_mean_std(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

struct RunCell {
    grid_pos: usize,
    values: Vec<f64>, // aligned with scheme labels for this spec
    oracle_calls: u64,
}

/// Runs the whole grid. Each `(horizon, replicate)` cell is an independent
/// fresh run on its own derived stream, so the report is a pure function of
/// the spec and identical under serial or parallel execution.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Report, HarnessError> {
    spec.validate()?;
    let started = std::time::Instant::now();
    let schedule = spec.schedule();

    let jobs: Vec<(u32, usize)> = (0..spec.replicates)
        .flat_map(|r| (0..spec.t_grid.len()).map(move |j| (r, j)))
        .collect();

    let run_cell = |&(replicate, grid_pos): &(u32, usize)| -> Result<RunCell, HarnessError> {
        let horizon = spec.t_grid[grid_pos];
        let sgd_index = spec.sgd_stream_index(replicate, grid_pos);
        let wrap = |index: u64| {
            move |source: SolverError| HarnessError::RunFailed {
                horizon,
                replicate,
                base_seed: spec.base_seed,
                stream_index: index,
                source,
            }
        };
        let config = RunConfig {
            horizon,
            schedule,
            schemes: spec.schemes.clone(),
            init: spec.init.clone(),
            checkpoints: Vec::new(),
            rng: derive_replicate_stream(spec.base_seed, sgd_index),
            store_iterates: false,
        };
        let result = run_sgd(&spec.problem, &config).map_err(wrap(sgd_index))?;
        let mut values: Vec<f64> = result.schemes.iter().map(|s| s.value()).collect();
        let mut oracle_calls = result.oracle_calls;
        if spec.include_epoch_gd {
            let epoch_index = spec.epoch_stream_index(replicate, grid_pos);
            let mut cfg = EpochGdConfig::standard(schedule.lambda, horizon);
            cfg.init = spec.init.clone();
            let rng = derive_replicate_stream(spec.base_seed, epoch_index);
            let epoch_result =
                run_epoch_gd(&spec.problem, &cfg, &rng).map_err(wrap(epoch_index))?;
            values.push(epoch_result.schemes[0].value());
            oracle_calls += epoch_result.oracle_calls;
        }
        Ok(RunCell {
            grid_pos,
            values,
            oracle_calls,
        })
    };

    let cells: Vec<RunCell> = if spec.parallel {
        jobs.par_iter().map(run_cell).collect::<Result<_, _>>()?
    } else {
        jobs.iter().map(run_cell).collect::<Result<_, _>>()?
    };

    let mut labels: Vec<String> = spec.schemes.iter().map(|s| s.label()).collect();
    if spec.include_epoch_gd {
        labels.push(EPOCH_GD_LABEL.to_string());
    }

    // samples[scheme][grid_pos][replicate], filled in job order which is
    // (replicate-major, grid-minor), so push order equals replicate order.
    let mut samples =
        vec![vec![Vec::with_capacity(spec.replicates as usize); spec.t_grid.len()]; labels.len()];
    let mut total_oracle_calls = 0u64;
    for cell in &cells {
        total_oracle_calls += cell.oracle_calls;
        for (s, &v) in cell.values.iter().enumerate() {
            samples[s][cell.grid_pos].push(v);
        }
    }

    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.sort_by(|&a, &b| labels[a].cmp(&labels[b]));
    let mut rows = Vec::with_capacity(labels.len() * spec.t_grid.len());
    for &s in &order {
        for (j, &horizon) in spec.t_grid.iter().enumerate() {
            let cell_samples = std::mem::take(&mut samples[s][j]);
            let (mean, std) = sample_mean_std(&cell_samples);
            rows.push(ReportRow {
                scheme: labels[s].clone(),
                horizon,
                mean_gap: mean,
                std_gap: std,
                mean_scaled_gap: mean * horizon as f64,
                std_scaled_gap: std * horizon as f64,
                replicates: spec.replicates,
                samples: cell_samples,
            });
        }
    }

    Ok(Report {
        rows,
        metadata: spec.metadata(),
        total_oracle_calls,
        wall_time: started.elapsed(),
    })
}

/// Mean and standard deviation of `||w_t - w*||^2` at each checkpoint,
/// aggregated over independent replicates.
#[derive(Debug, Clone)]
pub struct DistanceProfile {
    pub checkpoints: Vec<u64>,
    pub mean_dist_sq: Vec<f64>,
    pub std_dist_sq: Vec<f64>,
    pub replicates: u32,
}

#[allow(clippy::too_many_arguments)]
pub fn distance_profile(
    problem: &Problem,
    step_c: f64,
    horizon: u64,
    checkpoints: &[u64],
    replicates: u32,
    base_seed: u64,
    init: InitPolicy,
    parallel: bool,
) -> Result<DistanceProfile, HarnessError> {
    if problem.optimum.is_none() {
        return Err(HarnessError::PairingMismatch(
            "distance profile needs a known optimum".into(),
        ));
    }
    if replicates == 0 {
        return Err(HarnessError::InvalidSpec(
            "need at least one replicate".into(),
        ));
    }
    let schedule = StepSchedule::new(step_c, problem.lambda);
    let run_one = |r: &u32| -> Result<Vec<f64>, HarnessError> {
        let config = RunConfig {
            horizon,
            schedule,
            schemes: vec![AveragingScheme::Last],
            init: init.clone(),
            checkpoints: checkpoints.to_vec(),
            rng: derive_replicate_stream(base_seed, *r as u64),
            store_iterates: false,
        };
        let result = run_sgd(problem, &config).map_err(|source| HarnessError::RunFailed {
            horizon,
            replicate: *r,
            base_seed,
            stream_index: *r as u64,
            source,
        })?;
        Ok(result
            .checkpoints
            .iter()
            .map(|c| c.dist_sq.expect("optimum known"))
            .collect())
    };
    let reps: Vec<u32> = (0..replicates).collect();
    let all: Vec<Vec<f64>> = if parallel {
        reps.par_iter().map(run_one).collect::<Result<_, _>>()?
    } else {
        reps.iter().map(run_one).collect::<Result<_, _>>()?
    };
    let mut mean_dist_sq = Vec::with_capacity(checkpoints.len());
    let mut std_dist_sq = Vec::with_capacity(checkpoints.len());
    for i in 0..checkpoints.len() {
        let samples: Vec<f64> = all.iter().map(|run| run[i]).collect();
        let (mean, std) = sample_mean_std(&samples);
        mean_dist_sq.push(mean);
        std_dist_sq.push(std);
    }
    Ok(DistanceProfile {
        checkpoints: checkpoints.to_vec(),
        mean_dist_sq,
        std_dist_sq,
        replicates,
    })
}
