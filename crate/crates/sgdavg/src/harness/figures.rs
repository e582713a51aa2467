//! Canned experiment protocols behind the `replicate-figure` CLI command:
//! the smooth and non-smooth synthetic studies and the SVM study over
//! svmlight data, each emitting scaled-gap or raw-objective CSVs.

use super::csvout::emit_csv;
use super::{run_experiment, ExperimentSpec, HarnessError, Report, ReportRow};
use crate::averaging::AveragingScheme;
use crate::epoch::{run_epoch_gd, EpochGdConfig, EPOCH_GD_LABEL};
use crate::problems::Problem;
use crate::rng::derive_replicate_stream;
use crate::solver::{run_sgd, InitPolicy, RunConfig, SolverError};
use crate::svmlight::{load_svmlight, Dataset};
use crate::vector::Vector;
use rayon::prelude::*;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureKind {
    /// Smooth quadratic, scaled-gap CSV.
    Smooth,
    /// Non-smooth interior problem, scaled-gap CSV.
    NonSmooth,
    /// Hinge-loss SVM on supplied data, raw train/test objective CSVs.
    Svm,
}

impl FigureKind {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "smooth" => Some(FigureKind::Smooth),
            "nonsmooth" => Some(FigureKind::NonSmooth),
            "svm" => Some(FigureKind::Svm),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FigureSpec {
    pub kind: FigureKind,
    pub train: Option<PathBuf>,
    pub test: Option<PathBuf>,
    /// Ridge weight of the SVM objective.
    pub reg: f64,
    pub replicates: u32,
    /// Overrides the per-kind default grid.
    pub t_grid: Option<Vec<u64>>,
    pub base_seed: u64,
    pub out: PathBuf,
    pub parallel: bool,
}

impl FigureSpec {
    pub fn new(kind: FigureKind, out: PathBuf) -> Self {
        Self {
            kind,
            train: None,
            test: None,
            reg: 1e-4,
            replicates: 10,
            t_grid: None,
            base_seed: 0,
            out,
            parallel: true,
        }
    }

    fn grid(&self) -> Vec<u64> {
        self.t_grid.clone().unwrap_or_else(|| match self.kind {
            FigureKind::Smooth | FigureKind::NonSmooth => (7..=14).map(|k| 1u64 << k).collect(),
            FigureKind::Svm => (7..=13).map(|k| 1u64 << k).collect(),
        })
    }
}

/// Runs one canned protocol and writes its CSV(s); returns the written
/// paths with their in-memory reports (samples included, for downstream
/// checks).
pub fn replicate_figure(spec: &FigureSpec) -> Result<Vec<(PathBuf, Report)>, HarnessError> {
    match spec.kind {
        FigureKind::Smooth | FigureKind::NonSmooth => {
            let problem = match spec.kind {
                FigureKind::Smooth => Problem::smooth_quadratic(5),
                _ => Problem::interior(5),
            };
            let mut expt =
                ExperimentSpec::new(problem, spec.grid(), spec.replicates, spec.base_seed);
            expt.schemes = vec![
                AveragingScheme::Last,
                AveragingScheme::FullAverage,
                AveragingScheme::suffix(0.5),
            ];
            expt.include_epoch_gd = true;
            expt.init = InitPolicy::UniformInDomain;
            expt.parallel = spec.parallel;
            let report = run_experiment(&expt)?;
            emit_csv(&report, &spec.out)?;
            Ok(vec![(spec.out.clone(), report)])
        }
        FigureKind::Svm => run_svm_figure(spec),
    }
}

/// Test-set objective for a point trained on possibly fewer features:
/// indices beyond the weight vector contribute nothing.
fn truncated_objective(dataset: &Dataset, w: &Vector, reg: f64) -> f64 {
    let hinge_sum: f64 = dataset
        .examples
        .iter()
        .map(|ex| {
            let dot: f64 = ex
                .features
                .iter()
                .filter(|&&(i, _)| i <= w.dim())
                .map(|&(i, v)| v * w[i - 1])
                .sum();
            (1.0 - ex.label as f64 * dot).max(0.0)
        })
        .sum();
    0.5 * reg * w.norm_sq() + hinge_sum / dataset.len() as f64
}

fn run_svm_figure(spec: &FigureSpec) -> Result<Vec<(PathBuf, Report)>, HarnessError> {
    let started = std::time::Instant::now();
    let train_path = spec
        .train
        .as_ref()
        .ok_or_else(|| HarnessError::InvalidSpec("svm figure needs a training file".into()))?;
    let train = Arc::new(load_svmlight(train_path)?);
    if train.is_empty() {
        return Err(HarnessError::InvalidSpec(format!(
            "training file {} holds no examples",
            train_path.display()
        )));
    }
    let test = spec
        .test
        .as_ref()
        .map(|p| load_svmlight(p).map(Arc::new))
        .transpose()?;
    let problem = Problem::svm(train.clone(), spec.reg);
    let grid = spec.grid();
    let replicates = spec.replicates;
    if replicates == 0 {
        return Err(HarnessError::InvalidSpec(
            "need at least one replicate".into(),
        ));
    }

    let schemes = vec![
        AveragingScheme::Last,
        AveragingScheme::FullAverage,
        AveragingScheme::suffix(0.5),
    ];
    let mut labels: Vec<String> = schemes.iter().map(|s| s.label()).collect();
    labels.push(EPOCH_GD_LABEL.to_string());
    let schedule = crate::schedule::StepSchedule::new(1.0, spec.reg);

    // Same stream layout as run_experiment: SGD uses r*|grid|+j, the epoch
    // baseline the same formula shifted by `replicates` replicate slots.
    let jobs: Vec<(u32, usize)> = (0..replicates)
        .flat_map(|r| (0..grid.len()).map(move |j| (r, j)))
        .collect();
    struct Cell {
        grid_pos: usize,
        train_values: Vec<f64>,
        test_values: Vec<f64>,
        oracle_calls: u64,
    }
    let run_cell = |&(replicate, grid_pos): &(u32, usize)| -> Result<Cell, HarnessError> {
        let horizon = grid[grid_pos];
        let sgd_index = replicate as u64 * grid.len() as u64 + grid_pos as u64;
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
            schemes: schemes.clone(),
            init: InitPolicy::Origin,
            checkpoints: Vec::new(),
            rng: derive_replicate_stream(spec.base_seed, sgd_index),
            store_iterates: false,
        };
        let result = run_sgd(&problem, &config).map_err(wrap(sgd_index))?;
        let mut points: Vec<(f64, Vector)> = result
            .schemes
            .into_iter()
            .map(|s| (s.objective, s.point))
            .collect();
        let epoch_index =
            (replicates as u64 + replicate as u64) * grid.len() as u64 + grid_pos as u64;
        let mut cfg = EpochGdConfig::standard(spec.reg, horizon);
        cfg.init = InitPolicy::Origin;
        let rng = derive_replicate_stream(spec.base_seed, epoch_index);
        let epoch_result = run_epoch_gd(&problem, &cfg, &rng).map_err(wrap(epoch_index))?;
        let oracle_calls = result.oracle_calls + epoch_result.oracle_calls;
        let epoch_out = epoch_result.schemes.into_iter().next().expect("one output");
        points.push((epoch_out.objective, epoch_out.point));
        let train_values = points.iter().map(|(obj, _)| *obj).collect();
        let test_values = match &test {
            Some(ds) => points
                .iter()
                .map(|(_, p)| truncated_objective(ds, p, spec.reg))
                .collect(),
            None => Vec::new(),
        };
        Ok(Cell {
            grid_pos,
            train_values,
            test_values,
            oracle_calls,
        })
    };

    let cells: Vec<Cell> = if spec.parallel {
        jobs.par_iter().map(run_cell).collect::<Result<_, _>>()?
    } else {
        jobs.iter().map(run_cell).collect::<Result<_, _>>()?
    };

    let mut total_oracle_calls = 0u64;
    let mut train_samples = vec![vec![Vec::new(); grid.len()]; labels.len()];
    let mut test_samples = vec![vec![Vec::new(); grid.len()]; labels.len()];
    for cell in &cells {
        total_oracle_calls += cell.oracle_calls;
        for (s, &v) in cell.train_values.iter().enumerate() {
            train_samples[s][cell.grid_pos].push(v);
        }
        for (s, &v) in cell.test_values.iter().enumerate() {
            test_samples[s][cell.grid_pos].push(v);
        }
    }

    let base_metadata = |split: &str| -> Vec<(String, String)> {
        vec![
            ("figure".into(), "svm".into()),
            ("split".into(), split.into()),
            ("problem".into(), problem.name.clone()),
            ("train_file".into(), train_path.display().to_string()),
            (
                "test_file".into(),
                spec.test
                    .as_ref()
                    .map(|p| p.display().to_string())
                    .unwrap_or_else(|| "none".into()),
            ),
            ("reg".into(), spec.reg.to_string()),
            (
                "t_grid".into(),
                grid.iter()
                    .map(|t| t.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ("replicates".into(), replicates.to_string()),
            ("base_seed".into(), spec.base_seed.to_string()),
            ("init".into(), "origin".into()),
            (
                "seed_derivation".into(),
                "sgd: replicate*|grid|+pos; epoch_gd: (replicates+replicate)*|grid|+pos".into(),
            ),
        ]
    };
    let build_report = |samples: &mut Vec<Vec<Vec<f64>>>, split: &str| -> Report {
        let mut order: Vec<usize> = (0..labels.len()).collect();
        order.sort_by(|&a, &b| labels[a].cmp(&labels[b]));
        let mut rows = Vec::new();
        for &s in &order {
            for (j, &horizon) in grid.iter().enumerate() {
                let cell_samples = std::mem::take(&mut samples[s][j]);
                let n = cell_samples.len() as f64;
                let mean = cell_samples.iter().sum::<f64>() / n;
                let std = if cell_samples.len() < 2 {
                    0.0
                } else {
                    (cell_samples
                        .iter()
                        .map(|x| (x - mean) * (x - mean))
                        .sum::<f64>()
                        / (n - 1.0))
                        .sqrt()
                };
                rows.push(ReportRow {
                    scheme: labels[s].clone(),
                    horizon,
                    mean_gap: mean,
                    std_gap: std,
                    mean_scaled_gap: mean * horizon as f64,
                    std_scaled_gap: std * horizon as f64,
                    replicates,
                    samples: cell_samples,
                });
            }
        }
        Report {
            rows,
            metadata: base_metadata(split),
            total_oracle_calls,
            wall_time: Duration::ZERO,
        }
    };

    let mut train_report = build_report(&mut train_samples, "train");
    train_report.wall_time = started.elapsed();
    emit_csv(&train_report, &spec.out)?;
    let mut outputs = vec![(spec.out.clone(), train_report)];
    if test.is_some() {
        let test_report = build_report(&mut test_samples, "test");
        let test_path = test_csv_path(&spec.out);
        emit_csv(&test_report, &test_path)?;
        outputs.push((test_path, test_report));
    }
    Ok(outputs)
}

pub fn test_csv_path(out: &Path) -> PathBuf {
    out.with_extension("test.csv")
}
