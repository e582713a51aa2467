//! Step-size sweep: how the convergence rate degrades when `eta_t = c/t`
//! uses a multiplier `c` below 1.
//!
//! The deterministic column uses the closed-form scalar iterate
//! `w_T = prod (1 - c/t)`, whose log-log slope against `T` is `-c`; the
//! stochastic columns rerun the corner problem at each `c`.

use super::rate::{estimate_rate, ols};
use super::{run_experiment, ExperimentSpec, HarnessError, Report, ReportRow};
use crate::averaging::AveragingScheme;
use crate::bounds::deterministic_scalar_iterate;
use crate::problems::Problem;
use crate::solver::InitPolicy;
use std::time::Duration;

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub c_list: Vec<f64>,
    /// Horizons for the closed-form deterministic iterate.
    pub det_grid: Vec<u64>,
    /// Horizons for the stochastic corner runs; empty skips them.
    pub stochastic_grid: Vec<u64>,
    pub replicates: u32,
    pub base_seed: u64,
    pub parallel: bool,
}

impl SweepSpec {
    pub fn new(c_list: Vec<f64>) -> Self {
        Self {
            c_list,
            det_grid: vec![1_000, 10_000, 100_000],
            stochastic_grid: (7..=12).map(|k| 1u64 << k).collect(),
            replicates: 10,
            base_seed: 0,
            parallel: true,
        }
    }
}

/// One fitted decay exponent. `exponent` is `None` when every value on the
/// grid is exactly zero ("exact" convergence).
#[derive(Debug, Clone)]
pub struct SweepEntry {
    pub label: String,
    pub c: f64,
    pub exponent: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub report: Report,
    pub exponents: Vec<SweepEntry>,
}

pub fn stepsize_sweep(spec: &SweepSpec) -> Result<SweepOutcome, HarnessError> {
    if spec.c_list.is_empty() {
        return Err(HarnessError::InvalidSpec("empty c list".into()));
    }
    if spec.c_list.iter().any(|&c| c <= 0.0 || !c.is_finite()) {
        return Err(HarnessError::InvalidSpec(
            "step multipliers must be positive".into(),
        ));
    }
    if spec.det_grid.len() < 2 {
        return Err(HarnessError::InvalidSpec(
            "deterministic grid needs at least two horizons".into(),
        ));
    }

    let mut rows: Vec<ReportRow> = Vec::new();
    let mut exponents = Vec::new();
    let mut total_oracle_calls = 0u64;
    let mut wall_time = Duration::ZERO;

    for &c in &spec.c_list {
        // Closed form only covers c <= 1; larger multipliers are measured
        // stochastically below.
        if c <= 1.0 {
            let label = format!("det_c{c}");
            let values: Vec<(u64, f64)> = spec
                .det_grid
                .iter()
                .map(|&horizon| (horizon, deterministic_scalar_iterate(c, horizon)))
                .collect();
            for &(horizon, w) in &values {
                rows.push(ReportRow {
                    scheme: label.clone(),
                    horizon,
                    mean_gap: w,
                    std_gap: 0.0,
                    mean_scaled_gap: w * horizon as f64,
                    std_scaled_gap: 0.0,
                    replicates: 1,
                    samples: vec![w],
                });
            }
            let exponent = if values.iter().all(|&(_, w)| w == 0.0) {
                None
            } else {
                let xs: Vec<f64> = values.iter().map(|&(t, _)| (t as f64).ln()).collect();
                let ys: Vec<f64> = values.iter().map(|&(_, w)| w.ln()).collect();
                Some(-ols(&xs, &ys).slope)
            };
            exponents.push(SweepEntry { label, c, exponent });
        }

        if !spec.stochastic_grid.is_empty() {
            let mut expt = ExperimentSpec::new(
                Problem::corner(5),
                spec.stochastic_grid.clone(),
                spec.replicates,
                spec.base_seed,
            );
            expt.schemes = vec![AveragingScheme::Last, AveragingScheme::FullAverage];
            expt.step_c = c;
            expt.init = InitPolicy::UniformInDomain;
            expt.parallel = spec.parallel;
            let mut report = run_experiment(&expt)?;
            total_oracle_calls += report.total_oracle_calls;
            wall_time += report.wall_time;
            for scheme in ["full", "last"] {
                let label = format!("corner_{scheme}_c{c}");
                let exponent = match estimate_rate(&report, scheme) {
                    Ok(fit) if fit.exponent.is_nan() => None,
                    Ok(fit) => Some(fit.exponent),
                    Err(HarnessError::GridTooSmall { .. }) => None,
                    Err(e) => return Err(e),
                };
                exponents.push(SweepEntry { label, c, exponent });
            }
            for mut row in report.rows.drain(..) {
                row.scheme = format!("corner_{}_c{c}", row.scheme);
                rows.push(row);
            }
        }
    }

    rows.sort_by(|a, b| a.scheme.cmp(&b.scheme).then(a.horizon.cmp(&b.horizon)));
    let metadata = vec![
        (
            "c_list".into(),
            spec.c_list
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(","),
        ),
        (
            "det_grid".into(),
            spec.det_grid
                .iter()
                .map(|t| t.to_string())
                .collect::<Vec<_>>()
                .join(","),
        ),
        (
            "stochastic_grid".into(),
            spec.stochastic_grid
                .iter()
                .map(|t| t.to_string())
                .collect::<Vec<_>>()
                .join(","),
        ),
        ("replicates".into(), spec.replicates.to_string()),
        ("base_seed".into(), spec.base_seed.to_string()),
    ];
    Ok(SweepOutcome {
        report: Report {
            rows,
            metadata,
            total_oracle_calls,
            wall_time,
        },
        exponents,
    })
}
