//! Statistical conformance of empirical curves against the closed-form
//! bounds. The bounds hold in expectation, so sample means get a two
//! standard-error margin in the favorable direction.

use super::{HarnessError, Report};
use crate::averaging::AveragingScheme;
use crate::bounds;
use crate::problems::Problem;
use crate::rng::derive_replicate_stream;
use crate::schedule::StepSchedule;
use crate::solver::{run_sgd, InitPolicy, RunConfig};
use rayon::prelude::*;

/// Margin multiplier on the standard error of the replicate mean.
const SIGMAS: f64 = 2.0;

#[derive(Debug, Clone)]
pub struct ConformanceEntry {
    pub horizon: u64,
    pub empirical: f64,
    /// `SIGMAS * std / sqrt(R)`.
    pub margin: f64,
    pub bound: f64,
    pub violated: bool,
    /// Lower bounds that are nonpositive at this horizon are vacuous.
    pub skipped: bool,
}

#[derive(Debug, Clone)]
pub struct ConformanceRecord {
    pub check: String,
    pub scheme: String,
    pub entries: Vec<ConformanceEntry>,
}

impl ConformanceRecord {
    pub fn violations(&self) -> usize {
        self.entries.iter().filter(|e| e.violated).count()
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0
    }
}

/// Checks the mean gap of one scheme against its matching in-expectation
/// upper bound: last iterate and full average require a smooth problem,
/// suffix averaging applies to any problem (with `alpha < 1`). Flags a
/// violation wherever `mean - margin > bound`.
pub fn check_upper_bound(
    report: &Report,
    problem: &Problem,
    scheme: &AveragingScheme,
) -> Result<ConformanceRecord, HarnessError> {
    let g_sq = problem.g_sq_bound;
    let lambda = problem.lambda;
    let (check, bound_at): (String, Box<dyn Fn(u64) -> f64>) = match scheme {
        AveragingScheme::Last => {
            let mu = problem.mu.ok_or_else(|| {
                HarnessError::PairingMismatch(format!(
                    "last-iterate bound needs a smooth problem, {} is not",
                    problem.name
                ))
            })?;
            (
                "last_iterate_gap".into(),
                Box::new(move |t| bounds::last_iterate_gap_bound(mu, g_sq, lambda, t)),
            )
        }
        AveragingScheme::FullAverage => {
            let mu = problem.mu.ok_or_else(|| {
                HarnessError::PairingMismatch(format!(
                    "full-average bound needs a smooth problem, {} is not",
                    problem.name
                ))
            })?;
            (
                "full_average_gap".into(),
                Box::new(move |t| bounds::full_average_gap_bound(mu, g_sq, lambda, t)),
            )
        }
        AveragingScheme::SuffixAverage { alpha } => {
            if *alpha >= 1.0 {
                return Err(HarnessError::PairingMismatch(
                    "suffix bound needs alpha < 1".into(),
                ));
            }
            let alpha = *alpha;
            (
                "suffix_average_gap".into(),
                Box::new(move |t| bounds::suffix_average_gap_bound(alpha, g_sq, lambda, t)),
            )
        }
        AveragingScheme::EpochSuffix { .. } => {
            return Err(HarnessError::PairingMismatch(
                "no closed-form bound is implemented for epoch-suffix output".into(),
            ))
        }
    };
    let label = scheme.label();
    let rows = report.scheme_rows(&label);
    if rows.is_empty() {
        return Err(HarnessError::UnknownScheme(label));
    }
    if problem.f_min.is_none() {
        return Err(HarnessError::PairingMismatch(
            "gap bounds need a problem with known optimum".into(),
        ));
    }
    let entries = rows
        .iter()
        .map(|row| {
            let bound = bound_at(row.horizon);
            let margin = SIGMAS * row.standard_error();
            ConformanceEntry {
                horizon: row.horizon,
                empirical: row.mean_gap,
                margin,
                bound,
                violated: row.mean_gap - margin > bound,
                skipped: false,
            }
        })
        .collect();
    Ok(ConformanceRecord {
        check,
        scheme: label,
        entries,
    })
}

/// Which adversarial construction a lower bound belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LowerBoundKind {
    Corner,
    Interior,
}

/// Checks the full-average mean gap against the construction's lower bound.
/// Horizons where the bound is nonpositive are vacuous and skipped; a
/// violation is flagged wherever `mean + margin < bound`.
pub fn check_lower_bound(
    report: &Report,
    problem: &Problem,
    kind: LowerBoundKind,
    step_c: f64,
) -> Result<ConformanceRecord, HarnessError> {
    let (expected_problem, check, bound_at): (&str, &str, fn(f64, u64) -> f64) = match kind {
        LowerBoundKind::Corner => (
            "corner",
            "corner_average_lower",
            bounds::corner_average_lower_bound,
        ),
        LowerBoundKind::Interior => (
            "interior",
            "interior_average_lower",
            bounds::interior_average_lower_bound,
        ),
    };
    if problem.name != expected_problem {
        return Err(HarnessError::PairingMismatch(format!(
            "{check} applies to the {expected_problem} problem, not {}",
            problem.name
        )));
    }
    let rows = report.scheme_rows("full");
    if rows.is_empty() {
        return Err(HarnessError::UnknownScheme("full".into()));
    }
    let entries = rows
        .iter()
        .map(|row| {
            let bound = bound_at(step_c, row.horizon);
            let margin = SIGMAS * row.standard_error();
            let skipped = bound <= 0.0;
            ConformanceEntry {
                horizon: row.horizon,
                empirical: row.mean_gap,
                margin,
                bound,
                violated: !skipped && row.mean_gap + margin < bound,
                skipped,
            }
        })
        .collect();
    Ok(ConformanceRecord {
        check: check.to_string(),
        scheme: "full".into(),
        entries,
    })
}

/// Result of the high-probability distance check.
#[derive(Debug, Clone)]
pub struct HighProbRecord {
    /// Empirical `(1 - delta)` quantile of `max_{t<=T} t * ||w_t - w*||^2`.
    pub quantile: f64,
    /// `(624 ln(ln T / delta) + 1) G^2 / lambda^2`.
    pub bound: f64,
    pub ratio: f64,
    pub replicates: u32,
    pub delta: f64,
    pub horizon: u64,
}

impl HighProbRecord {
    pub fn passed(&self) -> bool {
        self.ratio < 1.0
    }
}

/// Runs `replicates` independent trajectories, records each one's maximum of
/// `t * ||w_t - w*||^2` over `t <= T`, and compares the empirical
/// `(1 - delta)` quantile (order statistic `ceil((1-delta) R)`) against the
/// scaled high-probability bound.
#[allow(clippy::too_many_arguments)]
pub fn check_high_probability(
    problem: &Problem,
    step_c: f64,
    horizon: u64,
    replicates: u32,
    delta: f64,
    base_seed: u64,
    init: InitPolicy,
    parallel: bool,
) -> Result<HighProbRecord, HarnessError> {
    if problem.optimum.is_none() {
        return Err(HarnessError::PairingMismatch(
            "high-probability check needs a known optimum".into(),
        ));
    }
    if !(0.0..1.0 / std::f64::consts::E).contains(&delta) || delta == 0.0 {
        return Err(HarnessError::InvalidSpec(
            "delta must lie in (0, 1/e)".into(),
        ));
    }
    if horizon < 4 {
        return Err(HarnessError::InvalidSpec(
            "horizon must be at least 4".into(),
        ));
    }
    if replicates < 100 || (replicates as f64) * delta < 5.0 {
        return Err(HarnessError::QuantileResolution);
    }
    let schedule = StepSchedule::new(step_c, problem.lambda);
    let run_one = |r: &u32| -> Result<f64, HarnessError> {
        let config = RunConfig {
            horizon,
            schedule,
            schemes: vec![AveragingScheme::Last],
            init: init.clone(),
            checkpoints: Vec::new(),
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
        Ok(result.max_scaled_distance.expect("optimum known"))
    };
    let reps: Vec<u32> = (0..replicates).collect();
    let mut maxima: Vec<f64> = if parallel {
        reps.par_iter().map(run_one).collect::<Result<_, _>>()?
    } else {
        reps.iter().map(run_one).collect::<Result<_, _>>()?
    };
    maxima.sort_by(|a, b| a.partial_cmp(b).expect("finite maxima"));
    let rank = ((1.0 - delta) * replicates as f64).ceil() as usize;
    let quantile = maxima[rank.clamp(1, replicates as usize) - 1];
    let bound = bounds::high_probability_distance_bound(
        problem.g_sq_bound.sqrt(),
        problem.lambda,
        1,
        horizon,
        delta,
    );
    Ok(HighProbRecord {
        quantile,
        bound,
        ratio: quantile / bound,
        replicates,
        delta,
        horizon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::ReportRow;
    use std::time::Duration;

    fn report_with(scheme: &str, gaps: &[(u64, f64)]) -> Report {
        let rows = gaps
            .iter()
            .map(|&(horizon, gap)| ReportRow {
                scheme: scheme.into(),
                horizon,
                mean_gap: gap,
                std_gap: 0.0,
                mean_scaled_gap: gap * horizon as f64,
                std_scaled_gap: 0.0,
                replicates: 4,
                samples: vec![gap; 4],
            })
            .collect();
        Report {
            rows,
            metadata: Vec::new(),
            total_oracle_calls: 0,
            wall_time: Duration::ZERO,
        }
    }

    #[test]
    fn zero_gaps_never_violate_upper_bounds() {
        let report = report_with("last", &[(16, 0.0), (32, 0.0)]);
        let rec = check_upper_bound(
            &report,
            &Problem::smooth_quadratic(5),
            &AveragingScheme::Last,
        )
        .unwrap();
        assert!(rec.passed());
    }

    #[test]
    fn gap_equal_to_bound_passes_both_directions() {
        // Upper: mean - margin > bound is false at equality. Lower: use the
        // corner bound itself as the "empirical" curve.
        let p = Problem::smooth_quadratic(5);
        let grid: Vec<u64> = vec![16, 32, 64];
        let gaps: Vec<(u64, f64)> = grid
            .iter()
            .map(|&t| (t, bounds::last_iterate_gap_bound(1.0, p.g_sq_bound, 1.0, t)))
            .collect();
        let rec =
            check_upper_bound(&report_with("last", &gaps), &p, &AveragingScheme::Last).unwrap();
        assert!(rec.passed());

        let corner = Problem::corner(5);
        let gaps: Vec<(u64, f64)> = grid
            .iter()
            .map(|&t| (t, bounds::corner_average_lower_bound(1.0, t)))
            .collect();
        let rec = check_lower_bound(
            &report_with("full", &gaps),
            &corner,
            LowerBoundKind::Corner,
            1.0,
        )
        .unwrap();
        assert!(rec.passed());
    }

    #[test]
    fn vacuous_lower_bound_is_skipped() {
        // The interior bound is negative at T = 16.
        let corner = Problem::interior(5);
        let rec = check_lower_bound(
            &report_with("full", &[(16, 0.01)]),
            &corner,
            LowerBoundKind::Interior,
            1.0,
        )
        .unwrap();
        assert!(rec.entries[0].skipped);
        assert!(rec.passed());
    }

    #[test]
    fn violation_detected() {
        let p = Problem::smooth_quadratic(5);
        let bound = bounds::last_iterate_gap_bound(1.0, p.g_sq_bound, 1.0, 16);
        let report = report_with("last", &[(16, bound * 3.0)]);
        let rec = check_upper_bound(&report, &p, &AveragingScheme::Last).unwrap();
        assert_eq!(rec.violations(), 1);
    }

    #[test]
    fn pairing_mismatches_rejected() {
        let report = report_with("last", &[(16, 0.0)]);
        // Last-iterate bound on a non-smooth problem.
        assert!(matches!(
            check_upper_bound(&report, &Problem::corner(5), &AveragingScheme::Last),
            Err(HarnessError::PairingMismatch(_))
        ));
        // Suffix bound with alpha = 1.
        assert!(matches!(
            check_upper_bound(
                &report,
                &Problem::smooth_quadratic(5),
                &AveragingScheme::suffix(1.0)
            ),
            Err(HarnessError::PairingMismatch(_))
        ));
        // Lower bound against the wrong problem.
        assert!(matches!(
            check_lower_bound(
                &report,
                &Problem::smooth_quadratic(5),
                LowerBoundKind::Corner,
                1.0
            ),
            Err(HarnessError::PairingMismatch(_))
        ));
    }

    #[test]
    fn high_probability_rejects_low_resolution() {
        let p = Problem::corner(3);
        let err = check_high_probability(&p, 1.0, 16, 10, 0.25, 0, InitPolicy::Origin, false)
            .unwrap_err();
        assert!(matches!(err, HarnessError::QuantileResolution));
        // replicates * delta below 5 even with many replicates.
        let err = check_high_probability(&p, 1.0, 16, 200, 0.01, 0, InitPolicy::Origin, false)
            .unwrap_err();
        assert!(matches!(err, HarnessError::QuantileResolution));
    }

    #[test]
    fn noiseless_trajectory_has_tiny_ratio() {
        let p = Problem::noiseless_quadratic(3);
        let rec =
            check_high_probability(&p, 1.0, 64, 100, 0.05, 7, InitPolicy::UniformInDomain, true)
                .unwrap();
        // One exact step to the optimum: max scaled distance is d_1^2 <= 3.
        assert!(rec.quantile <= 3.0 + 1e-12);
        assert!(rec.ratio < 0.01, "ratio {}", rec.ratio);
    }
}
