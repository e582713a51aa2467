//! Convergence-rate estimation from aggregated gap curves.
//!
//! Two regressions per scheme: `ln(mean gap)` against `ln T` gives the decay
//! exponent `beta` (`gap ~ T^-beta`), and the scaled gap `mean_gap * T`
//! against `ln T` gives the slope `s`. A flat scaled curve is a `1/T` rate;
//! a linearly growing one is `log(T)/T`.

use super::{HarnessError, Report};

/// Ordinary least squares for `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy)]
pub struct OlsFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope (`sqrt(RSS/(n-2) / Sxx)`; 0 when n = 2).
    pub slope_se: f64,
    /// Euclidean norm of the residuals.
    pub residual_norm: f64,
}

pub fn ols(xs: &[f64], ys: &[f64]) -> OlsFit {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    assert!(n >= 2, "need two points for a line");
    let nf = n as f64;
    let x_mean = xs.iter().sum::<f64>() / nf;
    let y_mean = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean) * (x - x_mean)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - x_mean) * (y - y_mean))
        .sum();
    assert!(sxx > 0.0, "x values must not be constant");
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let slope_se = if n > 2 {
        (rss / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    OlsFit {
        slope,
        intercept,
        slope_se,
        residual_norm: rss.sqrt(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateClass {
    /// Every gap on the grid is exactly zero.
    Exact,
    /// `beta` near 1 and the scaled curve statistically flat.
    OneOverT,
    /// `beta` below 1 and the scaled curve growing significantly.
    LogOverT,
    /// Neither pattern.
    Ambiguous,
}

impl RateClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            RateClass::Exact => "exact",
            RateClass::OneOverT => "1/T",
            RateClass::LogOverT => "log(T)/T",
            RateClass::Ambiguous => "ambiguous",
        }
    }
}

/// Classification thresholds; the defaults separate the two regimes cleanly
/// for grids up to `2^14` with 10-100 replicates.
///
/// "Flat" combines two margins: the slope must be within `slope_sigmas`
/// standard errors of zero, or the total fitted drift across the grid must
/// stay below `drift_tol` of the curve's level. The second margin matters at
/// high replicate counts, where the standard error becomes sharper than the
/// small structural transients every scheme carries; the two regimes differ
/// by far more than `drift_tol` either way.
#[derive(Debug, Clone, Copy)]
pub struct RateThresholds {
    /// Accept `|beta - 1| <= beta_tol` as a `1/T` exponent.
    pub beta_tol: f64,
    /// Slope significance in multiples of its standard error.
    pub slope_sigmas: f64,
    /// Relative drift across the grid still counted as flat.
    pub drift_tol: f64,
}

impl Default for RateThresholds {
    fn default() -> Self {
        Self {
            beta_tol: 0.15,
            slope_sigmas: 2.0,
            drift_tol: 0.15,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RateFit {
    pub scheme: String,
    /// Decay exponent `beta` (NaN for an exactly-zero gap curve).
    pub exponent: f64,
    /// Intercept of the log-log fit.
    pub intercept: f64,
    /// Slope of the scaled gap against `ln T`.
    pub scaled_slope: f64,
    pub scaled_slope_se: f64,
    pub log_residual_norm: f64,
    pub scaled_residual_norm: f64,
    pub class: RateClass,
}

pub fn estimate_rate(report: &Report, scheme: &str) -> Result<RateFit, HarnessError> {
    estimate_rate_with(report, scheme, RateThresholds::default())
}

pub fn estimate_rate_with(
    report: &Report,
    scheme: &str,
    thresholds: RateThresholds,
) -> Result<RateFit, HarnessError> {
    let rows = report.scheme_rows(scheme);
    if rows.is_empty() {
        return Err(HarnessError::UnknownScheme(scheme.to_string()));
    }
    if rows.iter().all(|r| r.mean_gap <= 0.0) {
        return Ok(RateFit {
            scheme: scheme.to_string(),
            exponent: f64::NAN,
            intercept: f64::NAN,
            scaled_slope: 0.0,
            scaled_slope_se: 0.0,
            log_residual_norm: 0.0,
            scaled_residual_norm: 0.0,
            class: RateClass::Exact,
        });
    }

    let log_points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.mean_gap > 0.0)
        .map(|r| ((r.horizon as f64).ln(), r.mean_gap.ln()))
        .collect();
    if log_points.len() < 4 {
        return Err(HarnessError::GridTooSmall {
            needed: 4,
            got: log_points.len(),
        });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = log_points.into_iter().unzip();
    let log_fit = ols(&xs, &ys);
    let exponent = -log_fit.slope;

    let xs_all: Vec<f64> = rows.iter().map(|r| (r.horizon as f64).ln()).collect();
    let scaled: Vec<f64> = rows.iter().map(|r| r.mean_scaled_gap).collect();
    let scaled_fit = ols(&xs_all, &scaled);

    let range = xs_all.last().unwrap() - xs_all[0];
    let level = scaled.iter().map(|v| v.abs()).sum::<f64>() / scaled.len() as f64;
    let flat_margin =
        (thresholds.slope_sigmas * scaled_fit.slope_se).max(thresholds.drift_tol * level / range);
    let flat = scaled_fit.slope.abs() <= flat_margin;
    let growing = scaled_fit.slope > flat_margin;
    let class = if (exponent - 1.0).abs() <= thresholds.beta_tol && flat {
        RateClass::OneOverT
    } else if exponent < 1.0 && growing {
        RateClass::LogOverT
    } else {
        RateClass::Ambiguous
    };

    Ok(RateFit {
        scheme: scheme.to_string(),
        exponent,
        intercept: log_fit.intercept,
        scaled_slope: scaled_fit.slope,
        scaled_slope_se: scaled_fit.slope_se,
        log_residual_norm: log_fit.residual_norm,
        scaled_residual_norm: scaled_fit.residual_norm,
        class,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::ReportRow;
    use std::time::Duration;

    fn synthetic_report(gaps: &[(u64, f64)]) -> Report {
        let rows = gaps
            .iter()
            .map(|&(horizon, gap)| ReportRow {
                scheme: "s".into(),
                horizon,
                mean_gap: gap,
                std_gap: 0.0,
                mean_scaled_gap: gap * horizon as f64,
                std_scaled_gap: 0.0,
                replicates: 1,
                samples: vec![gap],
            })
            .collect();
        Report {
            rows,
            metadata: Vec::new(),
            total_oracle_calls: 0,
            wall_time: Duration::ZERO,
        }
    }

    fn grid() -> Vec<u64> {
        (7..=14).map(|k| 1u64 << k).collect()
    }

    #[test]
    fn recovers_planted_one_over_t() {
        let gaps: Vec<(u64, f64)> = grid().iter().map(|&t| (t, 5.0 / t as f64)).collect();
        let fit = estimate_rate(&synthetic_report(&gaps), "s").unwrap();
        assert!((fit.exponent - 1.0).abs() < 1e-9, "beta {}", fit.exponent);
        assert!(fit.scaled_slope.abs() < 1e-9, "s {}", fit.scaled_slope);
        assert_eq!(fit.class, RateClass::OneOverT);
        assert!((fit.intercept - 5.0f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn recovers_planted_log_over_t() {
        let gaps: Vec<(u64, f64)> = grid()
            .iter()
            .map(|&t| (t, 0.1 * (t as f64).ln() / t as f64))
            .collect();
        let fit = estimate_rate(&synthetic_report(&gaps), "s").unwrap();
        assert!(
            (fit.scaled_slope - 0.1).abs() < 1e-9,
            "s {}",
            fit.scaled_slope
        );
        assert!(fit.exponent < 1.0);
        assert_eq!(fit.class, RateClass::LogOverT);
    }

    #[test]
    fn all_zero_is_exact() {
        let gaps: Vec<(u64, f64)> = grid().iter().map(|&t| (t, 0.0)).collect();
        let fit = estimate_rate(&synthetic_report(&gaps), "s").unwrap();
        assert_eq!(fit.class, RateClass::Exact);
        assert!(fit.exponent.is_nan());
    }

    #[test]
    fn small_grid_rejected() {
        let gaps = [(128u64, 0.1), (256, 0.05), (512, 0.025)];
        assert!(matches!(
            estimate_rate(&synthetic_report(&gaps), "s"),
            Err(HarnessError::GridTooSmall { needed: 4, got: 3 })
        ));
    }

    #[test]
    fn unknown_scheme_rejected() {
        let gaps: Vec<(u64, f64)> = grid().iter().map(|&t| (t, 1.0 / t as f64)).collect();
        assert!(matches!(
            estimate_rate(&synthetic_report(&gaps), "nope"),
            Err(HarnessError::UnknownScheme(_))
        ));
    }

    #[test]
    fn ols_exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [3.0, 5.0, 7.0, 9.0];
        let fit = ols(&xs, &ys);
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.intercept - 1.0).abs() < 1e-12);
        assert!(fit.slope_se < 1e-9);
        assert!(fit.residual_norm < 1e-9);
    }
}
