//! The epoch-doubling baseline: constant-step SGD with averaging on
//! exponentially lengthening epochs, each epoch restarting from the
//! previous epoch's average.

use crate::averaging::RunningAverage;
use crate::problems::Problem;
use crate::rng::RngStream;
use crate::solver::{
    gap_for, initial_point, CheckpointRecord, InitPolicy, RunResult, SchemeOutput, SolverError,
};

pub const EPOCH_GD_LABEL: &str = "epoch_gd";

/// Parameters of the epoch schedule. The defaults double the epoch length
/// and halve the step size each epoch, starting from `T1 = 8` rounds at
/// `eta1 = 1/lambda`; the final epoch is truncated so the total budget is
/// consumed exactly.
#[derive(Debug, Clone)]
pub struct EpochGdConfig {
    /// Total oracle budget `T`.
    pub total_rounds: u64,
    /// Length of the first epoch.
    pub first_epoch_len: u64,
    /// Constant step size used throughout the first epoch.
    pub first_step: f64,
    /// Epoch-length multiplier per epoch (> 1).
    pub epoch_growth: f64,
    /// Step-size divisor per epoch (> 1).
    pub step_decay: f64,
    pub init: InitPolicy,
    pub checkpoints: Vec<u64>,
}

impl EpochGdConfig {
    /// The canonical doubling schedule for a `lambda`-strongly convex
    /// problem.
    pub fn standard(lambda: f64, total_rounds: u64) -> Self {
        Self {
            total_rounds,
            first_epoch_len: 8,
            first_step: 1.0 / lambda,
            epoch_growth: 2.0,
            step_decay: 2.0,
            init: InitPolicy::Origin,
            checkpoints: Vec::new(),
        }
    }

    fn validate(&self) -> Result<(), SolverError> {
        if self.total_rounds == 0
            || self.first_epoch_len == 0
            || self.total_rounds < self.first_epoch_len
        {
            return Err(SolverError::EmptyHorizon);
        }
        assert!(self.epoch_growth > 1.0, "epoch growth must exceed 1");
        assert!(self.step_decay > 1.0, "step decay must exceed 1");
        assert!(self.first_step > 0.0 && self.first_step.is_finite());
        Ok(())
    }
}

/// Runs the baseline: epoch `k` performs `first_epoch_len * growth^(k-1)`
/// rounds (the last epoch truncated to exhaust the budget) of projected SGD
/// at constant step `first_step / decay^(k-1)`; each epoch returns its
/// within-epoch average, which seeds the next epoch. The result's single
/// output is the final epoch's average.
pub fn run_epoch_gd(
    problem: &Problem,
    config: &EpochGdConfig,
    rng: &RngStream,
) -> Result<RunResult, SolverError> {
    config.validate()?;
    let mut rng = rng.clone();
    let seed = (rng.base_seed(), rng.replicate_index());
    let mut w = initial_point(problem, &config.init, &mut rng)?;

    let mut next_checkpoint = 0usize;
    let mut checkpoints_out = Vec::with_capacity(config.checkpoints.len());
    let mut epoch_lengths = Vec::new();
    let mut max_scaled_distance: Option<f64> = None;
    let mut oracle_calls = 0u64;
    let mut global_round = 0u64;
    let mut remaining = config.total_rounds;
    let mut epoch_index = 0u32;
    let mut epoch_mean = RunningAverage::new(problem.dim);

    while remaining > 0 {
        let planned = (config.first_epoch_len as f64
            * config.epoch_growth.powi(epoch_index as i32))
        .round()
        .max(1.0);
        let len = if planned >= remaining as f64 {
            remaining
        } else {
            planned as u64
        };
        let eta = config.first_step / config.step_decay.powi(epoch_index as i32);
        epoch_mean.reset();
        for _ in 0..len {
            global_round += 1;
            if let Some(w_star) = &problem.optimum {
                let scaled = global_round as f64 * w.dist_sq(w_star);
                max_scaled_distance = Some(max_scaled_distance.map_or(scaled, |m| m.max(scaled)));
            }
            let grad = problem.oracle(&w, &mut rng);
            oracle_calls += 1;
            if !grad.is_finite() {
                return Err(SolverError::NonFiniteGradient {
                    round: global_round,
                });
            }
            epoch_mean.update(&w);
            let dist_sq = problem.optimum.as_ref().map(|w_star| w.dist_sq(w_star));
            w = problem.domain.project(&w.axpy(-eta, &grad));
            if next_checkpoint < config.checkpoints.len()
                && config.checkpoints[next_checkpoint] == global_round
            {
                next_checkpoint += 1;
                let point = epoch_mean.mean();
                let objective = problem.eval(point);
                let value = gap_for(problem, EPOCH_GD_LABEL, objective)?.unwrap_or(objective);
                checkpoints_out.push(CheckpointRecord {
                    round: global_round,
                    values: vec![value],
                    dist_sq,
                });
            }
        }
        epoch_lengths.push(len);
        remaining -= len;
        epoch_index += 1;
        w = epoch_mean.mean().clone();
    }

    let objective = problem.eval(&w);
    let gap = gap_for(problem, EPOCH_GD_LABEL, objective)?;
    Ok(RunResult {
        schemes: vec![SchemeOutput {
            label: EPOCH_GD_LABEL.to_string(),
            point: w,
            objective,
            gap,
        }],
        checkpoints: checkpoints_out,
        max_scaled_distance,
        oracle_calls,
        seed,
        epoch_lengths: Some(epoch_lengths),
        iterates: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vector::Vector;

    #[test]
    fn geometric_sum_consumes_budget_exactly() {
        let p = Problem::corner(3);
        let mut cfg = EpochGdConfig::standard(1.0, 56);
        cfg.init = InitPolicy::Origin;
        let res = run_epoch_gd(&p, &cfg, &RngStream::from_seed(2)).unwrap();
        assert_eq!(res.epoch_lengths.as_deref(), Some(&[8, 16, 32][..]));
        assert_eq!(res.oracle_calls, 56);
    }

    #[test]
    fn final_epoch_truncated() {
        let p = Problem::corner(3);
        let cfg = EpochGdConfig::standard(1.0, 40);
        let res = run_epoch_gd(&p, &cfg, &RngStream::from_seed(2)).unwrap();
        assert_eq!(res.epoch_lengths.as_deref(), Some(&[8, 16, 16][..]));
        assert_eq!(res.oracle_calls, 40);
    }

    #[test]
    fn single_epoch_matches_constant_step_sgd_with_averaging() {
        // Hand-rolled oracle of the same degenerate case.
        let p = Problem::interior(4);
        let seed = RngStream::from_seed(33);
        let mut cfg = EpochGdConfig::standard(1.0, 8);
        cfg.init = InitPolicy::UniformInDomain;
        let res = run_epoch_gd(&p, &cfg, &seed).unwrap();

        let mut rng = seed.clone();
        let mut w = initial_point(&p, &InitPolicy::UniformInDomain, &mut rng).unwrap();
        let mut avg = RunningAverage::new(4);
        for _ in 0..8 {
            let g = p.oracle(&w, &mut rng);
            avg.update(&w);
            w = p.domain.project(&w.axpy(-1.0, &g));
        }
        for (a, b) in res.schemes[0].point.iter().zip(avg.mean().iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn output_stays_in_domain() {
        let p = Problem::interior(5);
        let mut cfg = EpochGdConfig::standard(1.0, 200);
        cfg.init = InitPolicy::UniformInDomain;
        cfg.checkpoints = vec![1, 50, 200];
        let res = run_epoch_gd(&p, &cfg, &RngStream::from_seed(5)).unwrap();
        assert!(p.domain.contains(&res.schemes[0].point));
        assert_eq!(res.checkpoints.len(), 3);
    }

    #[test]
    fn budget_below_first_epoch_is_rejected() {
        let p = Problem::corner(2);
        let cfg = EpochGdConfig::standard(1.0, 4);
        assert!(matches!(
            run_epoch_gd(&p, &cfg, &RngStream::from_seed(1)),
            Err(SolverError::EmptyHorizon)
        ));
    }

    #[test]
    fn deterministic_given_stream() {
        let p = Problem::corner(5);
        let cfg = EpochGdConfig::standard(1.0, 100);
        let a = run_epoch_gd(&p, &cfg, &RngStream::from_seed(9)).unwrap();
        let b = run_epoch_gd(&p, &cfg, &RngStream::from_seed(9)).unwrap();
        for (x, y) in a.schemes[0].point.iter().zip(b.schemes[0].point.iter()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        let w = Vector::zeros(5);
        assert_eq!(p.eval(&w), 0.0);
    }
}
