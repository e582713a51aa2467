//! Averaging schemes over SGD iterates and their streaming accumulators.

use crate::vector::Vector;
use std::fmt;

/// How a single point is distilled from the iterate sequence `w_1..w_T`
/// (plus the post-update point `w_{T+1}` for `Last`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AveragingScheme {
    /// The iterate after the final update.
    Last,
    /// Mean of all `T` queried iterates.
    FullAverage,
    /// Mean of the last `ceil(alpha * T)` queried iterates, `alpha` in (0, 1].
    SuffixAverage { alpha: f64 },
    /// Mean of the current epoch, where epoch `k` covers rounds
    /// `(ceil(growth^(k-1)), ceil(growth^k)]`; always a constant-fraction
    /// suffix without knowing `T` in advance.
    EpochSuffix { growth: f64 },
}

impl AveragingScheme {
    pub fn suffix(alpha: f64) -> Self {
        assert!(
            alpha > 0.0 && alpha <= 1.0,
            "suffix fraction must lie in (0, 1], got {alpha}"
        );
        AveragingScheme::SuffixAverage { alpha }
    }

    pub fn epoch_suffix(growth: f64) -> Self {
        assert!(growth > 1.0, "epoch growth must exceed 1, got {growth}");
        AveragingScheme::EpochSuffix { growth }
    }

    /// Stable identifier used in CSV rows and CLI flags.
    pub fn label(&self) -> String {
        match self {
            AveragingScheme::Last => "last".to_string(),
            AveragingScheme::FullAverage => "full".to_string(),
            AveragingScheme::SuffixAverage { alpha } => format!("suffix_{alpha}"),
            AveragingScheme::EpochSuffix { growth } => format!("epoch_{growth}"),
        }
    }
}

impl fmt::Display for AveragingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Number of points in the `alpha`-suffix of `t` rounds: `ceil(alpha * t)`,
/// clamped to `[1, t]`.
pub fn suffix_len(t: u64, alpha: f64) -> u64 {
    assert!(t >= 1, "suffix of an empty sequence");
    assert!(
        alpha > 0.0 && alpha <= 1.0,
        "suffix fraction must lie in (0, 1], got {alpha}"
    );
    ((alpha * t as f64).ceil() as u64).clamp(1, t)
}

/// First round included in the `alpha`-suffix of `t` rounds
/// (`t - ceil(alpha t) + 1`, one-based).
pub fn suffix_start(t: u64, alpha: f64) -> u64 {
    t - suffix_len(t, alpha) + 1
}

/// Batch mean of the last `ceil(alpha * len)` points, summed left to right.
/// With `alpha = 1` this is the full average.
pub fn suffix_average(points: &[Vector], alpha: f64) -> Vector {
    let t = points.len() as u64;
    let k = suffix_len(t, alpha);
    let start = (t - k) as usize;
    let mut sum = Vector::zeros(points[start].dim());
    for w in &points[start..] {
        sum.add_assign(w);
    }
    sum.scale(1.0 / k as f64)
}

/// Batch mean over all points, summed left to right.
pub fn batch_mean(points: &[Vector]) -> Vector {
    suffix_average(points, 1.0)
}

/// On-the-fly mean: `mean <- (count * mean + w) / (count + 1)`.
#[derive(Debug, Clone)]
pub struct RunningAverage {
    mean: Vector,
    count: u64,
}

impl RunningAverage {
    pub fn new(dim: usize) -> Self {
        Self {
            mean: Vector::zeros(dim),
            count: 0,
        }
    }

    pub fn update(&mut self, w: &Vector) {
        assert_eq!(self.mean.dim(), w.dim(), "dimension mismatch in update");
        let n = self.count as f64;
        for (m, x) in self.mean.as_mut_slice().iter_mut().zip(w.iter()) {
            *m = (n * *m + x) / (n + 1.0);
        }
        self.count += 1;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> &Vector {
        assert!(self.count > 0, "mean of an empty accumulator");
        &self.mean
    }

    pub fn reset(&mut self) {
        self.mean = Vector::zeros(self.mean.dim());
        self.count = 0;
    }
}

/// Streaming epoch-suffix accumulator: keeps the running mean of the current
/// epoch only, resetting whenever a round crosses an epoch boundary.
#[derive(Debug, Clone)]
pub struct EpochSuffixAverage {
    growth: f64,
    rounds_seen: u64,
    epoch_end: u64,
    epoch_index: i32,
    current: RunningAverage,
}

impl EpochSuffixAverage {
    pub fn new(dim: usize, growth: f64) -> Self {
        assert!(growth > 1.0, "epoch growth must exceed 1, got {growth}");
        Self {
            growth,
            rounds_seen: 0,
            epoch_end: 1,
            epoch_index: 0,
            current: RunningAverage::new(dim),
        }
    }

    /// Feed the iterate of the next round.
    pub fn push(&mut self, w: &Vector) {
        let t = self.rounds_seen + 1;
        if t > self.epoch_end {
            // Skip epoch indices whose ceiled boundary does not advance
            // (possible for growth close to 1).
            loop {
                self.epoch_index += 1;
                let e = self.growth.powi(self.epoch_index).ceil();
                let e = if e >= u64::MAX as f64 {
                    u64::MAX
                } else {
                    e as u64
                };
                if e > self.epoch_end {
                    self.epoch_end = e;
                    break;
                }
            }
            self.current.reset();
        }
        self.current.update(w);
        self.rounds_seen = t;
    }

    /// Running mean of the current epoch.
    pub fn mean(&self) -> &Vector {
        self.current.mean()
    }

    pub fn rounds_seen(&self) -> u64 {
        self.rounds_seen
    }
}
