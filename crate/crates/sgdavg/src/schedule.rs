//! The 1/t step-size schedule.

/// Step sizes `eta(t) = c / (lambda * t)`.
///
/// `lambda` is normally the problem's strong-convexity modulus; sweeps may
/// substitute a different value to emulate `eta(t) = c' / t` regimes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSchedule {
    pub c: f64,
    pub lambda: f64,
}

impl StepSchedule {
    pub fn new(c: f64, lambda: f64) -> Self {
        assert!(c > 0.0 && c.is_finite(), "step multiplier c must be > 0");
        assert!(lambda > 0.0 && lambda.is_finite(), "lambda must be > 0");
        Self { c, lambda }
    }

    /// `eta(t) = c / (lambda * t)`, defined for rounds t >= 1.
    pub fn step_size(&self, t: u64) -> f64 {
        assert!(t >= 1, "round index starts at 1");
        self.c / (self.lambda * t as f64)
    }
}
