//! Closed-form convergence bounds, used as oracles by the conformance
//! checks and reported alongside empirical curves.
//!
//! All logarithms are natural. Harmonic sums are evaluated by direct
//! summation. Threshold rounds that come out fractional are rounded up,
//! which only shrinks the lower bounds and keeps them valid.

/// `4 G^2 / (lambda^2 t)`: expected squared distance of the `t`-th iterate
/// from the optimum under the `1/(lambda t)` schedule.
pub fn iterate_distance_bound(g_sq: f64, lambda: f64, t: u64) -> f64 {
    assert!(
        g_sq > 0.0 && lambda > 0.0 && t >= 1,
        "inputs must be positive"
    );
    4.0 * g_sq / (lambda * lambda * t as f64)
}

/// `2 mu G^2 / (lambda^2 t)`: expected gap of the last iterate on smooth
/// strongly convex problems.
pub fn last_iterate_gap_bound(mu: f64, g_sq: f64, lambda: f64, t: u64) -> f64 {
    assert!(
        g_sq > 0.0 && lambda > 0.0 && t >= 1,
        "inputs must be positive"
    );
    assert!(mu >= lambda, "smoothness modulus cannot be below lambda");
    2.0 * mu * g_sq / (lambda * lambda * t as f64)
}

/// `16 mu G^2 / (lambda^2 t)`: expected gap of the full average on smooth
/// strongly convex problems.
pub fn full_average_gap_bound(mu: f64, g_sq: f64, lambda: f64, t: u64) -> f64 {
    assert!(
        g_sq > 0.0 && lambda > 0.0 && t >= 1,
        "inputs must be positive"
    );
    assert!(mu >= lambda, "smoothness modulus cannot be below lambda");
    16.0 * mu * g_sq / (lambda * lambda * t as f64)
}

/// `((2 + 2.5 ln(1/(1-alpha))) / alpha) * G^2 / (lambda t)`: expected gap of
/// the `alpha`-suffix average, smooth or not. Diverges as `alpha` tends to
/// either end; accepted range is `[1e-6, 1)`.
pub fn suffix_average_gap_bound(alpha: f64, g_sq: f64, lambda: f64, t: u64) -> f64 {
    assert!(
        g_sq > 0.0 && lambda > 0.0 && t >= 1,
        "inputs must be positive"
    );
    assert!(
        (1e-6..1.0).contains(&alpha),
        "suffix fraction must lie in [1e-6, 1), got {alpha}"
    );
    let factor = (2.0 + 2.5 * (1.0 / (1.0 - alpha)).ln()) / alpha;
    factor * g_sq / (lambda * t as f64)
}

/// Threshold round of the corner construction: `max(2, ceil(c/2))`.
pub fn corner_lower_threshold(c: f64) -> u64 {
    assert!(c > 0.0 && c.is_finite());
    ((c / 2.0).ceil() as u64).max(2)
}

/// `(c / 16T) * sum_{t=T0}^{T-1} 1/t` with `T0 = max(2, ceil(c/2))`: the
/// gap of the full average on the corner problem is at least this, which
/// grows like `log(T)/T`.
pub fn corner_average_lower_bound(c: f64, horizon: u64) -> f64 {
    let t0 = corner_lower_threshold(c);
    assert!(
        horizon > t0,
        "lower bound needs T >= {} for c = {c}",
        t0 + 1
    );
    let harmonic: f64 = (t0..horizon).map(|t| 1.0 / t as f64).sum();
    c / (16.0 * horizon as f64) * harmonic
}

/// Threshold round of the interior construction: `max(2, ceil(6c + 1))`.
pub fn interior_lower_threshold(c: f64) -> u64 {
    assert!(c > 0.0 && c.is_finite());
    ((6.0 * c + 1.0).ceil() as u64).max(2)
}

/// `(3c / 16T) * sum_{t=T0+2}^{T} 1/t - T0/T` with `T0 = max(2, ceil(6c+1))`:
/// the gap of the full average on the interior problem is at least this.
/// The `-T0/T` term keeps the value negative (vacuous) until `T` is
/// astronomically large; callers skip nonpositive values.
pub fn interior_average_lower_bound(c: f64, horizon: u64) -> f64 {
    let t0 = interior_lower_threshold(c);
    assert!(
        horizon >= t0 + 2,
        "lower bound needs T >= {} for c = {c}",
        t0 + 2
    );
    let harmonic: f64 = (t0 + 2..=horizon).map(|t| 1.0 / t as f64).sum();
    3.0 * c / (16.0 * horizon as f64) * harmonic - t0 as f64 / horizon as f64
}

/// `(624 ln(ln(T)/delta) + 1) * G^2 / (lambda^2 t)`: with probability at
/// least `1 - delta`, `||w_t - w*||^2` stays below this for every `t <= T`
/// (requires the almost-sure gradient bound `||g_hat|| <= G`).
pub fn high_probability_distance_bound(
    g: f64,
    lambda: f64,
    t: u64,
    horizon: u64,
    delta: f64,
) -> f64 {
    assert!(g > 0.0 && lambda > 0.0, "inputs must be positive");
    assert!(horizon >= 4, "high-probability bound needs T >= 4");
    assert!(t >= 1 && t <= horizon, "round must lie in 1..=T");
    assert!(
        delta > 0.0 && delta < 1.0 / std::f64::consts::E,
        "delta must lie in (0, 1/e)"
    );
    let factor = 624.0 * ((horizon as f64).ln() / delta).ln() + 1.0;
    factor * g * g / (lambda * lambda * t as f64)
}

/// Exact deterministic iterate `w_T = prod_{t=1}^{T-1} (1 - c/t)` of
/// unprojected gradient descent on the scalar `w^2/2` objective from
/// `w_1 = 1`. Restricted to `c` in `(0, 1]` so every factor stays in
/// `[0, 1)`; used as the closed-form oracle for the step-size sweep.
pub fn deterministic_scalar_iterate(c: f64, horizon: u64) -> f64 {
    assert!(c > 0.0 && c <= 1.0, "closed form is used for c in (0, 1]");
    assert!(horizon >= 2);
    (1..horizon).map(|t| 1.0 - c / t as f64).product()
}
