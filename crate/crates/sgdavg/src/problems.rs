//! The benchmark problems: strongly convex objectives paired with
//! stochastic gradient oracles whose expectation is a subgradient.

use crate::domain::Domain;
use crate::rng::RngStream;
use crate::svmlight::{Dataset, SparseExample};
use crate::vector::Vector;
use std::sync::Arc;

/// A strongly convex stochastic optimization problem: an objective `F`,
/// a feasible domain, a stochastic gradient oracle, and the constants the
/// rate bounds need.
#[derive(Debug, Clone)]
pub struct Problem {
    pub name: String,
    pub dim: usize,
    pub domain: Domain,
    /// Strong-convexity modulus of `F`.
    pub lambda: f64,
    /// Smoothness modulus with respect to the optimum, when one exists.
    pub mu: Option<f64>,
    /// Documented bound on `E||g_hat||^2` over the domain.
    pub g_sq_bound: f64,
    /// Known minimizer, when available.
    pub optimum: Option<Vector>,
    /// `F` at the minimizer, when known.
    pub f_min: Option<f64>,
    kind: ProblemKind,
}

#[derive(Debug, Clone)]
enum ProblemKind {
    /// `F(w) = ||w||^2 / 2` on `[-1,1]^d`; oracle `w + z`, `z` uniform in
    /// `[-1,1]^d`.
    SmoothQuadratic,
    /// `F(w) = ||w||^2 / 2` with the exact gradient as "oracle"; handy for
    /// sanity tests and the step-size sweep.
    NoiselessQuadratic,
    /// `F(w) = ||w||^2 / 2 + w_1` on `[0,1]^d` (optimum at a corner);
    /// oracle `w + (Z, 0, ..., 0)`, `Z` uniform in `[-1, 3]`.
    Corner,
    /// `F(w) = ||w||^2 / 2 + (w_1 if w_1 >= 0 else -7 w_1)` on `[-1,1]^d`
    /// (optimum interior, objective non-smooth); oracle adds `(Z,0,...,0)`
    /// when `w_1 >= 0` and the deterministic `(-7,0,...,0)` otherwise.
    Interior,
    /// Regularized hinge loss over a sparse dataset; oracle is the gradient
    /// on one uniformly drawn example.
    Svm { dataset: Arc<Dataset>, reg: f64 },
}

impl Problem {
    pub fn smooth_quadratic(dim: usize) -> Self {
        assert!(dim >= 1);
        let d = dim as f64;
        Problem {
            name: "smooth_quadratic".into(),
            dim,
            domain: Domain::hypercube(-1.0, 1.0),
            lambda: 1.0,
            mu: Some(1.0),
            // max ||w||^2 + E||z||^2 = d + d/3 over the unit hypercube.
            g_sq_bound: d + d / 3.0,
            optimum: Some(Vector::zeros(dim)),
            f_min: Some(0.0),
            kind: ProblemKind::SmoothQuadratic,
        }
    }

    pub fn noiseless_quadratic(dim: usize) -> Self {
        assert!(dim >= 1);
        Problem {
            name: "noiseless_quadratic".into(),
            dim,
            domain: Domain::hypercube(-1.0, 1.0),
            lambda: 1.0,
            mu: Some(1.0),
            g_sq_bound: dim as f64,
            optimum: Some(Vector::zeros(dim)),
            f_min: Some(0.0),
            kind: ProblemKind::NoiselessQuadratic,
        }
    }

    pub fn corner(dim: usize) -> Self {
        assert!(dim >= 1);
        Problem {
            name: "corner".into(),
            dim,
            domain: Domain::hypercube(0.0, 1.0),
            lambda: 1.0,
            mu: None,
            g_sq_bound: dim as f64 + 5.0,
            optimum: Some(Vector::zeros(dim)),
            f_min: Some(0.0),
            kind: ProblemKind::Corner,
        }
    }

    pub fn interior(dim: usize) -> Self {
        assert!(dim >= 1);
        Problem {
            name: "interior".into(),
            dim,
            domain: Domain::hypercube(-1.0, 1.0),
            lambda: 1.0,
            mu: None,
            g_sq_bound: dim as f64 + 63.0,
            optimum: Some(Vector::zeros(dim)),
            f_min: Some(0.0),
            kind: ProblemKind::Interior,
        }
    }

    /// Hinge-loss SVM objective over `dataset` with ridge weight `reg`.
    /// Unconstrained, no known optimum; runs report raw objective values.
    pub fn svm(dataset: Arc<Dataset>, reg: f64) -> Self {
        assert!(!dataset.is_empty(), "svm problem needs a nonempty dataset");
        assert!(reg > 0.0, "regularization must be positive");
        // From w_1 = 0 with eta_t = 1/(reg * t) the iterates stay inside
        // ||w|| <= max||x|| / reg, so ||reg*w - y*x|| <= 2 max||x||.
        let g_sq_bound = 4.0 * dataset.max_norm_sq().max(f64::MIN_POSITIVE);
        Problem {
            name: format!("svm_{}", dataset.name),
            dim: dataset.max_index,
            domain: Domain::Unconstrained,
            lambda: reg,
            mu: None,
            g_sq_bound,
            optimum: None,
            f_min: None,
            kind: ProblemKind::Svm { dataset, reg },
        }
    }

    /// The objective value `F(w)`.
    pub fn eval(&self, w: &Vector) -> f64 {
        assert_eq!(w.dim(), self.dim, "dimension mismatch in eval");
        match &self.kind {
            ProblemKind::SmoothQuadratic | ProblemKind::NoiselessQuadratic => 0.5 * w.norm_sq(),
            ProblemKind::Corner => {
                assert!(self.domain.contains(w), "corner eval outside [0,1]^d");
                0.5 * w.norm_sq() + w[0]
            }
            ProblemKind::Interior => {
                assert!(self.domain.contains(w), "interior eval outside [-1,1]^d");
                let first = if w[0] >= 0.0 { w[0] } else { -7.0 * w[0] };
                0.5 * w.norm_sq() + first
            }
            ProblemKind::Svm { dataset, reg } => svm_objective(dataset, w, *reg),
        }
    }

    /// The analytic subgradient the oracle is unbiased for.
    pub fn subgradient(&self, w: &Vector) -> Vector {
        assert_eq!(w.dim(), self.dim, "dimension mismatch in subgradient");
        match &self.kind {
            ProblemKind::SmoothQuadratic | ProblemKind::NoiselessQuadratic => w.clone(),
            ProblemKind::Corner => {
                let mut g = w.clone();
                g.as_mut_slice()[0] += 1.0;
                g
            }
            ProblemKind::Interior => {
                let mut g = w.clone();
                g.as_mut_slice()[0] += if w[0] >= 0.0 { 1.0 } else { -7.0 };
                g
            }
            ProblemKind::Svm { dataset, reg } => {
                let mut g = w.scale(*reg);
                let m = dataset.len() as f64;
                for ex in &dataset.examples {
                    let margin = ex.label as f64 * ex.dot(w);
                    if margin <= 1.0 {
                        for &(i, v) in &ex.features {
                            g.as_mut_slice()[i - 1] -= ex.label as f64 * v / m;
                        }
                    }
                }
                g
            }
        }
    }

    /// One stochastic gradient draw at `w`.
    pub fn oracle(&self, w: &Vector, rng: &mut RngStream) -> Vector {
        assert_eq!(w.dim(), self.dim, "dimension mismatch in oracle");
        match &self.kind {
            ProblemKind::SmoothQuadratic => {
                let z: Vec<f64> = (0..self.dim).map(|_| rng.uniform(-1.0, 1.0)).collect();
                quadratic_gradient(w, &Vector::new(z))
            }
            ProblemKind::NoiselessQuadratic => w.clone(),
            ProblemKind::Corner => corner_gradient(w, rng.uniform(-1.0, 3.0)),
            ProblemKind::Interior => {
                if w[0] >= 0.0 {
                    interior_gradient(w, rng.uniform(-1.0, 3.0))
                } else {
                    // Negative branch is deterministic; no draw is consumed.
                    interior_gradient(w, 0.0)
                }
            }
            ProblemKind::Svm { dataset, reg } => {
                let i = rng.index(dataset.len());
                svm_gradient_for_example(w, &dataset.examples[i], *reg)
            }
        }
    }

    pub fn dataset(&self) -> Option<&Arc<Dataset>> {
        match &self.kind {
            ProblemKind::Svm { dataset, .. } => Some(dataset),
            _ => None,
        }
    }
}

/// `reg/2 ||w||^2 + mean hinge loss` (the value of the regularized SVM
/// objective). `reg` may be zero when only the loss term is wanted.
pub fn svm_objective(dataset: &Dataset, w: &Vector, reg: f64) -> f64 {
    assert!(!dataset.is_empty(), "svm objective over an empty dataset");
    assert!(reg >= 0.0);
    let hinge_sum: f64 = dataset
        .examples
        .iter()
        .map(|ex| (1.0 - ex.label as f64 * ex.dot(w)).max(0.0))
        .sum();
    0.5 * reg * w.norm_sq() + hinge_sum / dataset.len() as f64
}

/// Gradient of the regularized hinge loss on a single example.
pub fn svm_gradient_for_example(w: &Vector, ex: &SparseExample, reg: f64) -> Vector {
    let mut g = w.scale(reg);
    let margin = ex.label as f64 * ex.dot(w);
    if margin <= 1.0 {
        for &(i, v) in &ex.features {
            g.as_mut_slice()[i - 1] -= ex.label as f64 * v;
        }
    }
    g
}

fn quadratic_gradient(w: &Vector, z: &Vector) -> Vector {
    w.axpy(1.0, z)
}

fn corner_gradient(w: &Vector, z: f64) -> Vector {
    let mut g = w.clone();
    g.as_mut_slice()[0] += z;
    g
}

fn interior_gradient(w: &Vector, z: f64) -> Vector {
    let mut g = w.clone();
    g.as_mut_slice()[0] += if w[0] >= 0.0 { z } else { -7.0 };
    g
}

/// Monte-Carlo estimate of the oracle's mean and of `E||g_hat||^2` from `n`
/// draws at a fixed point.
pub fn estimate_oracle_moments(
    problem: &Problem,
    w: &Vector,
    n: u64,
    rng: &mut RngStream,
) -> (Vector, f64) {
    assert!(n >= 1);
    let mut sum = Vector::zeros(problem.dim);
    let mut sum_sq = 0.0;
    for _ in 0..n {
        let g = problem.oracle(w, rng);
        sum.add_assign(&g);
        sum_sq += g.norm_sq();
    }
    (sum.scale(1.0 / n as f64), sum_sq / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn smooth_quadratic_eval_examples() {
        let p5 = Problem::smooth_quadratic(5);
        assert_eq!(p5.eval(&Vector::zeros(5)), 0.0);
        assert_eq!(p5.eval(&Vector::new(vec![1.0; 5])), 2.5);
        assert_eq!(p5.eval(&Vector::new(vec![2.0, 0.0, 0.0, 0.0, 0.0])), 2.0);
        assert_eq!(p5.g_sq_bound, 5.0 + 5.0 / 3.0);
    }

    #[test]
    fn corner_eval_examples() {
        assert_eq!(Problem::corner(2).eval(&Vector::zeros(2)), 0.0);
        assert_eq!(Problem::corner(2).eval(&Vector::new(vec![0.5, 0.5])), 0.75);
        assert_eq!(Problem::corner(5).eval(&Vector::new(vec![1.0; 5])), 3.5);
    }

    #[test]
    #[should_panic(expected = "outside")]
    fn corner_eval_rejects_outside_domain() {
        let _ = Problem::corner(2).eval(&Vector::new(vec![-0.5, 0.0]));
    }

    #[test]
    fn interior_eval_examples() {
        let p = Problem::interior(2);
        assert_eq!(p.eval(&Vector::zeros(2)), 0.0);
        assert_eq!(p.eval(&Vector::new(vec![-0.5, 0.0])), 3.625);
        assert_eq!(p.eval(&Vector::new(vec![0.5, 0.0])), 0.625);
    }

    #[test]
    fn corner_gradient_with_injected_draw() {
        let g = corner_gradient(&Vector::new(vec![0.5, 0.5]), 3.0);
        assert_eq!(g.as_slice(), &[3.5, 0.5]);
    }

    #[test]
    fn smooth_gradient_with_zero_noise_is_w() {
        let w = Vector::new(vec![0.3, -0.7]);
        let g = quadratic_gradient(&w, &Vector::zeros(2));
        assert_eq!(g, w);
    }

    #[test]
    fn interior_negative_branch_is_deterministic() {
        let p = Problem::interior(2);
        let w = Vector::new(vec![-0.5, 0.0]);
        let mut rng = RngStream::from_seed(1);
        let g = p.oracle(&w, &mut rng);
        assert_eq!(g.as_slice(), &[-7.5, 0.0]);
        // w_1 = 0 takes the random branch.
        let w0 = Vector::new(vec![0.0, 0.0]);
        let g0 = p.oracle(&w0, &mut rng);
        assert!(g0[0] >= -1.0 && g0[0] < 3.0);
    }

    #[test]
    fn interior_second_moment_at_negative_corner() {
        let p = Problem::interior(5);
        let mut w = Vector::zeros(5);
        w.as_mut_slice()[0] = -1.0;
        let mut rng = RngStream::from_seed(3);
        let (_, second) = estimate_oracle_moments(&p, &w, 100, &mut rng);
        assert_eq!(second, 64.0);
        assert!(second <= p.g_sq_bound);
    }

    #[test]
    fn corner_oracle_moments() {
        let p = Problem::corner(5);
        let mut rng = RngStream::from_seed(7);
        let (mean, second) = estimate_oracle_moments(&p, &Vector::zeros(5), 1_000_000, &mut rng);
        assert!((mean[0] - 1.0).abs() < 0.01, "mean {mean}");
        for i in 1..5 {
            assert_eq!(mean[i], 0.0);
        }
        assert!((second - 7.0 / 3.0).abs() < 0.02, "second {second}");
        assert!(second <= p.g_sq_bound);
    }

    #[test]
    fn smooth_oracle_moments() {
        let p = Problem::smooth_quadratic(5);
        let mut rng = RngStream::from_seed(8);
        let w = Vector::new(vec![0.5, 0.0, 0.0, 0.0, 0.0]);
        let (mean, _) = estimate_oracle_moments(&p, &w, 1_000_000, &mut rng);
        for i in 0..5 {
            assert!((mean[i] - w[i]).abs() < 0.01, "coord {i}: {}", mean[i]);
        }
        let (_, second) = estimate_oracle_moments(&p, &Vector::zeros(5), 1_000_000, &mut rng);
        assert!((second - 5.0 / 3.0).abs() < 0.02, "second {second}");
    }

    #[test]
    fn single_draw_estimate_is_that_draw() {
        let p = Problem::noiseless_quadratic(3);
        let w = Vector::new(vec![0.2, -0.1, 0.4]);
        let mut rng = RngStream::from_seed(9);
        let (mean, second) = estimate_oracle_moments(&p, &w, 1, &mut rng);
        assert_eq!(mean, w);
        assert_eq!(second, w.norm_sq());
    }

    fn two_point_dataset() -> Dataset {
        crate::svmlight::parse_svmlight_str("+1 1:1\n-1 1:-1", "pair").unwrap()
    }

    #[test]
    fn svm_objective_examples() {
        let ds = two_point_dataset();
        let w = Vector::new(vec![1.0]);
        assert_eq!(svm_objective(&ds, &w, 0.0), 0.0);
        assert_eq!(svm_objective(&ds, &Vector::zeros(1), 0.0), 1.0);
        assert_eq!(svm_objective(&ds, &w, 2.0), 1.0);
    }

    #[test]
    fn svm_gradient_examples() {
        let ds = two_point_dataset();
        let ex = &ds.examples[0];
        let g = svm_gradient_for_example(&Vector::zeros(1), ex, 0.1);
        assert_eq!(g.as_slice(), &[-1.0]);
        let g = svm_gradient_for_example(&Vector::new(vec![2.0]), ex, 0.1);
        assert!((g[0] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn svm_oracle_mean_matches_subgradient() {
        let ds = Arc::new(two_point_dataset());
        let p = Problem::svm(ds, 1e-9);
        let w = Vector::zeros(1);
        let mut rng = RngStream::from_seed(11);
        let (mean, _) = estimate_oracle_moments(&p, &w, 1_000_000, &mut rng);
        // Both examples contribute -y*x = (-1): expectation (-1, ...).
        assert!((mean[0] + 1.0).abs() < 0.01, "mean {mean}");
        let sub = p.subgradient(&w);
        assert!((sub[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn optimum_is_a_local_minimum_along_axes() {
        let eps = 1e-3;
        for p in [
            Problem::smooth_quadratic(5),
            Problem::corner(5),
            Problem::interior(5),
        ] {
            let w_star = p.optimum.clone().unwrap();
            let f_star = p.eval(&w_star);
            for i in 0..p.dim {
                for sign in [-1.0, 1.0] {
                    let mut probe = w_star.clone();
                    probe.as_mut_slice()[i] += sign * eps;
                    let probe = p.domain.project(&probe);
                    assert!(p.eval(&probe) >= f_star, "{} axis {i}", p.name);
                }
            }
        }
    }

    #[test]
    fn strong_convexity_quick_check() {
        let mut rng = RngStream::from_seed(21);
        for p in [Problem::corner(5), Problem::interior(5)] {
            for _ in 0..200 {
                let sample = |rng: &mut RngStream| {
                    let coords: Vec<f64> = match p.domain {
                        Domain::Box { lower, upper } => {
                            (0..p.dim).map(|_| rng.uniform(lower, upper)).collect()
                        }
                        _ => unreachable!(),
                    };
                    Vector::new(coords)
                };
                let w = sample(&mut rng);
                let w2 = sample(&mut rng);
                let g = p.subgradient(&w);
                let lhs = p.eval(&w2);
                let rhs = p.eval(&w) + g.dot(&w2.axpy(-1.0, &w)) + 0.5 * p.lambda * w2.dist_sq(&w);
                assert!(lhs >= rhs - 1e-9, "{}: {lhs} < {rhs}", p.name);
            }
        }
    }
}
