//! Feasible sets and Euclidean projection.

use crate::vector::Vector;

/// Membership tolerance, in multiples of the coordinate magnitude.
const MEMBERSHIP_ULPS: f64 = 4.0 * f64::EPSILON;

/// A convex feasible set. Boxes are hypercubes (one bound pair applied to
/// every coordinate); balls are centered at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Box { lower: f64, upper: f64 },
    Ball { radius: f64 },
    Unconstrained,
}

impl Domain {
    pub fn hypercube(lower: f64, upper: f64) -> Self {
        assert!(lower < upper, "box requires lower < upper");
        assert!(lower.is_finite() && upper.is_finite());
        Domain::Box { lower, upper }
    }

    pub fn ball(radius: f64) -> Self {
        assert!(
            radius > 0.0 && radius.is_finite(),
            "ball requires radius > 0"
        );
        Domain::Ball { radius }
    }

    /// Euclidean projection onto the set. Total on finite input: clamp per
    /// coordinate for boxes, radial rescale for balls, identity otherwise.
    /// Exactly idempotent: a projected point reprojects to itself bitwise.
    pub fn project(&self, v: &Vector) -> Vector {
        debug_assert!(v.is_finite());
        match *self {
            Domain::Box { lower, upper } => {
                Vector::new(v.iter().map(|x| x.clamp(lower, upper)).collect())
            }
            Domain::Ball { radius } => {
                let mut p = v.clone();
                // Rescaling can leave the norm an ulp above the radius;
                // repeat until it lands inside so reprojection is identity.
                loop {
                    let norm = p.norm();
                    if norm <= radius {
                        break p;
                    }
                    p = p.scale(radius / norm);
                }
            }
            Domain::Unconstrained => v.clone(),
        }
    }

    /// Membership check with a small relative tolerance so that projected
    /// points always test as members.
    pub fn contains(&self, v: &Vector) -> bool {
        match *self {
            Domain::Box { lower, upper } => v.iter().all(|&x| {
                let tol = MEMBERSHIP_ULPS * x.abs().max(1.0);
                x >= lower - tol && x <= upper + tol
            }),
            Domain::Ball { radius } => v.norm() <= radius * (1.0 + MEMBERSHIP_ULPS),
            Domain::Unconstrained => true,
        }
    }
}
