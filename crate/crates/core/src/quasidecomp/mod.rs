//! Quasi-decomposability `mu^a = A mu * delta(h)` and its centering problem.
//!
//! * [`discrete`]: witnesses for a single pair `(a, A)`, centering by solving
//!   `(A - aI) h_hat = h`, iterates of the pair and lifting through a
//!   symmetry group.
//! * [`stable`]: the shift function `f_B(t) = h_{e^t, B}` of an operator-stable
//!   law and its centering.
//! * [`mod@criterion`]: the seed-measure criterion for orbit and mixing
//!   representations.
//!
//! The structural results behind these tools assume a full measure that is
//! universally centered with respect to its symmetry group. For a general
//! measure run the reduction first: [`crate::symmetry::universal_center`],
//! shift by the result, restrict to the supporting subspace (where the group
//! is orthogonalized by [`crate::linalg::orthogonalize_group`]), and only
//! then apply [`check_qd`], [`center_qd`] or [`criterion()`].

pub mod criterion;
pub mod discrete;
pub mod stable;

pub use criterion::{criterion, criterion_ordinary, normalize_discrete, CriterionResult, OrdinaryMode, OrdinaryResult};
pub use discrete::{
    center_qd, center_qd_with, centering_propagates, check_qd, check_qd_with, discrete_iterate, lift_centering,
    level_centering_exists, qd_shift_formula, QdWitness,
};
pub use stable::{center_stable, center_stable_with, fb_direct, fb_eval, ShiftSource, StableShiftFn};

use crate::linalg::{Subspace, Vector, DEFAULT_RANK_TOL};

/// Thresholds used by the centering pipeline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Relative singular-value cutoff for ranks and null spaces.
    pub rank: f64,
    /// `h` counts as orthogonal to a null space when its projection is at most
    /// `orthogonality * |h|`, or below `orthogonality_floor`.
    pub orthogonality: f64,
    pub orthogonality_floor: f64,
    /// Triplet equality for quasi-decomposability checks.
    pub triplet: f64,
    /// Post-hoc verification (triplets and characteristic functions).
    pub verify: f64,
    /// Seed-pairing criterion, relative to the total seed weight.
    pub criterion: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank: DEFAULT_RANK_TOL,
            orthogonality: 1e-8,
            orthogonality_floor: 1e-12,
            triplet: 1e-9,
            verify: 1e-8,
            criterion: 1e-9,
        }
    }
}

impl Tolerances {
    /// Largest projection of `h` on a null space still counted as orthogonal.
    pub fn orthogonality_threshold(&self, h: &Vector) -> f64 {
        (self.orthogonality * h.norm()).max(self.orthogonality_floor)
    }
}

/// How a centering verdict was reached.
#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    /// `(A - aI) h_hat = h` (or `(B - I) v1 = v0`) solved in minimum norm.
    Solved,
    /// Seed pairings against `N(A* - aI)` vanish.
    DiscreteCriterion,
    /// Seed pairings against `N(B* - I)` vanish.
    ContinuousCriterion,
    /// Unit vector `w` in the relevant null space with `(h, w) = pairing != 0`.
    Obstruction { w: Vector, pairing: f64 },
}

/// A named numeric verification with the threshold it was judged against.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CenteringResult {
    pub exists: bool,
    pub hhat: Option<Vector>,
    pub certificate: Certificate,
    pub checks: Vec<Check>,
}

impl CenteringResult {
    /// True when every recorded check passed.
    pub fn verified(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn obstruction(&self) -> Option<(&Vector, f64)> {
        match &self.certificate {
            Certificate::Obstruction { w, pairing } => Some((w, *pairing)),
            _ => None,
        }
    }
}

/// Projection of `h` on `null`, normalized, when it exceeds the orthogonality
/// threshold.
pub fn orthogonality_obstruction(null: &Subspace, h: &Vector, tol: &Tolerances) -> Option<(Vector, f64)> {
    if null.is_trivial() {
        return None;
    }
    let p = null.project(h);
    let n = p.norm();
    if n > tol.orthogonality_threshold(h) {
        Some((p.scale(1.0 / n), n))
    } else {
        None
    }
}
