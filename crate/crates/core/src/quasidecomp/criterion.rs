//! Seed-measure criterion: a universal centering exists iff
//! `sum_seeds w (u, w_j) = 0` for a basis `w_j` of `N(A* - aI)` (orbit case)
//! or `N(B* - I)` (mixing case).

use crate::error::{Error, Result};
use crate::levyrep::LevyRep;
use crate::linalg::{self, Operator, Subspace, Vector};

use super::Tolerances;

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionResult {
    pub satisfied: bool,
    /// Orthonormal basis of the relevant null space.
    pub null_basis: Vec<Vector>,
    /// `sum_seeds w (u, w_j)` for each basis vector.
    pub pairings: Vec<f64>,
    /// Basis vectors with a pairing above `tolerance`.
    pub obstructions: Vec<(Vector, f64)>,
    pub tolerance: f64,
}

fn null_space_of(rep: &LevyRep, rank_tol: f64) -> Subspace {
    match rep {
        LevyRep::Orbit(o) => linalg::null_space(&o.operator().shift_diagonal(o.a()).adjoint(), rank_tol),
        LevyRep::Mixing(m) => linalg::null_space(&m.exponent().shift_diagonal(1.0).adjoint(), rank_tol),
    }
}

pub fn criterion(rep: &LevyRep) -> CriterionResult {
    criterion_with(rep, &Tolerances::default())
}

pub fn criterion_with(rep: &LevyRep, tol: &Tolerances) -> CriterionResult {
    let null = null_space_of(rep, tol.rank);
    let seeds = rep.seeds();
    let threshold = tol.criterion * seeds.total_weight();
    let null_basis = null.basis();
    let pairings: Vec<f64> = null_basis
        .iter()
        .map(|w| seeds.atoms().iter().map(|s| s.weight * s.point.dot(w)).sum())
        .collect();
    let obstructions: Vec<(Vector, f64)> = null_basis
        .iter()
        .zip(&pairings)
        .filter(|(_, p)| p.abs() > threshold)
        .map(|(w, p)| (w.clone(), *p))
        .collect();
    CriterionResult {
        satisfied: obstructions.is_empty(),
        null_basis,
        pairings,
        obstructions,
        tolerance: threshold,
    }
}

/// Ordinary (scalar) semistable and stable laws.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrdinaryMode {
    /// `A = aI`: seeds live on `{a < |u| <= 1}`; the condition is
    /// `int_{a<|u|<=1} u M(du) = 0`.
    Semistable,
    /// `B = I`: seeds live on the unit sphere; the condition is
    /// `int_{|u|=1} u M(du) = 0`.
    Stable,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrdinaryResult {
    pub satisfied: bool,
    /// The tested quantity `sum_seeds w u`.
    pub moment: Vector,
    pub tolerance: f64,
}

/// Checks the scalar-operator form of the criterion: the seed first moment vanishes.
pub fn criterion_ordinary(rep: &LevyRep, mode: OrdinaryMode) -> Result<OrdinaryResult> {
    criterion_ordinary_with(rep, mode, &Tolerances::default())
}

pub fn criterion_ordinary_with(rep: &LevyRep, mode: OrdinaryMode, tol: &Tolerances) -> Result<OrdinaryResult> {
    let (op, scalar) = match (rep, mode) {
        (LevyRep::Orbit(o), OrdinaryMode::Semistable) => (o.operator(), o.a()),
        (LevyRep::Mixing(m), OrdinaryMode::Stable) => (m.exponent(), 1.0),
        (LevyRep::Orbit(_), OrdinaryMode::Stable) => {
            return Err(Error::WrongMode("stable mode needs a mixing representation".into()))
        }
        (LevyRep::Mixing(_), OrdinaryMode::Semistable) => {
            return Err(Error::WrongMode("semistable mode needs an orbit representation".into()))
        }
    };
    let target = Operator::scalar(op.dim(), scalar);
    let gap = op.frobenius_distance(&target);
    if gap > 1e-12 * scalar.max(1.0) {
        return Err(Error::WrongMode(format!(
            "operator differs from {scalar} I by {gap:e}"
        )));
    }
    let seeds = rep.seeds();
    let moment = seeds.first_moment();
    let tolerance = tol.criterion * seeds.total_weight();
    Ok(OrdinaryResult {
        satisfied: moment.max_abs() <= tolerance,
        moment,
        tolerance,
    })
}

/// Replaces `(a, A)` by `(1/a, A^{-1})` when `a > 1`.
pub fn normalize_discrete(a: f64, op: &Operator) -> Result<(f64, Operator)> {
    if !(a > 0.0 && a.is_finite()) || a == 1.0 {
        return Err(Error::InvalidArgument(format!("exponent a = {a} must be positive and differ from 1")));
    }
    if a > 1.0 {
        Ok((1.0 / a, op.inverse()?))
    } else {
        Ok((a, op.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::idmeasure::{Atom, LevyAtoms};
    use crate::levyrep::{MixingLevy, OrbitLevy};

    fn v(x: &[f64]) -> Vector {
        Vector::new(x.to_vec()).unwrap()
    }

    fn seeds(d: usize, pts: &[(&[f64], f64)]) -> LevyAtoms {
        LevyAtoms::new(d, pts.iter().map(|(p, w)| Atom::new(v(p), *w)).collect()).unwrap()
    }

    #[test]
    fn symmetric_seeds_satisfy() {
        let o = OrbitLevy::new(seeds(2, &[(&[0.8, 0.0], 1.0), (&[-0.8, 0.0], 1.0)]), Operator::scalar(2, 0.5), 0.5)
            .unwrap();
        let r = criterion(&LevyRep::Orbit(o));
        assert!(r.satisfied);
        assert_eq!(r.null_basis.len(), 2);
    }

    #[test]
    fn trivial_null_space_is_vacuous() {
        let o = OrbitLevy::new(seeds(1, &[(&[0.9], 1.0)]), Operator::scalar(1, 0.6), 0.5).unwrap();
        let r = criterion(&LevyRep::Orbit(o));
        assert!(r.satisfied && r.null_basis.is_empty());
    }

    #[test]
    fn single_scalar_seed_fails() {
        let o = OrbitLevy::new(seeds(1, &[(&[0.9], 1.0)]), Operator::scalar(1, 0.5), 0.5).unwrap();
        let r = criterion(&LevyRep::Orbit(o));
        assert!(!r.satisfied);
        assert!((r.pairings[0].abs() - 0.9).abs() < 1e-15);
    }

    #[test]
    fn ordinary_modes() {
        let o = LevyRep::Orbit(
            OrbitLevy::new(seeds(2, &[(&[0.8, 0.1], 1.0), (&[-0.8, -0.1], 1.0)]), Operator::scalar(2, 0.6), 0.6).unwrap(),
        );
        assert!(criterion_ordinary(&o, OrdinaryMode::Semistable).unwrap().satisfied);
        assert!(matches!(criterion_ordinary(&o, OrdinaryMode::Stable), Err(Error::WrongMode(_))));
        let m = LevyRep::Mixing(MixingLevy::new(seeds(2, &[(&[0.6, 0.8], 1.0)]), Operator::identity(2)).unwrap());
        let r = criterion_ordinary(&m, OrdinaryMode::Stable).unwrap();
        assert!(!r.satisfied);
        assert!(!criterion(&m).satisfied);
        let not_scalar = LevyRep::Mixing(
            MixingLevy::new(seeds(2, &[(&[1.0, 0.0], 1.0)]), Operator::diagonal(&[1.0, 2.0]).unwrap()).unwrap(),
        );
        assert!(matches!(criterion_ordinary(&not_scalar, OrdinaryMode::Stable), Err(Error::WrongMode(_))));
    }

    #[test]
    fn normalization_inverts_large_exponent() {
        let (a, op) = normalize_discrete(4.0, &Operator::scalar(2, 2.0)).unwrap();
        assert_eq!(a, 0.25);
        assert!(op.distance(&Operator::scalar(2, 0.5)) < 1e-15);
        assert!(normalize_discrete(1.0, &Operator::identity(2)).is_err());
    }
}
