//! Symmetry groups of infinitely divisible laws and universal centering.
//!
//! `S` is a symmetry of `mu` when `mu = S mu * delta(h_S)` for some shift
//! `h_S`. For a finite group `G` of symmetries, [`universal_center`] returns
//! `h'` with `mu * delta(h') = S(mu * delta(h'))` for every `S` in `G`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::grid::FrequencyGrid;
use crate::idmeasure::{compensator_factor, IdMeasure, TRIPLET_TOL};
use crate::linalg::{self, Operator, Subspace, Vector, DEFAULT_RANK_TOL, GROUP_TOL};

/// Upper bound on the size of a generated group.
pub const MAX_GROUP_ORDER: usize = 4096;
/// Charfn deviation accepted after centering.
pub const CENTERING_TOL: f64 = 1e-9;

/// Finite group of verified symmetries together with their shifts.
#[derive(Clone, Debug)]
pub struct SymmetryGroup {
    elements: Vec<Operator>,
    shifts: Vec<Vector>,
    tol: f64,
}

impl SymmetryGroup {
    /// Verifies that `elements` is a group (identity included) of symmetries of `mu`.
    pub fn new(mu: &IdMeasure, elements: Vec<Operator>) -> Result<Self> {
        let d = mu.dim();
        for s in &elements {
            if s.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: s.dim(),
                });
            }
        }
        linalg::check_group(&elements, GROUP_TOL)?;
        let id = Operator::identity(d);
        if !elements.iter().any(|s| s.frobenius_distance(&id) <= GROUP_TOL) {
            return Err(Error::NotAGroup("identity missing".into()));
        }
        let mut shifts = Vec::with_capacity(elements.len());
        for (i, s) in elements.iter().enumerate() {
            match verify_symmetry(mu, s) {
                Some(h) => shifts.push(h),
                None => return Err(Error::NotSymmetries(format!("element {i} is not a symmetry"))),
            }
        }
        Ok(Self {
            elements,
            shifts,
            tol: GROUP_TOL,
        })
    }

    /// Closes `generators` under multiplication, then verifies as in [`SymmetryGroup::new`].
    pub fn generate(mu: &IdMeasure, generators: &[Operator]) -> Result<Self> {
        let elements = close_group(mu.dim(), generators)?;
        Self::new(mu, elements)
    }

    pub fn elements(&self) -> &[Operator] {
        &self.elements
    }

    /// `h_S` with `mu = S mu * delta(h_S)`, aligned with [`SymmetryGroup::elements`].
    pub fn shifts(&self) -> &[Vector] {
        &self.shifts
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    /// Index of the element closest to `s`, if within tolerance.
    pub fn index_of(&self, s: &Operator) -> Option<usize> {
        self.elements
            .iter()
            .position(|e| e.frobenius_distance(s) <= self.tol * s.as_matrix().norm().max(1.0))
    }

    pub fn fixed_space(&self) -> Subspace {
        fixed_space(&self.elements)
    }
}

/// Multiplicative closure of `generators` and the identity.
pub fn close_group(d: usize, generators: &[Operator]) -> Result<Vec<Operator>> {
    let mut elements = vec![Operator::identity(d)];
    let contains = |set: &[Operator], x: &Operator| {
        let scale = x.as_matrix().norm().max(1.0);
        set.iter().any(|e| e.frobenius_distance(x) <= GROUP_TOL * scale)
    };
    for g in generators {
        if g.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: g.dim(),
            });
        }
        if !contains(&elements, g) {
            elements.push(g.clone());
        }
    }
    let mut frontier = 0;
    while frontier < elements.len() {
        let x = elements[frontier].clone();
        for g in generators {
            let p = x.compose(g);
            if !p.as_matrix().iter().all(|v| v.is_finite()) || p.norm() > 1e6 {
                return Err(Error::NotAGroup("generated elements are unbounded".into()));
            }
            if !contains(&elements, &p) {
                elements.push(p);
                if elements.len() > MAX_GROUP_ORDER {
                    return Err(Error::NotAGroup(format!(
                        "generated group exceeds {MAX_GROUP_ORDER} elements"
                    )));
                }
            }
        }
        frontier += 1;
    }
    Ok(elements)
}

/// Returns `h` with `mu = S mu * delta(h)` when `S` is a symmetry of `mu`.
///
/// Triplets are compared to 1e-10 (relative); the characteristic function
/// identity is then checked on the verification grid.
pub fn verify_symmetry(mu: &IdMeasure, s: &Operator) -> Option<Vector> {
    if s.dim() != mu.dim() {
        return None;
    }
    let pushed = mu.pushforward(s);
    let h = mu.shift() - pushed.shift();
    let candidate = pushed.shifted(&h);
    if mu.triplet_mismatch(&candidate, TRIPLET_TOL, &[]).is_some() {
        return None;
    }
    let grid = FrequencyGrid::verification(mu.dim());
    let dev = mu.max_charfn_deviation(&candidate, &grid, ExecMode::default());
    if dev > CENTERING_TOL {
        return None;
    }
    Some(h)
}

/// `{v : S v = v for all S}`.
pub fn fixed_space(elements: &[Operator]) -> Subspace {
    let ops: Vec<Operator> = elements.iter().map(|s| s.shift_diagonal(1.0)).collect();
    linalg::common_null_space(&ops, DEFAULT_RANK_TOL)
}

/// Supporting subspace `W` of `mu` and the restriction of the group to it.
#[derive(Clone, Debug)]
pub struct Restriction {
    pub subspace: Subspace,
    /// `Q* S Q` for the orthonormal basis `Q` of `W`.
    pub elements: Vec<Operator>,
}

/// Restricts every element of `g` to `W = ssupp(mu)`, failing if some `S`
/// does not map `W` into itself.
pub fn restrict_to_support(mu: &IdMeasure, g: &SymmetryGroup) -> Result<Restriction> {
    let w = mu.ssupp(DEFAULT_RANK_TOL).subspace;
    if w.is_trivial() {
        return Ok(Restriction {
            subspace: w,
            elements: Vec::new(),
        });
    }
    let q = w.basis_matrix();
    let p = q * q.transpose();
    let mut out = Vec::with_capacity(g.len());
    for (i, s) in g.elements().iter().enumerate() {
        let sq = s.as_matrix() * q;
        let leak = linalg::singular_values(&(&sq - &p * &sq)).max();
        if leak > 1e-9 * s.norm().max(1.0) {
            return Err(Error::RestrictionInvalid(format!(
                "element {i} moves the supporting subspace by {leak:e}"
            )));
        }
        out.push(Operator::from_raw(q.transpose() * sq));
    }
    Ok(Restriction {
        subspace: w,
        elements: out,
    })
}

/// `h' = -(m + sum_{atoms} w g_T(u) u)` with `g_T(u) = (|u|^2 - |Tu|^2) / ((1+|Tu|^2)(1+|u|^2))`,
/// where `t` acts on the coordinates of `w`.
pub fn center_with_conjugator(mu: &IdMeasure, w: &Subspace, t: &Operator) -> Vector {
    let mut acc = mu.shift().clone();
    if w.is_trivial() {
        return -acc;
    }
    let q = w.basis_matrix();
    for at in mu.levy().atoms() {
        let coords = q.transpose() * at.point.as_dvector();
        let tu = t.as_matrix() * coords;
        let c = compensator_factor(at.point.norm_squared(), tu.norm_squared());
        acc = acc + at.point.scale(at.weight * c);
    }
    -acc
}

/// Universal centering of `mu` with respect to the finite symmetry group `g`.
pub fn universal_center(mu: &IdMeasure, g: &SymmetryGroup) -> Result<Vector> {
    universal_center_with_conjugator(mu, g, None)
}

/// As [`universal_center`], with the conjugator `T` on `W` replaced by `T Q`
/// when `q` (in coordinates of `W`) is supplied.
pub fn universal_center_with_conjugator(mu: &IdMeasure, g: &SymmetryGroup, q: Option<&Operator>) -> Result<Vector> {
    for (i, s) in g.elements().iter().enumerate() {
        if verify_symmetry(mu, s).is_none() {
            return Err(Error::NotSymmetries(format!("element {i} is not a symmetry of the measure")));
        }
    }
    let r = restrict_to_support(mu, g)?;
    let h = if r.subspace.is_trivial() {
        -mu.shift().clone()
    } else {
        let mut t = linalg::orthogonalize_group(&r.elements)?;
        if let Some(q) = q {
            if q.dim() != t.dim() {
                return Err(Error::DimensionMismatch {
                    expected: t.dim(),
                    found: q.dim(),
                });
            }
            t = t.compose(q);
        }
        center_with_conjugator(mu, &r.subspace, &t)
    };
    let worst = symmetry_deviations(mu, g, &h).into_iter().fold(0.0, f64::max);
    if worst.is_nan() || worst > CENTERING_TOL {
        return Err(Error::NotSymmetries(format!(
            "centered measure still moves under the group (deviation {worst:e})"
        )));
    }
    Ok(h)
}

/// `max_u |phi(u) - phi_S(u)|` on the verification grid for `mu * delta(h)`
/// against `S(mu * delta(h))`, one entry per element.
pub fn symmetry_deviations(mu: &IdMeasure, g: &SymmetryGroup, h: &Vector) -> Vec<f64> {
    let centered = mu.shifted(h);
    let grid = FrequencyGrid::verification(mu.dim());
    g.elements()
        .iter()
        .map(|s| centered.max_charfn_deviation(&centered.pushforward(s), &grid, ExecMode::default()))
        .collect()
}

/// Orthonormal basis matrix of `W` for callers that work in its coordinates.
pub fn support_basis(mu: &IdMeasure) -> DMatrix<f64> {
    mu.ssupp(DEFAULT_RANK_TOL).subspace.basis_matrix().clone()
}
