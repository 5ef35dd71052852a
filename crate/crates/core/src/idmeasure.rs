//! Infinitely divisible measures as Lévy triplets `[m, D, M]` with a finite
//! atomic Lévy measure `M`.
//!
//! The characteristic function is
//!
//! ```text
//! mu^(u) = exp{ i(m,u) - (Du,u)/2 + sum_k w_k (e^{i(v_k,u)} - 1 - i(v_k,u)/(1+|v_k|^2)) }
//! ```
//!
//! and every operation here (pushforward, convolution, convolution powers,
//! shifts) acts exactly on the triplet.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::grid::FrequencyGrid;
use crate::linalg::{self, Operator, Subspace, Vector};

/// Points closer than this are merged into one atom.
pub const ATOM_MERGE_TOL: f64 = 1e-12;
/// Default tolerance for triplet equality.
pub const TRIPLET_TOL: f64 = 1e-10;
const SYMMETRY_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

/// One point mass of a Lévy measure.
#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub point: Vector,
    pub weight: f64,
}

impl Atom {
    pub fn new(point: Vector, weight: f64) -> Self {
        Self { point, weight }
    }
}

/// `(|u|^2 - |Au|^2) / ((1 + |Au|^2)(1 + |u|^2))`, the scalar factor of the
/// shift correction picked up when a Lévy measure is pushed forward.
pub fn compensator_factor(u_norm_sq: f64, au_norm_sq: f64) -> f64 {
    (u_norm_sq - au_norm_sq) / ((1.0 + au_norm_sq) * (1.0 + u_norm_sq))
}

fn lex_cmp(x: &Vector, y: &Vector) -> std::cmp::Ordering {
    x.as_slice()
        .iter()
        .zip(y.as_slice())
        .map(|(a, b)| a.total_cmp(b))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

fn dist(x: &Vector, y: &Vector) -> f64 {
    x.as_slice()
        .iter()
        .zip(y.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Finite Lévy measure on `V \ {0}`.
#[derive(Clone, Debug, PartialEq)]
pub struct LevyAtoms {
    dim: usize,
    atoms: Vec<Atom>,
}

impl LevyAtoms {
    pub fn empty(dim: usize) -> Self {
        Self { dim, atoms: Vec::new() }
    }

    pub fn new(dim: usize, atoms: Vec<Atom>) -> Result<Self> {
        for (k, a) in atoms.iter().enumerate() {
            if a.point.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: a.point.dim(),
                });
            }
            if a.point.is_zero() {
                return Err(Error::InvalidMeasure(format!("atom {k} sits at the origin")));
            }
            if !(a.weight > 0.0 && a.weight.is_finite()) {
                return Err(Error::InvalidMeasure(format!(
                    "atom {k} has non-positive or non-finite weight {}",
                    a.weight
                )));
            }
        }
        let m = Self { dim, atoms };
        if !m.integrability_sum().is_finite() {
            return Err(Error::InvalidMeasure("Lévy integrability sum is not finite".into()));
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// `sum w |v|^2 / (1 + |v|^2)`.
    pub fn integrability_sum(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| {
                let r = a.point.norm_squared();
                a.weight * r / (1.0 + r)
            })
            .sum()
    }

    /// `sum w v`.
    pub fn first_moment(&self) -> Vector {
        self.atoms
            .iter()
            .fold(Vector::zeros(self.dim), |acc, a| acc + a.point.scale(a.weight))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom::new(a.point.clone(), a.weight * s))
                .collect(),
        }
    }

    /// Image measure `AM`; atoms sent to the origin are dropped.
    pub fn pushforward(&self, a: &Operator) -> Self {
        let anorm = a.norm();
        let atoms = self
            .atoms
            .iter()
            .filter_map(|at| {
                let p = a.apply(&at.point);
                let negligible = p.norm() <= 1e-14 * anorm * at.point.norm();
                (!negligible).then(|| Atom::new(p, at.weight))
            })
            .collect();
        Self { dim: self.dim, atoms }
    }

    /// Lexicographically sorted copy with coincident points merged.
    pub fn canonical(&self) -> Self {
        let mut atoms = self.atoms.clone();
        atoms.sort_by(|x, y| lex_cmp(&x.point, &y.point));
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for at in atoms {
            // Sorted by the first coordinate, so candidates sit in a window at the end.
            let x0 = at.point.as_slice()[0];
            let hit = merged
                .iter_mut()
                .rev()
                .take_while(|m| x0 - m.point.as_slice()[0] <= ATOM_MERGE_TOL)
                .find(|m| dist(&m.point, &at.point) <= ATOM_MERGE_TOL);
            match hit {
                Some(m) => m.weight += at.weight,
                None => merged.push(at),
            }
        }
        Self { dim: self.dim, atoms: merged }
    }

    /// Sum of two Lévy measures in canonical form.
    pub fn merged(&self, other: &LevyAtoms) -> Self {
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        Self { dim: self.dim, atoms }.canonical()
    }

    /// Atoms of `self` and of `other` left without a partner when matching
    /// points and weights to the relative tolerance `tol` (scaled by
    /// `max(1, |x|)`). Atoms whose point is close to one of `exclude` are
    /// ignored on both sides.
    pub fn unmatched(&self, other: &LevyAtoms, tol: f64, exclude: &[Vector]) -> (Vec<Atom>, Vec<Atom>) {
        let radius = |p: &Vector| tol * p.norm().max(1.0);
        let keep = |a: &Atom| !exclude.iter().any(|e| dist(e, &a.point) <= radius(e));
        let lhs: Vec<Atom> = self.canonical().atoms.into_iter().filter(keep).collect();
        // `canonical` sorts by the first coordinate, which bounds the search window.
        let mut rhs: Vec<Option<Atom>> = other
            .canonical()
            .atoms
            .into_iter()
            .filter(keep)
            .map(Some)
            .collect();
        let firsts: Vec<f64> = rhs
            .iter()
            .map(|b| b.as_ref().map_or(0.0, |b| b.point.as_slice()[0]))
            .collect();
        let mut left_over = Vec::new();
        for a in lhs {
            let r = radius(&a.point);
            let x0 = a.point.as_slice()[0];
            let start = firsts.partition_point(|&f| f < x0 - r);
            let end = firsts.partition_point(|&f| f <= x0 + r);
            let mut best: Option<(usize, f64)> = None;
            for (k, b) in rhs.iter().enumerate().take(end).skip(start) {
                let Some(b) = b else { continue };
                let gap = dist(&a.point, &b.point);
                if gap <= r
                    && (a.weight - b.weight).abs() <= tol * a.weight.max(1.0)
                    && best.is_none_or(|(_, g)| gap < g)
                {
                    best = Some((k, gap));
                }
            }
            match best {
                Some((k, _)) => rhs[k] = None,
                None => left_over.push(a),
            }
        }
        (left_over, rhs.into_iter().flatten().collect())
    }

    pub fn approx_eq(&self, other: &LevyAtoms, tol: f64) -> bool {
        let (l, r) = self.unmatched(other, tol, &[]);
        l.is_empty() && r.is_empty()
    }

    /// Lévy exponent contribution `sum w (e^{i(v,u)} - 1 - i(v,u)/(1+|v|^2))`.
    pub fn exponent(&self, u: &Vector) -> Complex64 {
        let mut re = 0.0;
        let mut im = 0.0;
        for a in &self.atoms {
            let x = a.point.dot(u);
            let h = (0.5 * x).sin();
            re += a.weight * (-2.0 * h * h);
            im += a.weight * (x.sin() - x / (1.0 + a.point.norm_squared()));
        }
        Complex64::new(re, im)
    }
}

/// Infinitely divisible law `[m, D, M]`.
#[derive(Clone, Debug, PartialEq)]
pub struct IdMeasure {
    shift: Vector,
    gaussian: Operator,
    levy: LevyAtoms,
}

impl IdMeasure {
    pub fn new(shift: Vector, gaussian: Operator, levy: LevyAtoms) -> Result<Self> {
        let d = shift.dim();
        if gaussian.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: gaussian.dim(),
            });
        }
        if levy.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: levy.dim(),
            });
        }
        if !gaussian.is_symmetric(SYMMETRY_TOL * gaussian.as_matrix().amax().max(1.0)) {
            return Err(Error::InvalidMeasure("Gaussian covariance is not symmetric".into()));
        }
        let sym = (gaussian.as_matrix() + gaussian.as_matrix().transpose()) * 0.5;
        let min_eig = sym.clone().symmetric_eigen().eigenvalues.min();
        if min_eig < -PSD_TOL {
            return Err(Error::InvalidMeasure(format!(
                "Gaussian covariance has negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(Self {
            shift,
            gaussian: Operator::from_raw(sym),
            levy,
        })
    }

    /// `delta(h)`.
    pub fn point_mass(h: Vector) -> Self {
        let d = h.dim();
        Self {
            shift: h,
            gaussian: Operator::zeros(d),
            levy: LevyAtoms::empty(d),
        }
    }

    pub fn gaussian(m: Vector, d_cov: Operator) -> Result<Self> {
        let d = m.dim();
        Self::new(m, d_cov, LevyAtoms::empty(d))
    }

    pub fn dim(&self) -> usize {
        self.shift.dim()
    }

    pub fn shift(&self) -> &Vector {
        &self.shift
    }

    pub fn covariance(&self) -> &Operator {
        &self.gaussian
    }

    pub fn levy(&self) -> &LevyAtoms {
        &self.levy
    }

    /// Lévy–Khintchine exponent `log mu^(u)` (principal, built from the triplet).
    pub fn exponent(&self, u: &Vector) -> Complex64 {
        let du = self.gaussian.apply(u);
        Complex64::new(-0.5 * du.dot(u), self.shift.dot(u)) + self.levy.exponent(u)
    }

    pub fn charfn(&self, u: &Vector) -> Complex64 {
        self.exponent(u).exp()
    }

    pub fn charfn_grid(&self, grid: &FrequencyGrid, mode: ExecMode) -> Vec<Complex64> {
        exec::map(mode, grid.points(), |u| self.charfn(u))
    }

    /// `max_u |mu^(u) - nu^(u)|` over the grid.
    pub fn max_charfn_deviation(&self, other: &IdMeasure, grid: &FrequencyGrid, mode: ExecMode) -> f64 {
        exec::max_of(mode, grid.points(), |u| (self.charfn(u) - other.charfn(u)).norm())
    }

    /// Image law `A mu = [m', A D A*, A M]` with
    /// `m' = A m + sum w (|u|^2 - |Au|^2)/((1+|Au|^2)(1+|u|^2)) A u`.
    pub fn pushforward(&self, a: &Operator) -> IdMeasure {
        let mut shift = a.apply(&self.shift);
        for at in self.levy.atoms() {
            let au = a.apply(&at.point);
            let c = compensator_factor(at.point.norm_squared(), au.norm_squared());
            shift = shift + au.scale(at.weight * c);
        }
        let am = a.as_matrix();
        let cov: DMatrix<f64> = am * self.gaussian.as_matrix() * am.transpose();
        let cov = (&cov + cov.transpose()) * 0.5;
        IdMeasure {
            shift,
            gaussian: Operator::from_raw(cov),
            levy: self.levy.pushforward(a),
        }
    }

    pub fn convolve(&self, other: &IdMeasure) -> Result<IdMeasure> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(IdMeasure {
            shift: &self.shift + &other.shift,
            gaussian: &self.gaussian + &other.gaussian,
            levy: self.levy.merged(&other.levy),
        })
    }

    /// `mu * delta(h)`.
    pub fn shifted(&self, h: &Vector) -> IdMeasure {
        IdMeasure {
            shift: &self.shift + h,
            gaussian: self.gaussian.clone(),
            levy: self.levy.clone(),
        }
    }

    /// Convolution power `mu^a = [a m, a D, a M]`.
    pub fn conv_power(&self, a: f64) -> Result<IdMeasure> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::InvalidArgument(format!("convolution power {a} must be positive")));
        }
        Ok(IdMeasure {
            shift: self.shift.scale(a),
            gaussian: self.gaussian.scale(a),
            levy: self.levy.scaled(a),
        })
    }

    /// Supporting subspace `W` and the shift `h0` with `mu * delta(h0)` full on `W`.
    pub fn ssupp(&self, tol: f64) -> SupportDecomposition {
        let d = self.dim();
        let eig = self.gaussian.as_matrix().clone().symmetric_eigen();
        let lmax = eig.eigenvalues.iter().fold(0.0f64, |m, &x| m.max(x));
        let mut cols = Vec::new();
        if lmax > 0.0 {
            for (i, &l) in eig.eigenvalues.iter().enumerate() {
                if l > tol * lmax {
                    cols.push(eig.eigenvectors.column(i).into_owned());
                }
            }
        }
        for at in self.levy.atoms() {
            cols.push(at.point.as_dvector() / at.point.norm());
        }
        let subspace = if cols.is_empty() {
            Subspace::trivial(d)
        } else {
            Subspace::from_orthonormal_columns(linalg::range_basis(&DMatrix::from_columns(&cols), tol))
        };
        let along = subspace.project(&self.shift);
        let h0 = -(&self.shift - &along);
        SupportDecomposition { subspace, h0 }
    }

    /// Component-wise triplet equality, `tol` relative to `max(1, |x|)`.
    pub fn approx_eq(&self, other: &IdMeasure, tol: f64) -> bool {
        self.triplet_mismatch(other, tol, &[]).is_none()
    }

    /// Describes the first difference between two triplets, ignoring Lévy atoms
    /// near `exclude`. `None` means equal.
    pub fn triplet_mismatch(&self, other: &IdMeasure, tol: f64, exclude: &[Vector]) -> Option<String> {
        if self.dim() != other.dim() {
            return Some("dimension".into());
        }
        let ds = self.shift.distance(&other.shift);
        if ds > tol * self.shift.norm().max(1.0) {
            return Some(format!("shift differs by {ds:e}"));
        }
        let dd = (self.gaussian.as_matrix() - other.gaussian.as_matrix()).amax();
        if dd > tol * self.gaussian.as_matrix().amax().max(1.0) {
            return Some(format!("Gaussian part differs by {dd:e}"));
        }
        let (l, r) = self.levy.unmatched(&other.levy, tol, exclude);
        if !l.is_empty() || !r.is_empty() {
            return Some(format!(
                "Lévy measures differ: {} unmatched atoms on the left, {} on the right",
                l.len(),
                r.len()
            ));
        }
        None
    }

    /// Copy with the given Lévy atoms removed (matched to `tol`, relative).
    pub fn without_atoms_near(&self, points: &[Vector], tol: f64) -> IdMeasure {
        let atoms = self
            .levy
            .atoms()
            .iter()
            .filter(|a| {
                !points
                    .iter()
                    .any(|p| p.distance(&a.point) <= tol * p.norm().max(1.0))
            })
            .cloned()
            .collect();
        IdMeasure {
            shift: self.shift.clone(),
            gaussian: self.gaussian.clone(),
            levy: LevyAtoms { dim: self.dim(), atoms },
        }
    }
}

/// Result of [`IdMeasure::ssupp`].
#[derive(Clone, Debug)]
pub struct SupportDecomposition {
    pub subspace: Subspace,
    pub h0: Vector,
}
