//! Small dense linear algebra on the coordinate space `R^d`, `1 <= d <= 16`.
//!
//! Vectors and operators are thin validated wrappers over `nalgebra` dynamic
//! storage. All routines are dense `O(d^3)` and assume an orthonormal basis,
//! so the adjoint of an operator is its transpose.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest supported dimension of `V`.
pub const MAX_DIM: usize = 16;

/// Relative singular-value threshold used for rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Closure tolerance used when validating finite groups of operators.
pub const GROUP_TOL: f64 = 1e-9;

fn check_dim(d: usize) -> Result<()> {
    if d == 0 || d > MAX_DIM {
        Err(Error::UnsupportedDimension(d))
    } else {
        Ok(())
    }
}

/// Element of the coordinate space `V = R^d`.
#[derive(Clone, PartialEq)]
pub struct Vector(DVector<f64>);

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        Self::from_dvector(DVector::from_vec(coords))
    }

    pub fn from_dvector(v: DVector<f64>) -> Result<Self> {
        check_dim(v.len())?;
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("vector"));
        }
        Ok(Self(v))
    }

    pub(crate) fn from_raw(v: DVector<f64>) -> Self {
        Self(v)
    }

    pub fn zeros(d: usize) -> Self {
        Self(DVector::zeros(d))
    }

    /// Standard basis vector `e_i` (zero-based index).
    pub fn basis(d: usize, i: usize) -> Self {
        let mut v = DVector::zeros(d);
        v[i] = 1.0;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn as_dvector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_dvector(self) -> DVector<f64> {
        self.0
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn norm_squared(&self) -> f64 {
        self.0.norm_squared()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }

    pub fn scale(&self, s: f64) -> Vector {
        Vector(&self.0 * s)
    }

    pub fn distance(&self, other: &Vector) -> f64 {
        (&self.0 - &other.0).norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.amax()
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Vector{:?}", self.0.as_slice())
    }
}

impl Add for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        Vector(&self.0 + &rhs.0)
    }
}

impl Add for Vector {
    type Output = Vector;
    fn add(self, rhs: Vector) -> Vector {
        Vector(self.0 + rhs.0)
    }
}

impl Sub for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        Vector(&self.0 - &rhs.0)
    }
}

impl Sub for Vector {
    type Output = Vector;
    fn sub(self, rhs: Vector) -> Vector {
        Vector(self.0 - rhs.0)
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        Vector(-&self.0)
    }
}

impl Neg for Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        Vector(-self.0)
    }
}

impl Mul<&Vector> for f64 {
    type Output = Vector;
    fn mul(self, rhs: &Vector) -> Vector {
        Vector(&rhs.0 * self)
    }
}

/// Linear operator on `V`, stored as a `d x d` matrix in the orthonormal basis.
#[derive(Clone, PartialEq)]
pub struct Operator(DMatrix<f64>);

impl Operator {
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        check_dim(m.nrows())?;
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("operator"));
        }
        Ok(Self(m))
    }

    /// Builds an operator from row-major rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        check_dim(d)?;
        for r in rows {
            if r.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: r.len(),
                });
            }
        }
        Self::from_matrix(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }

    pub(crate) fn from_raw(m: DMatrix<f64>) -> Self {
        Self(m)
    }

    pub fn identity(d: usize) -> Self {
        Self(DMatrix::identity(d, d))
    }

    pub fn zeros(d: usize) -> Self {
        Self(DMatrix::zeros(d, d))
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        Self::from_matrix(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn scalar(d: usize, s: f64) -> Self {
        Self(DMatrix::identity(d, d) * s)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| self.0.row(i).iter().copied().collect())
            .collect()
    }

    pub fn apply(&self, v: &Vector) -> Vector {
        Vector(&self.0 * &v.0)
    }

    pub fn compose(&self, other: &Operator) -> Operator {
        Operator(&self.0 * &other.0)
    }

    pub fn adjoint(&self) -> Operator {
        Operator(self.0.transpose())
    }

    pub fn scale(&self, s: f64) -> Operator {
        Operator(&self.0 * s)
    }

    /// `self - s * I`.
    pub fn shift_diagonal(&self, s: f64) -> Operator {
        let mut m = self.0.clone();
        for i in 0..m.nrows() {
            m[(i, i)] -= s;
        }
        Operator(m)
    }

    pub fn inverse(&self) -> Result<Operator> {
        if singular_values(&self.0).min() <= 1e-14 * self.norm().max(f64::MIN_POSITIVE) {
            return Err(Error::Singular("operator is not invertible".into()));
        }
        self.0
            .clone()
            .try_inverse()
            .map(Operator)
            .ok_or_else(|| Error::Singular("operator is not invertible".into()))
    }

    /// Integer power; negative exponents use the inverse.
    pub fn powi(&self, n: i32) -> Result<Operator> {
        let base = if n < 0 { self.inverse()? } else { self.clone() };
        let mut acc = DMatrix::identity(self.dim(), self.dim());
        let mut b = base.0;
        let mut k = n.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &b;
            }
            b = &b * &b;
            k >>= 1;
        }
        Ok(Operator(acc))
    }

    /// Spectral (largest singular value) norm.
    pub fn norm(&self) -> f64 {
        singular_values(&self.0).max()
    }

    pub fn min_singular_value(&self) -> f64 {
        singular_values(&self.0).min()
    }

    pub fn frobenius_distance(&self, other: &Operator) -> f64 {
        (&self.0 - &other.0).norm()
    }

    pub fn distance(&self, other: &Operator) -> f64 {
        Operator(&self.0 - &other.0).norm()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (&self.0 - self.0.transpose()).amax() <= tol
    }

    /// Eigenvalues over the complex field. Internal use only.
    pub(crate) fn complex_eigenvalues(&self) -> Vec<Complex64> {
        self.0.complex_eigenvalues().iter().copied().collect()
    }
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Operator{:?}", self.rows())
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator(&self.0 + &rhs.0)
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator(&self.0 - &rhs.0)
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.compose(rhs)
    }
}

impl Mul<&Vector> for &Operator {
    type Output = Vector;
    fn mul(self, rhs: &Vector) -> Vector {
        self.apply(rhs)
    }
}

pub(crate) fn singular_values(m: &DMatrix<f64>) -> DVector<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return DVector::zeros(1);
    }
    svd(m).singular_values
}

/// Thin SVD `m = U diag(s) V^T` with both factors, singular values in
/// decreasing order.
pub(crate) struct Svd {
    pub u: DMatrix<f64>,
    pub singular_values: DVector<f64>,
    pub v_t: DMatrix<f64>,
}

/// Verified SVD. The bidiagonal QR in nalgebra occasionally returns factors
/// that do not reconstruct the input when a singular value is near zero, so
/// its output is checked and replaced by one-sided Jacobi when it fails.
pub(crate) fn svd(m: &DMatrix<f64>) -> Svd {
    let scale = m.amax();
    if scale > 0.0 && scale.is_finite() {
        if let Some(s) = m.clone().try_svd(true, true, f64::EPSILON, 10_000) {
            let out = sorted(Svd {
                u: s.u.expect("u requested"),
                singular_values: s.singular_values,
                v_t: s.v_t.expect("v_t requested"),
            });
            if svd_is_accurate(m, &out, scale) {
                return out;
            }
        }
    }
    jacobi_svd(m)
}

fn svd_is_accurate(m: &DMatrix<f64>, s: &Svd, scale: f64) -> bool {
    let n = (m.nrows().max(m.ncols())) as f64;
    let tol = 64.0 * f64::EPSILON * n;
    let rec = &s.u * DMatrix::from_diagonal(&s.singular_values) * &s.v_t;
    if (rec - m).amax() > tol * scale {
        return false;
    }
    let k = s.singular_values.len();
    let ortho_u = (s.u.transpose() * &s.u - DMatrix::identity(k, k)).amax();
    let ortho_v = (&s.v_t * s.v_t.transpose() - DMatrix::identity(k, k)).amax();
    ortho_u <= tol && ortho_v <= tol
}

fn sorted(s: Svd) -> Svd {
    let k = s.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| s.singular_values[j].total_cmp(&s.singular_values[i]));
    Svd {
        u: DMatrix::from_fn(s.u.nrows(), k, |r, c| s.u[(r, order[c])]),
        singular_values: DVector::from_fn(k, |i, _| s.singular_values[order[i]]),
        v_t: DMatrix::from_fn(k, s.v_t.ncols(), |r, c| s.v_t[(order[r], c)]),
    }
}

/// One-sided (Hestenes) Jacobi SVD.
fn jacobi_svd(m: &DMatrix<f64>) -> Svd {
    if m.nrows() < m.ncols() {
        let t = jacobi_svd(&m.transpose());
        return Svd {
            u: t.v_t.transpose(),
            singular_values: t.singular_values,
            v_t: t.u.transpose(),
        };
    }
    let (rows, n) = m.shape();
    let mut a = m.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _ in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dot(&a.column(q));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..rows {
                    let (x, y) = (a[(r, p)], a[(r, q)]);
                    a[(r, p)] = c * x - s * y;
                    a[(r, q)] = s * x + c * y;
                }
                for r in 0..n {
                    let (x, y) = (v[(r, p)], v[(r, q)]);
                    v[(r, p)] = c * x - s * y;
                    v[(r, q)] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sv = DVector::from_fn(n, |j, _| a.column(j).norm());
    let mut u = DMatrix::zeros(rows, n);
    for j in 0..n {
        if sv[j] > 0.0 {
            u.set_column(j, &(a.column(j) / sv[j]));
        }
    }
    complete_orthonormal(&mut u, &sv);
    sorted(Svd {
        u,
        singular_values: sv,
        v_t: v.transpose(),
    })
}

/// Fills the zero columns of `u` (zero singular values) with an orthonormal completion.
fn complete_orthonormal(u: &mut DMatrix<f64>, sv: &DVector<f64>) {
    let rows = u.nrows();
    let mut e = 0;
    for j in 0..u.ncols() {
        if sv[j] > 0.0 {
            continue;
        }
        while e < rows {
            let mut c = DVector::zeros(rows);
            c[e] = 1.0;
            e += 1;
            for k in 0..u.ncols() {
                if k != j && (sv[k] > 0.0 || k < j) {
                    let col = u.column(k).into_owned();
                    let p = col.dot(&c);
                    c -= col * p;
                }
            }
            let nrm = c.norm();
            if nrm > 1e-8 {
                u.set_column(j, &(c / nrm));
                break;
            }
        }
    }
}

/// Linear subspace of `V` held as an orthonormal basis (columns of `basis`).
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    ambient: usize,
    basis: DMatrix<f64>,
}

impl Subspace {
    pub fn full(d: usize) -> Self {
        Self {
            ambient: d,
            basis: DMatrix::identity(d, d),
        }
    }

    pub fn trivial(d: usize) -> Self {
        Self {
            ambient: d,
            basis: DMatrix::zeros(d, 0),
        }
    }

    /// Wraps a matrix with orthonormal columns.
    pub(crate) fn from_orthonormal_columns(basis: DMatrix<f64>) -> Self {
        Self {
            ambient: basis.nrows(),
            basis,
        }
    }

    /// Span of the given vectors, rank decided with the relative tolerance `tol`.
    pub fn span(d: usize, vectors: &[Vector], tol: f64) -> Self {
        if vectors.is_empty() {
            return Self::trivial(d);
        }
        let cols: Vec<DVector<f64>> = vectors.iter().map(|v| v.0.clone()).collect();
        let m = DMatrix::from_columns(&cols);
        Self::from_orthonormal_columns(range_basis(&m, tol))
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_trivial(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient
    }

    pub fn basis_matrix(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn basis(&self) -> Vec<Vector> {
        self.basis
            .column_iter()
            .map(|c| Vector(c.into_owned()))
            .collect()
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> Operator {
        Operator(&self.basis * self.basis.transpose())
    }

    pub fn project(&self, v: &Vector) -> Vector {
        orthogonal_project(self, v)
    }

    /// Distance from `v` to the subspace.
    pub fn distance(&self, v: &Vector) -> f64 {
        (&v.0 - &self.project(v).0).norm()
    }

    pub fn orthogonal_complement(&self) -> Subspace {
        if self.is_trivial() {
            return Subspace::full(self.ambient);
        }
        kernel_of(&self.basis.transpose(), DEFAULT_RANK_TOL)
    }

    /// Coordinates of `v` in the orthonormal basis.
    pub fn coordinates(&self, v: &Vector) -> DVector<f64> {
        self.basis.transpose() * &v.0
    }

    /// Largest deviation of `B^T B` from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.basis.transpose() * &self.basis;
        let r = g.nrows();
        (g - DMatrix::<f64>::identity(r, r)).amax()
    }
}

/// Orthonormal basis of the column space, keeping singular values above `tol * sigma_max`.
pub(crate) fn range_basis(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let d = m.nrows();
    if m.ncols() == 0 || m.amax() == 0.0 {
        return DMatrix::zeros(d, 0);
    }
    let svd = svd(m);
    let u = svd.u;
    let smax = svd.singular_values.max();
    let cols: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > tol * smax)
        .map(|(i, _)| u.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(d, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

/// Null space of an arbitrary (possibly rectangular) matrix acting on `R^ncols`.
pub(crate) fn kernel_of(m: &DMatrix<f64>, tol: f64) -> Subspace {
    let n = m.ncols();
    if m.nrows() == 0 || m.amax() == 0.0 {
        return Subspace::full(n);
    }
    // nalgebra only returns the full right factor when rows >= cols.
    let padded = if m.nrows() < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = svd(&padded);
    let v_t = svd.v_t;
    let smax = svd.singular_values.max();
    let cols: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= tol * smax)
        .map(|(i, _)| v_t.row(i).transpose())
        .collect();
    if cols.is_empty() {
        Subspace::trivial(n)
    } else {
        Subspace::from_orthonormal_columns(DMatrix::from_columns(&cols))
    }
}

// Padé(13) coefficients for the scaling-and-squaring exponential.
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// `e^{tB}` by scaling and squaring around a degree-13 Padé approximant.
pub fn mat_exp(b: &Operator, t: f64) -> Result<Operator> {
    if !t.is_finite() {
        return Err(Error::NonFinite("exponent scale"));
    }
    let n = b.dim();
    let a = &b.0 * t;
    let norm1 = a
        .column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    if !norm1.is_finite() {
        return Err(Error::ExpOverflow);
    }
    let s = if norm1 > THETA13 {
        (norm1 / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a / 2f64.powi(s);
    let id = DMatrix::<f64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let c = &PADE13;
    let u_inner = &a6 * c[13] + &a4 * c[11] + &a2 * c[9];
    let u = &a * (&a6 * u_inner + &a6 * c[7] + &a4 * c[5] + &a2 * c[3] + &id * c[1]);
    let v_inner = &a6 * c[12] + &a4 * c[10] + &a2 * c[8];
    let v = &a6 * v_inner + &a6 * c[6] + &a4 * c[4] + &a2 * c[2] + &id * c[0];
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).ok_or(Error::ExpOverflow)?;
    for _ in 0..s {
        r = &r * &r;
        if r.iter().any(|x| !x.is_finite()) {
            return Err(Error::ExpOverflow);
        }
    }
    if r.iter().any(|x| !x.is_finite()) {
        return Err(Error::ExpOverflow);
    }
    Ok(Operator(r))
}

/// Orthonormal basis of `N(T)`: right singular vectors with `sigma <= tol * sigma_max`.
pub fn null_space(t: &Operator, tol: f64) -> Subspace {
    kernel_of(&t.0, tol)
}

/// Intersection of the null spaces of several operators (stacked kernel).
pub fn common_null_space(ops: &[Operator], tol: f64) -> Subspace {
    let Some(first) = ops.first() else {
        panic!("common_null_space needs at least one operator");
    };
    let d = first.dim();
    let mut stacked = DMatrix::zeros(d * ops.len(), d);
    for (k, op) in ops.iter().enumerate() {
        stacked.view_mut((k * d, 0), (d, d)).copy_from(&op.0);
    }
    kernel_of(&stacked, tol)
}

/// Outcome of [`range_decompose`].
#[derive(Clone, Debug, PartialEq)]
pub struct RangeDecomposition {
    pub in_range: bool,
    /// Minimum-norm solution of `T x = v`, present iff `in_range`.
    pub solution: Option<Vector>,
    /// Norm of the component of `v` in `N(T*)`.
    pub obstruction_norm: f64,
}

/// Decides `v in T(V)` through `V = N(T*) (+) T(V)` and returns the
/// minimum-norm preimage when it exists.
pub fn range_decompose(t: &Operator, v: &Vector, tol: f64) -> RangeDecomposition {
    range_decompose_with_rank(t, v, DEFAULT_RANK_TOL, tol)
}

pub fn range_decompose_with_rank(
    t: &Operator,
    v: &Vector,
    rank_tol: f64,
    tol: f64,
) -> RangeDecomposition {
    let d = t.dim();
    let vnorm = v.norm();
    if vnorm == 0.0 {
        return RangeDecomposition {
            in_range: true,
            solution: Some(Vector::zeros(d)),
            obstruction_norm: 0.0,
        };
    }
    if t.0.amax() == 0.0 {
        let in_range = vnorm <= tol * vnorm;
        return RangeDecomposition {
            in_range,
            solution: in_range.then(|| Vector::zeros(d)),
            obstruction_norm: vnorm,
        };
    }
    let svd = svd(&t.0);
    let u = &svd.u;
    let v_t = &svd.v_t;
    let smax = svd.singular_values.max();
    let mut x = DVector::zeros(d);
    let mut in_range_part = DVector::zeros(d);
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > rank_tol * smax {
            let ui = u.column(i);
            let coef = ui.dot(&v.0);
            in_range_part += ui * coef;
            x += v_t.row(i).transpose() * (coef / s);
        }
    }
    let obstruction_norm = (&v.0 - in_range_part).norm();
    let in_range = obstruction_norm <= tol * vnorm;
    RangeDecomposition {
        in_range,
        solution: in_range.then_some(Vector(x)),
        obstruction_norm,
    }
}

/// `sum_i (v, b_i) b_i` over the orthonormal basis of `w`.
pub fn orthogonal_project(w: &Subspace, v: &Vector) -> Vector {
    if w.is_trivial() {
        return Vector::zeros(v.dim());
    }
    Vector(&w.basis * (w.basis.transpose() * &v.0))
}

/// Checks that `elements` is closed under multiplication (to `tol`, relative)
/// and consists of invertible operators.
pub fn check_group(elements: &[Operator], tol: f64) -> Result<()> {
    if elements.is_empty() {
        return Err(Error::NotAGroup("empty element list".into()));
    }
    let d = elements[0].dim();
    for (i, s) in elements.iter().enumerate() {
        if s.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: s.dim(),
            });
        }
        let sv = singular_values(&s.0);
        if sv.min() <= 1e-12 * sv.max() {
            return Err(Error::NotAGroup(format!("element {i} is not invertible")));
        }
    }
    for (i, s) in elements.iter().enumerate() {
        for (j, r) in elements.iter().enumerate() {
            let p = &s.0 * &r.0;
            let scale = p.norm().max(1.0);
            if !elements.iter().any(|e| (&p - &e.0).norm() <= tol * scale) {
                return Err(Error::NotAGroup(format!(
                    "product of elements {i} and {j} is not in the set"
                )));
            }
        }
    }
    Ok(())
}

/// Returns `T = G^{1/2}` with `G = |G|^{-1} sum_S S* S`; every `T S T^{-1}` is orthogonal.
pub fn orthogonalize_group(group: &[Operator]) -> Result<Operator> {
    check_group(group, GROUP_TOL)?;
    let d = group[0].dim();
    let mut gram = DMatrix::zeros(d, d);
    for s in group {
        gram += s.0.transpose() * &s.0;
    }
    gram /= group.len() as f64;
    let gram = (&gram + gram.transpose()) * 0.5;
    let eig = gram.symmetric_eigen();
    if eig.eigenvalues.min() <= 0.0 {
        return Err(Error::NotAGroup("Gram average is not positive definite".into()));
    }
    let sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let t = &eig.eigenvectors * sqrt * eig.eigenvectors.transpose();
    Ok(Operator((&t + t.transpose()) * 0.5))
}

/// Relative margin used to keep eigenvalues that sit on a spectral boundary
/// out of an open region.
pub(crate) const SPECTRAL_BOUNDARY_TOL: f64 = 1e-9;

/// Invariant subspace spanned by generalized eigenvectors of `a` for the
/// eigenvalues selected by `inside`. The selected and rejected eigenvalues
/// must be separable by a circle `|z| = rho` (`Region::Disc`) or a vertical
/// line `Re z = theta` (`Region::HalfPlane`).
pub(crate) enum Region {
    /// `|z|^2 < radius_sq`
    Disc { radius_sq: f64 },
    /// `Re z > threshold`
    HalfPlane { threshold: f64 },
}

pub(crate) fn spectral_subspace(a: &Operator, region: Region) -> Result<Subspace> {
    let d = a.dim();
    let eig = a.complex_eigenvalues();
    let (inside, outside): (Vec<Complex64>, Vec<Complex64>) = match region {
        Region::Disc { radius_sq } => eig
            .iter()
            .partition(|z| z.norm_sqr() < radius_sq * (1.0 - SPECTRAL_BOUNDARY_TOL)),
        Region::HalfPlane { threshold } => eig
            .iter()
            .partition(|z| z.re > threshold + SPECTRAL_BOUNDARY_TOL * threshold.abs().max(1.0)),
    };
    if inside.is_empty() {
        return Ok(Subspace::trivial(d));
    }
    if outside.is_empty() {
        return Ok(Subspace::full(d));
    }
    let id = DMatrix::<f64>::identity(d, d);
    // Map the separating curve to the imaginary axis with the selected part on Re > 0.
    let k = match region {
        Region::Disc { .. } => {
            let r_in = inside.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let r_out = outside.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
            let rho = if r_in > 0.0 {
                (r_in * r_out).sqrt()
            } else {
                0.5 * r_out
            };
            let c = &a.0 / rho;
            // z -> (1 + z)/(1 - z) sends |z| < 1 to Re > 0.
            let denom = (&id - &c)
                .try_inverse()
                .ok_or_else(|| Error::Singular("Cayley transform".into()))?;
            (&id + &c) * denom
        }
        Region::HalfPlane { .. } => {
            let lo = outside.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
            let hi = inside.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
            let mid = 0.5 * (lo + hi);
            &a.0 - &id * mid
        }
    };
    let sign = matrix_sign(k)?;
    let proj = (&id + sign) * 0.5;
    let svd = svd(&proj);
    let u = svd.u;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let cols: Vec<DVector<f64>> = order
        .iter()
        .take(inside.len())
        .map(|&i| u.column(i).into_owned())
        .collect();
    Ok(Subspace::from_orthonormal_columns(DMatrix::from_columns(&cols)))
}

/// Matrix sign function by the scaled Newton iteration.
fn matrix_sign(mut x: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = x.nrows() as f64;
    for _ in 0..100 {
        let inv = x
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Singular("sign iteration".into()))?;
        let det = x.determinant().abs();
        let mu = if det > 0.0 && det.is_finite() {
            det.powf(-1.0 / n)
        } else {
            1.0
        };
        let next = (&x * mu + inv / mu) * 0.5;
        let change = (&next - &x).norm();
        let size = next.norm();
        x = next;
        if change <= 1e-14 * size {
            return Ok(x);
        }
    }
    Err(Error::Divergent("matrix sign iteration did not converge".into()))
}
