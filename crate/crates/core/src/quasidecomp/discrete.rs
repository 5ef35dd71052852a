//! Single pairs `(a, A)` and the discrete semigroup `c^n`.

use crate::error::{Error, Result};
use crate::exec::ExecMode;
use crate::grid::FrequencyGrid;
use crate::idmeasure::{compensator_factor, IdMeasure};
use crate::linalg::{self, Operator, Vector};
use crate::symmetry::SymmetryGroup;

use super::{orthogonality_obstruction, CenteringResult, Certificate, Check, Tolerances};

/// `mu^a = A mu * delta(h)` for the measure the witness was issued against.
#[derive(Clone, Debug, PartialEq)]
pub struct QdWitness {
    pub a: f64,
    pub operator: Operator,
    pub h: Vector,
}

fn check_exponent(a: f64) -> Result<()> {
    if !(a > 0.0 && a.is_finite()) || a == 1.0 {
        return Err(Error::InvalidArgument(format!("exponent a = {a} must be positive and differ from 1")));
    }
    Ok(())
}

pub fn check_qd(mu: &IdMeasure, a: f64, op: &Operator) -> Result<Option<QdWitness>> {
    check_qd_with(mu, a, op, &[], &Tolerances::default())
}

/// As [`check_qd`], ignoring Lévy atoms near `exclude` (the boundary of a
/// truncated orbit measure).
pub fn check_qd_with(
    mu: &IdMeasure,
    a: f64,
    op: &Operator,
    exclude: &[Vector],
    tol: &Tolerances,
) -> Result<Option<QdWitness>> {
    check_exponent(a)?;
    if op.dim() != mu.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            found: op.dim(),
        });
    }
    let lhs = mu.conv_power(a)?;
    let rhs = mu.pushforward(op);
    let h = lhs.shift() - rhs.shift();
    let candidate = rhs.shifted(&h);
    if lhs.triplet_mismatch(&candidate, tol.triplet, exclude).is_some() {
        return Ok(None);
    }
    Ok(Some(QdWitness {
        a,
        operator: op.clone(),
        h,
    }))
}

/// `h = a m - A m - sum w g_A(u) A u` with `g_A(u) = (|u|^2 - |Au|^2)/((1+|Au|^2)(1+|u|^2))`.
pub fn qd_shift_formula(mu: &IdMeasure, a: f64, op: &Operator) -> Vector {
    let m = mu.shift();
    let mut h = m.scale(a) - op.apply(m);
    for at in mu.levy().atoms() {
        let au = op.apply(&at.point);
        let g = compensator_factor(at.point.norm_squared(), au.norm_squared());
        h = h - au.scale(at.weight * g);
    }
    h
}

pub fn center_qd(mu: &IdMeasure, w: &QdWitness) -> Result<CenteringResult> {
    center_qd_with(mu, w, &[], &Tolerances::default())
}

/// Decides whether `(A - aI) h_hat = h` is solvable through `h ⊥ N(A* - aI)`
/// and, if so, verifies that `mu * delta(h_hat)` is strictly quasi-decomposable.
pub fn center_qd_with(mu: &IdMeasure, w: &QdWitness, exclude: &[Vector], tol: &Tolerances) -> Result<CenteringResult> {
    let t = w.operator.shift_diagonal(w.a);
    let null = linalg::null_space(&t.adjoint(), tol.rank);
    if let Some((dir, pairing)) = orthogonality_obstruction(&null, &w.h, tol) {
        return Ok(CenteringResult {
            exists: false,
            hhat: None,
            certificate: Certificate::Obstruction {
                w: dir,
                pairing: pairing.copysign(1.0),
            },
            checks: Vec::new(),
        });
    }
    // The orthogonality verdict decides; the solve uses the same rank cutoff.
    let decomposition = linalg::range_decompose_with_rank(&t, &w.h, tol.rank, f64::INFINITY);
    let hhat = decomposition.solution.expect("infinite tolerance accepts every vector");
    let checks = strictness_checks(mu, w.a, &w.operator, &w.h, &hhat, exclude, tol)?;
    Ok(CenteringResult {
        exists: true,
        hhat: Some(hhat),
        certificate: Certificate::Solved,
        checks,
    })
}

fn strictness_checks(
    mu: &IdMeasure,
    a: f64,
    op: &Operator,
    h: &Vector,
    hhat: &Vector,
    exclude: &[Vector],
    tol: &Tolerances,
) -> Result<Vec<Check>> {
    let residual = (op.apply(hhat) - hhat.scale(a)).distance(h);
    let centered = mu.shifted(hhat);
    let lhs = centered.conv_power(a)?;
    let rhs = centered.pushforward(op);
    let shift_gap = lhs.shift().distance(rhs.shift()) / lhs.shift().norm().max(1.0);
    let triplet_ok = lhs.triplet_mismatch(&rhs, tol.verify, exclude).is_none();
    let grid = FrequencyGrid::verification(mu.dim());
    let pruned_lhs = lhs.without_atoms_near(exclude, tol.verify);
    let pruned_rhs = rhs.without_atoms_near(exclude, tol.verify);
    let dev = pruned_lhs.max_charfn_deviation(&pruned_rhs, &grid, ExecMode::default());
    Ok(vec![
        Check::new("shift equation residual", residual, tol.verify * h.norm().max(1.0)),
        Check::new("strict shift gap", shift_gap, tol.verify),
        Check::new("strict triplet mismatch", if triplet_ok { 0.0 } else { 1.0 }, 0.0),
        Check::new("strict charfn deviation", dev, tol.verify),
    ])
}

/// Projects a centering `h0` (valid for one `A0`) onto the fixed space of the
/// symmetry group; the result centers `mu` for every `A` in `A0 G`. Each
/// supplied alternative must agree with `A0` on the projected vector.
pub fn lift_centering(g: &SymmetryGroup, h0: &Vector, a0: &Operator, alternatives: &[Operator]) -> Result<Vector> {
    let fixed = g.fixed_space();
    let hhat = fixed.project(h0);
    let base = a0.apply(&hhat);
    for (i, alt) in alternatives.iter().enumerate() {
        let gap = alt.apply(&hhat).distance(&base);
        if gap > 1e-9 * base.norm().max(hhat.norm()).max(1.0) {
            return Err(Error::FixedSpaceViolated(format!(
                "alternative {i} differs from the reference operator on the fixed space by {gap:e}"
            )));
        }
    }
    Ok(hhat)
}

/// Shift `h_n` with `mu^{c^n} = A^n mu * delta(h_n)` given `h_1`.
pub fn discrete_iterate(h1: &Vector, c: f64, op: &Operator, n: i32) -> Result<Vector> {
    if n == 0 {
        return Err(Error::InvalidArgument("iterate index must be non-zero".into()));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidArgument(format!("c = {c} must be positive")));
    }
    let (base, step, h) = if n > 0 {
        (c, op.clone(), h1.clone())
    } else {
        let inv = op
            .inverse()
            .map_err(|_| Error::Singular("negative iterates need an invertible operator".into()))?;
        let hm1 = inv.apply(h1).scale(-1.0 / c);
        (1.0 / c, inv, hm1)
    };
    // h_{k+1} = base h_k + step^k h
    let mut acc = h.clone();
    let mut power = h.clone();
    for _ in 1..n.unsigned_abs() {
        power = step.apply(&power);
        acc = acc.scale(base) + power.clone();
    }
    Ok(acc)
}

/// Whether `h_n ⊥ N((A^n)* - c^n I)`.
pub fn level_centering_exists(c: f64, op: &Operator, h1: &Vector, n: i32, tol: &Tolerances) -> Result<bool> {
    let hn = discrete_iterate(h1, c, op, n)?;
    let an = op.powi(n)?;
    let cn = c.powi(n);
    let null = linalg::null_space(&an.shift_diagonal(cn).adjoint(), tol.rank);
    Ok(orthogonality_obstruction(&null, &hn, tol).is_none())
}

/// `true` unless a centering exists at level `n` but not at level 1.
pub fn centering_propagates(c: f64, op: &Operator, h1: &Vector, n: i32) -> Result<bool> {
    let tol = Tolerances::default();
    let at_n = level_centering_exists(c, op, h1, n, &tol)?;
    let at_1 = level_centering_exists(c, op, h1, 1, &tol)?;
    Ok(!at_n || at_1)
}
