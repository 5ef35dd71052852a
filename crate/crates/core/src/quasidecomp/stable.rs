//! Operator-stable laws: `mu^t = t^B mu * delta(h_{t,B})` for all `t > 0`.
//!
//! The shift function `f_B(t) = h_{e^t, B}` satisfies
//! `f_B(s + t) = e^{tB} f_B(s) + e^s f_B(t)`, `f_B(0) = 0` and
//! `f_B'(t) = e^{tB} v0 + f_B(t)`, hence
//! `f_B(t) = e^t int_0^t e^{s(B - I)} v0 ds` with `v0 = f_B'(0)`.

use crate::error::{Error, Result};
use crate::idmeasure::LevyAtoms;
use crate::levyrep::{mixing_integrate, Integrand, MixingLevy};
use crate::linalg::{self, mat_exp, Operator, Vector};
use crate::quadrature;

use super::{orthogonality_obstruction, CenteringResult, Certificate, Check, Tolerances};

/// Below this smallest singular value of `B - I` the closed form is replaced
/// by quadrature.
pub const CLOSED_FORM_MIN_SV: f64 = 1e-3;

/// Where `v0` came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShiftSource {
    Atoms,
    Mixing,
    Explicit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StableShiftFn {
    pub b: Operator,
    pub m: Vector,
    pub v0: Vector,
    pub source: ShiftSource,
}

fn drift_linear_part(m: &Vector, b: &Operator) -> Vector {
    m - &b.apply(m)
}

impl StableShiftFn {
    /// `v0 = (I - B) m + sum w 2(Bu,u)/(1+|u|^2)^2 u` over finitely many atoms.
    pub fn from_atoms(m: Vector, atoms: &LevyAtoms, b: Operator) -> Result<Self> {
        let d = b.dim();
        if m.dim() != d || atoms.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: if m.dim() != d { m.dim() } else { atoms.dim() },
            });
        }
        let f = Integrand::DriftDerivative(b.clone());
        let mut v0 = drift_linear_part(&m, &b).into_dvector();
        for at in atoms.atoms() {
            v0 += f.eval(&at.point) * at.weight;
        }
        Ok(Self {
            b,
            m,
            v0: Vector::from_raw(v0),
            source: ShiftSource::Atoms,
        })
    }

    /// Same with the integral taken against the measure generated by `mixing`.
    pub fn from_mixing(m: Vector, mixing: &MixingLevy, tol: f64) -> Result<Self> {
        let b = mixing.exponent().clone();
        if m.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: b.dim(),
                found: m.dim(),
            });
        }
        let integral = mixing_integrate(mixing, &Integrand::DriftDerivative(b.clone()), tol)?;
        let v0 = drift_linear_part(&m, &b) + integral.as_vector().expect("vector integrand").clone();
        Ok(Self {
            b,
            m,
            v0,
            source: ShiftSource::Mixing,
        })
    }

    pub fn from_v0(b: Operator, v0: Vector) -> Result<Self> {
        if v0.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: b.dim(),
                found: v0.dim(),
            });
        }
        let m = Vector::zeros(b.dim());
        Ok(Self {
            b,
            m,
            v0,
            source: ShiftSource::Explicit,
        })
    }

    /// Largest `|t|` accepted by [`fb_eval`].
    pub fn time_limit(&self) -> f64 {
        50.0 / (1.0 + self.b.norm())
    }
}

/// `f_B(t)`: closed form `e^{tB} v1 - e^t v1` with `(B - I) v1 = v0` when
/// `B - I` is well conditioned, Gauss–Kronrod quadrature otherwise.
pub fn fb_eval(sfn: &StableShiftFn, t: f64) -> Result<Vector> {
    if !t.is_finite() || t.abs() > sfn.time_limit() {
        return Err(Error::InvalidArgument(format!(
            "|t| = {} exceeds {}",
            t.abs(),
            sfn.time_limit()
        )));
    }
    let d = sfn.b.dim();
    if t == 0.0 || sfn.v0.is_zero() {
        return Ok(Vector::zeros(d));
    }
    let k = sfn.b.shift_diagonal(1.0);
    if k.min_singular_value() > CLOSED_FORM_MIN_SV * k.norm().max(1.0) {
        let v1 = k.inverse()?.apply(&sfn.v0);
        return Ok(mat_exp(&sfn.b, t)?.apply(&v1) - v1.scale(t.exp()));
    }
    let v0 = sfn.v0.clone();
    let integrand = |s: f64| match mat_exp(&k, s) {
        Ok(e) => e.apply(&v0).into_dvector(),
        Err(_) => nalgebra::DVector::from_element(d, f64::NAN),
    };
    let (lo, hi, sign) = if t > 0.0 { (0.0, t, 1.0) } else { (t, 0.0, -1.0) };
    let tol = 1e-14 * v0.norm() * t.abs().max(1.0);
    let r = quadrature::integrate(integrand, lo, hi, d, tol, 0.25)?;
    let out = Vector::from_raw(r.value * (sign * t.exp()));
    if out.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("shift function"));
    }
    Ok(out)
}

/// `h_{e^t, B}` computed directly from the pushforward: for `[m, D, M]` with
/// `M` generated by `mixing`, `e^t m - e^{tB} m - e^{tB} int g_{e^{tB}}(u) u M(du)`.
pub fn fb_direct(m: &Vector, mixing: &MixingLevy, t: f64, tol: f64) -> Result<Vector> {
    let st = mat_exp(mixing.exponent(), t)?;
    let corr = mixing_integrate(mixing, &Integrand::PushforwardCorrection(st.clone()), tol)?;
    let corr = corr.as_vector().expect("vector integrand").clone();
    Ok(m.scale(t.exp()) - st.apply(m) - st.apply(&corr))
}

pub fn center_stable(sfn: &StableShiftFn) -> Result<CenteringResult> {
    center_stable_with(sfn, &Tolerances::default())
}

/// A universal centering exists iff `v0 ⊥ N(B* - I)`; then `h_{t,B} = t^B v1 - t v1`.
pub fn center_stable_with(sfn: &StableShiftFn, tol: &Tolerances) -> Result<CenteringResult> {
    let k = sfn.b.shift_diagonal(1.0);
    let null = linalg::null_space(&k.adjoint(), tol.rank);
    let limit = sfn.time_limit();
    if let Some((w, _)) = orthogonality_obstruction(&null, &sfn.v0, tol) {
        let pairing = sfn.v0.dot(&w);
        let mut checks = Vec::new();
        for t in [0.5f64, 1.0] {
            if t > limit {
                continue;
            }
            let f = fb_eval(sfn, t)?;
            let expect = t * t.exp() * pairing;
            checks.push(Check::new(
                format!("linear growth of (f_B({t}), w)"),
                (f.dot(&w) - expect).abs(),
                tol.verify * expect.abs().max(1.0),
            ));
        }
        return Ok(CenteringResult {
            exists: false,
            hhat: None,
            certificate: Certificate::Obstruction { w, pairing },
            checks,
        });
    }
    let v1 = linalg::range_decompose_with_rank(&k, &sfn.v0, tol.rank, f64::INFINITY)
        .solution
        .expect("infinite tolerance accepts every vector");
    let mut checks = Vec::new();
    for s in [0.5f64, 2.0, std::f64::consts::E] {
        let t = s.ln();
        if t.abs() > limit {
            continue;
        }
        let f = fb_eval(sfn, t)?;
        let closed = mat_exp(&sfn.b, t)?.apply(&v1) - v1.scale(s);
        checks.push(Check::new(
            format!("h_{{{s:.6},B}} = s^B v1 - s v1"),
            closed.distance(&f),
            tol.verify * f.norm().max(1.0),
        ));
    }
    Ok(CenteringResult {
        exists: true,
        hhat: Some(v1),
        certificate: Certificate::Solved,
        checks,
    })
}
