//! Semi-analytic Lévy measures of semistable and stable laws.
//!
//! * [`OrbitLevy`]: `M = sum_n a^{-n} A^n (M|Z_A)` for a finite seed measure on
//!   `Z_A = {|v| <= 1, |A^{-1} v| > 1}`.
//! * [`MixingLevy`]: `M(E) = int_{L_B} int_0^inf 1_E(t^B u) dt/t^2 K_B(du)` for a
//!   finite mixing measure `K_B` on `L_B = {|v| = 1, |t^B v| > 1 for t > 1}`.
//!
//! Integrals against `M` are evaluated by truncating the orbit sum or the
//! radial integral where a certified tail bound drops below the requested
//! tolerance. Each integrand carries an envelope `C min(|u|^q, 1)` that makes
//! the bound explicit.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::idmeasure::{compensator_factor, Atom, IdMeasure, LevyAtoms};
use crate::linalg::{self, mat_exp, Operator, Region, Subspace, Vector};
use crate::quadrature;

/// Seeds may lie this far from the spectral subspace that carries the measure.
pub const SUPPORT_TOL: f64 = 1e-9;
const UNIT_TOL: f64 = 1e-12;
/// Orbit sums longer than this are reported as divergent.
pub const MAX_ORBIT_TERMS: usize = 10_000;
const INITIAL_ORBIT_HALF_WIDTH: usize = 8;

/// Discrete-case Lévy measure generated by seeds on `Z_A`.
#[derive(Clone, Debug)]
pub struct OrbitLevy {
    seeds: LevyAtoms,
    operator: Operator,
    inverse: Operator,
    a: f64,
}

impl OrbitLevy {
    /// Validates every invariant, including that the seeds sit in the
    /// invariant subspace where `|z|^2 < a`.
    pub fn new(seeds: LevyAtoms, operator: Operator, a: f64) -> Result<Self> {
        Self::with_validation(seeds, operator, a, true)
    }

    /// Same as [`OrbitLevy::new`] with the spectral support check optional.
    pub fn with_validation(seeds: LevyAtoms, operator: Operator, a: f64, check_support: bool) -> Result<Self> {
        let d = operator.dim();
        if seeds.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: seeds.dim(),
            });
        }
        if !(a > 0.0 && a < 1.0) {
            return Err(invalid("a in (0,1)", format!("a = {a}")));
        }
        let norm = operator.norm();
        if norm >= 1.0 {
            return Err(invalid("|A| < 1", format!("|A| = {norm}")));
        }
        let inverse = operator
            .inverse()
            .map_err(|_| invalid("A invertible", "operator is singular".into()))?;
        for (k, s) in seeds.atoms().iter().enumerate() {
            let r = s.point.norm();
            if r > 1.0 + UNIT_TOL {
                return Err(invalid("seed in Z_A", format!("seed {k} has norm {r} > 1")));
            }
            let ri = inverse.apply(&s.point).norm();
            if ri <= 1.0 {
                return Err(invalid("seed in Z_A", format!("seed {k} has |A^-1 v| = {ri} <= 1")));
            }
        }
        let rep = Self {
            seeds,
            operator,
            inverse,
            a,
        };
        if check_support {
            let report = rep.spectral_support()?;
            if !report.passed {
                return Err(invalid(
                    "spectral support",
                    format!(
                        "seed at distance {:e} from the subspace where |z|^2 < a",
                        report.max_distance
                    ),
                ));
            }
        }
        Ok(rep)
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    pub fn seeds(&self) -> &LevyAtoms {
        &self.seeds
    }

    pub fn operator(&self) -> &Operator {
        &self.operator
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// Generalized eigenspace of `A` for `|z|^2 < a` and the seeds' distance from it.
    pub fn spectral_support(&self) -> Result<SupportReport> {
        let x = linalg::spectral_subspace(&self.operator, Region::Disc { radius_sq: self.a })?;
        Ok(SupportReport::new(x, &self.seeds))
    }

    /// Truncated orbit measure `{(A^n u, a^{-n} w) : |n| <= n_max}`.
    pub fn materialize(&self, n_max: usize) -> LevyAtoms {
        self.materialize_range(n_max, n_max)
    }

    /// Truncated orbit measure over `-back <= n <= fwd`. Deep backward orbits
    /// of a strongly contracting `A` reach norms where rounding in the atom
    /// positions dominates the characteristic function, so the two depths can
    /// be chosen separately.
    pub fn materialize_range(&self, back: usize, fwd: usize) -> LevyAtoms {
        let mut atoms = Vec::with_capacity(self.seeds.len() * (back + fwd + 1));
        for s in self.seeds.atoms() {
            atoms.push(s.clone());
            let mut p = s.point.clone();
            for n in 1..=fwd {
                p = self.operator.apply(&p);
                atoms.push(Atom::new(p.clone(), s.weight * self.a.powi(-(n as i32))));
            }
            let mut p = s.point.clone();
            for n in 1..=back {
                p = self.inverse.apply(&p);
                atoms.push(Atom::new(p.clone(), s.weight * self.a.powi(n as i32)));
            }
        }
        LevyAtoms::new(self.dim(), atoms).expect("orbit points are non-zero")
    }

    /// Points where `a M_N` and `A M_N` disagree for the truncation `M_N`:
    /// `A^{-N} u` (only in `a M_N`) and `A^{N+1} u` (only in `A M_N`).
    pub fn boundary_points(&self, n_max: usize) -> Vec<Vector> {
        self.boundary_points_range(n_max, n_max)
    }

    /// Same for [`OrbitLevy::materialize_range`]: `A^{-back} u` and `A^{fwd+1} u`.
    pub fn boundary_points_range(&self, back: usize, fwd: usize) -> Vec<Vector> {
        let mut out = Vec::with_capacity(2 * self.seeds.len());
        for s in self.seeds.atoms() {
            let mut b = s.point.clone();
            for _ in 0..back {
                b = self.inverse.apply(&b);
            }
            let mut f = s.point.clone();
            for _ in 0..=fwd {
                f = self.operator.apply(&f);
            }
            out.push(b);
            out.push(f);
        }
        out
    }

    /// `[m, 0, M_N]` built from [`OrbitLevy::materialize`].
    pub fn materialized_measure(&self, shift: Vector, n_max: usize) -> Result<IdMeasure> {
        IdMeasure::new(shift, Operator::zeros(self.dim()), self.materialize(n_max))
    }
}

/// Continuous-case Lévy measure generated by a finite mixing measure on `L_B`.
#[derive(Clone, Debug)]
pub struct MixingLevy {
    seeds: LevyAtoms,
    exponent: Operator,
}

impl MixingLevy {
    pub fn new(seeds: LevyAtoms, exponent: Operator) -> Result<Self> {
        Self::with_validation(seeds, exponent, true)
    }

    /// `check_spectrum = false` skips the eigenvalue and support checks (the
    /// integrability conditions near the origin) but keeps `L_B` membership.
    pub fn with_validation(seeds: LevyAtoms, exponent: Operator, check_spectrum: bool) -> Result<Self> {
        let d = exponent.dim();
        if seeds.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: seeds.dim(),
            });
        }
        for (k, s) in seeds.atoms().iter().enumerate() {
            let r = s.point.norm();
            if (r - 1.0).abs() > UNIT_TOL {
                return Err(invalid("seed on unit sphere", format!("seed {k} has norm {r}")));
            }
            let slope = 2.0 * exponent.apply(&s.point).dot(&s.point);
            if slope <= 0.0 {
                return Err(invalid("seed in L_B", format!("seed {k} has 2(Bu,u) = {slope} <= 0")));
            }
            for t in [2.0f64, 4.0, 8.0] {
                let g = mat_exp(&exponent, t.ln())?.apply(&s.point).norm();
                if g <= 1.0 {
                    return Err(invalid("seed in L_B", format!("seed {k} has |{t}^B u| = {g} <= 1")));
                }
            }
        }
        let rep = Self { seeds, exponent };
        if check_spectrum {
            let min_re = rep
                .exponent
                .complex_eigenvalues()
                .iter()
                .map(|z| z.re)
                .fold(f64::INFINITY, f64::min);
            if min_re < 0.5 + 1e-9 {
                return Err(invalid(
                    "Re sp(B) > 1/2",
                    format!("smallest real part of an eigenvalue is {min_re}"),
                ));
            }
            let report = rep.spectral_support()?;
            if !report.passed {
                return Err(invalid(
                    "spectral support",
                    format!("seed at distance {:e} from the subspace where Re z > 1/2", report.max_distance),
                ));
            }
        }
        Ok(rep)
    }

    pub fn dim(&self) -> usize {
        self.exponent.dim()
    }

    pub fn seeds(&self) -> &LevyAtoms {
        &self.seeds
    }

    pub fn exponent(&self) -> &Operator {
        &self.exponent
    }

    /// Generalized eigenspace of `B` for `Re z > 1/2` and the seeds' distance from it.
    pub fn spectral_support(&self) -> Result<SupportReport> {
        let x = linalg::spectral_subspace(&self.exponent, Region::HalfPlane { threshold: 0.5 })?;
        Ok(SupportReport::new(x, &self.seeds))
    }
}

fn invalid(invariant: &'static str, detail: String) -> Error {
    Error::InvalidRepresentation { invariant, detail }
}

/// Either representation.
#[derive(Clone, Debug)]
pub enum LevyRep {
    Orbit(OrbitLevy),
    Mixing(MixingLevy),
}

impl LevyRep {
    pub fn dim(&self) -> usize {
        match self {
            LevyRep::Orbit(o) => o.dim(),
            LevyRep::Mixing(m) => m.dim(),
        }
    }

    pub fn seeds(&self) -> &LevyAtoms {
        match self {
            LevyRep::Orbit(o) => o.seeds(),
            LevyRep::Mixing(m) => m.seeds(),
        }
    }
}

/// Outcome of the spectral support check.
#[derive(Clone, Debug)]
pub struct SupportReport {
    pub subspace: Subspace,
    pub max_distance: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl SupportReport {
    fn new(subspace: Subspace, seeds: &LevyAtoms) -> Self {
        let max_distance = seeds
            .atoms()
            .iter()
            .map(|s| subspace.distance(&s.point))
            .fold(0.0, f64::max);
        Self {
            subspace,
            max_distance,
            tolerance: SUPPORT_TOL,
            passed: max_distance <= SUPPORT_TOL,
        }
    }
}

pub fn validate_spectral_support(rep: &LevyRep) -> Result<SupportReport> {
    match rep {
        LevyRep::Orbit(o) => o.spectral_support(),
        LevyRep::Mixing(m) => m.spectral_support(),
    }
}

/// Integrands with a registered envelope.
#[derive(Clone, Debug)]
pub enum Integrand {
    /// `|u|^2 / (1 + |u|^2)` (scalar).
    LevyMass,
    /// `(|u|^2 - |Au|^2) / ((1+|Au|^2)(1+|u|^2)) u` (vector). Applying `A` to
    /// the integral gives the shift correction of the pushforward by `A`.
    PushforwardCorrection(Operator),
    /// `2(Bu,u) / (1+|u|^2)^2 u` (vector), the derivative of the stable shift at 0.
    DriftDerivative(Operator),
    /// `(u, w)` (scalar), integrated against the seed measure only.
    SeedPairing(Vector),
}

/// `|f(u)| <= scale * min(|u|^power, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Envelope {
    pub scale: f64,
    pub power: i32,
}

impl Integrand {
    fn output_dim(&self, d: usize) -> usize {
        match self {
            Integrand::LevyMass | Integrand::SeedPairing(_) => 1,
            _ => d,
        }
    }

    pub fn eval(&self, u: &Vector) -> DVector<f64> {
        match self {
            Integrand::LevyMass => {
                let r = u.norm_squared();
                DVector::from_element(1, r / (1.0 + r))
            }
            Integrand::PushforwardCorrection(a) => {
                let c = compensator_factor(u.norm_squared(), a.apply(u).norm_squared());
                u.as_dvector() * c
            }
            Integrand::DriftDerivative(b) => {
                let r = u.norm_squared();
                let c = 2.0 * b.apply(u).dot(u) / ((1.0 + r) * (1.0 + r));
                u.as_dvector() * c
            }
            Integrand::SeedPairing(w) => DVector::from_element(1, u.dot(w)),
        }
    }

    pub fn envelope(&self) -> Result<Envelope> {
        match self {
            Integrand::LevyMass => Ok(Envelope { scale: 1.0, power: 2 }),
            Integrand::PushforwardCorrection(a) => {
                // Small |u|: |g| |u| <= max(1,|A|^2) |u|^3.
                // Large |u|: |g| |u| <= max(1,|A|^2) / (s_min^2 |u|) with s_min the least singular value.
                let smin = a.min_singular_value();
                if smin <= 1e-12 * a.norm().max(1.0) {
                    return Err(Error::TailBoundUnavailable(
                        "pushforward correction for a singular operator is unbounded".into(),
                    ));
                }
                let an = a.norm();
                let c = an.powi(2).max(1.0) * (1.0 / (smin * smin)).max(1.0);
                Ok(Envelope { scale: c, power: 3 })
            }
            Integrand::DriftDerivative(b) => Ok(Envelope {
                scale: 2.0 * b.norm(),
                power: 3,
            }),
            Integrand::SeedPairing(_) => Err(Error::TailBoundUnavailable(
                "the pairing (u, w) is integrated against the seed measure only".into(),
            )),
        }
    }
}

/// Value of a scalar or vector integral.
#[derive(Clone, Debug, PartialEq)]
pub enum IntegralValue {
    Scalar(f64),
    Vector(Vector),
}

impl IntegralValue {
    fn from_raw(v: DVector<f64>, integrand: &Integrand) -> Self {
        match integrand {
            Integrand::LevyMass | Integrand::SeedPairing(_) => IntegralValue::Scalar(v[0]),
            _ => IntegralValue::Vector(Vector::from_raw(v)),
        }
    }

    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            IntegralValue::Scalar(x) => Some(*x),
            IntegralValue::Vector(_) => None,
        }
    }

    pub fn as_vector(&self) -> Option<&Vector> {
        match self {
            IntegralValue::Vector(v) => Some(v),
            IntegralValue::Scalar(_) => None,
        }
    }

    pub fn norm(&self) -> f64 {
        match self {
            IntegralValue::Scalar(x) => x.abs(),
            IntegralValue::Vector(v) => v.norm(),
        }
    }
}

fn seed_pairing(seeds: &LevyAtoms, w: &Vector) -> IntegralValue {
    IntegralValue::Scalar(seeds.atoms().iter().map(|s| s.weight * s.point.dot(w)).sum())
}

/// Ratio and block length of a geometric decay bound for the forward orbit:
/// `|A_X^p|^q a^{-p} = ratio < 1` on the invariant subspace `X` carrying the seeds.
fn forward_decay(orbit: &OrbitLevy, power: i32) -> Result<(usize, f64)> {
    let support = orbit.spectral_support()?;
    let restricted = if support.passed && !support.subspace.is_trivial() {
        let q = support.subspace.basis_matrix();
        q.transpose() * orbit.operator.as_matrix() * q
    } else if support.passed {
        return Ok((1, 0.0));
    } else {
        orbit.operator.as_matrix().clone()
    };
    let mut p = 1usize;
    let mut pow = restricted.clone();
    while p <= 4096 {
        let n = linalg::singular_values(&pow).max();
        let ratio = n.powi(power) * orbit.a.powf(-(p as f64));
        if ratio < 1.0 && ratio.is_finite() {
            return Ok((p, ratio));
        }
        pow = &pow * &pow;
        p *= 2;
    }
    Err(Error::Divergent(
        "orbit terms a^{-n} |A^n u|^q show no geometric decay".into(),
    ))
}

/// `sum_n a^{-n} sum_seeds w f(A^n u)`, truncated so that the certified tail is
/// below `tol`.
pub fn orbit_integrate(orbit: &OrbitLevy, f: &Integrand, tol: f64) -> Result<IntegralValue> {
    if let Integrand::SeedPairing(w) = f {
        return Ok(seed_pairing(&orbit.seeds, w));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let env = f.envelope()?;
    let d = orbit.dim();
    let out_dim = f.output_dim(d);
    if orbit.seeds.is_empty() {
        return Ok(IntegralValue::from_raw(DVector::zeros(out_dim), f));
    }
    let a = orbit.a;
    let total_w = orbit.seeds.total_weight();
    let (block, ratio) = forward_decay(orbit, env.power)?;

    // Backward tail: |A^{-k} u| > 1 for k >= 1, so terms are at most C w a^k.
    let backward_tail = |n: usize| env.scale * total_w * a.powi(n as i32 + 1) / (1.0 - a);
    let mut n_back = INITIAL_ORBIT_HALF_WIDTH;
    while backward_tail(n_back) > 0.5 * tol {
        n_back *= 2;
        if n_back > MAX_ORBIT_TERMS {
            return Err(Error::Divergent("backward orbit tail does not decrease".into()));
        }
    }

    // Forward orbit points, grown until the block-geometric tail is small.
    let mut fwd: Vec<Vec<Vector>> = orbit
        .seeds
        .atoms()
        .iter()
        .map(|s| vec![s.point.clone()])
        .collect();
    let extend_to = |fwd: &mut Vec<Vec<Vector>>, n: usize| {
        for path in fwd.iter_mut() {
            while path.len() <= n {
                let next = orbit.operator.apply(path.last().expect("seed"));
                path.push(next);
            }
        }
    };
    let forward_tail = |fwd: &Vec<Vec<Vector>>, n: usize| -> f64 {
        let mut s = 0.0;
        for (path, seed) in fwd.iter().zip(orbit.seeds.atoms()) {
            for r in 1..=block {
                let k = n + r;
                s += seed.weight * a.powf(-(k as f64)) * path[k].norm().powi(env.power);
            }
        }
        env.scale * s / (1.0 - ratio)
    };
    let mut n_fwd = INITIAL_ORBIT_HALF_WIDTH;
    loop {
        extend_to(&mut fwd, n_fwd + block);
        let tail = forward_tail(&fwd, n_fwd);
        if !tail.is_finite() {
            return Err(Error::Divergent("forward orbit weights overflow".into()));
        }
        if tail <= 0.5 * tol {
            break;
        }
        n_fwd *= 2;
        if n_fwd > MAX_ORBIT_TERMS {
            return Err(Error::Divergent("forward orbit tail does not decrease".into()));
        }
    }

    let mut acc = DVector::zeros(out_dim);
    for (path, seed) in fwd.iter().zip(orbit.seeds.atoms()) {
        // n = 0 .. n_fwd
        for (n, p) in path.iter().enumerate().take(n_fwd + 1) {
            acc += f.eval(p) * (seed.weight * a.powf(-(n as f64)));
        }
        let mut q = seed.point.clone();
        for k in 1..=n_back {
            q = orbit.inverse.apply(&q);
            acc += f.eval(&q) * (seed.weight * a.powi(k as i32));
        }
    }
    if acc.iter().any(|x| !x.is_finite()) {
        return Err(Error::Divergent("orbit sum is not finite".into()));
    }
    Ok(IntegralValue::from_raw(acc, f))
}

/// Length `S` of the negative half-line after which
/// `int_S^inf C w |e^{-sB} u|^q e^s ds` is below `budget`.
fn backward_cutoff(b: &Operator, u: &Vector, env: Envelope, weight: f64, budget: f64) -> Result<f64> {
    let q = env.power;
    let bnorm = b.norm();
    let mut block = 0.5;
    let ratio = loop {
        let e = mat_exp(b, -block)?.norm();
        let r = e.powi(q) * block.exp();
        if r < 1.0 {
            break r;
        }
        block *= 2.0;
        if block > 512.0 {
            return Err(Error::Divergent(
                "e^{-sB} does not decay fast enough for the radial integral to converge at the origin".into(),
            ));
        }
    };
    // sup_{r in [0, block]} |e^{-rB}|^q e^r, bounded on a grid with the
    // Lipschitz factor e^{delta |B|} between nodes.
    let steps = 32;
    let delta = block / steps as f64;
    let mut sup = 0.0f64;
    for j in 0..=steps {
        let r = delta * j as f64;
        let e = mat_exp(b, -r)?.norm() * (delta * bnorm).exp();
        sup = sup.max(e.powi(q) * (r + delta).exp());
    }
    let factor = env.scale * weight * block * sup / (1.0 - ratio);
    let mut s = 1.0;
    loop {
        let phi = mat_exp(b, -s)?.apply(u).norm().powi(q) * s.exp();
        if factor * phi <= budget {
            return Ok(s);
        }
        s += block;
        if s > 1e4 {
            return Err(Error::Divergent("radial integral tail at the origin does not decrease".into()));
        }
    }
}

/// `sum_seeds w int_R f(e^{tB} u) e^{-t} dt` by adaptive Gauss–Kronrod on a
/// truncated line; absolute error at most `2 tol`.
pub fn mixing_integrate(mixing: &MixingLevy, f: &Integrand, tol: f64) -> Result<IntegralValue> {
    if let Integrand::SeedPairing(w) = f {
        return Ok(seed_pairing(&mixing.seeds, w));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let env = f.envelope()?;
    let d = mixing.dim();
    let out_dim = f.output_dim(d);
    let n = mixing.seeds.len().max(1) as f64;
    let b = &mixing.exponent;
    let mut acc = DVector::zeros(out_dim);
    for seed in mixing.seeds.atoms() {
        let w = seed.weight;
        let budget = 0.25 * tol / n;
        // t -> +inf: integrand at most C w e^{-t}.
        let upper = (env.scale * w / budget).ln().max(1.0);
        let lower = backward_cutoff(b, &seed.point, env, w, budget)?;
        let u = &seed.point;
        let integrand = |t: f64| -> DVector<f64> {
            match mat_exp(b, t) {
                Ok(e) => f.eval(&e.apply(u)) * (w * (-t).exp()),
                Err(_) => DVector::from_element(out_dim, f64::NAN),
            }
        };
        let r = quadrature::integrate(integrand, -lower, upper, out_dim, 0.5 * tol / n, 1.0)?;
        if r.value.iter().any(|x| !x.is_finite()) {
            return Err(Error::Divergent("radial integrand is not finite".into()));
        }
        acc += r.value;
    }
    Ok(IntegralValue::from_raw(acc, f))
}

/// `int_R 2(B e^{tB} u, e^{tB} u) / (1 + |e^{tB} u|^2)^2 dt`, which is `1`
/// whenever `|e^{tB} u|` runs from 0 to infinity.
pub fn radial_constant(b: &Operator, u: &Vector, tol: f64) -> Result<f64> {
    let g = |t: f64| -> Result<f64> { Ok(mat_exp(b, t)?.apply(u).norm_squared()) };
    // Exact tails: int_T^inf = 1/(1+g(T)), int_{-inf}^{-S} = g(-S)/(1+g(-S)).
    let mut upper = 1.0;
    while 1.0 / (1.0 + g(upper)?) > 0.25 * tol {
        upper += 1.0;
        if upper > 1e3 {
            return Err(Error::Divergent("|e^{tB} u| does not grow".into()));
        }
    }
    let mut lower = 1.0;
    while g(-lower)? > 0.25 * tol {
        lower += 1.0;
        if lower > 1e3 {
            return Err(Error::Divergent("|e^{tB} u| does not vanish at -inf".into()));
        }
    }
    let integrand = |t: f64| -> f64 {
        match mat_exp(b, t) {
            Ok(e) => {
                let v = e.apply(u);
                let r = v.norm_squared();
                2.0 * b.apply(&v).dot(&v) / ((1.0 + r) * (1.0 + r))
            }
            Err(_) => f64::NAN,
        }
    };
    let value = quadrature::integrate_scalar(integrand, -lower, upper, 0.5 * tol)?;
    if !value.is_finite() {
        return Err(Error::Divergent("radial constant integrand is not finite".into()));
    }
    Ok(value)
}
