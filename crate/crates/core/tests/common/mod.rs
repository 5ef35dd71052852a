#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use idcenter::levyrep::{MixingLevy, OrbitLevy};
use idcenter::{Atom, IdMeasure, LevyAtoms, Operator, Vector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn vec_in(rng: &mut impl Rng, d: usize, lo: f64, hi: f64) -> Vector {
    Vector::new((0..d).map(|_| rng.random_range(lo..hi)).collect()).unwrap()
}

pub fn unit_vec(rng: &mut impl Rng, d: usize) -> Vector {
    loop {
        let v = vec_in(rng, d, -1.0, 1.0);
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v.scale(1.0 / n);
        }
    }
}

pub fn mat_in(rng: &mut impl Rng, d: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |_, _| rng.random_range(lo..hi))
}

pub fn op(m: DMatrix<f64>) -> Operator {
    Operator::from_matrix(m).unwrap()
}

pub fn orthogonal(rng: &mut impl Rng, d: usize) -> DMatrix<f64> {
    loop {
        let m = mat_in(rng, d, -1.0, 1.0);
        if m.clone().svd(false, false).singular_values.min() < 0.05 {
            continue;
        }
        let qr = m.qr();
        let q = qr.q();
        let r = qr.r();
        let signs = DMatrix::from_diagonal(&DVector::from_fn(d, |i, _| r[(i, i)].signum()));
        return q * signs;
    }
}

/// Well conditioned invertible matrix `Q (I + eps E)`.
pub fn near_orthogonal(rng: &mut impl Rng, d: usize, eps: f64) -> DMatrix<f64> {
    let q = orthogonal(rng, d);
    q * (DMatrix::identity(d, d) + mat_in(rng, d, -eps, eps))
}

pub fn spd(rng: &mut impl Rng, d: usize) -> DMatrix<f64> {
    let l = mat_in(rng, d, -1.0, 1.0);
    &l * l.transpose() + DMatrix::identity(d, d) * 0.1
}

pub fn random_atoms(rng: &mut impl Rng, d: usize, n: usize) -> LevyAtoms {
    let atoms = (0..n)
        .map(|_| {
            let mut p = vec_in(rng, d, -2.0, 2.0);
            while p.norm() < 0.1 {
                p = vec_in(rng, d, -2.0, 2.0);
            }
            Atom::new(p, rng.random_range(0.1..2.0))
        })
        .collect();
    LevyAtoms::new(d, atoms).unwrap()
}

pub fn random_measure(rng: &mut impl Rng, d: usize) -> IdMeasure {
    let n = rng.random_range(0..5);
    IdMeasure::new(vec_in(rng, d, -2.0, 2.0), op(spd(rng, d)), random_atoms(rng, d, n)).unwrap()
}

/// Point of `Z_A = {|v| <= 1, |A^{-1} v| > 1}` in direction `dir`, or `None` if
/// the radial window is too thin.
pub fn za_point(rng: &mut impl Rng, inv: &Operator, dir: &Vector) -> Option<Vector> {
    let lo = 1.0 / inv.apply(dir).norm();
    if lo >= 0.98 {
        return None;
    }
    let r = rng.random_range((lo + 0.01)..1.0);
    Some(dir.scale(r))
}

pub fn za_sample(rng: &mut impl Rng, a: &Operator) -> Vector {
    let inv = a.inverse().unwrap();
    loop {
        let dir = unit_vec(rng, a.dim());
        if let Some(p) = za_point(rng, &inv, &dir) {
            return p;
        }
    }
}

/// `A = P diag(a, l_2, ..) P^{-1}` with `|l_i|^2 < a`, `|A| < 1`; returns `A`
/// and a unit vector spanning `N(A* - aI)`.
pub fn operator_with_eigenvalue(rng: &mut impl Rng, d: usize, a: f64) -> (Operator, Vector) {
    loop {
        let p = near_orthogonal(rng, d, 0.15);
        let mut diag = vec![a];
        for _ in 1..d {
            let l: f64 = rng.random_range(0.2..0.85) * a.sqrt();
            if (l - a).abs() < 0.05 {
                continue;
            }
            diag.push(l);
        }
        if diag.len() != d {
            continue;
        }
        let pinv = p.clone().try_inverse().unwrap();
        let m = &p * DMatrix::from_diagonal(&DVector::from_vec(diag)) * &pinv;
        let a_op = op(m);
        if a_op.norm() >= 0.95 {
            continue;
        }
        let y = pinv.transpose().column(0).into_owned();
        let y = Vector::from_dvector(y.clone() / y.norm()).unwrap();
        return (a_op, y);
    }
}

/// Seeds in `Z_A`; when `balanced`, the pairing `sum w (u, y)` vanishes.
pub fn seeds_in_za(rng: &mut impl Rng, a: &Operator, y: &Vector, count: usize, balanced: bool) -> LevyAtoms {
    let d = a.dim();
    let mut atoms: Vec<Atom> = (0..count)
        .map(|_| Atom::new(za_sample(rng, a), rng.random_range(0.2..2.0)))
        .collect();
    if balanced {
        let s: f64 = atoms.iter().map(|x| x.weight * x.point.dot(y)).sum();
        loop {
            let u = za_sample(rng, a);
            let p = u.dot(y);
            if p * s < 0.0 && p.abs() > 0.1 {
                atoms.push(Atom::new(u, -s / p));
                break;
            }
        }
    }
    LevyAtoms::new(d, atoms).unwrap()
}

/// Orbit representation with `A = aI` and seeds in `{a < |u| <= 1}`.
pub fn scalar_orbit(rng: &mut impl Rng, d: usize, a: f64, count: usize, symmetric: bool) -> OrbitLevy {
    let mut atoms = Vec::new();
    for _ in 0..count {
        let dir = unit_vec(rng, d);
        let u = dir.scale(rng.random_range((a + 0.02)..1.0));
        let w = rng.random_range(0.2..2.0);
        if symmetric {
            atoms.push(Atom::new(-&u, w));
        }
        atoms.push(Atom::new(u, w));
    }
    OrbitLevy::new(LevyAtoms::new(d, atoms).unwrap(), Operator::scalar(d, a), a).unwrap()
}

/// `B = Q diag(1, C) Q*` with `C + C*` positive definite and no eigenvalue 1,
/// so every unit vector is in `L_B`; returns `B` and the unit vector spanning `N(B* - I)`.
pub fn exponent_with_unit_eigenvalue(rng: &mut impl Rng, d: usize) -> (Operator, Vector) {
    loop {
        let c = dissipative_block(rng, d - 1);
        let eig = c.clone().complex_eigenvalues();
        if eig.iter().any(|z| (z - nalgebra::Complex::new(1.0, 0.0)).norm() < 0.1) {
            continue;
        }
        let mut blk = DMatrix::zeros(d, d);
        blk[(0, 0)] = 1.0;
        blk.view_mut((1, 1), (d - 1, d - 1)).copy_from(&c);
        let q = orthogonal(rng, d);
        let b = &q * blk * q.transpose();
        let y = q.column(0).into_owned();
        return (op(b), Vector::from_dvector(y).unwrap());
    }
}

/// `S + K` with `S` symmetric, spectrum in `[0.6, 3]`, and `K` skew.
pub fn dissipative_block(rng: &mut impl Rng, k: usize) -> DMatrix<f64> {
    let q = orthogonal(rng, k);
    let diag = DVector::from_fn(k, |_, _| rng.random_range(0.6..3.0));
    let s = &q * DMatrix::from_diagonal(&diag) * q.transpose();
    let g = mat_in(rng, k, -0.8, 0.8);
    let skew = (&g - g.transpose()) * 0.5;
    s + skew
}

/// Unit seeds; when `balanced`, `sum w (u, y)` vanishes.
pub fn unit_seeds(rng: &mut impl Rng, d: usize, y: &Vector, count: usize, balanced: bool) -> LevyAtoms {
    let mut atoms: Vec<Atom> = (0..count)
        .map(|_| Atom::new(unit_vec(rng, d), rng.random_range(0.2..2.0)))
        .collect();
    if balanced {
        let s: f64 = atoms.iter().map(|x| x.weight * x.point.dot(y)).sum();
        loop {
            let u = unit_vec(rng, d);
            let p = u.dot(y);
            if p * s < 0.0 && p.abs() > 0.1 {
                atoms.push(Atom::new(u, -s / p));
                break;
            }
        }
    }
    LevyAtoms::new(d, atoms).unwrap()
}

pub fn mixing(seeds: LevyAtoms, b: Operator) -> MixingLevy {
    MixingLevy::new(seeds, b).unwrap()
}

/// Gaussian `[m, P P*, 0]` with `A = sqrt(a) P R P^{-1}`, `R` orthogonal, so
/// that `A D A* = a D`.
pub fn gaussian_qd_fixture(rng: &mut impl Rng, d: usize, a: f64) -> (IdMeasure, Operator) {
    let p = near_orthogonal(rng, d, 0.5);
    let pinv = p.clone().try_inverse().unwrap();
    let r = orthogonal(rng, d);
    let a_op = op(&p * r * &pinv * a.sqrt());
    let cov = &p * p.transpose();
    let mu = IdMeasure::gaussian(vec_in(rng, d, -2.0, 2.0), op((&cov + cov.transpose()) * 0.5)).unwrap();
    (mu, a_op)
}

/// Generators of a finite abelian orthogonal group: a planar rotation, the
/// coordinate reflections, or a cyclic permutation, in a random frame.
pub fn finite_orthogonal_generators(rng: &mut impl Rng, d: usize) -> Vec<Operator> {
    let q = orthogonal(rng, d);
    let conj = |m: DMatrix<f64>| op(&q * m * q.transpose());
    match rng.random_range(0..3) {
        0 => {
            // rotation by 2 pi / k in the first coordinate plane
            let k = [2.0, 3.0, 4.0, 6.0][rng.random_range(0..4)];
            let th = 2.0 * std::f64::consts::PI / k;
            let mut m = DMatrix::identity(d, d);
            m[(0, 0)] = th.cos();
            m[(0, 1)] = -th.sin();
            m[(1, 0)] = th.sin();
            m[(1, 1)] = th.cos();
            vec![conj(m)]
        }
        1 => (0..d)
            .map(|i| {
                let mut m = DMatrix::identity(d, d);
                m[(i, i)] = -1.0;
                conj(m)
            })
            .collect(),
        _ => {
            let mut m = DMatrix::zeros(d, d);
            for i in 0..d {
                m[((i + 1) % d, i)] = 1.0;
            }
            vec![conj(m)]
        }
    }
}

/// Measure `[0, D, M]` invariant under the group: `D` and `M` are group averages.
pub fn invariant_measure(rng: &mut impl Rng, elements: &[Operator], shift: Vector) -> IdMeasure {
    let d = shift.dim();
    let d0 = spd(rng, d);
    let mut cov = DMatrix::zeros(d, d);
    for s in elements {
        cov += s.as_matrix() * &d0 * s.as_matrix().transpose();
    }
    cov /= elements.len() as f64;
    let mut atoms = Vec::new();
    for _ in 0..rng.random_range(1..3) {
        let u = vec_in(rng, d, -1.5, 1.5);
        let w = rng.random_range(0.2..2.0);
        for s in elements {
            atoms.push(Atom::new(s.apply(&u), w));
        }
    }
    let levy = LevyAtoms::new(d, atoms).unwrap().canonical();
    IdMeasure::new(shift, op((&cov + cov.transpose()) * 0.5), levy).unwrap()
}
