//! Globally adaptive 7/15-point Gauss–Kronrod quadrature for vector-valued
//! integrands on finite intervals.

use std::collections::BinaryHeap;
use std::cmp::Ordering;

use nalgebra::DVector;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Clone, Debug)]
pub struct QuadResult {
    pub value: DVector<f64>,
    pub error_estimate: f64,
    pub evaluations: usize,
}

struct Segment {
    lo: f64,
    hi: f64,
    value: DVector<f64>,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F>(f: &F, lo: f64, hi: f64, dim: usize) -> (DVector<f64>, f64)
where
    F: Fn(f64) -> DVector<f64>,
{
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(centre);
    let mut kronrod = &fc * WGK[7];
    let mut gauss = &fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(centre - dx);
        let f2 = f(centre + dx);
        let s = f1 + f2;
        kronrod += &s * WGK[j];
        if j % 2 == 1 {
            gauss += &s * WG[j / 2];
        }
    }
    debug_assert_eq!(kronrod.len(), dim);
    let k = kronrod * half;
    let err = (&k - gauss * half).norm();
    (k, err)
}

/// Integrates `f` over `[lo, hi]` to absolute tolerance `tol` (Euclidean norm
/// of the error estimate). The interval is first cut into dyadic pieces of
/// length at most `initial_width`, then the worst piece is bisected until the
/// summed estimate falls below `tol`.
pub fn integrate<F>(f: F, lo: f64, hi: f64, dim: usize, tol: f64, initial_width: f64) -> Result<QuadResult>
where
    F: Fn(f64) -> DVector<f64>,
{
    if !(lo.is_finite() && hi.is_finite()) || hi < lo {
        return Err(Error::InvalidArgument(format!("bad interval [{lo}, {hi}]")));
    }
    if hi == lo {
        return Ok(QuadResult {
            value: DVector::zeros(dim),
            error_estimate: 0.0,
            evaluations: 0,
        });
    }
    const MAX_SEGMENTS: usize = 20_000;
    let mut pieces = 1usize;
    while (hi - lo) / pieces as f64 > initial_width && pieces < 4096 {
        pieces *= 2;
    }
    let width = (hi - lo) / pieces as f64;
    let mut heap = BinaryHeap::with_capacity(pieces * 2);
    let mut evaluations = 0;
    for k in 0..pieces {
        let a = lo + width * k as f64;
        let b = if k + 1 == pieces { hi } else { a + width };
        let (value, error) = gk15(&f, a, b, dim);
        evaluations += 15;
        heap.push(Segment { lo: a, hi: b, value, error });
    }
    loop {
        let total_err: f64 = heap.iter().map(|s| s.error).sum();
        if total_err <= tol {
            break;
        }
        if heap.len() >= MAX_SEGMENTS {
            return Err(Error::Divergent(format!(
                "quadrature error estimate {total_err:.3e} above {tol:.3e} after {MAX_SEGMENTS} segments"
            )));
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // Interval cannot be split further in floating point.
            heap.push(Segment { error: 0.0, ..worst });
            continue;
        }
        let (v1, e1) = gk15(&f, worst.lo, mid, dim);
        let (v2, e2) = gk15(&f, mid, worst.hi, dim);
        evaluations += 30;
        heap.push(Segment { lo: worst.lo, hi: mid, value: v1, error: e1 });
        heap.push(Segment { lo: mid, hi: worst.hi, value: v2, error: e2 });
    }
    // Sum in interval order so the result does not depend on heap layout.
    let mut segs = heap.into_vec();
    segs.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut value = DVector::zeros(dim);
    let mut error_estimate = 0.0;
    for s in &segs {
        value += &s.value;
        error_estimate += s.error;
    }
    Ok(QuadResult {
        value,
        error_estimate,
        evaluations,
    })
}

/// Scalar convenience wrapper over [`integrate`].
pub fn integrate_scalar<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    integrate(|t| DVector::from_element(1, f(t)), lo, hi, 1, tol, 1.0).map(|r| r.value[0])
}
