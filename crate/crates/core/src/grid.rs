//! Deterministic frequency grids for characteristic-function comparisons.

use crate::linalg::Vector;

/// Default number of quasi-random points in the verification grid.
pub const DEFAULT_GRID_POINTS: usize = 64;
/// Radius of the ball the quasi-random points are drawn from.
pub const GRID_RADIUS: f64 = 5.0;

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Set of frequencies `u in V`.
#[derive(Clone, Debug)]
pub struct FrequencyGrid {
    points: Vec<Vector>,
}

impl FrequencyGrid {
    /// `n` Halton points in the ball of radius 5 (rejection from the cube),
    /// followed by the `d` standard basis vectors.
    pub fn standard(d: usize, n: usize) -> Self {
        let mut points = Vec::with_capacity(n + d);
        let mut i = 1u64;
        while points.len() < n {
            let coords: Vec<f64> = (0..d)
                .map(|k| 2.0 * radical_inverse(i, PRIMES[k]) - 1.0)
                .collect();
            i += 1;
            let r2: f64 = coords.iter().map(|x| x * x).sum();
            if r2 <= 1.0 {
                let v = Vector::new(coords.iter().map(|x| x * GRID_RADIUS).collect())
                    .expect("grid dimension is validated by the caller");
                points.push(v);
            }
        }
        points.extend((0..d).map(|k| Vector::basis(d, k)));
        Self { points }
    }

    pub fn verification(d: usize) -> Self {
        Self::standard(d, DEFAULT_GRID_POINTS)
    }

    pub fn from_points(points: Vec<Vector>) -> Self {
        Self { points }
    }

    pub fn points(&self) -> &[Vector] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}
