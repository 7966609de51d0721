//! Seeded random inputs for checks, benchmarks, and the CLI. Everything is
//! driven by a caller-supplied RNG so a single 64-bit seed reproduces a run
//! bit-for-bit.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{orthonormal_columns, Mat};

/// Standard normal vector.
pub fn random_vector(rng: &mut impl Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

/// Uniformly random direction.
pub fn random_unit_vector(rng: &mut impl Rng, d: usize) -> Vec<f64> {
    loop {
        let v = random_vector(rng, d);
        let n = crate::math::norm(&v);
        if n > 1e-6 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

/// Random skew-symmetric matrix, entries O(1).
pub fn random_skew(rng: &mut impl Rng, d: usize) -> Mat {
    let mut m = Mat::zeros(d, d);
    for i in 0..d {
        for j in i + 1..d {
            let x: f64 = rng.sample(StandardNormal);
            m[(i, j)] = x;
            m[(j, i)] = -x;
        }
    }
    m
}

/// Haar-ish random orthogonal matrix via QR of a Gaussian matrix.
pub fn random_orthogonal(rng: &mut impl Rng, d: usize) -> Mat {
    let g = Mat::from_fn(d, d, |_, _| rng.sample(StandardNormal));
    orthonormal_columns(&g)
}

/// `d x r` matrix with orthonormal columns.
pub fn random_orthonormal_columns(rng: &mut impl Rng, d: usize, r: usize) -> Mat {
    assert!(r <= d);
    let g = Mat::from_fn(d, r, |_, _| rng.sample(StandardNormal));
    orthonormal_columns(&g)
}

/// Projection matrix with unit-norm rows: the default random initialization
/// for probe projections.
pub fn random_unit_row_projection(rng: &mut impl Rng, rows: usize, cols: usize) -> Mat {
    let mut m = Mat::zeros(rows, cols);
    for i in 0..rows {
        let row = random_unit_vector(rng, cols);
        m.row_mut(i).copy_from_slice(&row);
    }
    m
}

/// Random 2x2 matrix with determinant exactly one (up to rounding in the
/// last entry), for gauge-invariance checks.
pub fn random_sl2(rng: &mut impl Rng) -> [[f64; 2]; 2] {
    loop {
        let a: f64 = rng.gen_range(0.3..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let b: f64 = rng.gen_range(-1.0..1.0);
        let c: f64 = rng.gen_range(-1.0..1.0);
        // d solves a*d - b*c = 1.
        let d = (1.0 + b * c) / a;
        if d.is_finite() && d.abs() < 1e3 {
            return [[a, b], [c, d]];
        }
    }
}
