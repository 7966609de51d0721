//! Dense matrix exponential by scaling and squaring of a truncated Taylor
//! series. Cubic in the dimension; this is the slow reference path that the
//! closed-form kernels are checked against (and benchmarked against).

use super::matrix::Mat;

/// `exp(A)` for a square matrix.
///
/// The input is scaled by `2^-j` until its 1-norm is at most one, the series
/// is summed until terms vanish at double precision, and the result is
/// squared `j` times. Every squaring roughly doubles the accumulated error,
/// so the scaling uses the true 1-norm rather than a crude bound to keep `j`
/// as small as the input allows.
pub fn expm(a: &Mat) -> Mat {
    assert!(a.is_square(), "expm needs a square matrix");
    let n = a.rows();
    let norm = one_norm(a);
    let j = if norm > 2.0 {
        (norm / 2.0).log2().ceil().max(0.0) as u32
    } else {
        0
    };
    let scaled = a.scale(0.5f64.powi(j as i32));

    let mut sum = Mat::identity(n);
    let mut term = Mat::identity(n);
    for k in 1..=40 {
        term = term.matmul(&scaled).scale(1.0 / k as f64);
        sum = sum.add(&term);
        if term.max_abs() <= f64::EPSILON * sum.max_abs() {
            break;
        }
    }

    let mut result = sum;
    for _ in 0..j {
        result = result.matmul(&result);
    }
    result
}

/// Maximum absolute column sum.
fn one_norm(a: &Mat) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..a.cols() {
        let mut col = 0.0;
        for i in 0..a.rows() {
            col += a[(i, j)].abs();
        }
        worst = worst.max(col);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_zero_is_identity() {
        let z = Mat::zeros(4, 4);
        assert_eq!(expm(&z).max_abs_diff(&Mat::identity(4)), 0.0);
    }

    #[test]
    fn expm_diagonal() {
        let mut d = Mat::zeros(3, 3);
        d[(0, 0)] = 1.0;
        d[(1, 1)] = -2.0;
        d[(2, 2)] = 0.5;
        let e = expm(&d);
        assert!((e[(0, 0)] - 1.0f64.exp()).abs() < 1e-13);
        assert!((e[(1, 1)] - (-2.0f64).exp()).abs() < 1e-13);
        assert!((e[(2, 2)] - 0.5f64.exp()).abs() < 1e-13);
        assert!(e[(0, 1)].abs() < 1e-15);
    }

    #[test]
    fn expm_rotation_block() {
        // exp(theta * J) is the rotation by theta.
        let theta = 0.7;
        let mut j = Mat::zeros(2, 2);
        j[(0, 1)] = -theta;
        j[(1, 0)] = theta;
        let e = expm(&j);
        assert!((e[(0, 0)] - theta.cos()).abs() < 1e-14);
        assert!((e[(0, 1)] + theta.sin()).abs() < 1e-14);
        assert!((e[(1, 0)] - theta.sin()).abs() < 1e-14);
        assert!((e[(1, 1)] - theta.cos()).abs() < 1e-14);
    }

    #[test]
    fn expm_large_angle_stays_orthogonal() {
        let theta = 4096.0;
        let mut j = Mat::zeros(2, 2);
        j[(0, 1)] = -theta;
        j[(1, 0)] = theta;
        let e = expm(&j);
        assert!(e.orthogonality_defect() < 1e-9);
        assert!((e[(0, 0)] - theta.cos()).abs() < 1e-9);
    }

    #[test]
    fn expm_nilpotent_truncates() {
        let mut a = Mat::zeros(3, 3);
        a[(0, 1)] = 2.0;
        a[(1, 2)] = 3.0;
        // exp(A) = I + A + A^2/2 for strictly upper triangular A.
        let e = expm(&a);
        assert!((e[(0, 1)] - 2.0).abs() < 1e-14);
        assert!((e[(1, 2)] - 3.0).abs() < 1e-14);
        assert!((e[(0, 2)] - 3.0).abs() < 1e-13);
    }
}
