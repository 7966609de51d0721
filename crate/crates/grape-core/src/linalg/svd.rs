//! Singular values by one-sided Jacobi: rotate column pairs until the Gram
//! matrix is diagonal, then read off column norms. Simple, accurate for the
//! small dense matrices used in the spectral reports.

use super::matrix::Mat;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// Singular values of `a`, sorted descending.
pub fn singular_values(a: &Mat) -> Result<Vec<f64>> {
    // Work on the tall orientation; singular values are shared with A^T.
    let mut u = if a.rows() >= a.cols() {
        a.clone()
    } else {
        a.transpose()
    };
    let m = u.rows();
    let n = u.cols();
    let eps = f64::EPSILON;

    for sweep in 0..=MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = 0.0;
                for i in 0..m {
                    let up = u[(i, p)];
                    let uq = u[(i, q)];
                    app += up * up;
                    aqq += uq * uq;
                    apq += up * uq;
                }
                if apq.abs() <= eps * (app * aqq).sqrt() || apq == 0.0 {
                    continue;
                }
                rotated = true;
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let up = u[(i, p)];
                    let uq = u[(i, q)];
                    u[(i, p)] = c * up - s * uq;
                    u[(i, q)] = s * up + c * uq;
                }
            }
        }
        if !rotated {
            break;
        }
        if sweep == MAX_SWEEPS {
            return Err(Error::NoConvergence("Jacobi SVD did not settle".into()));
        }
    }

    let mut sv: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|i| u[(i, j)] * u[(i, j)]).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(sv)
}
