//! Householder QR, used to orthonormalize sampled bases.

use super::matrix::Mat;

/// Thin QR: returns `q` with orthonormal columns spanning the columns of `a`
/// (requires `a.rows() >= a.cols()` and full column rank for a useful result).
pub fn orthonormal_columns(a: &Mat) -> Mat {
    let m = a.rows();
    let n = a.cols();
    assert!(m >= n, "thin QR needs rows >= cols");
    let mut r = a.clone();
    let mut vs: Vec<Vec<f64>> = Vec::with_capacity(n);

    for k in 0..n {
        // Householder vector for column k below the diagonal.
        let mut v = vec![0.0; m];
        let mut norm = 0.0;
        for i in k..m {
            norm += r[(i, k)] * r[(i, k)];
        }
        let norm = norm.sqrt();
        if norm == 0.0 {
            vs.push(v);
            continue;
        }
        let alpha = if r[(k, k)] >= 0.0 { -norm } else { norm };
        for i in k..m {
            v[i] = r[(i, k)];
        }
        v[k] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            for j in k..n {
                let mut dot = 0.0;
                for i in k..m {
                    dot += v[i] * r[(i, j)];
                }
                let f = 2.0 * dot / vnorm2;
                for i in k..m {
                    r[(i, j)] -= f * v[i];
                }
            }
        }
        vs.push(v);
    }

    // Q = H_0 H_1 ... H_{n-1} applied to the first n identity columns.
    let mut q = Mat::from_fn(m, n, |i, j| if i == j { 1.0 } else { 0.0 });
    for k in (0..n).rev() {
        let v = &vs[k];
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for j in 0..n {
            let mut dot = 0.0;
            for i in k..m {
                dot += v[i] * q[(i, j)];
            }
            let f = 2.0 * dot / vnorm2;
            for i in k..m {
                q[(i, j)] -= f * v[i];
            }
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn columns_are_orthonormal() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for (m, n) in [(4, 4), (8, 3), (16, 16), (12, 5)] {
            let a = Mat::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0));
            let q = orthonormal_columns(&a);
            assert_eq!(q.rows(), m);
            assert_eq!(q.cols(), n);
            assert!(q.orthogonality_defect() < 1e-12, "Q^T Q != I for {m}x{n}");
        }
    }
}
