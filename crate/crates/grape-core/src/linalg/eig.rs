//! Eigenvalues of small dense real matrices: Householder reduction to
//! Hessenberg form followed by the Francis implicit double-shift QR
//! iteration. This is the classic EISPACK/Jama scheme, eigenvalues only,
//! intended for the desk-scale dimensions used here (d <= 256).

use num_complex::Complex64;

use super::matrix::Mat;
use crate::error::{Error, Result};

/// Householder similarity reduction to upper Hessenberg form, in place.
fn hessenberg(h: &mut Mat) {
    let n = h.rows();
    if n < 3 {
        return;
    }
    let mut ort = vec![0.0; n];
    for m in 1..n - 1 {
        let mut scale = 0.0;
        for i in m..n {
            scale += h[(i, m - 1)].abs();
        }
        if scale == 0.0 {
            continue;
        }
        let mut hsum = 0.0;
        for i in (m..n).rev() {
            ort[i] = h[(i, m - 1)] / scale;
            hsum += ort[i] * ort[i];
        }
        let mut g = hsum.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        hsum -= ort[m] * g;
        ort[m] -= g;

        // Similarity transform H <- (I - u u^T / hsum) H (I - u u^T / hsum).
        for j in m..n {
            let mut f = 0.0;
            for i in (m..n).rev() {
                f += ort[i] * h[(i, j)];
            }
            f /= hsum;
            for i in m..n {
                h[(i, j)] -= f * ort[i];
            }
        }
        for i in 0..n {
            let mut f = 0.0;
            for j in (m..n).rev() {
                f += ort[j] * h[(i, j)];
            }
            f /= hsum;
            for j in m..n {
                h[(i, j)] -= f * ort[j];
            }
        }
        h[(m, m - 1)] = scale * g;
        for i in m + 1..n {
            h[(i, m - 1)] = 0.0;
        }
    }
}

/// Eigenvalues of a general real square matrix as complex numbers.
///
/// Conjugate pairs come out adjacent; use [`sort_canonical`] for the
/// reporting order (descending real part, positive imaginary part first).
pub fn eigenvalues(a: &Mat) -> Result<Vec<Complex64>> {
    if !a.is_square() {
        return Err(Error::shape("eigenvalues need a square matrix"));
    }
    let nn = a.rows();
    if nn == 0 {
        return Ok(Vec::new());
    }
    let mut h = a.clone();
    hessenberg(&mut h);

    let eps = f64::EPSILON;
    let mut d = vec![0.0; nn];
    let mut e = vec![0.0; nn];
    let mut n = nn as isize - 1;
    let mut exshift = 0.0;
    let (mut p, mut q, mut r) = (0.0f64, 0.0f64, 0.0f64);
    // p/q/r carry the bulge vector from the search loop into the first
    // reflection of each sweep.
    let _ = (p, q, r);

    let mut norm = 0.0;
    for i in 0..nn {
        for j in i.saturating_sub(1)..nn {
            norm += h[(i, j)].abs();
        }
    }
    if norm == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); nn]);
    }

    let mut iter = 0usize;
    while n >= 0 {
        let nu = n as usize;

        // Look for a single small sub-diagonal element.
        let mut l = nu;
        while l > 0 {
            let mut s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
            if s == 0.0 {
                s = norm;
            }
            if h[(l, l - 1)].abs() < eps * s {
                break;
            }
            l -= 1;
        }

        if l == nu {
            // One real root.
            h[(nu, nu)] += exshift;
            d[nu] = h[(nu, nu)];
            e[nu] = 0.0;
            n -= 1;
            iter = 0;
        } else if l == nu - 1 {
            // A 2x2 block: real pair or complex conjugate pair.
            let w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            p = (h[(nu - 1, nu - 1)] - h[(nu, nu)]) / 2.0;
            q = p * p + w;
            let mut z = q.abs().sqrt();
            h[(nu, nu)] += exshift;
            h[(nu - 1, nu - 1)] += exshift;
            let x = h[(nu, nu)];
            if q >= 0.0 {
                z = if p >= 0.0 { p + z } else { p - z };
                d[nu - 1] = x + z;
                d[nu] = if z != 0.0 { x - w / z } else { d[nu - 1] };
                e[nu - 1] = 0.0;
                e[nu] = 0.0;
            } else {
                d[nu - 1] = x + p;
                d[nu] = x + p;
                e[nu - 1] = z;
                e[nu] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            // Form shift.
            let mut x = h[(nu, nu)];
            let mut y = 0.0;
            let mut w = 0.0;
            if l < nu {
                y = h[(nu - 1, nu - 1)];
                w = h[(nu, nu - 1)] * h[(nu - 1, nu)];
            }

            if iter == 10 {
                // Wilkinson's ad hoc exceptional shift.
                exshift += x;
                for i in 0..=nu {
                    h[(i, i)] -= x;
                }
                let s = h[(nu, nu - 1)].abs() + h[(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            if iter == 30 {
                let mut s = (y - x) / 2.0;
                s = s * s + w;
                if s > 0.0 {
                    s = s.sqrt();
                    if y < x {
                        s = -s;
                    }
                    s = x - w / ((y - x) / 2.0 + s);
                    for i in 0..=nu {
                        h[(i, i)] -= s;
                    }
                    exshift += s;
                    x = 0.964;
                    y = 0.964;
                    w = 0.964;
                }
            }
            if iter > 60 {
                return Err(Error::NoConvergence(format!(
                    "QR iteration stalled at block ending {nu}"
                )));
            }
            iter += 1;

            // Look for two consecutive small sub-diagonal elements.
            let mut m = nu - 2;
            loop {
                let z = h[(m, m)];
                let rr = x - z;
                let mut s = y - z;
                p = (rr * s - w) / h[(m + 1, m)] + h[(m, m + 1)];
                q = h[(m + 1, m + 1)] - z - rr - s;
                r = h[(m + 2, m + 1)];
                s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                if h[(m, m - 1)].abs() * (q.abs() + r.abs())
                    < eps
                        * (p.abs() * (h[(m - 1, m - 1)].abs() + z.abs() + h[(m + 1, m + 1)].abs()))
                {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nu {
                h[(i, i - 2)] = 0.0;
                if i > m + 2 {
                    h[(i, i - 3)] = 0.0;
                }
            }

            // Double QR step on rows l..=n, columns m..=n.
            for k in m..nu {
                let notlast = k != nu - 1;
                if k != m {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if notlast { h[(k + 2, k - 1)] } else { 0.0 };
                    let x2 = p.abs() + q.abs() + r.abs();
                    if x2 == 0.0 {
                        continue;
                    }
                    p /= x2;
                    q /= x2;
                    r /= x2;
                    let mut s = (p * p + q * q + r * r).sqrt();
                    if p < 0.0 {
                        s = -s;
                    }
                    if s != 0.0 {
                        h[(k, k - 1)] = -s * x2;
                        apply_householder(&mut h, nn, nu, k, notlast, &mut p, q, r, s);
                    }
                } else {
                    let mut s = (p * p + q * q + r * r).sqrt();
                    if p < 0.0 {
                        s = -s;
                    }
                    if s != 0.0 {
                        if l != m {
                            h[(k, k - 1)] = -h[(k, k - 1)];
                        }
                        apply_householder(&mut h, nn, nu, k, notlast, &mut p, q, r, s);
                    }
                }
            }
        }
    }

    Ok(d.into_iter()
        .zip(e)
        .map(|(re, im)| Complex64::new(re, im))
        .collect())
}

#[allow(clippy::too_many_arguments)]
fn apply_householder(
    h: &mut Mat,
    nn: usize,
    nu: usize,
    k: usize,
    notlast: bool,
    p: &mut f64,
    q: f64,
    r: f64,
    s: f64,
) {
    *p += s;
    let x = *p / s;
    let y = q / s;
    let z = r / s;
    let q = q / *p;
    let r = r / *p;

    // Row modification.
    for j in k..nn {
        let mut pp = h[(k, j)] + q * h[(k + 1, j)];
        if notlast {
            pp += r * h[(k + 2, j)];
            h[(k + 2, j)] -= pp * z;
        }
        h[(k, j)] -= pp * x;
        h[(k + 1, j)] -= pp * y;
    }

    // Column modification.
    let upper = nu.min(k + 3);
    for i in 0..=upper {
        let mut pp = x * h[(i, k)] + y * h[(i, k + 1)];
        if notlast {
            pp += z * h[(i, k + 2)];
            h[(i, k + 2)] -= pp * r;
        }
        h[(i, k)] -= pp;
        h[(i, k + 1)] -= pp * q;
    }
}

/// Sort eigenvalues for reporting: descending real part, ties broken with the
/// positive imaginary member of a conjugate pair first.
pub fn sort_canonical(eigs: &mut [Complex64]) {
    eigs.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap()
            .then(b.im.partial_cmp(&a.im).unwrap())
    });
}

/// Greedy matching distance between two spectra: for each value in `a`, the
/// nearest unclaimed value in `b` is consumed, and the largest pair distance
/// is returned. Robust to ordering noise when eigenvalues sit on axes.
pub fn spectrum_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len(), "spectra must have equal multiplicity");
    let mut taken = vec![false; b.len()];
    let mut worst = 0.0f64;
    for ea in a {
        let mut best = f64::INFINITY;
        let mut best_idx = usize::MAX;
        for (i, eb) in b.iter().enumerate() {
            if !taken[i] {
                let d = (ea - eb).norm();
                if d < best {
                    best = d;
                    best_idx = i;
                }
            }
        }
        taken[best_idx] = true;
        worst = worst.max(best);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_spectrum(mat: &Mat, mut expected: Vec<Complex64>, tol: f64) {
        let mut got = eigenvalues(mat).unwrap();
        sort_canonical(&mut got);
        sort_canonical(&mut expected);
        assert_eq!(got.len(), expected.len());
        for (g, e) in got.iter().zip(expected.iter()) {
            assert!(
                (g - e).norm() < tol,
                "eigenvalue mismatch: got {g}, expected {e} (all: {got:?})"
            );
        }
    }

    #[test]
    fn diagonal_matrix() {
        let mut a = Mat::zeros(3, 3);
        a[(0, 0)] = 3.0;
        a[(1, 1)] = -1.0;
        a[(2, 2)] = 0.5;
        assert_spectrum(
            &a,
            vec![
                Complex64::new(3.0, 0.0),
                Complex64::new(-1.0, 0.0),
                Complex64::new(0.5, 0.0),
            ],
            1e-12,
        );
    }

    #[test]
    fn rotation_block_pair() {
        let theta = 0.9f64;
        let a = Mat::from_rows(&[
            vec![theta.cos(), -theta.sin()],
            vec![theta.sin(), theta.cos()],
        ])
        .unwrap();
        assert_spectrum(
            &a,
            vec![
                Complex64::new(theta.cos(), theta.sin()),
                Complex64::new(theta.cos(), -theta.sin()),
            ],
            1e-12,
        );
    }

    #[test]
    fn skew_pure_imaginary() {
        let s = 1.7;
        let mut a = Mat::zeros(4, 4);
        a[(0, 1)] = s;
        a[(1, 0)] = -s;
        assert_spectrum(
            &a,
            vec![
                Complex64::new(0.0, s),
                Complex64::new(0.0, -s),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
            1e-12,
        );
    }

    #[test]
    fn defective_jordan_block() {
        // [[1,1],[0,1]] has a double eigenvalue 1 with one Jordan block.
        let a = Mat::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        assert_spectrum(
            &a,
            vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)],
            1e-8,
        );
    }

    #[test]
    fn companion_matrix_known_roots() {
        // Companion of (x-1)(x-2)(x-3) = x^3 - 6x^2 + 11x - 6.
        let a = Mat::from_rows(&[
            vec![6.0, -11.0, 6.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
        ])
        .unwrap();
        assert_spectrum(
            &a,
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(2.0, 0.0),
                Complex64::new(3.0, 0.0),
            ],
            1e-10,
        );
    }

    #[test]
    fn trace_and_det_consistency_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in [2usize, 3, 5, 8, 13, 21] {
            let a = Mat::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let eigs = eigenvalues(&a).unwrap();
            let trace: f64 = (0..n).map(|i| a[(i, i)]).sum();
            let tr_sum: Complex64 = eigs.iter().sum();
            assert!(
                (tr_sum.re - trace).abs() < 1e-8 && tr_sum.im.abs() < 1e-8,
                "trace mismatch at n={n}: {tr_sum} vs {trace}"
            );
            let det_prod = eigs.iter().fold(Complex64::new(1.0, 0.0), |p, e| p * e);
            assert!(
                (det_prod.re - a.det()).abs() < 1e-7 && det_prod.im.abs() < 1e-7,
                "det mismatch at n={n}"
            );
        }
    }

    #[test]
    fn larger_orthogonal_spectrum_on_unit_circle() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let q = crate::sampling::random_orthogonal(&mut rng, 24);
        let eigs = eigenvalues(&q).unwrap();
        for e in eigs {
            assert!((e.norm() - 1.0).abs() < 1e-9, "|lambda| != 1: {e}");
        }
    }
}
