//! Single-precision variant of the rank-2 rotation kernel (build with the
//! `single-precision` feature). Same closed form as [`crate::rank2`], all
//! arithmetic in `f32`; tolerances scale with the wider epsilon.

use crate::error::{Error, Result};

const SERIES_THRESHOLD_F32: f32 = 3e-2;

/// f32 mirror of the plane generator: spanning vectors, frequency, cached
/// scalars.
#[derive(Debug, Clone)]
pub struct PlaneGeneratorF32 {
    a: Vec<f32>,
    b: Vec<f32>,
    omega: f32,
    alpha: f32,
    beta: f32,
    gamma: f32,
    s: f32,
}

impl PlaneGeneratorF32 {
    pub fn new(a: Vec<f32>, b: Vec<f32>, omega: f32) -> Result<Self> {
        if a.len() != b.len() || a.len() < 2 {
            return Err(Error::shape("plane vectors need equal length >= 2"));
        }
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::invalid("omega must be positive"));
        }
        let dot = |x: &[f32], y: &[f32]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f32>();
        let alpha = dot(&a, &a);
        let beta = dot(&b, &b);
        let gamma = dot(&a, &b);
        let delta = (alpha * beta - gamma * gamma).max(0.0);
        Ok(Self {
            a,
            b,
            omega,
            alpha,
            beta,
            gamma,
            s: delta.sqrt(),
        })
    }

    pub fn s(&self) -> f32 {
        self.s
    }
}

/// Apply `exp(n * omega * L)` in single precision.
pub fn apply_exp_f32(g: &PlaneGeneratorF32, n: f32, x: &[f32]) -> Result<Vec<f32>> {
    if x.len() != g.a.len() {
        return Err(Error::shape("vector length does not match plane dimension"));
    }
    if g.s == 0.0 {
        return Ok(x.to_vec());
    }
    let eta = n * g.omega;
    let z = eta * g.s;
    let (f1, f2) = if z.abs() < SERIES_THRESHOLD_F32 {
        let z2 = z * z;
        (
            1.0 - z2 / 6.0 + z2 * z2 / 120.0,
            0.5 - z2 / 24.0 + z2 * z2 / 720.0,
        )
    } else {
        let half = (0.5 * z).sin();
        (z.sin() / z, 2.0 * half * half / (z * z))
    };
    let c1 = f1 * eta;
    let c2 = f2 * eta * eta;
    let mut u = 0.0f32;
    let mut v = 0.0f32;
    for i in 0..x.len() {
        u += g.a[i] * x[i];
        v += g.b[i] * x[i];
    }
    let mut y = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let ai = g.a[i];
        let bi = g.b[i];
        let lx = ai * v - bi * u;
        let l2x = g.gamma * (ai * v + bi * u) - g.beta * ai * u - g.alpha * bi * v;
        y.push(x[i] + c1 * lx + c2 * l2x);
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn norm32(v: &[f32]) -> f32 {
        v.iter().map(|x| x * x).sum::<f32>().sqrt()
    }

    #[test]
    fn f32_identity_at_zero() {
        let g = PlaneGeneratorF32::new(vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], 1.0).unwrap();
        let x = vec![0.5f32, -1.0, 2.0];
        assert_eq!(apply_exp_f32(&g, 0.0, &x).unwrap(), x);
    }

    #[test]
    fn f32_matches_f64_path_at_relaxed_tolerance() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let mut worst = 0.0f64;
        for _ in 0..200 {
            let d = rng.gen_range(2..16);
            let a64: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b64: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x64: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let omega = rng.gen_range(0.1..1.0);
            let n = rng.gen_range(-64.0..64.0);

            let g64 = crate::rank2::PlaneGenerator::new(a64.clone(), b64.clone(), omega).unwrap();
            let y64 = crate::rank2::apply_exp(&g64, n, &x64).unwrap();

            let g32 = PlaneGeneratorF32::new(
                a64.iter().map(|v| *v as f32).collect(),
                b64.iter().map(|v| *v as f32).collect(),
                omega as f32,
            )
            .unwrap();
            let x32: Vec<f32> = x64.iter().map(|v| *v as f32).collect();
            let y32 = apply_exp_f32(&g32, n as f32, &x32).unwrap();

            for (lo, hi) in y32.iter().zip(&y64) {
                worst = worst.max((*lo as f64 - hi).abs());
            }
        }
        // f32 carries ~1e-7 relative precision; phase accumulation over
        // |n * omega * s| up to ~200 inflates that by the phase magnitude.
        assert!(worst < 5e-3, "f32/f64 drift {worst}");
    }

    #[test]
    fn f32_norm_preserved_at_f32_scale() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..100 {
            let d = rng.gen_range(2..16);
            let a: Vec<f32> = (0..d).map(|_| rng.gen_range(-1.0f32..1.0)).collect();
            let b: Vec<f32> = (0..d).map(|_| rng.gen_range(-1.0f32..1.0)).collect();
            let x: Vec<f32> = (0..d).map(|_| rng.gen_range(-1.0f32..1.0)).collect();
            let g = PlaneGeneratorF32::new(a, b, 0.5).unwrap();
            let y = apply_exp_f32(&g, rng.gen_range(-256.0f32..256.0), &x).unwrap();
            let rel = (norm32(&y) - norm32(&x)).abs() / norm32(&x).max(1e-3);
            // Phase magnitudes up to ~256 lose log2(phase) bits of the f32
            // mantissa to argument accumulation.
            assert!(rel < 3e-4, "f32 norm drift {rel}");
        }
    }
}
