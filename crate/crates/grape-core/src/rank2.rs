//! Rank-2 skew-generator algebra.
//!
//! A pair of vectors `a, b` defines the skew generator `L = a b^T - b a^T`,
//! which acts only on the plane `span{a, b}`. Because the minimal polynomial
//! of `L` is `x (x^2 + s^2)` with `s^2 = |a|^2 |b|^2 - (a.b)^2`, the
//! exponential has a closed two-coefficient form
//!
//! ```text
//! exp(eta L) = I + (sin(eta s)/s) L + ((1 - cos(eta s))/s^2) L^2
//! ```
//!
//! so applying the rotation `exp(n w L)` to a vector costs O(d): two inner
//! products and two axpy-style updates, never a d x d matrix. Orientation
//! note: `exp(eta L(a,b))` rotates `b` toward `a` (equivalently `a` toward
//! `-b`); a positive rotation from `u` toward `v` is generated by `L(v, u)`.

use crate::error::{Error, Result};
use crate::linalg::{expm, Mat};
use crate::math::{all_finite, dot};

/// Below this phase magnitude the trigonometric coefficient ratios switch to
/// truncated series to avoid cancellation in `(1 - cos z)/z^2`.
pub const SERIES_THRESHOLD: f64 = 1e-4;

// ── Plane generator ─────────────────────────────────────────────────────────

/// One rank-2 plane: the vectors spanning it, a frequency, and the cached
/// scalars of the generator `L = a b^T - b a^T`.
///
/// Immutable after construction; all operations on it are pure.
#[derive(Debug, Clone)]
pub struct PlaneGenerator {
    a: Vec<f64>,
    b: Vec<f64>,
    omega: f64,
    alpha: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
    s: f64,
}

/// The five scalars of a plane: `(alpha, beta, gamma, delta, s)`.
///
/// `alpha = |a|^2`, `beta = |b|^2`, `gamma = a.b`, `delta = alpha beta -
/// gamma^2` (clamped at zero if rounding produces a tiny negative), and
/// `s = sqrt(delta)`.
pub fn plane_scalars(a: &[f64], b: &[f64]) -> Result<(f64, f64, f64, f64, f64)> {
    if a.len() != b.len() {
        return Err(Error::shape(format!(
            "plane vectors differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::invalid("plane vectors need dimension >= 2"));
    }
    if !all_finite(a) || !all_finite(b) {
        return Err(Error::invalid("plane vectors must be finite"));
    }
    let alpha = dot(a, a);
    let beta = dot(b, b);
    let gamma = dot(a, b);
    let mut delta = alpha * beta - gamma * gamma;
    if delta < 0.0 {
        // Cauchy-Schwarz guarantees delta >= 0; a tiny negative is rounding.
        delta = 0.0;
    }
    Ok((alpha, beta, gamma, delta, delta.sqrt()))
}

impl PlaneGenerator {
    /// Build a plane from raw vectors. `omega` must be positive and finite.
    pub fn new(a: Vec<f64>, b: Vec<f64>, omega: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::invalid(format!(
                "omega must be positive, got {omega}"
            )));
        }
        let (alpha, beta, gamma, delta, s) = plane_scalars(&a, &b)?;
        Ok(Self {
            a,
            b,
            omega,
            alpha,
            beta,
            gamma,
            delta,
            s,
        })
    }

    /// Gauge-fixed construction: re-orthonormalizes `(a, b)` to unit norm and
    /// zero inner product with one projection step, absorbing the plane scale
    /// `s` into the frequency. Rejects inputs shorter than `1e-8` or pairs
    /// that are numerically collinear.
    pub fn gauge_fixed(a: Vec<f64>, b: Vec<f64>, omega: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::invalid(format!(
                "omega must be positive, got {omega}"
            )));
        }
        let (_, _, _, _, s_raw) = plane_scalars(&a, &b)?;
        let na = crate::math::norm(&a);
        if na < 1e-8 {
            return Err(Error::invalid("gauge fixing rejects |a| < 1e-8"));
        }
        let a_hat: Vec<f64> = a.iter().map(|x| x / na).collect();
        let proj = dot(&b, &a_hat);
        let b_perp: Vec<f64> = b.iter().zip(&a_hat).map(|(x, ah)| x - proj * ah).collect();
        let nb = crate::math::norm(&b_perp);
        if nb < 1e-8 {
            return Err(Error::invalid("gauge fixing rejects near-collinear (a, b)"));
        }
        let b_hat: Vec<f64> = b_perp.iter().map(|x| x / nb).collect();
        // L(a, b) = s * L(a_hat, b_hat), so the action is preserved exactly
        // by scaling the frequency.
        Self::new(a_hat, b_hat, omega * s_raw)
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Plane speed `s = sqrt(delta)`; the rotation angle at position `n` is
    /// `n * omega * s`.
    pub fn s(&self) -> f64 {
        self.s
    }

    /// Assemble the dense generator `L = a b^T - b a^T` (test/oracle path).
    pub fn dense_generator(&self) -> Mat {
        let d = self.dim();
        let mut l = Mat::zeros(d, d);
        l.add_outer(1.0, &self.a, &self.b);
        l.add_outer(-1.0, &self.b, &self.a);
        l
    }

    /// `L x` without materializing `L`.
    fn l_apply(&self, x: &[f64]) -> Vec<f64> {
        let u = dot(&self.a, x);
        let v = dot(&self.b, x);
        self.a
            .iter()
            .zip(&self.b)
            .map(|(ai, bi)| ai * v - bi * u)
            .collect()
    }

    /// `L^2 x = gamma (a v + b u) - beta a u - alpha b v`.
    fn l2_apply(&self, x: &[f64]) -> Vec<f64> {
        let u = dot(&self.a, x);
        let v = dot(&self.b, x);
        self.a
            .iter()
            .zip(&self.b)
            .map(|(ai, bi)| {
                self.gamma * (ai * v + bi * u) - self.beta * ai * u - self.alpha * bi * v
            })
            .collect()
    }
}

// ── Exponential coefficients ────────────────────────────────────────────────

/// The two trigonometric ratios of the closed-form exponential at phase
/// `z = n * omega * s`: `f1 = sin(z)/z`, `f2 = (1 - cos z)/z^2`.
#[derive(Debug, Clone, Copy)]
pub struct ExpCoefficients {
    pub f1: f64,
    pub f2: f64,
    pub z: f64,
}

impl ExpCoefficients {
    /// Evaluate the ratios, switching to 4th-order series below the
    /// [`SERIES_THRESHOLD`].
    pub fn for_phase(z: f64) -> Self {
        let (f1, f2) = if z.abs() < SERIES_THRESHOLD {
            let z2 = z * z;
            (
                1.0 - z2 / 6.0 + z2 * z2 / 120.0,
                0.5 - z2 / 24.0 + z2 * z2 / 720.0,
            )
        } else {
            // (1 - cos z)/z^2 written as 2 sin^2(z/2)/z^2: the naive form
            // loses eight digits to cancellation right at the threshold.
            let half_sin = (0.5 * z).sin();
            (z.sin() / z, 2.0 * half_sin * half_sin / (z * z))
        };
        Self { f1, f2, z }
    }

    /// Coefficients for a plane at position `n`.
    pub fn for_position(g: &PlaneGenerator, n: f64) -> Self {
        Self::for_phase(n * g.omega * g.s)
    }
}

/// Derivative ratios `g1 = f1'(z)/z`, `g2 = f2'(z)/z`. Sharing the same
/// series threshold keeps the gradient continuous through z = 0.
fn deriv_coefficients(z: f64) -> (f64, f64) {
    if z.abs() < SERIES_THRESHOLD {
        let z2 = z * z;
        (
            -1.0 / 3.0 + z2 / 30.0 - z2 * z2 / 840.0,
            -1.0 / 12.0 + z2 / 180.0 - z2 * z2 / 6720.0,
        )
    } else {
        let z2 = z * z;
        let half_sin = (0.5 * z).sin();
        (
            (z * z.cos() - z.sin()) / (z2 * z),
            (z * z.sin() - 4.0 * half_sin * half_sin) / (z2 * z2),
        )
    }
}

// ── Application ─────────────────────────────────────────────────────────────

/// Apply `exp(n * omega * L)` to `x` in O(d).
///
/// Degenerate planes (`s = 0`, collinear spanning vectors) act as the
/// identity, which is the continuous limit of the closed form.
pub fn apply_exp(g: &PlaneGenerator, n: f64, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != g.dim() {
        return Err(Error::shape(format!(
            "vector length {} does not match plane dimension {}",
            x.len(),
            g.dim()
        )));
    }
    if !all_finite(x) || !n.is_finite() {
        return Err(Error::invalid("apply_exp needs finite inputs"));
    }
    if g.s == 0.0 {
        return Ok(x.to_vec());
    }
    Ok(apply_exp_unchecked(
        g,
        ExpCoefficients::for_position(g, n),
        n,
        x,
    ))
}

/// The coefficient-explicit core of [`apply_exp`]; exposed so harnesses can
/// evaluate the update with externally supplied (possibly perturbed)
/// coefficients.
pub fn apply_exp_unchecked(
    g: &PlaneGenerator,
    coeffs: ExpCoefficients,
    n: f64,
    x: &[f64],
) -> Vec<f64> {
    let eta = n * g.omega;
    let c1 = coeffs.f1 * eta;
    let c2 = coeffs.f2 * eta * eta;
    let u = dot(&g.a, x);
    let v = dot(&g.b, x);
    let mut y = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let ai = g.a[i];
        let bi = g.b[i];
        let lx = ai * v - bi * u;
        let l2x = g.gamma * (ai * v + bi * u) - g.beta * ai * u - g.alpha * bi * v;
        y.push(x[i] + c1 * lx + c2 * l2x);
    }
    y
}

/// Apply the canonical 90-degree operator: pairs `(2i, 2i+1)` map
/// `(x, y) -> (-y, x)`; a trailing odd coordinate maps to zero.
pub fn j_apply(x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    let mut i = 0;
    while i + 1 < x.len() {
        out[i] = -x[i + 1];
        out[i + 1] = x[i];
        i += 2;
    }
    out
}

/// Apply `exp(n * omega * L(a, J a))` with the canonical complex structure
/// `J`. This is a pure planar rotation: with unit `|a|` the angle is exactly
/// `n * omega`; otherwise the effective frequency is `omega * |a|^2`.
pub fn apply_exp_b_eq_ja(a: &[f64], omega: f64, n: f64, x: &[f64]) -> Result<Vec<f64>> {
    let b = j_apply(a);
    let g = PlaneGenerator::new(a.to_vec(), b, omega)?;
    apply_exp(&g, n, x)
}

// ── Derivatives ─────────────────────────────────────────────────────────────

/// Which scalar parameter to differentiate with respect to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeParam {
    Omega,
    /// Entry `i` of the first spanning vector.
    AEntry(usize),
    /// Entry `i` of the second spanning vector.
    BEntry(usize),
}

/// Analytic derivative of `exp(n * omega * L) x` with respect to one scalar
/// parameter, assembled from the generator-derivative terms plus the chain
/// terms through the phase `z = n * omega * s`. Series-guarded near `z = 0`.
pub fn exp_derivatives(
    g: &PlaneGenerator,
    n: f64,
    x: &[f64],
    wrt: DerivativeParam,
) -> Result<Vec<f64>> {
    let d = g.dim();
    if x.len() != d {
        return Err(Error::shape(format!(
            "vector length {} does not match plane dimension {}",
            x.len(),
            d
        )));
    }
    match wrt {
        DerivativeParam::AEntry(i) | DerivativeParam::BEntry(i) if i >= d => {
            return Err(Error::IndexOutOfRange(format!(
                "entry {i} out of range for dimension {d}"
            )));
        }
        _ => {}
    }

    let eta = n * g.omega;
    let z = eta * g.s;
    let ExpCoefficients { f1, f2, .. } = ExpCoefficients::for_phase(z);
    let (g1, g2) = deriv_coefficients(z);

    // Parameter-dependent pieces: d(eta), d(Delta), and dL as an operator.
    let (deta, ddelta) = match wrt {
        DerivativeParam::Omega => (n, 0.0),
        DerivativeParam::AEntry(i) => (0.0, 2.0 * (g.a[i] * g.beta - g.gamma * g.b[i])),
        DerivativeParam::BEntry(i) => (0.0, 2.0 * (g.b[i] * g.alpha - g.gamma * g.a[i])),
    };
    // z dz = eta deta Delta + eta^2 (dDelta / 2); finite even at s = 0.
    let zdz = eta * deta * g.delta + eta * eta * (ddelta / 2.0);

    let u = dot(&g.a, x);
    let v = dot(&g.b, x);
    let lx = g.l_apply(x);
    let l2x = g.l2_apply(x);

    // dL x, L (dL x), and dL (L x).
    let (dlx, dl_lx): (Vec<f64>, Vec<f64>) = match wrt {
        DerivativeParam::Omega => (vec![0.0; d], vec![0.0; d]),
        DerivativeParam::AEntry(i) => {
            // dL = e_i b^T - b e_i^T
            let mut dlx = vec![0.0; d];
            for (k, item) in dlx.iter_mut().enumerate() {
                *item = -g.b[k] * x[i];
            }
            dlx[i] += v;
            let w = &lx;
            let mut dl_lx = vec![0.0; d];
            for (k, item) in dl_lx.iter_mut().enumerate() {
                *item = -g.b[k] * w[i];
            }
            dl_lx[i] += dot(&g.b, w);
            (dlx, dl_lx)
        }
        DerivativeParam::BEntry(i) => {
            // dL = a e_i^T - e_i a^T
            let mut dlx = vec![0.0; d];
            for (k, item) in dlx.iter_mut().enumerate() {
                *item = g.a[k] * x[i];
            }
            dlx[i] -= u;
            let w = &lx;
            let mut dl_lx = vec![0.0; d];
            for (k, item) in dl_lx.iter_mut().enumerate() {
                *item = g.a[k] * w[i];
            }
            dl_lx[i] -= dot(&g.a, w);
            (dlx, dl_lx)
        }
    };
    let l_dlx = g.l_apply(&dlx);

    let mut out = vec![0.0; d];
    for k in 0..d {
        out[k] = g1 * zdz * eta * lx[k]
            + f1 * (deta * lx[k] + eta * dlx[k])
            + g2 * zdz * eta * eta * l2x[k]
            + f2 * (2.0 * eta * deta * l2x[k] + eta * eta * (l_dlx[k] + dl_lx[k]));
    }
    Ok(out)
}

// ── Dense oracle ────────────────────────────────────────────────────────────

/// Dense `exp(t L)` by scaling-and-squaring of the series — the slow
/// reference route the closed-form kernels are validated and benchmarked
/// against. Rejects non-skew input and dimensions above 256.
pub fn dense_exp_oracle(l: &Mat, t: f64) -> Result<Mat> {
    if !l.is_square() {
        return Err(Error::shape("dense_exp_oracle needs a square matrix"));
    }
    if l.rows() > 256 {
        return Err(Error::invalid(format!(
            "dense_exp_oracle limited to d <= 256, got {}",
            l.rows()
        )));
    }
    let tol = 1e-12 * l.max_abs().max(1.0);
    if l.skew_defect() > tol {
        return Err(Error::invalid(format!(
            "matrix is not skew-symmetric (defect {:.3e})",
            l.skew_defect()
        )));
    }
    Ok(expm(&l.scale(t)))
}

// ── Tests ───────────────────────────────────────────────────────────────────
