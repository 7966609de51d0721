//! Path-integral additive biases.
//!
//! Each head keeps a store of positional probes; the edge potential between
//! an endpoint `t` and a link `l` is `alpha * g(<p_t, R_l p_l> / d)` with
//! `R_l = exp(l J)` the canonical rotation by angle `l` and `g` a strictly
//! negative, monotone, 1-Lipschitz link (log-sigmoid by default). The bias
//! from key position `j` to query endpoint `t` is the causal sum of the edge
//! potentials over `(j, t]`; one similarity sweep plus a prefix pass makes
//! every lookup O(1).
//!
//! When the edge potentials do not depend on the endpoint the construction
//! collapses to the plain additive family: constant potentials give the
//! linear slope bias and `psi = log f_l` reproduces forget-gate decay.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::math::{all_finite, dot, log_sigmoid, KahanSum};

// ── Link functions ──────────────────────────────────────────────────────────

/// Strictly negative monotone link applied to probe similarities.
#[derive(Clone)]
pub enum LinkFunction {
    /// `g(z) = ln(sigmoid(z))`; 1-Lipschitz since `g'(z) = 1 - sigmoid(z)`.
    LogSigmoid,
    /// User hook, validated at construction on a sampled grid: outputs must
    /// be strictly negative and finite-difference slopes at most 1 + 1e-6.
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for LinkFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinkFunction::LogSigmoid => write!(f, "LogSigmoid"),
            LinkFunction::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl LinkFunction {
    pub fn eval(&self, z: f64) -> f64 {
        match self {
            LinkFunction::LogSigmoid => log_sigmoid(z),
            LinkFunction::Custom(f) => f(z),
        }
    }

    /// Sampled negativity and Lipschitz validation over `[-8, 8]`.
    fn validate(&self) -> Result<()> {
        if matches!(self, LinkFunction::LogSigmoid) {
            return Ok(());
        }
        let step = 1e-3;
        let mut z = -8.0;
        let mut prev = self.eval(z);
        if prev >= 0.0 || prev.is_nan() {
            return Err(Error::invalid("link output must be strictly negative"));
        }
        while z < 8.0 {
            let next = self.eval(z + step);
            if !(next < 0.0 && next.is_finite()) {
                return Err(Error::invalid(format!(
                    "link output must be strictly negative, got {next} at z={}",
                    z + step
                )));
            }
            let slope = (next - prev) / step;
            if slope.abs() > 1.0 + 1e-6 {
                return Err(Error::invalid(format!(
                    "link is not 1-Lipschitz (slope {slope:.6} near z={z:.3})"
                )));
            }
            prev = next;
            z += step;
        }
        Ok(())
    }
}

// ── Probe construction ──────────────────────────────────────────────────────

/// RMS normalization with epsilon 1e-6: `x * sqrt(d) / sqrt(sum x^2 + d eps)`.
/// The output has root-mean-square one, so probe similarities divided by `d`
/// land in `[-1, 1]`.
pub fn rms_normalize(x: &[f64]) -> Vec<f64> {
    let d = x.len() as f64;
    let ms = dot(x, x) / d + 1e-6;
    let inv = 1.0 / ms.sqrt();
    x.iter().map(|v| v * inv).collect()
}

/// Linear projection followed by RMS normalization: the standard probe map
/// from token features. Projection rows are expected to have unit norm when
/// randomly initialized, but any finite matrix is accepted.
pub fn probe_from_features(projection: &Mat, features: &[f64]) -> Result<Vec<f64>> {
    if projection.cols() != features.len() {
        return Err(Error::shape(format!(
            "projection expects {} features, got {}",
            projection.cols(),
            features.len()
        )));
    }
    Ok(rms_normalize(&projection.matvec(features)))
}

/// Rotate each coordinate pair `(2i, 2i+1)` by `angle` radians; a trailing
/// odd coordinate is left fixed. This is `exp(angle * J)`.
pub fn rotate_pairs(x: &[f64], angle: f64) -> Vec<f64> {
    let (sin, cos) = angle.sin_cos();
    let mut out = x.to_vec();
    let mut i = 0;
    while i + 1 < x.len() {
        let a = x[i];
        let b = x[i + 1];
        out[i] = a * cos - b * sin;
        out[i + 1] = a * sin + b * cos;
        i += 2;
    }
    out
}

// ── Probe store ─────────────────────────────────────────────────────────────

/// Append-only per-head store of raw probes and their rotated forms
/// `r_l = R_l p_l`, cached once at arrival. Single writer per head-sequence;
/// reads of completed prefixes are safe.
#[derive(Debug, Clone)]
pub struct ProbeStore {
    dim: usize,
    alpha: f64,
    link: LinkFunction,
    raw: Vec<Vec<f64>>,
    rotated: Vec<Vec<f64>>,
}

impl ProbeStore {
    /// `alpha` must be strictly positive.
    pub fn new(dim: usize, alpha: f64, link: LinkFunction) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("probe dimension must be positive"));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::invalid(format!("alpha must be > 0, got {alpha}")));
        }
        link.validate()?;
        Ok(Self {
            dim,
            alpha,
            link,
            raw: Vec::new(),
            rotated: Vec::new(),
        })
    }

    /// Append the probe for the next position; the rotated copy is computed
    /// here and never rewritten.
    pub fn push_probe(&mut self, probe: Vec<f64>) -> Result<usize> {
        if probe.len() != self.dim {
            return Err(Error::shape(format!(
                "probe length {} vs store dimension {}",
                probe.len(),
                self.dim
            )));
        }
        if !all_finite(&probe) {
            return Err(Error::invalid("probe must be finite"));
        }
        let l = self.raw.len();
        self.rotated.push(rotate_pairs(&probe, l as f64));
        self.raw.push(probe);
        Ok(l)
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn raw_probe(&self, l: usize) -> &[f64] {
        &self.raw[l]
    }

    pub fn rotated_probe(&self, l: usize) -> &[f64] {
        &self.rotated[l]
    }

    fn psi(&self, t: usize, l: usize) -> f64 {
        let z = dot(&self.raw[t], &self.rotated[l]) / self.dim as f64;
        self.alpha * self.link.eval(z)
    }
}

/// Edge potential `psi(t, l) = alpha * g(<p_t, R_l p_l> / d) < 0`, requiring
/// `l < t` (causality).
pub fn edge_potential(store: &ProbeStore, t: usize, l: usize) -> Result<f64> {
    if l >= t {
        return Err(Error::invalid(format!(
            "edge potential needs l < t, got (t, l) = ({t}, {l})"
        )));
    }
    if t >= store.len() {
        return Err(Error::IndexOutOfRange(format!(
            "endpoint {t} beyond stored probes ({})",
            store.len()
        )));
    }
    Ok(store.psi(t, l))
}

// ── Bias rows ───────────────────────────────────────────────────────────────

/// One endpoint row: edge potentials `psi(t, l)` for `l <= t` and the
/// suffix-anchored prefix sums that make `b(t, j)` an O(1) lookup.
#[derive(Debug, Clone)]
pub struct PathBiasRow {
    t: usize,
    psi: Vec<f64>,
    /// `prefix[j] = sum_{l = j+1}^{t} psi[l]`, so `prefix[t] = 0`.
    prefix: Vec<f64>,
}

impl PathBiasRow {
    /// Build a row from explicit edge potentials `psi[l]` for `l = 0..=t`
    /// (index 0 is carried but never enters a causal sum). Potentials must be
    /// non-positive.
    pub fn from_psi(t: usize, psi: Vec<f64>) -> Result<Self> {
        if psi.len() != t + 1 {
            return Err(Error::shape(format!(
                "row for endpoint {t} needs {} potentials, got {}",
                t + 1,
                psi.len()
            )));
        }
        let mut prefix = vec![0.0; t + 1];
        let mut acc = KahanSum::new();
        for j in (0..t).rev() {
            acc.add(psi[j + 1]);
            prefix[j] = acc.value();
        }
        Ok(Self { t, psi, prefix })
    }

    pub fn endpoint(&self) -> usize {
        self.t
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    /// `b(t, j) = sum_{l=j+1}^{t} psi(t, l)`; `b(t, t) = 0`.
    pub fn bias(&self, j: usize) -> Result<f64> {
        if j > self.t {
            return Err(Error::IndexOutOfRange(format!(
                "bias lookup j={j} beyond endpoint {}",
                self.t
            )));
        }
        Ok(self.prefix[j])
    }
}

/// Compute the full row for endpoint `t` in one similarity sweep: O(t d)
/// work, O(1) lookups afterwards.
pub fn bias_row(store: &ProbeStore, t: usize) -> Result<PathBiasRow> {
    if t >= store.len() {
        return Err(Error::IndexOutOfRange(format!(
            "endpoint {t} beyond stored probes ({})",
            store.len()
        )));
    }
    let psi: Vec<f64> = (0..=t).map(|l| store.psi(t, l)).collect();
    PathBiasRow::from_psi(t, psi)
}

// ── Phase-modulated specialization ──────────────────────────────────────────

/// Endpoint-independent bias `-theta (Phi_t - Phi_j)` with cumulative phase
/// `Phi_u = sum_{l < u} omega_l`; `omega ≡ 1` recovers the plain linear
/// slope `-theta (t - j)`.
pub fn phase_modulated_bias(omega_seq: &[f64], theta: f64, t: usize, j: usize) -> Result<f64> {
    if omega_seq.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::invalid("phase increments must be non-negative"));
    }
    if !(theta.is_finite() && theta >= 0.0) {
        return Err(Error::invalid("theta must be non-negative"));
    }
    if j > t || t > omega_seq.len() {
        return Err(Error::IndexOutOfRange(format!(
            "need j <= t <= {}, got (t, j) = ({t}, {j})",
            omega_seq.len()
        )));
    }
    let mut phi = KahanSum::new();
    for &w in &omega_seq[j..t] {
        phi.add(w);
    }
    Ok(-theta * phi.value())
}

// ── Unipotent path collapse ─────────────────────────────────────────────────

/// Assemble `prod_l (I - psi_l E)` with `E = e_{d+2} e_{d+1}^T` densely and
/// verify the structural collapse to `I - (sum psi) E`; both the product and
/// the collapse are exact because `E^2 = 0`. Returns the product matrix.
pub fn path_product_check(psi_values: &[f64], base_dim: usize) -> Result<Mat> {
    let ld = base_dim + 2;
    let mut e = Mat::zeros(ld, ld);
    e[(base_dim + 1, base_dim)] = 1.0;

    let mut product = Mat::identity(ld);
    for &psi in psi_values {
        let factor = Mat::identity(ld).sub(&e.scale(psi));
        product = product.matmul(&factor);
    }

    let mut total = 0.0;
    for &psi in psi_values {
        total += -psi;
    }
    let mut collapsed = Mat::identity(ld);
    collapsed[(base_dim + 1, base_dim)] = total;
    if product.max_abs_diff(&collapsed) != 0.0 {
        return Err(Error::invalid(
            "unipotent path product failed to collapse exactly",
        ));
    }
    Ok(product)
}

// ── Tests ───────────────────────────────────────────────────────────────────
