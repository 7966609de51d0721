//! Commuting multi-subspace rotations.
//!
//! A [`MultiSubspaceMap`] rotates disjoint coordinate pairs by per-plane
//! angles `n * theta_i`, optionally conjugated by a learned orthogonal basis
//! `B`: the action is `B . blockrot(n) . B^T`. With canonical pairs and the
//! log-uniform spectrum this is exactly RoPE; [`rope_reference`] is the
//! independent oracle for that equivalence.
//!
//! Orientation: plane `(p, q)` rotates coordinate `p` toward coordinate `q`
//! for positive angles, i.e. the per-plane generator is `L(e_q, e_p)` in the
//! `L(a, b) = a b^T - b a^T` convention of [`crate::rank2`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::math::all_finite;

// ── Multi-subspace map ──────────────────────────────────────────────────────

/// A set of mutually orthogonal rotation planes with per-plane angles and an
/// optional orthogonal change of basis. Immutable after construction.
#[derive(Debug, Clone)]
pub struct MultiSubspaceMap {
    d: usize,
    planes: Vec<(usize, usize)>,
    thetas: Vec<f64>,
    basis: Option<Mat>,
    head_id: u32,
}

impl MultiSubspaceMap {
    /// Canonical coordinate pairs `(2i, 2i+1)` with the given angles.
    ///
    /// Odd `d` leaves the final coordinate fixed; asking for more planes than
    /// `floor(d/2)` is an error.
    pub fn canonical(d: usize, thetas: Vec<f64>) -> Result<Self> {
        if thetas.len() > d / 2 {
            return Err(Error::invalid(format!(
                "{} planes do not fit in dimension {} ({} coordinate pairs)",
                thetas.len(),
                d,
                d / 2
            )));
        }
        let planes = (0..thetas.len()).map(|i| (2 * i, 2 * i + 1)).collect();
        Self::with_planes(d, planes, thetas)
    }

    /// Canonical planes with the log-uniform spectrum
    /// `theta_i = base^(-2i/d)`, the standard RoPE frequency ladder.
    pub fn log_uniform(d: usize, base: f64) -> Result<Self> {
        if d % 2 != 0 {
            return Err(Error::invalid("log-uniform spectrum needs even d"));
        }
        if !(base.is_finite() && base > 1.0) {
            return Err(Error::invalid(format!("base must exceed 1, got {base}")));
        }
        let thetas = log_uniform_spectrum(d, base);
        Self::canonical(d, thetas)
    }

    /// Explicit plane pairs. Pairs must be disjoint, in range, and angles
    /// positive.
    pub fn with_planes(d: usize, planes: Vec<(usize, usize)>, thetas: Vec<f64>) -> Result<Self> {
        if d < 2 {
            return Err(Error::invalid("dimension must be at least 2"));
        }
        if planes.len() != thetas.len() {
            return Err(Error::shape(format!(
                "{} planes vs {} angles",
                planes.len(),
                thetas.len()
            )));
        }
        let mut seen = vec![false; d];
        for &(p, q) in &planes {
            if p >= d || q >= d || p == q {
                return Err(Error::invalid(format!(
                    "bad plane pair ({p}, {q}) for d={d}"
                )));
            }
            if seen[p] || seen[q] {
                return Err(Error::invalid(format!(
                    "plane pair ({p}, {q}) overlaps another plane"
                )));
            }
            seen[p] = true;
            seen[q] = true;
        }
        if thetas.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::invalid("plane angles must be positive and finite"));
        }
        Ok(Self {
            d,
            planes,
            thetas,
            basis: None,
            head_id: 0,
        })
    }

    /// Attach an orthogonal basis `B`; the map becomes `B blockrot B^T`.
    pub fn with_basis(mut self, basis: Mat) -> Result<Self> {
        if basis.rows() != self.d || basis.cols() != self.d {
            return Err(Error::shape(format!(
                "basis is {}x{}, map dimension is {}",
                basis.rows(),
                basis.cols(),
                self.d
            )));
        }
        let defect = basis.orthogonality_defect();
        if defect > 1e-8 {
            return Err(Error::invalid(format!(
                "basis is not orthogonal (max |B^T B - I| = {defect:.3e})"
            )));
        }
        self.basis = Some(basis);
        Ok(self)
    }

    pub fn with_head_id(mut self, head_id: u32) -> Self {
        self.head_id = head_id;
        self
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn planes(&self) -> &[(usize, usize)] {
        &self.planes
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn basis(&self) -> Option<&Mat> {
        self.basis.as_ref()
    }

    pub fn head_id(&self) -> u32 {
        self.head_id
    }

    fn same_basis(&self, other: &Self) -> bool {
        match (&self.basis, &other.basis) {
            (None, None) => true,
            (Some(a), Some(b)) => a == b,
            _ => false,
        }
    }

    /// Assemble the dense total generator `sum_i theta_i L_i` (oracle path).
    pub fn dense_generator(&self) -> Mat {
        let mut l = Mat::zeros(self.d, self.d);
        for (&(p, q), &theta) in self.planes.iter().zip(&self.thetas) {
            // Rotating p toward q: L[q][p] = theta, L[p][q] = -theta.
            l[(q, p)] += theta;
            l[(p, q)] -= theta;
        }
        match &self.basis {
            Some(b) => b.matmul(&l).matmul(&b.transpose()),
            None => l,
        }
    }
}

/// The RoPE frequency ladder `theta_i = base^(-2i/d)`, `i = 0..d/2`.
pub fn log_uniform_spectrum(d: usize, base: f64) -> Vec<f64> {
    (0..d / 2)
        .map(|i| base.powf(-((2 * i) as f64) / d as f64))
        .collect()
}

/// Apply the map at position `n`: rotate each (basis-transformed) plane by
/// `n * theta_i`, i.e. compute `B blockrot(n) B^T x`.
pub fn apply_ms(map: &MultiSubspaceMap, n: f64, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != map.d {
        return Err(Error::shape(format!(
            "vector length {} vs map dimension {}",
            x.len(),
            map.d
        )));
    }
    if !all_finite(x) || !n.is_finite() {
        return Err(Error::invalid("apply_ms needs finite inputs"));
    }
    let mut y = match &map.basis {
        Some(b) => b.transpose().matvec(x),
        None => x.to_vec(),
    };
    for (&(p, q), &theta) in map.planes.iter().zip(&map.thetas) {
        let angle = n * theta;
        let (sin, cos) = angle.sin_cos();
        let xp = y[p];
        let xq = y[q];
        y[p] = xp * cos - xq * sin;
        y[q] = xp * sin + xq * cos;
    }
    match &map.basis {
        Some(b) => Ok(b.matvec(&y)),
        None => Ok(y),
    }
}

/// Canonical RoPE: paired-coordinate rotations with the log-uniform spectrum.
/// This is the independent reference that [`apply_ms`] is checked against.
pub fn rope_reference(d: usize, base: f64, n: f64, x: &[f64]) -> Result<Vec<f64>> {
    if d % 2 != 0 {
        return Err(Error::invalid("rope_reference needs even d"));
    }
    if x.len() != d {
        return Err(Error::shape(format!(
            "vector length {} vs d={}",
            x.len(),
            d
        )));
    }
    if !(base.is_finite() && base > 1.0) {
        return Err(Error::invalid(format!("base must exceed 1, got {base}")));
    }
    let mut y = x.to_vec();
    for i in 0..d / 2 {
        let theta = base.powf(-((2 * i) as f64) / d as f64);
        let angle = n * theta;
        let (sin, cos) = angle.sin_cos();
        let xp = y[2 * i];
        let xq = y[2 * i + 1];
        y[2 * i] = xp * cos - xq * sin;
        y[2 * i + 1] = xp * sin + xq * cos;
    }
    Ok(y)
}

// ── 2D / 3D coordinate extensions ───────────────────────────────────────────

fn check_disjoint(maps: &[&MultiSubspaceMap]) -> Result<()> {
    let d = maps[0].d;
    if maps.iter().any(|m| m.d != d) {
        return Err(Error::shape("coordinate maps must share a dimension"));
    }
    for w in 1..maps.len() {
        if !maps[0].same_basis(maps[w]) {
            return Err(Error::invalid(
                "coordinate maps must share the same basis (or none)",
            ));
        }
    }
    let mut seen = vec![false; d];
    for m in maps {
        for &(p, q) in &m.planes {
            if seen[p] || seen[q] {
                return Err(Error::invalid(format!(
                    "plane ({p}, {q}) is used by more than one axis; \
                     non-commuting coordinate actions are not supported"
                )));
            }
            seen[p] = true;
            seen[q] = true;
        }
    }
    Ok(())
}

/// Separable 2D encoding: `exp(u L_x) exp(v L_y) x` with disjoint plane sets
/// (the factors commute, so the application order is irrelevant).
pub fn apply_2d(
    gx: &MultiSubspaceMap,
    gy: &MultiSubspaceMap,
    u: f64,
    v: f64,
    x: &[f64],
) -> Result<Vec<f64>> {
    check_disjoint(&[gx, gy])?;
    apply_ms(gx, u, &apply_ms(gy, v, x)?)
}

/// Separable 3D encoding over three disjoint plane sets.
pub fn apply_3d(
    gx: &MultiSubspaceMap,
    gy: &MultiSubspaceMap,
    gz: &MultiSubspaceMap,
    u: f64,
    v: f64,
    w: f64,
    x: &[f64],
) -> Result<Vec<f64>> {
    check_disjoint(&[gx, gy, gz])?;
    apply_ms(gx, u, &apply_ms(gy, v, &apply_ms(gz, w, x)?)?)
}

// ── Thin compression ────────────────────────────────────────────────────────

/// A non-commuting generator in compressed form: `L = E L_r E^T` with
/// orthonormal `E`. The ambient lift preserves the spectrum, so everything
/// spectral reduces to the mode angles of the small skew block.
#[derive(Debug, Clone)]
pub struct ThinCompression {
    e: Mat,
    l_r: Mat,
    mode_angles: Vec<f64>,
    zero_modes: usize,
}

impl ThinCompression {
    pub fn new(e: Mat, l_r: Mat) -> Result<Self> {
        let r = l_r.rows();
        if !l_r.is_square() {
            return Err(Error::shape("compressed generator must be square"));
        }
        if e.cols() != r || e.rows() < r {
            return Err(Error::shape(format!(
                "embedding is {}x{}, generator is {r}x{r}",
                e.rows(),
                e.cols()
            )));
        }
        if e.orthogonality_defect() > 1e-8 {
            return Err(Error::invalid("embedding columns are not orthonormal"));
        }
        let tol = 1e-12 * l_r.max_abs().max(1.0);
        if l_r.skew_defect() > tol {
            return Err(Error::invalid("compressed generator is not skew"));
        }

        // Mode angles are the positive imaginary parts of the spectrum of
        // L_r; anything left over is a zero mode (always present for odd r).
        let eigs = linalg::eigenvalues(&l_r)?;
        let scale = l_r.max_abs().max(1.0);
        let mut mode_angles: Vec<f64> = eigs
            .iter()
            .filter(|e| e.im > 1e-10 * scale)
            .map(|e| e.im)
            .collect();
        mode_angles.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let zero_modes = r - 2 * mode_angles.len();
        Ok(Self {
            e,
            l_r,
            mode_angles,
            zero_modes,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.e.rows()
    }

    pub fn compressed_dim(&self) -> usize {
        self.l_r.rows()
    }

    /// `{theta_t}`: rotation speeds of the compressed generator.
    pub fn mode_angles(&self) -> &[f64] {
        &self.mode_angles
    }

    /// Number of zero modes inside the compressed block (nonzero when `r` is
    /// odd or `L_r` is rank-deficient).
    pub fn zero_modes(&self) -> usize {
        self.zero_modes
    }

    pub fn embedding(&self) -> &Mat {
        &self.e
    }

    pub fn compressed_generator(&self) -> &Mat {
        &self.l_r
    }

    /// Dense ambient generator `E L_r E^T` (oracle path).
    pub fn dense_generator(&self) -> Mat {
        self.e.matmul(&self.l_r).matmul(&self.e.transpose())
    }
}

/// Spectrum of `exp(n E L_r E^T)`: `{e^{+-i n theta_t}}` from the compressed
/// modes plus ones for every flat direction, in canonical order.
pub fn noncommuting_spectrum(tc: &ThinCompression, n: f64) -> Vec<Complex64> {
    let mut eigs = Vec::with_capacity(tc.ambient_dim());
    for &theta in &tc.mode_angles {
        let phase = n * theta;
        eigs.push(Complex64::new(phase.cos(), phase.sin()));
        eigs.push(Complex64::new(phase.cos(), -phase.sin()));
    }
    let flat = tc.ambient_dim() - 2 * tc.mode_angles.len();
    for _ in 0..flat {
        eigs.push(Complex64::new(1.0, 0.0));
    }
    linalg::sort_canonical(&mut eigs);
    eigs
}

// ── Serialization ───────────────────────────────────────────────────────────

/// JSON-facing description of a map: `{d, planes|basis, thetas, base}`.
/// Either `thetas` or `base` supplies the spectrum; `planes` defaults to the
/// canonical pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapConfig {
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planes: Option<Vec<(usize, usize)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thetas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub head_id: u32,
}

impl MapConfig {
    pub fn build(&self) -> Result<MultiSubspaceMap> {
        let thetas = match (&self.thetas, self.base) {
            (Some(t), _) => t.clone(),
            (None, Some(base)) => {
                if self.d % 2 != 0 {
                    return Err(Error::invalid("log-uniform spectrum needs even d"));
                }
                log_uniform_spectrum(self.d, base)
            }
            (None, None) => {
                return Err(Error::invalid("map config needs `thetas` or `base`"));
            }
        };
        let map = match &self.planes {
            Some(p) => MultiSubspaceMap::with_planes(self.d, p.clone(), thetas)?,
            None => MultiSubspaceMap::canonical(self.d, thetas)?,
        };
        let map = match &self.basis {
            Some(rows) => map.with_basis(Mat::from_rows(rows)?)?,
            None => map,
        };
        Ok(map.with_head_id(self.head_id))
    }
}

impl MultiSubspaceMap {
    pub fn to_config(&self) -> MapConfig {
        MapConfig {
            d: self.d,
            planes: Some(self.planes.clone()),
            thetas: Some(self.thetas.clone()),
            base: None,
            basis: self
                .basis
                .as_ref()
                .map(|b| (0..b.rows()).map(|i| b.row(i).to_vec()).collect()),
            head_id: self.head_id,
        }
    }
}

// ── Tests ───────────────────────────────────────────────────────────────────
