//! Spectral diagnostics: closed-form eigenvalue and singular-value
//! structure for every operator family in the crate, cross-checkable
//! against the dense eigensolver and SVD in [`crate::linalg`].
//!
//! The closed forms: a rank-2 skew generator has spectrum `{+-i s, 0...}`
//! and its exponential `{e^{+-i n w s}, 1...}` with all singular values one;
//! a rank-1 unipotent lift `I + s A` has all eigenvalues one, determinant
//! one, and exactly two nontrivial singular values
//! `sigma_+- = sqrt(1 + s^2/2 +- |s| sqrt(1 + s^2/4))` whose product is one;
//! a product of symmetric rank-1 factors `I - beta w w^T` is nonexpansive
//! with determinant `prod (1 - beta)`.

use num_complex::Complex64;
use serde::Serialize;

use crate::additive::UnipotentLift;
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::math::norm;
use crate::rank2::PlaneGenerator;

// ── Report type ─────────────────────────────────────────────────────────────

/// What a report describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorKind {
    Rank2Generator,
    Rank2Exponential,
    UnipotentLift,
    PathProduct,
}

impl OperatorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            OperatorKind::Rank2Generator => "rank2-generator",
            OperatorKind::Rank2Exponential => "rank2-exponential",
            OperatorKind::UnipotentLift => "unipotent-lift",
            OperatorKind::PathProduct => "path-product",
        }
    }
}

/// Eigen/singular-value summary of one operator. Singular values are sorted
/// descending; eigenvalues are in canonical order (conjugate pairs adjacent,
/// positive imaginary part first). A singular condition number serializes as
/// JSON null.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub operator_kind: OperatorKind,
    pub eigenvalues: Vec<Complex64>,
    pub singular_values: Vec<f64>,
    pub determinant: f64,
    pub condition_number: f64,
    pub notes: String,
}

impl SpectrumReport {
    /// Internal consistency: ordering and |det| = product of singular values.
    pub fn validate(&self) -> Result<()> {
        for w in self.singular_values.windows(2) {
            if w[1] > w[0] {
                return Err(Error::invalid("singular values not sorted descending"));
            }
        }
        let prod: f64 = self.singular_values.iter().product();
        if (prod - self.determinant.abs()).abs() > 1e-8 * prod.max(1.0) {
            return Err(Error::invalid(format!(
                "|det| = {} disagrees with sigma product {}",
                self.determinant.abs(),
                prod
            )));
        }
        Ok(())
    }
}

// ── Rank-2 reports ──────────────────────────────────────────────────────────

/// Closed-form spectrum of the generator `L = a b^T - b a^T`:
/// `{+-i s} ∪ {0}^{d-2}`, singular values `{s, s, 0...}`.
pub fn rank2_generator_spectrum(g: &PlaneGenerator) -> SpectrumReport {
    let d = g.dim();
    let s = g.s();
    let mut eigenvalues = vec![Complex64::new(0.0, s), Complex64::new(0.0, -s)];
    eigenvalues.extend(std::iter::repeat(Complex64::new(0.0, 0.0)).take(d - 2));
    linalg::sort_canonical(&mut eigenvalues);
    let mut singular_values = vec![s, s];
    singular_values.extend(std::iter::repeat(0.0).take(d - 2));
    let determinant = if d == 2 { s * s } else { 0.0 };
    let condition_number = if d == 2 { 1.0 } else { f64::INFINITY };
    SpectrumReport {
        operator_kind: OperatorKind::Rank2Generator,
        eigenvalues,
        singular_values,
        determinant,
        condition_number,
        notes: format!("plane speed s = {s}"),
    }
}

/// Closed-form spectrum of `exp(n w L)`: `{e^{+-i n w s}} ∪ {1}^{d-2}`, an
/// isometry (all singular values one, determinant one).
pub fn rank2_spectrum(g: &PlaneGenerator, n: f64) -> SpectrumReport {
    let d = g.dim();
    let phase = n * g.omega() * g.s();
    let mut eigenvalues = vec![
        Complex64::new(phase.cos(), phase.sin()),
        Complex64::new(phase.cos(), -phase.sin()),
    ];
    eigenvalues.extend(std::iter::repeat(Complex64::new(1.0, 0.0)).take(d - 2));
    linalg::sort_canonical(&mut eigenvalues);
    SpectrumReport {
        operator_kind: OperatorKind::Rank2Exponential,
        eigenvalues,
        singular_values: vec![1.0; d],
        determinant: 1.0,
        condition_number: 1.0,
        notes: format!("rotation angle n*omega*s = {phase}"),
    }
}

// ── Unipotent report ────────────────────────────────────────────────────────

/// Closed-form singular pair of a canonical rank-1 unipotent `I + s E`.
pub fn unipotent_sigma_pair(s: f64) -> (f64, f64) {
    let half = s * s / 2.0;
    let root = s.abs() * (1.0 + s * s / 4.0).sqrt();
    ((1.0 + half + root).sqrt(), (1.0 + half - root).sqrt())
}

/// Spectrum of `H(s) = I + s A` for a lift: all eigenvalues one, determinant
/// one, and one singular pair `sigma_+- ` at the effective coefficient
/// `s * |A|_2` (the rest are one). The condition number is `sigma_+^2`.
pub fn unipotent_report(lift: &UnipotentLift, s: f64) -> SpectrumReport {
    let ld = lift.lift_dim();
    let s_eff = s * lift.generator_norm();
    let (hi, lo) = unipotent_sigma_pair(s_eff);
    let mut singular_values = vec![1.0; ld];
    singular_values[0] = hi;
    singular_values[ld - 1] = lo;
    singular_values.sort_by(|a, b| b.partial_cmp(a).unwrap());
    SpectrumReport {
        operator_kind: OperatorKind::UnipotentLift,
        eigenvalues: vec![Complex64::new(1.0, 0.0); ld],
        singular_values,
        determinant: 1.0,
        condition_number: hi * hi,
        notes: format!("effective coefficient s_eff = {s_eff}; sigma_+ * sigma_- = 1"),
    }
}

// ── PaTH-style products ─────────────────────────────────────────────────────

/// A sequence of symmetric rank-1 factors `H_t = I - beta_t w_t w_t^T` with
/// unit `w_t` and `beta_t` in `[0, 2]` (strict contraction happens in the
/// open interval; the endpoints are the orthogonal cases).
#[derive(Debug, Clone)]
pub struct PathFactorSeq {
    betas: Vec<f64>,
    ws: Vec<Vec<f64>>,
}

impl PathFactorSeq {
    pub fn new(betas: Vec<f64>, ws: Vec<Vec<f64>>) -> Result<Self> {
        if betas.len() != ws.len() {
            return Err(Error::shape("one direction per beta"));
        }
        if betas
            .iter()
            .any(|b| !(b.is_finite() && (0.0..=2.0).contains(b)))
        {
            return Err(Error::invalid("betas must lie in [0, 2]"));
        }
        if ws.is_empty() {
            return Err(Error::invalid("need at least one factor"));
        }
        let d = ws[0].len();
        for w in &ws {
            if w.len() != d {
                return Err(Error::shape("direction vectors must share a dimension"));
            }
            if (norm(w) - 1.0).abs() > 1e-10 {
                return Err(Error::invalid("direction vectors must be unit norm"));
            }
        }
        Ok(Self { betas, ws })
    }

    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.ws[0].len()
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// One factor `I - beta w w^T`.
    pub fn factor(&self, t: usize) -> Mat {
        let d = self.dim();
        let mut h = Mat::identity(d);
        h.add_outer(-self.betas[t], &self.ws[t], &self.ws[t]);
        h
    }

    /// The ordered product of all factors.
    pub fn product(&self) -> Mat {
        let mut p = Mat::identity(self.dim());
        for t in 0..self.len() {
            p = p.matmul(&self.factor(t));
        }
        p
    }

    /// Closed-form determinant `prod (1 - beta_t)`.
    pub fn det_closed_form(&self) -> f64 {
        self.betas.iter().map(|b| 1.0 - b).product()
    }
}

/// Dense report on the factor product, with the contraction guarantees
/// enforced: `sigma_max <= 1 + 1e-10`,
/// `sigma_min >= prod |1 - beta| - 1e-10`, and the measured determinant
/// within 1e-10 of the closed form.
pub fn path_product_report(seq: &PathFactorSeq) -> Result<SpectrumReport> {
    let p = seq.product();
    let singular_values = linalg::singular_values(&p)?;
    let mut eigenvalues = linalg::eigenvalues(&p)?;
    linalg::sort_canonical(&mut eigenvalues);
    let det = p.det();
    let det_closed = seq.det_closed_form();

    let sigma_max = singular_values[0];
    let sigma_min = *singular_values.last().unwrap();
    if sigma_max > 1.0 + 1e-10 {
        return Err(Error::invalid(format!(
            "path product expanded: sigma_max = {sigma_max}"
        )));
    }
    let lower: f64 = seq.betas.iter().map(|b| (1.0 - b).abs()).product();
    if sigma_min < lower - 1e-10 {
        return Err(Error::invalid(format!(
            "sigma_min = {sigma_min} below the factor bound {lower}"
        )));
    }
    if (det - det_closed).abs() > 1e-10 * det_closed.abs().max(1.0) {
        return Err(Error::invalid(format!(
            "determinant {det} deviates from closed form {det_closed}"
        )));
    }

    let condition_number = sigma_max / sigma_min;
    Ok(SpectrumReport {
        operator_kind: OperatorKind::PathProduct,
        eigenvalues,
        singular_values,
        determinant: det,
        condition_number,
        notes: format!("closed-form det = {det_closed}; sigma_min factor bound = {lower}"),
    })
}

// ── Dictionary closure ──────────────────────────────────────────────────────

/// Outcome of the nilpotent-dictionary check.
#[derive(Debug, Clone)]
pub struct DictionaryClosure {
    pub holds: bool,
    /// `(r, s, max_abs)` for the first nonvanishing pairwise product, when
    /// the combined generator fails to square to zero.
    pub witness: Option<(usize, usize, f64)>,
}

/// Check that the weighted sum of index-2 nilpotents is itself index-2
/// nilpotent. Exact when all pairwise products vanish; otherwise reports the
/// offending pair.
pub fn dictionary_closure_check(generators: &[Mat], thetas: &[f64]) -> Result<DictionaryClosure> {
    if generators.len() != thetas.len() {
        return Err(Error::shape("one weight per generator"));
    }
    if generators.is_empty() {
        return Err(Error::invalid("need at least one generator"));
    }
    let d = generators[0].rows();
    for a in generators {
        if !a.is_square() || a.rows() != d {
            return Err(Error::shape("generators must be square with equal dims"));
        }
        if a.matmul(a).max_abs() != 0.0 {
            return Err(Error::invalid(
                "every generator must satisfy A^2 = 0 exactly",
            ));
        }
    }

    let mut sum = Mat::zeros(d, d);
    for (a, &theta) in generators.iter().zip(thetas) {
        sum = sum.add(&a.scale(theta));
    }
    let square = sum.matmul(&sum);
    if square.max_abs() == 0.0 {
        return Ok(DictionaryClosure {
            holds: true,
            witness: None,
        });
    }

    // Find the first pair whose product does not vanish.
    for (r, ar) in generators.iter().enumerate() {
        for (s, as_) in generators.iter().enumerate() {
            let prod = ar.matmul(as_).max_abs();
            if prod != 0.0 {
                return Ok(DictionaryClosure {
                    holds: false,
                    witness: Some((r, s, prod)),
                });
            }
        }
    }
    // Squared sum nonzero but all pairwise products vanish cannot happen.
    Err(Error::invalid("inconsistent dictionary state"))
}

// ── Tests ───────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn assert_spectra_match(closed: &[Complex64], mat: &Mat, tol: f64) {
        let numeric = linalg::eigenvalues(mat).unwrap();
        let dist = linalg::spectrum_distance(closed, &numeric);
        assert!(
            dist < tol,
            "spectra differ by {dist}: {numeric:?} vs {closed:?}"
        );
    }

    // ── rank-2 ────────────────────────────────────────────────────────

    #[test]
    fn rank2_degenerate_all_zero_and_one() {
        let g = PlaneGenerator::new(vec![1.0, 0.0, 0.0], vec![2.0, 0.0, 0.0], 1.0).unwrap();
        let gen = rank2_generator_spectrum(&g);
        assert!(gen.eigenvalues.iter().all(|e| e.norm() == 0.0));
        let exp = rank2_spectrum(&g, 3.0);
        assert!(exp
            .eigenvalues
            .iter()
            .all(|e| (e - Complex64::new(1.0, 0.0)).norm() == 0.0));
    }

    #[test]
    fn rank2_generator_matches_dense_eigensolve() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in [2usize, 4, 8, 16] {
            let a = crate::sampling::random_vector(&mut rng, d);
            let b = crate::sampling::random_vector(&mut rng, d);
            let g = PlaneGenerator::new(a, b, 1.0).unwrap();
            let report = rank2_generator_spectrum(&g);
            report.validate().unwrap();
            assert_spectra_match(&report.eigenvalues, &g.dense_generator(), 1e-7);
        }
    }

    #[test]
    fn rank2_exponential_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = 6;
        let a = crate::sampling::random_vector(&mut rng, d);
        let b = crate::sampling::random_vector(&mut rng, d);
        let g = PlaneGenerator::new(a, b, 0.7).unwrap();
        let n = 2.5;
        let report = rank2_spectrum(&g, n);
        report.validate().unwrap();
        let dense = crate::rank2::dense_exp_oracle(&g.dense_generator(), n * g.omega()).unwrap();
        assert_spectra_match(&report.eigenvalues, &dense, 1e-7);
        // Isometry: every singular value of the dense map is one.
        for sv in linalg::singular_values(&dense).unwrap() {
            assert!((sv - 1.0).abs() < 1e-9);
        }
        assert!((dense.det() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rank2_pi_rotation_contains_minus_ones() {
        let g = PlaneGenerator::new(vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], 1.0).unwrap();
        let report = rank2_spectrum(&g, std::f64::consts::PI);
        let minus_one = Complex64::new(-1.0, 0.0);
        let count = report
            .eigenvalues
            .iter()
            .filter(|e| (*e - minus_one).norm() < 1e-12)
            .count();
        assert_eq!(count, 2);
        assert!(report
            .eigenvalues
            .iter()
            .any(|e| (e - Complex64::new(1.0, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn plane_speed_is_norm_product_times_sine() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let d = 5;
            let a = crate::sampling::random_vector(&mut rng, d);
            let b = crate::sampling::random_vector(&mut rng, d);
            let g = PlaneGenerator::new(a.clone(), b.clone(), 1.0).unwrap();
            let cosphi = crate::math::dot(&a, &b) / (norm(&a) * norm(&b));
            let sinphi = (1.0 - cosphi * cosphi).max(0.0).sqrt();
            let want = norm(&a) * norm(&b) * sinphi;
            assert!((g.s() - want).abs() < 1e-10 * want.max(1.0));
        }
    }

    // ── unipotent ─────────────────────────────────────────────────────

    #[test]
    fn unipotent_zero_is_identity_spectrum() {
        let lift = UnipotentLift::alibi(3, 1.0).unwrap();
        let report = unipotent_report(&lift, 0.0);
        report.validate().unwrap();
        assert!(report
            .singular_values
            .iter()
            .all(|s| (s - 1.0).abs() == 0.0));
    }

    #[test]
    fn unipotent_golden_pair_at_one() {
        let lift = UnipotentLift::alibi(3, 1.0).unwrap();
        let report = unipotent_report(&lift, -1.0); // s_eff = -1 * 1 = effective |1|
        report.validate().unwrap();
        let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
        assert!((report.singular_values[0] - phi).abs() < 1e-6);
        let lo = *report.singular_values.last().unwrap();
        assert!((report.singular_values[0] * lo - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unipotent_closed_form_matches_dense_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for lift in [
            UnipotentLift::alibi(4, 0.8).unwrap(),
            UnipotentLift::shift_vector(4, crate::sampling::random_vector(&mut rng, 4), 1.0)
                .unwrap(),
            UnipotentLift::gated(
                4,
                crate::sampling::random_vector(&mut rng, 4),
                crate::sampling::random_vector(&mut rng, 4),
                1.0,
            )
            .unwrap(),
        ] {
            for s in [-3.0, -1.0, -0.1, 0.5, 2.0] {
                let report = unipotent_report(&lift, s);
                report.validate().unwrap();
                let h = crate::additive::unipotent_matrix(&lift, s);
                let dense_sv = linalg::singular_values(&h).unwrap();
                for (a, b) in report.singular_values.iter().zip(&dense_sv) {
                    assert!(
                        (a - b).abs() < 1e-7,
                        "{:?} s={s}: closed {a} vs dense {b}",
                        lift.kind()
                    );
                }
                let eigs = linalg::eigenvalues(&h).unwrap();
                for e in eigs {
                    assert!((e - Complex64::new(1.0, 0.0)).norm() < 1e-7);
                }
                assert!((h.det() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn unipotent_condition_number_small_s_expansion() {
        // kappa = 1 + |s| + O(s^2): the ratio (kappa - 1)/|s| approaches 1.
        for s in [1e-3, 1e-4] {
            let lift = UnipotentLift::alibi(3, 1.0).unwrap();
            let report = unipotent_report(&lift, s);
            let ratio = (report.condition_number - 1.0) / s;
            assert!(
                (ratio - 1.0).abs() < 2.0 * s,
                "s={s}: (kappa-1)/s = {ratio}"
            );
        }
    }

    // ── path products ─────────────────────────────────────────────────

    fn random_seq(rng: &mut ChaCha8Rng, d: usize, len: usize) -> PathFactorSeq {
        let betas = (0..len).map(|_| rng.gen_range(0.05..1.95)).collect();
        let ws = (0..len)
            .map(|_| crate::sampling::random_unit_vector(rng, d))
            .collect();
        PathFactorSeq::new(betas, ws).unwrap()
    }

    #[test]
    fn path_zero_betas_is_identity() {
        let ws = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]];
        let seq = PathFactorSeq::new(vec![0.0, 0.0], ws).unwrap();
        assert_eq!(seq.product().max_abs_diff(&Mat::identity(3)), 0.0);
        let report = path_product_report(&seq).unwrap();
        report.validate().unwrap();
        assert!((report.determinant - 1.0).abs() < 1e-12);
    }

    #[test]
    fn path_beta_one_exactly_singular() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut seq = random_seq(&mut rng, 4, 6);
        seq.betas[2] = 1.0;
        let report = path_product_report(&seq).unwrap();
        report.validate().unwrap();
        assert!(report.determinant.abs() < 1e-10);
        assert!(report.singular_values.last().unwrap().abs() < 1e-8);
    }

    #[test]
    fn path_report_random_sequences() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10 {
            let d = rng.gen_range(2..8);
            let len = rng.gen_range(1..24);
            let seq = random_seq(&mut rng, d, len);
            let report = path_product_report(&seq).unwrap();
            report.validate().unwrap();
            assert!(report.singular_values[0] <= 1.0 + 1e-10);
        }
    }

    #[test]
    fn path_aligned_directions_give_explicit_eigenvalue() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let d = 5;
        let w = crate::sampling::random_unit_vector(&mut rng, d);
        let betas: Vec<f64> = (0..8).map(|_| rng.gen_range(0.1..1.9)).collect();
        let seq = PathFactorSeq::new(betas.clone(), vec![w; 8]).unwrap();
        let closed: f64 = betas.iter().map(|b| 1.0 - b).product();
        let eigs = linalg::eigenvalues(&seq.product()).unwrap();
        assert!(
            eigs.iter()
                .any(|e| (e.re - closed).abs() < 1e-8 && e.im.abs() < 1e-8),
            "no eigenvalue near {closed}: {eigs:?}"
        );
    }

    #[test]
    fn path_single_factor_spectrum() {
        // Eigenvalues of I - beta w w^T are {1 - beta} ∪ {1}^{d-1}.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let d = 6;
        let beta = 1.37;
        let w = crate::sampling::random_unit_vector(&mut rng, d);
        let seq = PathFactorSeq::new(vec![beta], vec![w]).unwrap();
        let eigs = linalg::eigenvalues(&seq.factor(0)).unwrap();
        let near_one = eigs
            .iter()
            .filter(|e| (*e - Complex64::new(1.0, 0.0)).norm() < 1e-9)
            .count();
        let near_shift = eigs
            .iter()
            .filter(|e| (*e - Complex64::new(1.0 - beta, 0.0)).norm() < 1e-9)
            .count();
        assert_eq!(near_one, d - 1);
        assert_eq!(near_shift, 1);
    }

    #[test]
    fn path_rejects_bad_input() {
        assert!(PathFactorSeq::new(vec![2.5], vec![vec![1.0, 0.0]]).is_err());
        assert!(PathFactorSeq::new(vec![0.5], vec![vec![0.5, 0.0]]).is_err());
        assert!(PathFactorSeq::new(vec![], vec![]).is_err());
    }

    // ── dictionary closure ────────────────────────────────────────────

    fn nilpotent_unit(d: usize, row: usize, col: usize) -> Mat {
        let mut a = Mat::zeros(d, d);
        a[(row, col)] = 1.0;
        a
    }

    #[test]
    fn single_generator_closes() {
        let a = nilpotent_unit(4, 3, 2);
        let res = dictionary_closure_check(&[a], &[0.7]).unwrap();
        assert!(res.holds);
        assert!(res.witness.is_none());
    }

    #[test]
    fn shared_target_disjoint_sources_close() {
        // Both feed row 3 from different columns: products vanish.
        let a = nilpotent_unit(4, 3, 1);
        let b = nilpotent_unit(4, 3, 2);
        let res = dictionary_closure_check(&[a, b], &[0.5, -1.25]).unwrap();
        assert!(res.holds);
    }

    #[test]
    fn chained_generators_fail_with_witness() {
        // a maps e1 -> e2, b maps e2 -> e3: b a != 0.
        let a = nilpotent_unit(4, 1, 0);
        let b = nilpotent_unit(4, 2, 1);
        let res = dictionary_closure_check(&[a, b], &[1.0, 1.0]).unwrap();
        assert!(!res.holds);
        let (r, s, mag) = res.witness.unwrap();
        assert!(mag > 0.0);
        assert!((r, s) == (1, 0) || (r, s) == (0, 1));
    }

    #[test]
    fn non_nilpotent_inputs_rejected() {
        let mut a = Mat::zeros(3, 3);
        a[(0, 1)] = 1.0;
        a[(1, 0)] = 1.0; // a^2 != 0
        assert!(dictionary_closure_check(&[a], &[1.0]).is_err());
    }

    // ── serialization ─────────────────────────────────────────────────

    #[test]
    fn report_serializes_with_complex_pairs() {
        let g = PlaneGenerator::new(vec![1.0, 0.0], vec![0.0, 1.0], 1.0).unwrap();
        let report = rank2_spectrum(&g, 1.0);
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("rank2-exponential"));
        assert!(json.contains("\"im\":") || json.contains("\"im\" :") || json.contains(','));
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(parsed["eigenvalues"].is_array());
    }
}
