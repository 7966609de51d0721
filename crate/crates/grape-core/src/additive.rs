//! Additive logit biases as unipotent group actions.
//!
//! Queries and keys are lifted into a homogeneous space, either `[x; 1]` in
//! d+1 dimensions or the asymmetric `q -> [q; 1; 0]`, `k -> [k; 0; 1]` pair
//! in d+2. A rank-1 nilpotent generator `A` (`A^2 = 0`) then acts through
//! `G(n) = I + n w A`, and scoring with the paired inverse-transpose yields a
//! bias that is exactly linear in the offset `j - i` while every lift stays
//! unipotent (all eigenvalues one, determinant one).
//!
//! The three generator kinds cover the additive family: a head slope
//! (exact ALiBi), content gates on query and key (softplus slopes), and a
//! feature-shift vector in the d+1 lift. Forget-gate biases live in
//! [`ForgetGates`] and reduce to ALiBi for constant gates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::math::{all_finite, dot, softplus, KahanSum};
use crate::multiplicative::{apply_ms, MultiSubspaceMap};

// ── Lift definition ─────────────────────────────────────────────────────────

/// Which rank-1 nilpotent generator a lift uses.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorKind {
    /// Translation of features by `u_shift` in the d+1 lift.
    ShiftVector { u_shift: Vec<f64> },
    /// Content-independent head slope `beta >= 0` in the d+2 lift.
    Alibi { beta: f64 },
    /// Query/key-gated slopes: `softplus(v.q/sqrt(d)) + softplus(u.k/sqrt(d))`
    /// in the d+2 lift.
    Gated { v: Vec<f64>, u: Vec<f64> },
}

/// A unipotent lift: generator kind plus the scale `omega`.
///
/// Serializes as `{kind, d, omega, beta|v,u|u_shift}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "LiftConfig", into = "LiftConfig")]
pub struct UnipotentLift {
    d: usize,
    kind: GeneratorKind,
    omega: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct LiftConfig {
    d: usize,
    omega: f64,
    #[serde(flatten)]
    kind: GeneratorKind,
}

impl TryFrom<LiftConfig> for UnipotentLift {
    type Error = Error;

    fn try_from(cfg: LiftConfig) -> Result<Self> {
        UnipotentLift::new(cfg.d, cfg.kind, cfg.omega)
    }
}

impl From<UnipotentLift> for LiftConfig {
    fn from(l: UnipotentLift) -> Self {
        LiftConfig {
            d: l.d,
            omega: l.omega,
            kind: l.kind,
        }
    }
}

impl UnipotentLift {
    pub fn new(d: usize, kind: GeneratorKind, omega: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("lift needs d >= 1"));
        }
        if !omega.is_finite() {
            return Err(Error::invalid("omega must be finite"));
        }
        match &kind {
            GeneratorKind::ShiftVector { u_shift } => {
                if u_shift.len() != d || !all_finite(u_shift) {
                    return Err(Error::invalid("shift vector must be finite with length d"));
                }
            }
            GeneratorKind::Alibi { beta } => {
                if !(beta.is_finite() && *beta >= 0.0) {
                    return Err(Error::invalid(format!(
                        "alibi slope must be non-negative, got {beta}"
                    )));
                }
            }
            GeneratorKind::Gated { v, u } => {
                if v.len() != d || u.len() != d || !all_finite(v) || !all_finite(u) {
                    return Err(Error::invalid("gate vectors must be finite with length d"));
                }
            }
        }
        Ok(Self { d, kind, omega })
    }

    /// Exact ALiBi lift with slope `beta`. The slope carries the whole scale,
    /// so `omega` is fixed at one.
    pub fn alibi(d: usize, beta: f64) -> Result<Self> {
        Self::new(d, GeneratorKind::Alibi { beta }, 1.0)
    }

    pub fn gated(d: usize, v: Vec<f64>, u: Vec<f64>, omega: f64) -> Result<Self> {
        Self::new(d, GeneratorKind::Gated { v, u }, omega)
    }

    pub fn shift_vector(d: usize, u_shift: Vec<f64>, omega: f64) -> Result<Self> {
        Self::new(d, GeneratorKind::ShiftVector { u_shift }, omega)
    }

    pub fn base_dim(&self) -> usize {
        self.d
    }

    /// d+1 for the shift lift, d+2 for the alibi/gated lifts.
    pub fn lift_dim(&self) -> usize {
        match self.kind {
            GeneratorKind::ShiftVector { .. } => self.d + 1,
            _ => self.d + 2,
        }
    }

    pub fn kind(&self) -> &GeneratorKind {
        &self.kind
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// The structural generator as a dense matrix (oracle path only). For the
    /// gated kind this is the nilpotent basis `A0 = e_{d+2} e_{d+1}^T`; the
    /// content gates scale it per query/key pair at scoring time.
    pub fn generator_matrix(&self) -> Mat {
        let ld = self.lift_dim();
        let mut a = Mat::zeros(ld, ld);
        match &self.kind {
            GeneratorKind::ShiftVector { u_shift } => {
                for (i, &ui) in u_shift.iter().enumerate() {
                    a[(i, self.d)] = ui;
                }
            }
            GeneratorKind::Alibi { beta } => {
                a[(self.d + 1, self.d)] = -beta;
            }
            GeneratorKind::Gated { .. } => {
                a[(self.d + 1, self.d)] = 1.0;
            }
        }
        a
    }

    /// Spectral norm of the structural generator (closed form per kind).
    pub fn generator_norm(&self) -> f64 {
        match &self.kind {
            GeneratorKind::ShiftVector { u_shift } => crate::math::norm(u_shift),
            GeneratorKind::Alibi { beta } => *beta,
            GeneratorKind::Gated { .. } => 1.0,
        }
    }

    /// Lift a query: `[q; 1; 0]` in d+2, `[q; 1]` in d+1.
    pub fn lift_q(&self, q: &[f64]) -> Result<Vec<f64>> {
        self.check_vec(q)?;
        let mut out = q.to_vec();
        match self.kind {
            GeneratorKind::ShiftVector { .. } => out.push(1.0),
            _ => {
                out.push(1.0);
                out.push(0.0);
            }
        }
        Ok(out)
    }

    /// Lift a key: `[k; 0; 1]` in d+2, `[k; 1]` in d+1.
    pub fn lift_k(&self, k: &[f64]) -> Result<Vec<f64>> {
        self.check_vec(k)?;
        let mut out = k.to_vec();
        match self.kind {
            GeneratorKind::ShiftVector { .. } => out.push(1.0),
            _ => {
                out.push(0.0);
                out.push(1.0);
            }
        }
        Ok(out)
    }

    fn check_vec(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.d {
            return Err(Error::shape(format!(
                "vector length {} vs lift base dimension {}",
                x.len(),
                self.d
            )));
        }
        if !all_finite(x) {
            return Err(Error::invalid("lift input must be finite"));
        }
        Ok(())
    }
}

// ── Gates ───────────────────────────────────────────────────────────────────

/// Non-negative content gates for the gated lift.
#[derive(Debug, Clone, Copy)]
pub struct GateValues {
    pub lambda_q: f64,
    pub lambda_k: f64,
}

impl GateValues {
    /// `lambda_q = softplus(v.q / sqrt(d))`, `lambda_k = softplus(u.k / sqrt(d))`.
    pub fn from_qk(v: &[f64], u: &[f64], q: &[f64], k: &[f64]) -> Self {
        let sd = (q.len() as f64).sqrt();
        Self {
            lambda_q: softplus(dot(v, q) / sd),
            lambda_k: softplus(dot(u, k) / sd),
        }
    }

    /// Combined decay rate `Lambda = lambda_q + lambda_k`.
    pub fn total(&self) -> f64 {
        self.lambda_q + self.lambda_k
    }
}

// ── Scoring ─────────────────────────────────────────────────────────────────

/// The bias the lift adds on top of `q.k` at integer positions `(i, j)`.
pub fn additive_bias(lift: &UnipotentLift, q: &[f64], k: &[f64], i: i64, j: i64) -> Result<f64> {
    additive_bias_at(lift, q, k, (j - i) as f64)
}

/// Bias at a real-valued offset `m = j - i`.
///
/// Closed forms, never materializing the lift:
/// * alibi: `m * omega * beta`
/// * gated: `m * omega * (lambda_q + lambda_k)`
/// * shift: `1 - m * omega * <u_shift, k>` (the constant one comes from the
///   symmetric `[x; 1]` lift)
pub fn additive_bias_at(lift: &UnipotentLift, q: &[f64], k: &[f64], m: f64) -> Result<f64> {
    lift.check_vec(q)?;
    lift.check_vec(k)?;
    Ok(match &lift.kind {
        GeneratorKind::Alibi { beta } => m * lift.omega * beta,
        GeneratorKind::Gated { v, u } => {
            let gates = GateValues::from_qk(v, u, q, k);
            m * lift.omega * gates.total()
        }
        GeneratorKind::ShiftVector { u_shift } => 1.0 - m * lift.omega * dot(u_shift, k),
    })
}

/// Full additive score `q_hat^T G(j - i)^{-T} k_hat = q.k + bias`.
///
/// Total in `(i, j)`; causal use passes `j <= i` so the bias is a penalty.
pub fn additive_score(lift: &UnipotentLift, q: &[f64], k: &[f64], i: i64, j: i64) -> Result<f64> {
    Ok(dot(q, k) + additive_bias(lift, q, k, i, j)?)
}

/// Score at a real-valued offset.
pub fn additive_score_at(lift: &UnipotentLift, q: &[f64], k: &[f64], m: f64) -> Result<f64> {
    Ok(dot(q, k) + additive_bias_at(lift, q, k, m)?)
}

/// Dense-route score through the assembled lifted matrices (oracle path):
/// lifts `q` and `k`, builds `G(m)^{-T}` explicitly, and forms the bilinear
/// form. Must agree with [`additive_score`] to rounding.
pub fn additive_score_dense(
    lift: &UnipotentLift,
    q: &[f64],
    k: &[f64],
    i: i64,
    j: i64,
) -> Result<f64> {
    let m = (j - i) as f64;
    let a = match &lift.kind {
        GeneratorKind::Gated { v, u } => {
            let gates = GateValues::from_qk(v, u, q, k);
            lift.generator_matrix().scale(-gates.total())
        }
        _ => lift.generator_matrix(),
    };
    // G(m)^{-1} = I - m w A by nilpotency; transpose and apply.
    let g_inv_t = Mat::identity(lift.lift_dim())
        .sub(&a.scale(m * lift.omega))
        .transpose();
    let qh = lift.lift_q(q)?;
    let kh = lift.lift_k(k)?;
    Ok(dot(&qh, &g_inv_t.matvec(&kh)))
}

/// `H(s) = I + s A` as a dense matrix (oracle path). Satisfies
/// `H(s)^{-1} = I - s A`, `det H = 1`, and the one-parameter law
/// `H(s1) H(s2) = H(s1 + s2)`.
pub fn unipotent_matrix(lift: &UnipotentLift, s: f64) -> Mat {
    let ld = lift.lift_dim();
    Mat::identity(ld).add(&lift.generator_matrix().scale(s))
}

// ── Forget gates ────────────────────────────────────────────────────────────

/// Per-token forget gates `f_t` in (0, 1] with compensated prefix sums of
/// `log f_t`, giving O(1) lookups of the cumulative decay between positions.
#[derive(Debug, Clone)]
pub struct ForgetGates {
    f: Vec<f64>,
    /// `prefix[t] = sum_{l < t} log f_l`; length `f.len() + 1`, non-increasing.
    prefix: Vec<f64>,
    /// Live accumulator state, so incremental pushes reproduce batch
    /// construction bit for bit.
    acc: KahanSum,
}

impl ForgetGates {
    pub fn new(f: Vec<f64>) -> Result<Self> {
        let mut gates = Self {
            f: Vec::with_capacity(f.len()),
            prefix: vec![0.0],
            acc: KahanSum::new(),
        };
        for g in f {
            gates.push(g)?;
        }
        Ok(gates)
    }

    /// Incrementally extend the sequence with one gate.
    pub fn push(&mut self, gate: f64) -> Result<()> {
        if !(gate.is_finite() && gate > 0.0 && gate <= 1.0) {
            return Err(Error::invalid("forget gates must lie in (0, 1]"));
        }
        self.f.push(gate);
        self.acc.add(gate.ln());
        self.prefix.push(self.acc.value());
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    pub fn gates(&self) -> &[f64] {
        &self.f
    }

    /// `prefix[t] = sum_{l < t} log f_l`.
    pub fn prefix(&self) -> &[f64] {
        &self.prefix
    }
}

/// Cumulative log-decay `sum_{l=j+1}^{i} log f_l <= 0`, via prefix-sum
/// subtraction. Constant gates `f = e^{-beta}` make this exact ALiBi,
/// `-beta (i - j)`.
pub fn fox_bias(gates: &ForgetGates, i: usize, j: usize) -> Result<f64> {
    if j > i || i >= gates.f.len() {
        return Err(Error::IndexOutOfRange(format!(
            "need j <= i < {}, got (i, j) = ({i}, {j})",
            gates.f.len()
        )));
    }
    Ok(gates.prefix[i + 1] - gates.prefix[j + 1])
}

// ── Joint multiplicative + additive action ──────────────────────────────────

/// Result of the joint GL(d+2) score: the score itself plus the constant
/// offset contributed by the lift coordinates (zero for the asymmetric lift,
/// reported for transparency).
#[derive(Debug, Clone, Copy)]
pub struct JointScore {
    pub score: f64,
    pub constant: f64,
}

/// Score of the joint block action `diag(exp(m L), unipotent gate block)` in
/// GL(d+2): `q^T exp(m L) k + m * omega * Lambda`. Equals the multiplicative
/// bilinear score plus the gated additive bias.
pub fn joint_score(
    map: &MultiSubspaceMap,
    gates: GateValues,
    omega: f64,
    q: &[f64],
    k: &[f64],
    i: i64,
    j: i64,
) -> Result<JointScore> {
    let m = (j - i) as f64;
    let rotated = apply_ms(map, m, k)?;
    if q.len() != rotated.len() {
        return Err(Error::shape("query length does not match map dimension"));
    }
    let score = dot(q, &rotated) + m * omega * gates.total();
    Ok(JointScore {
        score,
        constant: 0.0,
    })
}

/// Dense-route joint score via the assembled GL(d+2) block matrix with the
/// paired inverse-transpose (oracle path).
pub fn joint_score_dense(
    map: &MultiSubspaceMap,
    gates: GateValues,
    omega: f64,
    q: &[f64],
    k: &[f64],
    i: i64,
    j: i64,
) -> Result<f64> {
    let d = map.dim();
    let m = (j - i) as f64;
    // G_joint(m) = [exp(m L), 0; 0, T(m)] with T(m) = I - m w Lambda A0.
    let rot = crate::rank2::dense_exp_oracle(&map.dense_generator(), m)?;
    let mut g = Mat::zeros(d + 2, d + 2);
    for r in 0..d {
        for c in 0..d {
            g[(r, c)] = rot[(r, c)];
        }
    }
    g[(d, d)] = 1.0;
    g[(d + 1, d + 1)] = 1.0;
    g[(d + 1, d)] = -m * omega * gates.total();

    // Invert: rotation block transposes, unipotent tail flips sign.
    let mut g_inv = Mat::zeros(d + 2, d + 2);
    for r in 0..d {
        for c in 0..d {
            g_inv[(r, c)] = rot[(c, r)];
        }
    }
    g_inv[(d, d)] = 1.0;
    g_inv[(d + 1, d + 1)] = 1.0;
    g_inv[(d + 1, d)] = m * omega * gates.total();
    debug_assert!(g.matmul(&g_inv).max_abs_diff(&Mat::identity(d + 2)) < 1e-9);

    let mut qh = q.to_vec();
    qh.push(1.0);
    qh.push(0.0);
    let mut kh = k.to_vec();
    kh.push(0.0);
    kh.push(1.0);
    Ok(dot(&qh, &g_inv.transpose().matvec(&kh)))
}

// ── Tests ───────────────────────────────────────────────────────────────────
