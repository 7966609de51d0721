//! Desk-scale multi-head attention harness.
//!
//! Wires any of the positional encoders into causal logits, softmax, and
//! outputs, in two interchangeable ways: a batch pass over full L x H x d
//! tensors and a token-at-a-time streaming pass with an append-only cache.
//! Keys are position-transformed once at arrival and never rewritten; values
//! are never transformed. The two passes perform identical arithmetic, so
//! streaming rows must reproduce batch rows bit for bit — that equivalence
//! is the core contract this module is tested against.
//!
//! Per head, the logit is `scale * <encoded q, encoded k> + bias`, with the
//! bias term unscaled. Positions are real scalars (integer token indices
//! lift exactly); forget-gate and path-integral state is indexed by arrival
//! order, not position.

use serde::{Deserialize, Serialize};

use crate::additive::{additive_bias_at, ForgetGates, GateValues, UnipotentLift};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::math::{dot, sigmoid, softplus};
use crate::multiplicative::{apply_ms, MapConfig, MultiSubspaceMap};
use crate::path_integral::{
    bias_row, probe_from_features, rms_normalize, LinkFunction, PathBiasRow, ProbeStore,
};

use crate::tensor_io::Tensor;

// ── Encoder configuration ───────────────────────────────────────────────────

/// Serializable per-head encoder description.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum EncoderConfig {
    /// Plain scaled dot-product attention.
    None,
    /// Multi-subspace rotation of queries and keys.
    Multiplicative { map: MapConfig },
    /// Additive bias from a unipotent lift.
    Additive { lift: UnipotentLift },
    /// Forget-gate decay with gates derived from keys:
    /// `f_t = sigmoid(w_f . k_t + b_f)`.
    Fox { w_f: Vec<f64>, b_f: f64 },
    /// Path-integral bias; probes are the (optionally projected)
    /// RMS-normalized keys.
    PathIntegral {
        alpha: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        projection: Option<Vec<Vec<f64>>>,
    },
    /// Joint rotation plus gated additive slope.
    Joint {
        map: MapConfig,
        v: Vec<f64>,
        u: Vec<f64>,
        omega: f64,
    },
}

/// A built per-head encoder.
#[derive(Debug, Clone)]
pub enum Encoder {
    None,
    Multiplicative(MultiSubspaceMap),
    Additive(UnipotentLift),
    Fox {
        w_f: Vec<f64>,
        b_f: f64,
    },
    PathIntegral {
        alpha: f64,
        projection: Option<Mat>,
    },
    Joint {
        map: MultiSubspaceMap,
        v: Vec<f64>,
        u: Vec<f64>,
        omega: f64,
    },
}

impl EncoderConfig {
    pub fn build(&self) -> Result<Encoder> {
        Ok(match self {
            EncoderConfig::None => Encoder::None,
            EncoderConfig::Multiplicative { map } => Encoder::Multiplicative(map.build()?),
            EncoderConfig::Additive { lift } => Encoder::Additive(lift.clone()),
            EncoderConfig::Fox { w_f, b_f } => Encoder::Fox {
                w_f: w_f.clone(),
                b_f: *b_f,
            },
            EncoderConfig::PathIntegral { alpha, projection } => Encoder::PathIntegral {
                alpha: *alpha,
                projection: match projection {
                    Some(rows) => Some(Mat::from_rows(rows)?),
                    None => None,
                },
            },
            EncoderConfig::Joint { map, v, u, omega } => Encoder::Joint {
                map: map.build()?,
                v: v.clone(),
                u: u.clone(),
                omega: *omega,
            },
        })
    }
}

impl Encoder {
    fn check_dim(&self, d: usize) -> Result<()> {
        let ok = match self {
            Encoder::None => true,
            Encoder::Multiplicative(map) => map.dim() == d,
            Encoder::Additive(lift) => lift.base_dim() == d,
            Encoder::Fox { w_f, .. } => w_f.len() == d,
            Encoder::PathIntegral { projection, .. } => {
                projection.as_ref().map_or(true, |p| p.cols() == d)
            }
            Encoder::Joint { map, v, u, .. } => map.dim() == d && v.len() == d && u.len() == d,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::shape("encoder dimensions do not match head width"))
        }
    }

    /// Position transform for queries (identity except rotary kinds).
    fn encode_query(&self, q: &[f64], pos: f64) -> Result<Vec<f64>> {
        match self {
            Encoder::Multiplicative(map) | Encoder::Joint { map, .. } => apply_ms(map, pos, q),
            _ => Ok(q.to_vec()),
        }
    }

    /// Position transform for keys; this is what the streaming cache stores.
    fn encode_key(&self, k: &[f64], pos: f64) -> Result<Vec<f64>> {
        match self {
            Encoder::Multiplicative(map) | Encoder::Joint { map, .. } => apply_ms(map, pos, k),
            _ => Ok(k.to_vec()),
        }
    }
}

// ── Attention configuration ─────────────────────────────────────────────────

/// Head layout plus one encoder per head. `scale` is `1/sqrt(d)`.
#[derive(Debug, Clone)]
pub struct AttentionConfig {
    d: usize,
    l_max: usize,
    encoders: Vec<Encoder>,
    qk_rmsnorm: bool,
}

impl AttentionConfig {
    pub fn new(d: usize, l_max: usize, encoders: Vec<Encoder>) -> Result<Self> {
        if d < 2 {
            return Err(Error::invalid("head width must be at least 2"));
        }
        if encoders.is_empty() {
            return Err(Error::invalid("need at least one head"));
        }
        if l_max == 0 {
            return Err(Error::invalid("l_max must be positive"));
        }
        for enc in &encoders {
            enc.check_dim(d)?;
        }
        Ok(Self {
            d,
            l_max,
            encoders,
            qk_rmsnorm: false,
        })
    }

    /// Optional RMS normalization of queries and keys before encoding.
    pub fn with_qk_rmsnorm(mut self, on: bool) -> Self {
        self.qk_rmsnorm = on;
        self
    }

    pub fn heads(&self) -> usize {
        self.encoders.len()
    }

    pub fn head_dim(&self) -> usize {
        self.d
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn scale(&self) -> f64 {
        1.0 / (self.d as f64).sqrt()
    }

    pub fn encoder(&self, h: usize) -> &Encoder {
        &self.encoders[h]
    }

    fn prep(&self, x: &[f64]) -> Vec<f64> {
        if self.qk_rmsnorm {
            rms_normalize(x)
        } else {
            x.to_vec()
        }
    }
}

/// Thread budget for head-parallel sections: `GRAPE_THREADS` caps the
/// available parallelism (1 disables threading).
pub fn thread_budget(heads: usize) -> usize {
    let avail = std::thread::available_parallelism().map_or(1, |n| n.get());
    let cap = std::env::var("GRAPE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(avail);
    cap.clamp(1, heads.max(1))
}

fn par_map_heads<T: Send>(heads: usize, f: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let threads = thread_budget(heads);
    if threads <= 1 || heads <= 1 {
        return (0..heads).map(f).collect();
    }
    let mut out: Vec<Option<T>> = (0..heads).map(|_| None).collect();
    let chunk = heads.div_ceil(threads);
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..heads)
            .collect::<Vec<_>>()
            .chunks(chunk)
            .map(|idx| {
                let idx = idx.to_vec();
                let f = &f;
                scope.spawn(move || idx.into_iter().map(|h| (h, f(h))).collect::<Vec<_>>())
            })
            .collect();
        for handle in handles {
            for (h, val) in handle.join().expect("head worker panicked") {
                out[h] = Some(val);
            }
        }
    });
    out.into_iter().map(|v| v.unwrap()).collect()
}

// ── Per-head sequence state ─────────────────────────────────────────────────

/// Append-only per-head cache: position-transformed keys, values, and the
/// scalar accumulators the active encoder needs. Entries are never rewritten
/// after insertion.
#[derive(Debug, Clone)]
struct HeadCache {
    encoded_keys: Vec<Vec<f64>>,
    raw_keys: Vec<Vec<f64>>,
    values: Vec<Vec<f64>>,
    key_gates: Vec<f64>,
    fox: Option<ForgetGates>,
    probes: Option<ProbeStore>,
}

impl HeadCache {
    fn new(encoder: &Encoder, d: usize) -> Result<Self> {
        let fox = match encoder {
            Encoder::Fox { .. } => Some(ForgetGates::new(Vec::new())?),
            _ => None,
        };
        let probes = match encoder {
            Encoder::PathIntegral { alpha, projection } => {
                let pdim = projection.as_ref().map_or(d, |p| p.rows());
                Some(ProbeStore::new(pdim, *alpha, LinkFunction::LogSigmoid)?)
            }
            _ => None,
        };
        Ok(Self {
            encoded_keys: Vec::new(),
            raw_keys: Vec::new(),
            values: Vec::new(),
            key_gates: Vec::new(),
            fox,
            probes,
        })
    }

    /// Ingest one token's key/value at the given position.
    fn push(&mut self, encoder: &Encoder, k: &[f64], v: &[f64], pos: f64) -> Result<()> {
        self.encoded_keys.push(encoder.encode_key(k, pos)?);
        self.raw_keys.push(k.to_vec());
        self.values.push(v.to_vec());
        match encoder {
            Encoder::Fox { w_f, b_f } => {
                let gate = sigmoid(dot(w_f, k) + b_f);
                self.fox.as_mut().unwrap().push(gate)?;
            }
            Encoder::PathIntegral { projection, .. } => {
                let probe = match projection {
                    Some(p) => probe_from_features(p, k)?,
                    None => rms_normalize(k),
                };
                self.probes.as_mut().unwrap().push_probe(probe)?;
            }
            Encoder::Additive(lift) => {
                if let crate::additive::GeneratorKind::Gated { u, .. } = lift.kind() {
                    let sd = (k.len() as f64).sqrt();
                    self.key_gates.push(softplus(dot(u, k) / sd));
                } else {
                    self.key_gates.push(0.0);
                }
            }
            Encoder::Joint { u, .. } => {
                let sd = (k.len() as f64).sqrt();
                self.key_gates.push(softplus(dot(u, k) / sd));
            }
            _ => self.key_gates.push(0.0),
        }
        Ok(())
    }

    /// Row of logits for query `q` (raw, pre-encode) at arrival index
    /// `t_idx` and position `pos_t`, against all cached keys.
    fn logits_row(
        &self,
        encoder: &Encoder,
        scale: f64,
        q: &[f64],
        t_idx: usize,
        pos_t: f64,
        positions: &[f64],
    ) -> Result<Vec<f64>> {
        let enc_q = encoder.encode_query(q, pos_t)?;
        let path_row: Option<PathBiasRow> = match &self.probes {
            Some(store) => Some(bias_row(store, t_idx)?),
            None => None,
        };
        let mut row = Vec::with_capacity(t_idx + 1);
        for j in 0..=t_idx {
            let base = scale * dot(&enc_q, &self.encoded_keys[j]);
            let bias = match encoder {
                Encoder::None | Encoder::Multiplicative(_) => 0.0,
                Encoder::Additive(lift) => {
                    additive_bias_at(lift, q, &self.raw_keys[j], positions[j] - pos_t)?
                }
                Encoder::Fox { .. } => {
                    crate::additive::fox_bias(self.fox.as_ref().unwrap(), t_idx, j)?
                }
                Encoder::PathIntegral { .. } => path_row.as_ref().unwrap().bias(j)?,
                Encoder::Joint { v, omega, .. } => {
                    let sd = (q.len() as f64).sqrt();
                    let gates = GateValues {
                        lambda_q: softplus(dot(v, q) / sd),
                        lambda_k: self.key_gates[j],
                    };
                    (positions[j] - pos_t) * omega * gates.total()
                }
            };
            row.push(base + bias);
        }
        Ok(row)
    }
}

// ── Streaming cache ─────────────────────────────────────────────────────────

/// Multi-head streaming state. Single writer; tokens must arrive with
/// strictly increasing positions.
#[derive(Debug, Clone)]
pub struct StreamingCache {
    cfg: AttentionConfig,
    heads: Vec<HeadCache>,
    positions: Vec<f64>,
}

/// One streaming step's result: the causal logit row and the attention
/// output, both per head.
#[derive(Debug, Clone)]
pub struct StepResult {
    /// `logits[h][j]` for `j <= t`.
    pub logits: Vec<Vec<f64>>,
    /// `y[h]`: softmax-weighted value mix, length d.
    pub outputs: Vec<Vec<f64>>,
}

impl StreamingCache {
    pub fn new(cfg: &AttentionConfig) -> Result<Self> {
        let heads = cfg
            .encoders
            .iter()
            .map(|e| HeadCache::new(e, cfg.d))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            cfg: cfg.clone(),
            heads,
            positions: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Bit-level fingerprint of every cached encoded key (for immutability
    /// checks).
    pub fn key_fingerprint(&self) -> Vec<Vec<u64>> {
        self.heads
            .iter()
            .map(|h| {
                h.encoded_keys
                    .iter()
                    .flat_map(|k| k.iter().map(|x| x.to_bits()))
                    .collect()
            })
            .collect()
    }

    /// Ingest token `t` and produce its logit row and output per head.
    ///
    /// `q_t`, `k_t`, `v_t` have dims `[H, d]`; `pos` must exceed the previous
    /// token's position.
    pub fn step(
        &mut self,
        q_t: &Tensor,
        k_t: &Tensor,
        v_t: &Tensor,
        pos: f64,
    ) -> Result<StepResult> {
        let h_count = self.cfg.heads();
        let d = self.cfg.d;
        for (name, t) in [("q", q_t), ("k", k_t), ("v", v_t)] {
            if t.dims() != [h_count, d] {
                return Err(Error::shape(format!(
                    "{name} tensor dims {:?}, expected [{h_count}, {d}]",
                    t.dims()
                )));
            }
        }
        if let Some(&last) = self.positions.last() {
            if pos <= last {
                return Err(Error::invalid(format!(
                    "positions must be strictly increasing: {pos} after {last}"
                )));
            }
        }
        if self.positions.len() >= self.cfg.l_max {
            return Err(Error::invalid(format!(
                "sequence exceeds configured l_max = {}",
                self.cfg.l_max
            )));
        }

        let t_idx = self.positions.len();
        self.positions.push(pos);
        let positions = self.positions.clone();

        let mut logits = Vec::with_capacity(h_count);
        let mut outputs = Vec::with_capacity(h_count);
        for h in 0..h_count {
            let encoder = &self.cfg.encoders[h];
            let k = self.cfg.prep(k_t.slice(&[h]));
            let q = self.cfg.prep(q_t.slice(&[h]));
            self.heads[h].push(encoder, &k, v_t.slice(&[h]), pos)?;
            let row =
                self.heads[h].logits_row(encoder, self.cfg.scale(), &q, t_idx, pos, &positions)?;
            let weights = softmax_row(&row, &vec![false; row.len()])?;
            let mut y = vec![0.0; d];
            for (j, w) in weights.iter().enumerate() {
                for (yi, vi) in y.iter_mut().zip(&self.heads[h].values[j]) {
                    *yi += w * vi;
                }
            }
            logits.push(row);
            outputs.push(y);
        }
        Ok(StepResult { logits, outputs })
    }
}

// ── Batch path ──────────────────────────────────────────────────────────────

/// Full causal logit tensor, dims `[L, L, H]`, masked entries (`j > t`) set
/// to negative infinity. `q` and `k` have dims `[L, H, d]`.
pub fn logits_batch(
    cfg: &AttentionConfig,
    q: &Tensor,
    k: &Tensor,
    positions: &[f64],
) -> Result<Tensor> {
    let (l, h_count, d) = match q.dims() {
        [l, h, d] => (*l, *h, *d),
        _ => return Err(Error::shape("q must have dims [L, H, d]")),
    };
    if k.dims() != [l, h_count, d] {
        return Err(Error::shape("k dims must match q dims"));
    }
    if h_count != cfg.heads() || d != cfg.d {
        return Err(Error::shape(format!(
            "tensor head layout [{h_count}, {d}] does not match config [{}, {}]",
            cfg.heads(),
            cfg.d
        )));
    }
    if positions.len() != l {
        return Err(Error::shape("positions length must equal L"));
    }
    if l > cfg.l_max {
        return Err(Error::invalid(format!(
            "L = {l} exceeds l_max = {}",
            cfg.l_max
        )));
    }
    for w in positions.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::invalid("positions must be strictly increasing"));
        }
    }

    let per_head: Vec<Result<Vec<Vec<f64>>>> = par_map_heads(h_count, |h| {
        let encoder = &cfg.encoders[h];
        let mut cache = HeadCache::new(encoder, d)?;
        // Values are irrelevant for logits; reuse keys to avoid a dummy alloc.
        for t in 0..l {
            let key = cfg.prep(k.slice(&[t, h]));
            cache.push(encoder, &key, &key, positions[t])?;
        }
        let mut rows = Vec::with_capacity(l);
        for t in 0..l {
            let query = cfg.prep(q.slice(&[t, h]));
            rows.push(cache.logits_row(
                encoder,
                cfg.scale(),
                &query,
                t,
                positions[t],
                positions,
            )?);
        }
        Ok(rows)
    });

    let mut out = Tensor::new(
        vec![l, l, h_count],
        vec![f64::NEG_INFINITY; l * l * h_count],
    )?;
    for (h, rows) in per_head.into_iter().enumerate() {
        let rows = rows?;
        for (t, row) in rows.into_iter().enumerate() {
            for (j, val) in row.into_iter().enumerate() {
                *out.at_mut(&[t, j, h]) = val;
            }
        }
    }
    Ok(out)
}

// ── Softmax ─────────────────────────────────────────────────────────────────

/// Max-subtracted softmax over the unmasked entries of a row. Masked entries
/// get weight zero; a fully masked row is an error.
pub fn softmax_row(logits: &[f64], mask: &[bool]) -> Result<Vec<f64>> {
    if logits.len() != mask.len() {
        return Err(Error::shape("mask length must match logits length"));
    }
    let mut max = f64::NEG_INFINITY;
    for (x, &m) in logits.iter().zip(mask) {
        if !m && *x > max {
            max = *x;
        }
    }
    if max == f64::NEG_INFINITY {
        return Err(Error::invalid("softmax over a fully masked row"));
    }
    let mut weights = vec![0.0; logits.len()];
    let mut total = 0.0;
    for (i, (x, &m)) in logits.iter().zip(mask).enumerate() {
        if !m {
            let e = (x - max).exp();
            weights[i] = e;
            total += e;
        }
    }
    for w in weights.iter_mut() {
        *w /= total;
    }
    Ok(weights)
}

// ── Tests ───────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_lhd(rng: &mut ChaCha8Rng, l: usize, h: usize, d: usize) -> Tensor {
        let data = (0..l * h * d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Tensor::new(vec![l, h, d], data).unwrap()
    }

    fn int_positions(l: usize) -> Vec<f64> {
        (0..l).map(|i| i as f64).collect()
    }

    fn encoder_zoo(rng: &mut ChaCha8Rng, d: usize) -> Vec<(&'static str, Encoder)> {
        let map = MultiSubspaceMap::log_uniform(d, 10_000.0).unwrap();
        let basis = crate::sampling::random_orthogonal(rng, d);
        let map_basis = MultiSubspaceMap::log_uniform(d, 100.0)
            .unwrap()
            .with_basis(basis)
            .unwrap();
        vec![
            ("none", Encoder::None),
            ("rope", Encoder::Multiplicative(map.clone())),
            ("learned-basis", Encoder::Multiplicative(map_basis)),
            (
                "alibi",
                Encoder::Additive(UnipotentLift::alibi(d, 0.25).unwrap()),
            ),
            (
                "gated",
                Encoder::Additive(
                    UnipotentLift::gated(
                        d,
                        crate::sampling::random_vector(rng, d),
                        crate::sampling::random_vector(rng, d),
                        0.5,
                    )
                    .unwrap(),
                ),
            ),
            (
                "shift",
                Encoder::Additive(
                    UnipotentLift::shift_vector(
                        d,
                        crate::sampling::random_unit_vector(rng, d),
                        0.3,
                    )
                    .unwrap(),
                ),
            ),
            (
                "fox",
                Encoder::Fox {
                    w_f: crate::sampling::random_vector(rng, d),
                    b_f: 1.0,
                },
            ),
            (
                "path-integral",
                Encoder::PathIntegral {
                    alpha: 1.0,
                    projection: None,
                },
            ),
            (
                "joint",
                Encoder::Joint {
                    map,
                    v: crate::sampling::random_vector(rng, d),
                    u: crate::sampling::random_vector(rng, d),
                    omega: 0.4,
                },
            ),
        ]
    }

    // ── softmax ───────────────────────────────────────────────────────

    #[test]
    fn softmax_single_entry() {
        assert_eq!(softmax_row(&[3.7], &[false]).unwrap(), vec![1.0]);
    }

    #[test]
    fn softmax_two_equal() {
        let w = softmax_row(&[1.5, 1.5], &[false, false]).unwrap();
        assert!((w[0] - 0.5).abs() < 1e-15);
        assert!((w[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn softmax_known_ratio() {
        // (0, ln 3) -> (0.25, 0.75).
        let w = softmax_row(&[0.0, 3.0f64.ln()], &[false, false]).unwrap();
        assert!((w[0] - 0.25).abs() < 1e-14);
        assert!((w[1] - 0.75).abs() < 1e-14);
    }

    #[test]
    fn softmax_rejects_all_masked() {
        assert!(softmax_row(&[1.0, 2.0], &[true, true]).is_err());
    }

    #[test]
    fn softmax_weights_sum_to_one_with_huge_negatives() {
        let w = softmax_row(&[-5000.0, -5001.0, -4999.0], &[false; 3]).unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    // ── batch logits ──────────────────────────────────────────────────

    #[test]
    fn plain_encoder_is_scaled_dot_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (l, d) = (6, 4);
        let cfg = AttentionConfig::new(d, 16, vec![Encoder::None]).unwrap();
        let q = random_lhd(&mut rng, l, 1, d);
        let k = random_lhd(&mut rng, l, 1, d);
        let logits = logits_batch(&cfg, &q, &k, &int_positions(l)).unwrap();
        for t in 0..l {
            for j in 0..l {
                let got = logits.at(&[t, j, 0]);
                if j > t {
                    assert_eq!(got, f64::NEG_INFINITY);
                } else {
                    let want = dot(q.slice(&[t, 0]), k.slice(&[j, 0])) / (d as f64).sqrt();
                    assert_eq!(got, want);
                }
            }
        }
    }

    #[test]
    fn rope_config_matches_reference_encoding() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (l, d) = (12, 8);
        let map = MultiSubspaceMap::log_uniform(d, 10_000.0).unwrap();
        let cfg = AttentionConfig::new(d, 32, vec![Encoder::Multiplicative(map)]).unwrap();
        let q = random_lhd(&mut rng, l, 1, d);
        let k = random_lhd(&mut rng, l, 1, d);
        let positions = int_positions(l);
        let logits = logits_batch(&cfg, &q, &k, &positions).unwrap();
        for t in 0..l {
            for j in 0..=t {
                let eq =
                    crate::multiplicative::rope_reference(d, 10_000.0, t as f64, q.slice(&[t, 0]))
                        .unwrap();
                let ek =
                    crate::multiplicative::rope_reference(d, 10_000.0, j as f64, k.slice(&[j, 0]))
                        .unwrap();
                let want = dot(&eq, &ek) / (d as f64).sqrt();
                let got = logits.at(&[t, j, 0]);
                assert!((got - want).abs() <= 1e-12, "(t,j)=({t},{j})");
            }
        }
    }

    #[test]
    fn alibi_uniform_qk_gives_pure_slope_differences() {
        let (l, d) = (10, 4);
        let beta = 0.125;
        let cfg = AttentionConfig::new(
            d,
            16,
            vec![Encoder::Additive(UnipotentLift::alibi(d, beta).unwrap())],
        )
        .unwrap();
        // Uniform q and k: every dot product is identical.
        let ones = Tensor::new(vec![l, 1, d], vec![0.5; l * d]).unwrap();
        let logits = logits_batch(&cfg, &ones, &ones, &int_positions(l)).unwrap();
        for t in 0..l {
            for j in 0..=t {
                let diff = logits.at(&[t, j, 0]) - logits.at(&[t, t, 0]);
                let want = (j as f64 - t as f64) * beta;
                assert!((diff - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn origin_invariance_for_subgroup_encoders() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (l, d) = (10, 8);
        for (name, enc) in encoder_zoo(&mut rng, d) {
            if name == "path-integral" {
                continue; // endpoint-dependent by design
            }
            let cfg = AttentionConfig::new(d, 64, vec![enc]).unwrap();
            let q = random_lhd(&mut rng, l, 1, d);
            let k = random_lhd(&mut rng, l, 1, d);
            let base: Vec<f64> = (0..l).map(|i| i as f64).collect();
            let shifted: Vec<f64> = base.iter().map(|p| p + 37.0).collect();
            let l0 = logits_batch(&cfg, &q, &k, &base).unwrap();
            let l1 = logits_batch(&cfg, &q, &k, &shifted).unwrap();
            for t in 0..l {
                for j in 0..=t {
                    let a = l0.at(&[t, j, 0]);
                    let b = l1.at(&[t, j, 0]);
                    assert!(
                        (a - b).abs() <= 1e-10,
                        "{name}: logit moved under origin shift at ({t},{j}): {a} vs {b}"
                    );
                }
            }
        }
    }

    // ── streaming ─────────────────────────────────────────────────────

    #[test]
    fn first_token_attends_to_itself() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d = 4;
        let cfg = AttentionConfig::new(d, 8, vec![Encoder::None]).unwrap();
        let mut cache = StreamingCache::new(&cfg).unwrap();
        let q = random_lhd(&mut rng, 1, 1, d);
        let k = random_lhd(&mut rng, 1, 1, d);
        let v = random_lhd(&mut rng, 1, 1, d);
        let q0 = Tensor::new(vec![1, d], q.slice(&[0, 0]).to_vec()).unwrap();
        let k0 = Tensor::new(vec![1, d], k.slice(&[0, 0]).to_vec()).unwrap();
        let v0 = Tensor::new(vec![1, d], v.slice(&[0, 0]).to_vec()).unwrap();
        let step = cache.step(&q0, &k0, &v0, 0.0).unwrap();
        assert_eq!(step.logits[0].len(), 1);
        assert_eq!(step.outputs[0], v0.slice(&[0]).to_vec());
    }

    #[test]
    fn stream_equals_batch_for_every_encoder() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (l, d) = (16, 8);
        for (name, enc) in encoder_zoo(&mut rng, d) {
            let cfg = AttentionConfig::new(d, 32, vec![enc]).unwrap();
            let q = random_lhd(&mut rng, l, 1, d);
            let k = random_lhd(&mut rng, l, 1, d);
            let v = random_lhd(&mut rng, l, 1, d);
            let positions = int_positions(l);
            let batch = logits_batch(&cfg, &q, &k, &positions).unwrap();

            let mut cache = StreamingCache::new(&cfg).unwrap();
            for t in 0..l {
                let qt = Tensor::new(vec![1, d], q.slice(&[t, 0]).to_vec()).unwrap();
                let kt = Tensor::new(vec![1, d], k.slice(&[t, 0]).to_vec()).unwrap();
                let vt = Tensor::new(vec![1, d], v.slice(&[t, 0]).to_vec()).unwrap();
                let step = cache.step(&qt, &kt, &vt, positions[t]).unwrap();
                for j in 0..=t {
                    let b = batch.at(&[t, j, 0]);
                    let s = step.logits[0][j];
                    assert!(
                        (b - s).abs() <= 1e-12,
                        "{name}: stream/batch mismatch at ({t},{j}): {b} vs {s}"
                    );
                }
            }
        }
    }

    #[test]
    fn cached_keys_never_rewritten() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (l, d) = (12, 8);
        let map = MultiSubspaceMap::log_uniform(d, 10_000.0).unwrap();
        let cfg = AttentionConfig::new(d, 32, vec![Encoder::Multiplicative(map)]).unwrap();
        let mut cache = StreamingCache::new(&cfg).unwrap();
        let mut fingerprints: Vec<Vec<Vec<u64>>> = Vec::new();
        for t in 0..l {
            let qt = random_lhd(&mut rng, 1, 1, d);
            let kt = random_lhd(&mut rng, 1, 1, d);
            let vt = random_lhd(&mut rng, 1, 1, d);
            let qt = Tensor::new(vec![1, d], qt.slice(&[0, 0]).to_vec()).unwrap();
            let kt = Tensor::new(vec![1, d], kt.slice(&[0, 0]).to_vec()).unwrap();
            let vt = Tensor::new(vec![1, d], vt.slice(&[0, 0]).to_vec()).unwrap();
            cache.step(&qt, &kt, &vt, t as f64).unwrap();
            fingerprints.push(cache.key_fingerprint());
        }
        // Every earlier fingerprint must be a bit-identical prefix of the
        // final state.
        let last = fingerprints.last().unwrap();
        for fp in &fingerprints {
            for (h, keys) in fp.iter().enumerate() {
                assert_eq!(&last[h][..keys.len()], &keys[..]);
            }
        }
    }

    #[test]
    fn out_of_order_positions_rejected() {
        let d = 4;
        let cfg = AttentionConfig::new(d, 8, vec![Encoder::None]).unwrap();
        let mut cache = StreamingCache::new(&cfg).unwrap();
        let t0 = Tensor::new(vec![1, d], vec![0.1; d]).unwrap();
        cache.step(&t0, &t0, &t0, 1.0).unwrap();
        assert!(cache.step(&t0, &t0, &t0, 1.0).is_err());
        assert!(cache.step(&t0, &t0, &t0, 0.5).is_err());
    }

    #[test]
    fn multi_head_mixed_encoders() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (l, d) = (8, 6);
        let encoders = vec![
            Encoder::None,
            Encoder::Multiplicative(MultiSubspaceMap::log_uniform(d, 500.0).unwrap()),
            Encoder::Additive(UnipotentLift::alibi(d, 0.0625).unwrap()),
            Encoder::Fox {
                w_f: crate::sampling::random_vector(&mut rng, d),
                b_f: 2.0,
            },
        ];
        let cfg = AttentionConfig::new(d, 16, encoders).unwrap();
        let q = random_lhd(&mut rng, l, 4, d);
        let k = random_lhd(&mut rng, l, 4, d);
        let v = random_lhd(&mut rng, l, 4, d);
        let positions = int_positions(l);
        let batch = logits_batch(&cfg, &q, &k, &positions).unwrap();

        let mut cache = StreamingCache::new(&cfg).unwrap();
        for t in 0..l {
            let qt = Tensor::new(vec![4, d], q.slice(&[t]).to_vec()).unwrap();
            let kt = Tensor::new(vec![4, d], k.slice(&[t]).to_vec()).unwrap();
            let vt = Tensor::new(vec![4, d], v.slice(&[t]).to_vec()).unwrap();
            let step = cache.step(&qt, &kt, &vt, positions[t]).unwrap();
            for h in 0..4 {
                for j in 0..=t {
                    assert_eq!(batch.at(&[t, j, h]), step.logits[h][j]);
                }
            }
        }
    }

    #[test]
    fn qk_rmsnorm_toggle_changes_but_stays_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (l, d) = (8, 6);
        let map = MultiSubspaceMap::log_uniform(d, 1000.0).unwrap();
        let plain =
            AttentionConfig::new(d, 16, vec![Encoder::Multiplicative(map.clone())]).unwrap();
        let normed = AttentionConfig::new(d, 16, vec![Encoder::Multiplicative(map)])
            .unwrap()
            .with_qk_rmsnorm(true);
        let q = random_lhd(&mut rng, l, 1, d);
        let k = random_lhd(&mut rng, l, 1, d);
        let positions = int_positions(l);
        let a = logits_batch(&plain, &q, &k, &positions).unwrap();
        let b = logits_batch(&normed, &q, &k, &positions).unwrap();
        assert_ne!(a.at(&[3, 1, 0]), b.at(&[3, 1, 0]));

        // And the streaming path agrees with the normalized batch.
        let mut cache = StreamingCache::new(&normed).unwrap();
        for t in 0..l {
            let qt = Tensor::new(vec![1, d], q.slice(&[t, 0]).to_vec()).unwrap();
            let kt = Tensor::new(vec![1, d], k.slice(&[t, 0]).to_vec()).unwrap();
            let step = cache.step(&qt, &kt, &kt, positions[t]).unwrap();
            for j in 0..=t {
                assert_eq!(b.at(&[t, j, 0]), step.logits[0][j]);
            }
        }
    }

    #[test]
    fn encoder_config_json_round_trip() {
        let cfg_json = r#"[
            {"type": "none"},
            {"type": "multiplicative", "map": {"d": 8, "base": 10000.0}},
            {"type": "additive", "lift": {"d": 8, "omega": 1.0, "kind": "alibi", "beta": 0.25}},
            {"type": "fox", "w_f": [0,0,0,0,0,0,0,0], "b_f": 2.0},
            {"type": "path-integral", "alpha": 1.0},
            {"type": "joint", "map": {"d": 8, "base": 100.0},
             "v": [0,0,0,0,0,0,0,0], "u": [0,0,0,0,0,0,0,0], "omega": 0.5}
        ]"#;
        let parsed: Vec<EncoderConfig> = serde_json::from_str(cfg_json).unwrap();
        let encoders: Vec<Encoder> = parsed.iter().map(|c| c.build().unwrap()).collect();
        assert_eq!(encoders.len(), 6);
        let cfg = AttentionConfig::new(8, 16, encoders).unwrap();
        assert_eq!(cfg.heads(), 6);
        // Round-trip the configs themselves.
        let re = serde_json::to_string(&parsed).unwrap();
        let again: Vec<EncoderConfig> = serde_json::from_str(&re).unwrap();
        assert_eq!(again.len(), 6);
    }
}
