//! Microbenchmark plumbing: median-of-samples timing for the fast rotation
//! kernels against dense matrix-vector application, plus a log-log slope fit
//! over a dimension sweep. The dense operator is built once per dimension
//! with the series-based exponential and only its per-token application is
//! timed (the cubic construction cost is amortized off, which is the
//! favourable accounting for the dense side).

use std::time::Instant;

use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::attention::{AttentionConfig, Encoder, StreamingCache};
use crate::error::Result;
use crate::multiplicative::{apply_ms, MultiSubspaceMap};
use crate::rank2::{apply_exp, dense_exp_oracle, PlaneGenerator};
use crate::tensor_io::Tensor;

/// Dense baseline rows are only produced up to this dimension (the oracle is
/// capped there, and the cubic exponential gets painful quickly).
pub const DENSE_MAX_DIM: usize = 256;

/// Robust per-op timing: median and interquartile range in nanoseconds.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Timing {
    pub median_ns: f64,
    pub iqr_ns: f64,
}

/// Time `op` per invocation: `warmups` untimed samples, then `samples` timed
/// ones, each averaging over `batch` calls.
pub fn time_op(samples: usize, warmups: usize, batch: usize, mut op: impl FnMut()) -> Timing {
    assert!(samples >= 1 && batch >= 1);
    let mut all = Vec::with_capacity(samples);
    for round in 0..warmups + samples {
        let start = Instant::now();
        for _ in 0..batch {
            op();
        }
        let ns = start.elapsed().as_nanos() as f64 / batch as f64;
        if round >= warmups {
            all.push(ns);
        }
    }
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q = |frac: f64| {
        let idx = ((all.len() - 1) as f64 * frac).round() as usize;
        all[idx]
    };
    Timing {
        median_ns: q(0.5),
        iqr_ns: q(0.75) - q(0.25),
    }
}

/// One row of the sweep: method timing at a dimension, with the speedup of
/// the fast path over the dense baseline where the baseline exists.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub d: usize,
    pub method: String,
    pub ns_per_op: f64,
    pub iqr_ns: f64,
    /// dense median / this median at the same `d`; 1.0 for the dense row.
    pub speedup_vs_dense: f64,
}

/// Benchmark parameters. The defaults match the reporting contract (median
/// of at least 30 samples after 5 warmups).
#[derive(Debug, Clone, Copy)]
pub struct SweepParams {
    pub samples: usize,
    pub warmups: usize,
    pub seed: u64,
}

impl Default for SweepParams {
    fn default() -> Self {
        Self {
            samples: 30,
            warmups: 5,
            seed: 0,
        }
    }
}

/// Sweep the kernel comparison across dimensions. Methods:
/// `rank2-apply` (one plane), `ms-apply` (all d/2 planes), and
/// `dense-matvec` (precomputed dense rotation times vector) for `d <= 256`.
pub fn run_sweep(dims: &[usize], params: SweepParams) -> Result<Vec<SweepRow>> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(params.seed);
    let mut rows = Vec::new();

    for &d in dims {
        let x = crate::sampling::random_vector(&mut rng, d);
        let map = MultiSubspaceMap::log_uniform(d, 10_000.0)?;
        let a = crate::sampling::random_unit_vector(&mut rng, d);
        let b = crate::sampling::random_unit_vector(&mut rng, d);
        let plane = PlaneGenerator::gauge_fixed(a, b, 0.31)?;
        let n = 17.0;

        // Batch sizes keep each sample comfortably above timer resolution.
        let batch = (200_000 / d).max(8);

        let mut sink = 0.0f64;
        let t_plane = time_op(params.samples, params.warmups, batch, || {
            let y = apply_exp(&plane, n, &x).unwrap();
            sink += y[0];
        });
        let t_ms = time_op(params.samples, params.warmups, batch, || {
            let y = apply_ms(&map, n, &x).unwrap();
            sink += y[0];
        });

        let dense_timing = if d <= DENSE_MAX_DIM {
            let g = dense_exp_oracle(&map.dense_generator(), n)?;
            let t = time_op(params.samples, params.warmups, batch.min(4096), || {
                let y = g.matvec(&x);
                sink += y[0];
            });
            Some(t)
        } else {
            None
        };
        std::hint::black_box(sink);

        let dense_median = dense_timing.map(|t| t.median_ns);
        let speedup = |ns: f64| dense_median.map_or(f64::NAN, |dm| dm / ns);
        rows.push(SweepRow {
            d,
            method: "rank2-apply".into(),
            ns_per_op: t_plane.median_ns,
            iqr_ns: t_plane.iqr_ns,
            speedup_vs_dense: speedup(t_plane.median_ns),
        });
        rows.push(SweepRow {
            d,
            method: "ms-apply".into(),
            ns_per_op: t_ms.median_ns,
            iqr_ns: t_ms.iqr_ns,
            speedup_vs_dense: speedup(t_ms.median_ns),
        });
        if let Some(t) = dense_timing {
            rows.push(SweepRow {
                d,
                method: "dense-matvec".into(),
                ns_per_op: t.median_ns,
                iqr_ns: t.iqr_ns,
                speedup_vs_dense: 1.0,
            });
        }

        // Streaming-attention step cost at this width, reported per cached
        // key: one rotary head over a 32-token stream. This is the measured
        // side of the per-step O(t d) contract (reported, not asserted).
        let stream_len = 32usize;
        let cfg = AttentionConfig::new(
            d,
            stream_len,
            vec![Encoder::Multiplicative(MultiSubspaceMap::log_uniform(
                d, 10_000.0,
            )?)],
        )?;
        let tokens: Vec<(Tensor, Tensor, Tensor)> = (0..stream_len)
            .map(|_| {
                let mk = |rng: &mut rand_chacha::ChaCha8Rng| {
                    Tensor::new(
                        vec![1, d],
                        (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                    )
                    .unwrap()
                };
                (mk(&mut rng), mk(&mut rng), mk(&mut rng))
            })
            .collect();
        let pairs = (stream_len * (stream_len + 1) / 2) as f64;
        let t_stream = time_op(params.samples.min(10), 1, 1, || {
            let mut cache = StreamingCache::new(&cfg).unwrap();
            for (t, (q, k, v)) in tokens.iter().enumerate() {
                let _ = cache.step(q, k, v, t as f64).unwrap();
            }
        });
        rows.push(SweepRow {
            d,
            method: "attn-stream-per-key".into(),
            ns_per_op: t_stream.median_ns / pairs,
            iqr_ns: t_stream.iqr_ns / pairs,
            speedup_vs_dense: f64::NAN,
        });
    }
    Ok(rows)
}

/// Least-squares slope of `ln(ns)` against `ln(d)` for one method's rows.
pub fn loglog_slope(rows: &[SweepRow], method: &str) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.method == method)
        .map(|r| ((r.d as f64).ln(), r.ns_per_op.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in &pts {
        num += (x - mean_x) * (y - mean_y);
        den += (x - mean_x) * (x - mean_x);
    }
    Some(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timing_reports_positive_median() {
        let mut acc = 0u64;
        let t = time_op(5, 1, 64, || {
            acc = acc.wrapping_add(std::hint::black_box(42));
        });
        assert!(t.median_ns >= 0.0);
        assert!(t.iqr_ns >= 0.0);
    }

    #[test]
    fn sweep_emits_expected_rows() {
        let rows = run_sweep(
            &[8, 16],
            SweepParams {
                samples: 3,
                warmups: 1,
                seed: 1,
            },
        )
        .unwrap();
        // Two fast methods, the dense baseline, and the streaming step cost
        // at both dims.
        assert_eq!(rows.len(), 8);
        assert!(rows.iter().all(|r| r.ns_per_op > 0.0));
        let dense: Vec<_> = rows.iter().filter(|r| r.method == "dense-matvec").collect();
        assert_eq!(dense.len(), 2);
        assert!(dense.iter().all(|r| r.speedup_vs_dense == 1.0));
    }

    #[test]
    fn slope_fit_recovers_known_exponent() {
        // Synthetic rows with ns = d^2 exactly.
        let rows: Vec<SweepRow> = [4usize, 8, 16, 32]
            .iter()
            .map(|&d| SweepRow {
                d,
                method: "synthetic".into(),
                ns_per_op: (d * d) as f64,
                iqr_ns: 0.0,
                speedup_vs_dense: f64::NAN,
            })
            .collect();
        let slope = loglog_slope(&rows, "synthetic").unwrap();
        assert!((slope - 2.0).abs() < 1e-12);
        assert!(loglog_slope(&rows, "missing").is_none());
    }
}
