//! `grape attn-demo`: stream a synthetic (or file-provided) sequence through
//! the attention harness, verify that streaming reproduces the batch logits,
//! and print per-head summaries of the final row.

use std::path::Path;

use anyhow::{bail, Context, Result};
use grape_core::attention::{
    logits_batch, AttentionConfig, Encoder, EncoderConfig, StreamingCache,
};
use grape_core::multiplicative::MapConfig;
use grape_core::sampling;
use grape_core::tensor_io::{read_tensor, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::output::{fmt_f64, to_csv, to_json, write_out, Format};

/// Demo configuration file: `{d, l, encoders: [...]}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct DemoConfig {
    pub d: usize,
    pub l: usize,
    pub encoders: Vec<EncoderConfig>,
    #[serde(default)]
    pub qk_rmsnorm: bool,
}

/// Built-in encoder presets for `--encoder`.
pub fn preset(name: &str, d: usize, heads: usize, seed: u64) -> Result<Vec<Encoder>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let make = |h: usize, rng: &mut ChaCha8Rng| -> Result<Encoder> {
        Ok(match name {
            "none" => Encoder::None,
            "rope" => Encoder::Multiplicative(
                grape_core::multiplicative::MultiSubspaceMap::log_uniform(d, 10_000.0)?,
            ),
            "alibi" => {
                let beta = 2f64.powf(-8.0 * (h + 1) as f64 / heads as f64);
                Encoder::Additive(grape_core::additive::UnipotentLift::alibi(d, beta)?)
            }
            "gated" => Encoder::Additive(grape_core::additive::UnipotentLift::gated(
                d,
                sampling::random_vector(rng, d),
                sampling::random_vector(rng, d),
                0.5,
            )?),
            "fox" => Encoder::Fox {
                w_f: sampling::random_vector(rng, d),
                b_f: 1.5,
            },
            "path-integral" => Encoder::PathIntegral {
                alpha: 1.0,
                projection: None,
            },
            "joint" => Encoder::Joint {
                map: MapConfig {
                    d,
                    planes: None,
                    thetas: None,
                    base: Some(10_000.0),
                    basis: None,
                    head_id: h as u32,
                }
                .build()?,
                v: sampling::random_vector(rng, d),
                u: sampling::random_vector(rng, d),
                omega: 0.3,
            },
            other => bail!("unknown encoder preset `{other}`"),
        })
    };
    (0..heads).map(|h| make(h, &mut rng)).collect()
}

#[derive(Serialize)]
struct HeadSummary {
    head: usize,
    final_row_min: f64,
    final_row_max: f64,
    final_row_mean: f64,
}

#[derive(Serialize)]
struct DemoBody {
    d: usize,
    heads: usize,
    l: usize,
    stream_equals_batch: bool,
    max_stream_batch_residual: f64,
    head_summaries: Vec<HeadSummary>,
}

pub struct DemoArgs<'a> {
    pub config: Option<&'a Path>,
    pub encoder: String,
    pub d: usize,
    pub heads: usize,
    pub len: usize,
    pub seed: u64,
    pub q: Option<&'a Path>,
    pub k: Option<&'a Path>,
    pub v: Option<&'a Path>,
    pub dump_path_bias: Option<&'a Path>,
    pub out: Option<&'a Path>,
    pub format: Format,
}

pub fn run(args: DemoArgs<'_>) -> Result<i32> {
    // Resolve the attention configuration.
    let (cfg, l) = match args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading demo config {}", path.display()))?;
            let demo: DemoConfig = serde_json::from_str(&text).context("parsing demo config")?;
            let encoders = demo
                .encoders
                .iter()
                .map(|c| c.build())
                .collect::<grape_core::Result<Vec<_>>>()?;
            (
                AttentionConfig::new(demo.d, demo.l.max(1), encoders)?
                    .with_qk_rmsnorm(demo.qk_rmsnorm),
                demo.l,
            )
        }
        None => {
            let encoders = preset(&args.encoder, args.d, args.heads, args.seed)?;
            (
                AttentionConfig::new(args.d, args.len.max(1), encoders)?,
                args.len,
            )
        }
    };
    let (h, d) = (cfg.heads(), cfg.head_dim());

    // Inputs: tensor blobs when provided, otherwise synthetic from the seed.
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let load_or_sample = |path: Option<&Path>, rng: &mut ChaCha8Rng| -> Result<Tensor> {
        match path {
            Some(p) => {
                let t = read_tensor(p)?;
                if t.dims() != [l, h, d] {
                    bail!(
                        "tensor {} has dims {:?}, demo needs [{l}, {h}, {d}]",
                        p.display(),
                        t.dims()
                    );
                }
                Ok(t)
            }
            None => Ok(Tensor::new(
                vec![l, h, d],
                (0..l * h * d).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            )?),
        }
    };
    let q = load_or_sample(args.q, &mut rng)?;
    let k = load_or_sample(args.k, &mut rng)?;
    let v = load_or_sample(args.v, &mut rng)?;
    let positions: Vec<f64> = (0..l).map(|i| i as f64).collect();

    // Batch pass, then stream the same tokens and compare.
    let batch = logits_batch(&cfg, &q, &k, &positions)?;
    let mut cache = StreamingCache::new(&cfg)?;
    let mut worst = 0.0f64;
    let mut final_rows: Vec<Vec<f64>> = Vec::new();
    for t in 0..l {
        let qt = Tensor::new(vec![h, d], q.slice(&[t]).to_vec())?;
        let kt = Tensor::new(vec![h, d], k.slice(&[t]).to_vec())?;
        let vt = Tensor::new(vec![h, d], v.slice(&[t]).to_vec())?;
        let step = cache.step(&qt, &kt, &vt, positions[t])?;
        for hh in 0..h {
            for j in 0..=t {
                worst = worst.max((batch.at(&[t, j, hh]) - step.logits[hh][j]).abs());
            }
        }
        if t == l - 1 {
            final_rows = step.logits;
        }
    }
    let ok = worst <= 1e-12;
    println!(
        "stream==batch: {} (max residual {:.3e})",
        if ok { "PASS" } else { "FAIL" },
        worst
    );

    let head_summaries: Vec<HeadSummary> = final_rows
        .iter()
        .enumerate()
        .map(|(head, row)| {
            let min = row.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mean = row.iter().sum::<f64>() / row.len() as f64;
            HeadSummary {
                head,
                final_row_min: min,
                final_row_max: max,
                final_row_mean: mean,
            }
        })
        .collect();
    for s in &head_summaries {
        println!(
            "head {}: final-row logits min {:.6} max {:.6} mean {:.6}",
            s.head, s.final_row_min, s.final_row_max, s.final_row_mean
        );
    }

    // Optional (t, j, bias) triangle dump for path-integral heads.
    if let Some(path) = args.dump_path_bias {
        let mut rows = Vec::new();
        for hh in 0..h {
            if let Encoder::PathIntegral { alpha, projection } = cfg.encoder(hh) {
                let mut store = grape_core::path_integral::ProbeStore::new(
                    projection.as_ref().map_or(d, |p| p.rows()),
                    *alpha,
                    grape_core::path_integral::LinkFunction::LogSigmoid,
                )?;
                for t in 0..l {
                    let key = k.slice(&[t, hh]);
                    let probe = match projection {
                        Some(p) => grape_core::path_integral::probe_from_features(p, key)?,
                        None => grape_core::path_integral::rms_normalize(key),
                    };
                    store.push_probe(probe)?;
                    let row = grape_core::path_integral::bias_row(&store, t)?;
                    for j in 0..=t {
                        rows.push(vec![
                            hh.to_string(),
                            t.to_string(),
                            j.to_string(),
                            fmt_f64(row.bias(j)?),
                        ]);
                    }
                }
            }
        }
        if rows.is_empty() {
            bail!("--dump-path-bias needs at least one path-integral head");
        }
        std::fs::write(path, to_csv(&["head", "t", "j", "bias"], &rows))?;
    }

    let body = DemoBody {
        d,
        heads: h,
        l,
        stream_equals_batch: ok,
        max_stream_batch_residual: worst,
        head_summaries,
    };
    if let Some(out) = args.out {
        match args.format {
            Format::Json => write_out(Some(out), &to_json(args.seed, "attn-demo", &body)?)?,
            Format::Csv => {
                let rows: Vec<Vec<String>> = body
                    .head_summaries
                    .iter()
                    .map(|s| {
                        vec![
                            s.head.to_string(),
                            fmt_f64(s.final_row_min),
                            fmt_f64(s.final_row_max),
                            fmt_f64(s.final_row_mean),
                        ]
                    })
                    .collect();
                write_out(Some(out), &to_csv(&["head", "min", "max", "mean"], &rows))?;
            }
        }
    }
    Ok(if ok { 0 } else { 1 })
}
