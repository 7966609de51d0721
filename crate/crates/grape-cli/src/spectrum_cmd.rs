//! `grape spectrum`: closed-form spectral reports for the operator families,
//! serialized as JSON or as one CSV row per eigen/singular value.

use std::path::Path;

use anyhow::{bail, Context, Result};
use grape_core::additive::UnipotentLift;
use grape_core::multiplicative::{noncommuting_spectrum, ThinCompression};
use grape_core::rank2::PlaneGenerator;
use grape_core::sampling;
use grape_core::spectral::{
    path_product_report, rank2_generator_spectrum, rank2_spectrum, unipotent_report, PathFactorSeq,
    SpectrumReport,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::output::{fmt_f64, to_csv, to_json, write_out, Format};

/// One operator request. Vectors may be given explicitly or sampled from the
/// run seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OperatorSpec {
    Rank2 {
        d: usize,
        #[serde(default = "one")]
        omega: f64,
        #[serde(default = "one")]
        n: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<Vec<f64>>,
    },
    Rank2Generator {
        d: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        b: Option<Vec<f64>>,
    },
    Unipotent {
        lift: UnipotentLift,
        #[serde(default = "one")]
        s: f64,
    },
    PathProduct {
        d: usize,
        len: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        betas: Option<Vec<f64>>,
    },
    Noncommuting {
        d: usize,
        r: usize,
        #[serde(default = "one")]
        n: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SpectrumRequest {
    pub operators: Vec<OperatorSpec>,
}

impl Default for SpectrumRequest {
    /// A representative trio: a rank-2 rotation, the unit-slope unipotent
    /// lift at s = 1 (golden-ratio singular pair), and a short factor chain.
    fn default() -> Self {
        SpectrumRequest {
            operators: vec![
                OperatorSpec::Rank2 {
                    d: 8,
                    omega: 1.0,
                    n: 1.0,
                    a: None,
                    b: None,
                },
                OperatorSpec::Unipotent {
                    lift: UnipotentLift::alibi(4, 1.0).expect("static lift"),
                    s: 1.0,
                },
                OperatorSpec::PathProduct {
                    d: 6,
                    len: 12,
                    betas: None,
                },
            ],
        }
    }
}

fn realize(spec: &OperatorSpec, rng: &mut ChaCha8Rng) -> Result<SpectrumReport> {
    Ok(match spec {
        OperatorSpec::Rank2 { d, omega, n, a, b } => {
            let av = a
                .clone()
                .unwrap_or_else(|| sampling::random_vector(rng, *d));
            let bv = b
                .clone()
                .unwrap_or_else(|| sampling::random_vector(rng, *d));
            rank2_spectrum(&PlaneGenerator::new(av, bv, *omega)?, *n)
        }
        OperatorSpec::Rank2Generator { d, a, b } => {
            let av = a
                .clone()
                .unwrap_or_else(|| sampling::random_vector(rng, *d));
            let bv = b
                .clone()
                .unwrap_or_else(|| sampling::random_vector(rng, *d));
            rank2_generator_spectrum(&PlaneGenerator::new(av, bv, 1.0)?)
        }
        OperatorSpec::Unipotent { lift, s } => unipotent_report(lift, *s),
        OperatorSpec::PathProduct { d, len, betas } => {
            let betas = betas
                .clone()
                .unwrap_or_else(|| (0..*len).map(|_| rng.gen_range(0.05..1.95)).collect());
            if betas.len() != *len {
                bail!("path-product betas length {} != len {len}", betas.len());
            }
            let ws = (0..*len)
                .map(|_| sampling::random_unit_vector(rng, *d))
                .collect();
            path_product_report(&PathFactorSeq::new(betas, ws)?)?
        }
        OperatorSpec::Noncommuting { d, r, n } => {
            let e = sampling::random_orthonormal_columns(rng, *d, *r);
            let l_r = sampling::random_skew(rng, *r);
            let tc = ThinCompression::new(e, l_r)?;
            let eigs = noncommuting_spectrum(&tc, *n);
            SpectrumReport {
                operator_kind: grape_core::spectral::OperatorKind::Rank2Exponential,
                eigenvalues: eigs,
                singular_values: vec![1.0; *d],
                determinant: 1.0,
                condition_number: 1.0,
                notes: format!(
                    "thin compression r = {r}, mode angles {:?}",
                    tc.mode_angles()
                ),
            }
        }
    })
}

#[derive(Serialize)]
struct SpectrumBody {
    reports: Vec<SpectrumReport>,
}

pub fn run(config: Option<&Path>, seed: u64, format: Format, out: Option<&Path>) -> Result<()> {
    let request: SpectrumRequest = match config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading spectrum config {}", path.display()))?;
            serde_json::from_str(&text).context("parsing spectrum config")?
        }
        None => SpectrumRequest::default(),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reports: Vec<SpectrumReport> = request
        .operators
        .iter()
        .map(|spec| realize(spec, &mut rng))
        .collect::<Result<_>>()?;
    for r in &reports {
        r.validate()
            .map_err(|e| anyhow::anyhow!("report failed self-validation: {e}"))?;
    }

    match format {
        Format::Json => {
            let body = SpectrumBody { reports };
            write_out(out, &to_json(seed, "spectrum", &body)?)?;
        }
        Format::Csv => {
            let mut rows = Vec::new();
            for (op, rep) in reports.iter().enumerate() {
                for (i, e) in rep.eigenvalues.iter().enumerate() {
                    rows.push(vec![
                        op.to_string(),
                        rep.operator_kind.as_str().to_string(),
                        "eigenvalue".into(),
                        i.to_string(),
                        fmt_f64(e.re),
                        fmt_f64(e.im),
                    ]);
                }
                for (i, s) in rep.singular_values.iter().enumerate() {
                    rows.push(vec![
                        op.to_string(),
                        rep.operator_kind.as_str().to_string(),
                        "singular-value".into(),
                        i.to_string(),
                        fmt_f64(*s),
                        String::new(),
                    ]);
                }
                rows.push(vec![
                    op.to_string(),
                    rep.operator_kind.as_str().to_string(),
                    "determinant".into(),
                    "0".into(),
                    fmt_f64(rep.determinant),
                    String::new(),
                ]);
                rows.push(vec![
                    op.to_string(),
                    rep.operator_kind.as_str().to_string(),
                    "condition-number".into(),
                    "0".into(),
                    fmt_f64(rep.condition_number),
                    String::new(),
                ]);
            }
            let csv = to_csv(
                &["operator", "kind", "entry", "index", "value_re", "value_im"],
                &rows,
            );
            write_out(out, &csv)?;
        }
    }
    Ok(())
}
