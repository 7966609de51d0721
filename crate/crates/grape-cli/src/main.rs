//! `grape`: invariant checks, kernel benchmarks, spectrum reports, and a
//! streaming attention demo over the positional-encoding kernels.
//!
//! Exit codes: 0 on success, 1 when a property or contract fails, 2 for
//! usage errors. `GRAPE_THREADS` caps head-level parallelism.

mod attn_demo;
mod checks;
mod output;
mod spectrum_cmd;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use grape_core::bench::{loglog_slope, run_sweep, SweepParams};
use serde::Serialize;

use checks::{run_checks, Fault};
use output::{fmt_f64, to_csv, to_json, write_out, Format};

#[derive(Parser)]
#[command(
    name = "grape",
    about = "Group-action positional encodings: checks, benchmarks, spectra, attention demo",
    version,
    max_term_width = 100
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Seed for all randomized inputs; a fixed seed reproduces every
    /// non-timing output byte for byte.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, default_value = "json")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Run the property suite; prints one PASS/FAIL line per property with
    /// its measured residual. CSV columns: name, residual, tolerance, pass.
    /// Exits 1 if any property fails.
    Check {
        #[command(flatten)]
        common: CommonArgs,
        /// Only run properties whose name matches (substring, or glob with `*`).
        #[arg(long)]
        filter: Option<String>,
        /// Test hook: inject a known fault (`f2-perturb`) to exercise the
        /// failure path.
        #[arg(long)]
        inject_fault: Option<String>,
    },
    /// Benchmark the closed-form kernels against dense application across a
    /// dimension sweep. CSV columns: d, method, ns_per_op_median, ns_per_op_iqr,
    /// speedup_vs_dense. Exits 1 if the fast path is not sub-quadratic.
    Bench {
        #[command(flatten)]
        common: CommonArgs,
        /// Dimensions to sweep.
        #[arg(long, value_delimiter = ',', default_values_t = vec![64usize, 128, 256, 512, 1024])]
        dims: Vec<usize>,
        /// Timed samples per measurement (median is reported).
        #[arg(long, default_value_t = 30)]
        samples: usize,
        /// Warmup rounds before sampling.
        #[arg(long, default_value_t = 5)]
        warmups: usize,
    },
    /// Emit spectral reports (eigenvalues, singular values, determinant,
    /// condition number) for configured operators. CSV columns: operator,
    /// kind, entry, index, value_re, value_im (one row per value).
    Spectrum {
        #[command(flatten)]
        common: CommonArgs,
        /// JSON operator list; defaults to a representative built-in set.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Stream a sequence through the attention harness, verify streaming
    /// equals batch, and print logit summaries.
    AttnDemo {
        #[command(flatten)]
        common: CommonArgs,
        /// Attention config JSON ({d, l, encoders: [...]}); overrides the
        /// preset flags below.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Encoder preset: none | rope | alibi | gated | fox | path-integral | joint.
        #[arg(long, default_value = "rope")]
        encoder: String,
        /// Head width.
        #[arg(long, default_value_t = 32)]
        d: usize,
        /// Number of heads.
        #[arg(long, default_value_t = 4)]
        heads: usize,
        /// Sequence length.
        #[arg(long, default_value_t = 16)]
        len: usize,
        /// Q/K/V tensor blobs (see tensor format in the README); synthetic
        /// when omitted.
        #[arg(long)]
        q: Option<PathBuf>,
        #[arg(long)]
        k: Option<PathBuf>,
        #[arg(long)]
        v: Option<PathBuf>,
        /// Write the (head, t, j, bias) triangle of path-integral heads as CSV.
        #[arg(long)]
        dump_path_bias: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Check {
            common,
            filter,
            inject_fault,
        } => cmd_check(common, filter.as_deref(), inject_fault.as_deref()),
        Command::Bench {
            common,
            dims,
            samples,
            warmups,
        } => cmd_bench(common, &dims, samples, warmups),
        Command::Spectrum { common, config } => {
            spectrum_cmd::run(
                config.as_deref(),
                common.seed,
                common.format,
                common.out.as_deref(),
            )?;
            Ok(0)
        }
        Command::AttnDemo {
            common,
            config,
            encoder,
            d,
            heads,
            len,
            q,
            k,
            v,
            dump_path_bias,
        } => {
            let code = attn_demo::run(attn_demo::DemoArgs {
                config: config.as_deref(),
                encoder,
                d,
                heads,
                len,
                seed: common.seed,
                q: q.as_deref(),
                k: k.as_deref(),
                v: v.as_deref(),
                dump_path_bias: dump_path_bias.as_deref(),
                out: common.out.as_deref(),
                format: common.format,
            })?;
            Ok(code as u8)
        }
    }
}

#[derive(Serialize)]
struct CheckBody {
    checks: Vec<checks::CheckResult>,
    all_pass: bool,
}

fn cmd_check(common: CommonArgs, filter: Option<&str>, fault_name: Option<&str>) -> Result<u8> {
    let fault = match fault_name {
        Some(name) => match Fault::parse(name) {
            Some(f) => Some(f),
            None => bail!("unknown fault `{name}` (available: f2-perturb)"),
        },
        None => None,
    };
    let results = run_checks(common.seed, filter, fault);
    if results.is_empty() {
        bail!(
            "no properties match filter {:?}",
            filter.unwrap_or("<none>")
        );
    }
    for r in &results {
        println!(
            "{} {} residual={:.3e} tolerance={:.1e}",
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            r.residual,
            r.tolerance
        );
    }
    let all_pass = results.iter().all(|r| r.pass);
    if let Some(out) = &common.out {
        match common.format {
            Format::Json => {
                let body = CheckBody {
                    checks: results.clone(),
                    all_pass,
                };
                write_out(Some(out), &to_json(common.seed, "check", &body)?)?;
            }
            Format::Csv => {
                let rows: Vec<Vec<String>> = results
                    .iter()
                    .map(|r| {
                        vec![
                            r.name.clone(),
                            fmt_f64(r.residual),
                            fmt_f64(r.tolerance),
                            r.pass.to_string(),
                        ]
                    })
                    .collect();
                write_out(
                    Some(out),
                    &to_csv(&["name", "residual", "tolerance", "pass"], &rows),
                )?;
            }
        }
    }
    if !all_pass {
        let failing: Vec<&str> = results
            .iter()
            .filter(|r| !r.pass)
            .map(|r| r.name.as_str())
            .collect();
        eprintln!("failing properties: {}", failing.join(", "));
        return Ok(1);
    }
    Ok(0)
}

#[derive(Serialize)]
struct BenchBody {
    rows: Vec<grape_core::bench::SweepRow>,
    slopes: Vec<(String, f64)>,
    fast_path_subquadratic: bool,
}

fn cmd_bench(common: CommonArgs, dims: &[usize], samples: usize, warmups: usize) -> Result<u8> {
    if dims.is_empty() {
        bail!("bench needs at least one dimension");
    }
    let rows = run_sweep(
        dims,
        SweepParams {
            samples,
            warmups,
            seed: common.seed,
        },
    )?;
    let mut slopes = Vec::new();
    for method in ["rank2-apply", "ms-apply", "dense-matvec"] {
        if let Some(slope) = loglog_slope(&rows, method) {
            println!("slope {method}: {slope:.3}");
            slopes.push((method.to_string(), slope));
        }
    }
    let fast_slope = slopes
        .iter()
        .find(|(m, _)| m == "ms-apply")
        .map(|(_, s)| *s)
        .unwrap_or(f64::NAN);
    let subquadratic = fast_slope < 1.5;
    println!(
        "fast-path sub-quadratic contract (slope < 1.5): {}",
        if subquadratic { "PASS" } else { "FAIL" }
    );

    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.d.to_string(),
                r.method.clone(),
                fmt_f64(r.ns_per_op),
                fmt_f64(r.iqr_ns),
                fmt_f64(r.speedup_vs_dense),
            ]
        })
        .collect();
    let csv = to_csv(
        &[
            "d",
            "method",
            "ns_per_op_median",
            "ns_per_op_iqr",
            "speedup_vs_dense",
        ],
        &csv_rows,
    );
    match (&common.out, common.format) {
        (Some(out), Format::Csv) => write_out(Some(out), &csv)?,
        (Some(out), Format::Json) => {
            let body = BenchBody {
                rows,
                slopes,
                fast_path_subquadratic: subquadratic,
            };
            write_out(Some(out), &to_json(common.seed, "bench", &body)?)?;
        }
        (None, _) => print!("{csv}"),
    }
    Ok(if subquadratic { 0 } else { 1 })
}
