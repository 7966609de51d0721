//! The property-check registry behind `grape check`: every module invariant
//! as a named, seeded, residual-reporting check. Each check derives its RNG
//! from the run seed and its own name, so results are reproducible and
//! independent of filtering.

use grape_core::additive::{
    additive_bias, additive_score, additive_score_dense, fox_bias, unipotent_matrix, ForgetGates,
    UnipotentLift,
};
use grape_core::attention::{logits_batch, AttentionConfig, Encoder, StreamingCache};
use grape_core::linalg::{self, Mat};
use grape_core::math::{norm, KahanSum};
use grape_core::multiplicative::{
    apply_ms, noncommuting_spectrum, rope_reference, MultiSubspaceMap, ThinCompression,
};
use grape_core::path_integral::{
    bias_row, path_product_check, rms_normalize, LinkFunction, PathBiasRow, ProbeStore,
};
use grape_core::rank2::{
    apply_exp, apply_exp_unchecked, dense_exp_oracle, exp_derivatives, DerivativeParam,
    ExpCoefficients, PlaneGenerator,
};
use grape_core::sampling;
use grape_core::spectral::{
    path_product_report, rank2_generator_spectrum, unipotent_report, PathFactorSeq,
};
use grape_core::tensor_io::Tensor;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Supported fault injections (test hooks for the failure path).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Perturb the f2 Rodrigues coefficient in the oracle-equivalence check.
    F2Perturb,
}

impl Fault {
    pub fn parse(name: &str) -> Option<Fault> {
        match name {
            "f2-perturb" => Some(Fault::F2Perturb),
            _ => None,
        }
    }
}

/// Outcome of one named check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn result(name: &str, residual: f64, tolerance: f64) -> CheckResult {
    CheckResult {
        name: name.into(),
        residual,
        tolerance,
        pass: residual <= tolerance,
    }
}

fn rng_for(seed: u64, name: &str) -> ChaCha8Rng {
    // FNV-1a over the check name keeps per-check streams decoupled.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Simple glob: `*` matches any run of characters; a bare pattern matches as
/// a substring.
pub fn filter_matches(pattern: &str, name: &str) -> bool {
    if !pattern.contains('*') {
        return name.contains(pattern);
    }
    let parts: Vec<&str> = pattern.split('*').collect();
    let mut rest = name;
    for (i, part) in parts.iter().enumerate() {
        if part.is_empty() {
            continue;
        }
        match rest.find(part) {
            Some(pos) => {
                if i == 0 && pos != 0 {
                    return false;
                }
                rest = &rest[pos + part.len()..];
            }
            None => return false,
        }
    }
    if let Some(last) = parts.last() {
        if !last.is_empty() && !pattern.ends_with('*') && !name.ends_with(last) {
            return false;
        }
    }
    true
}

// ── rank-2 checks ───────────────────────────────────────────────────────────

fn rank2_relative_law(seed: u64, _: Option<Fault>) -> CheckResult {
    let name = "rank2-relative-law";
    let mut rng = rng_for(seed, name);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let d = rng.gen_range(2..12);
        let a = sampling::random_vector(&mut rng, d);
        let b = sampling::random_vector(&mut rng, d);
        let g = PlaneGenerator::new(a, b, rng.gen_range(0.1..1.0)).unwrap();
        let (s, t): (f64, f64) = (rng.gen_range(-64.0..64.0), rng.gen_range(-64.0..64.0));
        let x = sampling::random_vector(&mut rng, d);
        let direct = apply_exp(&g, t - s, &x).unwrap();
        let l = g.dense_generator();
        let gs = dense_exp_oracle(&l, s * g.omega()).unwrap();
        let gt = dense_exp_oracle(&l, t * g.omega()).unwrap();
        let via = gs.transpose().matmul(&gt).matvec(&x);
        worst = worst.max(max_abs_diff(&direct, &via));
    }
    result(name, worst, 1e-9)
}

fn rank2_isometry(seed: u64, _: Option<Fault>) -> CheckResult {
    let name = "rank2-isometry";
    let mut rng = rng_for(seed, name);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let d = rng.gen_range(2..33);
        let g = PlaneGenerator::new(
            sampling::random_vector(&mut rng, d),
            sampling::random_vector(&mut rng, d),
            rng.gen_range(0.05..2.0),
        )
        .unwrap();
        let x = sampling::random_vector(&mut rng, d);
        let n: f64 = rng.gen_range(-4096.0..4096.0);
        let y = apply_exp(&g, n, &x).unwrap();
        worst = worst.max((norm(&y) - norm(&x)).abs() / norm(&x).max(1e-300));
    }
    result(name, worst, 1e-10)
}

fn rank2_oracle_equivalence(seed: u64, fault: Option<Fault>) -> CheckResult {
    let name = "rank2-oracle-equivalence";
    let mut rng = rng_for(seed, name);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let d = *[2usize, 4, 8, 64].iter().nth(rng.gen_range(0..4)).unwrap();
        let a = sampling::random_vector(&mut rng, d);
        let b = sampling::random_vector(&mut rng, d);
        let g = PlaneGenerator::gauge_fixed(a, b, rng.gen_range(0.05..1.0)).unwrap();
        let n: f64 = rng.gen_range(-1024.0..1024.0);
        let x = sampling::random_vector(&mut rng, d);
        let fast = match fault {
            Some(Fault::F2Perturb) => {
                let mut coeffs = ExpCoefficients::for_position(&g, n);
                coeffs.f2 += 1e-6;
                apply_exp_unchecked(&g, coeffs, n, &x)
            }
            None => apply_exp(&g, n, &x).unwrap(),
        };
        let dense = dense_exp_oracle(&g.dense_generator(), n * g.omega()).unwrap();
        worst = worst.max(max_abs_diff(&fast, &dense.matvec(&x)));
    }
    result(name, worst, 1e-9)
}

fn rank2_minimal_polynomial(seed: u64, _: Option<Fault>) -> CheckResult {
    let name = "rank2-minimal-polynomial";
    let mut rng = rng_for(seed, name);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let d = rng.gen_range(2..10);
        let g = PlaneGenerator::new(
            sampling::random_vector(&mut rng, d),
            sampling::random_vector(&mut rng, d),
            1.0,
        )
        .unwrap();
        let l = g.dense_generator();
        let l3 = l.matmul(&l).matmul(&l);
        let rhs = l.scale(-g.s() * g.s());
        worst = worst.max(l3.max_abs_diff(&rhs) / rhs.max_abs().max(1.0));
    }
    result(name, worst, 1e-10)
}

fn rank2_spectrum_check(seed: u64, _: Option<Fault>) -> CheckResult {
    let name = "rank2-spectrum";
    let mut rng = rng_for(seed, name);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let d = rng.gen_range(2..16);
        let g = PlaneGenerator::new(
            sampling::random_vector(&mut rng, d),
            sampling::random_vector(&mut rng, d),
            1.0,
        )
        .unwrap();
        let closed = rank2_generator_spectrum(&g);
        let numeric = linalg::eigenvalues(&g.dense_generator()).unwrap();
        worst = worst.max(linalg::spectrum_distance(&closed.eigenvalues, &numeric));
    }
    result(name, worst, 1e-8)
}

fn rank2_gauge_invariance(seed: u64, _: Option<Fault>) -> CheckResult {
    let name = "rank2-gauge-invariance";
    let mut rng = rng_for(seed, name);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let d = rng.gen_range(2..10);
        let a = sampling::random_vector(&mut rng, d);
        let b = sampling::random_vector(&mut rng, d);
        let m = sampling::random_sl2(&mut rng);
        let a2: Vec<f64> = (0..d).map(|k| a[k] * m[0][0] + b[k] * m[1][0]).collect();
        let b2: Vec<f64> = (0..d).map(|k| a[k] * m[0][1] + b[k] * m[1][1]).collect();
        let g1 = PlaneGenerator::new(a, b, 0.6).unwrap();
        let g2 = PlaneGenerator::new(a2, b2, 0.6).unwrap();
        let x = sampling::random_vector(&mut rng, d);
        let n: f64 = rng.gen_range(-16.0..16.0);
        worst = worst.max(max_abs_diff(
            &apply_exp(&g1, n, &x).unwrap(),
            &apply_exp(&g2, n, &x).unwrap(),
        ));
    }
    result(name, worst, 1e-9)
}

fn rank2_derivatives(seed: u64, _: Option<Fault>) -> CheckResult {
    let name = "rank2-derivatives";
    let mut rng = rng_for(seed, name);
    let h = 1e-6;
    let mut worst = 0.0f64;
    for case in 0..100 {
        let d = rng.gen_range(3..8);
        let a = sampling::random_vector(&mut rng, d);
        let b = sampling::random_vector(&mut rng, d);
        let omega: f64 = rng.gen_range(0.2..1.5);
        let n: f64 = rng.gen_range(-5.0..5.0);
        let x = sampling::random_vector(&mut rng, d);
        let wrt = match case % 3 {
            0 => DerivativeParam::Omega,
            1 => DerivativeParam::AEntry(rng.gen_range(0..d)),
            _ => DerivativeParam::BEntry(rng.gen_range(0..d)),
        };
        let g = PlaneGenerator::new(a.clone(), b.clone(), omega).unwrap();
        let analytic = exp_derivatives(&g, n, &x, wrt).unwrap();
        let eval = |da: f64, db: f64, dw: f64, idx: usize| {
            let mut aa = a.clone();
            let mut bb = b.clone();
            match wrt {
                DerivativeParam::AEntry(_) => aa[idx] += da,
                DerivativeParam::BEntry(_) => bb[idx] += db,
                DerivativeParam::Omega => {}
            }
            apply_exp(&PlaneGenerator::new(aa, bb, omega + dw).unwrap(), n, &x).unwrap()
        };
        let (plus, minus) = match wrt {
            DerivativeParam::Omega => (eval(0.0, 0.0, h, 0), eval(0.0, 0.0, -h, 0)),
            DerivativeParam::AEntry(i) => (eval(h, 0.0, 0.0, i), eval(-h, 0.0, 0.0, i)),
            DerivativeParam::BEntry(i) => (eval(0.0, h, 0.0, i), eval(0.0, -h, 0.0, i)),
        };
        let fd: Vec<f64> = plus
            .iter()
            .zip(&minus)
            .map(|(p, m)| (p - m) / (2.0 * h))
            .collect();
        worst = worst.max(max_abs_diff(&analytic, &fd) / norm(&fd).max(1e-8));
    }
    result(name, worst, 1e-5)
}

// ── multiplicative checks ───────────────────────────────────────────────────

fn ms_relative_law(seed: u64, _: Option<Fault>) -> CheckResult {
    let name = "ms-relative-law";
    let mut rng = rng_for(seed, name);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let d = 2 * rng.gen_range(1..9);
        let map = MultiSubspaceMap::log_uniform(d, 1000.0).unwrap();
        let (s, t): (f64, f64) = (rng.gen_range(-64.0..64.0), rng.gen_range(-64.0..64.0));
        let x = sampling::random_vector(&mut rng, d);
        let direct = apply_ms(&map, t - s, &x).unwrap();
        let via = apply_ms(&map, -s, &apply_ms(&map, t, &x).unwrap()).unwrap();
        worst = worst.max(max_abs_diff(&direct, &via));
    }
    result(name, worst, 1e-9)
}

fn ms_rope_equivalence(seed: u64, _: Option<Fault>) -> CheckResult {
    let name = "ms-rope-equivalence";
    let mut rng = rng_for(seed, name);
    let mut worst = 0.0f64;
    for d in [4usize, 64, 128] {
        let map = MultiSubspaceMap::log_uniform(d, 10_000.0).unwrap();
        for _ in 0..100 {
            let n = rng.gen_range(0..=4096) as f64;
            let x = sampling::random_vector(&mut rng, d);
            worst = worst.max(max_abs_diff(
                &apply_ms(&map, n, &x).unwrap(),
                &rope_reference(d, 10_000.0, n, &x).unwrap(),
            ));
        }
    }
    result(name, worst, 1e-12)
}

fn ms_isometry(seed: u64, _: Option<Fault>) -> CheckResult {
    let name = "ms-isometry";
    let mut rng = rng_for(seed, name);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let d = 2 * rng.gen_range(1..17);
        let map = MultiSubspaceMap::log_uniform(d, 10_000.0).unwrap();
        let x = sampling::random_vector(&mut rng, d);
        let y = apply_ms(&map, rng.gen_range(-4096.0..4096.0), &x).unwrap();
        worst = worst.max((norm(&y) - norm(&x)).abs() / norm(&x).max(1e-300));
    }
    result(name, worst, 1e-10)
}

fn ms_spectrum_preservation(seed: u64, _: Option<Fault>) -> CheckResult {
    let name = "ms-spectrum-preservation";
    let mut rng = rng_for(seed, name);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let r = 2 * rng.gen_range(1..5);
        let d = r + rng.gen_range(0..(33 - r));
        let e = sampling::random_orthonormal_columns(&mut rng, d, r);
        let l_r = sampling::random_skew(&mut rng, r);
        let tc = ThinCompression::new(e, l_r).unwrap();
        let n: f64 = rng.gen_range(-4.0..4.0);
        let closed = noncommuting_spectrum(&tc, n);
        let dense = dense_exp_oracle(&tc.dense_generator(), n).unwrap();
        let numeric = linalg::eigenvalues(&dense).unwrap();
        worst = worst.max(linalg::spectrum_distance(&closed, &numeric));
    }
    result(name, worst, 1e-7)
}

fn ms_basis_conjugation(seed: u64, _: Option<Fault>) -> CheckResult {
    let name = "ms-basis-conjugation";
    let mut rng = rng_for(seed, name);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let d = 2 * rng.gen_range(1..9);
        let basis = sampling::random_orthogonal(&mut rng, d);
        let canonical = MultiSubspaceMap::log_uniform(d, 100.0).unwrap();
        let conj = canonical.clone().with_basis(basis.clone()).unwrap();
        let x = sampling::random_vector(&mut rng, d);
        let n: f64 = rng.gen_range(-32.0..32.0);
        let lhs = apply_ms(&conj, n, &x).unwrap();
        let rhs = basis.matvec(&apply_ms(&canonical, n, &basis.transpose().matvec(&x)).unwrap());
        worst = worst.max(max_abs_diff(&lhs, &rhs));
    }
    result(name, worst, 1e-10)
}

// ── additive checks ─────────────────────────────────────────────────────────

fn random_lift(rng: &mut ChaCha8Rng, d: usize, kind: usize) -> UnipotentLift {
    match kind % 3 {
        0 => UnipotentLift::alibi(d, rng.gen_range(0.0..1.5)).unwrap(),
        1 => UnipotentLift::gated(
            d,
            sampling::random_vector(rng, d),
            sampling::random_vector(rng, d),
            rng.gen_range(0.1..1.5),
        )
        .unwrap(),
        _ => {
            UnipotentLift::shift_vector(d, sampling::random_vector(rng, d), rng.gen_range(0.1..1.5))
                .unwrap()
        }
    }
}

fn add_relativity(seed: u64, _: Option<Fault>) -> CheckResult {
    let name = "add-relativity";
    let mut rng = rng_for(seed, name);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let d = rng.gen_range(2..10);
        let lift = random_lift(&mut rng, d, case);
        let q = sampling::random_vector(&mut rng, d);
        let k = sampling::random_vector(&mut rng, d);
        let (i, j) = (rng.gen_range(-512i64..512), rng.gen_range(-512i64..512));
        let c = rng.gen_range(-4096i64..4096);
        let base = additive_score(&lift, &q, &k, i, j).unwrap();
        let shifted = additive_score(&lift, &q, &k, i + c, j + c).unwrap();
        worst = worst.max((base - shifted).abs());
    }
    result(name, worst, 0.0)
}

fn add_monotone_penalty(seed: u64, _: Option<Fault>) -> CheckResult {
    let name = "add-monotone-penalty";
    let mut rng = rng_for(seed, name);
    let mut worst = 0.0f64;
    for case in 0..50 {
        let d = rng.gen_range(2..8);
        let lift = random_lift(&mut rng, d, case % 2); // alibi and gated only
        let q = sampling::random_vector(&mut rng, d);
        let k = sampling::random_vector(&mut rng, d);
        let i = 64i64;
        let mut prev = f64::INFINITY;
        for j in (0..=i).rev() {
            let bias = additive_bias(&lift, &q, &k, i, j).unwrap();
            if bias > prev {
                worst = worst.max(bias - prev);
            }
            if bias > 0.0 {
                worst = worst.max(bias);
            }
            prev = bias;
        }
    }
    result(name, worst, 0.0)
}

fn add_unipotent_structure(seed: u64, _: Option<Fault>) -> CheckResult {
    let name = "add-unipotent-structure";
    let mut rng = rng_for(seed, name);
    let mut worst = 0.0f64;
    for case in 0..50 {
        let d = rng.gen_range(2..8);
        let lift = random_lift(&mut rng, d, case);
        let (s1, s2): (f64, f64) = (rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
        let ld = lift.lift_dim();
        let h1 = unipotent_matrix(&lift, s1);
        worst = worst.max(
            h1.matmul(&unipotent_matrix(&lift, -s1))
                .max_abs_diff(&Mat::identity(ld)),
        );
        worst = worst.max(
            h1.matmul(&unipotent_matrix(&lift, s2))
                .max_abs_diff(&unipotent_matrix(&lift, s1 + s2)),
        );
        worst = worst.max((h1.det() - 1.0).abs());
    }
    result(name, worst, 1e-12)
}

fn add_inverse_transpose(seed: u64, _: Option<Fault>) -> CheckResult {
    let name = "add-inverse-transpose";
    let mut rng = rng_for(seed, name);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let d = rng.gen_range(2..10);
        let lift = random_lift(&mut rng, d, case);
        let q = sampling::random_vector(&mut rng, d);
        let k = sampling::random_vector(&mut rng, d);
        let (i, j) = (rng.gen_range(-256i64..256), rng.gen_range(-256i64..256));
        let fast = additive_score(&lift, &q, &k, i, j).unwrap();
        let dense = additive_score_dense(&lift, &q, &k, i, j).unwrap();
        worst = worst.max((fast - dense).abs());
    }
    result(name, worst, 1e-12)
}

fn add_fox_consistency(seed: u64, _: Option<Fault>) -> CheckResult {
    let name = "add-fox-consistency";
    let mut rng = rng_for(seed, name);
    let mut worst = 0.0f64;
    let l = 256;
    let f: Vec<f64> = (0..l).map(|_| rng.gen_range(0.6..1.0)).collect();
    let gates = ForgetGates::new(f.clone()).unwrap();
    let log_f: Vec<f64> = f.iter().map(|x| x.ln()).collect();
    for _ in 0..100 {
        let t = rng.gen_range(0..l);
        let j = rng.gen_range(0..=t);
        let row = PathBiasRow::from_psi(t, log_f[..=t].to_vec()).unwrap();
        let a = fox_bias(&gates, t, j).unwrap();
        let b = row.bias(j).unwrap();
        worst = worst.max((a - b).abs());
    }
    result(name, worst, 1e-12)
}

// ── path-integral checks ────────────────────────────────────────────────────

fn probe_store(rng: &mut ChaCha8Rng, d: usize, len: usize) -> ProbeStore {
    let mut store = ProbeStore::new(d, 1.0, LinkFunction::LogSigmoid).unwrap();
    for _ in 0..len {
        let v = sampling::random_vector(rng, d);
        store.push_probe(rms_normalize(&v)).unwrap();
    }
    store
}

fn pi_nonpositivity(seed: u64, _: Option<Fault>) -> CheckResult {
    let name = "pi-nonpositivity";
    let mut rng = rng_for(seed, name);
    let store = probe_store(&mut rng, 8, 64);
    let mut worst = 0.0f64;
    for t in 0..64 {
        let row = bias_row(&store, t).unwrap();
        worst = worst.max(row.bias(t).unwrap().abs());
        for j in 0..=t {
            worst = worst.max(row.bias(j).unwrap().max(0.0));
        }
    }
    result(name, worst, 0.0)
}

fn pi_rowwise_semigroup(seed: u64, _: Option<Fault>) -> CheckResult {
    let name = "pi-rowwise-semigroup";
    let mut rng = rng_for(seed, name);
    let store = probe_store(&mut rng, 6, 48);
    let t = 47;
    let row = bias_row(&store, t).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let j = rng.gen_range(0..=t);
        let m = rng.gen_range(j..=t);
        let mut acc = KahanSum::new();
        acc.add(row.bias(m).unwrap());
        for l in (j + 1)..=m {
            acc.add(
                grape_core::path_integral::edge_potential(&store, t, l).unwrap_or_else(|_| {
                    // l == t is the self-link carried by the row itself.
                    row.psi()[l]
                }),
            );
        }
        worst = worst.max((row.bias(j).unwrap() - acc.value()).abs());
    }
    result(name, worst, 1e-12)
}

fn pi_endpoint_independent(seed: u64, _: Option<Fault>) -> CheckResult {
    let name = "pi-endpoint-independent";
    let mut rng = rng_for(seed, name);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let t = rng.gen_range(1..64);
        let theta: f64 = rng.gen_range(0.01..2.0);
        let row = PathBiasRow::from_psi(t, vec![-theta; t + 1]).unwrap();
        for j in 0..=t {
            let want = -theta * (t - j) as f64;
            worst = worst.max((row.bias(j).unwrap() - want).abs());
        }
        let omega = vec![1.0; t];
        let phase = grape_core::path_integral::phase_modulated_bias(&omega, theta, t, 0).unwrap();
        worst = worst.max((phase - (-theta * t as f64)).abs());
    }
    result(name, worst, 1e-10)
}

fn pi_streaming_equivalence(seed: u64, _: Option<Fault>) -> CheckResult {
    let name = "pi-streaming-equivalence";
    let mut rng = rng_for(seed, name);
    let d = 6;
    let probes: Vec<Vec<f64>> = (0..32)
        .map(|_| rms_normalize(&sampling::random_vector(&mut rng, d)))
        .collect();
    let mut batch = ProbeStore::new(d, 1.0, LinkFunction::LogSigmoid).unwrap();
    for p in &probes {
        batch.push_probe(p.clone()).unwrap();
    }
    let mut streaming = ProbeStore::new(d, 1.0, LinkFunction::LogSigmoid).unwrap();
    let mut worst = 0.0f64;
    for (t, p) in probes.iter().enumerate() {
        streaming.push_probe(p.clone()).unwrap();
        let inc = bias_row(&streaming, t).unwrap();
        let full = bias_row(&batch, t).unwrap();
        for j in 0..=t {
            worst = worst.max((inc.bias(j).unwrap() - full.bias(j).unwrap()).abs());
        }
    }
    result(name, worst, 1e-12)
}

fn pi_unipotent_collapse(seed: u64, _: Option<Fault>) -> CheckResult {
    let name = "pi-unipotent-collapse";
    let mut rng = rng_for(seed, name);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let len = rng.gen_range(1..128);
        let psi: Vec<f64> = (0..len).map(|_| -rng.gen_range(0.0..2.0)).collect();
        match path_product_check(&psi, 4) {
            Ok(_) => {}
            Err(_) => worst = worst.max(1.0),
        }
    }
    result(name, worst, 0.0)
}

// ── attention checks ────────────────────────────────────────────────────────

fn demo_tensors(rng: &mut ChaCha8Rng, l: usize, h: usize, d: usize) -> (Tensor, Tensor, Tensor) {
    let mut make = || {
        Tensor::new(
            vec![l, h, d],
            (0..l * h * d).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        )
        .unwrap()
    };
    (make(), make(), make())
}

fn attn_encoders(rng: &mut ChaCha8Rng, d: usize) -> Vec<Encoder> {
    vec![
        Encoder::None,
        Encoder::Multiplicative(MultiSubspaceMap::log_uniform(d, 10_000.0).unwrap()),
        Encoder::Additive(UnipotentLift::alibi(d, 0.25).unwrap()),
        Encoder::Fox {
            w_f: sampling::random_vector(rng, d),
            b_f: 1.5,
        },
        Encoder::PathIntegral {
            alpha: 1.0,
            projection: None,
        },
        Encoder::Joint {
            map: MultiSubspaceMap::log_uniform(d, 100.0).unwrap(),
            v: sampling::random_vector(rng, d),
            u: sampling::random_vector(rng, d),
            omega: 0.4,
        },
    ]
}

fn attn_origin_invariance(seed: u64, _: Option<Fault>) -> CheckResult {
    let name = "attn-origin-invariance";
    let mut rng = rng_for(seed, name);
    let (l, d) = (12, 8);
    let encoders = attn_encoders(&mut rng, d);
    let h = encoders.len();
    let cfg = AttentionConfig::new(d, 64, encoders).unwrap();
    let (q, k, _v) = demo_tensors(&mut rng, l, h, d);
    let base: Vec<f64> = (0..l).map(|i| i as f64).collect();
    let shifted: Vec<f64> = base.iter().map(|p| p + 129.0).collect();
    let l0 = logits_batch(&cfg, &q, &k, &base).unwrap();
    let l1 = logits_batch(&cfg, &q, &k, &shifted).unwrap();
    let mut worst = 0.0f64;
    for t in 0..l {
        for j in 0..=t {
            for hh in 0..h {
                worst = worst.max((l0.at(&[t, j, hh]) - l1.at(&[t, j, hh])).abs());
            }
        }
    }
    result(name, worst, 1e-10)
}

fn attn_stream_batch(seed: u64, _: Option<Fault>) -> CheckResult {
    let name = "attn-stream-batch";
    let mut rng = rng_for(seed, name);
    let (l, d) = (24, 8);
    let encoders = attn_encoders(&mut rng, d);
    let h = encoders.len();
    let cfg = AttentionConfig::new(d, 64, encoders).unwrap();
    let (q, k, v) = demo_tensors(&mut rng, l, h, d);
    let positions: Vec<f64> = (0..l).map(|i| i as f64).collect();
    let batch = logits_batch(&cfg, &q, &k, &positions).unwrap();
    let mut cache = StreamingCache::new(&cfg).unwrap();
    let mut worst = 0.0f64;
    for t in 0..l {
        let qt = Tensor::new(vec![h, d], q.slice(&[t]).to_vec()).unwrap();
        let kt = Tensor::new(vec![h, d], k.slice(&[t]).to_vec()).unwrap();
        let vt = Tensor::new(vec![h, d], v.slice(&[t]).to_vec()).unwrap();
        let step = cache.step(&qt, &kt, &vt, positions[t]).unwrap();
        for hh in 0..h {
            for j in 0..=t {
                worst = worst.max((batch.at(&[t, j, hh]) - step.logits[hh][j]).abs());
            }
        }
    }
    result(name, worst, 1e-12)
}

fn attn_cache_immutability(seed: u64, _: Option<Fault>) -> CheckResult {
    let name = "attn-cache-immutability";
    let mut rng = rng_for(seed, name);
    let (l, d) = (16, 8);
    let encoders = attn_encoders(&mut rng, d);
    let h = encoders.len();
    let cfg = AttentionConfig::new(d, 32, encoders).unwrap();
    let (q, k, v) = demo_tensors(&mut rng, l, h, d);
    let mut cache = StreamingCache::new(&cfg).unwrap();
    let mut fingerprints = Vec::new();
    for t in 0..l {
        let qt = Tensor::new(vec![h, d], q.slice(&[t]).to_vec()).unwrap();
        let kt = Tensor::new(vec![h, d], k.slice(&[t]).to_vec()).unwrap();
        let vt = Tensor::new(vec![h, d], v.slice(&[t]).to_vec()).unwrap();
        cache.step(&qt, &kt, &vt, t as f64).unwrap();
        fingerprints.push(cache.key_fingerprint());
    }
    let last = fingerprints.last().unwrap();
    let mut worst = 0.0f64;
    for fp in &fingerprints {
        for (hh, keys) in fp.iter().enumerate() {
            if last[hh][..keys.len()] != keys[..] {
                worst = 1.0;
            }
        }
    }
    result(name, worst, 0.0)
}

// ── spectral checks ─────────────────────────────────────────────────────────

fn spectral_unipotent_sigma(seed: u64, _: Option<Fault>) -> CheckResult {
    let name = "spectral-unipotent-sigma";
    let mut rng = rng_for(seed, name);
    let mut worst = 0.0f64;
    for case in 0..30 {
        let d = rng.gen_range(2..8);
        let lift = random_lift(&mut rng, d, case);
        let s: f64 = rng.gen_range(-4.0..4.0);
        let rep = unipotent_report(&lift, s);
        let h = unipotent_matrix(&lift, s);
        let dense_sv = linalg::singular_values(&h).unwrap();
        for (a, b) in rep.singular_values.iter().zip(&dense_sv) {
            worst = worst.max((a - b).abs());
        }
        let eigs = linalg::eigenvalues(&h).unwrap();
        let ones = vec![Complex64::new(1.0, 0.0); h.rows()];
        worst = worst.max(linalg::spectrum_distance(&ones, &eigs));
    }
    result(name, worst, 1e-7)
}

fn spectral_path_contraction(seed: u64, _: Option<Fault>) -> CheckResult {
    let name = "spectral-path-contraction";
    let mut rng = rng_for(seed, name);
    let mut worst = 0.0f64;
    for trial in 0..10 {
        let d = rng.gen_range(2..8);
        let len = rng.gen_range(1..16);
        let mut betas: Vec<f64> = (0..len).map(|_| rng.gen_range(0.05..1.95)).collect();
        if trial % 3 == 0 {
            betas[len / 2] = 1.0;
        }
        let ws: Vec<Vec<f64>> = (0..len)
            .map(|_| sampling::random_unit_vector(&mut rng, d))
            .collect();
        let seq = PathFactorSeq::new(betas, ws).unwrap();
        match path_product_report(&seq) {
            Ok(rep) => {
                worst = worst.max((rep.singular_values[0] - 1.0).max(0.0));
                worst = worst.max((rep.determinant - seq.det_closed_form()).abs());
            }
            Err(_) => worst = worst.max(1.0),
        }
    }
    result(name, worst, 1e-10)
}

fn spectral_volume(seed: u64, _: Option<Fault>) -> CheckResult {
    let name = "spectral-volume";
    let mut rng = rng_for(seed, name);
    let mut worst = 0.0f64;
    for case in 0..20 {
        // det(exp(n L)) = 1 for the rotation family.
        let d = 2 * rng.gen_range(1..5);
        let map = MultiSubspaceMap::log_uniform(d, 100.0).unwrap();
        let g = dense_exp_oracle(&map.dense_generator(), rng.gen_range(-8.0..8.0)).unwrap();
        worst = worst.max((g.det() - 1.0).abs());
        // det(unipotent) = 1.
        let lift = random_lift(&mut rng, d, case);
        worst = worst.max((unipotent_matrix(&lift, rng.gen_range(-4.0..4.0)).det() - 1.0).abs());
    }
    result(name, worst, 1e-9)
}

// ── registry ────────────────────────────────────────────────────────────────

type CheckFn = fn(u64, Option<Fault>) -> CheckResult;

/// All checks in a stable order.
pub fn registry() -> Vec<(&'static str, CheckFn)> {
    vec![
        ("rank2-relative-law", rank2_relative_law),
        ("rank2-isometry", rank2_isometry),
        ("rank2-oracle-equivalence", rank2_oracle_equivalence),
        ("rank2-minimal-polynomial", rank2_minimal_polynomial),
        ("rank2-spectrum", rank2_spectrum_check),
        ("rank2-gauge-invariance", rank2_gauge_invariance),
        ("rank2-derivatives", rank2_derivatives),
        ("ms-relative-law", ms_relative_law),
        ("ms-rope-equivalence", ms_rope_equivalence),
        ("ms-isometry", ms_isometry),
        ("ms-spectrum-preservation", ms_spectrum_preservation),
        ("ms-basis-conjugation", ms_basis_conjugation),
        ("add-relativity", add_relativity),
        ("add-monotone-penalty", add_monotone_penalty),
        ("add-unipotent-structure", add_unipotent_structure),
        ("add-inverse-transpose", add_inverse_transpose),
        ("add-fox-consistency", add_fox_consistency),
        ("pi-nonpositivity", pi_nonpositivity),
        ("pi-rowwise-semigroup", pi_rowwise_semigroup),
        ("pi-endpoint-independent", pi_endpoint_independent),
        ("pi-streaming-equivalence", pi_streaming_equivalence),
        ("pi-unipotent-collapse", pi_unipotent_collapse),
        ("attn-origin-invariance", attn_origin_invariance),
        ("attn-stream-batch", attn_stream_batch),
        ("attn-cache-immutability", attn_cache_immutability),
        ("spectral-rank2-closed-forms", rank2_spectrum_check_spectral),
        ("spectral-unipotent-sigma", spectral_unipotent_sigma),
        ("spectral-path-contraction", spectral_path_contraction),
        ("spectral-volume", spectral_volume),
    ]
}

fn rank2_spectrum_check_spectral(seed: u64, _: Option<Fault>) -> CheckResult {
    let name = "spectral-rank2-closed-forms";
    let mut rng = rng_for(seed, name);
    let mut worst = 0.0f64;
    for _ in 0..15 {
        let d = rng.gen_range(2..24);
        let g = PlaneGenerator::new(
            sampling::random_vector(&mut rng, d),
            sampling::random_vector(&mut rng, d),
            rng.gen_range(0.1..1.5),
        )
        .unwrap();
        let gen_rep = rank2_generator_spectrum(&g);
        let numeric = linalg::eigenvalues(&g.dense_generator()).unwrap();
        worst = worst.max(linalg::spectrum_distance(&gen_rep.eigenvalues, &numeric));

        let n: f64 = rng.gen_range(-8.0..8.0);
        let exp_rep = grape_core::spectral::rank2_spectrum(&g, n);
        let dense = dense_exp_oracle(&g.dense_generator(), n * g.omega()).unwrap();
        let numeric_exp = linalg::eigenvalues(&dense).unwrap();
        worst = worst.max(linalg::spectrum_distance(
            &exp_rep.eigenvalues,
            &numeric_exp,
        ));
        for sv in linalg::singular_values(&dense).unwrap() {
            worst = worst.max((sv - 1.0).abs());
        }
    }
    result(name, worst, 1e-7)
}

/// Run all checks whose name matches `filter` (all of them when `None`).
pub fn run_checks(seed: u64, filter: Option<&str>, fault: Option<Fault>) -> Vec<CheckResult> {
    registry()
        .into_iter()
        .filter(|(name, _)| filter.map_or(true, |f| filter_matches(f, name)))
        .map(|(_, f)| f(seed, fault))
        .collect()
}
