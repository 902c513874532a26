//! Acceptance criteria, one test each. Every test prints a single
//! `criterion N: PASS|FAIL ...` line before asserting.

mod common;

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use carkov::markov::diffusion_from_roots;
use carkov::simulate::exact::sample_exact_stream;
use carkov::simulate::{sample_euler, sample_exact, SpectralOptions, SpectralSampler};
use carkov::validate::{
    check_empirical_covariance, check_ensemble_covariance, check_lyapunov, check_markov_factorization,
    check_ode_annihilation, check_oracle, check_partial_correlation, scalar_partial_correlation, STAT_BAND,
};
use carkov::{assemble, RootSpec};
use common::{k2_model, rel, spec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CLOSED_FORM_TOL: f64 = 1e-8;
const ORACLE_TOL: f64 = 1e-6;

fn report(n: u32, title: &str, passed: bool, detail: String, elapsed: Duration) {
    println!(
        "criterion {n}: {} {title} ({detail}; {:.2} s)",
        if passed { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
}

/// The random-spec population shared by criteria 3 and 5.
fn population(seed: u64, count: usize, max_k: usize) -> Vec<RootSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let k = rng.random_range(0..=max_k);
            common::random_spec(&mut rng, k)
        })
        .collect()
}

#[test]
fn criterion_1_k0_golden() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for alpha in [0.5, 1.0, 2.0] {
        let an = assemble(&spec(&[(0.0, alpha)], 1.0)).unwrap();
        let amp = PI * alpha;
        for u in [0.0, 0.25, 1.0, 3.0, 10.0] {
            worst = worst.max(rel(an.covariance.eval(0, u).unwrap(), amp * (-alpha * u).exp()));
        }
        worst = worst.max(rel(an.ito.drift()[0], -alpha));
        worst = worst.max(rel(an.ito.b_squared(), 2.0 * amp * alpha));
    }
    let elapsed = start.elapsed();
    let passed = worst <= CLOSED_FORM_TOL && elapsed < Duration::from_secs(1);
    report(1, "k=0 golden case", passed, format!("worst relative error {worst:.2e}"), elapsed);
    assert!(passed);
}

#[test]
fn criterion_2_k1_confluent() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for a in [1.0, 2.0] {
        let an = assemble(&spec(&[(0.0, a), (0.0, a)], 1.0)).unwrap();
        let r0 = an.covariance.variance();
        for u in [0.0, 0.5, 1.0, 3.0, 8.0] {
            let shape = (1.0 + a * u) * (-a * u).exp();
            worst = worst.max(rel(an.covariance.eval(0, u).unwrap(), r0 * shape));
        }
        worst = worst.max(rel(r0, PI * a / 2.0));
        worst = worst.max(rel(an.ito.drift()[0], -a * a));
        worst = worst.max(rel(an.ito.drift()[1], -2.0 * a));
        worst = worst.max(rel(an.ito.b_squared(), 2.0 * PI * a.powi(4)));
    }
    let elapsed = start.elapsed();
    let passed = worst <= CLOSED_FORM_TOL && elapsed < Duration::from_secs(1);
    report(2, "k=1 confluent case", passed, format!("worst relative error {worst:.2e}"), elapsed);
    assert!(passed);
}

#[test]
fn criterion_3_characteristic_consistency() {
    let start = Instant::now();
    let specs = population(3, 100, 4);
    let mut worst_drift = 0.0f64;
    let mut worst_b = 0.0f64;
    for s in &specs {
        let an = assemble(s).unwrap();
        worst_drift = worst_drift.max(an.ito.char_poly().max_relative_gap(&s.ode_char_poly()));
        let c2 = s.scale() * s.scale();
        let prod: f64 = s.roots().iter().map(|z| z.norm_sqr()).product();
        worst_b = worst_b.max(rel(an.ito.b_squared() * c2, 2.0 * PI * prod));
        worst_b = worst_b.max(rel(an.ito.b_squared(), diffusion_from_roots(s)));
    }
    let elapsed = start.elapsed();
    let passed =
        worst_drift <= CLOSED_FORM_TOL && worst_b <= CLOSED_FORM_TOL && elapsed < Duration::from_secs(30);
    report(
        3,
        "characteristic consistency",
        passed,
        format!("{} specs, drift gap {worst_drift:.2e}, b^2 c^2 gap {worst_b:.2e}", specs.len()),
        elapsed,
    );
    assert!(passed);
}

#[test]
fn criterion_4_oracle_equivalence() {
    let start = Instant::now();
    let specs = population(4, 50, 3);
    let grid = [0.0, 0.5, 1.0, 2.0, 5.0];
    let mut worst = 0.0f64;
    for s in &specs {
        let cov = carkov::CovarianceModel::residue_expansion(s).unwrap();
        worst = worst.max(check_oracle(s, &cov, &grid).unwrap().statistic);
    }
    let elapsed = start.elapsed();
    let passed = worst <= ORACLE_TOL && elapsed < Duration::from_secs(60);
    report(4, "oracle equivalence", passed, format!("{} specs, worst {worst:.2e}", specs.len()), elapsed);
    assert!(passed);
}

#[test]
fn criterion_5_identity_suite() {
    let start = Instant::now();
    let specs = population(3, 100, 4);
    let grid = [0.1, 0.5, 1.0, 2.0];
    let (mut fact, mut ann, mut lyap) = (0.0f64, 0.0f64, 0.0f64);
    for s in &specs {
        let an = assemble(s).unwrap();
        fact = fact.max(check_markov_factorization(&an.covariance, &an.moments, &grid, &grid).unwrap().statistic);
        ann = ann.max(check_ode_annihilation(s, &an.covariance, &grid).unwrap().statistic);
        lyap = lyap.max(check_lyapunov(&an.ito, &an.law).statistic);
    }
    let elapsed = start.elapsed();
    let passed = fact.max(ann).max(lyap) <= CLOSED_FORM_TOL;
    report(
        5,
        "identity suite",
        passed,
        format!("factorization {fact:.2e}, annihilation {ann:.2e}, Lyapunov {lyap:.2e}"),
        elapsed,
    );
    assert!(passed);
}

#[test]
fn criterion_6_statistical_agreement() {
    let start = Instant::now();
    let s = k2_model();
    let an = assemble(&s).unwrap();
    let lags = [0.0, 0.5, 1.0, 2.0];
    let seed = 6;

    let exact = sample_exact(&an.ito, &an.law, 0.01, 1_000_000, seed).unwrap();
    let exact = check_empirical_covariance(&exact, &an.covariance, &lags).unwrap();
    let euler = sample_euler(&an.ito, &an.law, 1e-3, 1_000_000, seed).unwrap();
    let euler = check_empirical_covariance(&euler, &an.covariance, &lags).unwrap();
    let sampler = SpectralSampler::new(&s, 0.5, 5, SpectralOptions::default()).unwrap();
    let paths = sampler.ensemble(seed, 10_000).unwrap();
    let spectral = check_ensemble_covariance(&paths, &an.covariance, &lags).unwrap();

    let elapsed = start.elapsed();
    for r in [&exact, &euler, &spectral] {
        println!("  {r}");
    }
    let passed = exact.passed && euler.passed && spectral.passed && elapsed < Duration::from_secs(300);
    report(
        6,
        "statistical agreement",
        passed,
        format!(
            "worst z: exact {:.2}, euler {:.2}, spectral {:.2} (band {STAT_BAND})",
            exact.statistic, euler.statistic, spectral.statistic
        ),
        elapsed,
    );
    assert!(passed);
}

#[test]
fn criterion_7_markov_property() {
    let start = Instant::now();
    let mut passed = true;
    let mut parts = Vec::new();
    for (k, s) in [(1usize, spec(&[(0.0, 1.0), (0.0, 1.0)], 1.0)), (2, k2_model())] {
        let an = assemble(&s).unwrap();
        let h = [0.1, 0.2, 0.3, 0.5, 0.75, 1.0]
            .into_iter()
            .max_by(|a, b| {
                scalar_partial_correlation(&an.covariance, *a)
                    .abs()
                    .total_cmp(&scalar_partial_correlation(&an.covariance, *b).abs())
            })
            .unwrap();
        let paths: Vec<_> =
            (0..1000).map(|i| sample_exact_stream(&an.ito, &an.law, h, 2, 7, i).unwrap()).collect();
        let rep = check_partial_correlation(&paths, k, 0, 1, 2).unwrap();
        println!("  k={k} h={h}: {}", rep.vector);
        println!("  k={k} h={h}: {}", rep.scalar);
        passed &= rep.vector.passed && !rep.scalar.passed;
        parts.push(format!("k={k}: given Z {:.2}, given Y {:.2}", rep.vector.statistic, rep.scalar.statistic));
    }
    let elapsed = start.elapsed();
    passed &= elapsed < Duration::from_secs(120);
    report(7, "Markov property test", passed, parts.join("; "), elapsed);
    assert!(passed);
}

#[test]
fn criterion_8_determinism() {
    let start = Instant::now();
    let model = concat!(env!("CARGO_MANIFEST_DIR"), "/models/k2.json");
    let dir = tempfile::tempdir().unwrap();
    let mut passed = true;
    for method in ["exact", "euler", "spectral"] {
        let mut payloads = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("{method}-{run}"));
            let status = Command::new(env!("CARGO_BIN_EXE_carkov"))
                .args(["simulate", "--model", model, "--method", method, "--dt", "0.001", "--steps", "2000"])
                .args(["--seed", "42", "--out"])
                .arg(&out)
                .status()
                .unwrap();
            assert!(status.success(), "{method} run {run} failed");
            payloads.push(std::fs::read(out.join("path.csv")).unwrap());
        }
        passed &= payloads[0] == payloads[1] && !payloads[0].is_empty();
    }
    let elapsed = start.elapsed();
    report(8, "determinism", passed, "exact, euler, spectral CSVs byte-identical".into(), elapsed);
    assert!(passed);
}
