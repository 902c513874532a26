//! Executable checks of the identities tying the three descriptions
//! together, plus statistical checks on sample paths.
//!
//! Every check produces a [`CheckReport`] whose `passed` flag is exactly
//! `statistic <= threshold`.

pub mod stats;

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covariance::{quadrature_r, CovarianceModel, SpectralMoments};
use crate::error::{Error, Result};
use crate::markov::{self, assemble_from_covariance, ItoSystem, StationaryLaw};
use crate::model::{RealPolynomial, RootSpec};
use crate::simulate::exact::sample_exact_stream;
use crate::simulate::{sample_euler, sample_exact, SamplePath, SpectralOptions, SpectralSampler};

/// Threshold for closed-form identities, relative to `r(0)` or `||Sigma||`.
pub const IDENTITY_TOL: f64 = 1e-8;
/// Relative tolerance between residue and quadrature evaluations.
pub const ORACLE_TOL: f64 = 1e-6;
/// Normal-approximation band for statistical checks, in standard errors.
pub const STAT_BAND: f64 = 4.0;
/// Batch length for standard errors, in correlation times `1 / min im(zeta)`.
pub const BLOCK_CORRELATION_TIMES: f64 = 10.0;
/// Minimum effective sample size (path length over correlation time).
pub const MIN_ESS: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub statistic: f64,
    pub threshold: f64,
    pub detail: String,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, statistic: f64, threshold: f64, detail: impl Into<String>) -> Self {
        CheckReport {
            name: name.into(),
            passed: statistic <= threshold,
            statistic,
            threshold,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<4} {:<34} {:>12.4e} <= {:<10.3e} {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.statistic,
            self.threshold,
            self.detail
        )
    }
}

/// `max |r(u+v) - sum_j alpha_j(u) r^(j)(v)| / r(0)` over the grid.
pub fn check_markov_factorization(
    cov: &CovarianceModel,
    moments: &SpectralMoments,
    u_grid: &[f64],
    v_grid: &[f64],
) -> Result<CheckReport> {
    if u_grid.iter().chain(v_grid).any(|&x| !(x > 0.0)) {
        return Err(Error::InvalidArgument("factorization grids must be strictly positive".into()));
    }
    let r0 = cov.variance();
    let mut worst = 0.0f64;
    for &u in u_grid {
        let alpha = cov.alpha_coeffs(moments, u)?;
        for &v in v_grid {
            let lhs = cov.value_right(0, u + v);
            let rhs: f64 = alpha.iter().enumerate().map(|(j, a)| a * cov.value_right(j, v)).sum();
            worst = worst.max((lhs - rhs).abs() / r0);
        }
    }
    Ok(CheckReport::new(
        "markov_factorization",
        worst,
        IDENTITY_TOL,
        format!("{}x{} grid", u_grid.len(), v_grid.len()),
    ))
}

/// `max |chi(D) r(t)| / r(0)` over `t_grid`.
pub fn annihilation_residual(chi: &RealPolynomial, cov: &CovarianceModel, t_grid: &[f64]) -> f64 {
    let r0 = cov.variance();
    t_grid
        .iter()
        .map(|&t| {
            let v: f64 = chi
                .coefficients()
                .iter()
                .enumerate()
                .map(|(q, c)| c * cov.value_right(q, t))
                .sum();
            v.abs() / r0
        })
        .fold(0.0, f64::max)
}

/// The ODE with characteristic polynomial `prod (lambda - i zeta_j)` kills `r` on `t > 0`.
pub fn check_ode_annihilation(spec: &RootSpec, cov: &CovarianceModel, t_grid: &[f64]) -> Result<CheckReport> {
    if t_grid.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidArgument("annihilation grid must be strictly positive".into()));
    }
    let res = annihilation_residual(&spec.ode_char_poly(), cov, t_grid);
    Ok(CheckReport::new("ode_annihilation", res, IDENTITY_TOL, format!("{} points", t_grid.len())))
}

pub fn check_lyapunov(ito: &ItoSystem, law: &StationaryLaw) -> CheckReport {
    CheckReport::new("lyapunov", law.lyapunov_residual(ito), IDENTITY_TOL, "||A S + S A^T + g g^T|| / ||S||")
}

/// Drift from the moment system against the expanded root product.
pub fn check_characteristic(spec: &RootSpec, ito: &ItoSystem) -> CheckReport {
    let gap = ito.char_poly().max_relative_gap(&spec.ode_char_poly());
    CheckReport::new("characteristic_consistency", gap, IDENTITY_TOL, "max relative coefficient gap")
}

/// `b^2 c^2 = 2 pi prod |zeta_j|^2`.
pub fn check_diffusion_scale(spec: &RootSpec, ito: &ItoSystem) -> CheckReport {
    let want = markov::diffusion_from_roots(spec);
    let rel = (ito.b_squared() - want).abs() / want;
    CheckReport::new("diffusion_scale", rel, IDENTITY_TOL, format!("b^2 = {:.10e}", ito.b_squared()))
}

/// Companion eigenvalues against `i zeta_j`; statistic is the worst
/// distance as a fraction of its (multiplicity-aware) tolerance.
pub fn check_eigenvalues(spec: &RootSpec, ito: &ItoSystem) -> CheckReport {
    let worst = markov::eigen_mismatch(ito, spec)
        .iter()
        .map(|&(_, dist, tol)| dist / tol)
        .fold(0.0, f64::max);
    CheckReport::new("companion_eigenvalues", worst, 1.0, "distance / tolerance")
}

/// `(-1)^j r^(2j)(0) > 0`; statistic is 0 when all signs are right.
pub fn check_moment_signs(moments: &SpectralMoments) -> CheckReport {
    let bad = (0..=moments.k)
        .filter(|&j| {
            let v = moments.derivs[2 * j];
            !(if j % 2 == 0 { v > 0.0 } else { v < 0.0 })
        })
        .count();
    CheckReport::new("moment_signs", bad as f64, 0.0, "count of wrong-sign even moments")
}

/// Size used to judge `r^(j)` errors: the bracketing even moments.
pub fn oracle_scale(moments: &SpectralMoments, j: usize) -> f64 {
    let lo = 2 * (j / 2);
    let hi = (2 * j.div_ceil(2)).min(2 * moments.k);
    1.0f64.max(moments.derivs[lo].abs()).max(moments.derivs[hi].abs())
}

/// Residue evaluation against quadrature of the spectral integral.
pub fn check_oracle(spec: &RootSpec, cov: &CovarianceModel, t_grid: &[f64]) -> Result<CheckReport> {
    let moments = cov.moments();
    let cases: Vec<(usize, f64)> =
        (0..=2 * spec.k()).flat_map(|j| t_grid.iter().map(move |&t| (j, t))).collect();
    let errs: Vec<f64> = cases
        .par_iter()
        .map(|&(j, t)| {
            let q = quadrature_r(spec, j, t)?;
            let c = cov.eval(j, t)?;
            Ok((q - c).abs() / oracle_scale(&moments, j))
        })
        .collect::<Result<_>>()?;
    let worst = errs.into_iter().fold(0.0, f64::max);
    Ok(CheckReport::new("quadrature_oracle", worst, ORACLE_TOL, format!("{} (j, t) pairs", cases.len())))
}

fn min_decay(cov: &CovarianceModel) -> f64 {
    cov.terms().iter().map(|t| t.root.im).fold(f64::INFINITY, f64::min)
}

fn lag_steps(lag: f64, dt: f64) -> Result<usize> {
    let steps = lag / dt;
    let rounded = steps.round();
    if !(lag >= 0.0) || (steps - rounded).abs() > 1e-6 * rounded.max(1.0) {
        return Err(Error::InvalidArgument(format!("lag {lag} is not a multiple of dt {dt}")));
    }
    Ok(rounded as usize)
}

/// Single long path: `max_lag |r_hat(lag) - r(lag)| / SE(lag)` on row `Y`.
pub fn check_empirical_covariance(path: &SamplePath, cov: &CovarianceModel, lags: &[f64]) -> Result<CheckReport> {
    let tau = 1.0 / min_decay(cov);
    let steps: Vec<usize> = lags.iter().map(|&l| lag_steps(l, path.dt)).collect::<Result<_>>()?;
    let max_lag = steps.iter().copied().max().unwrap_or(0);
    let usable = path.len().saturating_sub(max_lag);
    let ess = usable as f64 * path.dt / tau;
    if ess < MIN_ESS {
        return Err(Error::PathTooShort(ess));
    }
    let block = ((BLOCK_CORRELATION_TIMES * tau / path.dt).round() as usize).max(1);
    let y = path.row(0);
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for (&lag, &h) in lags.iter().zip(&steps) {
        let est = stats::autocovariance(y, h, block)?;
        let want = cov.eval(0, lag)?;
        let z = (est.value - want).abs() / est.std_err;
        worst = worst.max(z);
        parts.push(format!("lag {lag}: {:.4} vs {:.4} (se {:.3e})", est.value, want, est.std_err));
    }
    Ok(CheckReport::new(
        format!("empirical_covariance_{}", path.method.name()),
        worst,
        STAT_BAND,
        parts.join("; "),
    ))
}

/// Independent replicates: per-replicate lag products averaged over base
/// times, then a standard error across replicates.
pub fn check_ensemble_covariance(paths: &[SamplePath], cov: &CovarianceModel, lags: &[f64]) -> Result<CheckReport> {
    let first = paths.first().ok_or(Error::PathTooShort(0.0))?;
    if paths.len() < 100 {
        return Err(Error::PathTooShort(paths.len() as f64));
    }
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for &lag in lags {
        let h = lag_steps(lag, first.dt)?;
        if h >= first.len() {
            return Err(Error::PathTooShort(0.0));
        }
        let per_rep: Vec<f64> = paths
            .iter()
            .map(|p| {
                let y = p.row(0);
                let n = y.len() - h;
                (0..n).map(|m| y[m] * y[m + h]).sum::<f64>() / n as f64
            })
            .collect();
        let (mean, se) = stats::mean_and_se(&per_rep);
        let want = cov.eval(0, lag)?;
        let z = (mean - want).abs() / se;
        worst = worst.max(z);
        parts.push(format!("lag {lag}: {mean:.4} vs {want:.4} (se {se:.3e})"));
    }
    Ok(CheckReport::new(
        format!("empirical_covariance_{}", first.method.name()),
        worst,
        STAT_BAND,
        parts.join("; "),
    ))
}

/// Both conditioning variants of the partial-correlation test.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialCorrelationReport {
    /// `Y(s)` vs `Y(u)` given the full `Z(t)`; should pass.
    pub vector: CheckReport,
    /// Same pair given `Y(t)` only; expected to fail when `k >= 1`.
    pub scalar: CheckReport,
}

/// `|partial corr| * sqrt(replicates)` from independent replicate paths.
pub fn check_partial_correlation(
    paths: &[SamplePath],
    k: usize,
    s_idx: usize,
    t_idx: usize,
    u_idx: usize,
) -> Result<PartialCorrelationReport> {
    if !(s_idx < t_idx && t_idx < u_idx) {
        return Err(Error::InvalidArgument("need s < t < u".into()));
    }
    if paths.len() < 1000 {
        return Err(Error::InvalidArgument(format!("need >= 1000 replicates, got {}", paths.len())));
    }
    if paths.iter().any(|p| p.len() <= u_idx || p.dim() < k + 1) {
        return Err(Error::PathTooShort(0.0));
    }
    let root_n = (paths.len() as f64).sqrt();
    let vector_rows: Vec<Vec<f64>> = paths
        .iter()
        .map(|p| {
            let mut row = vec![p.row(0)[s_idx], p.row(0)[u_idx]];
            row.extend((0..=k).map(|i| p.row(i)[t_idx]));
            row
        })
        .collect();
    let scalar_rows: Vec<Vec<f64>> =
        paths.iter().map(|p| vec![p.row(0)[s_idx], p.row(0)[u_idx], p.row(0)[t_idx]]).collect();
    let pv = stats::partial_correlation(&vector_rows)?;
    let ps = stats::partial_correlation(&scalar_rows)?;
    let detail = |pc: f64| format!("partial corr {pc:.4}, {} replicates", paths.len());
    Ok(PartialCorrelationReport {
        vector: CheckReport::new("markov_given_state", pv.abs() * root_n, STAT_BAND, detail(pv)),
        scalar: CheckReport::new("markov_given_value", ps.abs() * root_n, STAT_BAND, detail(ps)),
    })
}

/// Population partial correlation of `Y(t-h)`, `Y(t+h)` given `Y(t)`.
pub fn scalar_partial_correlation(cov: &CovarianceModel, h: f64) -> f64 {
    let r0 = cov.variance();
    let r1 = cov.value_right(0, h);
    let r2 = cov.value_right(0, 2.0 * h);
    (r2 - r1 * r1 / r0) / (r0 - r1 * r1 / r0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Budget {
    Fast,
    Full,
}

impl Budget {
    fn ess_target(self) -> f64 {
        match self {
            Budget::Fast => 1_000.0,
            Budget::Full => 10_000.0,
        }
    }

    fn replicates(self) -> u32 {
        match self {
            Budget::Fast => 1_000,
            Budget::Full => 4_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    pub budget: Budget,
    pub seed: u64,
    /// Multiply one covariance term's coefficient before checking; a
    /// deliberate negative control.
    pub perturbation: Option<(usize, f64)>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { budget: Budget::Fast, seed: 20_240_601, perturbation: None }
    }
}

pub const SUITE_LAGS: [f64; 4] = [0.0, 0.5, 1.0, 2.0];
const SUITE_T_GRID: [f64; 5] = [0.1, 0.5, 1.0, 2.0, 5.0];
const ORACLE_T_GRID: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 5.0];

fn failed(name: &str, err: Error) -> CheckReport {
    CheckReport {
        name: name.into(),
        passed: false,
        statistic: f64::INFINITY,
        threshold: 0.0,
        detail: format!("error: {err}"),
    }
}

fn fold<F: FnOnce() -> Result<CheckReport>>(name: &str, f: F) -> CheckReport {
    f().unwrap_or_else(|e| failed(name, e))
}

/// Runs every check appropriate to `k` with deterministic seeds.
pub fn run_suite(spec: &RootSpec, opts: &SuiteOptions) -> Vec<CheckReport> {
    let mut reports = Vec::new();
    let reference = match CovarianceModel::residue_expansion(spec) {
        Ok(c) => c,
        Err(e) => return vec![failed("residue_expansion", e)],
    };
    let reference_moments = reference.moments();
    let cov = match opts.perturbation {
        Some((term, factor)) => reference.perturbed(term, factor),
        None => reference,
    };
    let an = match assemble_from_covariance(cov.clone()) {
        Ok(a) => a,
        Err(e) => return vec![failed("assemble", e)],
    };

    reports.push(check_moment_signs(&an.moments));
    reports.push(fold("markov_factorization", || {
        check_markov_factorization(&cov, &reference_moments, &[0.1, 0.5, 1.0, 2.0], &[0.1, 0.5, 1.0, 2.0])
    }));
    reports.push(fold("ode_annihilation", || check_ode_annihilation(spec, &cov, &SUITE_T_GRID)));
    reports.push(check_lyapunov(&an.ito, &an.law));
    reports.push(check_characteristic(spec, &an.ito));
    reports.push(check_diffusion_scale(spec, &an.ito));
    reports.push(check_eigenvalues(spec, &an.ito));
    reports.push(fold("quadrature_oracle", || check_oracle(spec, &cov, &ORACLE_T_GRID)));

    let tau = 1.0 / spec.min_decay();
    let dt = 0.01f64.min(0.1 / spec.max_modulus());
    let grid_lags: Vec<f64> = SUITE_LAGS.iter().map(|l| (l / dt).round() * dt).collect();
    let ess = opts.budget.ess_target();
    let n_exact = (ess * tau / dt).ceil() as usize + grid_lags.len();
    reports.push(fold("empirical_covariance_exact", || {
        let path = sample_exact(&an.ito, &an.law, dt, n_exact, opts.seed)?;
        check_empirical_covariance(&path, &cov, &grid_lags)
    }));

    if opts.budget == Budget::Full {
        let dt_e = 0.1 * dt;
        let n_euler = (ess * tau / dt_e).ceil() as usize;
        let lags_e: Vec<f64> = SUITE_LAGS.iter().map(|l| (l / dt_e).round() * dt_e).collect();
        reports.push(fold("empirical_covariance_euler", || {
            let path = sample_euler(&an.ito, &an.law, dt_e, n_euler, opts.seed)?;
            check_empirical_covariance(&path, &cov, &lags_e)
        }));
        reports.push(fold("empirical_covariance_spectral", || {
            let sampler = SpectralSampler::new(spec, 0.5, 5, SpectralOptions::default())?;
            let paths = sampler.ensemble(opts.seed, opts.budget.replicates())?;
            check_ensemble_covariance(&paths, &cov, &SUITE_LAGS)
        }));
    }

    reports.extend(markov_property_checks(spec, &an, opts));
    reports
}

/// Picks the spacing where the scalar (non-Markov) dependence is strongest
/// and runs the partial-correlation test on exact replicates.
fn markov_property_checks(spec: &RootSpec, an: &markov::Analysis, opts: &SuiteOptions) -> Vec<CheckReport> {
    let k = spec.k();
    let scale = spec.roots().iter().map(|z| z.norm().ln()).sum::<f64>() / spec.roots().len() as f64;
    let unit = (-scale).exp();
    let h = [0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5, 2.0]
        .iter()
        .map(|f| f * unit)
        .max_by(|a, b| {
            scalar_partial_correlation(&an.covariance, *a)
                .abs()
                .total_cmp(&scalar_partial_correlation(&an.covariance, *b).abs())
        })
        .expect("non-empty candidates");
    let n = opts.budget.replicates();
    let result = (0..n)
        .into_par_iter()
        .map(|s| sample_exact_stream(&an.ito, &an.law, h, 2, opts.seed ^ 0x9e37_79b9, s))
        .collect::<Result<Vec<_>>>()
        .and_then(|paths| check_partial_correlation(&paths, k, 0, 1, 2));
    match result {
        Err(e) => vec![failed("markov_given_state", e)],
        Ok(rep) => {
            let mut out = vec![rep.vector];
            let expected = scalar_partial_correlation(&an.covariance, h);
            if k == 0 {
                // Y itself is Markov: conditioning on the value must also pass.
                out.push(rep.scalar);
            } else {
                // Negative control: passes when the scalar test rejects.
                out.push(CheckReport::new(
                    "markov_given_value_control",
                    -rep.scalar.statistic,
                    -STAT_BAND,
                    format!("{} (population {expected:.3}); must exceed the band", rep.scalar.detail),
                ));
            }
            out
        }
    }
}

/// Convenience for examples: the `i zeta_j` targets of the companion spectrum.
pub fn expected_eigenvalues(spec: &RootSpec) -> Vec<Complex64> {
    spec.roots().iter().map(|z| Complex64::i() * z).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::assemble;

    fn spec(roots: &[(f64, f64)]) -> RootSpec {
        let roots: Vec<Complex64> = roots.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
        RootSpec::validate(&roots, 1.0).unwrap()
    }

    #[test]
    fn report_pass_rule() {
        assert!(CheckReport::new("x", 1.0, 1.0, "").passed);
        assert!(!CheckReport::new("x", 1.5, 1.0, "").passed);
        assert!(!CheckReport::new("x", f64::NAN, 1.0, "").passed);
    }

    #[test]
    fn factorization_k0_and_k1() {
        let s = spec(&[(0.0, 1.0)]);
        let an = assemble(&s).unwrap();
        let rep = check_markov_factorization(&an.covariance, &an.moments, &[0.3, 1.0], &[0.2, 2.0]).unwrap();
        assert!(rep.passed && rep.statistic <= 1e-12);

        let s = spec(&[(0.0, 1.0), (0.0, 1.0)]);
        let an = assemble(&s).unwrap();
        let rep = check_markov_factorization(&an.covariance, &an.moments, &[1.0], &[1.0]).unwrap();
        assert!(rep.statistic <= 1e-10);
    }

    #[test]
    fn factorization_negative_control() {
        let s = spec(&[(1.0, 1.0), (-1.0, 1.0)]);
        let truth = CovarianceModel::residue_expansion(&s).unwrap();
        let cov = truth.perturbed(0, 1.01);
        let rep = check_markov_factorization(&cov, &truth.moments(), &[0.5, 1.0], &[0.5, 1.0]).unwrap();
        assert!(!rep.passed, "{rep}");
        // Any solution of the same ODE factorises with its own moments.
        let own = check_markov_factorization(&cov, &cov.moments(), &[0.5, 1.0], &[0.5, 1.0]).unwrap();
        assert!(own.passed, "{own}");
        assert!(check_markov_factorization(&cov, &truth.moments(), &[0.0], &[1.0]).is_err());
    }

    #[test]
    fn annihilation_and_its_control() {
        let s = spec(&[(0.0, 1.0), (0.0, 1.0)]);
        let cov = CovarianceModel::residue_expansion(&s).unwrap();
        let rep = check_ode_annihilation(&s, &cov, &[0.1, 1.0, 3.0]).unwrap();
        assert!(rep.passed, "{rep}");
        let mut c = s.ode_char_poly().coefficients().to_vec();
        c[0] *= 1.001;
        let bad = RealPolynomial::new(c).unwrap();
        assert!(annihilation_residual(&bad, &cov, &[0.1, 1.0, 3.0]) > IDENTITY_TOL);
    }

    #[test]
    fn empirical_covariance_controls() {
        let s = spec(&[(0.0, 1.0)]);
        let an = assemble(&s).unwrap();
        let path = sample_exact(&an.ito, &an.law, 0.01, 200_000, 4).unwrap();
        let rep = check_empirical_covariance(&path, &an.covariance, &[0.0, 1.0]).unwrap();
        assert!(rep.passed, "{rep}");
        let other = assemble(&spec(&[(0.0, 2.0)])).unwrap();
        let rep = check_empirical_covariance(&path, &other.covariance, &[0.0, 1.0]).unwrap();
        assert!(!rep.passed, "{rep}");
        let one = sample_exact(&an.ito, &an.law, 0.01, 0, 4).unwrap();
        assert!(matches!(
            check_empirical_covariance(&one, &an.covariance, &[0.0]),
            Err(Error::PathTooShort(_))
        ));
    }

    #[test]
    fn oracle_scale_brackets() {
        let m = SpectralMoments { derivs: vec![2.0, 0.0, -30.0, 0.0, 900.0], top_plus: 1.0, k: 2 };
        assert_eq!(oracle_scale(&m, 0), 2.0);
        assert_eq!(oracle_scale(&m, 1), 30.0);
        assert_eq!(oracle_scale(&m, 3), 900.0);
        assert_eq!(oracle_scale(&m, 4), 900.0);
    }

    #[test]
    fn suite_k0_fast_passes() {
        let reports = run_suite(&spec(&[(0.0, 1.0)]), &SuiteOptions::default());
        for r in &reports {
            assert!(r.passed, "{r}");
        }
    }

    #[test]
    fn suite_flags_perturbed_model() {
        let opts = SuiteOptions { perturbation: Some((0, 1.01)), ..Default::default() };
        let reports = run_suite(&spec(&[(1.0, 1.0), (-1.0, 1.0)]), &opts);
        assert!(reports.iter().any(|r| !r.passed));
    }
}
