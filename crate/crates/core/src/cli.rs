//! The `carkov` command: `analyze`, `simulate` and `verify`.
//!
//! Exit codes: `0` success, `1` verification failure, `2` configuration or
//! model error. Errors are written to stderr as
//! `{"error": "<Kind>", "message": "..."}`.
//!
//! A model file is JSON in one of two shapes:
//!
//! * roots: `{"roots": [[re, im], ...], "scale": c}`, optionally with
//!   `"perturbation": {"term": j, "factor": f}` to build a deliberately
//!   inconsistent negative control for `verify`;
//! * terms: `{"terms": [{"coef": [re, im], "root": [re, im], "power": m}], "k": k}`,
//!   which is also what `analyze` writes, so its report can be re-ingested.
//!
//! When both are present the term list wins.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::covariance::{CovarianceModel, SpectralMoments};
use crate::error::{Error, Result};
use crate::markov::{self, assemble_from_covariance, Analysis, ItoReport};
use crate::model::{RootSpec, RootSpecConfig};
use crate::simulate::{sample_euler, sample_exact, SamplePath, SpectralOptions, SpectralSampler};
use crate::validate::{run_suite, Budget, CheckReport, SuiteOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "carkov", version, about = "Gaussian processes with Markov derivative vectors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Covariance terms, moments, Ito system and stationary law.
    Analyze(AnalyzeArgs),
    /// Write one sample path of (Y, Y', ..., Y^(k)).
    Simulate(SimulateArgs),
    /// Run the consistency and statistical check suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Model JSON file (roots or term list).
    #[arg(long)]
    pub model: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub common: Common,
    /// End of the covariance-curve grid; defaults to ten correlation times.
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Number of covariance-curve points.
    #[arg(long, default_value_t = 201)]
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Exact,
    Euler,
    Spectral,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
    pub method: MethodArg,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    #[arg(long, env = "CARKOV_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Spectral truncation; defaults to the smallest value meeting the tail bound.
    #[arg(long)]
    pub z_max: Option<f64>,
    /// Spectral midpoint panels on [0, z_max].
    #[arg(long, default_value_t = 4096)]
    pub panels: usize,
    /// Highest derivative row emitted by the spectral sampler.
    #[arg(long, default_value_t = 0)]
    pub derivs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BudgetArg {
    Fast,
    Full,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = BudgetArg::Fast)]
    pub budget: BudgetArg,
    #[arg(long, env = "CARKOV_SEED")]
    pub seed: Option<u64>,
}

/// Negative-control hook in a roots model file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub term: usize,
    pub factor: f64,
}

/// A parsed model file.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSource {
    Roots { spec: RootSpec, perturbation: Option<Perturbation> },
    Terms(CovarianceModel),
}

impl ModelSource {
    pub fn from_json(value: Value) -> Result<Self> {
        if value.get("terms").is_some() {
            return Ok(ModelSource::Terms(serde_json::from_value(value)?));
        }
        if value.get("roots").is_none() {
            return Err(Error::Parse("model needs a \"roots\" or a \"terms\" field".into()));
        }
        let perturbation = match value.get("perturbation") {
            None | Some(Value::Null) => None,
            Some(p) => Some(serde_json::from_value(p.clone())?),
        };
        let cfg: RootSpecConfig = serde_json::from_value(value)?;
        Ok(ModelSource::Roots { spec: RootSpec::try_from(cfg)?, perturbation })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(serde_json::from_str(&text)?)
    }

    pub fn spec(&self) -> Option<&RootSpec> {
        match self {
            ModelSource::Roots { spec, .. } => Some(spec),
            ModelSource::Terms(_) => None,
        }
    }

    pub fn covariance(&self) -> Result<CovarianceModel> {
        match self {
            ModelSource::Roots { spec, perturbation } => {
                let cov = CovarianceModel::residue_expansion(spec)?;
                Ok(match perturbation {
                    Some(p) => cov.perturbed(p.term, p.factor),
                    None => cov,
                })
            }
            ModelSource::Terms(cov) => Ok(cov.clone()),
        }
    }

    fn describe(&self) -> Value {
        match self {
            ModelSource::Roots { spec, perturbation } => {
                let mut v = serde_json::to_value(spec).expect("root spec serializes");
                if let Some(p) = perturbation {
                    v["perturbation"] = json!(p);
                }
                v
            }
            ModelSource::Terms(cov) => serde_json::to_value(cov).expect("covariance serializes"),
        }
    }
}

/// Companion eigenvalue against its `i zeta` target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenEntry {
    pub expected: [f64; 2],
    pub distance: f64,
    pub tolerance: f64,
}

/// Contents of `analysis.json`. The `terms`/`k` pair makes the file a valid
/// term-list model on its own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub roots: Option<Vec<[f64; 2]>>,
    pub scale: Option<f64>,
    pub k: usize,
    pub terms: Vec<crate::covariance::Term>,
    pub moments: SpectralMoments,
    pub a: Vec<f64>,
    pub b: f64,
    pub b_squared: f64,
    pub sigma: Vec<Vec<f64>>,
    /// `alpha^(k+1)(0+)`; equals `a`.
    pub alpha_top: Vec<f64>,
    pub eigenvalues: Vec<[f64; 2]>,
    pub eigen_check: Option<Vec<EigenEntry>>,
    pub eigen_check_passed: Option<bool>,
}

impl AnalysisReport {
    pub fn build(source: &ModelSource, an: &Analysis) -> Result<Self> {
        let ItoReport { a, b, sigma } = ItoReport::new(&an.ito, &an.law);
        let alpha_top = an.covariance.alpha_derivative(&an.moments, an.moments.k + 1, 0.0)?;
        let eigen = source.spec().map(|spec| markov::eigen_mismatch(&an.ito, spec));
        Ok(AnalysisReport {
            roots: source.spec().map(|s| s.roots().iter().map(|z| [z.re, z.im]).collect()),
            scale: source.spec().map(RootSpec::scale),
            k: an.covariance.k(),
            terms: an.covariance.terms().to_vec(),
            moments: an.moments.clone(),
            a,
            b,
            b_squared: an.ito.b_squared(),
            sigma,
            alpha_top,
            eigenvalues: an.ito.eigenvalues().iter().map(|l| [l.re, l.im]).collect(),
            eigen_check_passed: eigen.as_ref().map(|e| e.iter().all(|&(_, d, tol)| d <= tol)),
            eigen_check: eigen.map(|e| {
                e.into_iter()
                    .map(|(z, distance, tolerance)| EigenEntry { expected: [z.re, z.im], distance, tolerance })
                    .collect()
            }),
        })
    }
}

fn create_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Uniform grid `0..=t_max` with `points` entries.
pub fn curve_grid(t_max: f64, points: usize) -> Result<Vec<f64>> {
    if !(t_max > 0.0) || !t_max.is_finite() || points < 2 {
        return Err(Error::InvalidArgument("curve grid needs t_max > 0 and at least 2 points".into()));
    }
    Ok((0..points).map(|i| t_max * i as f64 / (points - 1) as f64).collect())
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<AnalysisReport> {
    let source = ModelSource::load(&args.common.model)?;
    let an = assemble_from_covariance(source.covariance()?)?;
    let report = AnalysisReport::build(&source, &an)?;

    let min_decay = an.covariance.terms().iter().map(|t| t.root.im).fold(f64::INFINITY, f64::min);
    let grid = curve_grid(args.t_max.unwrap_or(10.0 / min_decay), args.points)?;
    create_out(&args.common.out)?;
    write_json(&args.common.out.join("analysis.json"), &report)?;
    let path = args.common.out.join("covariance.csv");
    let mut w = BufWriter::new(File::create(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?);
    writeln!(w, "t,r")?;
    for t in grid {
        writeln!(w, "{t},{}", an.covariance.eval(0, t)?)?;
    }
    w.flush()?;
    Ok(report)
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<SamplePath> {
    let source = ModelSource::load(&args.common.model)?;
    if args.steps == 0 {
        return Err(Error::InvalidArgument("steps must be positive".into()));
    }
    let path = match args.method {
        MethodArg::Exact | MethodArg::Euler => {
            let an = assemble_from_covariance(source.covariance()?)?;
            if args.method == MethodArg::Exact {
                sample_exact(&an.ito, &an.law, args.dt, args.steps, args.seed)?
            } else {
                sample_euler(&an.ito, &an.law, args.dt, args.steps, args.seed)?
            }
        }
        MethodArg::Spectral => {
            let spec = source
                .spec()
                .ok_or_else(|| Error::InvalidArgument("the spectral sampler needs a roots model".into()))?;
            let opts = SpectralOptions { z_max: args.z_max, n_panels: args.panels, derivs: args.derivs };
            SpectralSampler::new(spec, args.dt, args.steps + 1, opts)?.sample(args.seed, 0)?
        }
    };
    create_out(&args.common.out)?;
    let csv = args.common.out.join("path.csv");
    let mut w = BufWriter::new(File::create(&csv).map_err(|e| Error::Io(format!("{}: {e}", csv.display())))?);
    path.write_csv(&mut w)?;
    w.flush()?;
    write_json(&args.common.out.join("path.json"), &path.metadata(source.describe()))?;
    Ok(path)
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<Vec<CheckReport>> {
    let source = ModelSource::load(&args.common.model)?;
    let (spec, perturbation) = match &source {
        ModelSource::Roots { spec, perturbation } => (spec, perturbation),
        ModelSource::Terms(_) => return Err(Error::InvalidArgument("verify needs a roots model".into())),
    };
    let mut opts = SuiteOptions {
        budget: match args.budget {
            BudgetArg::Fast => Budget::Fast,
            BudgetArg::Full => Budget::Full,
        },
        perturbation: perturbation.map(|p| (p.term, p.factor)),
        ..SuiteOptions::default()
    };
    if let Some(seed) = args.seed {
        opts.seed = seed;
    }
    let reports = run_suite(spec, &opts);
    create_out(&args.common.out)?;
    write_json(&args.common.out.join("report.json"), &reports)?;
    Ok(reports)
}

fn report_error(err: &Error) {
    let body = json!({ "error": err.kind(), "message": err.to_string() });
    eprintln!("{body}");
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Analyze(a) => cmd_analyze(a).map(|_| EXIT_OK),
        Command::Simulate(a) => cmd_simulate(a).map(|_| EXIT_OK),
        Command::Verify(a) => cmd_verify(a).map(|reports| {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            for r in &reports {
                let _ = writeln!(out, "{r}");
            }
            let failed = reports.iter().filter(|r| !r.passed).count();
            let _ = writeln!(out, "{} checks, {failed} failed", reports.len());
            if failed == 0 { EXIT_OK } else { EXIT_VERIFY_FAILED }
        }),
    };
    outcome.unwrap_or_else(|e| {
        report_error(&e);
        EXIT_CONFIG
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_and_terms_models_parse() {
        let v = json!({"roots": [[0.0, 1.0]], "scale": 1.0});
        assert!(matches!(ModelSource::from_json(v).unwrap(), ModelSource::Roots { perturbation: None, .. }));
        let v = json!({"roots": [[0.0, 1.0]], "scale": 1.0, "perturbation": {"term": 0, "factor": 1.01}});
        let ModelSource::Roots { perturbation, .. } = ModelSource::from_json(v).unwrap() else { panic!() };
        assert_eq!(perturbation, Some(Perturbation { term: 0, factor: 1.01 }));
        let v = json!({"terms": [{"coef": [2.5, 0.0], "root": [0.0, 1.0], "power": 0}], "k": 0});
        assert!(matches!(ModelSource::from_json(v).unwrap(), ModelSource::Terms(_)));
        assert!(matches!(ModelSource::from_json(json!({"scale": 1.0})), Err(Error::Parse(_))));
    }

    #[test]
    fn pairing_errors_surface_from_model_files() {
        let v = json!({"roots": [[1.0, 1.0]], "scale": 1.0});
        assert!(matches!(ModelSource::from_json(v), Err(Error::UnpairedRoot { .. })));
    }

    #[test]
    fn curve_grid_endpoints() {
        let g = curve_grid(2.0, 5).unwrap();
        assert_eq!(g, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert!(curve_grid(0.0, 5).is_err());
    }
}
