//! Sample paths of `Z(t) = (Y, Y', ..., Y^(k))` on a uniform grid.
//!
//! Four independent mechanisms are provided:
//!
//! * [`exact`]: the sampled chain `Z_{m+1} = Phi Z_m + L xi_m` with
//!   `Phi = exp(A dt)` and `L L^T = Sigma - Phi Sigma Phi^T`, exact in law.
//! * [`euler`]: explicit Euler-Maruyama on the Ito system.
//! * [`spectral`]: midpoint discretisation of the two real stochastic
//!   integrals against `cos(tz) / |P(z)|` and `sin(tz) / |P(z)|`.
//! * [`moving_average`]: the `k = 1` two-sided exponential kernel, sampled
//!   exactly through a forward and a backward exponential recursion.
//!
//! Every sampler is a pure function of its inputs and a seed. Randomness is
//! drawn from ChaCha8 streams keyed by `(seed, method, stream id)`, so
//! different methods and replicates never share draws.

pub mod euler;
pub mod exact;
pub mod moving_average;
pub mod spectral;

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use euler::{euler_step, sample_euler, sample_euler_from};
pub use exact::{exact_step_operator, expm, expm_eigen, expm_pade, sample_exact, ExactStep, ExpRoute};
pub use moving_average::{ma_covariance, ma_covariance_confluent, sample_moving_average, MAKernel};
pub use spectral::{sample_spectral, SpectralOptions, SpectralSampler};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Euler,
    Spectral,
    MovingAverage,
}

impl Method {
    fn tag(self) -> u64 {
        match self {
            Method::Exact => 1,
            Method::Euler => 2,
            Method::Spectral => 3,
            Method::MovingAverage => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Euler => "euler",
            Method::Spectral => "spectral",
            Method::MovingAverage => "moving_average",
        }
    }
}

/// Independent reproducible generator for `(seed, method, stream)`.
pub fn stream_rng(seed: u64, method: Method, stream: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((method.tag() << 32) | u64::from(stream));
    rng
}

/// A realised trajectory; `values[i][m]` is `Y^(i)(m dt)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    pub dt: f64,
    pub values: Vec<Vec<f64>>,
    pub seed: u64,
    pub method: Method,
}

impl SamplePath {
    pub(crate) fn new(dt: f64, values: Vec<Vec<f64>>, seed: u64, method: Method) -> Result<Self> {
        let len = values.first().map_or(0, Vec::len);
        if len == 0 || values.iter().any(|row| row.len() != len) {
            return Err(Error::InvalidArgument("path rows must be non-empty and equal length".into()));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("path contains non-finite values".into()));
        }
        Ok(SamplePath { dt, values, seed, method })
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.values[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of derivative rows.
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    pub fn time(&self, m: usize) -> f64 {
        m as f64 * self.dt
    }

    /// CSV with header `t,y0,...,yk`, one line per grid point.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut header = String::from("t");
        for i in 0..self.dim() {
            header.push_str(&format!(",y{i}"));
        }
        writeln!(out, "{header}")?;
        let mut line = String::new();
        for m in 0..self.len() {
            line.clear();
            line.push_str(&format!("{}", self.time(m)));
            for row in &self.values {
                line.push_str(&format!(",{}", row[m]));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn metadata(&self, model: serde_json::Value) -> PathMetadata {
        PathMetadata { method: self.method, dt: self.dt, seed: self.seed, model }
    }
}

/// Sidecar describing how a CSV path was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathMetadata {
    pub method: Method,
    pub dt: f64,
    pub seed: u64,
    pub model: serde_json::Value,
}
