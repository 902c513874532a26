//! Spectral sampler: midpoint discretisation of
//! `Y(t) = int cos(tz) f(z) dW1(z) + int sin(tz) f(z) dW2(z)`, `f = 1/|P|`.
//!
//! Each panel of width `h` on `[-z_max, z_max]` contributes two independent
//! Gaussian increments of variance `h`. Derivative rows differentiate the
//! integrand: `d^i/dt^i cos(tz) = z^i cos(tz + i pi/2)`.

use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{stream_rng, Method, SamplePath};
use crate::covariance::CovarianceModel;
use crate::error::{Error, Result};
use crate::model::RootSpec;

/// Allowed tail variance as a fraction of each emitted row's variance.
pub const TAIL_FRACTION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralOptions {
    /// Truncation; `None` picks the smallest value meeting the tail bound.
    pub z_max: Option<f64>,
    pub n_panels: usize,
    /// Highest derivative row to emit (`0` gives `Y` only).
    pub derivs: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions { z_max: None, n_panels: 4096, derivs: 0 }
    }
}

/// Upper bound on `int_{|z| > z} s^{2 row} / |P(s)|^2 ds`.
///
/// Uses `|s - zeta| >= |s| - M` with `M = max |zeta|`, valid for `z > M`.
pub fn tail_bound(spec: &RootSpec, row: usize, z: f64) -> f64 {
    let k = spec.k();
    let m = spec.max_modulus();
    if row > k || z <= m {
        return f64::INFINITY;
    }
    let p = (2 * k + 1 - 2 * row) as f64;
    let gap = z - m;
    2.0 * spec.density_constant() * (z / gap).powi(2 * row as i32) * gap.powf(-p) / p
}

/// Smallest `z` (to a few percent) with `tail_bound(row, z) <= limit`.
pub fn truncation_for(spec: &RootSpec, row: usize, limit: f64) -> f64 {
    let mut hi = 2.0 * spec.max_modulus() + 1.0;
    while tail_bound(spec, row, hi) > limit {
        hi *= 2.0;
    }
    let mut lo = spec.max_modulus();
    while hi - lo > 0.01 * hi {
        let mid = 0.5 * (lo + hi);
        if tail_bound(spec, row, mid) > limit { lo = mid } else { hi = mid }
    }
    hi
}

/// Precomputed panel weights and trigonometric tables for a fixed grid.
#[derive(Debug, Clone)]
pub struct SpectralSampler {
    dt: f64,
    len: usize,
    rows: usize,
    n_panels: usize,
    z_max: f64,
    // [row][m][panel] coefficient on the cosine / sine increment
    cos_tab: Vec<Vec<Vec<f64>>>,
    sin_tab: Vec<Vec<Vec<f64>>>,
}

impl SpectralSampler {
    /// Grid `t_m = m dt`, `m = 0..len`.
    pub fn new(spec: &RootSpec, dt: f64, len: usize, opts: SpectralOptions) -> Result<Self> {
        if len == 0 || !(dt >= 0.0) || opts.n_panels == 0 {
            return Err(Error::InvalidArgument("spectral grid needs len >= 1, dt >= 0, n_panels >= 1".into()));
        }
        if opts.derivs > spec.k() {
            return Err(Error::InvalidArgument(format!(
                "derivative row {} exceeds k = {}",
                opts.derivs,
                spec.k()
            )));
        }
        let moments = CovarianceModel::residue_expansion(spec)?.moments();
        let row_var = |i: usize| moments.derivs[2 * i].abs();
        let z_max = match opts.z_max {
            Some(z) => {
                for row in 0..=opts.derivs {
                    let tail = tail_bound(spec, row, z);
                    let limit = TAIL_FRACTION * row_var(row);
                    if !(tail <= limit) {
                        return Err(Error::TailTooHeavy { row, tail, limit });
                    }
                }
                z
            }
            None => (0..=opts.derivs)
                .map(|row| truncation_for(spec, row, TAIL_FRACTION * row_var(row)))
                .fold(0.0, f64::max),
        };

        let h = 2.0 * z_max / opts.n_panels as f64;
        let nodes: Vec<(f64, f64)> = (0..opts.n_panels)
            .map(|n| {
                let z = -z_max + (n as f64 + 0.5) * h;
                (z, (h / spec.abs_p_squared(z)).sqrt())
            })
            .collect();
        let rows = opts.derivs + 1;
        let mut cos_tab = vec![vec![vec![0.0; opts.n_panels]; len]; rows];
        let mut sin_tab = cos_tab.clone();
        for row in 0..rows {
            let shift = row as f64 * FRAC_PI_2;
            for m in 0..len {
                let t = m as f64 * dt;
                for (n, &(z, w)) in nodes.iter().enumerate() {
                    let amp = w * z.powi(row as i32);
                    let (s, c) = (t * z + shift).sin_cos();
                    cos_tab[row][m][n] = amp * c;
                    sin_tab[row][m][n] = amp * s;
                }
            }
        }
        Ok(SpectralSampler { dt, len, rows, n_panels: opts.n_panels, z_max, cos_tab, sin_tab })
    }

    pub fn z_max(&self) -> f64 {
        self.z_max
    }

    /// One path on the given stream.
    pub fn sample(&self, seed: u64, stream: u32) -> Result<SamplePath> {
        let mut rng = stream_rng(seed, Method::Spectral, stream);
        let mut xc = vec![0.0; self.n_panels];
        let mut xs = vec![0.0; self.n_panels];
        for n in 0..self.n_panels {
            xc[n] = rng.sample(StandardNormal);
            xs[n] = rng.sample(StandardNormal);
        }
        let values = (0..self.rows)
            .map(|row| {
                (0..self.len)
                    .map(|m| {
                        let c = &self.cos_tab[row][m];
                        let s = &self.sin_tab[row][m];
                        (0..self.n_panels).map(|n| c[n] * xc[n] + s[n] * xs[n]).sum()
                    })
                    .collect()
            })
            .collect();
        SamplePath::new(self.dt, values, seed, Method::Spectral)
    }

    /// Independent replicates on streams `0..count`, generated in parallel.
    pub fn ensemble(&self, seed: u64, count: u32) -> Result<Vec<SamplePath>> {
        (0..count).into_par_iter().map(|s| self.sample(seed, s)).collect()
    }
}

/// One spectral path on the grid `m dt`, `m = 0..len`.
pub fn sample_spectral(
    spec: &RootSpec,
    dt: f64,
    len: usize,
    opts: SpectralOptions,
    seed: u64,
) -> Result<SamplePath> {
    SpectralSampler::new(spec, dt, len, opts)?.sample(seed, 0)
}
