//! Three independent samplers of the same `k = 2` process: exact
//! discretisation, Euler-Maruyama on the Ito system, and the spectral
//! (harmonisable) representation. Each is compared with `r` in standard
//! errors.
//!
//! cargo run --release --example sampler_comparison

use carkov::simulate::{sample_euler, sample_exact, SpectralOptions, SpectralSampler};
use carkov::validate::{check_empirical_covariance, check_ensemble_covariance};
use carkov::{assemble, Complex64, RootSpec};

fn main() -> carkov::Result<()> {
    let roots = [Complex64::new(1.0, 1.0), Complex64::new(-1.0, 1.0), Complex64::new(0.0, 2.0)];
    let spec = RootSpec::validate(&roots, 1.0)?;
    let an = assemble(&spec)?;
    let lags = [0.0, 0.5, 1.0, 2.0];

    let exact = sample_exact(&an.ito, &an.law, 0.01, 200_000, 1)?;
    println!("{}", check_empirical_covariance(&exact, &an.covariance, &lags)?);

    let euler = sample_euler(&an.ito, &an.law, 0.001, 1_000_000, 1)?;
    println!("{}", check_empirical_covariance(&euler, &an.covariance, &lags)?);

    let sampler = SpectralSampler::new(&spec, 0.5, 5, SpectralOptions::default())?;
    println!("spectral truncation z_max = {:.1}", sampler.z_max());
    let paths = sampler.ensemble(1, 2_000)?;
    println!("{}", check_ensemble_covariance(&paths, &an.covariance, &lags)?);
    Ok(())
}
