//! Explicit Euler-Maruyama: `Z_{m+1} = Z_m + A Z_m dt + g sqrt(dt) xi_m`.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use super::exact::stationary_draw;
use super::{stream_rng, Method, SamplePath};
use crate::error::{Error, Result};
use crate::markov::{ItoSystem, StationaryLaw};

/// One deterministic step given the standard normal draw `xi` for the noise.
pub fn euler_step(ito: &ItoSystem, z: &DVector<f64>, dt: f64, xi: f64) -> DVector<f64> {
    let a = ito.companion();
    let mut next = z + &a * z * dt;
    let last = next.len() - 1;
    next[last] += ito.b() * dt.sqrt() * xi;
    next
}

/// Spectral radius of `I + A dt`.
pub fn step_radius(ito: &ItoSystem, dt: f64) -> f64 {
    ito.eigenvalues().iter().map(|l| (1.0 + l * dt).norm()).fold(0.0, f64::max)
}

/// Starts from a stationary draw of `Z(0)`.
pub fn sample_euler(
    ito: &ItoSystem,
    law: &StationaryLaw,
    dt: f64,
    n_steps: usize,
    seed: u64,
) -> Result<SamplePath> {
    let mut rng = stream_rng(seed, Method::Euler, 0);
    let z0 = stationary_draw(law, &mut rng)?;
    run(ito, z0, dt, n_steps, seed, &mut rng)
}

/// Starts from a given state.
pub fn sample_euler_from(
    ito: &ItoSystem,
    z0: &DVector<f64>,
    dt: f64,
    n_steps: usize,
    seed: u64,
) -> Result<SamplePath> {
    if z0.len() != ito.k() + 1 {
        return Err(Error::InvalidArgument("initial state has wrong dimension".into()));
    }
    let mut rng = stream_rng(seed, Method::Euler, 0);
    run(ito, z0.clone(), dt, n_steps, seed, &mut rng)
}

fn run(
    ito: &ItoSystem,
    mut z: DVector<f64>,
    dt: f64,
    n_steps: usize,
    seed: u64,
    rng: &mut impl Rng,
) -> Result<SamplePath> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let radius = step_radius(ito, dt);
    if radius >= 1.0 {
        return Err(Error::UnstableStep(radius));
    }
    let n = z.len();
    let drift = ito.drift();
    let noise = ito.b() * dt.sqrt();
    let mut values = vec![Vec::with_capacity(n_steps + 1); n];
    for m in 0..=n_steps {
        for i in 0..n {
            values[i].push(z[i]);
        }
        if m == n_steps {
            break;
        }
        let xi: f64 = rng.sample(StandardNormal);
        // Companion structure: shift up, last row is the drift combination.
        let top: f64 = drift.iter().zip(z.iter()).map(|(a, v)| a * v).sum();
        for i in 0..n - 1 {
            z[i] += z[i + 1] * dt;
        }
        z[n - 1] += top * dt + noise * xi;
    }
    SamplePath::new(dt, values, seed, Method::Euler)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::assemble;
    use crate::model::RootSpec;
    use num_complex::Complex64;

    fn k1() -> crate::markov::Analysis {
        let roots = [Complex64::new(1.0, 1.0), Complex64::new(-1.0, 1.0)];
        assemble(&RootSpec::validate(&roots, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn noiseless_step_is_drift() {
        let an = k1();
        let e0 = DVector::from_vec(vec![1.0, 0.0]);
        let dt = 0.01;
        let z1 = euler_step(&an.ito, &e0, dt, 0.0);
        let want = &e0 + an.ito.companion() * &e0 * dt;
        assert_eq!(z1, want);
        let zero = DVector::zeros(2);
        assert_eq!(euler_step(&an.ito, &zero, dt, 0.0), zero);
    }

    #[test]
    fn loop_matches_matrix_step() {
        let an = k1();
        let z0 = DVector::from_vec(vec![0.3, -0.2]);
        let path = sample_euler_from(&an.ito, &z0, 0.01, 3, 5).unwrap();
        let mut rng = stream_rng(5, Method::Euler, 0);
        let mut z = z0;
        for m in 1..=3 {
            let xi: f64 = rng.sample(StandardNormal);
            z = euler_step(&an.ito, &z, 0.01, xi);
            assert!((path.row(0)[m] - z[0]).abs() < 1e-14);
            assert!((path.row(1)[m] - z[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn unstable_step_is_rejected() {
        let an = k1();
        // eigenvalues -1 +- i: |1 + l dt| >= 1 once dt >= 1
        assert!(matches!(sample_euler(&an.ito, &an.law, 1.5, 10, 0), Err(Error::UnstableStep(_))));
        assert!(sample_euler(&an.ito, &an.law, 0.5, 10, 0).is_ok());
    }
}
