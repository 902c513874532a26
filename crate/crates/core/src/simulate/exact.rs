//! Exact discretisation of the Ito system on a uniform grid.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{stream_rng, Method, SamplePath};
use crate::error::{Error, Result};
use crate::linalg;
use crate::markov::{ItoSystem, StationaryLaw};

/// Eigenvalue separation (relative) below which the eigen route is skipped.
/// A numerically split multiple root sits about `eps^{1/m}` apart.
const SIMPLE_GAP: f64 = 1e-3;
/// Negative innovation eigenvalues below `-NEG_TOL * ||Sigma||` are errors.
const NEG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpRoute {
    Eigen,
    Pade,
}

/// `exp(A t)` through the Vandermonde eigenbasis of a companion matrix.
///
/// Returns `None` when the eigenvalues are not well separated.
pub fn expm_eigen(companion: &DMatrix<f64>, t: f64) -> Option<DMatrix<f64>> {
    let n = companion.nrows();
    let eig: Vec<Complex64> = companion.complex_eigenvalues().iter().copied().collect();
    let scale = eig.iter().map(|l| l.norm()).fold(1.0, f64::max);
    for (i, a) in eig.iter().enumerate() {
        if eig[i + 1..].iter().any(|b| (a - b).norm() < SIMPLE_GAP * scale) {
            return None;
        }
    }
    // Column j is (1, l_j, ..., l_j^{n-1}), an eigenvector of the companion.
    let v = DMatrix::from_fn(n, n, |i, j| eig[j].powu(i as u32));
    let v_inv = v.clone().try_inverse()?;
    let d = DMatrix::from_diagonal(&DVector::from_iterator(n, eig.iter().map(|l| (l * t).exp())));
    Some((v * d * v_inv).map(|c| c.re))
}

/// `exp(A t)` by scaling and squaring with a Pade core.
pub fn expm_pade(a: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    (a * t).exp()
}

/// Eigen route when the spectrum is simple, Pade otherwise.
pub fn expm(companion: &DMatrix<f64>, t: f64) -> (DMatrix<f64>, ExpRoute) {
    match expm_eigen(companion, t) {
        Some(m) => (m, ExpRoute::Eigen),
        None => (expm_pade(companion, t), ExpRoute::Pade),
    }
}

/// One-step transition of the sampled chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactStep {
    /// `exp(A dt)`.
    pub phi: DMatrix<f64>,
    /// Symmetric square root of `Sigma - Phi Sigma Phi^T`.
    pub innovation: DMatrix<f64>,
    pub route: ExpRoute,
}

pub fn exact_step_operator(ito: &ItoSystem, law: &StationaryLaw, dt: f64) -> Result<ExactStep> {
    if !(dt >= 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("dt must be non-negative, got {dt}")));
    }
    let n = ito.k() + 1;
    if law.dim() != n {
        return Err(Error::InvalidArgument("law and Ito system dimensions differ".into()));
    }
    if dt == 0.0 {
        return Ok(ExactStep {
            phi: DMatrix::identity(n, n),
            innovation: DMatrix::zeros(n, n),
            route: ExpRoute::Eigen,
        });
    }
    let (phi, route) = expm(&ito.companion(), dt);
    let sigma = law.covariance();
    let q = sigma - &phi * sigma * phi.transpose();
    let innovation =
        linalg::psd_sqrt(&q, NEG_TOL * linalg::fro(sigma)).map_err(Error::FactorizationFailure)?;
    Ok(ExactStep { phi, innovation, route })
}

pub(crate) fn draw_normal(rng: &mut impl Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

pub(crate) fn stationary_draw(law: &StationaryLaw, rng: &mut impl Rng) -> Result<DVector<f64>> {
    let chol = law.covariance().clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
    Ok(chol.l() * draw_normal(rng, law.dim()))
}

/// `n_steps + 1` grid points starting from a stationary draw.
pub fn sample_exact(
    ito: &ItoSystem,
    law: &StationaryLaw,
    dt: f64,
    n_steps: usize,
    seed: u64,
) -> Result<SamplePath> {
    sample_exact_stream(ito, law, dt, n_steps, seed, 0)
}

/// As [`sample_exact`] on an explicit stream id (for replicate batches).
pub fn sample_exact_stream(
    ito: &ItoSystem,
    law: &StationaryLaw,
    dt: f64,
    n_steps: usize,
    seed: u64,
    stream: u32,
) -> Result<SamplePath> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let step = exact_step_operator(ito, law, dt)?;
    let n = law.dim();
    let mut rng = stream_rng(seed, Method::Exact, stream);
    let mut z = stationary_draw(law, &mut rng)?;
    let mut values = vec![Vec::with_capacity(n_steps + 1); n];
    let mut xi = DVector::zeros(n);
    let mut next = DVector::zeros(n);
    for m in 0..=n_steps {
        for i in 0..n {
            values[i].push(z[i]);
        }
        if m == n_steps {
            break;
        }
        for v in xi.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        next.gemv(1.0, &step.phi, &z, 0.0);
        next.gemv(1.0, &step.innovation, &xi, 1.0);
        std::mem::swap(&mut z, &mut next);
    }
    SamplePath::new(dt, values, seed, Method::Exact)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::assemble;
    use crate::model::RootSpec;
    use std::f64::consts::PI;

    fn spec(roots: &[(f64, f64)]) -> RootSpec {
        let roots: Vec<Complex64> = roots.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
        RootSpec::validate(&roots, 1.0).unwrap()
    }

    #[test]
    fn k0_half_life_step() {
        let an = assemble(&spec(&[(0.0, 1.0)])).unwrap();
        let step = exact_step_operator(&an.ito, &an.law, 2f64.ln()).unwrap();
        assert!((step.phi[(0, 0)] - 0.5).abs() < 1e-14);
        let q = &step.innovation * step.innovation.transpose();
        assert!((q[(0, 0)] - 0.75 * PI).abs() < 1e-13);
    }

    #[test]
    fn zero_step_is_identity() {
        let an = assemble(&spec(&[(1.0, 1.0), (-1.0, 1.0)])).unwrap();
        let step = exact_step_operator(&an.ito, &an.law, 0.0).unwrap();
        assert_eq!(step.phi, DMatrix::identity(2, 2));
        assert_eq!(step.innovation, DMatrix::zeros(2, 2));
        let tiny = exact_step_operator(&an.ito, &an.law, 1e-9).unwrap();
        assert!((&tiny.phi - DMatrix::identity(2, 2)).amax() < 1e-8);
        assert!(tiny.innovation.amax() < 1e-3);
    }

    #[test]
    fn stationarity_preserved() {
        for roots in [vec![(0.0, 1.0)], vec![(1.0, 1.0), (-1.0, 1.0), (0.0, 2.0)], vec![(0.0, 0.5); 3]] {
            let an = assemble(&spec(&roots)).unwrap();
            for dt in [0.01, 0.3, 2.0] {
                let st = exact_step_operator(&an.ito, &an.law, dt).unwrap();
                let s = an.law.covariance();
                let back = &st.phi * s * st.phi.transpose() + &st.innovation * st.innovation.transpose();
                assert!((back - s).amax() <= 1e-12 * s.amax());
            }
        }
    }

    #[test]
    fn eigen_and_pade_agree() {
        let an = assemble(&spec(&[(1.0, 0.5), (-1.0, 0.5), (0.0, 2.0), (0.0, 1.0)])).unwrap();
        let a = an.ito.companion();
        for t in [0.01, 0.5, 3.0] {
            let e = expm_eigen(&a, t).unwrap();
            let p = expm_pade(&a, t);
            assert!((e - p).amax() < 1e-11);
        }
    }

    #[test]
    fn repeated_root_takes_pade() {
        let an = assemble(&spec(&[(0.0, 1.0), (0.0, 1.0)])).unwrap();
        let (m, route) = expm(&an.ito.companion(), 1.0);
        assert_eq!(route, ExpRoute::Pade);
        // exp of [[0,1],[-1,-2]] = e^{-1} [[2, 1], [-1, 0]]
        let e = (-1.0f64).exp();
        assert!((m[(0, 0)] - 2.0 * e).abs() < 1e-14);
        assert!((m[(0, 1)] - e).abs() < 1e-14);
        assert!((m[(1, 0)] + e).abs() < 1e-14);
        assert!(m[(1, 1)].abs() < 1e-14);
    }

    #[test]
    fn seeded_paths_repeat() {
        let an = assemble(&spec(&[(0.0, 1.0), (0.0, 2.0)])).unwrap();
        let a = sample_exact(&an.ito, &an.law, 0.1, 50, 11).unwrap();
        let b = sample_exact(&an.ito, &an.law, 0.1, 50, 11).unwrap();
        let c = sample_exact(&an.ito, &an.law, 0.1, 50, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.values, c.values);
        assert_eq!(a.len(), 51);
        assert_eq!(a.dim(), 2);
    }
}
