//! The Ito system `dY^(k) = sum_j a_j Y^(j) dt + b dW` (with `dY^(i) = Y^(i+1) dt`
//! below the top row) recovered from the spectral moments, and the
//! stationary Gaussian law of `Z = (Y, Y', ..., Y^(k))`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::covariance::{CovarianceModel, SpectralMoments};
use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{RealPolynomial, RootSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct ItoSystem {
    drift: Vec<f64>,
    b_squared: f64,
}

impl ItoSystem {
    pub fn new(drift: Vec<f64>, b_squared: f64) -> Result<Self> {
        if drift.is_empty() {
            return Err(Error::InvalidArgument("drift needs at least one coefficient".into()));
        }
        if !(b_squared > 0.0) || !b_squared.is_finite() {
            return Err(Error::NonPositiveDiffusion(b_squared));
        }
        Ok(ItoSystem { drift, b_squared })
    }

    pub fn k(&self) -> usize {
        self.drift.len() - 1
    }

    /// `a_0 .. a_k`.
    pub fn drift(&self) -> &[f64] {
        &self.drift
    }

    pub fn b_squared(&self) -> f64 {
        self.b_squared
    }

    /// Positive root; the sign of `b` is not identifiable.
    pub fn b(&self) -> f64 {
        self.b_squared.sqrt()
    }

    /// Ones on the superdiagonal, `a_0 .. a_k` in the last row.
    pub fn companion(&self) -> DMatrix<f64> {
        let n = self.drift.len();
        DMatrix::from_fn(n, n, |i, j| {
            if i == n - 1 {
                self.drift[j]
            } else if j == i + 1 {
                1.0
            } else {
                0.0
            }
        })
    }

    /// `(0, ..., 0, b)`.
    pub fn noise_vector(&self) -> DVector<f64> {
        let n = self.drift.len();
        DVector::from_fn(n, |i, _| if i == n - 1 { self.b() } else { 0.0 })
    }

    /// `lambda^{k+1} - sum_j a_j lambda^j`.
    pub fn char_poly(&self) -> RealPolynomial {
        let mut c: Vec<f64> = self.drift.iter().map(|a| -a).collect();
        c.push(1.0);
        RealPolynomial::new(c).expect("monic")
    }

    /// Numerical eigenvalues of the companion matrix.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.companion().complex_eigenvalues().iter().copied().collect()
    }
}

/// Covariance of `Z(0)`: `Sigma_ij = (-1)^i r^(i+j)(0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryLaw {
    covariance: DMatrix<f64>,
}

impl StationaryLaw {
    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn dim(&self) -> usize {
        self.covariance.nrows()
    }

    /// Relative residual `||A S + S A^T + b^2 e_k e_k^T|| / ||S||`.
    pub fn lyapunov_residual(&self, ito: &ItoSystem) -> f64 {
        let a = ito.companion();
        let s = &self.covariance;
        let g = ito.noise_vector();
        let res = &a * s + s * a.transpose() + &g * g.transpose();
        linalg::fro(&res) / linalg::fro(s)
    }
}

/// JSON report shape `{"a": [...], "b": b, "sigma": [[...]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItoReport {
    pub a: Vec<f64>,
    pub b: f64,
    pub sigma: Vec<Vec<f64>>,
}

impl ItoReport {
    pub fn new(ito: &ItoSystem, law: &StationaryLaw) -> Self {
        let s = law.covariance();
        ItoReport {
            a: ito.drift().to_vec(),
            b: ito.b(),
            sigma: (0..s.nrows()).map(|i| s.row(i).iter().copied().collect()).collect(),
        }
    }
}

/// Solves `r^(k+i+1)(0+) = sum_j a_j r^(i+j)(0)`, `i = 0..=k`.
pub fn solve_drift(moments: &SpectralMoments) -> Result<Vec<f64>> {
    let k = moments.k;
    let rhs = DVector::from_fn(k + 1, |i, _| moments.right(k + i + 1));
    Ok(linalg::solve(&moments.gram(), &rhs)?.as_slice().to_vec())
}

/// `b^2 = sum_j a_j r^(j+k)(0) (-1)^{j+1} + (-1)^k r^(2k+1)(0-)`.
pub fn solve_diffusion(moments: &SpectralMoments, drift: &[f64]) -> Result<f64> {
    let k = moments.k;
    let sign = |p: usize| if p.is_multiple_of(2) { 1.0 } else { -1.0 };
    let b2 = drift
        .iter()
        .enumerate()
        .map(|(j, a)| a * moments.derivs[j + k] * sign(j + 1))
        .sum::<f64>()
        + sign(k) * moments.top_minus();
    if b2 > 0.0 && b2.is_finite() { Ok(b2) } else { Err(Error::NonPositiveDiffusion(b2)) }
}

/// The `0+` form of the diffusion:
/// `b^2 = sum_j alpha_j^(k+1)(0) r^(k+j)(0) (-1)^{j+1} + (-1)^{k+1} r^(2k+1)(0+)`,
/// with the `alpha` derivatives taken from the covariance model rather than
/// from the drift solve. Used as a redundant check.
pub fn solve_diffusion_plus(cov: &CovarianceModel, moments: &SpectralMoments) -> Result<f64> {
    let k = moments.k;
    let sign = |p: usize| if p.is_multiple_of(2) { 1.0 } else { -1.0 };
    let alpha = cov.alpha_derivative(moments, k + 1, 0.0)?;
    Ok(alpha
        .iter()
        .enumerate()
        .map(|(j, a)| a * moments.derivs[j + k] * sign(j + 1))
        .sum::<f64>()
        + sign(k + 1) * moments.top_plus)
}

pub fn stationary_law(moments: &SpectralMoments) -> Result<StationaryLaw> {
    let n = moments.k + 1;
    let covariance = DMatrix::from_fn(n, n, |i, j| {
        let v = moments.derivs[i + j];
        if i % 2 == 0 { v } else { -v }
    });
    if covariance.clone().cholesky().is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(StationaryLaw { covariance })
}

/// Everything derived from a root spec in one pass.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub covariance: CovarianceModel,
    pub moments: SpectralMoments,
    pub ito: ItoSystem,
    pub law: StationaryLaw,
}

/// Ito system and stationary law from an explicit covariance model.
pub fn assemble_from_covariance(covariance: CovarianceModel) -> Result<Analysis> {
    let moments = covariance.moments();
    let drift = solve_drift(&moments)?;
    let b2 = solve_diffusion(&moments, &drift)?;
    let ito = ItoSystem::new(drift, b2)?;
    let law = stationary_law(&moments)?;
    Ok(Analysis { covariance, moments, ito, law })
}

pub fn assemble(spec: &RootSpec) -> Result<Analysis> {
    assemble_from_covariance(CovarianceModel::residue_expansion(spec)?)
}

/// `2 pi prod |zeta_j|^2 / c^2`, the diffusion implied directly by the roots.
pub fn diffusion_from_roots(spec: &RootSpec) -> f64 {
    2.0 * std::f64::consts::PI * spec.density_constant()
}

/// Worst distance from a companion eigenvalue to its matched `i zeta_j`,
/// with the allowed tolerance for that root's multiplicity.
///
/// A root of multiplicity `m` is only resolved to about `eps^{1/m}` by any
/// eigensolver, so the tolerance widens accordingly.
pub fn eigen_mismatch(ito: &ItoSystem, spec: &RootSpec) -> Vec<(Complex64, f64, f64)> {
    let mut eig = ito.eigenvalues();
    let scale = spec.max_modulus().max(1.0);
    let mut out = Vec::new();
    for (zeta, mult) in spec.distinct_roots() {
        let target = Complex64::i() * zeta;
        let tol = if mult == 1 { 1e-8 * scale } else { 1e-8f64.max(10.0 * f64::EPSILON.powf(1.0 / mult as f64)) * scale };
        for _ in 0..mult {
            let (idx, dist) = eig
                .iter()
                .enumerate()
                .map(|(i, e)| (i, (e - target).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("as many eigenvalues as roots");
            eig.swap_remove(idx);
            out.push((target, dist, tol));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn spec(roots: &[(f64, f64)], c: f64) -> RootSpec {
        let roots: Vec<Complex64> = roots.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
        RootSpec::validate(&roots, c).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn k0_unit() {
        let an = assemble(&spec(&[(0.0, 1.0)], 1.0)).unwrap();
        assert!(close(an.ito.drift()[0], -1.0, 1e-14));
        assert!(close(an.ito.b_squared(), 2.0 * PI, 1e-14));
        assert!(close(an.law.covariance()[(0, 0)], PI, 1e-14));
    }

    #[test]
    fn k0_alpha_two() {
        let an = assemble(&spec(&[(0.0, 2.0)], 1.0)).unwrap();
        assert!(close(an.ito.drift()[0], -2.0, 1e-14));
        assert!(close(an.ito.b_squared(), 8.0 * PI, 1e-14));
        assert!(close(an.law.covariance()[(0, 0)], 2.0 * PI, 1e-14));
    }

    #[test]
    fn k1_double_root() {
        let an = assemble(&spec(&[(0.0, 1.0), (0.0, 1.0)], 1.0)).unwrap();
        assert!(close(an.ito.drift()[0], -1.0, 1e-13));
        assert!(close(an.ito.drift()[1], -2.0, 1e-13));
        assert!(close(an.ito.b_squared(), 2.0 * PI, 1e-13));
        let s = an.law.covariance();
        assert!(close(s[(0, 0)], PI / 2.0, 1e-14) && close(s[(1, 1)], PI / 2.0, 1e-14));
        assert_eq!(s[(0, 1)], 0.0);
        assert_eq!(s[(1, 0)], 0.0);
    }

    #[test]
    fn k1_complex_pair() {
        let an = assemble(&spec(&[(1.0, 1.0), (-1.0, 1.0)], 1.0)).unwrap();
        assert!(close(an.ito.drift()[0], -2.0, 1e-13));
        assert!(close(an.ito.drift()[1], -2.0, 1e-13));
        assert!(close(an.ito.b_squared(), 8.0 * PI, 1e-13));
    }

    #[test]
    fn companion_layout() {
        let ito = ItoSystem::new(vec![-1.0, -3.0, -3.0], 1.0).unwrap();
        let a = ito.companion();
        assert_eq!(a[(0, 1)], 1.0);
        assert_eq!(a[(1, 2)], 1.0);
        assert_eq!(a[(2, 0)], -1.0);
        assert_eq!(a[(0, 0)], 0.0);
        assert_eq!(ito.noise_vector()[2], 1.0);
        assert_eq!(ito.char_poly().coefficients(), &[1.0, 3.0, 3.0, 1.0]);
    }

    #[test]
    fn diffusion_sign_guard() {
        let m = SpectralMoments { derivs: vec![1.0], top_plus: 2.0, k: 0 };
        // a_0 = 2 gives b^2 = -2 - 2 < 0
        assert!(matches!(solve_diffusion(&m, &[2.0]), Err(Error::NonPositiveDiffusion(_))));
        assert!(ItoSystem::new(vec![-1.0], 0.0).is_err());
    }

    #[test]
    fn law_rejects_indefinite() {
        let m = SpectralMoments { derivs: vec![1.0, 0.0, 1.0], top_plus: 1.0, k: 1 };
        assert_eq!(stationary_law(&m), Err(Error::NotPositiveDefinite));
    }

    #[test]
    fn plus_and_minus_diffusion_agree() {
        for roots in [vec![(0.0, 1.0)], vec![(1.0, 0.5), (-1.0, 0.5), (0.0, 2.0)]] {
            let an = assemble(&spec(&roots, 1.0)).unwrap();
            let plus = solve_diffusion_plus(&an.covariance, &an.moments).unwrap();
            assert!(close(plus, an.ito.b_squared(), 1e-12));
        }
    }

    #[test]
    fn lyapunov_holds_k2() {
        let an = assemble(&spec(&[(1.0, 1.0), (-1.0, 1.0), (0.0, 2.0)], 1.0)).unwrap();
        assert!(an.law.lyapunov_residual(&an.ito) < 1e-12);
        for (_, dist, tol) in eigen_mismatch(&an.ito, &spec(&[(1.0, 1.0), (-1.0, 1.0), (0.0, 2.0)], 1.0)) {
            assert!(dist <= tol);
        }
    }

    #[test]
    fn report_shape() {
        let an = assemble(&spec(&[(0.0, 1.0)], 1.0)).unwrap();
        let v = serde_json::to_value(ItoReport::new(&an.ito, &an.law)).unwrap();
        assert!(v["a"].is_array() && v["b"].is_number() && v["sigma"][0].is_array());
    }
}
