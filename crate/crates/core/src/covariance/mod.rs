//! Closed-form covariance `r(u)` from residues of `e^{izu} / |P(z)|^2`,
//! spectral moments at the origin, and the regression coefficients
//! `alpha_j(u)` of the rank-`(k+1)` factorisation.

mod quadrature;

pub use quadrature::{integrate, quadrature_r};

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::RootSpec;

/// Relative gap below which two distinct roots are rejected.
pub const DEGENERACY_TOL: f64 = 1e-6;

/// Odd moments below this fraction of `r(0)` are set to exactly zero.
pub const ODD_SNAP_TOL: f64 = 1e-10;

/// One term `coef * u^power * exp(i * root * u)` of `r(u)` for `u >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coef: Complex64,
    pub root: Complex64,
    pub power: u32,
}

/// `r(u) = sum coef * u^m * e^{i zeta u}` for `u >= 0`, extended evenly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel")]
pub struct CovarianceModel {
    terms: Vec<Term>,
    k: usize,
}

#[derive(Deserialize)]
struct RawModel {
    terms: Vec<Term>,
    k: usize,
}

impl TryFrom<RawModel> for CovarianceModel {
    type Error = Error;

    fn try_from(raw: RawModel) -> Result<Self> {
        CovarianceModel::from_terms(raw.terms, raw.k)
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Truncated power-series product.
fn series_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let n = a.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate().take(n - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

impl CovarianceModel {
    /// Builds a model from an explicit term list (e.g. a re-ingested report).
    pub fn from_terms(terms: Vec<Term>, k: usize) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidArgument("covariance needs at least one term".into()));
        }
        if let Some(t) = terms.iter().find(|t| !(t.root.im > 0.0)) {
            return Err(Error::NonPositiveImaginaryPart { index: 0, im: t.root.im });
        }
        let model = CovarianceModel { terms, k };
        if !(model.value_right(0, 0.0) > 0.0) {
            return Err(Error::InvalidArgument("r(0) must be positive".into()));
        }
        Ok(model)
    }

    /// Closes the Fourier integral in the upper half-plane and sums the
    /// residues at the `zeta_j`. A root of multiplicity `m` contributes
    /// terms `u^p e^{i zeta u}` for `p < m`.
    pub fn residue_expansion(spec: &RootSpec) -> Result<Self> {
        let distinct = spec.distinct_roots();
        let tol = DEGENERACY_TOL * spec.max_modulus();
        for (i, &(a, _)) in distinct.iter().enumerate() {
            for &(b, _) in &distinct[i + 1..] {
                if (a - b).norm() < tol {
                    return Err(Error::NearDegenerateRoots {
                        a: format!("{a}"),
                        b: format!("{b}"),
                        tol,
                    });
                }
            }
        }

        // 1/|P|^2 = K / prod (z - zeta_l)(z - conj zeta_l)
        let density = spec.density_constant();
        let mut terms = Vec::with_capacity(spec.roots().len());
        for &(zeta, mult) in &distinct {
            // Taylor coefficients at zeta of the cofactor h(z) = K / (other factors).
            let mut series = vec![Complex64::new(0.0, 0.0); mult];
            series[0] = Complex64::new(density, 0.0);
            let others = distinct
                .iter()
                .filter(|(w, _)| *w != zeta)
                .copied()
                .chain(distinct.iter().map(|&(w, n)| (w.conj(), n)));
            for (w, n) in others {
                let d = zeta - w;
                let factor: Vec<Complex64> = (0..mult)
                    .map(|q| {
                        let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
                        sign * binomial(n + q - 1, q) * d.powi(-((n + q) as i32))
                    })
                    .collect();
                series = series_mul(&series, &factor);
            }
            // Res = sum_p (iu)^p e^{i zeta u} h^{(m-1-p)}(zeta) / (p! (m-1-p)!)
            for p in 0..mult {
                let coef = Complex64::new(0.0, 2.0 * PI) * Complex64::i().powu(p as u32)
                    * series[mult - 1 - p]
                    / factorial(p);
                terms.push(Term { coef, root: zeta, power: p as u32 });
            }
        }
        Ok(CovarianceModel { terms, k: spec.k() })
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Right-hand value of `r^(j)` at `u >= 0`, any order.
    ///
    /// At `u = 0` this is the `0+` limit, which for `j <= 2k` equals the
    /// two-sided derivative.
    pub fn value_right(&self, j: usize, u: f64) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for term in &self.terms {
            let m = term.power as usize;
            let iz = Complex64::i() * term.root;
            let mut poly = Complex64::new(0.0, 0.0);
            for q in 0..=j.min(m) {
                let falling = factorial(m) / factorial(m - q);
                poly += binomial(j, q) * falling * u.powi((m - q) as i32) * iz.powu((j - q) as u32);
            }
            acc += term.coef * poly * (iz * u).exp();
        }
        acc.re
    }

    /// Largest imaginary residue of the term sum at `u`, relative to `r(0)`.
    pub fn imaginary_residue(&self, u: f64) -> f64 {
        let acc: Complex64 = self
            .terms
            .iter()
            .map(|t| t.coef * u.powi(t.power as i32) * (Complex64::i() * t.root * u).exp())
            .sum();
        acc.im.abs() / self.value_right(0, 0.0)
    }

    /// `r^(j)(u)` for any real `u`; `r` is even so odd derivatives flip sign
    /// for `u < 0`. At `u = 0` only orders up to `2k` exist.
    pub fn eval(&self, j: usize, u: f64) -> Result<f64> {
        if u == 0.0 && j > 2 * self.k {
            return Err(Error::OrderTooHigh { order: j, max: 2 * self.k });
        }
        let v = self.value_right(j, u.abs());
        Ok(if u < 0.0 && j % 2 == 1 { -v } else { v })
    }

    /// `r^(2k+1)(0+)`; the left limit is its negative.
    pub fn one_sided_top(&self) -> f64 {
        self.value_right(2 * self.k + 1, 0.0)
    }

    pub fn variance(&self) -> f64 {
        self.value_right(0, 0.0)
    }

    pub fn moments(&self) -> SpectralMoments {
        let r0 = self.variance();
        let derivs = (0..=2 * self.k)
            .map(|j| {
                let v = self.value_right(j, 0.0);
                if j % 2 == 1 && v.abs() < ODD_SNAP_TOL * r0 { 0.0 } else { v }
            })
            .collect();
        SpectralMoments { derivs, top_plus: self.one_sided_top(), k: self.k }
    }

    /// `alpha_j(u)`, `u > 0`: the unique solution of
    /// `r^(i)(u) = sum_j alpha_j(u) r^(i+j)(0)`, `i = 0..=k`.
    pub fn alpha_coeffs(&self, moments: &SpectralMoments, u: f64) -> Result<Vec<f64>> {
        if !(u > 0.0) {
            return Err(Error::InvalidArgument(format!("alpha needs u > 0, got {u}")));
        }
        self.alpha_derivative(moments, 0, u)
    }

    /// `d^order/du^order alpha_j(u)` for `u >= 0`, one-sided at `u = 0`.
    ///
    /// `alpha^(k+1)(0+)` reproduces the drift coefficients.
    pub fn alpha_derivative(&self, moments: &SpectralMoments, order: usize, u: f64) -> Result<Vec<f64>> {
        if !(u >= 0.0) {
            return Err(Error::InvalidArgument(format!("alpha needs u >= 0, got {u}")));
        }
        let rhs = DVector::from_fn(self.k + 1, |i, _| self.value_right(i + order, u));
        Ok(linalg::solve(&moments.gram(), &rhs)?.as_slice().to_vec())
    }

    /// Multiplies one term's coefficient; only for building negative controls.
    pub fn perturbed(&self, term: usize, factor: f64) -> Self {
        let mut out = self.clone();
        if let Some(t) = out.terms.get_mut(term) {
            t.coef *= factor;
        }
        out
    }
}

/// `r^(j)(0)` for `j = 0..=2k` (odd ones exactly zero) and `r^(2k+1)(0+)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralMoments {
    pub derivs: Vec<f64>,
    pub top_plus: f64,
    pub k: usize,
}

impl SpectralMoments {
    pub fn variance(&self) -> f64 {
        self.derivs[0]
    }

    /// `r^(order)(0+)` for `order <= 2k + 1`.
    pub fn right(&self, order: usize) -> f64 {
        if order <= 2 * self.k { self.derivs[order] } else { self.top_plus }
    }

    /// `r^(2k+1)(0-)`.
    pub fn top_minus(&self) -> f64 {
        -self.top_plus
    }

    /// `G_ij = r^(i+j)(0)`, `i, j = 0..=k`.
    pub fn gram(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.k + 1, self.k + 1, |i, j| self.derivs[i + j])
    }

    /// `(-1)^j r^(2j)(0) = E[(Y^(j))^2]` must be positive for every `j <= k`.
    pub fn signs_ok(&self) -> bool {
        (0..=self.k).all(|j| {
            let v = self.derivs[2 * j];
            if j % 2 == 0 { v > 0.0 } else { v < 0.0 }
        })
    }
}
