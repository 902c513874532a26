//! The spectral polynomial `P(z) = c * prod_j (1 - z / zeta_j)` and the
//! characteristic polynomial of the matching linear ODE.
//!
//! A process in the class is indexed by the upper-half-plane roots of `P`
//! together with the positive scale `c`; the spectral density is
//! `1 / |P(z)|^2` with no `1 / (2 pi)` normalisation.

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on `|zeta_j + conj(zeta_l)|` when matching root pairs.
pub const PAIR_TOL: f64 = 1e-9;

/// Validated root form of the spectral polynomial.
///
/// Roots are stored sorted by `(im, re)` and exactly symmetric under
/// `zeta -> -conj(zeta)`, so two specs built from the same multiset compare
/// and serialize identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RootSpecConfig", into = "RootSpecConfig")]
pub struct RootSpec {
    roots: Vec<Complex64>,
    scale: f64,
}

/// On-disk form of a [`RootSpec`]: `{"roots": [[re, im], ...], "scale": c}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSpecConfig {
    pub roots: Vec<[f64; 2]>,
    pub scale: f64,
}

impl TryFrom<RootSpecConfig> for RootSpec {
    type Error = Error;

    fn try_from(cfg: RootSpecConfig) -> Result<Self> {
        let roots: Vec<Complex64> = cfg.roots.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        RootSpec::validate(&roots, cfg.scale)
    }
}

impl From<RootSpec> for RootSpecConfig {
    fn from(spec: RootSpec) -> Self {
        RootSpecConfig {
            roots: spec.roots.iter().map(|z| [z.re, z.im]).collect(),
            scale: spec.scale,
        }
    }
}

fn canonical_cmp(a: &Complex64, b: &Complex64) -> Ordering {
    a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re))
}

impl RootSpec {
    /// Checks and canonicalises raw roots.
    ///
    /// Roots within [`PAIR_TOL`] of their partner are snapped onto exact
    /// symmetry (partners share the mean imaginary part and opposite real
    /// parts; nearly imaginary roots get `re = 0`).
    pub fn validate(roots: &[Complex64], scale: f64) -> Result<Self> {
        if roots.is_empty() {
            return Err(Error::NoRoots);
        }
        if !scale.is_finite() || scale <= 0.0 {
            return Err(Error::NonPositiveScale(scale));
        }
        for (index, z) in roots.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::InvalidArgument(format!("root {index} is not finite")));
            }
            if z.im <= 0.0 {
                return Err(Error::NonPositiveImaginaryPart { index, im: z.im });
            }
        }

        let mut sorted = roots.to_vec();
        sorted.sort_by(canonical_cmp);
        let n = sorted.len();
        let mut used = vec![false; n];
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            if used[j] {
                continue;
            }
            used[j] = true;
            let z = sorted[j];
            if 2.0 * z.re.abs() <= PAIR_TOL {
                out.push(Complex64::new(0.0, z.im));
                continue;
            }
            let partner = (0..n)
                .filter(|&l| !used[l])
                .map(|l| (l, (z + sorted[l].conj()).norm()))
                .filter(|&(_, gap)| gap <= PAIR_TOL)
                .min_by(|a, b| a.1.total_cmp(&b.1));
            let Some((l, _)) = partner else {
                return Err(Error::UnpairedRoot { re: z.re, im: z.im });
            };
            used[l] = true;
            let w = sorted[l];
            let re = 0.5 * (z.re - w.re).abs();
            let im = 0.5 * (z.im + w.im);
            out.push(Complex64::new(-re, im));
            out.push(Complex64::new(re, im));
        }
        out.sort_by(canonical_cmp);
        Ok(RootSpec { roots: out, scale })
    }

    pub fn roots(&self) -> &[Complex64] {
        &self.roots
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Number of derivatives in the Markov state, minus one.
    pub fn k(&self) -> usize {
        self.roots.len() - 1
    }

    /// `prod_j |zeta_j|^2 / c^2`, the constant in `1/|P|^2 = K / prod |z - zeta_j|^2`.
    pub fn density_constant(&self) -> f64 {
        self.roots.iter().map(|z| z.norm_sqr()).product::<f64>() / (self.scale * self.scale)
    }

    pub fn max_modulus(&self) -> f64 {
        self.roots.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn min_decay(&self) -> f64 {
        self.roots.iter().map(|z| z.im).fold(f64::INFINITY, f64::min)
    }

    /// Same roots with a different scale.
    pub fn with_scale(&self, scale: f64) -> Result<Self> {
        if !scale.is_finite() || scale <= 0.0 {
            return Err(Error::NonPositiveScale(scale));
        }
        Ok(RootSpec { roots: self.roots.clone(), scale })
    }

    /// Distinct roots with their multiplicities (exact equality after
    /// canonicalisation).
    pub fn distinct_roots(&self) -> Vec<(Complex64, usize)> {
        let mut out: Vec<(Complex64, usize)> = Vec::new();
        for &z in &self.roots {
            match out.iter_mut().find(|(w, _)| *w == z) {
                Some((_, m)) => *m += 1,
                None => out.push((z, 1)),
            }
        }
        out
    }

    /// `|P(z)|^2` on the real axis.
    pub fn abs_p_squared(&self, z: f64) -> f64 {
        let zc = Complex64::new(z, 0.0);
        let prod: f64 = self
            .roots
            .iter()
            .map(|zeta| (Complex64::new(1.0, 0.0) - zc / zeta).norm_sqr())
            .product();
        self.scale * self.scale * prod
    }

    /// Monic `chi(lambda) = prod_j (lambda - i zeta_j)`.
    ///
    /// Real because roots come in `zeta, -conj(zeta)` pairs; all its roots
    /// `i zeta_j` have real part `-im(zeta_j) < 0`.
    pub fn ode_char_poly(&self) -> RealPolynomial {
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        for zeta in &self.roots {
            let shift = Complex64::i() * zeta;
            let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
            for (d, c) in coeffs.iter().enumerate() {
                next[d + 1] += c;
                next[d] -= c * shift;
            }
            coeffs = next;
        }
        let scale = coeffs.iter().map(|c| c.norm()).fold(1.0, f64::max);
        debug_assert!(coeffs.iter().all(|c| c.im.abs() <= 1e-12 * scale));
        RealPolynomial::new(coeffs.into_iter().map(|c| c.re).collect())
            .expect("monic product has nonzero leading coefficient")
    }
}

impl fmt::Display for RootSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c={} roots=[", self.scale)?;
        for (i, z) in self.roots.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}{:+}i", z.re, z.im)?;
        }
        write!(f, "]")
    }
}

/// Real polynomial, coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealPolynomial {
    coefficients: Vec<f64>,
}

impl RealPolynomial {
    /// Trailing zero coefficients are rejected rather than trimmed.
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        match coefficients.last() {
            Some(&c) if c != 0.0 && c.is_finite() => Ok(RealPolynomial { coefficients }),
            _ => Err(Error::InvalidArgument(
                "polynomial needs a finite nonzero leading coefficient".into(),
            )),
        }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_complex(&self, x: Complex64) -> Complex64 {
        self.coefficients
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * x + c)
    }

    /// Largest relative coefficient-wise gap `|a_i - b_i| / max(|a_i|, |b_i|, tiny)`.
    pub fn max_relative_gap(&self, other: &RealPolynomial) -> f64 {
        if self.degree() != other.degree() {
            return f64::INFINITY;
        }
        self.coefficients
            .iter()
            .zip(&other.coefficients)
            .map(|(a, b)| (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }
}
