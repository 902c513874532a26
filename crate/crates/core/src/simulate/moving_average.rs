//! Two-sided exponential moving-average kernel for `k = 1`:
//! `f(x) = A e^{a- x}` for `x < 0`, `f(x) = A e^{-a+ x}` for `x > 0`,
//! `Y(t) = int f(t - s) dW(s)`.
//!
//! The common amplitude makes `f` continuous, which is what makes `Y`
//! differentiable. Splitting `Y = X+ + X-` into its causal and anti-causal
//! parts gives two exponential recursions (one forward, one backward) driven
//! by the same cell increments, so the grid values are exact in law;
//! `Y' = -a+ X+ + a- X-`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{stream_rng, Method, SamplePath};
use crate::covariance::{CovarianceModel, Term};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MAKernel {
    pub a_minus: f64,
    pub a_plus: f64,
    pub amp: f64,
}

impl MAKernel {
    pub fn new(a_minus: f64, a_plus: f64, amp: f64) -> Result<Self> {
        if !(a_minus > 0.0 && a_plus > 0.0) || !a_minus.is_finite() || !a_plus.is_finite() {
            return Err(Error::InvalidArgument("kernel decay rates must be positive".into()));
        }
        if !(amp != 0.0) || !amp.is_finite() {
            return Err(Error::InvalidArgument("kernel amplitude must be nonzero".into()));
        }
        Ok(MAKernel { a_minus, a_plus, amp })
    }

    /// `f(x)`; continuous at 0.
    pub fn eval(&self, x: f64) -> f64 {
        if x < 0.0 {
            self.amp * (self.a_minus * x).exp()
        } else {
            self.amp * (-self.a_plus * x).exp()
        }
    }
}

fn real_term(coef: f64, rate: f64, power: u32) -> Term {
    Term { coef: Complex64::new(coef, 0.0), root: Complex64::new(0.0, rate), power }
}

/// `r(u) = A1 e^{-a- u} + A2 e^{-a+ u}` with
/// `A1 = A^2 (1/(2a-) - 1/(a- - a+))`, `A2 = A^2 (1/(2a+) + 1/(a- - a+))`.
pub fn ma_covariance(kernel: &MAKernel) -> Result<CovarianceModel> {
    let (am, ap) = (kernel.a_minus, kernel.a_plus);
    if (am - ap).abs() <= 1e-12 * am.max(ap) {
        return Err(Error::EqualRates);
    }
    let a2 = kernel.amp * kernel.amp;
    let c1 = a2 * (1.0 / (2.0 * am) - 1.0 / (am - ap));
    let c2 = a2 * (1.0 / (2.0 * ap) + 1.0 / (am - ap));
    CovarianceModel::from_terms(vec![real_term(c1, am, 0), real_term(c2, ap, 0)], 1)
}

/// Symmetric kernel `a- = a+ = a`: `r(u) = (A^2 / a) (1 + a u) e^{-a u}`.
pub fn ma_covariance_confluent(amp: f64, rate: f64) -> Result<CovarianceModel> {
    let kernel = MAKernel::new(rate, rate, amp)?;
    let a2 = kernel.amp * kernel.amp;
    CovarianceModel::from_terms(vec![real_term(a2 / rate, rate, 0), real_term(a2, rate, 1)], 1)
}

/// `(Y, Y')` on `n_steps + 1` grid points.
pub fn sample_moving_average(kernel: &MAKernel, dt: f64, n_steps: usize, seed: u64) -> Result<SamplePath> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let MAKernel { a_minus: am, a_plus: ap, amp } = *kernel;
    let (dp, dm) = ((-ap * dt).exp(), (-am * dt).exp());
    // Per cell: U = int e^{-a+ (t1 - s)} dW, V = int e^{-a- (s - t0)} dW.
    let var_u = -(-2.0 * ap * dt).exp_m1() / (2.0 * ap);
    let var_v = -(-2.0 * am * dt).exp_m1() / (2.0 * am);
    let cov_uv = if (ap - am).abs() > 1e-12 * ap.max(am) {
        (dm - dp) / (ap - am)
    } else {
        dt * dp
    };
    let l11 = var_u.sqrt();
    let l21 = cov_uv / l11;
    let l22 = (var_v - l21 * l21).max(0.0).sqrt();

    let mut rng = stream_rng(seed, Method::MovingAverage, 0);
    let n = n_steps + 1;
    let mut u = vec![0.0; n_steps];
    let mut v = vec![0.0; n_steps];
    for m in 0..n_steps {
        let x1: f64 = rng.sample(StandardNormal);
        let x2: f64 = rng.sample(StandardNormal);
        u[m] = l11 * x1;
        v[m] = l21 * x1 + l22 * x2;
    }
    let start_plus: f64 = rng.sample(StandardNormal);
    let end_minus: f64 = rng.sample(StandardNormal);

    let mut plus = vec![0.0; n];
    plus[0] = amp * start_plus / (2.0 * ap).sqrt();
    for m in 0..n_steps {
        plus[m + 1] = dp * plus[m] + amp * u[m];
    }
    let mut minus = vec![0.0; n];
    minus[n - 1] = amp * end_minus / (2.0 * am).sqrt();
    for m in (0..n_steps).rev() {
        minus[m] = dm * minus[m + 1] + amp * v[m];
    }
    let y: Vec<f64> = plus.iter().zip(&minus).map(|(p, q)| p + q).collect();
    let dy: Vec<f64> = plus.iter().zip(&minus).map(|(p, q)| -ap * p + am * q).collect();
    SamplePath::new(dt, vec![y, dy], seed, Method::MovingAverage)
}
