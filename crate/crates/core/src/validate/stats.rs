//! Autocovariance estimates with overlapping-batch-means standard errors,
//! and sample partial correlations.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Lag-`h` autocovariance of a zero-mean series and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagEstimate {
    pub value: f64,
    pub std_err: f64,
}

/// `mean(y_m y_{m+lag})` (mean known to be zero) with an overlapping
/// batch-means standard error over batches of `block` products.
pub fn autocovariance(y: &[f64], lag: usize, block: usize) -> Result<LagEstimate> {
    if lag >= y.len() {
        return Err(Error::PathTooShort(0.0));
    }
    let n = y.len() - lag;
    let block = block.clamp(1, n);
    let products: Vec<f64> = (0..n).map(|m| y[m] * y[m + lag]).collect();
    let mean = products.iter().sum::<f64>() / n as f64;
    if block >= n {
        return Ok(LagEstimate { value: mean, std_err: f64::INFINITY });
    }
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for p in &products {
        acc += p - mean;
        prefix.push(acc);
    }
    let b = block as f64;
    let ss: f64 = (0..=n - block).map(|j| ((prefix[j + block] - prefix[j]) / b).powi(2)).sum();
    let nf = n as f64;
    let sigma2 = nf * b * ss / ((nf - b) * (nf - b + 1.0));
    Ok(LagEstimate { value: mean, std_err: (sigma2 / nf).sqrt() })
}

/// Sample mean and standard error of independent draws.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Partial correlation of columns 0 and 1 given the remaining columns,
/// from replicate rows of `data` (sample-mean centred).
pub fn partial_correlation(data: &[Vec<f64>]) -> Result<f64> {
    let n = data.len();
    let p = data.first().map_or(0, Vec::len);
    if p < 2 || n <= p {
        return Err(Error::DegenerateConditioning);
    }
    let means: Vec<f64> = (0..p).map(|j| data.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let cov = DMatrix::from_fn(p, p, |i, j| {
        data.iter().map(|r| (r[i] - means[i]) * (r[j] - means[j])).sum::<f64>() / (n - 1) as f64
    });
    // Work with the correlation matrix so scale differences between
    // derivative rows do not matter.
    let d: Vec<f64> = (0..p).map(|i| cov[(i, i)].sqrt()).collect();
    if d.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::DegenerateConditioning);
    }
    let corr = DMatrix::from_fn(p, p, |i, j| cov[(i, j)] / (d[i] * d[j]));
    let chol = corr.cholesky().ok_or(Error::DegenerateConditioning)?;
    let precision = chol.inverse();
    let denom = (precision[(0, 0)] * precision[(1, 1)]).sqrt();
    if !(denom > 0.0) || !denom.is_finite() || precision[(0, 0)] > 1e12 {
        return Err(Error::DegenerateConditioning);
    }
    Ok(-precision[(0, 1)] / denom)
}
