//! The `k = 1` two-sided exponential moving average
//! `Y(t) = int f(t - s) dW(s)`, `f(x) = A e^{a- x}` (x < 0), `A e^{-a+ x}` (x > 0).
//! Its covariance is a two-term exponential sum with `r'(0) = 0`, and the
//! sampled pair `(Y, Y')` matches it.
//!
//! cargo run --release --example moving_average

use carkov::markov::assemble_from_covariance;
use carkov::simulate::{ma_covariance, ma_covariance_confluent, sample_moving_average, MAKernel};
use carkov::validate::check_empirical_covariance;

fn main() -> carkov::Result<()> {
    let kernel = MAKernel::new(1.0, 2.0, 1.0)?;
    let cov = ma_covariance(&kernel)?;
    for t in cov.terms() {
        println!("term {:.4} e^(i {} u)", t.coef.re, t.root);
    }
    println!("r'(0) = {:.2e}", cov.eval(1, 0.0)?);

    let an = assemble_from_covariance(cov.clone())?;
    println!("Ito drift {:?}, b^2 = {:.6}", an.ito.drift(), an.ito.b_squared());

    let path = sample_moving_average(&kernel, 0.01, 400_000, 5)?;
    println!("{}", check_empirical_covariance(&path, &cov, &[0.0, 0.5, 1.0, 2.0])?);

    let symmetric = ma_covariance_confluent(1.0, 2.0)?;
    println!("symmetric kernel r(1) = {:.6}", symmetric.eval(0, 1.0)?);
    Ok(())
}
