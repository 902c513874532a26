//! The `k = 0` case: a single root `i alpha` gives the Ornstein-Uhlenbeck
//! covariance `r(u) = pi alpha e^{-alpha u}`, drift `-alpha` and
//! `b^2 = 2 pi alpha^2`.
//!
//! cargo run --example ou_golden

use std::f64::consts::PI;

use carkov::{assemble, Complex64, RootSpec};

fn main() -> carkov::Result<()> {
    for alpha in [0.5, 1.0, 2.0] {
        let spec = RootSpec::validate(&[Complex64::new(0.0, alpha)], 1.0)?;
        let an = assemble(&spec)?;
        println!("alpha = {alpha}");
        for u in [0.0, 0.5, 1.0, 2.0] {
            let want = PI * alpha * (-alpha * u).exp();
            println!("  r({u}) = {:.12}  (closed form {want:.12})", an.covariance.eval(0, u)?);
        }
        println!("  drift a = {:?}  (closed form [{}])", an.ito.drift(), -alpha);
        println!("  b^2 = {:.12}  (closed form {:.12})", an.ito.b_squared(), 2.0 * PI * alpha * alpha);
    }
    Ok(())
}
