//! A double root `i a` (`k = 1`): the covariance is polynomial times
//! exponential, `r(u) = (pi a / 2) (1 + a u) e^{-a u}`, and the vector
//! `(Y, Y')` is Markov with drift `(-a^2, -2a)`.
//!
//! cargo run --example confluent_k1

use std::f64::consts::PI;

use carkov::{assemble, Complex64, RootSpec};

fn main() -> carkov::Result<()> {
    for a in [1.0, 2.0] {
        let root = Complex64::new(0.0, a);
        let spec = RootSpec::validate(&[root, root], 1.0)?;
        let an = assemble(&spec)?;
        println!("a = {a}");
        for term in an.covariance.terms() {
            println!("  term: {:.6} u^{} e^(i {} u)", term.coef, term.power, term.root);
        }
        for u in [0.0, 1.0, 3.0] {
            let want = PI * a / 2.0 * (1.0 + a * u) * (-a * u).exp();
            println!("  r({u}) = {:.12}  (closed form {want:.12})", an.covariance.eval(0, u)?);
        }
        println!("  drift = {:?}  (closed form [{}, {}])", an.ito.drift(), -a * a, -2.0 * a);
        println!("  b^2 = {:.10}  (2 pi a^4 = {:.10})", an.ito.b_squared(), 2.0 * PI * a.powi(4));
        println!("  Sigma = {}", an.law.covariance());
    }
    Ok(())
}
