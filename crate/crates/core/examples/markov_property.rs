//! The Markov property as a sample statistic: `Y(s)` and `Y(u)` are
//! uncorrelated given the full state `Z(t) = (Y, Y')(t)`, but not given the
//! value `Y(t)` alone.
//!
//! cargo run --release --example markov_property

use carkov::simulate::exact::sample_exact_stream;
use carkov::validate::{check_partial_correlation, scalar_partial_correlation};
use carkov::{assemble, Complex64, RootSpec};

fn main() -> carkov::Result<()> {
    let root = Complex64::new(0.0, 1.0);
    let spec = RootSpec::validate(&[root, root], 1.0)?;
    let an = assemble(&spec)?;
    let h = 0.5;
    let paths = (0..2_000)
        .map(|s| sample_exact_stream(&an.ito, &an.law, h, 2, 3, s))
        .collect::<carkov::Result<Vec<_>>>()?;
    let report = check_partial_correlation(&paths, spec.k(), 0, 1, 2)?;
    println!("given Z(t): {}", report.vector);
    println!("given Y(t): {}", report.scalar);
    println!("population partial correlation given Y(t): {:.4}", scalar_partial_correlation(&an.covariance, h));
    Ok(())
}
