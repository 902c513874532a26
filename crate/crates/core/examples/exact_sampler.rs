//! Exact discretisation of the Ito system, `Z_{m+1} = exp(A dt) Z_m + L xi_m`,
//! and a check of the empirical autocovariance against `r`.
//!
//! cargo run --release --example exact_sampler

use carkov::simulate::sample_exact;
use carkov::validate::check_empirical_covariance;
use carkov::{assemble, Complex64, RootSpec};

fn main() -> carkov::Result<()> {
    let roots = [Complex64::new(1.0, 1.0), Complex64::new(-1.0, 1.0), Complex64::new(0.0, 2.0)];
    let spec = RootSpec::validate(&roots, 1.0)?;
    let an = assemble(&spec)?;
    println!("drift a = {:?}, b = {:.6}", an.ito.drift(), an.ito.b());

    let path = sample_exact(&an.ito, &an.law, 0.01, 200_000, 7)?;
    println!("{} grid points of (Y, Y', Y'')", path.len());
    let report = check_empirical_covariance(&path, &an.covariance, &[0.0, 0.5, 1.0, 2.0])?;
    println!("{report}");

    let mut head = Vec::new();
    let short = sample_exact(&an.ito, &an.law, 0.1, 5, 7)?;
    short.write_csv(&mut head).expect("writing to memory");
    print!("{}", String::from_utf8_lossy(&head));
    Ok(())
}
