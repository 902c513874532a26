//! Residue evaluation of `r^(j)(t)` against direct quadrature of the
//! spectral integral `int (iz)^j e^{izt} / |P(z)|^2 dz`.
//!
//! cargo run --example quadrature_oracle

use carkov::{quadrature_r, Complex64, CovarianceModel, RootSpec};

fn main() -> carkov::Result<()> {
    let roots = [Complex64::new(1.0, 1.0), Complex64::new(-1.0, 1.0), Complex64::new(0.0, 2.0)];
    let spec = RootSpec::validate(&roots, 1.0)?;
    let cov = CovarianceModel::residue_expansion(&spec)?;
    println!("{:>2} {:>5} {:>22} {:>22} {:>10}", "j", "t", "residues", "quadrature", "abs diff");
    for j in 0..=2 * spec.k() {
        for t in [0.0, 0.5, 1.0, 2.0, 5.0] {
            let closed = cov.eval(j, t)?;
            let quad = quadrature_r(&spec, j, t)?;
            println!("{j:>2} {t:>5} {closed:>22.15e} {quad:>22.15e} {:>10.2e}", (closed - quad).abs());
        }
    }
    Ok(())
}
