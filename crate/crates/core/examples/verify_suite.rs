//! The full consistency suite on the bundled models, plus a deliberately
//! perturbed model that must fail.
//!
//! cargo run --release --example verify_suite

use carkov::validate::{run_suite, SuiteOptions};
use carkov::{Complex64, RootSpec};

fn show(title: &str, spec: &RootSpec, opts: &SuiteOptions) {
    println!("== {title}");
    let reports = run_suite(spec, opts);
    for r in &reports {
        println!("{r}");
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    println!("{} checks, {failed} failed\n", reports.len());
}

fn main() -> carkov::Result<()> {
    let i = Complex64::new(0.0, 1.0);
    let k2 = [Complex64::new(1.0, 1.0), Complex64::new(-1.0, 1.0), Complex64::new(0.0, 2.0)];
    let opts = SuiteOptions::default();
    show("k = 0", &RootSpec::validate(&[i], 1.0)?, &opts);
    show("k = 1", &RootSpec::validate(&[i, i], 1.0)?, &opts);
    show("k = 2", &RootSpec::validate(&k2, 1.0)?, &opts);
    let perturbed = SuiteOptions { perturbation: Some((0, 1.01)), ..opts };
    show("k = 2, one coefficient scaled by 1.01", &RootSpec::validate(&k2, 1.0)?, &perturbed);
    Ok(())
}
