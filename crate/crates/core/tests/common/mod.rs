//! Shared helpers for the integration tests.
#![allow(dead_code)]

use carkov::{Complex64, RootSpec};
use rand::Rng;

/// Smallest distance kept between distinct random roots, so the residue
/// expansion never sits next to a near-degenerate configuration.
pub const MIN_SEPARATION: f64 = 0.1;

fn far_enough(roots: &[Complex64], z: Complex64) -> bool {
    roots.iter().all(|r| (r - z).norm() >= MIN_SEPARATION)
}

/// A valid spec with `k + 1` roots, `im` in `[0.2, 3]`, `|re| <= 3`,
/// pairs `zeta, -conj(zeta)` and imaginary singletons mixed at random.
pub fn random_spec(rng: &mut impl Rng, k: usize) -> RootSpec {
    let n = k + 1;
    let mut roots: Vec<Complex64> = Vec::with_capacity(n);
    while roots.len() < n {
        let im = rng.random_range(0.2..=3.0);
        let pair = roots.len() + 2 <= n && rng.random_bool(0.6);
        let z = if pair { Complex64::new(rng.random_range(0.05..=3.0), im) } else { Complex64::new(0.0, im) };
        if !far_enough(&roots, z) || (pair && !far_enough(&roots, -z.conj())) {
            continue;
        }
        roots.push(z);
        if pair {
            roots.push(-z.conj());
        }
    }
    let scale = rng.random_range(0.5..=2.0);
    RootSpec::validate(&roots, scale).expect("random roots are paired and separated")
}

pub fn spec(roots: &[(f64, f64)], scale: f64) -> RootSpec {
    let roots: Vec<Complex64> = roots.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
    RootSpec::validate(&roots, scale).unwrap()
}

/// The `k = 2` reference model with roots `1 + i, -1 + i, 2i`.
pub fn k2_model() -> RootSpec {
    spec(&[(1.0, 1.0), (-1.0, 1.0), (0.0, 2.0)], 1.0)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
