//! Adaptive Gauss-Kronrod integration and the direct spectral-integral
//! evaluation of `r^(j)(t) = int (iz)^j e^{izt} / |P(z)|^2 dz`.

use std::collections::BinaryHeap;
use std::cmp::Ordering;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::RootSpec;

// 15-point Kronrod abscissae (positive half) and weights; the 7-point
// Gauss rule uses every other node.
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs = fc.abs() * WGK[7];
    for i in 0..7 {
        let dx = half * XGK[i];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod += WGK[i] * (f1 + f2);
        abs += WGK[i] * (f1.abs() + f2.abs());
        if i % 2 == 1 {
            gauss += WG[i / 2] * (f1 + f2);
        }
    }
    let value = kronrod * half;
    let raw_err = ((kronrod - gauss) * half).abs();
    // QUADPACK-style sharpening of the raw Gauss/Kronrod gap.
    let error = if raw_err > 0.0 {
        let ratio = (200.0 * raw_err / (abs * half.abs()).max(f64::MIN_POSITIVE)).powf(1.5);
        (abs * half.abs() * ratio.min(1.0)).max(raw_err.min(abs * half.abs()))
    } else {
        0.0
    };
    Panel { a, b, value, error: error.max(50.0 * f64::EPSILON * abs * half.abs()), abs: abs * half.abs() }
}

/// Globally adaptive G7-K15 integration of `f` over `[a, b]`.
///
/// Stops once the summed error estimate is below `rel_tol` times the
/// integral of `|f|`, or fails after `max_panels` subdivisions.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, max_panels: usize) -> Result<f64> {
    let mut heap = BinaryHeap::new();
    let first = gk15(&f, a, b);
    let (mut error, mut abs) = (first.error, first.abs);
    heap.push(first);
    while error > rel_tol * abs.max(f64::MIN_POSITIVE) {
        if heap.len() >= max_panels {
            return Err(Error::NotConverged(format!(
                "{max_panels} panels on [{a}, {b}], error {error:e} vs |f| {abs:e}"
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        let left = gk15(&f, worst.a, mid);
        let right = gk15(&f, mid, worst.b);
        error += left.error + right.error - worst.error;
        abs += left.abs + right.abs - worst.abs;
        heap.push(left);
        heap.push(right);
        if heap.len() % 64 == 0 {
            // Resum to shed accumulated cancellation in the running totals.
            error = heap.iter().map(|p| p.error).sum();
            abs = heap.iter().map(|p| p.abs).sum();
        }
    }
    Ok(heap.iter().map(|p| p.value).sum())
}

const REL_TOL: f64 = 1e-12;
const MAX_PANELS: usize = 20_000;

/// `r^(j)(t)` from the spectral integral, without using any residues.
///
/// The real line is split at `Z = 3 max|zeta| + 1`. On `[0, Z]` the even
/// integrand `2 Re[(iz)^j e^{izt}] / |P(z)|^2` is integrated directly. The
/// tail `[Z, inf)` is moved onto the vertical ray `Z + iy`, where `e^{izt}`
/// decays instead of oscillating; no poles lie to the right of the ray.
pub fn quadrature_r(spec: &RootSpec, j: usize, t: f64) -> Result<f64> {
    let k = spec.k();
    if j > 2 * k {
        return Err(Error::OrderTooHigh { order: j, max: 2 * k });
    }
    if !t.is_finite() {
        return Err(Error::InvalidArgument("t must be finite".into()));
    }
    let sign = if t < 0.0 && j % 2 == 1 { -1.0 } else { 1.0 };
    let t = t.abs();
    let i_pow = Complex64::i().powu(j as u32);

    let central = |z: f64| {
        let phase = Complex64::new(0.0, z * t).exp();
        2.0 * (i_pow * phase).re * z.powi(j as i32) / spec.abs_p_squared(z)
    };
    let big_z = 3.0 * spec.max_modulus() + 1.0;
    let inner = integrate(central, 0.0, big_z, REL_TOL, MAX_PANELS)?;

    let c = spec.scale();
    let one = Complex64::new(1.0, 0.0);
    let analytic_density = |z: Complex64| -> Complex64 {
        let mut prod = Complex64::new(c * c, 0.0);
        for zeta in spec.roots() {
            prod *= (one - z / zeta) * (one - z / zeta.conj());
        }
        prod.inv()
    };
    let ray = |s: f64| {
        if s >= 1.0 {
            return 0.0;
        }
        let y = s / (1.0 - s);
        let jac = 1.0 / ((1.0 - s) * (1.0 - s));
        let z = Complex64::new(big_z, y);
        let h = i_pow * z.powu(j as u32) * (Complex64::i() * z * t).exp() * analytic_density(z);
        // 2 Re[ i * h ] * dy/ds
        2.0 * (Complex64::i() * h).re * jac
    };
    let tail = integrate(ray, 0.0, 1.0, REL_TOL, MAX_PANELS)?;
    Ok(sign * (inner + tail))
}
