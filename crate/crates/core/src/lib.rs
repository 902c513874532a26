//! Stationary Gaussian processes whose first `k` derivatives form a Markov
//! vector, handled through three equivalent descriptions:
//!
//! * the spectral polynomial `P(z)` with density `1 / |P(z)|^2`
//!   ([`model`], [`covariance`]);
//! * the spectral / moving-average representation ([`simulate`]);
//! * the Ito vector diffusion for `Z = (Y, Y', ..., Y^(k))` ([`markov`]).
//!
//! [`validate`] turns the identities linking them into executable checks,
//! and [`cli`] wires everything into the `carkov` command.

pub mod cli;
pub mod covariance;
pub mod error;
mod linalg;
pub mod markov;
pub mod model;
pub mod simulate;
pub mod validate;

pub use num_complex::Complex64;
pub use covariance::{quadrature_r, CovarianceModel, SpectralMoments, Term};
pub use error::{Error, Result};
pub use markov::{assemble, Analysis, ItoSystem, StationaryLaw};
pub use model::{RealPolynomial, RootSpec};
pub use simulate::{Method, SamplePath};
