//! Two-dimensional Navier–Stokes on the periodic torus: a pseudo-spectral
//! solver plus the inviscid-limit functionals built on top of it.

pub mod ball;
pub mod bessel;
pub mod diagnostics;
pub mod dynamics;
pub mod equi;
pub mod error;
pub mod field;
pub mod gallery;
pub mod grid;
pub mod init;
pub mod mollify;
pub mod norms;
pub mod snapshot;

pub use ball::{ball_convolve, BallKernel};
pub use error::{Error, Result};
pub use field::{biot_savart, curl, dealias, divergence, ScalarField, VectorField};
pub use grid::{fft_friendly_at_least, make_grid, min_resolved_n, TorusGrid};
pub use mollify::{mollify, Mollifier};
pub use norms::{norms, Norms};
pub use rustfft::num_complex::Complex64;
