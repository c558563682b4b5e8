//! Numerical building blocks for Hölder-logarithmic stability estimates of the
//! Gel'fand inverse boundary value problem for `-Δψ + vψ = Eψ` on a cube in R³.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: the cube, its boundary quadrature and complex momenta on the
//!   variety `k·k = E`.
//! * [`potential`]: grid potentials, their lattice Fourier transforms and norms.
//! * [`forward`]: finite-difference Dirichlet solves and Dirichlet-to-Neumann maps.
//! * [`faddeev`]: the Faddeev Green function and exponentially growing solutions.
//! * [`identity`]: boundary/volume forms of `h₂ - h₁` and pointwise lemma checks.
//! * [`estimator`]: parameter choices, error splits and the final bounds.

pub mod error;
pub mod estimator;
pub mod faddeev;
mod fft;
pub mod forward;
pub mod geometry;
pub mod identity;
pub mod potential;

pub use error::{Error, Result};
pub use num_complex::Complex64;
