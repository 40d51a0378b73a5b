//! # mnw
//!
//! Rayleigh surface waves in a non-local micropolar elastic half-space.
//!
//! The crate evaluates the Bessel-kernel non-local model in both its
//! integral and differential forms, the harmonic mode ansatz with its decay
//! exponents, the two leading-order dispersion relations, the boundary-layer
//! integrals carried by the `exp(-z/a)` terms, and the residuals of the
//! classical, first-order and refined traction-free boundary conditions.
//!
//! ## Modules
//!
//! - [`material`]: physical constants, wave speeds, dimensionless groups
//! - [`specfun`]: modified Bessel functions `K0`, `K1` and adaptive quadrature
//! - [`kernel`]: non-local kernel, grid convolution, Helmholtz operator,
//!   one-dimensional trace integral and the boundary operator
//! - [`wavefield`]: mode ansatz, decay exponents, local and non-local stresses,
//!   boundary-layer integrals, equation-of-motion residuals
//! - [`dispersion`]: secular equation, root finding, frequency sweeps
//! - [`asymptotic`]: equivalence residuals, boundary-layer coefficients,
//!   boundary-condition residuals, and the near-surface mode of the singularly
//!   perturbed model
//! - [`cli`]: the `mnw` command-line front end
//!
//! Runnable examples live in `crates/core/examples/`, one per capability:
//!
//! ```bash
//! cargo run -p mnw --example material_scales
//! cargo run -p mnw --example bessel_kernel
//! cargo run -p mnw --release --example nonlocal_convolution
//! cargo run -p mnw --example boundary_layer_integral
//! cargo run -p mnw --example rayleigh_dispersion
//! cargo run -p mnw --example equivalence_failure
//! cargo run -p mnw --example refined_boundary_conditions
//! cargo run -p mnw --example cli_in_process
//! ```

pub mod asymptotic;
pub mod cli;
pub mod dispersion;
mod error;
pub mod kernel;
pub mod material;
pub mod specfun;
pub mod wavefield;

pub use error::{Error, Result};
pub use material::{DerivedScales, Dimensionless, MaterialParams, ValidationOutcome};
pub use num_complex::Complex64;

/// Shorthand used throughout the crate.
pub(crate) type C64 = Complex64;

/// The imaginary unit.
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Shortest decimal text that parses back to the same `f64`; switches to
/// exponent notation outside `[1e-5, 1e16)` to keep lines short.
pub(crate) fn fmt_f64(v: f64) -> String {
    let magnitude = v.abs();
    if v == 0.0 || (1e-5..1e16).contains(&magnitude) || !v.is_finite() {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}
