//! Special functions and adaptive quadrature.

pub mod bessel;
pub mod quadrature;

pub use bessel::{bessel_k0, bessel_k1, UNDERFLOW_LIMIT};
pub use quadrature::{
    integrate_1d, integrate_2d_polar, integrate_2d_rect, integrate_semi_infinite, QuadratureSpec,
};
