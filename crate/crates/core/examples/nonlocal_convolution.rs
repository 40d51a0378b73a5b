//! Integral and differential forms of the non-local model agree: convolving a
//! smooth field with the kernel and applying `1 − a²∇²` gives the field back.

use mnw::kernel::{convolve_halfplane, helmholtz_roundtrip, ScalarField2D};
use mnw::Complex64;

fn main() -> mnw::Result<()> {
    let a = 1.0;
    let h = a / 5.0;
    let n = 191;
    let start = -19.0 * a;
    let gaussian = ScalarField2D::from_fn(n, n, h, h, start, start, |x, z| {
        Complex64::new((-(x * x + z * z) / (25.0 * a * a)).exp(), 0.0)
    })?;

    let trip = helmholtz_roundtrip(&gaussian, a)?;
    println!(
        "full plane: max relative error {:.3e} over {} interior nodes",
        trip.rel_linf, trip.nodes
    );

    // On a half-plane the kernel loses the mass above the surface, so the
    // convolved field drops to about half the field on the top row.
    let h = 0.4 * a;
    let wide = ScalarField2D::from_fn(201, 101, h, h, -40.0 * a, 0.0, |x, z| {
        Complex64::new((-(x * x + z * z) / (64.0 * a * a)).exp(), 0.0)
    })?;
    let smoothed = convolve_halfplane(&wide, a)?;
    let mid = 100;
    for j in [0, 1, 3, 5, 10] {
        println!(
            "z = {:>3.1}a: (K * f) / f = {:.4}",
            smoothed.z(j) / a,
            (smoothed.at(mid, j) / wide.at(mid, j)).re
        );
    }
    Ok(())
}
