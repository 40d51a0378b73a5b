//! The kernel `K0(r/a)/(2πa²)` and its mass inside the truncation radius.

use mnw::kernel::{kernel_weight, TRUNCATION_RADIUS};
use mnw::specfun::{bessel_k0, bessel_k1, integrate_2d_polar, QuadratureSpec};
use mnw::Complex64;

fn main() -> mnw::Result<()> {
    println!("{:>8} {:>22} {:>22}", "x", "K0(x)", "K1(x)");
    for x in [1e-3, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0] {
        println!("{x:>8} {:>22.15e} {:>22.15e}", bessel_k0(x)?, bessel_k1(x)?);
    }

    let a = 1e-5;
    let spec = QuadratureSpec::with_rel_tol(1e-10);
    for radius in [1.0, 4.0, TRUNCATION_RADIUS, 40.0] {
        let mass = integrate_2d_polar(
            |r, _| Complex64::new(kernel_weight(r, a).unwrap(), 0.0),
            radius * a,
            &spec,
        )?;
        println!("mass within {radius:>4}a: {:.12}", mass.re);
    }
    Ok(())
}
