//! Closed-form boundary-layer integrals `I_i(η)` next to their quadrature,
//! and the convergence of the difference as ε shrinks.

use mnw::asymptotic::{loglog_slope, SLOPE_EPS};
use mnw::material::samples::micropolar;
use mnw::specfun::QuadratureSpec;
use mnw::wavefield::{
    blayer_integral_closed, blayer_integral_quadrature, decay_exponents_paper, ModeParams, ModeTag,
};

fn main() -> mnw::Result<()> {
    let m = micropolar();
    let sc = m.scales()?;
    let state = ModeParams::from_velocity(&m, 3.0 * sc.omega_cutoff, 0.5 * sc.c2, ModeTag::Elastic)?;
    let spec = QuadratureSpec::with_rel_tol(1e-13);

    let de = decay_exponents_paper(&m, &state.with_eps(0.1))?;
    println!("eps = 0.1");
    println!("{:>2} {:>6} {:>20} {:>20}", "i", "eta", "closed", "quadrature");
    for i in 1..=3 {
        for eta in [0.0, 0.25, 1.0, 4.0] {
            let closed = blayer_integral_closed(i, &de, 0.1, eta)?;
            let quad = blayer_integral_quadrature(i, &de, 0.1, eta, &spec)?;
            println!("{i:>2} {eta:>6} {:>20.14} {:>20.14}", closed.re, quad.re);
        }
    }

    for i in 1..=3 {
        let errors = SLOPE_EPS
            .iter()
            .map(|&eps| {
                let de = decay_exponents_paper(&m, &state.with_eps(eps))?;
                let closed = blayer_integral_closed(i, &de, eps, 0.0)?;
                let quad = blayer_integral_quadrature(i, &de, eps, 0.0, &spec)?;
                Ok((quad - closed).norm() / closed.norm())
            })
            .collect::<mnw::Result<Vec<f64>>>()?;
        println!(
            "I_{i}(0): errors {:.2e} {:.2e} {:.2e}, slope {:.2}",
            errors[0], errors[1], errors[2], loglog_slope(&SLOPE_EPS, &errors)
        );
    }
    Ok(())
}
