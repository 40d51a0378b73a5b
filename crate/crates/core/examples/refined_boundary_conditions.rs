//! Residuals of the classical, first-order and refined traction conditions on
//! the exact near-surface mode, and their rates of decay with ε.

use mnw::asymptotic::{
    bc_residual_classical, bc_residual_refined, extra_bc_residual, near_surface_mode,
    reference_wavenumber, slope_study, SLOPE_EPS,
};
use mnw::material::samples::{classical, micropolar};

fn norm(r: &[mnw::Complex64]) -> f64 {
    r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn main() -> mnw::Result<()> {
    for (name, m) in [("micropolar", micropolar()), ("classical", classical())] {
        let k = reference_wavenumber(&m)?;
        println!("{name} (k = {k:.4} 1/m)");

        let mode = near_surface_mode(&m, k, 0.1)?;
        println!(
            "  eps = 0.1: v = {:.6} m/s after {} secant steps",
            mode.v.re, mode.iterations
        );
        println!("    classical residual {:.3e}", norm(&bc_residual_classical(&mode.solution)));
        println!("    refined residual   {:.3e}", norm(&bc_residual_refined(&mode.solution, 0.1)));
        println!("    extra conditions   {:.3e}", norm(&extra_bc_residual(&mode.solution)));

        let study = slope_study(&m, k, &SLOPE_EPS)?;
        println!(
            "  slopes over eps = {:?}: classical {:.2}, first order {:.2}, refined {:.2}",
            SLOPE_EPS, study.classical_slope, study.first_order_slope, study.refined_slope
        );
    }
    Ok(())
}
