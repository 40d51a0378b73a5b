//! The integral and differential models stop being equivalent at the surface:
//! the residual of the extra surface condition stays finite on both
//! leading-order modes.

use mnw::asymptotic::{equivalence_residual_elastic, equivalence_residual_micropolar};
use mnw::dispersion::{micropolar_velocity, solve_rayleigh};
use mnw::material::samples::micropolar;

fn main() -> mnw::Result<()> {
    let m = micropolar();
    let sc = m.scales()?;

    let point = solve_rayleigh(&m, 1.0, 1e-13)?;
    let elastic = equivalence_residual_elastic(&m, &point)?;
    println!("elastic Rayleigh root v = {:.4} m/s", point.v);
    println!("  bracket = {:.6}", elastic.bracket.re);
    println!("  coefficient / k^3 = {:.6}", elastic.coefficient.re / point.k.powi(3));

    for ratio in [1.5, 2.0, 4.0] {
        let omega = ratio * sc.omega_cutoff;
        let v = micropolar_velocity(&m, omega)?;
        if v >= sc.c2 {
            println!("micropolar mode at {ratio} omega_c is faster than c2, skipped");
            continue;
        }
        let k = omega / v;
        let r = equivalence_residual_micropolar(&m, v, k)?;
        println!("micropolar mode at {ratio} omega_c: residual / k^3 = {:.6}", r.re / k.powi(3));
    }
    Ok(())
}
