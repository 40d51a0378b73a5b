//! Leading-order dispersion: the elastic Rayleigh root, the micropolar
//! branch above its cutoff, and a CSV sweep.

use mnw::dispersion::{micropolar_velocity, solve_rayleigh, sweep};
use mnw::material::samples::{classical, micropolar};
use mnw::wavefield::ModeTag;

fn main() -> mnw::Result<()> {
    let m = classical();
    let v = solve_rayleigh(&m, 1.0, 1e-12)?.v;
    println!("classical Poisson solid: v_R / c2 = {:.6}", v / m.scales()?.c2);

    let m = micropolar();
    let sc = m.scales()?;
    let elastic = solve_rayleigh(&m, sc.omega_cutoff, 1e-12)?;
    println!("micropolar sample, elastic mode: v = {:.4} m/s", elastic.v);

    println!("micropolar mode (v tends to c4 = {:.4} m/s):", sc.c4);
    for ratio in [1.05, 1.5, 2.0, 5.0, 20.0] {
        let v = micropolar_velocity(&m, ratio * sc.omega_cutoff)?;
        println!("  omega = {ratio:>5} omega_c  ->  v = {v:.4} m/s");
    }
    if let Err(e) = micropolar_velocity(&m, 0.5 * sc.omega_cutoff) {
        println!("below cutoff: {e}");
    }

    let curve = sweep(&m, 0.5 * sc.omega_cutoff, 4.0 * sc.omega_cutoff, 6, ModeTag::Micropolar)?;
    print!("{}", curve.to_csv());
    Ok(())
}
