//! Wave speeds, cutoff frequency and dimensionless groups of the two
//! reference materials, plus a JSON round trip of the parameter file.

use mnw::material::dimensionless_params;
use mnw::material::samples::{classical, micropolar};

fn main() -> mnw::Result<()> {
    for (name, m) in [("micropolar", micropolar()), ("classical", classical())] {
        let report = m.validate();
        println!("{name}: valid = {}", report.is_ok());

        let sc = m.scales()?;
        println!("  c1 = {:.3} m/s, c2 = {:.3} m/s", sc.c1, sc.c2);
        println!("  c3 = {:.3} m/s, c4 = {:.3} m/s", sc.c3, sc.c4);
        println!("  d = mu/(mu+kappa) = {:.6}", sc.d);
        println!("  omega_c = {:.6e} rad/s", sc.omega_cutoff);

        let k = 1.0 / (10.0 * m.a_nl);
        let g = dimensionless_params(&m, k)?;
        println!("  at k = 1/(10a): eps = {:.3}, J = {:.3e}", g.eps, g.j_ratio);

        let back = mnw::MaterialParams::from_json_str(&m.to_json_string())?;
        assert_eq!(back, m);
    }
    Ok(())
}
