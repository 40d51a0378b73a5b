//! Modified Bessel functions of the second kind, orders 0 and 1.
//!
//! For `x <= 2` the ascending series around the logarithmic singularity is
//! summed directly; above that, Temme's continued fraction (Steed's
//! algorithm) delivers `K0` and `K1` together. Both branches are accurate to a
//! few ulps on `[1e-6, 700]`.

use std::f64::consts::FRAC_PI_2;

use crate::{Error, Result};

/// Euler–Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Boundary between the series and the continued-fraction branch.
pub(crate) const SERIES_LIMIT: f64 = 2.0;

/// Beyond this argument `K0` and `K1` are reported as zero.
pub const UNDERFLOW_LIMIT: f64 = 700.0;

const MAX_TERMS: usize = 500;

/// `K0(x)` for `x > 0`.
pub fn bessel_k0(x: f64) -> Result<f64> {
    check_domain(x)?;
    Ok(k0_unchecked(x))
}

/// `K1(x)` for `x > 0`. Note `K0'(x) = -K1(x)`.
pub fn bessel_k1(x: f64) -> Result<f64> {
    check_domain(x)?;
    Ok(k1_unchecked(x))
}

fn check_domain(x: f64) -> Result<()> {
    if x > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "K0/K1 require a positive argument, got {x}"
        )))
    }
}

pub(crate) fn k0_unchecked(x: f64) -> f64 {
    if x > UNDERFLOW_LIMIT {
        0.0
    } else if x <= SERIES_LIMIT {
        k0_series(x)
    } else {
        steed(x).0
    }
}

pub(crate) fn k1_unchecked(x: f64) -> f64 {
    if x > UNDERFLOW_LIMIT {
        0.0
    } else if x <= SERIES_LIMIT {
        k1_series(x)
    } else {
        steed(x).1
    }
}

/// K0(x) = -(ln(x/2) + γ) I0(x) + Σ_{k≥1} H_k (x²/4)^k / (k!)²
fn k0_series(x: f64) -> f64 {
    let t = 0.25 * x * x;
    let log_term = (0.5 * x).ln() + EULER_GAMMA;
    let mut term = 1.0; // (x²/4)^k / (k!)²
    let mut i0 = 1.0;
    let mut harmonic = 0.0;
    let mut tail = 0.0;
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        term *= t / (kf * kf);
        harmonic += 1.0 / kf;
        i0 += term;
        tail += harmonic * term;
        if term < 1e-18 * i0 {
            break;
        }
    }
    -log_term * i0 + tail
}

/// K1(x) = 1/x + ln(x/2) I1(x) - (x/4) Σ_{k≥0} [ψ(k+1) + ψ(k+2)] (x²/4)^k / (k!(k+1)!)
fn k1_series(x: f64) -> f64 {
    let t = 0.25 * x * x;
    let mut term = 1.0; // (x²/4)^k / (k!(k+1)!)
    let mut psi_k1 = -EULER_GAMMA; // ψ(k+1)
    let mut psi_k2 = 1.0 - EULER_GAMMA; // ψ(k+2)
    let mut i1_sum = term;
    let mut psi_sum = (psi_k1 + psi_k2) * term;
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        term *= t / (kf * (kf + 1.0));
        psi_k1 += 1.0 / kf;
        psi_k2 += 1.0 / (kf + 1.0);
        i1_sum += term;
        psi_sum += (psi_k1 + psi_k2) * term;
        if term < 1e-18 * i1_sum {
            break;
        }
    }
    let i1 = 0.5 * x * i1_sum;
    1.0 / x + ((0.5 * x).ln()) * i1 - 0.25 * x * psi_sum
}

/// Temme's second continued fraction evaluated with Steed's algorithm,
/// returning `(K0(x), K1(x))`. Valid for `x >= 2`.
fn steed(x: f64) -> (f64, f64) {
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..MAX_TERMS {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;
    let k0 = (FRAC_PI_2 / x).sqrt() * (-x).exp() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::quadrature::{integrate_semi_infinite, QuadratureSpec};
    use crate::C64;

    fn tight() -> QuadratureSpec {
        QuadratureSpec {
            rel_tol: 1e-13,
            abs_tol: 0.0,
            max_subdivisions: 4000,
        }
    }

    /// Integral representation K_n(x) = ∫₀^∞ exp(-x cosh t) cosh(n t) dt.
    fn k_oracle(n: i32, x: f64) -> f64 {
        integrate_semi_infinite(
            |t| C64::new((-x * t.cosh()).exp() * (n as f64 * t).cosh(), 0.0),
            0.0,
            &tight(),
        )
        .unwrap()
        .re
    }

    #[test]
    fn frozen_reference_values() {
        // frozen from the integral-representation oracle
        assert!((bessel_k0(1.0).unwrap() - 0.421024438240708).abs() < 1e-14);
        assert!((bessel_k0(0.5).unwrap() - 0.924419071227666).abs() < 1e-14);
        assert!((k_oracle(0, 1.0) - 0.421024438240708).abs() < 1e-13);
        assert!((k_oracle(0, 0.5) - 0.924419071227666).abs() < 1e-13);
    }

    #[test]
    fn agrees_with_integral_representation() {
        let xs = [
            1e-6, 1e-3, 0.1, 0.5, 1.0, 1.9, 1.999, 2.0, 2.001, 2.5, 3.7, 5.0, 10.0, 24.0, 50.0,
            120.0, 400.0, 690.0,
        ];
        for x in xs {
            let k0 = bessel_k0(x).unwrap();
            let k1 = bessel_k1(x).unwrap();
            let o0 = k_oracle(0, x);
            let o1 = k_oracle(1, x);
            assert!((k0 - o0).abs() <= 1e-12 * o0, "K0({x}) = {k0} vs {o0}");
            assert!((k1 - o1).abs() <= 1e-12 * o1, "K1({x}) = {k1} vs {o1}");
        }
    }

    #[test]
    fn branches_agree_at_the_split_point() {
        let below = k0_series(SERIES_LIMIT);
        let above = steed(SERIES_LIMIT).0;
        assert!((below - above).abs() < 2e-15 * above);
        let below = k1_series(SERIES_LIMIT);
        let above = steed(SERIES_LIMIT).1;
        assert!((below - above).abs() < 2e-15 * above);
    }

    #[test]
    fn domain_and_underflow() {
        assert!(matches!(bessel_k0(0.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_k0(-1.0), Err(Error::Domain(_))));
        assert!(bessel_k0(f64::NAN).is_err());
        assert_eq!(bessel_k0(700.5).unwrap(), 0.0);
        assert_eq!(bessel_k1(1e4).unwrap(), 0.0);
    }

    #[test]
    fn strictly_decreasing() {
        let mut prev = bessel_k0(1e-4).unwrap();
        let mut x = 1e-4;
        while x < 50.0 {
            x *= 1.01;
            let next = bessel_k0(x).unwrap();
            assert!(next < prev, "not decreasing at {x}");
            prev = next;
        }
    }

    #[test]
    fn asymptotic_envelope() {
        for i in 0..200 {
            let x = 5.0 + i as f64 * 1.5;
            let lead = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp();
            let k0 = bessel_k0(x).unwrap();
            assert!(k0 >= lead * (1.0 - 1.0 / (8.0 * x)));
            assert!(k0 <= lead * (1.0 + 1.0 / (8.0 * x)));
        }
    }

    #[test]
    fn wronskian_with_derivative() {
        // d/dx K0 = -K1, checked by central differences
        for x in [0.3, 1.0, 2.0, 4.0, 9.0] {
            let h = 1e-5 * x;
            let fd = (k0_unchecked(x + h) - k0_unchecked(x - h)) / (2.0 * h);
            assert!((fd + k1_unchecked(x)).abs() < 1e-8 * k1_unchecked(x));
        }
    }
}
