//! The harmonic surface-wave ansatz and everything evaluated on it.
//!
//! A mode is a sum of branches `A · exp(ikx − k r z)`, each carrying a scalar
//! potential `φ`, a vector potential `ψ` and a microrotation `Φ₂`. Spatial
//! derivatives act on a branch as `∂x → ik` and `∂z → −kr`, so stresses and
//! equation-of-motion residuals are closed-form. The time factor
//! `exp(−iωt)` is suppressed throughout.

use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use crate::kernel::{approx_trace_integral, SurfaceTrace};
use crate::material::{derive_scales, MaterialParams};
use crate::specfun::QuadratureSpec;
use crate::{Error, Result, C64, I};

/// Which of the two surface modes a state belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeTag {
    /// The Rayleigh-type mode governed by the classical secular function.
    Elastic,
    /// The mode created by micropolarity, with a cutoff frequency.
    Micropolar,
}

impl fmt::Display for ModeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModeTag::Elastic => "elastic",
            ModeTag::Micropolar => "micropolar",
        })
    }
}

impl FromStr for ModeTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "elastic" => Ok(ModeTag::Elastic),
            "micropolar" => Ok(ModeTag::Micropolar),
            other => Err(Error::InvalidInput(format!(
                "unknown mode `{other}`, expected `elastic` or `micropolar`"
            ))),
        }
    }
}

/// Wavenumber, frequency and phase velocity of a state, with its
/// non-locality parameter `eps = a·k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeParams {
    pub k: f64,
    pub omega: f64,
    pub v: f64,
    pub eps: f64,
    pub mode_tag: ModeTag,
}

impl ModeParams {
    pub fn new(k: f64, omega: f64, eps: f64, mode_tag: ModeTag) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) || !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "mode needs positive k and omega, got k = {k}, omega = {omega}"
            )));
        }
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::InvalidInput(format!("eps must be non-negative, got {eps}")));
        }
        Ok(ModeParams {
            k,
            omega,
            v: omega / k,
            eps,
            mode_tag,
        })
    }

    /// State of material `m` at frequency `omega` travelling with speed `v`;
    /// `k = ω/v` and `eps = a_nl·k`.
    pub fn from_velocity(m: &MaterialParams, omega: f64, v: f64, mode_tag: ModeTag) -> Result<Self> {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidInput(format!("phase velocity must be positive, got {v}")));
        }
        let k = omega / v;
        Self::new(k, omega, m.a_nl * k, mode_tag)
    }

    /// The same state with a different `eps`, keeping `k`, `ω` and `v`.
    pub fn with_eps(self, eps: f64) -> Self {
        ModeParams { eps, ..self }
    }
}

/// Decay exponents of the three branches and the rotation coupling `s`.
///
/// In the decoupled limit `κ = 0` the third branch does not exist and `r3`,
/// `r30`, `s` and `s_derived` are `None`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayExponents {
    pub r1: C64,
    pub r2: C64,
    pub r3: Option<C64>,
    /// Coupling `Φ₂ = s k² R e^{−k r3 z}` as printed with the decay exponents.
    pub s: Option<C64>,
    /// The coupling that makes the rotational part of the `ψ` equation vanish
    /// on the third branch. Equal to `−s` under the sign conventions used
    /// here; carried for diagnostics only.
    pub s_derived: Option<C64>,
    pub r10: C64,
    pub r20: C64,
    pub r30: Option<C64>,
}

impl DecayExponents {
    /// `Re r1 > 0`, `Re r2 > 0` and `Re r3 ≥ 0`.
    pub fn is_admissible(&self) -> bool {
        self.r1.re > 0.0 && self.r2.re > 0.0 && self.r3.map_or(true, |r| r.re >= 0.0)
    }

    /// `r_i` for `i ∈ {1, 2, 3}`.
    pub fn rate(&self, i: usize) -> Result<C64> {
        match i {
            1 => Ok(self.r1),
            2 => Ok(self.r2),
            3 => self.r3.ok_or_else(decoupled),
            _ => Err(Error::InvalidInput(format!("branch index must be 1, 2 or 3, got {i}"))),
        }
    }

    /// `r_i0` for `i ∈ {1, 2, 3}`.
    pub fn leading(&self, i: usize) -> Result<C64> {
        match i {
            1 => Ok(self.r10),
            2 => Ok(self.r20),
            3 => self.r30.ok_or_else(decoupled),
            _ => Err(Error::InvalidInput(format!("branch index must be 1, 2 or 3, got {i}"))),
        }
    }
}

fn decoupled() -> Error {
    Error::Singular("the third branch does not exist in the decoupled limit kappa = 0".into())
}

/// Square root on the decaying branch: principal value, negated when the real
/// part is negative; purely imaginary results are taken with positive
/// imaginary part.
pub fn decay_sqrt(z: C64) -> C64 {
    let mut r = z.sqrt();
    if r.re < 0.0 || (r.re == 0.0 && r.im < 0.0) {
        r = -r;
    }
    r
}

/// `1 − v²/den`, guarding against a vanishing denominator.
fn one_minus_ratio(v2: f64, den: f64, what: &str) -> Result<f64> {
    if den == 0.0 {
        return Err(Error::Singular(format!(
            "{what} - eps^2 v^2 vanishes, the decay exponent is undefined"
        )));
    }
    Ok(1.0 - v2 / den)
}

/// A squared exponent within rounding of zero is snapped to exactly zero.
fn snap(square: f64, scale: f64) -> f64 {
    if square.abs() <= 64.0 * f64::EPSILON * scale {
        0.0
    } else {
        square
    }
}

/// Decay exponents of the ansatz at the state `mp`.
pub fn decay_exponents_paper(m: &MaterialParams, mp: &ModeParams) -> Result<DecayExponents> {
    let sc = derive_scales(m)?;
    let v2 = mp.v * mp.v;
    let e2v2 = mp.eps * mp.eps * v2;
    let (c1s, c2s, c3s, c4s) = (sc.c1 * sc.c1, sc.c2 * sc.c2, sc.c3 * sc.c3, sc.c4 * sc.c4);

    let r1 = decay_sqrt(C64::new(one_minus_ratio(v2, c1s - e2v2, "c1^2")?, 0.0));
    let r2 = decay_sqrt(C64::new(one_minus_ratio(v2, c2s - e2v2, "c2^2")?, 0.0));
    let r10 = decay_sqrt(C64::new(1.0 - v2 / c1s, 0.0));
    let r20 = decay_sqrt(C64::new(1.0 - v2 / c2s, 0.0));

    if m.kappa == 0.0 {
        return Ok(DecayExponents {
            r1,
            r2,
            r3: None,
            s: None,
            s_derived: None,
            r10,
            r20,
            r30: None,
        });
    }

    let f = 1.0 - 2.0 * c3s / (m.j_inertia * mp.omega * mp.omega);
    let den4 = c4s - e2v2;
    if den4 == 0.0 {
        return Err(Error::Singular(
            "c4^2 - eps^2 v^2 vanishes, the decay exponent is undefined".into(),
        ));
    }
    let r3_sq = snap(1.0 - v2 * f / den4, 1.0 + (v2 * f / den4).abs());
    let r30_sq = snap(1.0 - v2 * f / c4s, 1.0 + (v2 * f / c4s).abs());
    let s = (v2 / c3s) * (1.0 - (c2s - e2v2) / den4 * f);
    // forcing the ψ equation on the third branch:
    // (c2² − ε²v²)(r3² − 1) + v² + c3² s = 0
    let s_derived = -((c2s - e2v2) * (r3_sq - 1.0) + v2) / c3s;
    Ok(DecayExponents {
        r1,
        r2,
        r3: Some(decay_sqrt(C64::new(r3_sq, 0.0))),
        s: Some(C64::new(s, 0.0)),
        s_derived: Some(C64::new(s_derived, 0.0)),
        r10,
        r20,
        r30: Some(decay_sqrt(C64::new(r30_sq, 0.0))),
    })
}

/// One root of the coupled `ψ`–`Φ₂` system: decay exponent `δ` and the
/// amplitude ratio `Φ₂/ψ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShearRoot {
    pub delta: C64,
    pub coupling: C64,
}

/// Both roots of the coupled system, labelled by proximity to the shear
/// exponent `r2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShearExponents {
    /// The root that tends to `r2` as `κ → 0`.
    pub shear: ShearRoot,
    /// The root that tends to `r3`.
    pub micro: ShearRoot,
    /// The two roots coincide (to rounding).
    pub degenerate: bool,
}

/// Coefficients `(a, b, c)` of the quadratic `a D² + b D + c = 0` in
/// `D = δ² − 1` obtained from the `ψ` and `Φ₂` equations.
#[cfg(test)]
pub(crate) fn shear_quadratic(m: &MaterialParams, mp: &ModeParams) -> Result<(f64, f64, f64)> {
    let sc = derive_scales(m)?;
    let v2 = mp.v * mp.v;
    let e2v2 = mp.eps * mp.eps * v2;
    let c2p = sc.c2 * sc.c2 - e2v2;
    let c4p = sc.c4 * sc.c4 - e2v2;
    let c3s = sc.c3 * sc.c3;
    let jk2 = m.j_inertia * mp.k * mp.k;
    let v2f = v2 - 2.0 * c3s / jk2;
    Ok((c2p * c4p, c2p * v2f + v2 * c4p + c3s * c3s / jk2, v2 * v2f))
}

/// Exact exponents of the coupled shear–rotation system.
pub fn exact_shear_exponents(m: &MaterialParams, mp: &ModeParams) -> Result<ShearExponents> {
    coupled_shear_roots(m, mp.k, C64::new(mp.v, 0.0), mp.eps)
}

/// Roots of the coupled system for a possibly complex phase speed.
pub(crate) fn coupled_shear_roots(m: &MaterialParams, k: f64, v: C64, eps: f64) -> Result<ShearExponents> {
    if !(m.kappa > 0.0) {
        return Err(Error::Singular(
            "the shear and rotation equations decouple when kappa = 0".into(),
        ));
    }
    let sc = derive_scales(m)?;
    let v2 = v * v;
    let e2v2 = eps * eps * v2;
    let c2p = sc.c2 * sc.c2 - e2v2;
    let c4p = sc.c4 * sc.c4 - e2v2;
    let c3s = sc.c3 * sc.c3;
    let jk2 = m.j_inertia * k * k;
    let v2f = v2 - 2.0 * c3s / jk2;
    let (a, b, c) = (c2p * c4p, c2p * v2f + v2 * c4p + c3s * c3s / jk2, v2 * v2f);
    let disc = (b * b - 4.0 * a * c).sqrt();
    // cancellation-free pair of roots
    let q = if (b.conj() * disc).re >= 0.0 {
        -0.5 * (b + disc)
    } else {
        -0.5 * (b - disc)
    };
    let d1 = q / a;
    let d2 = if q.norm() == 0.0 { d1 } else { c / q };

    let root = |d: C64| ShearRoot {
        delta: decay_sqrt(1.0 + d),
        coupling: -(k * k) * (d * c2p + v2) / c3s,
    };
    let r2_sq = 1.0 - v2 / c2p;
    let (shear, micro) = if (d1 + 1.0 - r2_sq).norm() <= (d2 + 1.0 - r2_sq).norm() {
        (root(d1), root(d2))
    } else {
        (root(d2), root(d1))
    };
    let degenerate = (d1 - d2).norm() <= 1e-12 * (d1.norm() + d2.norm()).max(f64::MIN_POSITIVE);
    Ok(ShearExponents {
        shear,
        micro,
        degenerate,
    })
}

/// Potential amplitudes `P`, `Q`, `R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitudes {
    pub p: C64,
    pub q: C64,
    pub r: C64,
}

impl Amplitudes {
    pub fn new(p: C64, q: C64, r: C64) -> Self {
        Amplitudes { p, q, r }
    }

    pub fn zero() -> Self {
        let z = C64::new(0.0, 0.0);
        Amplitudes { p: z, q: z, r: z }
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Amplitudes {
            p: self.p * factor,
            q: self.q * factor,
            r: self.r * factor,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.p.norm().max(self.q.norm()).max(self.r.norm())
    }
}

/// One exponential branch `exp(ikx − k·rate·z)` with its amplitudes in the
/// scalar potential, the vector potential and the microrotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch {
    pub rate: C64,
    pub phi: C64,
    pub psi: C64,
    pub rot: C64,
}

impl Branch {
    /// `exp(ikx − k·rate·z)`.
    pub fn carrier(&self, k: f64, x: f64, z: f64) -> C64 {
        (I * k * x - self.rate * k * z).exp()
    }

    /// Local stresses, displacements and rotation per unit carrier.
    pub fn local_coefficients(&self, m: &MaterialParams, k: f64) -> LocalStresses {
        let dx = I * k;
        let dz = -self.rate * k;
        let u1 = dx * self.phi - dz * self.psi;
        let u3 = dz * self.phi + dx * self.psi;
        let lam = m.lambda_lame;
        let (mu, kap, gam) = (m.mu, m.kappa, m.gamma_mp);
        let normal = lam + 2.0 * mu + kap;
        LocalStresses {
            sigma11: normal * dx * u1 + lam * dz * u3,
            sigma33: normal * dz * u3 + lam * dx * u1,
            sigma13: (mu + kap) * dx * u3 + mu * dz * u1 + kap * self.rot,
            sigma31: (mu + kap) * dz * u1 + mu * dx * u3 - kap * self.rot,
            pi12: gam * dx * self.rot,
            pi32: gam * dz * self.rot,
            u1,
            u3,
            phi2: self.rot,
        }
    }
}

/// The branches of the ansatz: `(r1, P, 0, 0)`, `(r2, 0, Q, 0)` and
/// `(r3, 0, R, s k² R)`. The third branch is omitted in the decoupled limit.
pub fn ansatz_branches(amp: &Amplitudes, de: &DecayExponents, k: f64) -> Vec<Branch> {
    let zero = C64::new(0.0, 0.0);
    let mut out = vec![
        Branch {
            rate: de.r1,
            phi: amp.p,
            psi: zero,
            rot: zero,
        },
        Branch {
            rate: de.r2,
            phi: zero,
            psi: amp.q,
            rot: zero,
        },
    ];
    if let (Some(r3), Some(s)) = (de.r3, de.s) {
        out.push(Branch {
            rate: r3,
            phi: zero,
            psi: amp.r,
            rot: s * k * k * amp.r,
        });
    }
    out
}

/// `(φ, ψ, Φ₂)` at `(x, z)`.
pub fn mode_fields(amp: &Amplitudes, de: &DecayExponents, mp: &ModeParams, x: f64, z: f64) -> (C64, C64, C64) {
    ansatz_branches(amp, de, mp.k)
        .iter()
        .fold(Default::default(), |(phi, psi, rot): (C64, C64, C64), b| {
            let e = b.carrier(mp.k, x, z);
            (phi + b.phi * e, psi + b.psi * e, rot + b.rot * e)
        })
}

/// Local (classical micropolar) stresses, displacements and rotation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LocalStresses {
    pub sigma11: C64,
    pub sigma13: C64,
    pub sigma31: C64,
    pub sigma33: C64,
    pub pi12: C64,
    pub pi32: C64,
    pub u1: C64,
    pub u3: C64,
    pub phi2: C64,
}

impl LocalStresses {
    fn to_array(self) -> [C64; 9] {
        [
            self.sigma11,
            self.sigma13,
            self.sigma31,
            self.sigma33,
            self.pi12,
            self.pi32,
            self.u1,
            self.u3,
            self.phi2,
        ]
    }

    fn from_array(a: [C64; 9]) -> Self {
        LocalStresses {
            sigma11: a[0],
            sigma13: a[1],
            sigma31: a[2],
            sigma33: a[3],
            pi12: a[4],
            pi32: a[5],
            u1: a[6],
            u3: a[7],
            phi2: a[8],
        }
    }
}

impl Add for LocalStresses {
    type Output = LocalStresses;

    fn add(self, rhs: LocalStresses) -> LocalStresses {
        let (a, b) = (self.to_array(), rhs.to_array());
        LocalStresses::from_array(std::array::from_fn(|n| a[n] + b[n]))
    }
}

impl Mul<C64> for LocalStresses {
    type Output = LocalStresses;

    fn mul(self, rhs: C64) -> LocalStresses {
        LocalStresses::from_array(self.to_array().map(|v| v * rhs))
    }
}

/// Non-local force and couple stresses.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NonlocalStresses {
    pub tau11: C64,
    pub tau13: C64,
    pub tau31: C64,
    pub tau33: C64,
    pub m12: C64,
    pub m32: C64,
}

/// Local and non-local stresses at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StressState {
    pub local: LocalStresses,
    pub nonlocal: NonlocalStresses,
}

/// Local stresses of the mode at `(x, z)`.
pub fn local_stresses(
    amp: &Amplitudes,
    de: &DecayExponents,
    mp: &ModeParams,
    m: &MaterialParams,
    x: f64,
    z: f64,
) -> LocalStresses {
    ansatz_branches(amp, de, mp.k)
        .iter()
        .fold(LocalStresses::default(), |acc, b| {
            acc + b.local_coefficients(m, mp.k) * b.carrier(mp.k, x, z)
        })
}

/// Non-local stresses at `(x, z)`: every branch of the local stress field is
/// weighted by its boundary-layer integral `I_i` at `η = kz`, with
/// `eps = mp.eps`.
pub fn nonlocal_stresses(
    amp: &Amplitudes,
    de: &DecayExponents,
    mp: &ModeParams,
    m: &MaterialParams,
    x: f64,
    z: f64,
) -> Result<NonlocalStresses> {
    if !(z >= 0.0) {
        return Err(Error::InvalidInput(format!("depth must be non-negative, got {z}")));
    }
    let eta = mp.k * z;
    let mut out = NonlocalStresses::default();
    for (i, b) in ansatz_branches(amp, de, mp.k).iter().enumerate() {
        let weight = if mp.eps == 0.0 {
            (-b.rate * eta).exp()
        } else {
            blayer_integral_closed(i + 1, de, mp.eps, eta)?
        };
        let c = b.local_coefficients(m, mp.k) * ((I * mp.k * x).exp() * weight);
        out.tau11 += c.sigma11;
        out.tau13 += c.sigma13;
        out.tau31 += c.sigma31;
        out.tau33 += c.sigma33;
        out.m12 += c.pi12;
        out.m32 += c.pi32;
    }
    Ok(out)
}

/// Both stress families at `(x, z)`.
pub fn stress_state(
    amp: &Amplitudes,
    de: &DecayExponents,
    mp: &ModeParams,
    m: &MaterialParams,
    x: f64,
    z: f64,
) -> Result<StressState> {
    Ok(StressState {
        local: local_stresses(amp, de, mp, m, x, z),
        nonlocal: nonlocal_stresses(amp, de, mp, m, x, z)?,
    })
}

/// Residuals of the three potential equations on the ansatz, with the two
/// candidate rotation couplings for comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdeResidual {
    /// Scalar-potential, vector-potential and rotation equations, the first
    /// two over `ρω²·max|amp|`, the third over `ρjω²k²·max|amp|`.
    pub residuals: [C64; 3],
    pub s_printed: Option<C64>,
    pub s_derived: Option<C64>,
}

/// Equation-of-motion residuals at the probe point `(0, 1/k)`.
pub fn pde_residual(
    amp: &Amplitudes,
    de: &DecayExponents,
    mp: &ModeParams,
    m: &MaterialParams,
) -> Result<PdeResidual> {
    pde_residual_of_branches(&ansatz_branches(amp, de, mp.k), amp.max_abs(), mp, m).map(|residuals| {
        PdeResidual {
            residuals,
            s_printed: de.s,
            s_derived: de.s_derived,
        }
    })
}

/// Residuals of the potential equations for arbitrary branches, normalized by
/// the amplitude scale `scale`.
pub fn pde_residual_of_branches(
    branches: &[Branch],
    scale: f64,
    mp: &ModeParams,
    m: &MaterialParams,
) -> Result<[C64; 3]> {
    let zero = C64::new(0.0, 0.0);
    if scale == 0.0 {
        return Ok([zero; 3]);
    }
    let k2 = mp.k * mp.k;
    let w2 = mp.omega * mp.omega;
    let eps2 = mp.eps * mp.eps;
    let normal = m.lambda_lame + 2.0 * m.mu + m.kappa;
    let mut res = [zero; 3];
    for b in branches {
        let e = b.carrier(mp.k, 0.0, 1.0 / mp.k);
        // ∇² → k²(r² − 1), ∂tt → −ω²
        let d = b.rate * b.rate - 1.0;
        let inertia = m.rho * w2 * (1.0 - eps2 * d);
        res[0] += (normal * k2 * d + inertia) * b.phi * e;
        res[1] += (((m.mu + m.kappa) * k2 * d + inertia) * b.psi + m.kappa * b.rot) * e;
        res[2] += ((m.gamma_mp * k2 * d - 2.0 * m.kappa + m.j_inertia * inertia) * b.rot
            - m.kappa * k2 * d * b.psi)
            * e;
    }
    let n01 = m.rho * w2 * scale;
    let n2 = m.rho * m.j_inertia * w2 * k2 * scale;
    Ok([res[0] / n01, res[1] / n01, res[2] / n2])
}

/// The boundary-layer integral `I_i` in closed form,
/// `[1 + ε²(r_i0² − 1)] e^{−r_i η} − ½[1 + ε r_i0 + ε²(r_i0² − 1 − η/(2ε))] e^{−η/ε}`.
pub fn blayer_integral_closed(i: usize, de: &DecayExponents, eps: f64, eta: f64) -> Result<C64> {
    check_blayer_args(eps, eta)?;
    Ok(blayer_value_raw(de.rate(i)?, de.leading(i)?, eps, eta))
}

pub(crate) fn blayer_value_raw(r: C64, r0: C64, eps: f64, eta: f64) -> C64 {
    let e2 = eps * eps;
    let bulk = (1.0 + e2 * (r0 * r0 - 1.0)) * (-r * eta).exp();
    let layer = 0.5 * (1.0 + eps * r0 + e2 * (r0 * r0 - 1.0) - 0.5 * eps * eta) * (-eta / eps).exp();
    bulk - layer
}

/// Depth derivative `dI_i/dη` of the closed form.
pub fn blayer_integral_closed_derivative(i: usize, de: &DecayExponents, eps: f64, eta: f64) -> Result<C64> {
    check_blayer_args(eps, eta)?;
    Ok(blayer_derivative_raw(de.rate(i)?, de.leading(i)?, eps, eta))
}

pub(crate) fn blayer_derivative_raw(r: C64, r0: C64, eps: f64, eta: f64) -> C64 {
    let e2 = eps * eps;
    let bulk = -r * (1.0 + e2 * (r0 * r0 - 1.0)) * (-r * eta).exp();
    let bracket = 1.0 + eps * r0 + e2 * (r0 * r0 - 1.0) - 0.5 * eps * eta;
    let layer = (bracket / (2.0 * eps) + 0.25 * eps) * (-eta / eps).exp();
    bulk + layer
}

/// The boundary-layer integral `I_i` by adaptive quadrature of its defining
/// depth convolution on the unit-wavenumber carrier.
pub fn blayer_integral_quadrature(
    i: usize,
    de: &DecayExponents,
    eps: f64,
    eta: f64,
    spec: &QuadratureSpec,
) -> Result<C64> {
    check_blayer_args(eps, eta)?;
    let trace = SurfaceTrace::exponential(C64::new(1.0, 0.0), de.rate(i)?, 1.0);
    approx_trace_integral(&trace, eps, eta, spec)
}

fn check_blayer_args(eps: f64, eta: f64) -> Result<()> {
    if !(eps > 0.0) || !(eta >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "boundary-layer integral needs eps > 0 and eta >= 0, got eps = {eps}, eta = {eta}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::material::samples::{classical, micropolar};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    /// A generic micropolar state with every exponent real and decaying.
    fn generic_state() -> (MaterialParams, ModeParams, DecayExponents) {
        let m = micropolar();
        let sc = derive_scales(&m).unwrap();
        let omega = 3.0 * sc.omega_cutoff;
        let mp = ModeParams::from_velocity(&m, omega, 0.5 * sc.c2, ModeTag::Elastic)
            .unwrap()
            .with_eps(0.05);
        let de = decay_exponents_paper(&m, &mp).unwrap();
        (m, mp, de)
    }

    #[test]
    fn mode_tag_text() {
        assert_eq!("elastic".parse::<ModeTag>().unwrap(), ModeTag::Elastic);
        assert_eq!(ModeTag::Micropolar.to_string(), "micropolar");
        assert!("shear".parse::<ModeTag>().is_err());
    }

    #[test]
    fn mode_params_invariants() {
        let mp = ModeParams::new(3.0, 7.0, 0.1, ModeTag::Elastic).unwrap();
        assert!((mp.v - 7.0 / 3.0).abs() <= 1e-14 * mp.v);
        assert!(ModeParams::new(0.0, 1.0, 0.0, ModeTag::Elastic).is_err());
        assert!(ModeParams::new(1.0, 1.0, -0.1, ModeTag::Elastic).is_err());
    }

    #[test]
    fn slow_waves_do_not_decay_faster_than_unity() {
        let m = classical();
        let mp = ModeParams::new(1.0, 1e-9, 0.1, ModeTag::Elastic).unwrap();
        let de = decay_exponents_paper(&m, &mp).unwrap();
        assert!((de.r1 - 1.0).norm() < 1e-15 && (de.r2 - 1.0).norm() < 1e-15);
        assert!(de.r3.is_none() && de.s.is_none() && de.r30.is_none());
    }

    #[test]
    fn half_shear_speed_at_zero_eps() {
        let m = classical();
        let sc = derive_scales(&m).unwrap();
        let mp = ModeParams::new(1.0, 0.5 * sc.c2, 0.0, ModeTag::Elastic).unwrap();
        let de = decay_exponents_paper(&m, &mp).unwrap();
        assert!((de.r2 - 0.75f64.sqrt()).norm() < 1e-15);
        assert_eq!(de.r1, de.r10);
        assert_eq!(de.r2, de.r20);
    }

    #[test]
    fn leading_values_at_zero_eps_coincide() {
        let (m, mp, _) = generic_state();
        let de = decay_exponents_paper(&m, &mp.with_eps(0.0)).unwrap();
        assert!((de.r1 - de.r10).norm() <= 1e-14 * de.r10.norm());
        assert!((de.r2 - de.r20).norm() <= 1e-14 * de.r20.norm());
        assert!((de.r3.unwrap() - de.r30.unwrap()).norm() <= 1e-14 * de.r30.unwrap().norm());
    }

    #[test]
    fn generic_sextuple_against_direct_formulas() {
        let (m, mp, de) = generic_state();
        // independent arithmetic straight from the constants
        let rho = m.rho;
        let c1s = (m.lambda_lame + 2.0 * m.mu + m.kappa) / rho;
        let c2s = (m.mu + m.kappa) / rho;
        let c3s = m.kappa / rho;
        let c4s = m.gamma_mp / (rho * m.j_inertia);
        let v2 = (mp.omega / mp.k).powi(2);
        let e = mp.eps * mp.eps * v2;
        let f = 1.0 - 2.0 * c3s / (m.j_inertia * mp.omega * mp.omega);
        assert!((de.r1.re - (1.0 - v2 / (c1s - e)).sqrt()).abs() < 1e-14);
        assert!((de.r2.re - (1.0 - v2 / (c2s - e)).sqrt()).abs() < 1e-14);
        assert!((de.r3.unwrap().re - (1.0 - v2 / (c4s - e) * f).sqrt()).abs() < 1e-14);
        let s = v2 / c3s * (1.0 - (c2s - e) / (c4s - e) * f);
        assert!((de.s.unwrap().re - s).abs() < 1e-12 * s.abs());
        assert!((de.s_derived.unwrap() + de.s.unwrap()).norm() < 1e-10 * s.abs());
        assert!(de.is_admissible());
    }

    #[test]
    fn potential_equations_vanish_on_their_branches() {
        let (m, mp, de) = generic_state();
        let p_branch = pde_residual(&Amplitudes::new(c(1.0), c(0.0), c(0.0)), &de, &mp, &m).unwrap();
        for r in p_branch.residuals {
            assert!(r.norm() < 1e-12);
        }
        let q_branch = pde_residual(&Amplitudes::new(c(0.0), C64::new(0.3, 1.0), c(0.0)), &de, &mp, &m).unwrap();
        assert!(q_branch.residuals[0].norm() < 1e-12);
        assert!(q_branch.residuals[1].norm() < 1e-12);
        // the rotation equation keeps -κ k² (r2² − 1) Q
        let q = C64::new(0.3, 1.0);
        let expected = -m.kappa * mp.k * mp.k * (de.r2 * de.r2 - 1.0) * q * (-de.r2).exp()
            / (m.rho * m.j_inertia * mp.omega.powi(2) * mp.k * mp.k * q.norm());
        assert!((q_branch.residuals[2] - expected).norm() < 1e-12 * expected.norm());
    }

    #[test]
    fn third_branch_residuals() {
        let (m, mp, de) = generic_state();
        let amp = Amplitudes::new(c(0.0), c(0.0), c(1.0));
        let res = pde_residual(&amp, &de, &mp, &m).unwrap();
        let r3 = de.r3.unwrap();
        let e = (-r3).exp();
        // rotation equation: only the -κ k² (r3² − 1) R term survives
        let expected = -m.kappa * (r3 * r3 - 1.0) * e / (m.rho * m.j_inertia * mp.omega.powi(2));
        assert!((res.residuals[2] - expected).norm() < 1e-10 * expected.norm());
        // ψ equation with the printed coupling leaves κ k² (s − s_derived) R = 2κ s k² R
        let s = de.s.unwrap();
        let expected = 2.0 * m.kappa * s * mp.k * mp.k * e / (m.rho * mp.omega.powi(2));
        assert!((res.residuals[1] - expected).norm() < 1e-10 * expected.norm());
    }

    #[test]
    fn exact_shear_roots_solve_the_quadratic() {
        let (m, mp, de) = generic_state();
        let roots = exact_shear_exponents(&m, &mp).unwrap();
        let (a, b, cc) = shear_quadratic(&m, &mp).unwrap();
        for root in [roots.shear, roots.micro] {
            let d = root.delta * root.delta - 1.0;
            let scale = a.abs() * d.norm_sqr() + b.abs() * d.norm() + cc.abs();
            assert!(((a * d + b) * d + cc).norm() < 1e-10 * scale);
            // back-substitution into the two potential equations
            let branch = Branch {
                rate: root.delta,
                phi: c(0.0),
                psi: c(1.0),
                rot: root.coupling,
            };
            let res = pde_residual_of_branches(&[branch], 1.0, &mp, &m).unwrap();
            assert!(res[1].norm() < 1e-9 && res[2].norm() < 1e-9, "{res:?}");
        }
        assert!(!roots.degenerate);
        assert!((roots.shear.delta - de.r2).norm() < 0.05);
    }

    #[test]
    fn shear_root_decouples_as_kappa_vanishes() {
        let base = micropolar();
        let sc = derive_scales(&base).unwrap();
        let omega = 3.0 * sc.omega_cutoff;
        let mut prev = f64::INFINITY;
        for kappa_ratio in [1e-2, 1e-3, 1e-4] {
            let m = MaterialParams {
                kappa: kappa_ratio * base.mu,
                ..base
            };
            let mp = ModeParams::from_velocity(&m, omega, 0.5 * sc.c2, ModeTag::Elastic).unwrap();
            let de = decay_exponents_paper(&m, &mp).unwrap();
            let roots = exact_shear_exponents(&m, &mp).unwrap();
            let gap = (roots.shear.delta - de.r2).norm();
            assert!(gap < prev);
            prev = gap;
            assert!(roots.shear.coupling.norm() / (mp.k * mp.k) < 10.0 * kappa_ratio);
        }
        let no_kappa = MaterialParams { kappa: 0.0, ..base };
        let mp = ModeParams::new(1.0, 1.0, 0.0, ModeTag::Elastic).unwrap();
        assert!(matches!(exact_shear_exponents(&no_kappa, &mp), Err(Error::Singular(_))));
    }

    #[test]
    fn fields_at_origin_and_depth() {
        let (_, mp, de) = generic_state();
        let amp = Amplitudes::new(C64::new(0.2, 0.1), c(1.0), C64::new(-0.4, 0.3));
        let (phi, psi, rot) = mode_fields(&amp, &de, &mp, 0.0, 0.0);
        assert_eq!(phi, amp.p);
        assert_eq!(psi, amp.q + amp.r);
        assert!((rot - de.s.unwrap() * mp.k * mp.k * amp.r).norm() < 1e-12 * rot.norm());
        let (phi, psi, rot) = mode_fields(&amp, &de, &mp, 0.3, 200.0 / mp.k);
        assert!(phi.norm() < 1e-30 && psi.norm() < 1e-30 && rot.norm() < 1e-20);
        let no_r = Amplitudes::new(amp.p, amp.q, c(0.0));
        assert_eq!(mode_fields(&no_r, &de, &mp, 0.3, 0.1).2, c(0.0));
    }

    #[test]
    fn symmetric_stress_without_micropolarity() {
        let m = classical();
        let mp = ModeParams::new(2.0, 1500.0, 0.0, ModeTag::Elastic).unwrap();
        let de = decay_exponents_paper(&m, &mp).unwrap();
        let amp = Amplitudes::new(C64::new(0.3, -0.2), C64::new(1.0, 0.5), c(0.0));
        for (x, z) in [(0.0, 0.0), (0.4, 0.3), (-1.0, 2.0)] {
            let s = local_stresses(&amp, &de, &mp, &m, x, z);
            assert_eq!(s.phi2, c(0.0));
            assert_eq!(s.sigma13, s.sigma31);
        }
        let zero = local_stresses(&Amplitudes::zero(), &de, &mp, &m, 0.1, 0.2);
        assert_eq!(zero, LocalStresses::default());
    }

    #[test]
    fn surface_coefficients_match_printed_structure() {
        // the printed non-local block with every I_i replaced by 1
        let (m, mp, de) = generic_state();
        let amp = Amplitudes::new(C64::new(0.7, 0.2), C64::new(1.0, 0.0), C64::new(-0.3, 0.4));
        let s = local_stresses(&amp, &de, &mp, &m, 0.0, 0.0);
        let (lam, mu, kap, gam, k) = (m.lambda_lame, m.mu, m.kappa, m.gamma_mp, mp.k);
        let (r1, r2, r3, sc) = (de.r1, de.r2, de.r3.unwrap(), de.s.unwrap());
        let (p, q, r) = (amp.p, amp.q, amp.r);
        let k2 = k * k;
        let t11 = k2 * (-(lam + 2.0 * mu + kap - lam * r1 * r1) * p
            + I * r2 * (2.0 * mu + kap) * q
            + I * r3 * (2.0 * mu + kap) * r);
        let t13 = k2 * (-I * r1 * (2.0 * mu + kap) * p - (mu + kap + mu * r2 * r2) * q
            + (sc * kap - (mu + kap) - mu * r3 * r3) * r);
        let t31 = k2 * (-I * r1 * (2.0 * mu + kap) * p - (mu + (mu + kap) * r2 * r2) * q
            - (sc * kap + mu + (mu + kap) * r3 * r3) * r);
        let t33 = k2 * (((lam + 2.0 * mu + kap) * r1 * r1 - lam) * p
            - I * r2 * (2.0 * mu + kap) * q
            - I * r3 * (2.0 * mu + kap) * r);
        let m12 = I * sc * k2 * k * gam * r;
        let m32 = -sc * k2 * k * gam * r3 * r;
        for (got, want) in [
            (s.sigma11, t11),
            (s.sigma13, t13),
            (s.sigma31, t31),
            (s.sigma33, t33),
            (s.pi12, m12),
            (s.pi32, m32),
        ] {
            assert!((got - want).norm() < 1e-12 * want.norm(), "{got} vs {want}");
        }
    }

    #[test]
    fn asymmetry_signature() {
        // σ13 − σ31 = κ(∂x u3 − ∂z u1) + 2κΦ₂, with the displacement
        // derivatives rebuilt from the potentials: every field carries e^{ikx},
        // so ∂x is multiplication by ik, and ∂z u1 = ik ∂z φ − ∂z² ψ.
        let (m, mp, de) = generic_state();
        let amp = Amplitudes::new(C64::new(0.7, 0.2), C64::new(1.0, 0.0), C64::new(-0.3, 0.4));
        let k = mp.k;
        let points = [
            (0.0, 0.0),
            (0.1, 0.2),
            (-0.3, 0.05),
            (1.0, 1.0),
            (0.25, 0.7),
            (-2.0, 0.3),
            (0.6, 1.5),
            (3.0, 0.01),
            (-0.8, 0.9),
            (0.05, 2.0),
        ];
        for (xs, zs) in points {
            let (x, z) = (xs / k, zs / k);
            let s = local_stresses(&amp, &de, &mp, &m, x, z);
            let ex = (I * k * x).exp();
            let (e1, e2, e3) = (
                (-k * de.r1 * z).exp(),
                (-k * de.r2 * z).exp(),
                (-k * de.r3.unwrap() * z).exp(),
            );
            let phi_z = -k * de.r1 * amp.p * e1 * ex;
            let psi_zz = k * k * (de.r2 * de.r2 * amp.q * e2 + de.r3.unwrap().powi(2) * amp.r * e3) * ex;
            let u1_z = I * k * phi_z - psi_zz;
            let u3_x = I * k * s.u3;
            let (_, _, rot) = mode_fields(&amp, &de, &mp, x, z);
            let lhs = s.sigma13 - s.sigma31;
            let rhs = m.kappa * (u3_x - u1_z) + 2.0 * m.kappa * rot;
            assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm().max(rhs.norm()), "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn blayer_surface_value_and_far_field() {
        let (_, _, de) = generic_state();
        for i in 1..=3 {
            let r0 = de.leading(i).unwrap();
            let eps = 0.1;
            let at_surface = blayer_integral_closed(i, &de, eps, 0.0).unwrap();
            let expected = 0.5 * (1.0 - eps * r0 + eps * eps * (r0 * r0 - 1.0));
            assert!((at_surface - expected).norm() < 1e-15);
            let eta = 2.0;
            let far = blayer_integral_closed(i, &de, 1e-3, eta).unwrap();
            let r = de.rate(i).unwrap();
            assert!((far - (-r * eta).exp()).norm() < 1e-5);
        }
        assert!(blayer_integral_closed(1, &de, 0.0, 1.0).is_err());
        assert!(blayer_integral_closed(4, &de, 0.1, 1.0).is_err());
    }

    #[test]
    fn blayer_quadrature_checks() {
        let spec = QuadratureSpec::default();
        let mut de = generic_state().2;
        // pure kernel halving: r = 0 and no χ-corrector
        let flat = SurfaceTrace::constant(c(1.0), 0.0);
        assert!((approx_trace_integral(&flat, 0.2, 0.0, &spec).unwrap() - 0.5).norm() < 1e-12);
        // five layer thicknesses deep the boundary term is below e^{-5}·1.2
        let eps = 0.1;
        let eta = 5.0 * eps;
        for i in 1..=3 {
            let quad = blayer_integral_quadrature(i, &de, eps, eta, &spec).unwrap();
            let r = de.rate(i).unwrap();
            assert!(quad.norm().is_finite());
            assert!((quad - (-r * eta).exp()).norm() < 1.2 * (-5.0f64).exp());
        }
        de.r3 = None;
        assert!(blayer_integral_quadrature(3, &de, 0.1, 0.0, &spec).is_err());
    }

    #[test]
    fn blayer_derivative_matches_central_differences() {
        let (_, _, de) = generic_state();
        for i in 1..=3 {
            for (eps, eta) in [(0.2, 0.0), (0.1, 0.3), (0.05, 1.5)] {
                let h = 1e-5 * eps;
                let at = |e: f64| blayer_integral_closed(i, &de, eps, e).unwrap();
                let fd = if eta == 0.0 {
                    (-3.0 * at(0.0) + 4.0 * at(h) - at(2.0 * h)) / (2.0 * h)
                } else {
                    (at(eta + h) - at(eta - h)) / (2.0 * h)
                };
                let exact = blayer_integral_closed_derivative(i, &de, eps, eta).unwrap();
                assert!((fd - exact).norm() < 1e-6 * (1.0 + exact.norm()), "{fd} vs {exact}");
            }
        }
    }

    #[test]
    fn blayer_closed_is_positive_for_real_rates() {
        let mut de = generic_state().2;
        for n in 1..20 {
            let r = n as f64 / 20.0;
            de.r1 = c(r);
            de.r10 = c(r);
            for eps in [0.01, 0.1, 0.2] {
                for m in 0..40 {
                    let eta = m as f64 * 0.1;
                    assert!(blayer_integral_closed(1, &de, eps, eta).unwrap().re > 0.0);
                }
            }
        }
    }

    #[test]
    fn nonlocal_reduces_to_local_away_from_surface() {
        let (m, mp, de) = generic_state();
        let amp = Amplitudes::new(C64::new(0.7, 0.2), c(1.0), C64::new(-0.3, 0.4));
        let z = 0.8 / mp.k;
        let local = local_stresses(&amp, &de, &mp, &m, 0.1, z);
        let mut prev = f64::INFINITY;
        for eps in [0.1, 0.01, 0.001] {
            let mp_e = mp.with_eps(eps);
            let de_e = decay_exponents_paper(&m, &mp_e).unwrap();
            let nl = nonlocal_stresses(&amp, &de_e, &mp_e, &m, 0.1, z).unwrap();
            let local_e = local_stresses(&amp, &de_e, &mp_e, &m, 0.1, z);
            let gap = (nl.tau31 - local_e.sigma31).norm() / local.sigma31.norm();
            assert!(gap < prev);
            prev = gap;
        }
        assert!(prev < 1e-4);
        let no_r = Amplitudes::new(amp.p, amp.q, c(0.0));
        let nl = nonlocal_stresses(&no_r, &de, &mp, &m, 0.0, 0.0).unwrap();
        assert_eq!((nl.m12, nl.m32), (c(0.0), c(0.0)));
    }

    #[test]
    fn branches_decay_below_shear_speed() {
        let m = micropolar();
        let sc = derive_scales(&m).unwrap();
        for n in 1..100 {
            let v = sc.c2 * n as f64 / 100.0;
            for eps in [0.0, 0.1, 0.29] {
                let mp = ModeParams::new(1.0, v, eps, ModeTag::Elastic).unwrap();
                let de = decay_exponents_paper(&m, &mp).unwrap();
                // the ε-shifted shear speed sits below c2 by a factor (1 + ε²)^{-1/2}
                if v < sc.c2 / (1.0 + eps * eps).sqrt() {
                    assert!(de.r1.re > 0.0 && de.r2.re > 0.0, "v/c2 = {}, eps = {eps}", v / sc.c2);
                }
            }
        }
    }
}
