//! Boundary-layer asymptotics of the non-local surface problem.
//!
//! The non-local stresses of a harmonic mode pick up a fast `exp(−z/a)`
//! component near the surface. This module measures how badly the
//! differential and integral formulations disagree on the ansatz, builds the
//! fast-layer coefficients order by order, and evaluates the classical,
//! first-order, extra and refined boundary conditions on a mode.
//!
//! Two kinds of mode are handled through [`ModeSolution`]:
//!
//! * the harmonic ansatz with its closed-form boundary-layer integrals, built
//!   from a dispersion point and [`amplitude_ratios`];
//! * the exact near-surface mode of the singularly perturbed problem
//!   ([`near_surface_mode`]), whose local part satisfies the bulk equations
//!   exactly and whose non-local part carries an explicit `exp(−βz)` layer.
//!   This is the solution the refined conditions are meant to approximate,
//!   and the one the slope study runs on.
//!
//! Dimensionless stresses are `σ̃ = σ/N` and `Π̃ = Π·k/N` with
//! `N = k²(μ+κ)|Q|`; `χ = kx` and `η = kz`, so `∂χ` acts on the carrier as
//! multiplication by `i`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::dispersion::{amplitude_ratios, micropolar_velocity, solve_rayleigh, DispersionPoint};
use crate::kernel::SurfaceTrace;
use crate::material::{derive_scales, MaterialParams};
use crate::wavefield::{
    ansatz_branches, blayer_derivative_raw, blayer_value_raw, coupled_shear_roots,
    decay_exponents_paper, decay_sqrt, Amplitudes, Branch, LocalStresses, ModeParams,
};
use crate::{Error, Result, C64, I};

/// The ε values of the slope study.
pub const SLOPE_EPS: [f64; 3] = [0.2, 0.1, 0.05];

/// Relative step at which the secant iteration for the near-surface mode stops.
const SECANT_TOL: f64 = 1e-14;
const SECANT_MAX_ITER: usize = 80;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

// ---------------------------------------------------------------------------
// failure of equivalence

/// The boundary-layer term left over when the elastic mode is substituted in
/// the integral model: `coefficient = k³ · bracket / (2(1+d)² r10)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalenceResidual {
    /// `(1+d)² r10² − 2 r20² (d + r20² − 1) − (1 + d²)`.
    pub bracket: C64,
    /// The factor multiplying `exp(−kz/ε)`.
    pub coefficient: C64,
}

/// Equivalence residual of the elastic mode at `point`.
pub fn equivalence_residual_elastic(m: &MaterialParams, point: &DispersionPoint) -> Result<EquivalenceResidual> {
    let d = derive_scales(m)?.d;
    let (r10, r20) = (point.exponents.r10, point.exponents.r20);
    if r10.norm() == 0.0 {
        return Err(Error::Singular("r10 = 0 makes the equivalence residual singular".into()));
    }
    let r20s = r20 * r20;
    let bracket = (1.0 + d) * (1.0 + d) * r10 * r10 - 2.0 * r20s * (d + r20s - 1.0) - (1.0 + d * d);
    let coefficient = point.k.powi(3) * bracket / (2.0 * (1.0 + d) * (1.0 + d) * r10);
    Ok(EquivalenceResidual { bracket, coefficient })
}

/// Equivalence residual of the micropolar mode travelling at `v` with
/// wavenumber `k`: `k³ [(1+d)² r10 r20 − (r20² + d)²] / (r20² + d)`.
pub fn equivalence_residual_micropolar(m: &MaterialParams, v: f64, k: f64) -> Result<C64> {
    let sc = derive_scales(m)?;
    if !(v > 0.0 && v < sc.c2) {
        return Err(Error::InvalidInput(format!(
            "need 0 < v < c2 = {}, got v = {v}",
            sc.c2
        )));
    }
    let d = sc.d;
    let r10 = (1.0 - (v / sc.c1).powi(2)).sqrt();
    let r20s = 1.0 - (v / sc.c2).powi(2);
    let b = r20s + d;
    if b == 0.0 {
        return Err(Error::Singular("r20² + d = 0".into()));
    }
    let value = k.powi(3) * ((1.0 + d).powi(2) * r10 * r20s.sqrt() - b * b) / b;
    Ok(C64::new(value, 0.0))
}

// ---------------------------------------------------------------------------
// boundary-layer coefficients

/// Order-0 and order-1 parts of a dimensionless surface trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TracePair {
    pub order0: SurfaceTrace,
    pub order1: SurfaceTrace,
}

impl TracePair {
    /// A trace with no order-1 part.
    pub fn leading_only(order0: SurfaceTrace) -> Self {
        let order1 = SurfaceTrace {
            terms: Vec::new(),
            chi_wavenumber: order0.chi_wavenumber,
        };
        TracePair { order0, order1 }
    }

    fn d_chi(&self) -> C64 {
        I * self.order0.chi_wavenumber
    }

    /// `f¹ − ∂η f⁰` at the surface.
    fn first_order_drive(&self) -> C64 {
        self.order1.eval(0.0) - self.order0.derivative(0.0)
    }
}

/// Amplitudes of the fast `exp(−η_f)` profiles in the boundary layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryLayerCoeffs {
    pub q11_0: C64,
    pub q31_0: C64,
    pub q33_0: C64,
    pub q11_1: C64,
    pub q31_1: C64,
    pub q33_1: C64,
    pub s12_0: C64,
    pub s32_0: C64,
}

/// Fast-layer amplitudes driven by the surface traces of `σ̃11` and `Π̃12`.
pub fn bl_coeffs(sigma11: &TracePair, pi12: &TracePair) -> BoundaryLayerCoeffs {
    let dchi = sigma11.d_chi();
    let s0 = sigma11.order0.eval(0.0);
    let s1 = sigma11.first_order_drive();
    let p1 = pi12.first_order_drive();
    BoundaryLayerCoeffs {
        q11_0: -0.5 * s0,
        q31_0: -0.5 * dchi * s0,
        q33_0: -0.5 * dchi * dchi * s0,
        q11_1: -0.5 * s1,
        q31_1: -0.5 * dchi * s1,
        q33_1: -0.5 * dchi * dchi * s1,
        s12_0: -0.5 * p1,
        s32_0: -0.5 * pi12.d_chi() * p1,
    }
}

// ---------------------------------------------------------------------------
// mode solutions

/// How the non-local stresses of a [`ModeSolution`] are represented.
#[derive(Debug, Clone, PartialEq)]
pub enum NonlocalPart {
    /// Every branch weighted by its boundary-layer integral; `leading` holds
    /// the ε = 0 exponent of each branch.
    LayerIntegrals { leading: Vec<C64> },
    /// Bulk branches scaled by `1/(1 − ε²(r² − 1))` plus an explicit layer
    /// `exp(ikx − βz)` with surface values `tau11` and `m12`.
    ExactLayer { tau11: C64, m12: C64, beta: f64 },
}

/// A surface mode at wavenumber `k`, given by its local branches and a
/// description of its non-local part.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSolution {
    pub material: MaterialParams,
    pub k: f64,
    pub eps: f64,
    pub branches: Vec<Branch>,
    pub nonlocal: NonlocalPart,
    /// `|Q|` of the reference amplitudes; fixed under [`ModeSolution::scaled`].
    pub q_scale: f64,
}

impl ModeSolution {
    /// The harmonic ansatz with amplitudes `amp` at state `mp`.
    pub fn from_ansatz(m: &MaterialParams, mp: &ModeParams, amp: &Amplitudes) -> Result<Self> {
        let de = decay_exponents_paper(m, mp)?;
        let mut leading = vec![de.r10, de.r20];
        leading.extend(de.r30);
        let q = amp.q.norm();
        Ok(ModeSolution {
            material: *m,
            k: mp.k,
            eps: mp.eps,
            branches: ansatz_branches(amp, &de, mp.k),
            nonlocal: NonlocalPart::LayerIntegrals { leading },
            q_scale: if q > 0.0 { q } else { 1.0 },
        })
    }

    /// The ansatz at a dispersion point with the amplitude ratios of its mode.
    pub fn from_point(m: &MaterialParams, point: &DispersionPoint, eps: f64) -> Result<Self> {
        let mp = point.mode_params(m)?.with_eps(eps);
        let amp = amplitude_ratios(m, point, eps)?;
        Self::from_ansatz(m, &mp, &amp)
    }

    /// Every amplitude multiplied by `factor`; the normalization is kept.
    pub fn scaled(&self, factor: C64) -> Self {
        let mut out = self.clone();
        for b in &mut out.branches {
            b.phi *= factor;
            b.psi *= factor;
            b.rot *= factor;
        }
        if let NonlocalPart::ExactLayer { tau11, m12, .. } = &mut out.nonlocal {
            *tau11 *= factor;
            *m12 *= factor;
        }
        out
    }

    /// `N = k²(μ+κ)|Q|`, the stress scale of every report.
    pub fn normalization(&self) -> f64 {
        self.k * self.k * (self.material.mu + self.material.kappa) * self.q_scale
    }

    fn coefficients(&self) -> Vec<(C64, LocalStresses)> {
        self.branches
            .iter()
            .map(|b| (b.rate, b.local_coefficients(&self.material, self.k)))
            .collect()
    }

    /// `∂x^p ∂z^q` of one local stress component at the origin.
    fn surface_derivative(&self, pick: fn(&LocalStresses) -> C64, p: i32, q: i32) -> C64 {
        let ik = I * self.k;
        self.coefficients()
            .iter()
            .map(|(rate, c)| pick(c) * ik.powi(p) * (-rate * self.k).powi(q))
            .sum()
    }

    /// Dimensionless surface traces `σ̃11(η)` and `Π̃12(η)` on the unit
    /// carrier.
    pub fn surface_traces(&self) -> (SurfaceTrace, SurfaceTrace) {
        let n = self.normalization();
        let coeffs = self.coefficients();
        let trace = |f: fn(&LocalStresses) -> C64, scale: f64| SurfaceTrace {
            terms: coeffs.iter().map(|(r, c)| (f(c) * scale, *r)).collect(),
            chi_wavenumber: 1.0,
        };
        (trace(|c| c.sigma11, 1.0 / n), trace(|c| c.pi12, self.k / n))
    }

    /// The printed refined combinations at `z = 0` with non-locality length
    /// `a`, in physical units. With `a = 0` these are the classical
    /// traction and couple-traction components.
    pub fn refined_raw(&self, a: f64) -> [C64; 3] {
        let d = |f: fn(&LocalStresses) -> C64, p, q| self.surface_derivative(f, p, q);
        let s11 = |c: &LocalStresses| c.sigma11;
        let s31 = |c: &LocalStresses| c.sigma31;
        let s33 = |c: &LocalStresses| c.sigma33;
        let p12 = |c: &LocalStresses| c.pi12;
        let p32 = |c: &LocalStresses| c.pi32;
        let a2 = a * a;
        [
            d(s31, 0, 0) - 0.5 * a * d(s11, 1, 0)
                + a2 * (d(s31, 2, 0) + d(s31, 0, 2) + 0.5 * d(s11, 1, 1)),
            d(s33, 0, 0) + a2 * (d(s33, 2, 0) + d(s33, 0, 2) - 0.5 * d(s11, 2, 0)),
            d(p32, 0, 0) - 0.5 * a * d(p12, 1, 0)
                + a2 * (d(p32, 2, 0) + d(p32, 0, 2) + 0.5 * d(p12, 1, 1)),
        ]
    }

    fn normalize3(&self, raw: [C64; 3]) -> [C64; 3] {
        let n = self.normalization();
        [raw[0] / n, raw[1] / n, raw[2] * self.k / n]
    }

    /// Non-local surface operator `[1 − a∂z − (a³/2)∂x²∂z]` applied to
    /// `τ11` and `𝔐12` at `z = 0`, in physical units.
    pub fn extra_raw(&self) -> [C64; 2] {
        let eps = self.eps;
        let coeffs = self.coefficients();
        let mut out = [zero(), zero()];
        match &self.nonlocal {
            NonlocalPart::LayerIntegrals { leading } => {
                for ((rate, c), r0) in coeffs.iter().zip(leading) {
                    let weight = if eps == 0.0 {
                        C64::new(1.0, 0.0)
                    } else {
                        let value = blayer_value_raw(*rate, *r0, eps, 0.0);
                        let slope = blayer_derivative_raw(*rate, *r0, eps, 0.0);
                        value - slope * (eps - 0.5 * eps.powi(3))
                    };
                    out[0] += c.sigma11 * weight;
                    out[1] += c.pi12 * weight;
                }
            }
            NonlocalPart::ExactLayer { tau11, m12, beta } => {
                let e2 = eps * eps;
                for (rate, c) in &coeffs {
                    let operator = 1.0 + eps * rate - 0.5 * e2 * eps * rate;
                    let image = 1.0 - e2 * (rate * rate - 1.0);
                    out[0] += c.sigma11 * operator / image;
                    out[1] += c.pi12 * operator / image;
                }
                let a = eps / self.k;
                let layer = 1.0 + a * beta - 0.5 * a.powi(3) * self.k * self.k * beta;
                out[0] += tau11 * layer;
                out[1] += m12 * layer;
            }
        }
        out
    }
}

/// Dimensionless boundary-condition residuals of a given asymptotic order:
/// order 0 gives `(σ̃31, σ̃33, Π̃32)` and order 1 gives
/// `(σ̃31 − ½∂χσ̃11, σ̃33, Π̃32)`, all at the surface.
pub fn bc_residual_order(sol: &ModeSolution, order: u8) -> Result<[C64; 3]> {
    let base = sol.normalize3(sol.refined_raw(0.0));
    match order {
        0 => Ok(base),
        1 => {
            let d_chi_s11 = I * sol.surface_traces().0.eval(0.0);
            Ok([base[0] - 0.5 * d_chi_s11, base[1], base[2]])
        }
        _ => Err(Error::InvalidInput(format!("order must be 0 or 1, got {order}"))),
    }
}

/// Classical traction-free residuals `(σ31, σ33, Π32)/N` at the surface.
pub fn bc_residual_classical(sol: &ModeSolution) -> [C64; 3] {
    sol.normalize3(sol.refined_raw(0.0))
}

/// The first-order conditions in composite form,
/// `(σ̃31 − (ε/2)∂χσ̃11, σ̃33, Π̃32)`.
pub fn bc_residual_first_order(sol: &ModeSolution, eps: f64) -> [C64; 3] {
    let base = bc_residual_classical(sol);
    let d_chi_s11 = I * sol.surface_traces().0.eval(0.0);
    [base[0] - 0.5 * eps * d_chi_s11, base[1], base[2]]
}

/// The refined conditions with `a = ε/k`, normalized by `N`.
pub fn bc_residual_refined(sol: &ModeSolution, eps: f64) -> [C64; 3] {
    sol.normalize3(sol.refined_raw(eps / sol.k))
}

/// The two extra conditions of the differential model, normalized by `N`
/// and `N/k`.
pub fn extra_bc_residual(sol: &ModeSolution) -> [C64; 2] {
    let raw = sol.extra_raw();
    let n = sol.normalization();
    [raw[0] / n, raw[1] * sol.k / n]
}

// ---------------------------------------------------------------------------
// exact near-surface mode of the singularly perturbed problem

/// The surface mode of the differential model at fixed `k` and `ε = a·k`.
#[derive(Debug, Clone, PartialEq)]
pub struct NearSurfaceMode {
    /// Phase speed; real to rounding for a trapped mode.
    pub v: C64,
    /// Decay rate `√(k² + 1/a²)` of the fast layer.
    pub beta: f64,
    /// Amplitudes of the bulk branches `P`, `Q = 1` and, when `κ > 0`, `R`.
    pub bulk: Vec<C64>,
    /// Surface values of the fast layer in `τ11` and `𝔐12`.
    pub layer: (C64, C64),
    pub iterations: usize,
    pub solution: ModeSolution,
}

/// Bulk basis at complex speed `v`: the dilatational branch, then the shear
/// and (when `κ > 0`) micro branches with their rotation couplings.
fn bulk_basis(m: &MaterialParams, k: f64, v: C64, eps: f64) -> Result<Vec<Branch>> {
    let sc = derive_scales(m)?;
    let e2v2 = eps * eps * v * v;
    let one = C64::new(1.0, 0.0);
    let r1 = decay_sqrt(1.0 - v * v / (sc.c1 * sc.c1 - e2v2));
    let mut out = vec![Branch {
        rate: r1,
        phi: one,
        psi: zero(),
        rot: zero(),
    }];
    if m.kappa > 0.0 {
        let roots = coupled_shear_roots(m, k, v, eps)?;
        for root in [roots.shear, roots.micro] {
            out.push(Branch {
                rate: root.delta,
                phi: zero(),
                psi: one,
                rot: root.coupling,
            });
        }
    } else {
        out.push(Branch {
            rate: decay_sqrt(1.0 - v * v / (sc.c2 * sc.c2 - e2v2)),
            phi: zero(),
            psi: one,
            rot: zero(),
        });
    }
    Ok(out)
}

/// Conditions `τ31, τ33, 𝔐32, L[τ11], L[𝔐12]` at `z = 0`; columns are the
/// bulk branches followed by the layer amplitudes of `τ11` and `𝔐12`. For
/// `κ = 0` the couple rows and the `𝔐12` column are dropped.
fn boundary_matrix(m: &MaterialParams, k: f64, v: C64, eps: f64) -> Result<(DMatrix<C64>, Vec<Branch>)> {
    let basis = bulk_basis(m, k, v, eps)?;
    let micro = m.kappa > 0.0;
    let n = if micro { 5 } else { 3 };
    let e2 = eps * eps;
    let a = eps / k;
    let beta = (k * k + 1.0 / (a * a)).sqrt();
    let layer_op = 1.0 + a * beta - 0.5 * a.powi(3) * k * k * beta;
    let ik = I * k;
    let stress = k * k * (m.mu + m.kappa);
    let couple = stress / k;

    let mut mat = DMatrix::from_element(n, n, zero());
    for (j, b) in basis.iter().enumerate() {
        let c = b.local_coefficients(m, k);
        let image = 1.0 - e2 * (b.rate * b.rate - 1.0);
        let op = 1.0 + eps * b.rate - 0.5 * e2 * eps * b.rate;
        mat[(0, j)] = c.sigma31 / image / stress;
        mat[(1, j)] = c.sigma33 / image / stress;
        if micro {
            mat[(2, j)] = c.pi32 / image / couple;
            mat[(3, j)] = c.sigma11 * op / image / stress;
            mat[(4, j)] = c.pi12 * op / image / couple;
        } else {
            mat[(2, j)] = c.sigma11 * op / image / stress;
        }
    }
    let na = basis.len();
    // τ-layer: τ11 = A, τ31 = τ13 = ikA/β, τ33 = −k²A/β²
    mat[(0, na)] = ik / beta / stress;
    mat[(1, na)] = C64::new(-(k * k) / (beta * beta) / stress, 0.0);
    if micro {
        mat[(3, na)] = C64::new(layer_op / stress, 0.0);
        // 𝔐-layer: 𝔐12 = S, 𝔐32 = ikS/β
        mat[(2, na + 1)] = ik / beta / couple;
        mat[(4, na + 1)] = C64::new(layer_op / couple, 0.0);
    } else {
        mat[(2, na)] = C64::new(layer_op / stress, 0.0);
    }
    Ok((mat, basis))
}

/// Solves for the trapped surface mode of the differential model with
/// `a = ε/k`, starting from the classical Rayleigh speed.
pub fn near_surface_mode(m: &MaterialParams, k: f64, eps: f64) -> Result<NearSurfaceMode> {
    if !(k > 0.0 && k.is_finite()) || !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "near-surface mode needs k > 0 and eps > 0, got k = {k}, eps = {eps}"
        )));
    }
    let sc = derive_scales(m)?;
    let v_r = solve_rayleigh(m, k * sc.c2, 1e-13)?.v;
    let det = |v: C64| -> Result<C64> { Ok(boundary_matrix(m, k, v, eps)?.0.determinant()) };

    let mut v0 = C64::new(v_r, 0.0);
    let mut v1 = C64::new(v_r * (1.0 + 1e-6), 0.0);
    let mut f0 = det(v0)?;
    let mut f1 = det(v1)?;
    let mut iterations = 0;
    loop {
        iterations += 1;
        if iterations > SECANT_MAX_ITER {
            return Err(Error::RootNotConverged(format!(
                "near-surface mode at k = {k}, eps = {eps}: secant stalled near v = {v1}"
            )));
        }
        let den = f1 - f0;
        if den.norm() == 0.0 {
            break;
        }
        let v2 = v1 - f1 * (v1 - v0) / den;
        if !(v2.re.is_finite() && v2.im.is_finite()) {
            return Err(Error::RootNotConverged(format!(
                "near-surface mode at k = {k}, eps = {eps}: secant diverged"
            )));
        }
        let step = (v2 - v1).norm();
        v0 = v1;
        f0 = f1;
        v1 = v2;
        if step <= SECANT_TOL * v1.norm() {
            break;
        }
        f1 = det(v1)?;
    }
    let v = v1;

    let (mat, basis) = boundary_matrix(m, k, v, eps)?;
    if v.im.abs() > 1e-8 * v.re.abs() || basis.iter().any(|b| !(b.rate.re > 0.0)) || !(v.re > 0.0) {
        return Err(Error::NoSurfaceMode(format!(
            "the mode of the differential model at k = {k}, eps = {eps} does not decay (v = {v})"
        )));
    }
    let null = null_vector(&mat)?;
    let q = null[1];
    if q.norm() == 0.0 {
        return Err(Error::Singular("the near-surface mode has no shear component".into()));
    }
    let null: Vec<C64> = null.iter().map(|x| x / q).collect();

    let nb = basis.len();
    let branches: Vec<Branch> = basis
        .iter()
        .zip(&null)
        .map(|(b, &amp)| Branch {
            rate: b.rate,
            phi: b.phi * amp,
            psi: b.psi * amp,
            rot: b.rot * amp,
        })
        .collect();
    let tau11 = null[nb];
    let m12 = if m.kappa > 0.0 { null[nb + 1] } else { zero() };
    let beta = k * (1.0 + eps * eps).sqrt() / eps;
    let solution = ModeSolution {
        material: m.with_nonlocality(eps / k),
        k,
        eps,
        branches,
        nonlocal: NonlocalPart::ExactLayer { tau11, m12, beta },
        q_scale: 1.0,
    };
    Ok(NearSurfaceMode {
        v,
        beta,
        bulk: null[..nb].to_vec(),
        layer: (tau11, m12),
        iterations,
        solution,
    })
}

/// Right singular vector of the smallest singular value, after scaling every
/// row to unit maximum.
fn null_vector(mat: &DMatrix<C64>) -> Result<Vec<C64>> {
    let mut scaled = mat.clone();
    for mut row in scaled.row_iter_mut() {
        let peak = row.iter().map(|x| x.norm()).fold(0.0, f64::max);
        if peak > 0.0 {
            row /= C64::new(peak, 0.0);
        }
    }
    let svd = scaled.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Singular("singular value decomposition failed".into()))?;
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty matrix");
    Ok(v_t.row(idx).iter().map(|x| x.conj()).collect())
}

/// The wavenumber used for residual reports: `ω_c / v_R` when `κ > 0`, so
/// the micro branch sits near its cutoff and stays trapped; otherwise the
/// problem is scale-free and `k = 1`.
pub fn reference_wavenumber(m: &MaterialParams) -> Result<f64> {
    let sc = derive_scales(m)?;
    if m.kappa > 0.0 {
        let v_r = solve_rayleigh(m, sc.omega_cutoff, 1e-13)?.v;
        Ok(sc.omega_cutoff / v_r)
    } else {
        Ok(1.0)
    }
}

// ---------------------------------------------------------------------------
// slope study and report

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len().min(ys.len()) as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn norm3(r: &[C64]) -> f64 {
    r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Residual norms of the near-surface elastic mode over a set of ε values,
/// with their log-log slopes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeStudy {
    pub k: f64,
    pub eps: Vec<f64>,
    pub classical: Vec<f64>,
    pub first_order: Vec<f64>,
    pub refined: Vec<f64>,
    pub classical_slope: f64,
    pub first_order_slope: f64,
    pub refined_slope: f64,
}

/// Runs the slope study at wavenumber `k`; the ε points are independent and
/// evaluated in parallel.
pub fn slope_study(m: &MaterialParams, k: f64, eps_values: &[f64]) -> Result<SlopeStudy> {
    let rows: Vec<(f64, f64, f64)> = eps_values
        .par_iter()
        .map(|&eps| {
            let sol = near_surface_mode(m, k, eps)?.solution;
            Ok((
                norm3(&bc_residual_classical(&sol)),
                norm3(&bc_residual_first_order(&sol, eps)),
                norm3(&bc_residual_refined(&sol, eps)),
            ))
        })
        .collect::<Result<_>>()?;
    let classical: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let first_order: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let refined: Vec<f64> = rows.iter().map(|r| r.2).collect();
    Ok(SlopeStudy {
        k,
        eps: eps_values.to_vec(),
        classical_slope: loglog_slope(eps_values, &classical),
        first_order_slope: loglog_slope(eps_values, &first_order),
        refined_slope: loglog_slope(eps_values, &refined),
        classical,
        first_order,
        refined,
    })
}

/// Scales attached to a [`BCResidualReport`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Normalization {
    /// `k²(μ+κ)|Q|` in pascal; couple stresses are divided by this over `k`.
    pub stress: f64,
    pub k: f64,
    pub eps: f64,
    pub a: f64,
}

/// All boundary-condition residuals of one mode solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BCResidualReport {
    #[serde(serialize_with = "complex_seq")]
    pub classical: [C64; 3],
    #[serde(serialize_with = "complex_seq")]
    pub first_order: [C64; 3],
    #[serde(serialize_with = "complex_seq")]
    pub refined: [C64; 3],
    #[serde(serialize_with = "complex_seq")]
    pub extra: [C64; 2],
    /// Elastic-mode bracket over `2(1+d)² r10` and, when `κ > 0`, the
    /// micropolar residual over `k³` at twice the cutoff frequency.
    #[serde(serialize_with = "complex_seq")]
    pub equivalence: Vec<C64>,
    pub normalization: Normalization,
    pub slopes: Option<SlopeStudy>,
}

fn complex_seq<S: Serializer, T: AsRef<[C64]>>(values: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Pair {
        re: f64,
        im: f64,
    }
    let values = values.as_ref();
    let mut seq = s.serialize_seq(Some(values.len()))?;
    for z in values {
        seq.serialize_element(&Pair { re: z.re, im: z.im })?;
    }
    seq.end()
}

impl BCResidualReport {
    /// Residuals of `sol` with the given equivalence entries.
    pub fn new(sol: &ModeSolution, equivalence: Vec<C64>) -> Self {
        BCResidualReport {
            classical: bc_residual_classical(sol),
            first_order: bc_residual_first_order(sol, sol.eps),
            refined: bc_residual_refined(sol, sol.eps),
            extra: extra_bc_residual(sol),
            equivalence,
            normalization: Normalization {
                stress: sol.normalization(),
                k: sol.k,
                eps: sol.eps,
                a: sol.eps / sol.k,
            },
            slopes: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Equivalence entries of a material at wavenumber `k`.
pub fn equivalence_entries(m: &MaterialParams, k: f64) -> Result<Vec<C64>> {
    let sc = derive_scales(m)?;
    let point = solve_rayleigh(m, k * sc.c2, 1e-13)?;
    let eq20 = equivalence_residual_elastic(m, &point)?;
    let mut out = vec![eq20.coefficient / point.k.powi(3)];
    if m.kappa > 0.0 {
        let omega = 2.0 * sc.omega_cutoff;
        let v = micropolar_velocity(m, omega)?;
        if v < sc.c2 {
            let kk = omega / v;
            out.push(equivalence_residual_micropolar(m, v, kk)? / kk.powi(3));
        }
    }
    Ok(out)
}

/// The residual report of the near-surface elastic mode at the reference
/// wavenumber. `eps` defaults to `a_nl·k`; with `eps = 0` the report is taken
/// on the classical Rayleigh mode. `with_slopes` adds the slope study over
/// [`SLOPE_EPS`].
pub fn near_surface_report(m: &MaterialParams, eps: Option<f64>, with_slopes: bool) -> Result<BCResidualReport> {
    let k = reference_wavenumber(m)?;
    let eps = eps.unwrap_or(m.a_nl * k);
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidInput(format!("eps must be non-negative, got {eps}")));
    }
    let sol = if eps == 0.0 {
        let sc = derive_scales(m)?;
        let point = solve_rayleigh(m, k * sc.c2, 1e-13)?;
        let mp = point.mode_params(m)?.with_eps(0.0);
        let amp = amplitude_ratios(m, &point, 0.0)?;
        ModeSolution::from_ansatz(m, &ModeParams { k, ..mp }, &amp)?
    } else {
        near_surface_mode(m, k, eps)?.solution
    };
    let mut report = BCResidualReport::new(&sol, equivalence_entries(m, k)?);
    if with_slopes {
        report.slopes = Some(slope_study(m, k, &SLOPE_EPS)?);
    }
    Ok(report)
}
