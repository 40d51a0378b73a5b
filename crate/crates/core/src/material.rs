//! Physical constants of the micropolar non-local solid and the scales derived
//! from them.
//!
//! All quantities are SI. The couple-stress constants `alpha_mp` and `beta_mp`
//! are carried for completeness of the constitutive law but do not enter the
//! plane-strain problem, where only `gamma_mp` survives.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The nine constants of an isotropic, homogeneous micropolar solid with
/// Bessel-kernel non-locality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialParams {
    /// Lamé constant Λ (Pa).
    #[serde(rename = "lambda")]
    pub lambda_lame: f64,
    /// Shear modulus μ (Pa).
    pub mu: f64,
    /// Micropolar coupling κ (Pa).
    pub kappa: f64,
    /// Couple-stress constant α (N).
    #[serde(rename = "alpha")]
    pub alpha_mp: f64,
    /// Couple-stress constant β (N).
    #[serde(rename = "beta")]
    pub beta_mp: f64,
    /// Couple-stress constant γ (N).
    #[serde(rename = "gamma")]
    pub gamma_mp: f64,
    /// Mass density ρ (kg/m³).
    pub rho: f64,
    /// Microinertia j (m²).
    #[serde(rename = "j")]
    pub j_inertia: f64,
    /// Non-locality length 𝔞 (m).
    #[serde(rename = "a")]
    pub a_nl: f64,
}

/// Result of [`validate`]: empty `violations` means the material is usable.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationOutcome {
    pub violations: Vec<String>,
}

impl ValidationOutcome {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Wave speeds and related scales of a material.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedScales {
    /// Dilatational speed √((Λ+2μ+κ)/ρ).
    pub c1: f64,
    /// Shear speed √((μ+κ)/ρ).
    pub c2: f64,
    /// √(κ/ρ); zero in the classical limit.
    pub c3: f64,
    /// Rotational speed √(γ/(ρj)).
    pub c4: f64,
    /// μ/(μ+κ).
    pub d: f64,
    /// Cutoff √(2κ/(ρj)) below which the micropolar mode cannot propagate.
    pub omega_cutoff: f64,
}

/// Dimensionless groups at a given wavenumber, with reference length 1/k.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dimensionless {
    pub eps: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    /// Microinertia over the squared reference length, `J = j/λ²`.
    pub j_ratio: f64,
    pub lambda_ref: f64,
}

impl MaterialParams {
    /// Reads a material from a JSON object with exactly the keys
    /// `lambda, mu, kappa, alpha, beta, gamma, rho, j, a`.
    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("material serializes")
    }

    /// Copy of this material with a different non-locality length.
    pub fn with_nonlocality(mut self, a_nl: f64) -> Self {
        self.a_nl = a_nl;
        self
    }

    pub fn validate(&self) -> ValidationOutcome {
        validate(self)
    }

    pub fn scales(&self) -> Result<DerivedScales> {
        derive_scales(self)
    }
}

/// Checks every bound the rest of the crate relies on. Never fails; the
/// outcome lists each violated invariant.
pub fn validate(m: &MaterialParams) -> ValidationOutcome {
    let mut violations = Vec::new();
    let named = [
        ("lambda", m.lambda_lame),
        ("mu", m.mu),
        ("kappa", m.kappa),
        ("alpha", m.alpha_mp),
        ("beta", m.beta_mp),
        ("gamma", m.gamma_mp),
        ("rho", m.rho),
        ("j", m.j_inertia),
        ("a", m.a_nl),
    ];
    for (name, value) in named {
        if !value.is_finite() {
            violations.push(format!("{name} is finite"));
        }
    }
    let mut check = |ok: bool, what: &str| {
        if !ok {
            violations.push(what.to_string());
        }
    };
    check(m.rho > 0.0, "rho > 0");
    check(m.mu > 0.0, "mu > 0");
    check(m.kappa >= 0.0, "kappa >= 0");
    check(m.gamma_mp > 0.0, "gamma > 0");
    check(m.j_inertia > 0.0, "j > 0");
    check(m.a_nl >= 0.0, "a >= 0");
    check(m.lambda_lame + 2.0 * m.mu + m.kappa > 0.0, "lambda + 2 mu + kappa > 0");
    ValidationOutcome { violations }
}

pub fn derive_scales(m: &MaterialParams) -> Result<DerivedScales> {
    let outcome = validate(m);
    if !outcome.is_ok() {
        return Err(Error::InvalidInput(format!(
            "material violates: {}",
            outcome.violations.join(", ")
        )));
    }
    let c1 = ((m.lambda_lame + 2.0 * m.mu + m.kappa) / m.rho).sqrt();
    let c2 = ((m.mu + m.kappa) / m.rho).sqrt();
    // c1 > c2 is equivalent to lambda + mu > 0
    if c1 <= c2 {
        return Err(Error::InvalidInput(
            "dilatational speed must exceed shear speed (lambda + mu > 0)".into(),
        ));
    }
    Ok(DerivedScales {
        c1,
        c2,
        c3: (m.kappa / m.rho).sqrt(),
        c4: (m.gamma_mp / (m.rho * m.j_inertia)).sqrt(),
        d: m.mu / (m.mu + m.kappa),
        omega_cutoff: (2.0 * m.kappa / (m.rho * m.j_inertia)).sqrt(),
    })
}

pub fn dimensionless_params(m: &MaterialParams, k: f64) -> Result<Dimensionless> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidInput(format!("wavenumber must be positive, got {k}")));
    }
    let s = derive_scales(m)?;
    let lambda_ref = 1.0 / k;
    Ok(Dimensionless {
        eps: m.a_nl * k,
        alpha1: s.c1 / s.c2,
        alpha2: s.c3 / s.c2,
        alpha3: s.c4 / s.c2,
        j_ratio: m.j_inertia / (lambda_ref * lambda_ref),
        lambda_ref,
    })
}

/// Reference materials used by the examples and tests.
pub mod samples {
    use super::MaterialParams;

    /// Generic micropolar material with κ/μ = 0.1 and `c4 = 0.6 c2`.
    pub fn micropolar() -> MaterialParams {
        MaterialParams {
            lambda_lame: 2.0e9,
            mu: 1.5e9,
            kappa: 0.15e9,
            alpha_mp: 500.0,
            beta_mp: 500.0,
            gamma_mp: 594.0,
            rho: 2000.0,
            j_inertia: 1.0e-6,
            a_nl: 1.0e-5,
        }
    }

    /// Poisson solid (Λ = μ) without micropolarity.
    pub fn classical() -> MaterialParams {
        MaterialParams {
            lambda_lame: 1.0e9,
            mu: 1.0e9,
            kappa: 0.0,
            alpha_mp: 0.0,
            beta_mp: 0.0,
            gamma_mp: 1.0,
            rho: 1000.0,
            j_inertia: 1.0e-6,
            a_nl: 1.0e-4,
        }
    }
}
