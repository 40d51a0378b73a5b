//! Leading-order dispersion relations of the two surface modes.
//!
//! The elastic mode satisfies the secular equation
//! `(1+d)² r10 r20 − (r20² + d)² = 0`, which does not involve the frequency,
//! so its phase velocity is constant. The micropolar mode travels at the speed
//! where `r30` vanishes and exists only above the cutoff frequency.

use std::fmt::Write as _;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::material::{derive_scales, MaterialParams};
use crate::wavefield::{decay_exponents_paper, decay_sqrt, Amplitudes, DecayExponents, ModeParams, ModeTag};
use crate::{fmt_f64, Error, Result, C64, I};

/// Number of samples used to look for sign changes of the secular function.
const SCAN_POINTS: usize = 4000;

/// Value of the secular function and whether `v ≥ c2`, where `r20` is
/// imaginary and the returned value is the real part of a complex number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Secular {
    pub value: f64,
    pub leaky: bool,
}

/// `(1+d)² r10 r20 − (r20² + d)²` with the ε = 0 exponents at speed `v`.
pub fn secular_leading(m: &MaterialParams, v: f64) -> Result<Secular> {
    if !(v >= 0.0 && v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "phase velocity must be non-negative, got {v}"
        )));
    }
    let sc = derive_scales(m)?;
    let r10 = decay_sqrt(C64::new(1.0 - (v / sc.c1).powi(2), 0.0));
    let r20 = decay_sqrt(C64::new(1.0 - (v / sc.c2).powi(2), 0.0));
    Ok(Secular {
        value: secular_from_exponents(sc.d, r10, r20).re,
        leaky: v >= sc.c2,
    })
}

pub(crate) fn secular_from_exponents(d: f64, r10: C64, r20: C64) -> C64 {
    let b = r20 * r20 + d;
    (1.0 + d) * (1.0 + d) * r10 * r20 - b * b
}

/// One solved state on a dispersion curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionPoint {
    pub omega: f64,
    pub k: f64,
    pub v: f64,
    pub mode_tag: ModeTag,
    /// Exponents at `eps = a_nl·k`.
    pub exponents: DecayExponents,
    /// `|secular(v)|` for the elastic mode, `|r30²|` for the micropolar mode.
    pub secular_residual: f64,
    pub admissible: bool,
}

impl DispersionPoint {
    pub fn mode_params(&self, m: &MaterialParams) -> Result<ModeParams> {
        ModeParams::new(self.k, self.omega, m.a_nl * self.k, self.mode_tag)
    }
}

fn make_point(m: &MaterialParams, omega: f64, v: f64, tag: ModeTag, residual: f64) -> Result<DispersionPoint> {
    let mp = ModeParams::from_velocity(m, omega, v, tag)?;
    let exponents = decay_exponents_paper(m, &mp)?;
    Ok(DispersionPoint {
        omega,
        k: mp.k,
        v,
        mode_tag: tag,
        exponents,
        secular_residual: residual,
        admissible: exponents.is_admissible(),
    })
}

/// Phase velocity of the elastic mode.
///
/// The secular function vanishes doubly at `v = 0`, is positive just above it
/// and equals `−d²` at `c2`, so a surface mode shows up as a sign change in
/// `(0.01 c2, 0.9999 c2)`. That interval is scanned, the largest-velocity
/// bracket is bisected to `tol·c2`, and a final secant step inside the bracket
/// removes the remaining residual. `omega` only labels the returned point.
pub fn solve_rayleigh(m: &MaterialParams, omega: f64, tol: f64) -> Result<DispersionPoint> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::InvalidInput(format!("omega must be positive, got {omega}")));
    }
    let sc = derive_scales(m)?;
    let f = |v: f64| -> Result<f64> { Ok(secular_leading(m, v)?.value) };
    let (lo, hi) = (0.01 * sc.c2, 0.9999 * sc.c2);

    let mut bracket = None;
    let mut prev_v = hi;
    let mut prev_f = f(hi)?;
    for n in (0..SCAN_POINTS).rev() {
        let v = lo + (hi - lo) * n as f64 / SCAN_POINTS as f64;
        let fv = f(v)?;
        if fv == 0.0 {
            bracket = Some((v, v, fv, fv));
            break;
        }
        if fv.signum() != prev_f.signum() {
            bracket = Some((v, prev_v, fv, prev_f));
            break;
        }
        prev_v = v;
        prev_f = fv;
    }
    let (mut a, mut b, mut fa, mut fb) = bracket.ok_or_else(|| {
        Error::NoSurfaceMode(format!(
            "the secular function keeps one sign on ({lo}, {hi}) m/s (d = {})",
            sc.d
        ))
    })?;

    let width = tol * sc.c2;
    let mut iterations = 0;
    while b - a > width && fa != 0.0 {
        let mid = 0.5 * (a + b);
        let fm = f(mid)?;
        if fm == 0.0 {
            a = mid;
            b = mid;
            fa = 0.0;
            fb = 0.0;
            break;
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
            fb = fm;
        }
        iterations += 1;
        if iterations > 2000 {
            return Err(Error::RootNotConverged(format!(
                "bisection stalled at bracket ({a}, {b})"
            )));
        }
    }
    let mut v = if fa == 0.0 {
        a
    } else if fb == 0.0 {
        b
    } else {
        0.5 * (a + b)
    };
    if fa != 0.0 && fb != 0.0 && fa != fb {
        let secant = a - fa * (b - a) / (fb - fa);
        if secant >= a && secant <= b && f(secant)?.abs() < f(v)?.abs() {
            v = secant;
        }
    }
    make_point(m, omega, v, ModeTag::Elastic, f(v)?.abs())
}

/// Phase velocity of the micropolar mode, `c4 / sqrt(1 − ω_c²/ω²)`.
pub fn micropolar_velocity(m: &MaterialParams, omega: f64) -> Result<f64> {
    let sc = derive_scales(m)?;
    if !(omega > sc.omega_cutoff) || !omega.is_finite() {
        return Err(Error::Cutoff {
            omega,
            omega_cutoff: sc.omega_cutoff,
        });
    }
    let factor = 1.0 - 2.0 * sc.c3 * sc.c3 / (m.j_inertia * omega * omega);
    Ok(sc.c4 / factor.sqrt())
}

/// The micropolar-mode state at `omega`.
pub fn micropolar_point(m: &MaterialParams, omega: f64) -> Result<DispersionPoint> {
    let v = micropolar_velocity(m, omega)?;
    let mp = ModeParams::from_velocity(m, omega, v, ModeTag::Micropolar)?;
    let de = decay_exponents_paper(m, &mp)?;
    let residual = de.r30.map_or(0.0, |r| (r * r).norm());
    make_point(m, omega, v, ModeTag::Micropolar, residual)
}

/// Amplitudes `P`, `Q = 1`, `R` of the mode at `point`, including the
/// `(ε − ε² r20)` corrections.
pub fn amplitude_ratios(m: &MaterialParams, point: &DispersionPoint, eps: f64) -> Result<Amplitudes> {
    let sc = derive_scales(m)?;
    let d = sc.d;
    let de = &point.exponents;
    let (r10, r20) = (de.r10, de.r20);
    if r10.norm() == 0.0 {
        return Err(Error::Singular("r10 = 0 makes the amplitude ratio singular".into()));
    }
    let b = r20 * r20 + d;
    let corr = |r: C64| 1.0 + (r - r20) * (eps - eps * eps * r20);
    let one = C64::new(1.0, 0.0);
    match point.mode_tag {
        ModeTag::Elastic => Ok(Amplitudes::new(
            I * b * corr(r10) / ((1.0 + d) * r10),
            one,
            C64::new(0.0, 0.0),
        )),
        ModeTag::Micropolar => {
            if b.norm() == 0.0 {
                return Err(Error::Singular("r20² + d = 0 makes the amplitude ratio singular".into()));
            }
            let r30 = de.r30.ok_or_else(|| {
                Error::Singular("the micropolar mode needs kappa > 0".into())
            })?;
            let p = I * (1.0 + d) * r20 / b * corr(r10);
            let r = -secular_from_exponents(d, r10, r20) / b * corr(r30);
            Ok(Amplitudes::new(p, one, r))
        }
    }
}

/// An entry of a frequency sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveEntry {
    Propagating(DispersionPoint),
    /// Below the cutoff of the micropolar mode.
    NonPropagating { omega: f64, mode_tag: ModeTag },
}

impl CurveEntry {
    pub fn omega(&self) -> f64 {
        match self {
            CurveEntry::Propagating(p) => p.omega,
            CurveEntry::NonPropagating { omega, .. } => *omega,
        }
    }
}

/// A frequency sweep of one mode, with a fingerprint of the material it was
/// computed for.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionCurve {
    pub points: Vec<CurveEntry>,
    pub fingerprint: String,
}

/// SHA-256 over the bit patterns of the nine material constants.
pub fn material_fingerprint(m: &MaterialParams) -> String {
    let mut hasher = Sha256::new();
    for value in [
        m.lambda_lame,
        m.mu,
        m.kappa,
        m.alpha_mp,
        m.beta_mp,
        m.gamma_mp,
        m.rho,
        m.j_inertia,
        m.a_nl,
    ] {
        hasher.update(value.to_bits().to_le_bytes());
    }
    hasher.finalize().iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// `n` log-spaced frequencies from `omega_lo` to `omega_hi`, both included.
pub fn log_grid(omega_lo: f64, omega_hi: f64, n: usize) -> Vec<f64> {
    let ratio = (omega_hi / omega_lo).ln();
    (0..n)
        .map(|i| {
            if i == 0 {
                omega_lo
            } else if i == n - 1 {
                omega_hi
            } else {
                omega_lo * (ratio * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Solve the chosen mode on `n` log-spaced frequencies.
pub fn sweep(
    m: &MaterialParams,
    omega_lo: f64,
    omega_hi: f64,
    n: usize,
    mode_tag: ModeTag,
) -> Result<DispersionCurve> {
    sweep_with_tol(m, omega_lo, omega_hi, n, mode_tag, 1e-10)
}

/// [`sweep`] with an explicit root tolerance for the elastic mode.
pub fn sweep_with_tol(
    m: &MaterialParams,
    omega_lo: f64,
    omega_hi: f64,
    n: usize,
    mode_tag: ModeTag,
    tol: f64,
) -> Result<DispersionCurve> {
    if !(omega_lo > 0.0 && omega_lo < omega_hi && omega_hi.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "need 0 < omega_lo < omega_hi, got ({omega_lo}, {omega_hi})"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidInput(format!("a sweep needs at least 2 points, got {n}")));
    }
    let sc = derive_scales(m)?;
    let grid = log_grid(omega_lo, omega_hi, n);
    let points = match mode_tag {
        ModeTag::Elastic => {
            // the leading-order elastic speed does not depend on ω
            let root = solve_rayleigh(m, grid[0], tol)?;
            grid.par_iter()
                .map(|&w| make_point(m, w, root.v, ModeTag::Elastic, root.secular_residual).map(CurveEntry::Propagating))
                .collect::<Result<Vec<_>>>()?
        }
        ModeTag::Micropolar => {
            if omega_hi <= sc.omega_cutoff {
                return Err(Error::Cutoff {
                    omega: omega_hi,
                    omega_cutoff: sc.omega_cutoff,
                });
            }
            grid.par_iter()
                .map(|&w| {
                    if w <= sc.omega_cutoff {
                        Ok(CurveEntry::NonPropagating {
                            omega: w,
                            mode_tag,
                        })
                    } else {
                        micropolar_point(m, w).map(CurveEntry::Propagating)
                    }
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(DispersionCurve {
        points,
        fingerprint: material_fingerprint(m),
    })
}

/// Header of the dispersion-curve CSV.
pub const CURVE_CSV_HEADER: &str = "omega,k,v,mode,r1,r2,r3_re,r3_im,secular_residual,admissible";

/// One line of the dispersion-curve CSV. Empty cells are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub omega: f64,
    pub k: Option<f64>,
    pub v: Option<f64>,
    pub mode: ModeTag,
    pub r1: Option<f64>,
    pub r2: Option<f64>,
    pub r3_re: Option<f64>,
    pub r3_im: Option<f64>,
    pub secular_residual: Option<f64>,
    pub admissible: bool,
}

impl From<&CurveEntry> for CurveRow {
    fn from(entry: &CurveEntry) -> Self {
        match entry {
            CurveEntry::Propagating(p) => CurveRow {
                omega: p.omega,
                k: Some(p.k),
                v: Some(p.v),
                mode: p.mode_tag,
                r1: Some(p.exponents.r1.re),
                r2: Some(p.exponents.r2.re),
                r3_re: p.exponents.r3.map(|r| r.re),
                r3_im: p.exponents.r3.map(|r| r.im),
                secular_residual: Some(p.secular_residual),
                admissible: p.admissible,
            },
            CurveEntry::NonPropagating { omega, mode_tag } => CurveRow {
                omega: *omega,
                k: None,
                v: None,
                mode: *mode_tag,
                r1: None,
                r2: None,
                r3_re: None,
                r3_im: None,
                secular_residual: None,
                admissible: false,
            },
        }
    }
}

impl DispersionCurve {
    pub fn rows(&self) -> Vec<CurveRow> {
        self.points.iter().map(CurveRow::from).collect()
    }

    pub fn to_csv(&self) -> String {
        rows_to_csv(&self.rows())
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Serialize rows with [`CURVE_CSV_HEADER`], LF line endings.
pub fn rows_to_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from(CURVE_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            fmt_f64(r.omega),
            cell(r.k),
            cell(r.v),
            r.mode,
            cell(r.r1),
            cell(r.r2),
            cell(r.r3_re),
            cell(r.r3_im),
            cell(r.secular_residual),
            r.admissible
        );
    }
    out
}

/// Parse a dispersion-curve CSV written by [`rows_to_csv`].
pub fn parse_curve_csv(text: &str) -> Result<Vec<CurveRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(CURVE_CSV_HEADER) {
        return Err(Error::InvalidInput(format!(
            "expected header `{CURVE_CSV_HEADER}`"
        )));
    }
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let bad = |what: &str| Error::InvalidInput(format!("line {}: {what}", n + 2));
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 10 {
            return Err(bad("expected 10 fields"));
        }
        let opt = |s: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| bad(&format!("bad number `{s}`")))
            }
        };
        rows.push(CurveRow {
            omega: opt(f[0])?.ok_or_else(|| bad("missing omega"))?,
            k: opt(f[1])?,
            v: opt(f[2])?,
            mode: f[3].parse()?,
            r1: opt(f[4])?,
            r2: opt(f[5])?,
            r3_re: opt(f[6])?,
            r3_im: opt(f[7])?,
            secular_residual: opt(f[8])?,
            admissible: f[9].parse().map_err(|_| bad("admissible must be true or false"))?,
        });
    }
    Ok(rows)
}
