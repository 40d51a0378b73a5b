//! The Bessel non-local kernel in integral and differential form.
//!
//! The integral form convolves a sampled field with
//! `K0(r/a) / (2π a²)`; the differential form applies `1 − a²∇²`. The two are
//! inverse to each other on fields that vanish near the grid edges, which is
//! what the round-trip tests check. The one-dimensional trace integral and the
//! surface boundary operator act on exponential traces in the dimensionless
//! depth `η = kz`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::specfun::bessel::{k0_unchecked, k1_unchecked};
use crate::specfun::{integrate_1d, integrate_2d_rect, QuadratureSpec};
use crate::{fmt_f64, Error, Result, C64};

/// The kernel is cut off at this many non-locality lengths.
pub const TRUNCATION_RADIUS: f64 = 12.0;

/// A complex field sampled on a uniform grid, stored z-major: the value at
/// column `i`, row `j` sits at `values[j * nx + i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField2D {
    pub nx: usize,
    pub nz: usize,
    pub dx: f64,
    pub dz: f64,
    pub x0: f64,
    /// Depth of the first row; `0` for a field that starts at the surface.
    pub z0: f64,
    pub values: Vec<C64>,
    /// Set by the convolutions when the truncation disk does not fit inside
    /// the grid, so nodes near the edges miss part of the kernel support.
    pub edge_effect: bool,
}

impl ScalarField2D {
    pub fn new(
        nx: usize,
        nz: usize,
        dx: f64,
        dz: f64,
        x0: f64,
        z0: f64,
        values: Vec<C64>,
    ) -> Result<Self> {
        if nx < 4 || nz < 4 {
            return Err(Error::InvalidInput(format!(
                "grid must be at least 4x4, got {nx}x{nz}"
            )));
        }
        if !(dx > 0.0 && dz > 0.0 && dx.is_finite() && dz.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "grid spacings must be positive, got dx = {dx}, dz = {dz}"
            )));
        }
        if !(x0.is_finite() && z0.is_finite()) {
            return Err(Error::InvalidInput("grid origin must be finite".into()));
        }
        if values.len() != nx * nz {
            return Err(Error::InvalidInput(format!(
                "expected {} samples, got {}",
                nx * nz,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidInput("field contains non-finite samples".into()));
        }
        Ok(ScalarField2D {
            nx,
            nz,
            dx,
            dz,
            x0,
            z0,
            values,
            edge_effect: false,
        })
    }

    /// Sample `f(x, z)` on the grid.
    pub fn from_fn(
        nx: usize,
        nz: usize,
        dx: f64,
        dz: f64,
        x0: f64,
        z0: f64,
        f: impl Fn(f64, f64) -> C64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(nx * nz);
        for j in 0..nz {
            for i in 0..nx {
                values.push(f(x0 + i as f64 * dx, z0 + j as f64 * dz));
            }
        }
        Self::new(nx, nz, dx, dz, x0, z0, values)
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn z(&self, j: usize) -> f64 {
        self.z0 + j as f64 * self.dz
    }

    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.values[j * self.nx + i]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// CSV with header `x,z,re,im`, one line per node, rows ordered by depth.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,z,re,im\n");
        for j in 0..self.nz {
            for i in 0..self.nx {
                let v = self.at(i, j);
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    fmt_f64(self.x(i)),
                    fmt_f64(self.z(j)),
                    fmt_f64(v.re),
                    fmt_f64(v.im)
                );
            }
        }
        out
    }

    /// Parse the format written by [`ScalarField2D::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some("x,z,re,im") => {}
            other => {
                return Err(Error::InvalidInput(format!(
                    "expected header `x,z,re,im`, found {other:?}"
                )))
            }
        }
        let mut rows = Vec::new();
        for (n, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(Error::InvalidInput(format!(
                    "line {}: expected 4 fields, found {}",
                    n + 2,
                    fields.len()
                )));
            }
            let mut parsed = [0.0; 4];
            for (slot, field) in parsed.iter_mut().zip(&fields) {
                *slot = field.parse().map_err(|_| {
                    Error::InvalidInput(format!("line {}: bad number `{field}`", n + 2))
                })?;
            }
            rows.push(parsed);
        }
        if rows.len() < 2 {
            return Err(Error::InvalidInput("too few rows for a grid".into()));
        }
        let z_first = rows[0][1];
        let nx = rows.iter().take_while(|r| r[1] == z_first).count();
        if nx < 2 || rows.len() % nx != 0 {
            return Err(Error::InvalidInput("rows do not form a rectangular grid".into()));
        }
        let nz = rows.len() / nx;
        let xs: Vec<f64> = rows[..nx].iter().map(|r| r[0]).collect();
        let zs: Vec<f64> = rows.iter().step_by(nx).map(|r| r[1]).collect();
        let dx = recover_spacing(&xs);
        let dz = recover_spacing(&zs);
        let values = rows.iter().map(|r| C64::new(r[2], r[3])).collect();
        Self::new(nx, nz, dx, dz, rows[0][0], z_first, values)
    }
}

/// The spacing `d` for which `c[0] + i·d` reproduces every coordinate
/// bitwise, searched a few ulps around the end-to-end estimate. Falls back to
/// the estimate when no candidate is exact.
fn recover_spacing(coords: &[f64]) -> f64 {
    let n = coords.len();
    if n < 2 {
        return 0.0;
    }
    let estimate = (coords[n - 1] - coords[0]) / (n - 1) as f64;
    let exact = |d: f64| {
        coords
            .iter()
            .enumerate()
            .all(|(i, &c)| coords[0] + i as f64 * d == c)
    };
    for step in 0..=64i64 {
        for sign in [1i64, -1] {
            let bits = estimate.to_bits() as i64 + sign * step;
            let candidate = f64::from_bits(bits as u64);
            if exact(candidate) {
                return candidate;
            }
        }
    }
    estimate
}

/// `K0(r/a) / (2π a²)`, the two-dimensional non-local kernel.
pub fn kernel_weight(r: f64, a_nl: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!(
            "the kernel is singular at r = 0 and undefined for r < 0, got r = {r}"
        )));
    }
    if !(a_nl > 0.0) {
        return Err(Error::Domain(format!(
            "the kernel needs a positive non-locality length, got {a_nl}"
        )));
    }
    Ok(k0_unchecked(r / a_nl) / (2.0 * PI * a_nl * a_nl))
}

/// Kernel mass inside the rectangle `[0, w] × [0, h]` with the singular point
/// at its corner, from the polar identity
/// `∫₀^R K0(r/a) r dr = a² (1 − (R/a) K1(R/a))`.
fn corner_rect_mass(w: f64, h: f64, a: f64, spec: &QuadratureSpec) -> Result<f64> {
    if w <= 0.0 || h <= 0.0 {
        return Ok(0.0);
    }
    let radial = |rho: f64| {
        if rho > 700.0 {
            1.0
        } else {
            1.0 - rho * k1_unchecked(rho)
        }
    };
    let split = (h / w).atan();
    let lower = integrate_1d(
        |t| C64::new(radial(w / (a * t.cos())), 0.0),
        0.0,
        split,
        spec,
    )?;
    let upper = integrate_1d(
        |t| C64::new(radial(h / (a * t.sin())), 0.0),
        split,
        0.5 * PI,
        spec,
    )?;
    Ok((lower.re + upper.re) / (2.0 * PI))
}

const GL3_NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
const GL3_WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];

/// Kernel mass of the rectangle `[x_lo, x_hi] × [z_lo, z_hi]` relative to a
/// receiving node at the origin.
fn rect_mass(x_lo: f64, x_hi: f64, z_lo: f64, z_hi: f64, a: f64, spec: &QuadratureSpec) -> Result<f64> {
    if x_hi <= x_lo || z_hi <= z_lo {
        return Ok(0.0);
    }
    if x_lo <= 0.0 && x_hi >= 0.0 && z_lo <= 0.0 && z_hi >= 0.0 {
        // split into four corner rectangles meeting at the singularity
        return Ok(corner_rect_mass(x_hi, z_hi, a, spec)?
            + corner_rect_mass(-x_lo, z_hi, a, spec)?
            + corner_rect_mass(x_hi, -z_lo, a, spec)?
            + corner_rect_mass(-x_lo, -z_lo, a, spec)?);
    }
    let nearest_x = if x_lo > 0.0 { x_lo } else if x_hi < 0.0 { -x_hi } else { 0.0 };
    let nearest_z = if z_lo > 0.0 { z_lo } else if z_hi < 0.0 { -z_hi } else { 0.0 };
    let nearest = nearest_x.hypot(nearest_z);
    let size = (x_hi - x_lo).max(z_hi - z_lo);
    let norm = 1.0 / (2.0 * PI * a * a);
    if nearest < 3.0 * size || nearest < 2.0 * a {
        let v = integrate_2d_rect(
            |x, z| C64::new(k0_unchecked(x.hypot(z) / a), 0.0),
            (x_lo, x_hi),
            (z_lo, z_hi),
            spec,
        )?;
        return Ok(v.re * norm);
    }
    let (cx, hx) = (0.5 * (x_lo + x_hi), 0.5 * (x_hi - x_lo));
    let (cz, hz) = (0.5 * (z_lo + z_hi), 0.5 * (z_hi - z_lo));
    let mut sum = 0.0;
    for (u, wu) in GL3_NODES.iter().zip(GL3_WEIGHTS) {
        for (w, ww) in GL3_NODES.iter().zip(GL3_WEIGHTS) {
            let r = (cx + hx * u).hypot(cz + hz * w);
            sum += wu * ww * k0_unchecked(r / a);
        }
    }
    Ok(sum * hx * hz * norm)
}

/// Cell-averaged kernel weights for source offsets `(p, q)` in grid steps.
struct Stencil {
    px: i64,
    pz: i64,
    /// Full cells, indexed `[(q + pz) * (2 px + 1) + (p + px)]`.
    full: Vec<f64>,
    /// Surface half cells `[z_s, z_s + dz/2]` for sources on the row `z = 0`,
    /// indexed `[q' * (2 px + 1) + (p + px)]` with `q' = -q ≥ 0`.
    surface: Vec<f64>,
}

impl Stencil {
    fn build(dx: f64, dz: f64, a: f64, halfplane: bool) -> Result<Self> {
        let reach = TRUNCATION_RADIUS * a;
        let px = (reach / dx).ceil() as i64;
        let pz = (reach / dz).ceil() as i64;
        let width = (2 * px + 1) as usize;
        let spec = QuadratureSpec::with_rel_tol(1e-9);
        let inside = |p: i64, q: i64| (p as f64 * dx).hypot(q as f64 * dz) <= reach;

        // Weights are even in p and q; evaluate one quadrant and mirror.
        let quadrant: Vec<(i64, i64)> = (0..=pz)
            .flat_map(|q| (0..=px).map(move |p| (p, q)))
            .filter(|&(p, q)| inside(p, q))
            .collect();
        let masses = quadrant
            .par_iter()
            .map(|&(p, q)| {
                let (x, z) = (p as f64 * dx, q as f64 * dz);
                rect_mass(x - 0.5 * dx, x + 0.5 * dx, z - 0.5 * dz, z + 0.5 * dz, a, &spec)
            })
            .collect::<Result<Vec<f64>>>()?;
        let mut full = vec![0.0; width * (2 * pz + 1) as usize];
        for (&(p, q), &w) in quadrant.iter().zip(&masses) {
            for (sp, sq) in [(p, q), (-p, q), (p, -q), (-p, -q)] {
                full[((sq + pz) as usize) * width + (sp + px) as usize] = w;
            }
        }

        let mut surface = Vec::new();
        if halfplane {
            let half: Vec<(i64, i64)> = (0..=pz)
                .flat_map(|q| (0..=px).map(move |p| (p, q)))
                .filter(|&(p, q)| inside(p, q))
                .collect();
            let masses = half
                .par_iter()
                .map(|&(p, q)| {
                    // source at depth 0, receiver q rows below: the source cell
                    // sits at relative depth -q dz and only extends downward
                    let (x, z) = (p as f64 * dx, -(q as f64) * dz);
                    rect_mass(x - 0.5 * dx, x + 0.5 * dx, z, z + 0.5 * dz, a, &spec)
                })
                .collect::<Result<Vec<f64>>>()?;
            surface = vec![0.0; width * (pz + 1) as usize];
            for (&(p, q), &w) in half.iter().zip(&masses) {
                surface[(q as usize) * width + (p + px) as usize] = w;
                surface[(q as usize) * width + (-p + px) as usize] = w;
            }
        }
        Ok(Stencil {
            px,
            pz,
            full,
            surface,
        })
    }
}

fn check_decay(f: &ScalarField2D, skip_surface_row: bool) -> Result<()> {
    let peak = f.max_abs();
    if peak == 0.0 {
        return Ok(());
    }
    let limit = 1e-6 * peak;
    for j in 0..f.nz {
        for i in 0..f.nx {
            let top = j == 0 && !skip_surface_row;
            let on_ring = top || i == 0 || i == f.nx - 1 || j == f.nz - 1;
            if on_ring && f.at(i, j).norm() >= limit {
                return Err(Error::InvalidInput(format!(
                    "field does not decay toward the grid edge: |f| = {:e} at (x, z) = ({}, {}) exceeds 1e-6 of the peak",
                    f.at(i, j).norm(),
                    f.x(i),
                    f.z(j)
                )));
            }
        }
    }
    Ok(())
}

fn convolve(f: &ScalarField2D, a_nl: f64, halfplane: bool) -> Result<ScalarField2D> {
    if !(a_nl > 0.0) {
        return Err(Error::InvalidInput(format!(
            "convolution needs a positive non-locality length, got {a_nl}"
        )));
    }
    let surface_row = halfplane && f.z0 == 0.0;
    check_decay(f, surface_row)?;
    let stencil = Stencil::build(f.dx, f.dz, a_nl, surface_row)?;
    let width = (2 * stencil.px + 1) as usize;
    let (nx, nz) = (f.nx as i64, f.nz as i64);
    // first row holding sources; rows above the surface are excluded
    let first_source_row = if halfplane {
        ((-f.z0) / f.dz - 1e-9).ceil().max(0.0) as i64
    } else {
        0
    };

    let values: Vec<C64> = (0..f.nx * f.nz)
        .into_par_iter()
        .map(|node| {
            let (i, j) = ((node % f.nx) as i64, (node / f.nx) as i64);
            let mut acc = C64::new(0.0, 0.0);
            let q_lo = (-stencil.pz).max(first_source_row - j);
            let q_hi = stencil.pz.min(nz - 1 - j);
            let p_lo = (-stencil.px).max(-i);
            let p_hi = stencil.px.min(nx - 1 - i);
            for q in q_lo..=q_hi {
                let row = (j + q) as usize;
                let src = &f.values[row * f.nx..(row + 1) * f.nx];
                let weights = if surface_row && row == 0 {
                    &stencil.surface[((-q) as usize) * width..((-q) as usize + 1) * width]
                } else {
                    &stencil.full[((q + stencil.pz) as usize) * width..((q + stencil.pz) as usize + 1) * width]
                };
                for p in p_lo..=p_hi {
                    let w = weights[(p + stencil.px) as usize];
                    if w != 0.0 {
                        acc += src[(i + p) as usize] * w;
                    }
                }
            }
            acc
        })
        .collect();

    let reach = TRUNCATION_RADIUS * a_nl;
    let width_x = (f.nx - 1) as f64 * f.dx;
    let depth_z = (f.nz - 1) as f64 * f.dz;
    let mut out = ScalarField2D::new(f.nx, f.nz, f.dx, f.dz, f.x0, f.z0, values)?;
    out.edge_effect = 2.0 * reach > width_x || 2.0 * reach > depth_z;
    Ok(out)
}

/// Convolve with the non-local kernel over the half-space `z ≥ 0`.
///
/// Sources above the surface are excluded; when the grid starts at the
/// surface, the first row contributes half cells `[0, dz/2]`. The field must
/// decay to below `1e-6` of its peak on the grid boundary (the surface row
/// itself is exempt).
pub fn convolve_halfplane(f: &ScalarField2D, a_nl: f64) -> Result<ScalarField2D> {
    convolve(f, a_nl, true)
}

/// Convolve with the non-local kernel over the whole plane covered by the
/// grid.
pub fn convolve_fullplane(f: &ScalarField2D, a_nl: f64) -> Result<ScalarField2D> {
    convolve(f, a_nl, false)
}

/// `(1 − a²∇²) f` with the five-point Laplacian, on the interior sub-grid.
pub fn apply_helmholtz(f: &ScalarField2D, a_nl: f64) -> Result<ScalarField2D> {
    if f.nx < 3 || f.nz < 3 {
        return Err(Error::InvalidInput("grid too small for the five-point stencil".into()));
    }
    if !(a_nl >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "non-locality length must be non-negative, got {a_nl}"
        )));
    }
    let (nx, nz) = (f.nx - 2, f.nz - 2);
    let (cx, cz) = (a_nl * a_nl / (f.dx * f.dx), a_nl * a_nl / (f.dz * f.dz));
    let mut values = Vec::with_capacity(nx * nz);
    for j in 1..f.nz - 1 {
        for i in 1..f.nx - 1 {
            let c = f.at(i, j);
            let lap_x = f.at(i - 1, j) + f.at(i + 1, j) - c * 2.0;
            let lap_z = f.at(i, j - 1) + f.at(i, j + 1) - c * 2.0;
            values.push(c - lap_x * cx - lap_z * cz);
        }
    }
    if nx < 4 || nz < 4 {
        return Err(Error::InvalidInput(format!(
            "interior sub-grid {nx}x{nz} is smaller than 4x4"
        )));
    }
    ScalarField2D::new(nx, nz, f.dx, f.dz, f.x0 + f.dx, f.z0 + f.dz, values)
}

/// Result of [`helmholtz_roundtrip`].
#[derive(Debug, Clone, PartialEq)]
pub struct RoundTrip {
    pub convolved: ScalarField2D,
    /// `max |(1 − a²∇²)(K * f) − f| / max |f|` over the trusted nodes.
    pub rel_linf: f64,
    /// Number of nodes at least `12a` from every edge.
    pub nodes: usize,
}

/// Convolves `f` over the plane, applies `1 − a²∇²` and compares with `f`
/// on the nodes whose truncation disk lies inside the grid.
pub fn helmholtz_roundtrip(f: &ScalarField2D, a_nl: f64) -> Result<RoundTrip> {
    let convolved = convolve_fullplane(f, a_nl)?;
    let image = apply_helmholtz(&convolved, a_nl)?;
    let margin = TRUNCATION_RADIUS * a_nl;
    let (x_lo, x_hi) = (f.x0 + margin, f.x(f.nx - 1) - margin);
    let (z_lo, z_hi) = (f.z0 + margin, f.z(f.nz - 1) - margin);
    let slack = 1e-9 * (f.dx + f.dz);
    let mut worst: f64 = 0.0;
    let mut peak: f64 = 0.0;
    let mut nodes = 0;
    for j in 0..image.nz {
        for i in 0..image.nx {
            let (x, z) = (image.x(i), image.z(j));
            if x < x_lo - slack || x > x_hi + slack || z < z_lo - slack || z > z_hi + slack {
                continue;
            }
            let original = f.at(i + 1, j + 1);
            worst = worst.max((image.at(i, j) - original).norm());
            peak = peak.max(original.norm());
            nodes += 1;
        }
    }
    if nodes == 0 {
        return Err(Error::InvalidInput(format!(
            "no node lies {margin} from every edge; enlarge the grid"
        )));
    }
    let rel_linf = if peak > 0.0 { worst / peak } else { worst };
    Ok(RoundTrip {
        convolved,
        rel_linf,
        nodes,
    })
}

/// A surface trace `Σ c_n exp(−r_n η)` riding on the carrier `exp(i χ_w χ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceTrace {
    /// `(c_n, r_n)` pairs.
    pub terms: Vec<(C64, C64)>,
    pub chi_wavenumber: f64,
}

impl SurfaceTrace {
    pub fn exponential(coeff: C64, rate: C64, chi_wavenumber: f64) -> Self {
        SurfaceTrace {
            terms: vec![(coeff, rate)],
            chi_wavenumber,
        }
    }

    pub fn constant(value: C64, chi_wavenumber: f64) -> Self {
        Self::exponential(value, C64::new(0.0, 0.0), chi_wavenumber)
    }

    pub fn eval(&self, eta: f64) -> C64 {
        self.terms.iter().map(|(c, r)| c * (-r * eta).exp()).sum()
    }

    /// `∂η` of the trace.
    pub fn derivative(&self, eta: f64) -> C64 {
        self.terms.iter().map(|(c, r)| -c * r * (-r * eta).exp()).sum()
    }

    /// The trace after `1 − ε²∇²` in dimensionless variables, where `∇²`
    /// acts on each term as `−χ_w² + r_n²`.
    pub fn helmholtz_image(&self, eps: f64) -> SurfaceTrace {
        let chi2 = self.chi_wavenumber * self.chi_wavenumber;
        SurfaceTrace {
            terms: self
                .terms
                .iter()
                .map(|&(c, r)| (c * (1.0 - eps * eps * (r * r - chi2)), r))
                .collect(),
            chi_wavenumber: self.chi_wavenumber,
        }
    }
}

/// Stretched depth beyond which the weight `e^{−t}` is below rounding.
const STRETCH_SPLIT: f64 = 64.0;

/// The slowly-varying approximation of the depth convolution,
/// `(1/2ε) ∫₀^∞ [1 − (ε²/2)(1 + |η′−η|/ε) χ_w²] g(η′) exp(−|η′−η|/ε) dη′`.
pub fn approx_trace_integral(
    trace: &SurfaceTrace,
    eps: f64,
    eta: f64,
    spec: &QuadratureSpec,
) -> Result<C64> {
    if !(eps > 0.0) || !(eta >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "trace integral needs eps > 0 and eta >= 0, got eps = {eps}, eta = {eta}"
        )));
    }
    // stretched gap t = |η′ − η|/ε puts the exponential weight on unit scale
    let chi2 = trace.chi_wavenumber * trace.chi_wavenumber;
    let weight = |t: f64| (1.0 - 0.5 * eps * eps * (1.0 + t) * chi2) * (-t).exp();
    let above = integrate_1d(|t| trace.eval(eta + eps * t) * weight(t), 0.0, f64::INFINITY, spec)?;
    let reach = eta / eps;
    let below_part = |lo: f64, hi: f64| integrate_1d(|t| trace.eval(eta - eps * t) * weight(t), lo, hi, spec);
    let below = if reach > STRETCH_SPLIT {
        below_part(0.0, STRETCH_SPLIT)? + below_part(STRETCH_SPLIT, reach)?
    } else {
        below_part(0.0, reach)?
    };
    Ok(0.5 * (below + above))
}

/// `[1 − ε∂η − (ε³/2) ∂χ² ∂η] g` at `η = 0`, with `∂χ² → −χ_w²`.
pub fn boundary_operator(trace: &SurfaceTrace, eps: f64) -> C64 {
    let chi2 = trace.chi_wavenumber * trace.chi_wavenumber;
    trace.eval(0.0) - trace.derivative(0.0) * (eps - 0.5 * eps.powi(3) * chi2)
}
