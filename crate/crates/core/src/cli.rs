//! The `mnw` command-line front end.
//!
//! Every subcommand reads a material file, computes one artifact and writes it
//! to `--out` or standard output. Output is byte-for-byte deterministic.
//!
//! ```text
//! mnw validate material.json
//! mnw speeds --material material.json
//! mnw dispersion --material material.json --mode micropolar --omega-min 4e5 --omega-max 4e6 --num 40
//! mnw residuals --material material.json --eps 0.1
//! mnw blayer --material material.json --mode elastic
//! mnw kernel-check --material material.json --out field.csv
//! ```
//!
//! Exit codes: 0 success, 1 malformed input, 2 physically infeasible request,
//! 3 numerical failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::asymptotic::{near_surface_report, reference_wavenumber};
use crate::dispersion::{micropolar_point, solve_rayleigh, sweep_with_tol};
use crate::kernel::{helmholtz_roundtrip, kernel_weight, ScalarField2D};
use crate::material::{derive_scales, validate, MaterialParams};
use crate::specfun::{integrate_2d_polar, QuadratureSpec};
use crate::wavefield::{
    blayer_integral_closed, blayer_integral_quadrature, decay_exponents_paper, ModeTag,
};
use crate::{fmt_f64, Error, Result, C64};

/// Environment variable overriding the default quadrature relative tolerance.
pub const QUAD_TOL_ENV: &str = "MNW_QUAD_TOL";

/// Depths at which `blayer` tabulates the boundary-layer integrals.
const BLAYER_ETA: [f64; 6] = [0.0, 0.1, 0.25, 0.5, 1.0, 2.0];

#[derive(Debug, Parser)]
#[command(
    name = "mnw",
    version,
    about = "Rayleigh waves in non-local micropolar half-spaces"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a material file and print OK or the violated bounds.
    Validate { path: PathBuf },
    /// Print the wave speeds, d and the cutoff frequency as CSV.
    Speeds(Common),
    /// Sweep a dispersion curve over log-spaced frequencies.
    Dispersion(DispersionArgs),
    /// Boundary-condition residual report of the near-surface mode, as JSON.
    Residuals(ResidualArgs),
    /// Boundary-layer integrals, closed form against quadrature, as CSV.
    Blayer(BlayerArgs),
    /// Kernel normalization and convolution/Helmholtz round trip on a Gaussian.
    KernelCheck(KernelArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Material JSON file.
    #[arg(long)]
    pub material: PathBuf,
    /// Write the result here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DispersionArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "elastic")]
    pub mode: ModeTag,
    /// Lowest frequency (rad/s); defaults to 1.01 ω_c, or 1 without micropolarity.
    #[arg(long)]
    pub omega_min: Option<f64>,
    /// Highest frequency (rad/s); defaults to 10 ω_c, or 1000 without micropolarity.
    #[arg(long)]
    pub omega_max: Option<f64>,
    #[arg(long, default_value_t = 50)]
    pub num: usize,
    /// Root tolerance relative to c2.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Also write a gnuplot script next to the CSV (needs --out).
    #[arg(long)]
    pub emit_plot_script: bool,
}

#[derive(Debug, Args)]
pub struct ResidualArgs {
    #[command(flatten)]
    pub common: Common,
    /// Non-locality parameter ε = a·k; defaults to the material's a times k.
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BlayerArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "elastic")]
    pub mode: ModeTag,
    /// Frequency of the state (rad/s); defaults to the reference frequency.
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[command(flatten)]
    pub common: Common,
    /// Largest accepted relative round-trip error.
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(argv) {
        Ok(config) => config,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&config, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed command.
pub fn execute(config: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match &config.command {
        Command::Validate { path } => {
            let m = MaterialParams::from_json_file(path)?;
            let outcome = validate(&m);
            if outcome.is_ok() {
                writeln!(out, "OK")?;
                Ok(())
            } else {
                for v in &outcome.violations {
                    writeln!(err, "violated: {v}")?;
                }
                Err(Error::InvalidInput(format!(
                    "{} bound(s) violated",
                    outcome.violations.len()
                )))
            }
        }
        Command::Speeds(c) => {
            let m = load(&c.material)?;
            emit(c.out.as_deref(), &speeds_csv(&m)?, out)
        }
        Command::Dispersion(a) => dispersion(a, out),
        Command::Residuals(a) => {
            let m = load(&a.common.material)?;
            let mut json = near_surface_report(&m, a.eps, true)?.to_json();
            json.push('\n');
            emit(a.common.out.as_deref(), &json, out)
        }
        Command::Blayer(a) => {
            let m = load(&a.common.material)?;
            let spec = quadrature_from_env()?;
            emit(a.common.out.as_deref(), &blayer_csv(&m, a, &spec)?, out)
        }
        Command::KernelCheck(a) => kernel_check(a, out, err),
    }
}

fn load(path: &Path) -> Result<MaterialParams> {
    let m = MaterialParams::from_json_file(path)?;
    let outcome = validate(&m);
    if !outcome.is_ok() {
        return Err(Error::InvalidInput(format!(
            "{}: material violates {}",
            path.display(),
            outcome.violations.join(", ")
        )));
    }
    Ok(m)
}

fn emit(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Default quadrature settings with the relative tolerance taken from
/// [`QUAD_TOL_ENV`] when set.
pub fn quadrature_from_env() -> Result<QuadratureSpec> {
    match std::env::var(QUAD_TOL_ENV) {
        Ok(text) => {
            let tol: f64 = text.trim().parse().map_err(|_| {
                Error::InvalidInput(format!("{QUAD_TOL_ENV} must be a number, got {text:?}"))
            })?;
            let spec = QuadratureSpec::with_rel_tol(tol);
            spec.check()?;
            Ok(spec)
        }
        Err(_) => Ok(QuadratureSpec::default()),
    }
}

/// `c1,c2,c3,c4,d,omega_cutoff` header and one line of values.
pub fn speeds_csv(m: &MaterialParams) -> Result<String> {
    let sc = derive_scales(m)?;
    let cells = [sc.c1, sc.c2, sc.c3, sc.c4, sc.d, sc.omega_cutoff].map(fmt_f64);
    Ok(format!("c1,c2,c3,c4,d,omega_cutoff\n{}\n", cells.join(",")))
}

fn dispersion(a: &DispersionArgs, out: &mut dyn Write) -> Result<()> {
    let m = load(&a.common.material)?;
    let sc = derive_scales(&m)?;
    let (lo_default, hi_default) = if sc.omega_cutoff > 0.0 {
        (1.01 * sc.omega_cutoff, 10.0 * sc.omega_cutoff)
    } else {
        (1.0, 1000.0)
    };
    let lo = a.omega_min.unwrap_or(lo_default);
    let hi = a.omega_max.unwrap_or(hi_default);
    if !(lo < hi) {
        return Err(Error::InvalidInput(format!(
            "--omega-min must be below --omega-max, got {lo} and {hi}"
        )));
    }
    if a.emit_plot_script && a.common.out.is_none() {
        return Err(Error::InvalidInput("--emit-plot-script needs --out".into()));
    }
    let curve = sweep_with_tol(&m, lo, hi, a.num, a.mode, a.tol)?;
    emit(a.common.out.as_deref(), &curve.to_csv(), out)?;
    if let (true, Some(path)) = (a.emit_plot_script, &a.common.out) {
        fs::write(path.with_extension("gp"), plot_script(path, a.mode))?;
    }
    Ok(())
}

/// A gnuplot script plotting phase velocity against frequency from the CSV
/// at `csv`, referenced by file name.
pub fn plot_script(csv: &Path, mode: ModeTag) -> String {
    let name = csv
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let stem = csv
        .file_stem()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "curve".into());
    format!(
        "# phase velocity of the {mode} mode\n\
         set datafile separator ','\n\
         set terminal pngcairo size 800,600\n\
         set output '{stem}.png'\n\
         set logscale x\n\
         set xlabel 'omega (rad/s)'\n\
         set ylabel 'v (m/s)'\n\
         set key top right\n\
         plot '{name}' every ::1 using 1:3 with linespoints title '{mode}'\n"
    )
}

/// Closed form and quadrature of the boundary-layer integrals at the state
/// selected by `a`.
fn blayer_csv(m: &MaterialParams, a: &BlayerArgs, spec: &QuadratureSpec) -> Result<String> {
    let sc = derive_scales(m)?;
    let omega = match a.omega {
        Some(w) => w,
        None => {
            let k = reference_wavenumber(m)?;
            k * solve_rayleigh(m, k * sc.c2, 1e-13)?.v
        }
    };
    let point = match a.mode {
        ModeTag::Elastic => solve_rayleigh(m, omega, 1e-13)?,
        ModeTag::Micropolar => micropolar_point(m, omega)?,
    };
    let eps = a.eps.unwrap_or(m.a_nl * point.k);
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!(
            "the boundary-layer integrals need eps > 0, got {eps}; pass --eps"
        )));
    }
    let de = decay_exponents_paper(m, &point.mode_params(m)?.with_eps(eps))?;
    let branches = if de.r3.is_some() { 3 } else { 2 };
    let mut text = String::from("i,eta,closed_re,closed_im,quad_re,quad_im,rel_err\n");
    for i in 1..=branches {
        for eta in BLAYER_ETA {
            let closed = blayer_integral_closed(i, &de, eps, eta)?;
            let quad = blayer_integral_quadrature(i, &de, eps, eta, spec)?;
            let rel = (quad - closed).norm() / closed.norm().max(f64::MIN_POSITIVE);
            let _ = writeln!(
                text,
                "{i},{},{},{},{},{},{}",
                fmt_f64(eta),
                fmt_f64(closed.re),
                fmt_f64(closed.im),
                fmt_f64(quad.re),
                fmt_f64(quad.im),
                fmt_f64(rel)
            );
        }
    }
    Ok(text)
}

/// The Gaussian `exp(−r²/(5a)²)` sampled with spacing `a/5` on `[−19a, 19a]²`.
pub fn kernel_test_field(a_nl: f64) -> Result<ScalarField2D> {
    let h = 0.2 * a_nl;
    let n = 191;
    let origin = -19.0 * a_nl;
    let width = 5.0 * a_nl;
    ScalarField2D::from_fn(n, n, h, h, origin, origin, |x, z| {
        C64::new((-(x * x + z * z) / (width * width)).exp(), 0.0)
    })
}

fn kernel_check(a: &KernelArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let m = load(&a.common.material)?;
    let a_nl = m.a_nl;
    if !(a_nl > 0.0) {
        return Err(Error::InvalidInput("kernel-check needs a material with a > 0".into()));
    }
    let spec = quadrature_from_env()?;
    let mass = integrate_2d_polar(
        |r, _| C64::new(kernel_weight(r, a_nl).unwrap_or(0.0), 0.0),
        40.0 * a_nl,
        &spec,
    )?
    .re;
    let trip = helmholtz_roundtrip(&kernel_test_field(a_nl)?, a_nl)?;
    emit(a.common.out.as_deref(), &trip.convolved.to_csv(), out)?;
    writeln!(
        err,
        "kernel mass within 40a: {}\nround-trip relative max error: {} on {} nodes",
        fmt_f64(mass),
        fmt_f64(trip.rel_linf),
        trip.nodes
    )?;
    if (mass - 1.0).abs() > 1e-4 || !(trip.rel_linf < a.tol) {
        return Err(Error::SelfCheck(format!(
            "kernel mass {mass}, round-trip error {} (limit {})",
            trip.rel_linf, a.tol
        )));
    }
    Ok(())
}
