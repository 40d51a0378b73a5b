//! Acceptance report: one PASS/FAIL line per criterion, tolerances pinned.
//!
//! Runs without the libtest harness so every line reaches the console; the
//! process fails when any criterion fails. Measured slopes are archived as
//! JSON under the cargo target temp directory.

use std::f64::consts::SQRT_2;
use std::process::{Command, ExitCode};

use mnw::asymptotic::{
    bc_residual_classical, bc_residual_refined, equivalence_residual_elastic,
    equivalence_residual_micropolar, loglog_slope, reference_wavenumber, slope_study, ModeSolution,
    SLOPE_EPS,
};
use mnw::dispersion::{micropolar_velocity, solve_rayleigh};
use mnw::kernel::{
    approx_trace_integral, boundary_operator, helmholtz_roundtrip, kernel_weight, ScalarField2D,
    SurfaceTrace,
};
use mnw::material::samples::{classical, micropolar};
use mnw::specfun::{integrate_2d_polar, QuadratureSpec};
use mnw::wavefield::{
    blayer_integral_closed, blayer_integral_quadrature, decay_exponents_paper,
    exact_shear_exponents, pde_residual, Amplitudes, ModeParams, ModeTag,
};
use mnw::{Complex64, MaterialParams};

type C64 = Complex64;

struct Report {
    failed: usize,
}

impl Report {
    fn record(&mut self, id: u32, name: &str, ok: bool, detail: String) {
        let verdict = if ok { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {verdict}  {name}: {detail}");
        if !ok {
            self.failed += 1;
        }
    }
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Plain bisection on the classical Rayleigh function `4 r1 r2 − (1 + r2²)²`
/// in `x = v/c2` for a Poisson solid (`c1² = 3 c2²`).
fn classical_rayleigh_oracle() -> f64 {
    let f = |x: f64| {
        let r1 = (1.0 - x * x / 3.0).sqrt();
        let r2 = (1.0 - x * x).sqrt();
        4.0 * r1 * r2 - (1.0 + r2 * r2).powi(2)
    };
    let (mut lo, mut hi) = (0.5, 0.999_999);
    assert!(f(lo) > 0.0 && f(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn criterion_1(r: &mut Report) {
    let m = classical();
    let c2 = m.scales().unwrap().c2;
    let v = solve_rayleigh(&m, 1.0, 1e-12).unwrap().v;
    let oracle = classical_rayleigh_oracle();
    let ratio = v / c2;
    let ok = (ratio - 0.9194).abs() <= 1e-3 && (ratio - oracle).abs() <= 1e-6;
    r.record(
        1,
        "classical Rayleigh limit",
        ok,
        format!("v/c2 = {ratio:.12}, oracle {oracle:.12}, target 0.9194 +- 1e-3"),
    );
}

fn criterion_2(r: &mut Report) {
    let a = 0.37;
    let mass = integrate_2d_polar(
        |rho, _| c(kernel_weight(rho, a).unwrap()),
        40.0 * a,
        &QuadratureSpec::with_rel_tol(1e-9),
    )
    .unwrap()
    .re;
    r.record(
        2,
        "kernel normalization",
        (mass - 1.0).abs() <= 1e-4,
        format!("mass within 40a = {mass:.12}, tolerance 1e-4"),
    );
}

fn criterion_3(r: &mut Report) {
    // a = 1, spacing 0.2, Gaussian of width 5 on [-19, 19]²
    let (a, h, width) = (1.0, 0.2, 5.0);
    let f = ScalarField2D::from_fn(191, 191, h, h, -19.0, -19.0, |x, z| {
        c((-(x * x + z * z) / (width * width)).exp())
    })
    .unwrap();
    let trip = helmholtz_roundtrip(&f, a).unwrap();
    r.record(
        3,
        "Green's-function round trip",
        trip.rel_linf < 1e-3,
        format!(
            "relative max error {:.3e} on {} nodes, tolerance 1e-3",
            trip.rel_linf, trip.nodes
        ),
    );
}

/// Micropolar state with every exponent real and decaying.
fn generic_state(m: &MaterialParams) -> ModeParams {
    let sc = m.scales().unwrap();
    ModeParams::from_velocity(m, 3.0 * sc.omega_cutoff, 0.5 * sc.c2, ModeTag::Elastic).unwrap()
}

fn criterion_4(r: &mut Report) {
    let m = micropolar();
    let base = generic_state(&m);
    let spec = QuadratureSpec::with_rel_tol(1e-13);
    let mut worst: f64 = f64::INFINITY;
    for i in 1..=3 {
        for eta in [0.0, 0.5, 2.0] {
            let errs: Vec<f64> = SLOPE_EPS
                .iter()
                .map(|&eps| {
                    let de = decay_exponents_paper(&m, &base.with_eps(eps)).unwrap();
                    let closed = blayer_integral_closed(i, &de, eps, eta).unwrap();
                    let quad = blayer_integral_quadrature(i, &de, eps, eta, &spec).unwrap();
                    (quad - closed).norm() / closed.norm()
                })
                .collect();
            worst = worst.min(loglog_slope(&SLOPE_EPS, &errs));
        }
    }
    r.record(
        4,
        "boundary-layer integral convergence",
        worst >= 2.0,
        format!("smallest slope over i, eta = {worst:.3}, required >= 2"),
    );
}

fn criterion_5(r: &mut Report) {
    let spec = QuadratureSpec::with_rel_tol(1e-13);
    let mut worst: f64 = f64::INFINITY;
    for rate in [0.3, 0.8] {
        let trace = SurfaceTrace::exponential(c(1.0), c(rate), 1.0);
        let devs: Vec<f64> = SLOPE_EPS
            .iter()
            .map(|&eps| {
                let image = trace.helmholtz_image(eps);
                let layer = trace.eval(0.0) - approx_trace_integral(&image, eps, 0.0, &spec).unwrap();
                (0.5 * boundary_operator(&trace, eps) - layer).norm()
            })
            .collect();
        worst = worst.min(loglog_slope(&SLOPE_EPS, &devs));
    }
    r.record(
        5,
        "boundary operator identity",
        worst >= 3.0,
        format!("smallest deviation slope = {worst:.3}, required >= 3"),
    );
}

fn criterion_6(r: &mut Report) {
    let m = micropolar();
    let sc = m.scales().unwrap();
    let point = solve_rayleigh(&m, 1.0, 1e-13).unwrap();
    let bracket = equivalence_residual_elastic(&m, &point).unwrap().bracket.norm();

    let omega = 2.0 * sc.omega_cutoff;
    let v = micropolar_velocity(&m, omega).unwrap();
    let k = omega / v;
    let eq21 = equivalence_residual_micropolar(&m, v, k).unwrap().norm();

    // the bracket of the micropolar residual is the secular function, so
    // recompute it here from the speeds alone
    let mut worst_rel: f64 = 0.0;
    let mut state = 0x5eed_u64;
    for _ in 0..20 {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let v = sc.c2 * (0.01 + 0.98 * (state >> 11) as f64 / (1u64 << 53) as f64);
        let r10 = (1.0 - (v / sc.c1).powi(2)).sqrt();
        let r20 = (1.0 - (v / sc.c2).powi(2)).sqrt();
        let b = r20 * r20 + sc.d;
        let oracle = 8.0 * ((1.0 + sc.d).powi(2) * r10 * r20 - b * b) / b;
        let got = equivalence_residual_micropolar(&m, v, 2.0).unwrap().re;
        worst_rel = worst_rel.max((got - oracle).abs() / oracle.abs());
    }
    let ok = bracket > 1e-3 && eq21 > 1e-6 * k.powi(3) && worst_rel <= 1e-12;
    r.record(
        6,
        "failure of equivalence",
        ok,
        format!(
            "|elastic bracket| = {bracket:.4e} (> 1e-3), |micropolar residual|/k^3 = {:.4e} (> 1e-6), identity rel err {worst_rel:.2e} (<= 1e-12)",
            eq21 / k.powi(3)
        ),
    );
}

fn criterion_7(r: &mut Report) {
    let m = micropolar();
    let sc = m.scales().unwrap();
    let wc = sc.omega_cutoff;
    let rejects = [0.5 * wc, wc].iter().all(|&w| micropolar_velocity(&m, w).is_err());
    let v = micropolar_velocity(&m, SQRT_2 * wc).unwrap();
    let rel = (v - SQRT_2 * sc.c4).abs() / (SQRT_2 * sc.c4);
    let grid: Vec<f64> = (0..50)
        .map(|n| micropolar_velocity(&m, wc * (1.001 + 0.2 * n as f64)).unwrap())
        .collect();
    let decreasing = grid.windows(2).all(|w| w[1] < w[0]) && grid.iter().all(|&v| v > sc.c4);
    r.record(
        7,
        "micropolar cutoff",
        rejects && rel <= 1e-12 && decreasing,
        format!(
            "rejects omega <= omega_c: {rejects}, v(sqrt2 omega_c) rel err {rel:.2e} (<= 1e-12), decreasing to c4: {decreasing}"
        ),
    );
}

fn criterion_8(r: &mut Report) -> String {
    // a_nl = 0: refined and classical from the same evaluation path
    let m0 = micropolar().with_nonlocality(0.0);
    let point = solve_rayleigh(&m0, 1.0, 1e-13).unwrap();
    let sol = ModeSolution::from_point(&m0, &point, 0.0).unwrap();
    let (refined, classic) = (bc_residual_refined(&sol, 0.0), bc_residual_classical(&sol));
    let bitwise = refined.iter().zip(&classic).all(|(a, b)| {
        a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits()
    });

    let m = micropolar();
    let k = reference_wavenumber(&m).unwrap();
    let study = slope_study(&m, k, &SLOPE_EPS).unwrap();
    let ok = bitwise && study.classical_slope >= 0.9 && study.refined_slope >= 1.8;
    r.record(
        8,
        "refined boundary conditions",
        ok,
        format!(
            "bitwise reduction: {bitwise}; classical slope {:.4} (>= 0.9), refined slope {:.4} (>= 1.8) on the exact near-surface mode at k = {k:.6}",
            study.classical_slope, study.refined_slope
        ),
    );
    serde_json::to_string_pretty(&study).unwrap()
}

fn criterion_9(r: &mut Report) {
    let m = micropolar();
    let mp = generic_state(&m).with_eps(0.05);
    let de = decay_exponents_paper(&m, &mp).unwrap();
    let mut worst: f64 = 0.0;
    for amp in [
        Amplitudes::new(c(1.0), c(0.0), c(0.0)),
        Amplitudes::new(c(0.0), c(1.0), c(0.0)),
    ] {
        let res = pde_residual(&amp, &de, &mp, &m).unwrap().residuals;
        worst = worst.max(res[0].norm()).max(res[1].norm());
    }

    // third branch against the exact coupled root as kappa shrinks, at fixed
    // omega, v and eps
    let kappas = [0.15e9, 0.075e9, 0.0375e9];
    let devs: Vec<f64> = kappas
        .iter()
        .map(|&kappa| {
            let mk = MaterialParams { kappa, ..m };
            let de = decay_exponents_paper(&mk, &mp).unwrap();
            let exact = exact_shear_exponents(&mk, &mp).unwrap().micro.delta;
            let r3 = de.r3.unwrap();
            (r3 * r3 - exact * exact).norm()
        })
        .collect();
    let slope = loglog_slope(&kappas, &devs);
    r.record(
        9,
        "equation-of-motion certificate",
        worst <= 1e-12 && slope >= 1.0 - 1e-3,
        format!(
            "P/Q branch residual {worst:.2e} (<= 1e-12); third-branch deviation slope in kappa {slope:.4} (>= 1)"
        ),
    );
}

fn criterion_10(r: &mut Report) {
    let bin = env!("CARGO_BIN_EXE_mnw");
    let root = env!("CARGO_MANIFEST_DIR");
    let material = format!("{root}/data/sample_material.json");
    let cases: [(&str, Vec<&str>); 4] = [
        ("speeds.csv", vec!["speeds"]),
        ("dispersion_elastic.csv", vec!["dispersion", "--num", "12"]),
        ("dispersion_micropolar.csv", vec!["dispersion", "--mode", "micropolar", "--num", "12"]),
        ("residuals.json", vec!["residuals"]),
    ];
    let mut mismatches = Vec::new();
    for (golden, args) in &cases {
        let run = || {
            Command::new(bin)
                .args(args)
                .args(["--material", &material])
                .output()
                .unwrap()
        };
        let (first, second) = (run(), run());
        let expected = std::fs::read(format!("{root}/tests/golden/{golden}")).unwrap_or_default();
        if !first.status.success() || first.stdout != second.stdout || first.stdout != expected {
            mismatches.push(*golden);
        }
    }
    r.record(
        10,
        "CLI determinism",
        mismatches.is_empty(),
        if mismatches.is_empty() {
            format!("{} golden files byte-identical over two runs", cases.len())
        } else {
            format!("mismatch in {mismatches:?}")
        },
    );
}

fn main() -> ExitCode {
    let mut report = Report { failed: 0 };
    println!("acceptance report");
    criterion_1(&mut report);
    criterion_2(&mut report);
    criterion_3(&mut report);
    criterion_4(&mut report);
    criterion_5(&mut report);
    criterion_6(&mut report);
    criterion_7(&mut report);
    let slopes = criterion_8(&mut report);
    criterion_9(&mut report);
    criterion_10(&mut report);

    let archive = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance_slopes.json");
    match std::fs::write(&archive, slopes + "\n") {
        Ok(()) => println!("slope study archived to {}", archive.display()),
        Err(e) => println!("could not archive the slope study: {e}"),
    }
    println!("{} of 10 criteria passed", 10 - report.failed);
    if report.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
