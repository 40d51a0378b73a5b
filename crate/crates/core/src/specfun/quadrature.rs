//! Globally adaptive Gauss–Kronrod quadrature for complex-valued integrands.
//!
//! Each panel is integrated with the 7-point Gauss / 15-point Kronrod pair.
//! The panel with the largest error estimate is bisected until the summed
//! estimate satisfies `max(abs_tol, rel_tol·|I|)`. Semi-infinite ranges are
//! mapped onto `(0, 1]` by `t = lo − ln u`, which suits integrands that decay
//! exponentially.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::{Error, Result, C64};

/// Tolerances and work limit of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    /// Default spec with a different relative tolerance.
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        QuadratureSpec {
            rel_tol,
            ..Self::default()
        }
    }

    pub fn check(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidInput(format!(
                "quadrature rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        if !(self.abs_tol >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "quadrature abs_tol must be non-negative, got {}",
                self.abs_tol
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidInput(
                "quadrature max_subdivisions must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

// Kronrod abscissae on [0, 1] of the 15-point rule; odd indices are the
// 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

struct Panel {
    lo: f64,
    hi: f64,
    value: C64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    // Largest error first; ties broken by position so the order is total
    // and the refinement sequence is reproducible.
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}

fn gauss_kronrod<F: Fn(f64) -> C64>(f: &F, lo: f64, hi: f64) -> Panel {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut resabs = WGK[7] * fc.norm();
    let mut values = [(C64::new(0.0, 0.0), C64::new(0.0, 0.0)); 7];
    for (j, node) in XGK.iter().take(7).enumerate() {
        let dx = half * node;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        values[j] = (f1, f2);
        kronrod += (f1 + f2) * WGK[j];
        resabs += WGK[j] * (f1.norm() + f2.norm());
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = kronrod * 0.5;
    let mut resasc = WGK[7] * (fc - mean).norm();
    for (j, (f1, f2)) in values.iter().enumerate() {
        resasc += WGK[j] * ((f1 - mean).norm() + (f2 - mean).norm());
    }
    let scale = half.abs();
    let value = kronrod * half;
    let resabs = resabs * scale;
    let resasc = resasc * scale;
    let mut error = ((kronrod - gauss) * half).norm();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    if !value.re.is_finite() || !value.im.is_finite() {
        error = f64::INFINITY;
    }
    Panel {
        lo,
        hi,
        value,
        error,
    }
}

fn adaptive<F: Fn(f64) -> C64>(f: &F, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<C64> {
    spec.check()?;
    if lo == hi {
        return Ok(C64::new(0.0, 0.0));
    }
    let mut heap = BinaryHeap::new();
    let first = gauss_kronrod(f, lo, hi);
    let mut total = first.value;
    let mut total_err = first.error;
    heap.push(first);
    let mut panels = 1usize;
    loop {
        let target = spec.abs_tol.max(spec.rel_tol * total.norm());
        if total_err <= target {
            break;
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = 0.5 * (worst.lo + worst.hi);
        let too_narrow = (worst.hi - worst.lo).abs() <= 4.0 * f64::EPSILON * mid.abs().max(f64::MIN_POSITIVE)
            || mid == worst.lo
            || mid == worst.hi;
        if panels >= spec.max_subdivisions || too_narrow || !worst.error.is_finite() {
            heap.push(worst);
            let (estimate, error_bound) = resum(&heap);
            return Err(Error::Convergence {
                estimate,
                error_bound,
                subdivisions: panels,
            });
        }
        let left = gauss_kronrod(f, worst.lo, mid);
        let right = gauss_kronrod(f, mid, worst.hi);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        panels += 1;
        // Running sums drift after many updates; resum periodically.
        if panels % 64 == 0 {
            let (t, e) = resum(&heap);
            total = t;
            total_err = e;
        }
    }
    Ok(resum(&heap).0)
}

/// Sum in interval order so the result does not depend on heap layout.
fn resum(heap: &BinaryHeap<Panel>) -> (C64, f64) {
    let mut panels: Vec<&Panel> = heap.iter().collect();
    panels.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    panels.iter().fold((C64::new(0.0, 0.0), 0.0), |(v, e), p| {
        (v + p.value, e + p.error)
    })
}

/// Integrate `f` over `(lo, hi)`. `hi` may be `f64::INFINITY`.
pub fn integrate_1d<F: Fn(f64) -> C64>(
    f: F,
    lo: f64,
    hi: f64,
    spec: &QuadratureSpec,
) -> Result<C64> {
    if lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || lo == f64::NEG_INFINITY {
        return Err(Error::InvalidInput(format!(
            "unsupported integration range ({lo}, {hi})"
        )));
    }
    if hi == f64::INFINITY {
        integrate_semi_infinite(f, lo, spec)
    } else {
        adaptive(&f, lo, hi, spec)
    }
}

/// Integrate `f` over `(lo, ∞)` through the substitution `t = lo − ln u`.
pub fn integrate_semi_infinite<F: Fn(f64) -> C64>(
    f: F,
    lo: f64,
    spec: &QuadratureSpec,
) -> Result<C64> {
    let mapped = |u: f64| {
        if u <= 0.0 {
            return C64::new(0.0, 0.0);
        }
        let value = f(lo - u.ln());
        if value == C64::new(0.0, 0.0) {
            value
        } else {
            value / u
        }
    };
    adaptive(&mapped, 0.0, 1.0, spec)
}

/// `∫₀^{2π} ∫₀^{r_max} g(r, θ) r dr dθ` by nested adaptive quadrature.
pub fn integrate_2d_polar<G: Fn(f64, f64) -> C64>(
    g: G,
    r_max: f64,
    spec: &QuadratureSpec,
) -> Result<C64> {
    if !(r_max > 0.0) || !r_max.is_finite() {
        return Err(Error::InvalidInput(format!(
            "polar radius must be positive and finite, got {r_max}"
        )));
    }
    integrate_2d_rect(|theta, r| g(r, theta) * r, (0.0, 2.0 * PI), (0.0, r_max), spec)
}

/// `∫∫ f(x, y) dy dx` over a rectangle, inner integral in `y`.
///
/// The inner integrals use a tolerance ten times tighter than `spec`, so the
/// outer error estimate dominates.
pub fn integrate_2d_rect<G: Fn(f64, f64) -> C64>(
    f: G,
    x: (f64, f64),
    y: (f64, f64),
    spec: &QuadratureSpec,
) -> Result<C64> {
    let inner_spec = QuadratureSpec {
        rel_tol: spec.rel_tol * 0.1,
        abs_tol: spec.abs_tol * 0.1,
        max_subdivisions: spec.max_subdivisions,
    };
    // A failed inner integral poisons the outer estimate through NaN; the
    // first failure is kept and reported.
    let failure = std::cell::RefCell::new(None);
    let outer = adaptive(
        &|xv: f64| match adaptive(&|yv: f64| f(xv, yv), y.0, y.1, &inner_spec) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                C64::new(f64::NAN, f64::NAN)
            }
        },
        x.0,
        x.1,
        spec,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    outer
}
