use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// 15-point Kronrod abscissae on [-1, 1] (non-negative half, descending) and
// weights; the embedded 7-point Gauss rule uses the odd-indexed nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Which endpoints carry an integrable singularity of the `1/√` kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Singular {
    #[default]
    None,
    Lower,
    Upper,
    Both,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Endpoints treated with the substitution `x = a + u²` (or `x = b − u²`).
    pub singular: Singular,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { abs_tol: 1e-10, rel_tol: 0.0, max_subdivisions: 2000, singular: Singular::None }
    }
}

impl QuadOptions {
    pub fn abs(tol: f64) -> Self {
        QuadOptions { abs_tol: tol, ..Default::default() }
    }

    pub fn with_singular(mut self, singular: Singular) -> Self {
        self.singular = singular;
        self
    }

    pub fn with_rel(mut self, rel: f64) -> Self {
        self.rel_tol = rel;
        self
    }

    pub fn with_max_subdivisions(mut self, n: usize) -> Self {
        self.max_subdivisions = n;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = resk * 0.5;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let result = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (result, err)
}

fn globally_adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult> {
    let (v, e) = kronrod15(f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value: v, error: e });
    let mut total = v;
    let mut total_err = e;
    let mut evaluations = 15;
    let mut splits = 0;
    loop {
        let target = opts.abs_tol.max(opts.rel_tol * total.abs());
        if total_err <= target {
            break;
        }
        if splits >= opts.max_subdivisions {
            return Err(Error::Accuracy { estimate: total, error_bound: total_err });
        }
        let worst = heap.pop().expect("heap never empties");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // interval exhausted at double precision; accept what we have
            heap.push(worst);
            if total_err <= 10.0 * target {
                break;
            }
            return Err(Error::Accuracy { estimate: total, error_bound: total_err });
        }
        let (v1, e1) = kronrod15(f, worst.a, mid);
        let (v2, e2) = kronrod15(f, mid, worst.b);
        evaluations += 30;
        splits += 1;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
        // refresh the running error sum periodically against drift
        if splits % 64 == 0 {
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let error: f64 = heap.iter().map(|s| s.error).sum();
    if !value.is_finite() {
        return Err(Error::Accuracy { estimate: value, error_bound: f64::INFINITY });
    }
    Ok(QuadResult { value, error, evaluations })
}

/// Adaptive Gauss–Kronrod (7/15) integration of `f` over `[a, b]` with
/// optional square-root substitution at singular endpoints.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidInput(format!("integration limits must be finite: [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0, evaluations: 0 });
    }
    if a > b {
        return Err(Error::InvalidInput(format!("integration limits out of order: [{a}, {b}]")));
    }
    match opts.singular {
        Singular::Both => {
            let mid = 0.5 * (a + b);
            let half = QuadOptions { abs_tol: 0.5 * opts.abs_tol, ..*opts };
            let lo = one_sided(&f, a, mid, &half, Singular::Lower)?;
            let hi = one_sided(&f, mid, b, &half, Singular::Upper)?;
            Ok(QuadResult {
                value: lo.value + hi.value,
                error: lo.error + hi.error,
                evaluations: lo.evaluations + hi.evaluations,
            })
        }
        side => one_sided(&f, a, b, opts, side),
    }
}

fn one_sided<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, opts: &QuadOptions, side: Singular) -> Result<QuadResult> {
    match side {
        Singular::Lower => {
            // x = a + u², dx = 2u du
            let g = |u: f64| 2.0 * u * f(a + u * u);
            globally_adaptive(&g, 0.0, (b - a).sqrt(), opts)
        }
        Singular::Upper => {
            let g = |u: f64| 2.0 * u * f(b - u * u);
            globally_adaptive(&g, 0.0, (b - a).sqrt(), opts)
        }
        _ => globally_adaptive(f, a, b, opts),
    }
}

/// `∫ₐᵇ f` to absolute tolerance `tol`.
pub fn adaptive_quad<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    integrate(f, a, b, &QuadOptions::abs(tol)).map(|r| r.value)
}
