//! Closed-form and quadrature-backed densities over Haar-random pure states.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::channels::ChannelKind;
use crate::entanglement::max_concurrence;
use crate::error::{Error, Result};
use crate::smallmat::{elliptic_k_complement, integrate, QuadOptions, Singular};

/// Largest ESD time under two depolarizing channels, `1 − 1/√3`.
pub fn depolarizing_esd_limit() -> f64 {
    1.0 - 1.0 / 3f64.sqrt()
}

/// Weight of the asymptotically decaying class under amplitude damping.
pub const AD_ASYMPTOTIC_WEIGHT: f64 = (2.0 + PI) / 8.0;

/// Time at which the phase-damping ESD density has its logarithmic spike,
/// `2 − √2`.
pub fn phase_damping_spike() -> f64 {
    2.0 - std::f64::consts::SQRT_2
}

/// Density of the initial concurrence, `3C√(1−C²)`.
pub fn p_c0(c: f64) -> f64 {
    if !(0.0..=1.0).contains(&c) {
        return 0.0;
    }
    3.0 * c * (1.0 - c * c).sqrt()
}

/// Value of the ESD-time density at one point: the continuous part and the
/// weight of the point mass at `q_S = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EsdDensity {
    pub continuous: f64,
    pub delta_at_one: f64,
}

/// Support of the ESD-time density for each channel.
pub fn esd_domain(kind: ChannelKind) -> (f64, f64) {
    match kind {
        ChannelKind::Depolarizing => (0.0, depolarizing_esd_limit()),
        ChannelKind::AmplitudeDamping | ChannelKind::PhaseDamping => (0.0, 1.0),
    }
}

fn check_esd_arg(kind: ChannelKind, q: f64) -> Result<()> {
    let (lo, hi) = esd_domain(kind);
    let ok = match kind {
        ChannelKind::PhaseDamping => q >= lo && q < hi,
        _ => q >= lo && q <= hi,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Domain(format!("q_S = {q} outside the {kind} domain [{lo}, {hi}]")))
    }
}

/// ESD-time density `p(q_S)` over Haar pure states.
pub fn p_qs(kind: ChannelKind, q: f64) -> Result<EsdDensity> {
    check_esd_arg(kind, q)?;
    let continuous = match kind {
        ChannelKind::Depolarizing => p_qs_depolarizing(q),
        ChannelKind::AmplitudeDamping => p_qs_amplitude_damping(q),
        ChannelKind::PhaseDamping => p_qs_phase_damping(q)?,
    };
    let delta_at_one = if kind == ChannelKind::AmplitudeDamping { AD_ASYMPTOTIC_WEIGHT } else { 0.0 };
    Ok(EsdDensity { continuous, delta_at_one })
}

fn p_qs_depolarizing(q: f64) -> f64 {
    let a = q * q - 2.0 * q + 2.0;
    let b = (3.0 * q * q - 6.0 * q + 2.0).max(0.0);
    3.0 * q * (2.0 - q) * (a * b).sqrt() / (4.0 * (1.0 - q).powi(7))
}

fn p_qs_amplitude_damping(q: f64) -> f64 {
    if q < 0.1 {
        // Σ (−1)^k (2k+2)(2k+4)/(2(2k+3)) q^{2k+1}; the closed form cancels
        // two 1/(2q) terms here
        let q2 = q * q;
        let mut term_power = q;
        let mut sum = 0.0;
        for k in 0..12 {
            let n = 2.0 * k as f64 + 3.0;
            let coef = (n - 1.0) * (n + 1.0) / (2.0 * n);
            let signed = if k % 2 == 0 { coef } else { -coef };
            sum += signed * term_power;
            term_power *= q2;
        }
        return sum;
    }
    let qq = 1.0 + q * q;
    (q * q - 1.0) / (2.0 * q * qq * qq) + q.atan() / (2.0 * q * q)
}

/// Marginal density of `t = r/s` over Haar states, `48(1−t²)·G(t)` with
/// `G(t) = ∫₀^{1/2} s³ K(m)/√(1−4s²t²) ds` and `m = (1−4s²)/(1−4s²t²)`.
fn ratio_marginal(t: f64) -> Result<f64> {
    if t <= 0.0 {
        return ratio_marginal_at(0.0);
    }
    if t >= 1.0 {
        return Ok(0.0);
    }
    ratio_marginal_at(t)
}

fn ratio_marginal_at(t: f64) -> Result<f64> {
    let one_minus_t2 = 1.0 - t * t;
    let integrand = |s: f64| {
        if s <= 0.0 {
            return 0.0;
        }
        let denom = 1.0 - 4.0 * s * s * t * t;
        let mc = 4.0 * s * s * one_minus_t2 / denom;
        s * s * s * elliptic_k_complement(mc).unwrap_or(f64::INFINITY) / denom.sqrt()
    };
    let opts = QuadOptions::abs(1e-13).with_rel(1e-11).with_singular(Singular::Upper);
    let g = integrate(integrand, 0.0, 0.5, &opts)?.value;
    Ok(48.0 * one_minus_t2 * g)
}

fn pd_beta(q: f64) -> (f64, f64) {
    let u = 1.0 - q;
    (u, (1.0 - u * u) / u)
}

/// Range of `t` on which the phase-damping ESD condition is undecided at
/// time `q`, as `(t_lo, t_hi)`.
fn pd_t_window(beta: f64) -> (f64, f64) {
    let b2 = beta * beta;
    let lo2 = (1.0 - 4.0 / b2).max(0.0);
    let hi2 = b2 / (4.0 + b2);
    (lo2.sqrt(), hi2.sqrt())
}

fn p_qs_phase_damping(q: f64) -> Result<f64> {
    if q <= 0.0 {
        return Ok(0.0);
    }
    let (u, beta) = pd_beta(q);
    let b2 = beta * beta;
    let table = ratio_table()?;
    // In x = t² the window is (max(0, a), b) and the square root in the
    // denominator is β√(β²+4)·√((x−a)(b−x)). Trigonometric substitutions
    // absorb the endpoint singularities.
    let a = 1.0 - 4.0 / b2;
    let b = b2 / (4.0 + b2);
    let weight = |x: f64| (1.0 - x) * ratio_interp(table, x.sqrt());
    let opts = QuadOptions::abs(1e-11).with_rel(1e-9);
    let j = if a.abs() < 0.25 * b {
        near_spike_integral(a, b, &weight, &opts)?
    } else {
        window_integral(a, b, &weight, &opts)?
    };
    Ok(2.0 * (1.0 + u * u) / (PI * u * u * (b2 + 4.0).sqrt()) * j)
}

// ∫ w(x) dx / (2√(x(x−a)(b−x))) over (max(0, a), b)
fn window_integral(a: f64, b: f64, weight: &impl Fn(f64) -> f64, opts: &QuadOptions) -> Result<f64> {
    Ok(if a > 0.0 {
        // x = (a+b)/2 − (b−a)/2·cos φ
        let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
        integrate(|phi: f64| { let x = mid - half * phi.cos(); weight(x) / (2.0 * x.sqrt()) }, 0.0, PI, opts)?.value
    } else {
        // x = b·sin²ψ
        integrate(|psi: f64| { let x = b * psi.sin().powi(2); weight(x) / (x - a).sqrt() }, 0.0, PI / 2.0, opts)?.value
    })
}

// The same integral when |a| is small: the
// factor 1/√(x(x−a)) is nearly 1/x at the lower end, so that piece is
// mapped by x = a·cosh²s (or |a|·sinh²s for a < 0), which makes it 2 ds.
fn near_spike_integral(a: f64, b: f64, weight: &impl Fn(f64) -> f64, opts: &QuadOptions) -> Result<f64> {
    if a == 0.0 {
        return Err(Error::Domain("phase-damping density diverges at q = 2 − √2".into()));
    }
    let m = if a > 0.0 { 0.5 * (a + b) } else { 0.5 * b };
    let lower = if a > 0.0 {
        let s_max = (m / a).sqrt().acosh();
        integrate(|s: f64| { let x = a * s.cosh().powi(2); weight(x) / (b - x).sqrt() }, 0.0, s_max, opts)?.value
    } else {
        let s_max = (m / -a).sqrt().asinh();
        integrate(|s: f64| { let x = -a * s.sinh().powi(2); weight(x) / (b - x).sqrt() }, 0.0, s_max, opts)?.value
    };
    // x = b − (b−m)·sin²θ
    let h = b - m;
    let upper = integrate(
        |t: f64| {
            let x = b - h * t.sin().powi(2);
            weight(x) * h.sqrt() * t.cos() / (x * (x - a)).sqrt()
        },
        0.0,
        PI / 2.0,
        opts,
    )?
    .value;
    Ok(lower + upper)
}

/// Cumulative distribution of finite ESD times, `P(q_S ≤ q)`. The AD point
/// mass of asymptotic decays is not included, so the AD curve levels off at
/// `(6−π)/8`.
pub fn cdf_qs(kind: ChannelKind, q: f64) -> Result<f64> {
    if q.is_nan() {
        return Err(Error::Domain("q_S is NaN".into()));
    }
    if q <= 0.0 {
        return Ok(0.0);
    }
    Ok(match kind {
        ChannelKind::Depolarizing => {
            if q >= depolarizing_esd_limit() {
                1.0
            } else {
                let c = q * (2.0 - q) / (2.0 * (1.0 - q).powi(2));
                1.0 - (1.0 - c * c).powf(1.5)
            }
        }
        ChannelKind::AmplitudeDamping => {
            let q = q.min(1.0);
            1.0 - 0.5 / (1.0 + q * q) - q.atan() / (2.0 * q)
        }
        ChannelKind::PhaseDamping => {
            if q >= 1.0 {
                1.0
            } else {
                pd_cdf_table()?.eval(q)
            }
        }
    })
}

/// Probability that a Haar state is separable at time `q`, `S(q)`.
pub fn separable_probability(kind: ChannelKind, q: f64) -> Result<f64> {
    if q >= 1.0 {
        return Ok(1.0);
    }
    cdf_qs(kind, q)
}

/// Piecewise-linear table of a monotone function on a uniform grid.
#[derive(Debug, Clone)]
pub(crate) struct UniformTable {
    lo: f64,
    hi: f64,
    values: Vec<f64>,
}

impl UniformTable {
    fn build(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> Result<f64>) -> Result<Self> {
        let values = (0..n)
            .map(|i| f(lo + (hi - lo) * i as f64 / (n - 1) as f64))
            .collect::<Result<Vec<_>>>()?;
        Ok(UniformTable { lo, hi, values })
    }

    pub(crate) fn eval(&self, x: f64) -> f64 {
        let n = self.values.len();
        let pos = ((x - self.lo) / (self.hi - self.lo) * (n - 1) as f64).clamp(0.0, (n - 1) as f64);
        let i = (pos.floor() as usize).min(n - 2);
        let frac = pos - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }
}

const RATIO_TABLE_POINTS: usize = 4097;
const PD_CDF_POINTS: usize = 8193;

// 48(1−t²)G(t) on a uniform t-grid, interpolated by local cubics.
fn ratio_table() -> Result<&'static Vec<f64>> {
    static TABLE: OnceLock<std::result::Result<Vec<f64>, String>> = OnceLock::new();
    TABLE
        .get_or_init(|| {
            (0..RATIO_TABLE_POINTS)
                .map(|i| ratio_marginal(i as f64 / (RATIO_TABLE_POINTS - 1) as f64))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| e.to_string())
        })
        .as_ref()
        .map_err(|e| Error::Internal(format!("ratio marginal table: {e}")))
}

fn ratio_interp(table: &[f64], t: f64) -> f64 {
    let n = table.len();
    let pos = (t * (n - 1) as f64).clamp(0.0, (n - 1) as f64);
    let i = (pos.floor() as usize).clamp(1, n - 3);
    let x = pos - i as f64;
    let (p0, p1, p2, p3) = (table[i - 1], table[i], table[i + 1], table[i + 2]);
    // cubic Lagrange through nodes −1, 0, 1, 2
    let v = -p0 * x * (x - 1.0) * (x - 2.0) / 6.0 + p1 * (x + 1.0) * (x - 1.0) * (x - 2.0) / 2.0
        - p2 * (x + 1.0) * x * (x - 2.0) / 2.0
        + p3 * (x + 1.0) * x * (x - 1.0) / 6.0;
    v.max(0.0)
}

fn pd_cdf_direct(table: &[f64], q: f64) -> Result<f64> {
    if q <= 0.0 {
        return Ok(0.0);
    }
    let (_, beta) = pd_beta(q);
    let b2 = beta * beta;
    let (t_lo, t_hi) = pd_t_window(beta);
    let opts = QuadOptions::abs(1e-11);
    let settled = integrate(|t| ratio_interp(table, t), 0.0, t_lo, &opts)?.value;
    let partial = integrate(
        |t| {
            let c = b2 / 2.0 - (1.0 + t * t) / (1.0 - t * t);
            ratio_interp(table, t) * (1.0 - c.clamp(-1.0, 1.0).acos() / PI)
        },
        t_lo,
        t_hi,
        &opts,
    )?
    .value;
    Ok((settled + partial).clamp(0.0, 1.0))
}

fn pd_cdf_table() -> Result<&'static UniformTable> {
    static TABLE: OnceLock<std::result::Result<UniformTable, String>> = OnceLock::new();
    TABLE
        .get_or_init(|| {
            let ratio = ratio_table().map_err(|e| e.to_string())?;
            UniformTable::build(0.0, 1.0, PD_CDF_POINTS, |q| if q >= 1.0 { Ok(1.0) } else { pd_cdf_direct(ratio, q) })
                .map_err(|e| e.to_string())
        })
        .as_ref()
        .map_err(|e| Error::Internal(format!("phase-damping CDF table: {e}")))
}

/// Joint density of the invariants `(s, r)` over Haar states, normalised on
/// `0 ≤ r ≤ s ≤ 1/2`.
pub fn joint_pd_sr(s: f64, r: f64) -> f64 {
    if !(r >= 0.0 && r <= s && s <= 0.5) || s == r {
        return 0.0;
    }
    let one_minus_4r2 = 1.0 - 4.0 * r * r;
    if one_minus_4r2 <= 0.0 {
        return 0.0;
    }
    let mc = 4.0 * (s * s - r * r) / one_minus_4r2;
    let k = elliptic_k_complement(mc).unwrap_or(0.0);
    48.0 * (s * s - r * r) / one_minus_4r2.sqrt() * k
}

/// Joint density of `(|ψ₁₁|², C₀)` over Haar states.
pub fn joint_ad(p11: f64, c0: f64) -> f64 {
    if !(0.0..=1.0).contains(&p11) || !(0.0..=1.0).contains(&c0) {
        return 0.0;
    }
    let w = (1.0 - c0 * c0).sqrt();
    if 2.0 * p11 > 1.0 + w {
        return 0.0;
    }
    let z = (1.0 - w).max(2.0 * p11);
    if z <= 0.0 {
        return 0.0;
    }
    3.0 * c0 * ((1.0 + w) / z).ln()
}

/// Continuous part of the concurrence density at time `q`.
pub fn p_c(kind: ChannelKind, c: f64, q: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::Domain(format!("p_c needs q in [0, 1), got {q}")));
    }
    let cm = max_concurrence(kind, q);
    if !(c >= 0.0 && c < cm) {
        return Ok(0.0);
    }
    if q == 0.0 {
        return Ok(p_c0(c));
    }
    match kind {
        ChannelKind::Depolarizing => {
            let u2 = (1.0 - q) * (1.0 - q);
            let y = (c + 0.5 * q * (2.0 - q)) / u2;
            Ok(3.0 * y * (1.0 - y * y).max(0.0).sqrt() / u2)
        }
        ChannelKind::AmplitudeDamping => p_c_amplitude_damping(c, q),
        ChannelKind::PhaseDamping => p_c_phase_damping(c, q),
    }
}

fn p_c_amplitude_damping(c: f64, q: f64) -> Result<f64> {
    let u = 1.0 - q;
    let base = c / u;
    // C₀ = C/(1−q) + 2pq must stay ≤ 1
    let p_max = ((1.0 - base) / (2.0 * q)).min(1.0);
    if p_max <= 0.0 {
        return Ok(0.0);
    }
    let integrand = |p: f64| joint_ad(p, (base + 2.0 * p * q).min(1.0));
    let opts = QuadOptions::abs(1e-12).with_rel(1e-10).with_singular(Singular::Upper);
    // the kink where 2p meets 1 − √(1−C₀²) is a breakpoint
    let kink = find_ad_kink(base, q, p_max);
    let mut total = 0.0;
    let mut a = 0.0;
    for b in kink.into_iter().chain(std::iter::once(p_max)) {
        if b > a {
            let o = if b == p_max { opts } else { opts.with_singular(Singular::None) };
            total += integrate(integrand, a, b, &o)?.value;
            a = b;
        }
    }
    Ok(total / u)
}

// Solves 2p = 1 − √(1 − C₀(p)²) on (0, p_max) by bisection.
fn find_ad_kink(base: f64, q: f64, p_max: f64) -> Option<f64> {
    let g = |p: f64| {
        let c0 = (base + 2.0 * p * q).min(1.0);
        2.0 * p - (1.0 - (1.0 - c0 * c0).sqrt())
    };
    let (mut lo, mut hi) = (0.0, p_max);
    if g(lo) >= 0.0 || g(hi) <= 0.0 {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

fn p_c_phase_damping(c: f64, q: f64) -> Result<f64> {
    let qt = q * (2.0 - q);
    let u2 = (1.0 - q) * (1.0 - q);
    let s_min = c / (2.0 * u2);
    if s_min >= 0.5 {
        return Ok(0.0);
    }
    let inner_opts = QuadOptions::abs(1e-12).with_rel(1e-10);
    let h_scale = 1.0 / ((2.0 - qt) * (2.0 - qt));
    // In x = r² the r-integrand is K·(s²−x)/(√(1−4x)·2√x·√((x−lo)(H−x)))
    // on (max(0, lo), min(H, s²)); substitutions absorb the square-root
    // endpoints.
    //
    // The kernel takes y = s² − x, with 1 − 4x = (1 − 4s²) + 4y, so nothing
    // cancels when x approaches s² or 1/4.
    let inner = |s: f64| -> f64 {
        let a = c + qt * s;
        let lo = (a * a - 4.0 * (1.0 - qt) * s * s) / (qt * qt);
        let h = a * a * h_scale;
        let s2 = s * s;
        let top = h.min(s2);
        if top <= lo.max(0.0) {
            return 0.0;
        }
        let edge = (1.0 - 2.0 * s) * (1.0 + 2.0 * s);
        let kernel = |y: f64| {
            if y <= 0.0 {
                return 0.0;
            }
            let d = edge + 4.0 * y;
            match elliptic_k_complement(4.0 * y / d) {
                Ok(k) => k * y / d.sqrt(),
                Err(_) => 0.0,
            }
        };
        let v = if lo > 0.0 {
            // x = lo + (H − lo)·sin²θ, with H − lo = κ(s² − lo) in closed form
            let s2_minus_lo = (2.0 * (1.0 - qt) * s - c) * ((2.0 - qt) * s + a) / (qt * qt);
            let kappa = 4.0 * (1.0 - qt) * h_scale;
            let h_minus_lo = kappa * s2_minus_lo;
            let theta_max = if kappa > 1.0 { (1.0 / kappa.sqrt()).asin() } else { PI / 2.0 };
            integrate(
                |theta: f64| {
                    let x = lo + h_minus_lo * theta.sin().powi(2);
                    // y = (s² − lo)(1 − κ sin²θ)
                    let y = if kappa > 1.0 {
                        h_minus_lo * (theta_max - theta).sin() * (theta_max + theta).sin()
                    } else {
                        s2_minus_lo * (1.0 - kappa * theta.sin().powi(2))
                    };
                    kernel(y) / x.sqrt()
                },
                0.0,
                theta_max,
                &inner_opts,
            )
        } else {
            // x = H·sin²ψ
            let (psi_max, y_of) = if top < h {
                let m = (top / h).sqrt().clamp(0.0, 1.0).asin();
                (m, m)
            } else {
                (PI / 2.0, f64::NAN)
            };
            integrate(
                |psi: f64| {
                    let x = h * psi.sin().powi(2);
                    // when the range ends at s², y = H·sin(m−ψ)·sin(m+ψ)
                    let y = if y_of.is_nan() { s2 - x } else { h * (y_of - psi).sin() * (y_of + psi).sin() };
                    kernel(y) / (x - lo).sqrt()
                },
                0.0,
                psi_max,
                &inner_opts,
            )
        };
        a * v.map(|r| r.value).unwrap_or(f64::NAN)
    };
    let outer_opts = QuadOptions::abs(1e-10).with_rel(1e-9);
    let mut breaks = vec![s_min];
    let denom = 2.0 - 4.0 * q + q * q;
    if denom > 0.0 {
        let s_star = c / denom;
        if s_star > s_min && s_star < 0.5 {
            breaks.push(s_star);
        }
    }
    breaks.push(0.5);
    let mut total = 0.0;
    for w in breaks.windows(2) {
        total += integrate(inner, w[0], w[1], &outer_opts.with_singular(Singular::Both))?.value;
    }
    if !total.is_finite() {
        return Err(Error::Accuracy { estimate: total, error_bound: f64::INFINITY });
    }
    Ok(96.0 / (PI * qt * (2.0 - qt)) * total)
}

/// `∫₀^{C_M} p̃(C; q) dC`, the probability of still being entangled at `q`.
pub fn entangled_probability(kind: ChannelKind, q: f64, tol: f64) -> Result<f64> {
    if q >= 1.0 {
        return Ok(0.0);
    }
    let cm = max_concurrence(kind, q);
    if cm <= 0.0 {
        return Ok(0.0);
    }
    let opts = QuadOptions::abs(tol).with_singular(Singular::Upper);
    let err = RefCell::new(None);
    let v = integrate(
        |c| match p_c(kind, c, q) {
            Ok(v) => v,
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                0.0
            }
        },
        0.0,
        cm,
        &opts,
    );
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    Ok(v?.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spike_form_agrees_with_window_form() {
        let table = ratio_table().unwrap();
        let weight = |x: f64| (1.0 - x) * ratio_interp(table, x.sqrt());
        let opts = QuadOptions::abs(1e-12).with_rel(1e-11);
        for q in [0.3, 0.45, 0.52, 0.62, 0.7, 0.9] {
            let (_, beta) = pd_beta(q);
            let b2 = beta * beta;
            let (a, b) = (1.0 - 4.0 / b2, b2 / (4.0 + b2));
            let direct = window_integral(a, b, &weight, &opts).unwrap();
            let spike = near_spike_integral(a, b, &weight, &opts).unwrap();
            assert!((direct - spike).abs() < 1e-9 * direct, "q = {q}: {direct} vs {spike}");
        }
    }

    #[test]
    fn density_is_finite_right_next_to_the_spike() {
        let s = phase_damping_spike();
        for dq in [1e-12, 1e-9, 1e-6] {
            for q in [s - dq, s + dq] {
                let v = p_qs(ChannelKind::PhaseDamping, q).unwrap().continuous;
                assert!(v.is_finite() && v > 0.0, "q = {q}");
            }
        }
        // the nearest double to 2 − √2 is not the singular point itself
        let peak = p_qs(ChannelKind::PhaseDamping, s).map(|d| d.continuous).unwrap_or(f64::INFINITY);
        assert!(peak > p_qs(ChannelKind::PhaseDamping, s - 1e-6).unwrap().continuous);
    }
}
