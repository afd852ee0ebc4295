//! Physical-time profiles `q(t)` and composition of `q`-domain results into
//! the time domain.
//!
//! Every channel in this crate is parameterised by a dimensionless time
//! `q ∈ [0, 1]`. A [`QProfile`] says how `q` depends on the physical time `t`
//! for a given environment; statistics computed as functions of `q` are then
//! carried over to `t` without touching the channel dynamics again.
//!
//! Units: `ħ = k_B = 1`, so temperatures are energies and `coth(ω/2T)`
//! appears without constants.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::channels::ChannelKind;
use crate::entanglement::{esd_time_analytic, EsdOutcome};
use crate::error::{Error, Result};
use crate::qstate::{par_map, PureState};
use crate::smallmat::{integrate, QuadOptions};

/// Upper frequency cut of the ohmic integral, in units of `λ`. The weight
/// `e^{−ω/λ}` makes the neglected tail `≲ 2(1 + 2T/λ)·e^{−50}`, far below
/// `1e−12`.
pub const OMEGA_CUT_FACTOR: f64 = 50.0;

const DEPHASING_ABS_TOL: f64 = 1e-13;
const DEPHASING_REL_TOL: f64 = 1e-11;
const CROSSING_TOL: f64 = 1e-13;

/// `q(t) = 1 − e^{−γt}`.
pub fn q_markov(gamma: f64, t: f64) -> f64 {
    -(-gamma * t).exp_m1()
}

/// Accumulated-dissipation profile `q = 1 − e^{−Θ(t)}` with
/// `Θ(t) = γ_rate·(1 − e^{−γ_env t})/γ_env`.
pub fn q_nonautonomous(gamma_env: f64, gamma_rate: f64, t: f64) -> f64 {
    let theta = gamma_rate * (-(-gamma_env * t).exp_m1()) / gamma_env;
    -(-theta).exp_m1()
}

/// Limit of [`q_nonautonomous`] as `t → ∞`, `1 − e^{−γ_rate/γ_env}`.
pub fn q_nonautonomous_limit(gamma_env: f64, gamma_rate: f64) -> f64 {
    -(-gamma_rate / gamma_env).exp_m1()
}

/// Ground-state amplitude of an excited qubit coupled to a Lorentzian
/// reservoir, up to its phase:
/// `e^{−λt/2}(cos Ωt + (λ/2Ω) sin Ωt)` with `Ω = √(λ(2γ₀−λ))/2`,
/// continued to `cosh`/`sinh` when `2γ₀ < λ`.
pub fn pseudomode_amplitude(lambda: f64, gamma0: f64, t: f64) -> f64 {
    let omega2 = lambda * (2.0 * gamma0 - lambda) / 4.0;
    let half = lambda / 2.0;
    if omega2 > 0.0 {
        let w = omega2.sqrt();
        (-half * t).exp() * ((w * t).cos() + half * sin_over(w, t))
    } else if omega2 < 0.0 {
        // κ < λ/2, so both exponents below are non-positive
        let k = (-omega2).sqrt();
        let grow = ((k - half) * t).exp();
        let decay = ((-k - half) * t).exp();
        let cosh = 0.5 * (grow + decay);
        let sinh_over_k = if k * t < 1e-4 {
            (-half * t).exp() * t * (1.0 + (k * t).powi(2) / 6.0)
        } else {
            0.5 * (grow - decay) / k
        };
        cosh + half * sinh_over_k
    } else {
        (-half * t).exp() * (1.0 + half * t)
    }
}

// sin(ωt)/ω, finite as ω → 0
fn sin_over(w: f64, t: f64) -> f64 {
    let x = w * t;
    if x.abs() < 1e-4 {
        t * (1.0 - x * x / 6.0)
    } else {
        x.sin() / w
    }
}

/// `q(t) = 1 − |c₀(t)|²` for the damped Jaynes–Cummings (pseudomode) model.
pub fn q_pseudomode_ad(lambda: f64, gamma0: f64, t: f64) -> f64 {
    let c = pseudomode_amplitude(lambda, gamma0, t);
    (1.0 - c * c).clamp(0.0, 1.0)
}

/// First time at which `q_pseudomode_ad` reaches 1, `(π − atan(2Ω/λ))/Ω`.
/// `None` when `2γ₀ ≤ λ` (no zero of the amplitude).
pub fn pseudomode_first_zero(lambda: f64, gamma0: f64) -> Option<f64> {
    let omega2 = lambda * (2.0 * gamma0 - lambda) / 4.0;
    if omega2 <= 0.0 {
        return None;
    }
    let w = omega2.sqrt();
    Some((PI - (2.0 * w / lambda).atan()) / w)
}

/// Frequency kernel of the dephasing exponent.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DephasingKernel {
    /// `J(ω)(1 − cos ωt)/ω · coth(ω/2T)`.
    #[default]
    SinglePower,
    /// `J(ω)(1 − cos ωt)/ω² · coth(ω/2T)`, the usual pure-dephasing form.
    SquaredPower,
}

/// Named profile families and their parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum ProfileKind {
    /// `q = t` on `[0, 1]`.
    Identity,
    MarkovConstant { gamma: f64 },
    NonAutonomous { gamma_env: f64, gamma_rate: f64 },
    PseudomodeAd { lambda: f64, gamma0: f64 },
    OhmicDephasing {
        lambda: f64,
        temperature: f64,
        #[serde(default)]
        kernel: DephasingKernel,
    },
    SingleOscillatorDephasing { omega: f64, coupling: f64, temperature: f64 },
    /// Linear interpolation of the profile's `samples`.
    Tabulated,
}

/// A time profile `q(t)`, optionally carrying a table of `(t, q)` samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QProfile {
    #[serde(flatten)]
    pub kind: ProfileKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<(f64, f64)>>,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {v}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be non-negative and finite, got {v}")))
    }
}

impl QProfile {
    /// Validates the parameters of `kind`.
    pub fn new(kind: ProfileKind) -> Result<Self> {
        match &kind {
            ProfileKind::Identity => {}
            ProfileKind::MarkovConstant { gamma } => positive("gamma", *gamma)?,
            ProfileKind::NonAutonomous { gamma_env, gamma_rate } => {
                positive("gamma_env", *gamma_env)?;
                positive("gamma_rate", *gamma_rate)?;
            }
            ProfileKind::PseudomodeAd { lambda, gamma0 } => {
                positive("lambda", *lambda)?;
                positive("gamma0", *gamma0)?;
            }
            ProfileKind::OhmicDephasing { lambda, temperature, .. } => {
                positive("lambda", *lambda)?;
                non_negative("temperature", *temperature)?;
            }
            ProfileKind::SingleOscillatorDephasing { omega, coupling, temperature } => {
                positive("omega", *omega)?;
                non_negative("coupling", *coupling)?;
                non_negative("temperature", *temperature)?;
            }
            ProfileKind::Tabulated => {
                return Err(Error::InvalidInput("use QProfile::from_samples for tabulated profiles".into()))
            }
        }
        Ok(QProfile { kind, samples: None })
    }

    /// Tabulated profile; `t` must be strictly ascending and every `q` in
    /// `[0, 1]`.
    pub fn from_samples(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidInput("a tabulated profile needs at least 2 samples".into()));
        }
        if samples.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            return Err(Error::InvalidInput("sample times must be strictly ascending".into()));
        }
        if let Some((t, q)) = samples.iter().find(|(t, q)| !t.is_finite() || !(0.0..=1.0).contains(q)) {
            return Err(Error::InvalidState(format!("sample q({t}) = {q} outside [0, 1]")));
        }
        Ok(QProfile { kind: ProfileKind::Tabulated, samples: Some(samples) })
    }

    pub fn markov(gamma: f64) -> Result<Self> {
        Self::new(ProfileKind::MarkovConstant { gamma })
    }

    pub fn pseudomode(lambda: f64, gamma0: f64) -> Result<Self> {
        Self::new(ProfileKind::PseudomodeAd { lambda, gamma0 })
    }

    pub fn ohmic(lambda: f64, temperature: f64) -> Result<Self> {
        Self::new(ProfileKind::OhmicDephasing { lambda, temperature, kernel: DephasingKernel::default() })
    }

    /// `q(t)`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("time must be finite and non-negative, got {t}")));
        }
        let q = match &self.kind {
            ProfileKind::Identity => {
                if t > 1.0 {
                    return Err(Error::Domain(format!("identity profile is defined on [0, 1], got t = {t}")));
                }
                t
            }
            ProfileKind::MarkovConstant { gamma } => q_markov(*gamma, t),
            ProfileKind::NonAutonomous { gamma_env, gamma_rate } => q_nonautonomous(*gamma_env, *gamma_rate, t),
            ProfileKind::PseudomodeAd { lambda, gamma0 } => q_pseudomode_ad(*lambda, *gamma0, t),
            ProfileKind::OhmicDephasing { .. } | ProfileKind::SingleOscillatorDephasing { .. } => {
                q_dephasing(&self.kind, t)?
            }
            ProfileKind::Tabulated => self.interpolate(t)?,
        };
        Ok(q)
    }

    fn interpolate(&self, t: f64) -> Result<f64> {
        let s = self.samples.as_deref().unwrap_or(&[]);
        let (first, last) = match (s.first(), s.last()) {
            (Some(a), Some(b)) => (a.0, b.0),
            _ => return Err(Error::InvalidInput("tabulated profile has no samples".into())),
        };
        if t < first || t > last {
            return Err(Error::Domain(format!("t = {t} outside the tabulated range [{first}, {last}]")));
        }
        let i = s.partition_point(|p| p.0 <= t).clamp(1, s.len() - 1);
        let (t0, q0) = s[i - 1];
        let (t1, q1) = s[i];
        Ok(q0 + (q1 - q0) * (t - t0) / (t1 - t0))
    }

    /// Evaluates the profile on `t_grid` (in parallel over `workers`) and
    /// returns a tabulated copy.
    pub fn tabulate(&self, t_grid: &[f64], workers: usize) -> Result<QProfile> {
        let qs = par_map(t_grid, workers, |&t| self.eval(t))?.into_iter().collect::<Result<Vec<_>>>()?;
        Ok(QProfile { kind: self.kind.clone(), samples: Some(t_grid.iter().copied().zip(qs).collect()) })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: QProfile = serde_json::from_str(text)?;
        match p.kind {
            ProfileKind::Tabulated => QProfile::from_samples(p.samples.unwrap_or_default()),
            kind => Ok(QProfile { samples: p.samples, ..QProfile::new(kind)? }),
        }
    }

    /// `t,q` table of the stored samples with the parameters as comment lines.
    pub fn to_csv(&self) -> Result<String> {
        let samples = self
            .samples
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("profile has no samples; call tabulate first".into()))?;
        let mut out = String::new();
        let _ = writeln!(out, "# version,{}", env!("CARGO_PKG_VERSION"));
        let params = serde_json::to_value(&self.kind)?;
        if let Some(kind) = params.get("kind").and_then(|k| k.as_str()) {
            let _ = writeln!(out, "# kind,{kind}");
        }
        if let Some(obj) = params.get("params").and_then(|p| p.as_object()) {
            for (k, v) in obj {
                let _ = writeln!(out, "# {k},{v}");
            }
        }
        out.push_str("t,q\n");
        for (t, q) in samples {
            let _ = writeln!(out, "{t},{q}");
        }
        Ok(out)
    }
}

/// Dephasing profile `q(t) = 1 − e^{−Γ(t)}`.
///
/// For [`ProfileKind::OhmicDephasing`],
/// `Γ(t) = ∫₀^{50λ} J(ω)·k(ω, t)·coth(ω/2T) dω` with `J(ω) = (ω/λ)e^{−ω/λ}`
/// and the kernel `k` selected by [`DephasingKernel`]; `T = 0` drops the
/// `coth`. The single-oscillator profile keeps one term,
/// `coupling·k(ω, t)·coth(ω/2T)`, and is periodic with period `2π/ω`.
pub fn q_dephasing(kind: &ProfileKind, t: f64) -> Result<f64> {
    let gamma = dephasing_exponent(kind, t)?;
    Ok((-(-gamma).exp_m1()).clamp(0.0, 1.0))
}

/// `Γ(t)` of a dephasing profile.
pub fn dephasing_exponent(kind: &ProfileKind, t: f64) -> Result<f64> {
    match *kind {
        ProfileKind::OhmicDephasing { lambda, temperature, kernel } => ohmic_exponent(lambda, temperature, kernel, t),
        ProfileKind::SingleOscillatorDephasing { omega, coupling, temperature } => {
            Ok(coupling * kernel_term(omega, t, temperature, DephasingKernel::SinglePower))
        }
        _ => Err(Error::InvalidInput("not a dephasing profile".into())),
    }
}

// (1 − cos ωt)/ω^p · coth(ω/2T), written to stay finite as ω → 0
fn kernel_term(w: f64, t: f64, temperature: f64, kernel: DephasingKernel) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    let half = 0.5 * w * t;
    let one_minus_cos = 2.0 * half.sin().powi(2);
    let thermal = if temperature > 0.0 {
        let x = w / (2.0 * temperature);
        if x < 1e-6 {
            1.0 / x + x / 3.0
        } else {
            1.0 / x.tanh()
        }
    } else {
        1.0
    };
    let base = match kernel {
        DephasingKernel::SinglePower => one_minus_cos / w,
        DephasingKernel::SquaredPower => one_minus_cos / (w * w),
    };
    base * thermal
}

fn ohmic_exponent(lambda: f64, temperature: f64, kernel: DephasingKernel, t: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let integrand = |w: f64| (w / lambda) * (-w / lambda).exp() * kernel_term(w, t, temperature, kernel);
    let cut = OMEGA_CUT_FACTOR * lambda;
    // one panel per half period of cos ωt keeps each piece smooth
    let panels = ((cut * t / PI).ceil() as usize).clamp(1, 100_000);
    let width = cut / panels as f64;
    let opts = QuadOptions::abs(DEPHASING_ABS_TOL / panels as f64).with_rel(DEPHASING_REL_TOL);
    let mut total = 0.0;
    for i in 0..panels {
        let a = width * i as f64;
        total += integrate(integrand, a, a + width, &opts)?.value;
    }
    Ok(total)
}

/// Closed form of the ohmic exponent at `T = 0` with the single-power
/// kernel over the whole half-line, `λ²t²/(1 + λ²t²)`.
pub fn ohmic_zero_temperature_exponent(lambda: f64, t: f64) -> f64 {
    let x = (lambda * t).powi(2);
    x / (1.0 + x)
}

/// A `q`-domain object evaluated at `q(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimePoint<T> {
    pub t: f64,
    pub q: f64,
    pub value: T,
}

/// Evaluates `family(q(t))` for each `t` in `t_grid`.
pub fn compose_through_profile<T>(
    family: impl Fn(f64) -> Result<T>,
    profile: &QProfile,
    t_grid: &[f64],
) -> Result<Vec<TimePoint<T>>> {
    t_grid
        .iter()
        .map(|&t| {
            let q = profile.eval(t)?;
            if !(0.0..=1.0).contains(&q) {
                return Err(Error::Internal(format!("profile left [0, 1]: q({t}) = {q}")));
            }
            Ok(TimePoint { t, q, value: family(q)? })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    Death,
    Birth,
}

/// Entanglement vanishing (`Death`) or reappearing (`Birth`) at `time`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuddenEvent {
    pub time: f64,
    pub kind: EventKind,
    pub state_index: usize,
}

/// Sudden death and birth times of `psi` under `profile`.
///
/// The state is entangled at `t` iff `q(t) < q_S`, so events are the
/// crossings of `q_S` by the profile: `Death` upwards, `Birth` downwards.
/// Each crossing is bracketed on `t_grid` (with `t = 0` prepended if
/// missing) and refined by bisection. Every grid interval is also probed at
/// its midpoint; a state change there that the endpoints do not show means
/// two crossings fell into one interval, reported as a resolution error.
///
/// Asymptotically decaying states have no finite `q_S` and give no events.
pub fn detect_sudden_events(
    psi: &PureState,
    kind: ChannelKind,
    profile: &QProfile,
    t_grid: &[f64],
) -> Result<Vec<SuddenEvent>> {
    events_with_index(psi, kind, profile, t_grid, 0)
}

/// [`detect_sudden_events`] over an ensemble, tagging each event with the
/// index of its state.
pub fn detect_ensemble_events(
    states: &[PureState],
    kind: ChannelKind,
    profile: &QProfile,
    t_grid: &[f64],
) -> Result<Vec<SuddenEvent>> {
    let mut all = Vec::new();
    for (i, psi) in states.iter().enumerate() {
        all.extend(events_with_index(psi, kind, profile, t_grid, i)?);
    }
    Ok(all)
}

fn events_with_index(
    psi: &PureState,
    kind: ChannelKind,
    profile: &QProfile,
    t_grid: &[f64],
    index: usize,
) -> Result<Vec<SuddenEvent>> {
    if t_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidInput("t_grid must be strictly ascending".into()));
    }
    let q_s = match esd_time_analytic(kind, psi) {
        EsdOutcome::FiniteTime(q) => q,
        EsdOutcome::AsymptoticOnly => return Ok(Vec::new()),
        EsdOutcome::InitiallySeparable => {
            return Err(Error::InvalidInput("state is separable from the start; it has no events".into()))
        }
    };
    let mut grid = Vec::with_capacity(t_grid.len() + 1);
    if t_grid.first().is_none_or(|&t| t > 0.0) {
        grid.push(0.0);
    }
    grid.extend_from_slice(t_grid);
    let dead = |t: f64| -> Result<bool> { Ok(profile.eval(t)? >= q_s) };

    let mut events = Vec::new();
    let mut prev = dead(grid[0])?;
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        let now = dead(b)?;
        let mid = dead(0.5 * (a + b))?;
        if now == prev && mid != prev {
            return Err(Error::Resolution(format!(
                "two crossings of q_S = {q_s} inside [{a}, {b}]; use a finer t-grid"
            )));
        }
        if now != prev {
            let time = bisect_state_change(&dead, a, b, prev)?;
            let kind = if now { EventKind::Death } else { EventKind::Birth };
            events.push(SuddenEvent { time, kind, state_index: index });
            prev = now;
        }
    }
    Ok(events)
}

fn bisect_state_change(dead: &impl Fn(f64) -> Result<bool>, mut lo: f64, mut hi: f64, before: bool) -> Result<f64> {
    for _ in 0..200 {
        if hi - lo <= CROSSING_TOL * hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if dead(mid)? == before {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
