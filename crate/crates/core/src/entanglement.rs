//! Concurrence and disentanglement times.

use crate::channels::{ChannelKind, LocalChannel, SideSpec};
use crate::error::{Error, Result};
use crate::qstate::{DensityMatrix, PureState};
use crate::smallmat::{hermitian_eig, pauli, psd_sqrt_from_eig, singular_values, CMat};

/// Initial concurrence at or below this counts as separable.
pub const SEPARABLE_TOL: f64 = 1e-12;
/// Default bisection tolerance in `q` for numeric ESD times.
pub const DEFAULT_ESD_TOL: f64 = 1e-8;
const SCAN_POINTS: usize = 64;
// a later grid point this far above zero means the concurrence came back
const REVIVAL_TOL: f64 = 1e-9;
/// Probe point close to `q = 1` for the asymptotic-decay test.
pub const ASYMPTOTIC_PROBE: f64 = 1.0 - 1e-6;
/// Signed concurrence above this at the probe point means decay is only
/// asymptotic. Amplitude damping leaves C ≈ (1−q)(C₀ − 2|ψ₁₁|²) near q = 1, so
/// the threshold sits just above the rounding floor rather than at a fixed
/// fraction of C₀.
pub const ASYMPTOTIC_TOL: f64 = 1e-14;
const RELATIVE_CLAMP: f64 = 1e-14;
const BOUNDARY_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EsdOutcome {
    /// Separable from `q_S` on, with `q_S ∈ (0, 1]`.
    FiniteTime(f64),
    /// Entangled for every `q < 1`.
    AsymptoticOnly,
    /// Zero concurrence already at `q = 0`.
    InitiallySeparable,
}

impl EsdOutcome {
    pub fn finite_time(&self) -> Option<f64> {
        match self {
            EsdOutcome::FiniteTime(q) => Some(*q),
            _ => None,
        }
    }

    /// Value on `[0, 1]` used when histogramming: initially separable states
    /// sit at 0, asymptotic ones at 1.
    pub fn censored_time(&self) -> f64 {
        match self {
            EsdOutcome::FiniteTime(q) => *q,
            EsdOutcome::AsymptoticOnly => 1.0,
            EsdOutcome::InitiallySeparable => 0.0,
        }
    }
}

pub fn concurrence_pure(psi: &PureState) -> f64 {
    psi.c0()
}

/// √λ₁ − √λ₂ − √λ₃ − √λ₄ for the Wootters eigenvalues of ρ, without the
/// clamp at zero. Negative values measure how far inside the separable set the
/// state lies; bisection uses the sign.
pub fn wootters_signed(rho: &DensityMatrix) -> Result<f64> {
    match rho.factor() {
        Some(l) => Ok(signed_from_factor(l)),
        None => signed_hermitian(rho.mat()),
    }
}

/// Route through the Hermitian matrix √ρ·ρ̃·√ρ, whose eigenvalues are the λ.
pub fn signed_hermitian(rho: &CMat) -> Result<f64> {
    let eig = hermitian_eig(rho)?;
    let root = psd_sqrt_from_eig(&eig)?;
    // ρ̃ = (σ₂⊗σ₂) ρ* (σ₂⊗σ₂)
    let flip = pauli::spin_flip();
    let tilde = flip.matmul(&rho.conj()).matmul(&flip);
    let m = root.matmul(&tilde).matmul(&root).hermitize();
    let lambdas = hermitian_eig(&m)?.eigenvalues;
    let top = lambdas[0].max(0.0);
    let roots: Vec<f64> = lambdas
        .iter()
        .map(|&l| if l <= RELATIVE_CLAMP * top { 0.0 } else { l.sqrt() })
        .collect();
    Ok(roots[0] - roots[1] - roots[2] - roots[3])
}

/// Route through a factor ρ = L·L†: the √λ are the singular values of
/// Lᵀ(σ₂⊗σ₂)L, obtained directly rather than as square roots.
pub fn signed_from_factor(l: &CMat) -> f64 {
    let tau = l.transpose().matmul(&pauli::spin_flip()).matmul(l);
    let sv = singular_values(&tau);
    sv[0] - sv[1] - sv[2] - sv[3]
}

/// Wootters concurrence max{0, √λ₁ − √λ₂ − √λ₃ − √λ₄}, λ being the
/// eigenvalues of ρρ̃ in descending order.
pub fn concurrence_mixed(rho: &DensityMatrix) -> Result<f64> {
    Ok(wootters_signed(rho)?.clamp(0.0, 1.0))
}

/// Closed-form concurrence of a pure state after identical channels on both
/// qubits.
pub fn concurrence_evolved(kind: ChannelKind, q: f64, psi: &PureState) -> f64 {
    let c0 = psi.c0();
    let raw = match kind {
        ChannelKind::Depolarizing => c0 * (1.0 - q).powi(2) - 0.5 * q * (2.0 - q),
        ChannelKind::AmplitudeDamping => (1.0 - q) * (c0 - 2.0 * psi.p11() * q),
        ChannelKind::PhaseDamping => {
            let inv = psi.srd_invariants();
            let qt = q * (2.0 - q);
            -qt * inv.s + (qt * qt * inv.r * inv.r + (1.0 - qt) * c0 * c0).sqrt()
        }
    };
    raw.max(0.0)
}

/// Concurrence when only the first qubit is exposed: max{0, x(q)·C₀}.
pub fn concurrence_single(kind: ChannelKind, q: f64, c0: f64) -> f64 {
    let x = match kind {
        ChannelKind::Depolarizing => 1.0 - 1.5 * q,
        ChannelKind::AmplitudeDamping => (1.0 - q).max(0.0).sqrt(),
        ChannelKind::PhaseDamping => 1.0 - q,
    };
    (x * c0).max(0.0)
}

/// Largest concurrence reachable at time `q` from any pure state.
pub fn max_concurrence(kind: ChannelKind, q: f64) -> f64 {
    match kind {
        ChannelKind::Depolarizing => (1.0 - 1.5 * q * (2.0 - q)).max(0.0),
        ChannelKind::AmplitudeDamping => 1.0 - q,
        ChannelKind::PhaseDamping => (1.0 - q).powi(2),
    }
}

/// Disentanglement time of a pure state from the closed-form expressions.
pub fn esd_time_analytic(kind: ChannelKind, psi: &PureState) -> EsdOutcome {
    let c0 = psi.c0();
    if c0 <= SEPARABLE_TOL {
        return EsdOutcome::InitiallySeparable;
    }
    match kind {
        ChannelKind::Depolarizing => EsdOutcome::FiniteTime(1.0 - 1.0 / (1.0 + 2.0 * c0).sqrt()),
        ChannelKind::AmplitudeDamping => {
            let twice_p11 = 2.0 * psi.p11();
            // rounding decides which side of C₀ = 2|ψ₁₁|² a boundary state lands on
            if (c0 - twice_p11).abs() <= BOUNDARY_TOL {
                EsdOutcome::FiniteTime(1.0)
            } else if c0 < twice_p11 {
                EsdOutcome::FiniteTime(c0 / twice_p11)
            } else {
                EsdOutcome::AsymptoticOnly
            }
        }
        ChannelKind::PhaseDamping => {
            let d = psi.srd_invariants().d;
            if d == 0.0 {
                EsdOutcome::AsymptoticOnly
            } else {
                // 1 − (√(C₀²+d²) − C₀)/d without the cancellation
                EsdOutcome::FiniteTime(1.0 - d / ((c0 * c0 + d * d).sqrt() + c0))
            }
        }
    }
}

/// Disentanglement time of an arbitrary state by scanning and bisecting the
/// Kraus-evolved Wootters concurrence.
pub fn esd_time_numeric(rho0: &DensityMatrix, kind: ChannelKind, side: SideSpec, tol: f64) -> Result<EsdOutcome> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("bisection tolerance must be positive, got {tol}")));
    }
    let signed = |q: f64| -> Result<f64> {
        let channel = LocalChannel::new(kind, q, side)?;
        match rho0.factor() {
            Some(l) => Ok(signed_from_factor(&channel.apply_factor(l))),
            None => signed_hermitian(&channel.apply_mat(rho0.mat())),
        }
    };
    if signed(0.0)? <= SEPARABLE_TOL {
        return Ok(EsdOutcome::InitiallySeparable);
    }
    if signed(ASYMPTOTIC_PROBE)? > ASYMPTOTIC_TOL {
        return Ok(EsdOutcome::AsymptoticOnly);
    }
    let grid = |i: usize| ASYMPTOTIC_PROBE * i as f64 / (SCAN_POINTS - 1) as f64;
    let mut lo = 0.0;
    for i in 1..SCAN_POINTS {
        let q = grid(i);
        if signed(q)? <= 0.0 {
            if i + 1 < SCAN_POINTS && signed(grid(i + 1))? > REVIVAL_TOL {
                return Err(Error::Refinement(format!(
                    "concurrence revives after q = {q}; use a denser grid"
                )));
            }
            let mut hi = q;
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if signed(mid)? <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return Ok(EsdOutcome::FiniteTime(0.5 * (lo + hi)));
        }
        lo = q;
    }
    // positive but below the asymptotic threshold all the way to the probe
    Ok(EsdOutcome::FiniteTime(1.0))
}
