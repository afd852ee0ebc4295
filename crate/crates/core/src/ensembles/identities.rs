//! Relations between the concurrence and ESD-time pictures.

use crate::channels::ChannelKind;
use crate::error::{Error, Result};

use super::analytic::{entangled_probability, esd_domain};
use super::DensityCurve;

/// Largest step of the central difference.
const MAX_STEP: f64 = 1e-4;
const SURVIVAL_TOL: f64 = 1e-12;

/// ESD-time density recovered as `−d/dq ∫₀^{C_M} p̃(C; q) dC`.
///
/// Each grid point uses its own central difference with a step no larger
/// than a quarter of the distance to the domain edge, so the square-root
/// endpoint of the depolarizing density is resolved. At an edge one-sided
/// differences are extrapolated.
pub fn esd_density_from_concurrence(kind: ChannelKind, grid: &[f64]) -> Result<DensityCurve> {
    if grid.len() < 3 {
        return Err(Error::InvalidInput(format!("need at least 3 grid points, got {}", grid.len())));
    }
    let (lo, hi) = esd_domain(kind);
    // the survival function is only defined for q < 1
    let hi_open = if kind == ChannelKind::Depolarizing { hi } else { hi - 1e-9 };
    if grid.iter().any(|&q| !(q >= lo && q <= hi_open)) {
        return Err(Error::Domain(format!("grid must lie inside [{lo}, {hi}) for {kind}")));
    }
    let survival = |q: f64| entangled_probability(kind, q, SURVIVAL_TOL);
    let values = density_from_survival(grid, (lo, hi_open), survival)?;
    let masses = if kind == ChannelKind::AmplitudeDamping {
        vec![(1.0, survival(1.0 - 1e-6)?)]
    } else {
        Vec::new()
    };
    DensityCurve::new(grid.to_vec(), values, masses, (lo, hi))
}

/// `−dS/dq` at each grid point for a survival function `S` on `domain`.
pub fn density_from_survival(
    grid: &[f64],
    domain: (f64, f64),
    survival: impl Fn(f64) -> Result<f64>,
) -> Result<Vec<f64>> {
    let (lo, hi) = domain;
    let mut values = Vec::with_capacity(grid.len());
    for &q in grid {
        let left = q - lo;
        let right = hi - q;
        let step = MAX_STEP.min(left / 4.0).min(right / 4.0);
        let slope = if step > 0.0 {
            (survival(q + step)? - survival(q - step)?) / (2.0 * step)
        } else {
            let inward = if left == 0.0 { right } else { -left };
            edge_slope(&survival, q, MAX_STEP.min(inward.abs() / 4.0).copysign(inward))?
        };
        values.push((-slope).max(0.0));
    }
    Ok(values)
}

// One-sided differences at steps h, h/4, h/16 combined by Aitken's Δ²
// process, which removes a leading error term c·h^p whatever p is (p = 1/2
// at a square-root edge of the density).
fn edge_slope(survival: &impl Fn(f64) -> Result<f64>, q: f64, h: f64) -> Result<f64> {
    let s0 = survival(q)?;
    let mut d = [0.0; 3];
    for (k, slot) in d.iter_mut().enumerate() {
        let step = h / 4f64.powi(k as i32);
        *slot = (survival(q + step)? - s0) / step;
    }
    let (d1, d2) = (d[1] - d[0], d[2] - d[1]);
    let denom = d2 - d1;
    if denom.abs() <= 1e-12 * (d[2].abs() + 1e-300) || (d1 * d2) <= 0.0 {
        return Ok(d[2]);
    }
    Ok(d[2] - d2 * d2 / denom)
}

const ALPHA_MIN: f64 = 0.2;
const ALPHA_MAX: f64 = 5.0;
const ALPHA_GRID: usize = 241;
const FIT_POINTS: usize = 4096;

/// Time-scaling factor α minimising `∫(p_A(q) − p_B(q/α)/α)² dq`.
///
/// Both continuous parts are normalised to unit mass first, so only their
/// shapes are compared. A log-spaced α grid on `[0.2, 5]` brackets the
/// minimum and golden-section search refines it.
pub fn mixed_scaling_fit(curve_a: &DensityCurve, curve_b: &DensityCurve) -> Result<f64> {
    let mass_a = curve_a.integral();
    let mass_b = curve_b.integral();
    if !(mass_a > 1e-9 && mass_b > 1e-9) {
        return Err(Error::Fit("a curve has no continuous mass to fit".into()));
    }
    let x_max = curve_a.grid.last().copied().unwrap_or(1.0);
    let x_min = curve_a.grid.first().copied().unwrap_or(0.0).min(0.0);
    let objective = |alpha: f64| {
        let hi = x_max.max(alpha * curve_b.grid.last().copied().unwrap_or(1.0));
        let h = (hi - x_min) / FIT_POINTS as f64;
        let mut acc = 0.0;
        for i in 0..=FIT_POINTS {
            let x = x_min + h * i as f64;
            let diff = curve_a.interpolate(x) / mass_a - curve_b.interpolate(x / alpha) / (alpha * mass_b);
            let w = if i == 0 || i == FIT_POINTS { 0.5 } else { 1.0 };
            acc += w * diff * diff;
        }
        acc * h
    };
    let ratio = (ALPHA_MAX / ALPHA_MIN).ln();
    let alphas: Vec<f64> =
        (0..ALPHA_GRID).map(|i| ALPHA_MIN * (ratio * i as f64 / (ALPHA_GRID - 1) as f64).exp()).collect();
    let scores: Vec<f64> = alphas.iter().map(|&a| objective(a)).collect();
    let best = scores
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::Fit("empty alpha grid".into()))?;
    if !scores[best].is_finite() {
        return Err(Error::Fit("objective is not finite".into()));
    }
    let mut a = alphas[best.saturating_sub(1)];
    let mut b = alphas[(best + 1).min(ALPHA_GRID - 1)];
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (objective(c), objective(d));
    while b - a > 1e-7 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d);
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::linspace;

    fn bump(scale: f64) -> DensityCurve {
        // p(q) = 6q(1−q) on [0, 1], stretched by `scale`
        let grid = linspace(0.0, scale, 801);
        let values = grid.iter().map(|&x| {
            let y = x / scale;
            6.0 * y * (1.0 - y) / scale
        });
        DensityCurve::new(grid.clone(), values.collect(), vec![], (0.0, scale)).unwrap()
    }

    #[test]
    fn identical_curves_give_unit_alpha() {
        let alpha = mixed_scaling_fit(&bump(1.0), &bump(1.0)).unwrap();
        assert!((alpha - 1.0).abs() < 1e-4, "{alpha}");
    }

    #[test]
    fn prescaled_curve_recovers_factor() {
        let alpha = mixed_scaling_fit(&bump(0.6), &bump(0.4)).unwrap();
        assert!((alpha - 1.5).abs() < 0.01, "{alpha}");
    }

    #[test]
    fn point_masses_only_cannot_be_fitted() {
        let grid = linspace(0.0, 1.0, 5);
        let c = DensityCurve::new(grid, vec![0.0; 5], vec![(1.0, 1.0)], (0.0, 1.0)).unwrap();
        assert!(matches!(mixed_scaling_fit(&c, &bump(1.0)), Err(Error::Fit(_))));
    }

    #[test]
    fn constant_survival_has_zero_density() {
        let v = density_from_survival(&linspace(0.0, 1.0, 9), (0.0, 1.0), |_| Ok(0.7)).unwrap();
        assert!(v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn linear_survival_has_constant_density() {
        let v = density_from_survival(&linspace(0.0, 1.0, 9), (0.0, 1.0), |q| Ok(1.0 - q)).unwrap();
        assert!(v.iter().all(|&x| (x - 1.0).abs() < 1e-9));
    }

    #[test]
    fn short_grid_rejected() {
        assert!(esd_density_from_concurrence(ChannelKind::Depolarizing, &[0.1, 0.2]).is_err());
    }
}
