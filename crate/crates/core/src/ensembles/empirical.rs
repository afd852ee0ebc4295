//! Monte Carlo side: evolved concurrences, ESD outcomes and histograms.

use crate::channels::{apply_local, ChannelKind, SideSpec};
use crate::entanglement::{
    concurrence_evolved, concurrence_mixed, concurrence_single, esd_time_analytic, esd_time_numeric, EsdOutcome,
    SEPARABLE_TOL,
};
use crate::error::{Error, Result};
use crate::qstate::{par_map, DensityMatrix, PureState};

use super::{DensityCurve, EnsembleStats};

/// States that can be pushed through local channels.
pub trait Evolve {
    fn evolved_concurrence(&self, kind: ChannelKind, q: f64, side: SideSpec) -> Result<f64>;
    fn esd_time(&self, kind: ChannelKind, side: SideSpec, tol: f64) -> Result<EsdOutcome>;
}

impl Evolve for PureState {
    fn evolved_concurrence(&self, kind: ChannelKind, q: f64, side: SideSpec) -> Result<f64> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::Domain(format!("q = {q} outside [0, 1]")));
        }
        Ok(match side {
            SideSpec::BothQubits => concurrence_evolved(kind, q, self),
            SideSpec::FirstOnly => concurrence_single(kind, q, self.c0()),
        })
    }

    fn esd_time(&self, kind: ChannelKind, side: SideSpec, _tol: f64) -> Result<EsdOutcome> {
        Ok(match side {
            SideSpec::BothQubits => esd_time_analytic(kind, self),
            SideSpec::FirstOnly => {
                if self.c0() <= SEPARABLE_TOL {
                    EsdOutcome::InitiallySeparable
                } else if kind == ChannelKind::Depolarizing {
                    EsdOutcome::FiniteTime(2.0 / 3.0)
                } else {
                    EsdOutcome::AsymptoticOnly
                }
            }
        })
    }
}

impl Evolve for DensityMatrix {
    fn evolved_concurrence(&self, kind: ChannelKind, q: f64, side: SideSpec) -> Result<f64> {
        concurrence_mixed(&apply_local(self, kind, q, side)?)
    }

    fn esd_time(&self, kind: ChannelKind, side: SideSpec, tol: f64) -> Result<EsdOutcome> {
        esd_time_numeric(self, kind, side, tol)
    }
}

/// Mean, standard deviation, separable fraction and maximum of the evolved
/// concurrence over `states`.
pub fn ensemble_stats<S: Evolve>(kind: ChannelKind, q: f64, states: &[S], side: SideSpec) -> Result<EnsembleStats> {
    if states.is_empty() {
        return Err(Error::InvalidInput("ensemble_stats needs at least one state".into()));
    }
    let values = states.iter().map(|s| s.evolved_concurrence(kind, q, side)).collect::<Result<Vec<_>>>()?;
    Ok(summarize(&values))
}

pub(crate) fn summarize(values: &[f64]) -> EnsembleStats {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    let separable = values.iter().filter(|&&v| v <= SEPARABLE_TOL).count();
    let max_seen = values.iter().copied().fold(0.0, f64::max);
    EnsembleStats { mean, std: var.sqrt(), separable_fraction: separable as f64 / n as f64, max_seen, n }
}

/// ESD outcomes for every state, computed on `workers` threads in input order.
pub fn esd_outcomes<S: Evolve + Sync>(
    states: &[S],
    kind: ChannelKind,
    side: SideSpec,
    tol: f64,
    workers: usize,
) -> Result<Vec<EsdOutcome>> {
    par_map(states, workers, |s| s.esd_time(kind, side, tol))?.into_iter().collect()
}

/// Normalised histogram of `samples` plus `censored` observations piled at
/// the right end of `domain`, which become a point mass there.
///
/// A sample list with a single repeated value (and nothing censored) is
/// returned as a point mass of weight 1 at that value.
pub fn empirical_density(samples: &[f64], censored: usize, bins: usize, domain: (f64, f64)) -> Result<DensityCurve> {
    let total = samples.len() + censored;
    if total == 0 {
        return Err(Error::InvalidInput("empirical_density needs at least one sample".into()));
    }
    if bins < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 bins, got {bins}")));
    }
    let (lo, hi) = domain;
    if !(lo < hi) {
        return Err(Error::InvalidInput(format!("empty domain {domain:?}")));
    }
    if let Some(bad) = samples.iter().find(|x| !(lo..=hi).contains(*x)) {
        return Err(Error::InvalidInput(format!("sample {bad} outside domain [{lo}, {hi}]")));
    }
    let width = (hi - lo) / bins as f64;
    // bin midpoints padded with the domain ends, so the trapezoid integral
    // equals the histogram mass exactly
    let mut grid = vec![lo];
    grid.extend(super::midpoints(lo, hi, bins));
    grid.push(hi);
    if censored == 0 && samples.iter().all(|&x| x == samples[0]) {
        return DensityCurve::new(grid, vec![0.0; bins + 2], vec![(samples[0], 1.0)], domain);
    }
    let mut counts = vec![0usize; bins];
    for &x in samples {
        let i = (((x - lo) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    let norm = 1.0 / (total as f64 * width);
    let mut values: Vec<f64> = Vec::with_capacity(bins + 2);
    values.push(counts[0] as f64 * norm);
    values.extend(counts.iter().map(|&c| c as f64 * norm));
    values.push(counts[bins - 1] as f64 * norm);
    let masses = if censored > 0 { vec![(hi, censored as f64 / total as f64)] } else { Vec::new() };
    DensityCurve::new(grid, values, masses, domain)
}

/// Histogram of ESD outcomes on `domain` (normally `[0, 1]`): finite times
/// are binned, asymptotic decays become a point mass at 1 and initially
/// separable states a point mass at 0.
pub fn outcome_density(outcomes: &[EsdOutcome], bins: usize, domain: (f64, f64)) -> Result<DensityCurve> {
    let (times, asymptotic, separable) = split_outcomes(outcomes);
    let mut curve = empirical_density(&times, asymptotic + separable, bins, domain)?;
    if asymptotic + separable == 0 {
        return Ok(curve);
    }
    curve.point_masses.clear();
    let total = outcomes.len() as f64;
    if separable > 0 {
        curve.point_masses.push((0.0, separable as f64 / total));
    }
    if asymptotic > 0 {
        curve.point_masses.push((1.0, asymptotic as f64 / total));
    }
    Ok(curve)
}

/// Finite ESD times, number of asymptotic decays, number initially separable.
pub fn split_outcomes(outcomes: &[EsdOutcome]) -> (Vec<f64>, usize, usize) {
    let mut times = Vec::with_capacity(outcomes.len());
    let (mut asymptotic, mut separable) = (0, 0);
    for o in outcomes {
        match o {
            EsdOutcome::FiniteTime(q) => times.push(*q),
            EsdOutcome::AsymptoticOnly => asymptotic += 1,
            EsdOutcome::InitiallySeparable => separable += 1,
        }
    }
    (times, asymptotic, separable)
}

/// One-sample Kolmogorov–Smirnov distance between the empirical law of
/// `samples` (plus `censored` observations at the far right) and a
/// continuous CDF whose missing mass sits in the same place.
pub fn ks_distance(samples: &[f64], censored: usize, cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted: Vec<f64> = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = (sorted.len() + censored) as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    // just below the censoring point both sides are flat
    if let Some(&last) = sorted.last() {
        let f_end = cdf(f64::INFINITY).max(cdf(last));
        d = d.max((f_end - sorted.len() as f64 / n).abs());
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_samples_become_a_point_mass() {
        let c = empirical_density(&[0.3; 10], 0, 8, (0.0, 1.0)).unwrap();
        assert_eq!(c.point_masses, vec![(0.3, 1.0)]);
        assert_eq!(c.integral(), 0.0);
    }

    #[test]
    fn censored_samples_become_mass_at_the_right_end() {
        let c = empirical_density(&[0.1, 0.2, 0.6], 1, 4, (0.0, 1.0)).unwrap();
        assert_eq!(c.point_masses, vec![(1.0, 0.25)]);
        assert!((c.total() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn empty_and_out_of_range_rejected() {
        assert!(empirical_density(&[], 0, 4, (0.0, 1.0)).is_err());
        assert!(empirical_density(&[1.5], 0, 4, (0.0, 1.0)).is_err());
        assert!(empirical_density(&[0.5], 0, 1, (0.0, 1.0)).is_err());
    }

    #[test]
    fn outcome_masses_at_both_ends() {
        let outs =
            [EsdOutcome::FiniteTime(0.3), EsdOutcome::AsymptoticOnly, EsdOutcome::InitiallySeparable, EsdOutcome::FiniteTime(0.5)];
        let c = outcome_density(&outs, 4, (0.0, 1.0)).unwrap();
        assert_eq!(c.point_masses, vec![(0.0, 0.25), (1.0, 0.25)]);
        assert!((c.total() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ks_of_uniform_grid() {
        // samples at (i + 0.5)/n against the uniform CDF: D = 1/(2n)
        let n = 100;
        let s: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_distance(&s, 0, |x| x.clamp(0.0, 1.0));
        assert!((d - 0.005).abs() < 1e-12);
    }

    #[test]
    fn ks_with_matching_censoring() {
        // half the mass continuous uniform on [0, 1), half at 1
        let n = 100;
        let s: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_distance(&s, n, |x| 0.5 * x.clamp(0.0, 1.0));
        assert!((d - 0.0025).abs() < 1e-12);
        let d_wrong = ks_distance(&s, 0, |x| 0.5 * x.clamp(0.0, 1.0));
        assert!(d_wrong > 0.4);
    }

    #[test]
    fn stats_of_bell_and_product() {
        let states = vec![PureState::bell_phi_plus(), PureState::from_real([1.0, 0.0, 0.0, 0.0]).unwrap()];
        let st = ensemble_stats(ChannelKind::PhaseDamping, 0.0, &states, SideSpec::BothQubits).unwrap();
        assert!((st.mean - 0.5).abs() < 1e-15);
        assert!((st.std - 0.5).abs() < 1e-15);
        assert_eq!(st.separable_fraction, 0.5);
        assert_eq!(st.n, 2);
        let empty: Vec<PureState> = Vec::new();
        assert!(ensemble_stats(ChannelKind::PhaseDamping, 0.0, &empty, SideSpec::BothQubits).is_err());
    }
}
