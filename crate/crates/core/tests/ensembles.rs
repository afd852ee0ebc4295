use entdecay::ensembles::analytic::{joint_ad, joint_pd_sr, AD_ASYMPTOTIC_WEIGHT};
use entdecay::ensembles::{
    cdf_qs, entangled_probability, esd_domain, esd_outcomes, ks_distance, p_c, p_qs, separable_probability,
};
use entdecay::ensembles::empirical::split_outcomes;
use entdecay::qstate::sample_haar_pure;
use entdecay::smallmat::{integrate, QuadOptions, Singular};
use entdecay::{concurrence_evolved, max_concurrence, ChannelKind, PureState, SeedSpec, SideSpec};
use proptest::prelude::*;

fn haar(seed: u64, n: usize) -> Vec<PureState> {
    sample_haar_pure(SeedSpec::new(seed, 0), n).unwrap()
}

fn quad(f: impl Fn(f64) -> f64, a: f64, b: f64, singular: Singular) -> f64 {
    integrate(f, a, b, &QuadOptions::abs(1e-9).with_rel(1e-9).with_singular(singular)).unwrap().value
}

#[test]
fn joint_phase_damping_density_is_normalized() {
    // r ∈ [0, s]: log spike at r = s, inverse square root at r = 1/2
    let total = quad(|s| quad(|r| joint_pd_sr(s, r), 0.0, s, Singular::Upper), 0.0, 0.5, Singular::Upper);
    assert!((total - 1.0).abs() < 1e-4, "{total}");
}

#[test]
fn joint_amplitude_damping_density_is_normalized() {
    let total = quad(
        |c0| {
            let w = (1.0 - c0 * c0).sqrt();
            let kink = (1.0 - w) / 2.0;
            quad(|p| joint_ad(p, c0), 0.0, kink, Singular::None) + quad(|p| joint_ad(p, c0), kink, (1.0 + w) / 2.0, Singular::None)
        },
        0.0,
        1.0,
        Singular::Upper,
    );
    assert!((total - 1.0).abs() < 1e-4, "{total}");
}

#[test]
fn joint_densities_are_non_negative() {
    for i in 0..=60 {
        for j in 0..=60 {
            let (x, y) = (i as f64 / 60.0, j as f64 / 60.0);
            assert!(joint_ad(x, y) >= 0.0);
            assert!(joint_pd_sr(x / 2.0, y / 2.0) >= 0.0);
        }
    }
}

#[test]
fn depolarizing_concurrence_density_vanishes_beyond_the_edge() {
    let d = ChannelKind::Depolarizing;
    for q in [0.05, 0.1, 0.2, 0.3] {
        let cm = max_concurrence(d, q);
        assert!(p_c(d, cm * (1.0 - 1e-6), q).unwrap() > 0.0);
        assert_eq!(p_c(d, cm, q).unwrap(), 0.0);
        assert_eq!(p_c(d, cm + 1e-3, q).unwrap(), 0.0);
    }
}

#[test]
fn separable_probability_matches_monte_carlo() {
    let n = 1_000_000;
    let states = haar(41, n);
    for kind in ChannelKind::ALL {
        for q in [0.1, 0.25, 0.4, 0.6, 0.8] {
            let s = separable_probability(kind, q).unwrap();
            let sep = states.iter().filter(|p| concurrence_evolved(kind, q, p) <= 1e-12).count() as f64 / n as f64;
            let se = (s * (1.0 - s) / n as f64).sqrt().max(1.0 / n as f64);
            assert!((sep - s).abs() <= 3.0 * se, "{kind} q = {q}: mc {sep} vs {s}");
        }
    }
}

#[test]
fn separable_probability_equals_missing_concurrence_mass() {
    for (kind, qs) in [
        (ChannelKind::Depolarizing, &[0.1, 0.3][..]),
        (ChannelKind::AmplitudeDamping, &[0.2, 0.7][..]),
        (ChannelKind::PhaseDamping, &[0.4][..]),
    ] {
        for &q in qs {
            let s = separable_probability(kind, q).unwrap();
            let ent = entangled_probability(kind, q, 1e-9).unwrap();
            assert!((s + ent - 1.0).abs() < 1e-5, "{kind} q = {q}: S {s}, entangled {ent}");
        }
    }
}

#[test]
fn esd_samples_follow_the_analytic_distribution() {
    let states = haar(32, 200_000);
    for kind in ChannelKind::ALL {
        let outcomes = esd_outcomes(&states, kind, SideSpec::BothQubits, 1e-10, 1).unwrap();
        let (times, asymptotic, separable) = split_outcomes(&outcomes);
        assert_eq!(separable, 0);
        let ks = ks_distance(&times, asymptotic, |q| cdf_qs(kind, q).unwrap());
        assert!(ks < 0.005, "{kind}: {ks}");
        if kind == ChannelKind::AmplitudeDamping {
            let frac = asymptotic as f64 / states.len() as f64;
            assert!((frac - AD_ASYMPTOTIC_WEIGHT).abs() < 0.005);
        }
    }
}

#[test]
fn cdf_is_the_integral_of_the_density() {
    for kind in [ChannelKind::Depolarizing, ChannelKind::AmplitudeDamping] {
        let hi = esd_domain(kind).1;
        for f in [0.2, 0.5, 0.9] {
            let q = f * hi;
            let integral = quad(|x| p_qs(kind, x).unwrap().continuous, 0.0, q, Singular::None);
            assert!((integral - cdf_qs(kind, q).unwrap()).abs() < 1e-8, "{kind} q = {q}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn esd_densities_are_non_negative(f in 0.0f64..1.0, k in 0usize..3) {
        let kind = ChannelKind::ALL[k];
        let q = f * esd_domain(kind).1;
        prop_assume!(kind != ChannelKind::PhaseDamping || (q - (2.0 - 2f64.sqrt())).abs() > 1e-9);
        prop_assert!(p_qs(kind, q).unwrap().continuous >= 0.0);
    }

    #[test]
    fn cdfs_are_monotone(a in 0.0f64..1.0, b in 0.0f64..1.0, k in 0usize..3) {
        let kind = ChannelKind::ALL[k];
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(cdf_qs(kind, lo).unwrap() <= cdf_qs(kind, hi).unwrap() + 1e-12);
    }

    #[test]
    fn concurrence_densities_are_non_negative(f in 0.0f64..1.0, q in 0.0f64..0.95, k in 0usize..2) {
        let kind = [ChannelKind::Depolarizing, ChannelKind::AmplitudeDamping][k];
        let c = f * max_concurrence(kind, q);
        prop_assert!(p_c(kind, c, q).unwrap() >= 0.0);
    }
}
