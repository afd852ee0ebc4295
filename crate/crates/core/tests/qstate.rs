use entdecay::ensembles::ks_distance;
use entdecay::qstate::{draw_haar_unitary, sample_bures_mixed, sample_haar_pure, sample_hs_mixed, srd_invariants};
use entdecay::smallmat::C64;
use entdecay::{concurrence_pure, PureState, SeedSpec};
use proptest::prelude::*;

fn amplitudes() -> impl Strategy<Value = [C64; 4]> {
    prop::collection::vec(-1.0f64..1.0, 8)
        .prop_filter("non-zero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
        .prop_map(|v| [0, 2, 4, 6].map(|i| C64::new(v[i], v[i + 1])))
}

proptest! {
    #[test]
    fn c0_from_invariants(amps in amplitudes()) {
        let psi = PureState::normalized(amps).unwrap();
        let a = psi.amplitudes();
        let direct = 2.0 * (a[0] * a[3] - a[1] * a[2]).norm();
        let inv = srd_invariants(&psi);
        prop_assert!((inv.c0 - direct).abs() < 1e-12);
        // the angle form loses digits to cancellation near C₀ = 0
        prop_assert!((inv.c0_from_angle() - direct).abs() < 1e-7);
        prop_assert!((concurrence_pure(&psi) - direct).abs() < 1e-12);
    }

    #[test]
    fn normalized_states_have_unit_norm(amps in amplitudes()) {
        let psi = PureState::normalized(amps).unwrap();
        let norm: f64 = psi.amplitudes().iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((norm - 1.0).abs() < 1e-14);
    }
}

#[test]
fn invariants_respect_am_gm_bound() {
    let states = sample_haar_pure(SeedSpec::new(11, 0), 1_000_000).unwrap();
    for psi in &states {
        let inv = srd_invariants(psi);
        assert!(inv.r >= 0.0 && inv.r <= inv.s + 1e-15 && inv.s <= 0.5 + 1e-15, "{inv:?}");
    }
}

#[test]
fn haar_measure_is_unitarily_invariant() {
    let n = 100_000;
    let states = sample_haar_pure(SeedSpec::new(5, 0), n).unwrap();
    let v = draw_haar_unitary(&mut SeedSpec::new(99, 7).rng());
    let mut rotated: Vec<f64> = states.iter().map(|p| concurrence_pure(&p.transformed(&v).unwrap())).collect();
    let mut original: Vec<f64> = states.iter().map(concurrence_pure).collect();
    rotated.sort_by(f64::total_cmp);
    original.sort_by(f64::total_cmp);
    // two-sample KS through the empirical CDF of the original set
    let ecdf = |x: f64| original.partition_point(|&y| y <= x) as f64 / n as f64;
    assert!(ks_distance(&rotated, 0, ecdf) < 0.01);
}

#[test]
fn initial_concurrence_matches_haar_density() {
    // CDF of 3C√(1−C²) is 1 − (1−C²)^{3/2}
    let states = sample_haar_pure(SeedSpec::new(3, 0), 100_000).unwrap();
    let c: Vec<f64> = states.iter().map(concurrence_pure).collect();
    let ks = ks_distance(&c, 0, |x| 1.0 - (1.0 - x * x).max(0.0).powf(1.5));
    assert!(ks < 0.01, "ks = {ks}");
}

#[test]
fn mixed_samplers_give_valid_states() {
    for states in [sample_hs_mixed(SeedSpec::new(1, 0), 500).unwrap(), sample_bures_mixed(SeedSpec::new(1, 0), 500).unwrap()] {
        for rho in &states {
            rho.validate().unwrap();
            assert!(rho.min_eigenvalue().unwrap() > -1e-12);
            assert!((rho.mat().trace().re - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn hilbert_schmidt_mean_purity() {
    // E[tr ρ²] = (N + N)/(N² + 1) = 8/17 for Ginibre 4×4
    let states = sample_hs_mixed(SeedSpec::new(2, 0), 100_000).unwrap();
    let mean = states.iter().map(|r| r.purity()).sum::<f64>() / states.len() as f64;
    assert!((mean - 8.0 / 17.0).abs() < 2e-3, "mean purity {mean}");
}

#[test]
fn streams_do_not_overlap() {
    let a = sample_haar_pure(SeedSpec::new(1, 0), 10).unwrap();
    let b = sample_haar_pure(SeedSpec::new(1, 1), 10).unwrap();
    let again = sample_haar_pure(SeedSpec::new(1, 0), 10).unwrap();
    assert_eq!(a, again);
    assert!(a.iter().zip(&b).all(|(x, y)| x != y));
}
