use entdecay::qstate::sample_haar_pure;
use entdecay::{
    concurrence_evolved, concurrence_mixed, concurrence_pure, concurrence_single, esd_time_analytic, esd_time_numeric,
    ChannelKind, EsdOutcome, PureState, SeedSpec, SideSpec,
};
use proptest::prelude::*;

fn haar(seed: u64, n: usize) -> Vec<PureState> {
    sample_haar_pure(SeedSpec::new(seed, 0), n).unwrap()
}

#[test]
fn root_consistency() {
    for kind in ChannelKind::ALL {
        for psi in &haar(21, 10_000) {
            if let EsdOutcome::FiniteTime(q) = esd_time_analytic(kind, psi) {
                assert!(concurrence_evolved(kind, q, psi) <= 1e-9, "{kind} q_S = {q}");
                if q > 1e-6 {
                    assert!(concurrence_evolved(kind, q * (1.0 - 1e-6), psi) > 0.0);
                }
            }
        }
    }
}

#[test]
fn evolved_concurrence_is_non_increasing() {
    let grid: Vec<f64> = (0..16).map(|i| i as f64 / 15.0).collect();
    for kind in ChannelKind::ALL {
        for psi in &haar(22, 10_000) {
            let c: Vec<f64> = grid.iter().map(|&q| concurrence_evolved(kind, q, psi)).collect();
            assert!(c.windows(2).all(|w| w[1] <= w[0] + 1e-10), "{kind}: {c:?}");
        }
    }
}

#[test]
fn amplitude_damping_class_split() {
    let ad = ChannelKind::AmplitudeDamping;
    for psi in &haar(23, 10_000) {
        if psi.c0() > 2.0 * psi.p11() + 1e-12 {
            assert_eq!(esd_time_analytic(ad, psi), EsdOutcome::AsymptoticOnly);
            for q in [0.5, 0.9, 0.99, 0.999_9] {
                assert!(concurrence_evolved(ad, q, psi) > 0.0);
            }
        }
    }
}

#[test]
fn single_channel_depolarizing_kills_everything_at_two_thirds() {
    for psi in &haar(24, 2_000) {
        let c0 = psi.c0();
        assert_eq!(concurrence_single(ChannelKind::Depolarizing, 2.0 / 3.0, c0), 0.0);
        let rho = psi.density();
        assert_eq!(
            esd_time_numeric(&rho, ChannelKind::Depolarizing, SideSpec::FirstOnly, 1e-10)
                .unwrap()
                .finite_time()
                .map(|q| (q - 2.0 / 3.0).abs() < 1e-8),
            Some(true)
        );
    }
}

#[test]
fn numeric_roots_agree_with_closed_forms() {
    for kind in ChannelKind::ALL {
        for psi in &haar(25, 300) {
            let exact = esd_time_analytic(kind, psi);
            let numeric = esd_time_numeric(&psi.density(), kind, SideSpec::BothQubits, 1e-10).unwrap();
            match (exact, numeric) {
                (EsdOutcome::FiniteTime(a), EsdOutcome::FiniteTime(b)) => assert!((a - b).abs() < 1e-8),
                (a, b) => assert_eq!(a, b),
            }
        }
    }
}

proptest! {
    #[test]
    fn pure_projectors_agree_with_pure_formula(v in prop::collection::vec(-1.0f64..1.0, 8)) {
        prop_assume!(v.iter().map(|x| x * x).sum::<f64>() > 1e-3);
        let amps = [0, 2, 4, 6].map(|i| entdecay::smallmat::C64::new(v[i], v[i + 1]));
        let psi = PureState::normalized(amps).unwrap();
        prop_assert!((concurrence_mixed(&psi.density()).unwrap() - concurrence_pure(&psi)).abs() < 1e-10);
    }

    #[test]
    fn single_channel_amplitude_and_phase_damping_stay_entangled(c0 in 1e-6f64..=1.0, q in 0.0f64..0.999_999) {
        prop_assert!(concurrence_single(ChannelKind::AmplitudeDamping, q, c0) > 0.0);
        prop_assert!(concurrence_single(ChannelKind::PhaseDamping, q, c0) > 0.0);
    }
}
