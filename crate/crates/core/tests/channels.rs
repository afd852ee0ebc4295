use entdecay::qstate::{sample_haar_pure, sample_hs_mixed};
use entdecay::{apply_local, DensityMatrix, make_kraus, verify_cptp, ChannelKind, SeedSpec, SideSpec};
use proptest::prelude::*;

const SIDES: [SideSpec; 2] = [SideSpec::BothQubits, SideSpec::FirstOnly];

#[test]
fn completeness_across_a_sweep() {
    for kind in ChannelKind::ALL {
        for i in 0..=100 {
            let q = i as f64 / 100.0;
            let report = verify_cptp(&make_kraus(kind, q).unwrap());
            assert!(report.completeness_deviation <= 1e-12 && report.passed, "{kind} q = {q}: {report:?}");
        }
    }
}

#[test]
fn zero_strength_is_identity() {
    let states = sample_hs_mixed(SeedSpec::new(4, 0), 200).unwrap();
    for kind in ChannelKind::ALL {
        for side in SIDES {
            for rho in &states {
                let out = apply_local(rho, kind, 0.0, side).unwrap();
                assert!(out.mat().max_diff(rho.mat()) <= 1e-14);
            }
        }
    }
}

#[test]
fn unital_channels_never_raise_purity() {
    let mixed = sample_hs_mixed(SeedSpec::new(6, 0), 10_000).unwrap();
    let pure: Vec<_> = sample_haar_pure(SeedSpec::new(6, 1), 2_000).unwrap().iter().map(|p| p.density()).collect();
    for kind in [ChannelKind::Depolarizing, ChannelKind::PhaseDamping] {
        for (i, rho) in mixed.iter().chain(&pure).enumerate() {
            let q = (i % 19 + 1) as f64 / 20.0;
            let out = apply_local(rho, kind, q, SideSpec::BothQubits).unwrap();
            assert!(out.purity() <= rho.purity() + 1e-10, "{kind} q = {q}");
        }
    }
}

#[test]
fn amplitude_damping_can_purify() {
    // not unital: the maximally mixed state relaxes to |00⟩
    let rho = DensityMatrix::maximally_mixed();
    let out = apply_local(&rho, ChannelKind::AmplitudeDamping, 1.0, SideSpec::BothQubits).unwrap();
    assert!((rho.purity() - 0.25).abs() < 1e-15);
    assert!((out.purity() - 1.0).abs() < 1e-12);
}

#[test]
fn out_of_range_strength_is_a_domain_error() {
    for kind in ChannelKind::ALL {
        assert!(make_kraus(kind, -0.1).is_err());
        assert!(make_kraus(kind, 1.1).is_err());
        assert!(make_kraus(kind, f64::NAN).is_err());
    }
}

proptest! {
    #[test]
    fn amplitude_damping_composes_as_a_semigroup(q1 in 0.0f64..1.0, q2 in 0.0f64..1.0, seed in 0u64..1000) {
        let rho = &sample_hs_mixed(SeedSpec::new(seed, 0), 1).unwrap()[0];
        let ad = ChannelKind::AmplitudeDamping;
        for side in SIDES {
            let twice = apply_local(&apply_local(rho, ad, q1, side).unwrap(), ad, q2, side).unwrap();
            let once = apply_local(rho, ad, 1.0 - (1.0 - q1) * (1.0 - q2), side).unwrap();
            prop_assert!(twice.mat().max_diff(once.mat()) < 1e-12);
        }
    }

    #[test]
    fn outputs_are_states(q in 0.0f64..=1.0, seed in 0u64..1000, k in 0usize..3) {
        let rho = &sample_hs_mixed(SeedSpec::new(seed, 3), 1).unwrap()[0];
        let out = apply_local(rho, ChannelKind::ALL[k], q, SideSpec::BothQubits).unwrap();
        prop_assert!((out.mat().trace().re - 1.0).abs() < 1e-12);
        prop_assert!(out.mat().hermiticity_defect() < 1e-12);
        prop_assert!(out.min_eigenvalue().unwrap() > -1e-12);
    }
}
