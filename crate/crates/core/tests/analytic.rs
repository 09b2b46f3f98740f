use std::f64::consts::PI;

use fbud_core::amplitudes::{achiralize, enantiomer, random_amplitudes, AmplitudeSet};
use fbud_core::analytic::{
    analytic_a, b21_of_phi, b2m1_of_phi, bracket_constant, bracket_terms, fbud_value, pair_contribution,
    AsymmetryCoefficient,
};
use fbud_core::angular::wigner_3j;
use fbud_core::{Complex64, EmissionDirection};
use proptest::prelude::*;

#[test]
fn bracket_is_two_over_five_root_three() {
    assert!((bracket_constant() - 2.0 / (5.0 * 3f64.sqrt())).abs() < 1e-15);
    let terms = bracket_terms();
    assert!(terms.iter().all(|t| t.abs() > 0.01));
    for (t, want) in terms.iter().zip([3f64.sqrt() / 30.0, 3f64.sqrt() / 30.0, 3f64.sqrt() / 15.0]) {
        assert!((t - want).abs() < 1e-15);
    }
    // Violating the m-sum kills a term.
    assert_eq!(wigner_3j(1, 1, 2, 1, -1, 1).unwrap(), 0.0);
}

#[test]
fn dipole_d_with_quadrupole_t_gives_no_asymmetry() {
    let amps = random_amplitudes(53, 2).unwrap();
    let only = amps.filter_partial_waves(|l| l == 1, |l| l == 2);
    assert!(only.one_photon.entries().any(|e| e.0 == 1 && e.3.norm() > 0.0));
    assert_eq!(analytic_a(&only, 1.0, 1.0).value(), Complex64::new(0.0, 0.0));
}

#[test]
fn odd_pairs_and_far_pairs_vanish() {
    let amps = random_amplitudes(50, 4).unwrap();
    for l1 in 0..=4 {
        for l2 in 0..=4 {
            let c = pair_contribution(&amps, l1, l2);
            if (l1 + l2) % 2 == 1 || (l1 - l2).abs() > 2 || l1 + l2 < 2 {
                assert_eq!(c, Complex64::new(0.0, 0.0), "({l1},{l2})");
            } else {
                assert!(c.norm() > 1e-6, "({l1},{l2}) unexpectedly small");
            }
        }
    }
}

#[test]
fn only_odd_parity_waves_give_no_asymmetry() {
    let amps = random_amplitudes(51, 3).unwrap();
    // d on even l, t on odd l: every pair has odd l1 + l2.
    let mixed = amps.filter_partial_waves(|l| l % 2 == 0, |l| l % 2 == 1);
    assert_eq!(analytic_a(&mixed, 1.0, 1.0).value(), Complex64::new(0.0, 0.0));
    assert_eq!(analytic_a(&mixed, 1.0, 1.0).internal_phase(), None);
}

#[test]
fn single_channel_sets_give_no_asymmetry() {
    let amps = random_amplitudes(52, 3).unwrap();
    let (d_only, t_only) = amps.split();
    assert_eq!(analytic_a(&d_only, 1.0, 1.0).value(), Complex64::new(0.0, 0.0));
    assert_eq!(analytic_a(&t_only, 1.0, 1.0).value(), Complex64::new(0.0, 0.0));
    assert_eq!(analytic_a(&AmplitudeSet::zeros(2).unwrap(), 1.0, 1.0).internal_phase(), None);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn enantiomers_have_opposite_asymmetry(seed in 0u64..10_000, lmax in 1..=4i32) {
        let amps = random_amplitudes(seed, lmax).unwrap();
        let a = analytic_a(&amps, 1.0, 1.0);
        let b = analytic_a(&enantiomer(&amps), 1.0, 1.0);
        prop_assert!((a.value() + b.value()).norm() <= 1e-12 * a.magnitude().max(1.0));
        let achiral = analytic_a(&achiralize(&amps), 1.0, 1.0);
        prop_assert!(achiral.magnitude() <= 1e-12);
        prop_assert_eq!(achiral.internal_phase(), None);
    }

    #[test]
    fn field_scaling_is_ex_ey_squared(seed in 0u64..10_000, ex in 0.1..3.0f64, ey in 0.1..3.0f64) {
        let amps = random_amplitudes(seed, 2).unwrap();
        let unit = analytic_a(&amps, 1.0, 1.0).value();
        let scaled = analytic_a(&amps, ex, ey).value();
        prop_assert!((scaled - unit * (ex * ey * ey)).norm() <= 1e-12 * scaled.norm().max(1.0));
    }

    #[test]
    fn two_photon_phase_rotates_the_coefficient(seed in 0u64..10_000, theta in -PI..PI) {
        let amps = random_amplitudes(seed, 3).unwrap();
        let a = analytic_a(&amps, 1.0, 1.0).value();
        let rotated = analytic_a(&amps.with_two_photon_phase(theta), 1.0, 1.0).value();
        prop_assert!((rotated - a * Complex64::from_polar(1.0, theta)).norm() <= 1e-12 * a.norm().max(1.0));
    }

    #[test]
    fn b21_law_landmarks(amp in 0.01..5.0f64, delta in -3.1..3.1f64) {
        let c = AsymmetryCoefficient::from_polar(amp, delta);
        prop_assert!((c.internal_phase().unwrap() - delta).abs() < 1e-12);
        for phi in [0.0, 0.3, 1.1, -2.0] {
            let b = b21_of_phi(&c, phi);
            prop_assert_eq!(b.re, 0.0);
            prop_assert!((b.im + 2.0 * amp * (2.0 * phi - delta).sin()).abs() < 1e-12 * amp);
            let bm = b2m1_of_phi(&c, phi);
            prop_assert!((bm + b.conj()).norm() < 1e-15);
        }
        // Extrema at 2φ - δ = ±π/2, zeros at 2φ = δ.
        let peak = b21_of_phi(&c, 0.5 * (delta + 0.5 * PI));
        prop_assert!((peak.im + 2.0 * amp).abs() < 1e-12 * amp);
        prop_assert!(b21_of_phi(&c, 0.5 * delta).im.abs() < 1e-12 * amp);
    }
}

#[test]
fn fbud_surface_shape() {
    let c = AsymmetryCoefficient::from_polar(1.0, 0.0);
    let pref = (30.0 / PI).sqrt();
    let at = |t: f64, p: f64, phi: f64| fbud_value(&c, phi, &EmissionDirection::new(t, p).unwrap());
    assert!((at(0.25 * PI, 0.5 * PI, 0.25 * PI) - 0.5 * pref).abs() < 1e-14);
    assert!((at(0.75 * PI, 0.5 * PI, 0.25 * PI) + 0.5 * pref).abs() < 1e-14);
    assert!((at(0.25 * PI, 1.5 * PI, 0.25 * PI) + 0.5 * pref).abs() < 1e-14);
    assert!(at(0.25 * PI, 0.5 * PI, 0.0).abs() < 1e-15);
    assert!(at(0.25 * PI, 0.0, 0.25 * PI).abs() < 1e-15);
    assert!(at(0.5 * PI, 0.5 * PI, 0.25 * PI).abs() < 1e-14);
    assert!((at(0.25 * PI, 0.5 * PI, -0.25 * PI) + 0.5 * pref).abs() < 1e-14);
    assert!((b21_of_phi(&c, 0.25 * PI) - Complex64::new(0.0, -2.0)).norm() < 1e-15);

    let c = AsymmetryCoefficient::from_polar(0.8, 1.3);
    for (t, p) in [(0.3, 0.2), (1.0, 2.5), (2.9, 5.0)] {
        let d = EmissionDirection::new(t, p).unwrap();
        assert!(fbud_value(&c, 0.65, &d).abs() < 1e-15);
        assert!(fbud_value(&c, 0.3, &EmissionDirection::new(0.5 * PI, p).unwrap()).abs() < 1e-15);
        assert!(b21_of_phi(&c, 0.65).norm() < 1e-15);
    }
}

#[test]
fn phase_is_reported_in_half_open_interval() {
    let c = AsymmetryCoefficient::new(Complex64::new(-1.0, -0.0), 1.0);
    assert!((c.internal_phase().unwrap() - PI).abs() < 1e-15);
    let tiny = AsymmetryCoefficient::new(Complex64::new(1e-16, 0.0), 1.0);
    assert_eq!(tiny.internal_phase(), None);
}
