// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::{FRAC_PI_4, PI};

use cohwalk_core::coherent::{
    coherent_overlap, cross_moment, cross_moment_imag, gram_matrix, is_positive_definite,
    orthogonal_limit_bound, photon_number, photon_number_series, photon_number_twisted,
    physical_norm, summed_and_differenced, twist_pair_tail_bound, CoherentParams,
    CoherentWalkState,
};
use cohwalk_core::walk::{
    chiral_spinor, distribution, evolve, moment, ChiralSign, CoinAngles, SpinAmplitude, WalkSpec,
};
use proptest::prelude::*;

fn reference_spins() -> [SpinAmplitude; 2] {
    [
        SpinAmplitude::spin_up(),
        chiral_spinor(FRAC_PI_4, ChiralSign::Minus),
    ]
}

fn reference_spec(theta2: f64, steps: usize, spin: SpinAmplitude) -> WalkSpec {
    WalkSpec::new(
        CoinAngles::new(FRAC_PI_4, theta2).unwrap(),
        0.0,
        steps,
        0,
        spin,
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gram_is_positive_definite(
        labels in proptest::collection::btree_set(-30i64..30, 1..25),
        alpha in 0.3..3.0f64,
    ) {
        let labels: Vec<i64> = labels.into_iter().collect();
        let g = gram_matrix(&labels, alpha);
        prop_assert!(is_positive_definite(&g));
        prop_assert_eq!(g[(0, 0)], 1.0);
        if labels.len() > 1 {
            let expected = coherent_overlap(labels[0], labels[1], alpha);
            prop_assert!((g[(0, 1)] - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn physical_norm_is_positive(theta2 in 0.0..PI, steps in 0usize..20, alpha in 0.05..2.0f64) {
        for spin in reference_spins() {
            let params = CoherentParams::new(alpha, 0.0).unwrap();
            let cs = CoherentWalkState::new(evolve(&reference_spec(theta2, steps, spin)), params);
            prop_assert!(physical_norm(&cs) > 0.0);
        }
    }

    #[test]
    fn orthogonal_limit(theta2 in 0.0..PI, steps in 1usize..25, alpha in 0.3..3.0f64) {
        for spin in reference_spins() {
            let state = evolve(&reference_spec(theta2, steps, spin));
            let params = CoherentParams::new(alpha, 0.0).unwrap();
            let nw = photon_number(&CoherentWalkState::new(state.clone(), params));
            let m2 = moment(&distribution(&state), 2);
            let bound = orthogonal_limit_bound(&state, alpha);
            prop_assert!((nw / (alpha * alpha) - m2).abs() <= bound + 1e-12);
        }
    }

    #[test]
    fn sin_quadrature_vanishes(theta2 in 0.0..PI, steps in 0usize..30, m in 1usize..12) {
        for spin in reference_spins() {
            let state = evolve(&reference_spec(theta2, steps, spin));
            prop_assert!(cross_moment_imag(&state, m).abs() < 1e-12);
        }
    }

    #[test]
    fn twisted_readout_matches_cosine_series(
        theta2 in 0.0..PI, steps in 1usize..15, alpha in 0.2..1.5f64, phi in -PI..PI,
    ) {
        for spin in reference_spins() {
            let state = evolve(&reference_spec(theta2, steps, spin));
            let exact = photon_number_twisted(&state, alpha, phi).unwrap();
            let series = photon_number_series(&state, alpha, phi);
            prop_assert!((exact - series).abs() < 1e-9 * (1.0 + exact.abs()));
        }
    }

    #[test]
    fn twist_pair_within_tail_bound(theta2 in 0.0..PI, steps in 1usize..25, alpha in 0.2..1.0f64) {
        for spin in reference_spins() {
            let state = evolve(&reference_spec(theta2, steps, spin));
            let pair = summed_and_differenced(&state, alpha).unwrap();
            let m2 = moment(&distribution(&state), 2);
            let bound = twist_pair_tail_bound(&state, alpha);
            prop_assert!((pair.tilde - 2.0 * alpha * alpha * m2).abs() <= bound + 1e-12);
        }
    }
}

#[test]
fn zero_offset_cross_moment_is_twice_m2() {
    let state = evolve(&reference_spec(0.7, 12, SpinAmplitude::spin_up()));
    let m2 = moment(&distribution(&state), 2);
    assert!((cross_moment(&state, 0) - 2.0 * m2).abs() < 1e-10);
}
