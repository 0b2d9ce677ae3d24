// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI};

use cohwalk_core::coherent::{
    photon_number, photon_number_twisted, projective_probability, shifted_pair_delta,
    summed_and_differenced, CoherentParams, CoherentWalkState, PairReadout, TWIST_PAIR,
};
use cohwalk_core::fock::{
    apply_displacement, coherent_vector, compile_translation, displacement_op, expected_photons,
    projective_probability as fock_probability, run_walk_fock, sequence_fidelity,
    translation_overlaps, FockSpace, QubitCavityState,
};
use cohwalk_core::walk::{chiral_spinor, evolve, ChiralSign, CoinAngles, SpinAmplitude, WalkSpec};
use cohwalk_core::C64;

/// `⟨m|D(β)|n⟩` for `m ≥ n` from the generalized Laguerre polynomial.
fn laguerre_element(m: usize, n: usize, beta: C64) -> C64 {
    let x = beta.norm_sqr();
    let k = (m - n) as f64;
    // L_n^{(k)}(x) by the three-term recurrence.
    let (mut prev, mut cur) = (1.0, 1.0 + k - x);
    if n == 0 {
        cur = 1.0;
    } else {
        for j in 1..n {
            let j = j as f64;
            let next = ((2.0 * j + 1.0 + k - x) * cur - (j + k) * prev) / (j + 1.0);
            prev = cur;
            cur = next;
        }
    }
    let log_ratio: f64 = (n + 1..=m).map(|i| -(i as f64).ln() / 2.0).sum();
    beta.powu((m - n) as u32) * log_ratio.exp() * (-x / 2.0).exp() * cur
}

#[test]
fn displacement_matches_laguerre_form() {
    let space = FockSpace::new(90).unwrap();
    let beta = C64::new(0.6, -1.1);
    let d = displacement_op(beta, &space).unwrap();
    for m in 0..15 {
        for n in 0..=m {
            let expected = laguerre_element(m, n, beta);
            assert!((d[(m, n)] - expected).norm() < 1e-10, "({m},{n})");
            // ⟨n|D(β)|m⟩ = ⟨m|D(−β)|n⟩*.
            let mirrored = laguerre_element(m, n, -beta).conj();
            assert!((d[(n, m)] - mirrored).norm() < 1e-10, "({n},{m})");
        }
    }
}

#[test]
fn compiled_sequence_is_unitary_up_to_truncation() {
    for &alpha in &[0.4, 0.8, 1.5] {
        let space = FockSpace::for_amplitude(7.0 * alpha);
        for echo in [false, true] {
            let seq = compile_translation(alpha, echo);
            for o in translation_overlaps(&seq, alpha, -6..=6, &space).unwrap() {
                assert!(o.output_norm <= 1.0 + 1e-12 && o.output_norm >= 1.0 - 1e-10);
                assert!(o.overlap.re > 0.0 && o.overlap.im.abs() < 1e-8, "{o:?}");
            }
            // A generic superposition as well.
            let cavity: Vec<C64> = (0..space.dim())
                .map(|n| {
                    C64::new((n as f64 * 0.37).sin(), (n as f64 * 0.11).cos())
                        * (-(n as f64) / 8.0).exp()
                })
                .collect();
            let norm = cavity.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            let cavity: Vec<C64> = cavity.iter().map(|c| c / norm).collect();
            let input =
                QubitCavityState::product(chiral_spinor(FRAC_PI_4, ChiralSign::Minus), &cavity);
            let out = seq.apply(&input, &space);
            assert!((out.norm_sqr() - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn larger_truncation_never_hurts_fidelity() {
    let alpha = 0.8;
    let seq = compile_translation(alpha, false);
    let base = FockSpace::for_amplitude(7.0 * alpha).dim();
    let mut previous = 0.0;
    for extra in [0, 5, 17, 40] {
        let space = FockSpace::new(base + extra).unwrap();
        let f = sequence_fidelity(&seq, alpha, -6..=6, &space).unwrap();
        assert!(
            f >= previous - 1e-12,
            "dim {}: {f} < {previous}",
            base + extra
        );
        previous = f;
    }
}

#[test]
fn displacement_translates_lattice_states() {
    let alpha = 0.8;
    let space = FockSpace::for_amplitude(8.0 * alpha);
    for x in -6i64..=6 {
        let start = coherent_vector(C64::new(x as f64 * alpha, 0.0), &space).unwrap();
        let out = apply_displacement(C64::new(alpha, 0.0), &start, &space);
        let target = coherent_vector(C64::new((x + 1) as f64 * alpha, 0.0), &space).unwrap();
        let overlap: C64 = target.iter().zip(&out).map(|(a, b)| a.conj() * b).sum();
        // Real displacement along the real axis carries no phase.
        assert!((overlap - 1.0).norm() < 1e-9);
    }
}

fn reference_spins() -> [SpinAmplitude; 2] {
    [
        SpinAmplitude::spin_up(),
        chiral_spinor(FRAC_PI_4, ChiralSign::Minus),
    ]
}

/// Each closed form against the circuit model, on a reduced grid.
#[test]
fn closed_forms_match_fock_model() {
    for &alpha in &[0.4, 0.8] {
        for steps in [1, 3, 6] {
            for spin in reference_spins() {
                let angles = CoinAngles::new(FRAC_PI_4, FRAC_PI_8).unwrap();
                let spec = WalkSpec::new(angles, 0.0, steps, 0, spin).unwrap();
                let space = FockSpace::for_walk(&spec.at_position(2), alpha);

                // N_w and P(xα).
                let fock = run_walk_fock(&spec, alpha, &space).unwrap();
                let params = CoherentParams::new(alpha, 0.0).unwrap();
                let cs = CoherentWalkState::new(evolve(&spec), params);
                assert!((expected_photons(&fock) - photon_number(&cs)).abs() < 1e-6);
                for x in -2 * steps as i64..=2 * steps as i64 {
                    let p = fock_probability(&fock, x, alpha, &space).unwrap();
                    assert!((p - projective_probability(&cs, x)).abs() < 1e-8);
                }

                // N_w(φ), Ñ_w and ΔN_w.
                let mut fock_twist = [0.0; 2];
                for (slot, phi) in fock_twist.iter_mut().zip(TWIST_PAIR) {
                    let state = run_walk_fock(&spec.with_phi(phi), alpha, &space).unwrap();
                    *slot = expected_photons(&state);
                    let closed = photon_number_twisted(&evolve(&spec), alpha, phi).unwrap();
                    assert!((*slot - closed).abs() < 1e-6);
                }
                let pair = summed_and_differenced(&evolve(&spec), alpha).unwrap();
                assert!((fock_twist[0] + fock_twist[1] - pair.tilde).abs() < 1e-6);
                assert!((fock_twist[0] - fock_twist[1] - pair.delta).abs() < 1e-6);

                // Shifted-pair δN_w for both readouts.
                let a = spec.at_position(2);
                let b = spec.at_position(-2);
                let untwisted = expected_photons(&run_walk_fock(&a, alpha, &space).unwrap())
                    - expected_photons(&run_walk_fock(&b, alpha, &space).unwrap());
                let closed = shifted_pair_delta(&a, &b, alpha, PairReadout::Untwisted).unwrap();
                assert!((untwisted - closed).abs() < 1e-6);
                let tilde = |s: &WalkSpec| -> f64 {
                    TWIST_PAIR
                        .iter()
                        .map(|&phi| {
                            expected_photons(
                                &run_walk_fock(&s.with_phi(phi), alpha, &space).unwrap(),
                            )
                        })
                        .sum()
                };
                let twisted = tilde(&a) - tilde(&b);
                let closed = shifted_pair_delta(&a, &b, alpha, PairReadout::TwistPair).unwrap();
                assert!((twisted - closed).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn twist_phase_on_fock_side_has_no_other_effect() {
    // A full-turn twist is the identity on the circuit as well.
    let alpha = 0.8;
    let spec = WalkSpec::new(
        CoinAngles::new(0.5, 1.9).unwrap(),
        0.0,
        4,
        1,
        SpinAmplitude::spin_up(),
    )
    .unwrap();
    let space = FockSpace::for_walk(&spec, alpha);
    let plain = run_walk_fock(&spec, alpha, &space).unwrap();
    let turned = run_walk_fock(&spec.with_phi(PI), alpha, &space).unwrap();
    // R_z(2π) = −1 applied 2N times.
    let overlap = plain.inner(&turned);
    assert!((overlap - 1.0).norm() < 1e-10);
}
