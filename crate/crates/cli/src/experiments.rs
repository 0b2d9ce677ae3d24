// SPDX-License-Identifier: Apache-2.0

//! The six batch experiments. Each one expands the config into independent
//! jobs, runs them on a worker pool and collects rows in job order.

use std::f64::consts::PI;

use cohwalk_core::band::{ballistic_coefficient, m1_asymptotic, winding_number, BandError, KGrid};
use cohwalk_core::coherent::{
    photon_number, photon_number_twisted, projective_probability, reconstruct_distribution,
    script_i, shifted_pair_delta, summed_and_differenced, CoherentError, CoherentParams,
    CoherentWalkState, FitBasis, PairReadout, ReadoutSeries,
};
use cohwalk_core::fock::{
    compile_translation, expected_photons, projective_probability as fock_probability,
    run_walk_fock, translation_overlaps, FockError, FockSpace,
};
use cohwalk_core::walk::{distribution, evolve, moment, CoinAngles, WalkError, WalkSpec};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{BasisChoice, ConfigError, Experiment, ExperimentConfig, ReadoutChoice};
use crate::table::{Cell, ResultTable};

/// Distance in θ2 from a critical angle below which k-space quantities are
/// not evaluated.
pub const CRITICAL_MARGIN: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("truncation: {0}")]
    Truncation(#[from] FockError),
    #[error("coherent readout: {0}")]
    Coherent(#[from] CoherentError),
    #[error("walk: {0}")]
    Walk(#[from] WalkError),
    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

/// `θ2` within [`CRITICAL_MARGIN`] of `θ1` or `π − θ1`, where the gap closes.
pub fn near_critical(theta1: f64, theta2: f64) -> bool {
    (theta2 - theta1).abs() < CRITICAL_MARGIN || (theta2 - (PI - theta1)).abs() < CRITICAL_MARGIN
}

/// Run a validated config. Validation failures are returned as
/// [`ConfigError::Invalid`].
pub fn run(config: &ExperimentConfig) -> Result<ResultTable, RunError> {
    let diagnostics = crate::config::validate(config);
    if !diagnostics.is_empty() {
        return Err(ConfigError::Invalid(diagnostics).into());
    }
    let experiment = config.experiment.expect("validated");
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(workers) = config.workers {
        pool = pool.num_threads(workers);
    }
    let pool = pool.build()?;
    pool.install(|| match experiment {
        Experiment::PhaseDiagram => phase_diagram(config),
        Experiment::MomentsSweep => moments_sweep(config),
        Experiment::CssSweep => css_sweep(config),
        Experiment::Reconstruct => reconstruct(config),
        Experiment::OracleCheck => oracle_check(config),
        Experiment::CompileCheck => compile_check(config),
    })
}

/// Evaluate jobs in parallel and append their rows in job order.
fn collect<J, F>(columns: Vec<&'static str>, jobs: Vec<J>, f: F) -> Result<ResultTable, RunError>
where
    J: Sync,
    F: Fn(&J) -> Result<Vec<Vec<Cell>>, RunError> + Sync,
{
    let results: Vec<_> = jobs.par_iter().map(&f).collect();
    let mut table = ResultTable::new(columns);
    for rows in results {
        for row in rows? {
            table.push(row);
        }
    }
    Ok(table)
}

/// Undefined k-space quantities become empty cells.
fn band_cell(value: Result<f64, BandError>, what: &str, theta1: f64, theta2: f64) -> Cell {
    match value {
        Ok(v) => Some(v),
        Err(e) => {
            log::warn!("{what} skipped at theta1={theta1}, theta2={theta2}: {e}");
            None
        }
    }
}

fn angles(theta1: f64, theta2: f64) -> Result<CoinAngles, RunError> {
    Ok(CoinAngles::new(theta1, theta2)?)
}

fn product<A: Copy, B: Copy>(a: &[A], b: &[B]) -> Vec<(A, B)> {
    a.iter()
        .flat_map(|&x| b.iter().map(move |&y| (x, y)))
        .collect()
}

fn walk_spec(
    config: &ExperimentConfig,
    spin: usize,
    theta1: f64,
    theta2: f64,
    steps: usize,
    phi: f64,
) -> Result<WalkSpec, RunError> {
    let amplitude = config.initial_spins[spin].amplitude(theta1);
    Ok(WalkSpec::new(
        angles(theta1, theta2)?,
        phi,
        steps,
        config.initial_position,
        amplitude,
    )?)
}

fn phase_diagram(config: &ExperimentConfig) -> Result<ResultTable, RunError> {
    let grid = KGrid::new(config.k_grid).expect("validated");
    let jobs = product(&config.theta1.values(), &config.theta2.values());
    collect(vec!["theta1", "theta2", "winding"], jobs, |&(t1, t2)| {
        let winding = if near_critical(t1, t2) {
            log::warn!("winding skipped near criticality at theta1={t1}, theta2={t2}");
            None
        } else {
            band_cell(
                winding_number(&angles(t1, t2)?, &grid).map(f64::from),
                "winding",
                t1,
                t2,
            )
        };
        Ok(vec![vec![Some(t1), Some(t2), winding]])
    })
}

/// `(spin index, θ1, θ2)` for every initial spin and angle pair.
fn spin_angle_jobs(config: &ExperimentConfig) -> Vec<(usize, f64, f64)> {
    let spins: Vec<usize> = (0..config.initial_spins.len()).collect();
    let pairs = product(&config.theta1.values(), &config.theta2.values());
    product(&spins, &pairs)
        .into_iter()
        .map(|(s, (t1, t2))| (s, t1, t2))
        .collect()
}

fn moments_sweep(config: &ExperimentConfig) -> Result<ResultTable, RunError> {
    let grid = KGrid::new(config.k_grid).expect("validated");
    let columns = vec![
        "spin",
        "theta1",
        "theta2",
        "N",
        "M1",
        "M2",
        "L",
        "M1_asymptotic",
        "I2",
    ];
    collect(columns, spin_angle_jobs(config), |&(spin, t1, t2)| {
        let coin = angles(t1, t2)?;
        let critical = near_critical(t1, t2);
        if critical {
            log::warn!("k-space columns skipped near criticality at theta1={t1}, theta2={t2}");
        }
        let l = if critical {
            None
        } else {
            band_cell(ballistic_coefficient(&coin, &grid), "L", t1, t2)
        };
        let chirality = config.initial_spins[spin].chirality();
        let mut rows = Vec::new();
        for &steps in &config.steps {
            let spec = walk_spec(config, spin, t1, t2, steps, 0.0)?;
            let state = evolve(&spec);
            let dist = distribution(&state);
            let asymptotic = match chirality {
                Some(sign) if !critical => band_cell(
                    m1_asymptotic(steps, &coin, sign, &grid),
                    "M1_asymptotic",
                    t1,
                    t2,
                ),
                _ => None,
            };
            rows.push(vec![
                Some(spin as f64),
                Some(t1),
                Some(t2),
                Some(steps as f64),
                Some(moment(&dist, 1)),
                Some(moment(&dist, 2)),
                l,
                asymptotic,
                Some(script_i(&state, 2, steps)),
            ]);
        }
        Ok(rows)
    })
}

fn css_sweep(config: &ExperimentConfig) -> Result<ResultTable, RunError> {
    let columns = vec![
        "spin",
        "theta1",
        "theta2",
        "alpha",
        "N",
        "Nw",
        "M2",
        "tildeN",
        "deltaN",
        "deltaNw_shifted",
    ];
    let readout = match config.pair_readout {
        ReadoutChoice::TwistPair => PairReadout::TwistPair,
        ReadoutChoice::Untwisted => PairReadout::Untwisted,
    };
    collect(columns, spin_angle_jobs(config), |&(spin, t1, t2)| {
        let mut rows = Vec::new();
        for &alpha in &config.alphas {
            for &steps in &config.steps {
                let spec = walk_spec(config, spin, t1, t2, steps, 0.0)?;
                let state = evolve(&spec);
                let nw = photon_number(&CoherentWalkState::new(
                    state.clone(),
                    CoherentParams::new(alpha, 0.0)?,
                ));
                let pair = summed_and_differenced(&state, alpha)?;
                let plus = spec.at_position(config.shift);
                let minus = spec.at_position(-config.shift);
                let shifted = shifted_pair_delta(&plus, &minus, alpha, readout)?;
                rows.push(vec![
                    Some(spin as f64),
                    Some(t1),
                    Some(t2),
                    Some(alpha),
                    Some(steps as f64),
                    Some(nw),
                    Some(moment(&distribution(&state), 2)),
                    Some(pair.tilde),
                    Some(pair.delta),
                    Some(shifted),
                ]);
            }
        }
        Ok(rows)
    })
}

fn reconstruct(config: &ExperimentConfig) -> Result<ResultTable, RunError> {
    let columns = vec![
        "spin", "theta1", "theta2", "N", "x", "P_walk", "P_fit", "c0_raw",
    ];
    let basis = match config.fit_basis {
        BasisChoice::Overlap => FitBasis::Overlap {
            stride: 2,
            residue: config.initial_position.rem_euclid(2),
        },
        BasisChoice::Monomial => FitBasis::Monomial,
    };
    collect(columns, spin_angle_jobs(config), |&(spin, t1, t2)| {
        let mut rows = Vec::new();
        for &steps in &config.steps {
            let state = evolve(&walk_spec(config, spin, t1, t2, steps, 0.0)?);
            let exact = distribution(&state);
            let series = ReadoutSeries::simulate(&state, &config.alphas)?;
            let fit = reconstruct_distribution(&series, &basis, config.degree)?;
            log::info!(
                "reconstruct theta2={t2} N={steps}: residual {:e}, condition {:e}",
                fit.max_residual,
                fit.max_condition
            );
            for (&x, &raw) in &fit.raw {
                rows.push(vec![
                    Some(spin as f64),
                    Some(t1),
                    Some(t2),
                    Some(steps as f64),
                    Some(x as f64),
                    Some(exact.get(x)),
                    Some(fit.distribution.get(x)),
                    Some(raw),
                ]);
            }
        }
        Ok(rows)
    })
}

fn oracle_check(config: &ExperimentConfig) -> Result<ResultTable, RunError> {
    let columns = vec![
        "spin",
        "theta1",
        "theta2",
        "N",
        "alpha",
        "phi",
        "dim",
        "Nw_closed",
        "Nw_fock",
        "Nw_error",
        "max_P_error",
    ];
    let phis: Vec<f64> = config.phis.iter().map(|p| p.0).collect();
    let settings = product(&config.steps, &product(&config.alphas, &phis));
    let jobs = product(&spin_angle_jobs(config), &settings);
    collect(columns, jobs, |&((spin, t1, t2), (steps, (alpha, phi)))| {
        let spec = walk_spec(config, spin, t1, t2, steps, phi)?;
        let space = match config.fock_dim {
            Some(dim) => FockSpace::new(dim)?,
            None => FockSpace::for_walk(&spec, alpha),
        };
        let fock = run_walk_fock(&spec, alpha, &space)?;
        let untwisted = evolve(&spec.with_phi(0.0));
        let closed = photon_number_twisted(&untwisted, alpha, phi)?;
        let measured = expected_photons(&fock);
        let cs = CoherentWalkState::new(evolve(&spec), CoherentParams::new(alpha, phi)?);
        let mut max_p_error = 0.0f64;
        for x in cs.base().min_position()..=cs.base().max_position() {
            let p = fock_probability(&fock, x, alpha, &space)?;
            max_p_error = max_p_error.max((p - projective_probability(&cs, x)).abs());
        }
        Ok(vec![vec![
            Some(spin as f64),
            Some(t1),
            Some(t2),
            Some(steps as f64),
            Some(alpha),
            Some(phi),
            Some(space.dim() as f64),
            Some(closed),
            Some(measured),
            Some((measured - closed).abs()),
            Some(max_p_error),
        ]])
    })
}

fn compile_check(config: &ExperimentConfig) -> Result<ResultTable, RunError> {
    let columns = vec![
        "alpha",
        "echo",
        "dim",
        "fidelity",
        "max_phase_error",
        "echo_diff",
    ];
    let [lo, hi] = config.sites;
    let reach = lo.unsigned_abs().max(hi.unsigned_abs()) + 1;
    collect(columns, config.alphas.clone(), |&alpha| {
        let space = match config.fock_dim {
            Some(dim) => FockSpace::new(dim)?,
            None => FockSpace::for_amplitude(reach as f64 * alpha),
        };
        let plain = compile_translation(alpha, false);
        let echo = compile_translation(alpha, true);
        let difference = (plain.to_dense(&space) - echo.to_dense(&space))
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        let mut rows = Vec::new();
        for (flag, seq) in [(0.0, &plain), (1.0, &echo)] {
            let overlaps = translation_overlaps(seq, alpha, lo..=hi, &space)?;
            let fidelity = overlaps
                .iter()
                .map(|o| o.overlap.norm_sqr())
                .fold(f64::INFINITY, f64::min);
            let phase = overlaps
                .iter()
                .map(|o| o.overlap.arg().abs())
                .fold(0.0, f64::max);
            rows.push(vec![
                Some(alpha),
                Some(flag),
                Some(space.dim() as f64),
                Some(fidelity),
                Some(phase),
                Some(difference),
            ]);
        }
        Ok(rows)
    })
}
