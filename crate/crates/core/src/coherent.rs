// SPDX-License-Identifier: Apache-2.0

//! Walks on the coherent-state lattice `|xα⟩`.
//!
//! The walk amplitudes `A_{x,σ}` are the same as on the integer line; only
//! the basis changes. Coherent states overlap, `⟨xα|yα⟩ = e^{−(x−y)²α²/2}`,
//! so every observable here is an exact double sum against that Gram matrix
//! rather than a truncated series. Spin sectors are orthogonal and handled
//! independently.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::walk::{distribution, evolve, moment, PositionDistribution, Spin, WalkSpec, WalkState};
use crate::C64;

/// Largest accepted condition number of a (column-equilibrated) fit.
pub const MAX_FIT_CONDITION: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoherentError {
    #[error("lattice spacing must be a positive finite number, got {0}")]
    InvalidAlpha(f64),
    #[error("site {x}: {distinct} distinct alphas, need at least {required}")]
    InsufficientSamples {
        x: i64,
        distinct: usize,
        required: usize,
    },
    #[error("site {x}: fit condition number {condition:e} exceeds the limit")]
    IllConditioned { x: i64, condition: f64 },
    #[error("fit degree must be at least 2, got {0}")]
    DegreeTooSmall(usize),
    #[error("readout series is empty")]
    EmptySeries,
    #[error("readout for site {x} at alpha {alpha} is not a probability: {p}")]
    InvalidReadout { x: i64, alpha: f64, p: f64 },
    #[error("shifted pair needs a nonzero shift")]
    DegenerateShift,
    #[error("shifted pair mismatch: {0}")]
    MismatchedPair(String),
}

fn check_alpha(alpha: f64) -> Result<(), CoherentError> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(())
    } else {
        Err(CoherentError::InvalidAlpha(alpha))
    }
}

/// Lattice spacing `α` (real) and the twist `φ` the amplitudes carry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoherentParams {
    alpha: f64,
    phi: f64,
}

impl CoherentParams {
    pub fn new(alpha: f64, phi: f64) -> Result<Self, CoherentError> {
        check_alpha(alpha)?;
        Ok(CoherentParams { alpha, phi })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// `|ψ⟩ = Σ A_{x,σ} |xα, σ⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherentWalkState {
    base: WalkState,
    params: CoherentParams,
}

impl CoherentWalkState {
    /// Use the amplitudes as given; any twist must already be applied.
    pub fn new(base: WalkState, params: CoherentParams) -> Self {
        CoherentWalkState { base, params }
    }

    /// Apply the twist of `params` to untwisted amplitudes.
    pub fn from_untwisted(state: &WalkState, params: CoherentParams) -> Self {
        CoherentWalkState {
            base: apply_twist(state, params.phi),
            params,
        }
    }

    pub fn base(&self) -> &WalkState {
        &self.base
    }

    pub fn params(&self) -> &CoherentParams {
        &self.params
    }

    pub fn alpha(&self) -> f64 {
        self.params.alpha
    }
}

/// Multiply `A_x` by `e^{−ixφ}`.
///
/// Running the walk with `R_z(2φ)` after each translation gives exactly
/// these amplitudes times the global phase `e^{imφ}` (`m` the start site):
/// every hop by `±1` picks up `e^{∓iφ}`.
pub fn apply_twist(state: &WalkState, phi: f64) -> WalkState {
    if phi == 0.0 {
        return state.clone();
    }
    state.map_phase(|x| C64::from_polar(1.0, -(x as f64) * phi))
}

/// `⟨xα|yα⟩ = e^{−(x−y)²α²/2}` for real `α`.
pub fn coherent_overlap(x: i64, y: i64, alpha: f64) -> f64 {
    let d = (x - y) as f64;
    (-0.5 * d * d * alpha * alpha).exp()
}

/// Gram matrix of `{|xα⟩}` over the given labels.
pub fn gram_matrix(positions: &[i64], alpha: f64) -> DMatrix<f64> {
    let n = positions.len();
    DMatrix::from_fn(n, n, |i, j| {
        coherent_overlap(positions[i], positions[j], alpha)
    })
}

/// Whether a symmetric matrix admits a Cholesky factorization.
pub fn is_positive_definite(matrix: &DMatrix<f64>) -> bool {
    matrix.clone().cholesky().is_some()
}

/// Overlaps indexed by site separation, `0..len`.
fn overlap_table(len: usize, alpha: f64) -> Vec<f64> {
    (0..len as i64)
        .map(|d| coherent_overlap(0, d, alpha))
        .collect()
}

fn sector(state: &WalkState, spin: Spin) -> Vec<C64> {
    state
        .amplitudes()
        .iter()
        .map(|a| a.component(spin))
        .collect()
}

/// `Σ_{i,j} conj(a_i) a_j w(i, j) g(|i−j|)` for one spin sector.
fn gram_form(a: &[C64], table: &[f64], weight: impl Fn(usize, usize) -> f64) -> f64 {
    let mut total = 0.0;
    for i in 0..a.len() {
        if a[i].norm_sqr() == 0.0 {
            continue;
        }
        let mut row = C64::new(0.0, 0.0);
        for j in 0..a.len() {
            let g = table[i.abs_diff(j)];
            if g == 0.0 {
                continue;
            }
            row += a[j] * (g * weight(i, j));
        }
        total += (a[i].conj() * row).re;
    }
    total
}

/// `⟨ψ|ψ⟩ = Σ_σ Σ_{x,y} A*_{x,σ} A_{y,σ} ⟨xα|yα⟩`.
pub fn physical_norm(cs: &CoherentWalkState) -> f64 {
    let table = overlap_table(cs.base.len(), cs.alpha());
    Spin::BOTH
        .iter()
        .map(|&s| gram_form(&sector(&cs.base, s), &table, |_, _| 1.0))
        .sum()
}

/// `P(xα) = ⟨ψ|Π(xα)|ψ⟩ / ⟨ψ|ψ⟩` with `Π(xα) = |xα⟩⟨xα|` on each spin.
pub fn projective_probability(cs: &CoherentWalkState, x: i64) -> f64 {
    let alpha = cs.alpha();
    let mut total = 0.0;
    for spin in Spin::BOTH {
        let projection: C64 = cs
            .base
            .iter()
            .map(|(y, a)| a.component(spin) * coherent_overlap(x, y, alpha))
            .sum();
        total += projection.norm_sqr();
    }
    total / physical_norm(cs)
}

/// `N_w = ⟨a†a⟩`, using `⟨xα|a†a|yα⟩ = xyα² ⟨xα|yα⟩`.
pub fn photon_number(cs: &CoherentWalkState) -> f64 {
    let alpha = cs.alpha();
    let table = overlap_table(cs.base.len(), alpha);
    let min = cs.base.min_position();
    let label = |i: usize| (min + i as i64) as f64;
    let mut numerator = 0.0;
    let mut norm = 0.0;
    for spin in Spin::BOTH {
        let a = sector(&cs.base, spin);
        numerator += gram_form(&a, &table, |i, j| label(i) * label(j));
        norm += gram_form(&a, &table, |_, _| 1.0);
    }
    alpha * alpha * numerator / norm
}

fn cross_sum(state: &WalkState, m: usize, part: impl Fn(C64) -> f64) -> f64 {
    let mut total = 0.0;
    let amps = state.amplitudes();
    let min = state.min_position();
    for i in 0..amps.len().saturating_sub(m) {
        let x = (min + i as i64) as f64;
        let weight = x * (x + m as f64);
        for spin in Spin::BOTH {
            let product = amps[i].component(spin).conj() * amps[i + m].component(spin);
            total += weight * part(product);
        }
    }
    total
}

/// `C(m) = Σ_σ Σ_x x(x+m) · 2Re(A*_{x,σ} A_{x+m,σ})`; `C(0) = 2 M2`.
pub fn cross_moment(state: &WalkState, m: usize) -> f64 {
    cross_sum(state, m, |z| 2.0 * z.re)
}

/// `Σ_σ Σ_x x(x+m) Im(A*_{x,σ} A_{x+m,σ})`, the term that must vanish for
/// the `cos(mφ)` expansion of the twisted photon number to hold.
pub fn cross_moment_imag(state: &WalkState, m: usize) -> f64 {
    cross_sum(state, m, |z| z.im)
}

/// `I(m) = C(m) / (2N²)`; `I(0) = M2/N²`.
pub fn script_i(state: &WalkState, m: usize, steps: usize) -> f64 {
    let n = steps as f64;
    cross_moment(state, m) / (2.0 * n * n)
}

/// Photon number of the `R_z(2φ)` walk, from the untwisted amplitudes.
pub fn photon_number_twisted(
    state: &WalkState,
    alpha: f64,
    phi: f64,
) -> Result<f64, CoherentError> {
    let params = CoherentParams::new(alpha, phi)?;
    Ok(photon_number(&CoherentWalkState::from_untwisted(
        state, params,
    )))
}

/// `α²[M2 + Σ_{m≥1} e^{−m²α²/2} cos(mφ) C(m)]`, the cosine expansion of the
/// twisted photon number. Equals [`photon_number_twisted`] when the state is
/// normalized and [`cross_moment_imag`] vanishes.
pub fn photon_number_series(state: &WalkState, alpha: f64, phi: f64) -> f64 {
    let m2 = moment(&distribution(state), 2);
    let mut total = m2;
    for m in 1..state.len() {
        let envelope = (-0.5 * (m * m) as f64 * alpha * alpha).exp();
        if envelope == 0.0 {
            break;
        }
        total += envelope * (m as f64 * phi).cos() * cross_moment(state, m);
    }
    alpha * alpha * total
}

/// Sum and difference of the photon numbers at `φ = π/8` and `φ = 3π/8`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwistPair {
    /// `N_w(π/8) + N_w(3π/8) ≈ 2α² M2`.
    pub tilde: f64,
    /// `N_w(π/8) − N_w(3π/8)`, dominated by the `C(2)` term.
    pub delta: f64,
}

pub const TWIST_PAIR: [f64; 2] = [PI / 8.0, 3.0 * PI / 8.0];

pub fn summed_and_differenced(state: &WalkState, alpha: f64) -> Result<TwistPair, CoherentError> {
    let low = photon_number_twisted(state, alpha, TWIST_PAIR[0])?;
    let high = photon_number_twisted(state, alpha, TWIST_PAIR[1])?;
    Ok(TwistPair {
        tilde: low + high,
        delta: low - high,
    })
}

/// `2α² Σ_{m≥6} e^{−m²α²/2} |C(m)|`, bounding `|Ñ_w − 2α² M2|`: the
/// `m = 2` terms cancel between the two twists and `cos(4φ)` vanishes at both.
pub fn twist_pair_tail_bound(state: &WalkState, alpha: f64) -> f64 {
    cross_tail(state, alpha, 6)
}

/// `Σ_{m≥1} 2 e^{−m²α²/2} |C(m)|`, bounding `|N_w/α² − M2|` at `φ = 0`.
pub fn orthogonal_limit_bound(state: &WalkState, alpha: f64) -> f64 {
    cross_tail(state, alpha, 1) / (alpha * alpha)
}

fn cross_tail(state: &WalkState, alpha: f64, from: usize) -> f64 {
    let mut total = 0.0;
    for m in from..state.len() {
        let envelope = (-0.5 * (m * m) as f64 * alpha * alpha).exp();
        total += 2.0 * envelope * cross_moment(state, m).abs();
    }
    alpha * alpha * total
}

/// How the shifted pair of walks is read out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PairReadout {
    /// One untwisted photon number per walk: `ΔN_w ≈ 4mα² M1`.
    Untwisted,
    /// `Ñ_w` of each walk: `δN_w ≈ 8mα² M1`.
    TwistPair,
}

impl PairReadout {
    /// Coefficient of `m α² M1` in the delta.
    pub fn factor(self) -> f64 {
        match self {
            PairReadout::Untwisted => 4.0,
            PairReadout::TwistPair => 8.0,
        }
    }
}

/// `N(walk from +m) − N(walk from −m)` for two otherwise identical walks.
///
/// With the untwisted readout each walk contributes its photon number at the
/// walk's own `φ`; with the twist-pair readout each contributes `Ñ_w`, and the
/// specs' `φ` is ignored. Returns exactly `0` for `m = 0`.
pub fn shifted_pair_delta(
    spec_a: &WalkSpec,
    spec_b: &WalkSpec,
    alpha: f64,
    readout: PairReadout,
) -> Result<f64, CoherentError> {
    check_alpha(alpha)?;
    let m = spec_a.initial_position;
    if *spec_b != spec_a.at_position(-m) {
        return Err(CoherentError::MismatchedPair(format!(
            "second walk must equal the first started at {}",
            -m
        )));
    }
    if m == 0 {
        return Ok(0.0);
    }
    let readout_of = |spec: &WalkSpec| -> Result<f64, CoherentError> {
        match readout {
            PairReadout::Untwisted => {
                let params = CoherentParams::new(alpha, spec.phi)?;
                Ok(photon_number(&CoherentWalkState::new(evolve(spec), params)))
            }
            PairReadout::TwistPair => {
                let mut tilde = 0.0;
                for phi in TWIST_PAIR {
                    let twisted = spec.with_phi(phi);
                    let params = CoherentParams::new(alpha, phi)?;
                    tilde += photon_number(&CoherentWalkState::new(evolve(&twisted), params));
                }
                Ok(tilde)
            }
        }
    };
    Ok(readout_of(spec_a)? - readout_of(spec_b)?)
}

/// `M1 ≈ delta / (factor · m α²)`.
pub fn m1_from_shifted_pair(
    delta: f64,
    shift: i64,
    alpha: f64,
    readout: PairReadout,
) -> Result<f64, CoherentError> {
    check_alpha(alpha)?;
    if shift == 0 {
        return Err(CoherentError::DegenerateShift);
    }
    Ok(delta / (readout.factor() * shift as f64 * alpha * alpha))
}

/// One projective readout `P(xα)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Readout {
    pub alpha: f64,
    pub x: i64,
    pub p: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReadoutSeries {
    records: Vec<Readout>,
}

impl ReadoutSeries {
    pub fn new(records: Vec<Readout>) -> Self {
        ReadoutSeries { records }
    }

    /// Exact readouts of `state` (untwisted) at every site of its window.
    pub fn simulate(state: &WalkState, alphas: &[f64]) -> Result<Self, CoherentError> {
        let mut records = Vec::with_capacity(alphas.len() * state.len());
        for &alpha in alphas {
            let cs = CoherentWalkState::new(state.clone(), CoherentParams::new(alpha, 0.0)?);
            for x in state.min_position()..=state.max_position() {
                records.push(Readout {
                    alpha,
                    x,
                    p: projective_probability(&cs, x),
                });
            }
        }
        Ok(ReadoutSeries { records })
    }

    pub fn records(&self) -> &[Readout] {
        &self.records
    }

    pub fn push(&mut self, readout: Readout) {
        self.records.push(readout);
    }
}

/// Powers of `t = e^{−α²/2}` used to fit `P(xα)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FitBasis {
    /// `1, t, t², …, t^degree`.
    Monomial,
    /// `1` plus the `degree` smallest exponents `d1² + d2²`, where `d` runs
    /// over separations from `x` to the occupied sublattice
    /// `{residue + stride·j}`. These are exactly the powers that products of
    /// two overlaps `⟨xα|x′α⟩⟨x″α|xα⟩` can produce.
    Overlap { stride: u32, residue: i64 },
}

impl FitBasis {
    pub fn exponents(&self, x: i64, degree: usize) -> Vec<u32> {
        match *self {
            FitBasis::Monomial => (0..=degree as u32).collect(),
            FitBasis::Overlap { stride, residue } => {
                let stride = stride.max(1) as i64;
                let offset = (residue - x).rem_euclid(stride);
                // |d| for d ≡ offset (mod stride), smallest first.
                let mut separations: Vec<i64> = (-(degree as i64) - 2..=degree as i64 + 2)
                    .map(|j| (offset + stride * j).abs())
                    .collect();
                separations.sort_unstable();
                separations.dedup();
                let mut sums: Vec<u32> = separations
                    .iter()
                    .flat_map(|&a| separations.iter().map(move |&b| (a * a + b * b) as u32))
                    .filter(|&e| e > 0)
                    .collect();
                sums.sort_unstable();
                sums.dedup();
                std::iter::once(0)
                    .chain(sums.into_iter().take(degree))
                    .collect()
            }
        }
    }
}

/// Result of [`reconstruct_distribution`].
#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    /// Clamped to `[0, 1]` and renormalized.
    pub distribution: PositionDistribution,
    /// Fitted constant terms before clamping, per site.
    pub raw: BTreeMap<i64, f64>,
    /// Largest fit residual `|Vc − p|` over all sites and readouts.
    pub max_residual: f64,
    /// Largest condition number among the per-site fits.
    pub max_condition: f64,
}

/// Recover `P_N(x)` as the `t → 0` intercept `c0` of a least-squares fit of
/// the readouts `P(xα)` against powers of `t = e^{−α²/2}`.
pub fn reconstruct_distribution(
    series: &ReadoutSeries,
    basis: &FitBasis,
    degree: usize,
) -> Result<Reconstruction, CoherentError> {
    if degree < 2 {
        return Err(CoherentError::DegreeTooSmall(degree));
    }
    if series.records.is_empty() {
        return Err(CoherentError::EmptySeries);
    }
    let mut by_site: BTreeMap<i64, Vec<Readout>> = BTreeMap::new();
    for r in &series.records {
        check_alpha(r.alpha)?;
        if !(r.p.is_finite() && (0.0..=1.0 + 1e-12).contains(&r.p)) {
            return Err(CoherentError::InvalidReadout {
                x: r.x,
                alpha: r.alpha,
                p: r.p,
            });
        }
        by_site.entry(r.x).or_default().push(*r);
    }

    let mut raw = BTreeMap::new();
    let mut max_residual = 0.0_f64;
    let mut max_condition = 0.0_f64;
    for (&x, readouts) in &by_site {
        let mut alphas: Vec<u64> = readouts.iter().map(|r| r.alpha.to_bits()).collect();
        alphas.sort_unstable();
        alphas.dedup();
        if alphas.len() < degree + 1 {
            return Err(CoherentError::InsufficientSamples {
                x,
                distinct: alphas.len(),
                required: degree + 1,
            });
        }
        let exponents = basis.exponents(x, degree);
        let fit = fit_site(readouts, &exponents);
        if fit.condition.is_nan() || fit.condition > MAX_FIT_CONDITION {
            return Err(CoherentError::IllConditioned {
                x,
                condition: fit.condition,
            });
        }
        max_residual = max_residual.max(fit.residual);
        max_condition = max_condition.max(fit.condition);
        raw.insert(x, fit.intercept);
    }

    let min = *raw.keys().next().expect("non-empty series");
    let max = *raw.keys().next_back().expect("non-empty series");
    let mut probabilities = vec![0.0; (max - min + 1) as usize];
    for (&x, &c0) in &raw {
        probabilities[(x - min) as usize] = c0.clamp(0.0, 1.0);
    }
    let total: f64 = probabilities.iter().sum();
    if total > 0.0 {
        probabilities.iter_mut().for_each(|p| *p /= total);
    }
    Ok(Reconstruction {
        distribution: PositionDistribution::from_probabilities(min, probabilities),
        raw,
        max_residual,
        max_condition,
    })
}

struct SiteFit {
    intercept: f64,
    residual: f64,
    condition: f64,
}

fn fit_site(readouts: &[Readout], exponents: &[u32]) -> SiteFit {
    let rows = readouts.len();
    let cols = exponents.len();
    let design = DMatrix::from_fn(rows, cols, |i, j| {
        let t = (-0.5 * readouts[i].alpha * readouts[i].alpha).exp();
        t.powi(exponents[j] as i32)
    });
    // Column equilibration; the constant column is untouched.
    let scales: Vec<f64> = (0..cols)
        .map(|j| design.column(j).amax())
        .map(|s| if s > 0.0 { s } else { 1.0 })
        .collect();
    let mut scaled = design.clone();
    for (j, s) in scales.iter().enumerate() {
        scaled.column_mut(j).unscale_mut(*s);
    }
    let target = DVector::from_iterator(rows, readouts.iter().map(|r| r.p));
    let svd = scaled.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    let solution = svd
        .solve(&target, smax * f64::EPSILON)
        .unwrap_or_else(|_| DVector::zeros(cols));
    let coefficients = DVector::from_iterator(cols, (0..cols).map(|j| solution[j] / scales[j]));
    let residual = (&design * &coefficients - &target).amax();
    SiteFit {
        intercept: coefficients[0],
        residual,
        condition,
    }
}
