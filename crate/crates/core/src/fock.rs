// SPDX-License-Identifier: Apache-2.0

//! Brute-force model of a qubit (coin) coupled to a truncated cavity (walker).
//!
//! States live in `C² ⊗ C^D`, stored as the spin-up cavity block followed by
//! the spin-down block. The spin-dependent translation is compiled from
//! dispersive evolution and a displacement,
//!
//! ```text
//! T(α) = U(3t*) D(iα) U(t*),   g t* = π/2,
//! ```
//!
//! where `U(t)` gives spin-up the phase `e^{+i g t n}` and spin-down
//! `e^{−i g t n}`. With that sign `|xα,↑⟩ → |ixα⟩ → |i(x+1)α⟩ → |(x+1)α⟩`
//! and spin-down mirrors it, with no displacement phase for real `α`.
//!
//! Displacements use the eigen-decomposition of the truncated quadrature
//! `X = a + a†`: `D(ir) = exp(irX)`, and a general `β` is reached by the
//! phase rotation `e^{iϕ a†a}`.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::RangeInclusive;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

use crate::walk::{coin_rx, coin_rz, Mat2, Spin, SpinAmplitude, WalkSpec};
use crate::C64;

/// Largest Poisson tail mass a truncation may discard.
pub const TRUNCATION_TAIL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("{dim} cavity levels cannot hold amplitude {amplitude} (Poisson tail {tail:e})")]
    TruncationTooSmall {
        dim: usize,
        amplitude: f64,
        tail: f64,
    },
    #[error("cavity dimension must be positive")]
    EmptySpace,
    #[error("state dimension {found} does not match the space ({expected})")]
    DimensionMismatch { expected: usize, found: usize },
}

/// `P(n ≥ dim)` for a Poisson distribution of the given mean.
pub fn poisson_tail(mean: f64, dim: usize) -> f64 {
    if dim == 0 {
        return 1.0;
    }
    if mean <= 0.0 {
        return 0.0;
    }
    let log_pmf = |n: usize, log_factorial: f64| -mean + n as f64 * mean.ln() - log_factorial;
    let mut log_factorial = 0.0;
    if (dim as f64) <= mean + 1.0 {
        // Bulk of the mass is above the cut: 1 − CDF.
        let mut cdf = 0.0;
        for n in 0..dim {
            if n > 0 {
                log_factorial += (n as f64).ln();
            }
            cdf += log_pmf(n, log_factorial).exp();
        }
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    for n in 1..=dim {
        log_factorial += (n as f64).ln();
    }
    let mut n = dim;
    let mut term = log_pmf(n, log_factorial).exp();
    let mut tail = 0.0;
    // Terms decrease monotonically past the mean.
    while term > 0.0 && term > tail * 1e-17 {
        tail += term;
        n += 1;
        term *= mean / n as f64;
    }
    tail
}

/// Eigen-decomposition of the truncated quadrature `X = a + a†`.
struct Quadrature {
    vectors: DMatrix<f64>,
    values: Vec<f64>,
}

impl Quadrature {
    fn new(dim: usize) -> Self {
        let mut x = DMatrix::<f64>::zeros(dim, dim);
        for n in 1..dim {
            let s = (n as f64).sqrt();
            x[(n - 1, n)] = s;
            x[(n, n - 1)] = s;
        }
        let eigen = SymmetricEigen::new(x);
        Quadrature {
            values: eigen.eigenvalues.iter().copied().collect(),
            vectors: eigen.eigenvectors,
        }
    }

    /// `exp(irX) v`.
    fn apply_exp(&self, r: f64, v: &[C64]) -> Vec<C64> {
        let dim = v.len();
        let mut projected = vec![C64::new(0.0, 0.0); dim];
        for (j, p) in projected.iter_mut().enumerate() {
            let column = self.vectors.column(j);
            let mut acc = C64::new(0.0, 0.0);
            for (vij, vi) in column.iter().zip(v) {
                acc += vi * *vij;
            }
            *p = acc * C64::from_polar(1.0, r * self.values[j]);
        }
        let mut out = vec![C64::new(0.0, 0.0); dim];
        for (j, p) in projected.iter().enumerate() {
            for (o, vij) in out.iter_mut().zip(self.vectors.column(j).iter()) {
                *o += p * *vij;
            }
        }
        out
    }
}

/// Decompositions shared by every space of the same dimension.
fn shared_quadrature(dim: usize) -> Arc<Quadrature> {
    type Slot = Arc<OnceLock<Arc<Quadrature>>>;
    static CACHE: OnceLock<Mutex<HashMap<usize, Slot>>> = OnceLock::new();
    let slot = {
        let mut cache = CACHE
            .get_or_init(Default::default)
            .lock()
            .expect("cache lock");
        Arc::clone(cache.entry(dim).or_default())
    };
    // Built outside the map lock so different dimensions decompose in parallel.
    Arc::clone(slot.get_or_init(|| Arc::new(Quadrature::new(dim))))
}

/// Cavity truncated to levels `0..dim`.
///
/// The quadrature decomposition is computed on first use and cached per
/// dimension for the life of the process.
#[derive(Clone)]
pub struct FockSpace {
    dim: usize,
    quadrature: OnceLock<Arc<Quadrature>>,
}

impl std::fmt::Debug for FockSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FockSpace").field("dim", &self.dim).finish()
    }
}

impl PartialEq for FockSpace {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
    }
}

impl FockSpace {
    pub fn new(dim: usize) -> Result<Self, FockError> {
        if dim == 0 {
            return Err(FockError::EmptySpace);
        }
        Ok(FockSpace {
            dim,
            quadrature: OnceLock::new(),
        })
    }

    /// `D = ⌈μ + 10√μ + 20⌉` with `μ = |β_max|²`.
    pub fn for_amplitude(max_amplitude: f64) -> Self {
        let mu = max_amplitude * max_amplitude;
        let dim = (mu + 10.0 * mu.sqrt() + 20.0).ceil() as usize;
        FockSpace::new(dim).expect("dimension is at least 20")
    }

    /// Space large enough for every coherent amplitude the walk visits.
    pub fn for_walk(spec: &WalkSpec, alpha: f64) -> Self {
        FockSpace::for_amplitude(spec.max_excursion() as f64 * alpha)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Fail unless a coherent state of this amplitude loses less than
    /// [`TRUNCATION_TAIL`] to the cut.
    pub fn check_amplitude(&self, amplitude: f64) -> Result<(), FockError> {
        let tail = poisson_tail(amplitude * amplitude, self.dim);
        if tail < TRUNCATION_TAIL {
            Ok(())
        } else {
            Err(FockError::TruncationTooSmall {
                dim: self.dim,
                amplitude,
                tail,
            })
        }
    }

    fn quadrature(&self) -> &Quadrature {
        self.quadrature.get_or_init(|| shared_quadrature(self.dim))
    }
}

/// Truncated `|β⟩`, renormalized after truncation.
pub fn coherent_vector(beta: C64, space: &FockSpace) -> Result<Vec<C64>, FockError> {
    space.check_amplitude(beta.norm())?;
    Ok(coherent_vector_truncated(beta, space.dim))
}

/// [`coherent_vector`] without the adequacy check.
pub fn coherent_vector_truncated(beta: C64, dim: usize) -> Vec<C64> {
    let r = beta.norm();
    let mut v = Vec::with_capacity(dim);
    if r == 0.0 {
        v.push(C64::new(1.0, 0.0));
        v.resize(dim, C64::new(0.0, 0.0));
        return v;
    }
    let theta = beta.arg();
    let mut half_log_factorial = 0.0;
    for n in 0..dim {
        if n > 0 {
            half_log_factorial += 0.5 * (n as f64).ln();
        }
        let magnitude = (-0.5 * r * r + n as f64 * r.ln() - half_log_factorial).exp();
        v.push(C64::from_polar(magnitude, n as f64 * theta));
    }
    let norm = v.iter().map(C64::norm_sqr).sum::<f64>().sqrt();
    v.iter_mut().for_each(|c| *c /= norm);
    v
}

/// `e^{iϕ a†a} v`.
fn rotate(phase: f64, v: &[C64]) -> Vec<C64> {
    v.iter()
        .enumerate()
        .map(|(n, c)| c * C64::from_polar(1.0, phase * n as f64))
        .collect()
}

/// `D(β) v` on the truncated cavity.
pub fn apply_displacement(beta: C64, v: &[C64], space: &FockSpace) -> Vec<C64> {
    let r = beta.norm();
    if r == 0.0 {
        return v.to_vec();
    }
    // D(β) = R(ϕ) D(i|β|) R(−ϕ) with e^{iϕ}·i|β| = β.
    let phase = beta.arg() - FRAC_PI_2;
    let rotated = rotate(-phase, v);
    let displaced = space.quadrature().apply_exp(r, &rotated);
    rotate(phase, &displaced)
}

/// Dense `D(β) = exp(βa† − β*a)` on the truncated cavity.
pub fn displacement_op(beta: C64, space: &FockSpace) -> Result<DMatrix<C64>, FockError> {
    space.check_amplitude(beta.norm())?;
    let dim = space.dim;
    let mut out = DMatrix::<C64>::zeros(dim, dim);
    let mut basis = vec![C64::new(0.0, 0.0); dim];
    for j in 0..dim {
        basis[j] = C64::new(1.0, 0.0);
        let column = apply_displacement(beta, &basis, space);
        for (i, c) in column.into_iter().enumerate() {
            out[(i, j)] = c;
        }
        basis[j] = C64::new(0.0, 0.0);
    }
    Ok(out)
}

/// Phase `e^{±i·gt·n}` picked up by level `n` for spin up (`+`) or down (`−`).
fn dispersive_phase(gt: f64, spin: Spin, n: usize) -> C64 {
    let sign = match spin {
        Spin::Up => 1.0,
        Spin::Down => -1.0,
    };
    // Reduce gt·n modulo 2π before the exponential so that equivalent
    // phases (3π/2 vs −π/2) agree to rounding.
    let angle = (gt * n as f64).rem_euclid(2.0 * PI);
    C64::from_polar(1.0, sign * angle)
}

/// Dense diagonal `U(t)` for the qubit⊗cavity space (`2D × 2D`).
pub fn dispersive_op(gt: f64, space: &FockSpace) -> DMatrix<C64> {
    let dim = space.dim;
    let mut out = DMatrix::<C64>::zeros(2 * dim, 2 * dim);
    for (block, spin) in Spin::BOTH.into_iter().enumerate() {
        for n in 0..dim {
            out[(block * dim + n, block * dim + n)] = dispersive_phase(gt, spin, n);
        }
    }
    out
}

/// State of qubit ⊗ cavity.
#[derive(Clone, Debug, PartialEq)]
pub struct QubitCavityState {
    dim: usize,
    amplitudes: Vec<C64>,
}

impl QubitCavityState {
    pub fn from_amplitudes(dim: usize, amplitudes: Vec<C64>) -> Result<Self, FockError> {
        if amplitudes.len() != 2 * dim {
            return Err(FockError::DimensionMismatch {
                expected: 2 * dim,
                found: amplitudes.len(),
            });
        }
        Ok(QubitCavityState { dim, amplitudes })
    }

    /// `spin ⊗ cavity`.
    pub fn product(spin: SpinAmplitude, cavity: &[C64]) -> Self {
        let dim = cavity.len();
        let mut amplitudes = Vec::with_capacity(2 * dim);
        amplitudes.extend(cavity.iter().map(|c| c * spin.up));
        amplitudes.extend(cavity.iter().map(|c| c * spin.down));
        QubitCavityState { dim, amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn cavity(&self, spin: Spin) -> &[C64] {
        match spin {
            Spin::Up => &self.amplitudes[..self.dim],
            Spin::Down => &self.amplitudes[self.dim..],
        }
    }

    fn cavity_mut(&mut self, spin: Spin) -> &mut [C64] {
        let dim = self.dim;
        match spin {
            Spin::Up => &mut self.amplitudes[..dim],
            Spin::Down => &mut self.amplitudes[dim..],
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(C64::norm_sqr).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &QubitCavityState) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    fn apply_coin(&mut self, coin: &Mat2) {
        let m = coin.0;
        let (up, down) = self.amplitudes.split_at_mut(self.dim);
        for (u, d) in up.iter_mut().zip(down.iter_mut()) {
            let (a, b) = (*u, *d);
            *u = m[0][0] * a + m[0][1] * b;
            *d = m[1][0] * a + m[1][1] * b;
        }
    }
}

/// One primitive of a qubit–cavity control sequence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gate {
    /// Dispersive evolution for phase `gt` per photon.
    Dispersive { gt: f64 },
    /// Cavity displacement `D(β)`.
    Displace { beta: C64 },
    /// `σ_x` on the qubit.
    QubitX,
    /// `R_x(2θ) = exp(−iθσ_x)` on the qubit.
    QubitRx { theta: f64 },
    /// `R_z(2φ) = exp(−iφσ_z)` on the qubit.
    QubitRz { phi: f64 },
}

/// Gates in time order (first element acts first).
#[derive(Clone, Debug, PartialEq, Default)]
pub struct GateSequence {
    gates: Vec<Gate>,
}

impl GateSequence {
    pub fn new(gates: Vec<Gate>) -> Self {
        GateSequence { gates }
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn extend(&mut self, other: &GateSequence) {
        self.gates.extend_from_slice(&other.gates);
    }

    pub fn push(&mut self, gate: Gate) {
        self.gates.push(gate);
    }

    pub fn apply(&self, state: &QubitCavityState, space: &FockSpace) -> QubitCavityState {
        let mut current = state.clone();
        for gate in &self.gates {
            apply_gate(gate, &mut current, space);
        }
        current
    }

    /// Dense `2D × 2D` matrix of the whole sequence.
    pub fn to_dense(&self, space: &FockSpace) -> DMatrix<C64> {
        let dim = space.dim;
        let mut out = DMatrix::<C64>::zeros(2 * dim, 2 * dim);
        let mut basis = vec![C64::new(0.0, 0.0); 2 * dim];
        for j in 0..2 * dim {
            basis[j] = C64::new(1.0, 0.0);
            let input = QubitCavityState::from_amplitudes(dim, basis.clone())
                .expect("basis vector has the right length");
            let column = self.apply(&input, space);
            for (i, c) in column.amplitudes.into_iter().enumerate() {
                out[(i, j)] = c;
            }
            basis[j] = C64::new(0.0, 0.0);
        }
        out
    }
}

fn apply_gate(gate: &Gate, state: &mut QubitCavityState, space: &FockSpace) {
    match *gate {
        Gate::Dispersive { gt } => {
            for spin in Spin::BOTH {
                for (n, c) in state.cavity_mut(spin).iter_mut().enumerate() {
                    *c *= dispersive_phase(gt, spin, n);
                }
            }
        }
        Gate::Displace { beta } => {
            for spin in Spin::BOTH {
                let displaced = apply_displacement(beta, state.cavity(spin), space);
                state.cavity_mut(spin).copy_from_slice(&displaced);
            }
        }
        Gate::QubitX => {
            let dim = state.dim;
            let (up, down) = state.amplitudes.split_at_mut(dim);
            up.swap_with_slice(down);
        }
        Gate::QubitRx { theta } => state.apply_coin(&coin_rx(theta)),
        Gate::QubitRz { phi } => state.apply_coin(&coin_rz(phi)),
    }
}

/// Gate sequence realizing `T(α)`: spin-up `x → x+1`, spin-down `x → x−1`.
///
/// The plain form is `U(t*) → D(iα) → U(3t*)`; the echo form replaces
/// `U(3t*)` by `σ_x U(t*) σ_x`, which is the same operator because photon
/// numbers are integers.
pub fn compile_translation(alpha: f64, echo: bool) -> GateSequence {
    let quarter = FRAC_PI_2;
    let kick = Gate::Displace {
        beta: C64::new(0.0, alpha),
    };
    let gates = if echo {
        vec![
            Gate::Dispersive { gt: quarter },
            kick,
            Gate::QubitX,
            Gate::Dispersive { gt: quarter },
            Gate::QubitX,
        ]
    } else {
        vec![
            Gate::Dispersive { gt: quarter },
            kick,
            Gate::Dispersive { gt: 3.0 * quarter },
        ]
    };
    GateSequence::new(gates)
}

/// The full `N`-step circuit for a walk spec.
pub fn compile_walk(spec: &WalkSpec, alpha: f64, echo: bool) -> GateSequence {
    let translation = compile_translation(alpha, echo);
    let mut sequence = GateSequence::default();
    for _ in 0..spec.steps {
        for theta in [spec.angles.theta1(), spec.angles.theta2()] {
            sequence.push(Gate::QubitRx { theta });
            sequence.extend(&translation);
            if spec.phi != 0.0 {
                sequence.push(Gate::QubitRz { phi: spec.phi });
            }
        }
    }
    sequence
}

/// Prepare `|mα⟩ ⊗ spin` and run the compiled walk.
pub fn run_walk_fock(
    spec: &WalkSpec,
    alpha: f64,
    space: &FockSpace,
) -> Result<QubitCavityState, FockError> {
    run_walk_fock_with(spec, alpha, space, false)
}

pub fn run_walk_fock_with(
    spec: &WalkSpec,
    alpha: f64,
    space: &FockSpace,
    echo: bool,
) -> Result<QubitCavityState, FockError> {
    space.check_amplitude(spec.max_excursion() as f64 * alpha)?;
    let start = coherent_vector(C64::new(spec.initial_position as f64 * alpha, 0.0), space)?;
    let initial = QubitCavityState::product(spec.initial_spin, &start);
    Ok(compile_walk(spec, alpha, echo).apply(&initial, space))
}

/// `⟨a†a⟩`, traced over the qubit.
pub fn expected_photons(state: &QubitCavityState) -> f64 {
    let mut weighted = 0.0;
    for spin in Spin::BOTH {
        for (n, c) in state.cavity(spin).iter().enumerate() {
            weighted += n as f64 * c.norm_sqr();
        }
    }
    weighted / state.norm_sqr()
}

/// `Σ_σ |⟨xα, σ|ψ⟩|²`.
pub fn projective_probability(
    state: &QubitCavityState,
    x: i64,
    alpha: f64,
    space: &FockSpace,
) -> Result<f64, FockError> {
    let probe = coherent_vector(C64::new(x as f64 * alpha, 0.0), space)?;
    let mut total = 0.0;
    for spin in Spin::BOTH {
        let overlap: C64 = probe
            .iter()
            .zip(state.cavity(spin))
            .map(|(p, c)| p.conj() * c)
            .sum();
        total += overlap.norm_sqr();
    }
    Ok(total / state.norm_sqr())
}

/// Overlap of the sequence output with the ideal translation target.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TranslationOverlap {
    pub site: i64,
    pub spin: Spin,
    /// `⟨(x±1)α, σ | seq | xα, σ⟩`.
    pub overlap: C64,
    /// Norm of the sequence output.
    pub output_norm: f64,
}

/// Run `seq` on `|xα, σ⟩` for every site and spin and compare with the ideal
/// `|(x±1)α, σ⟩`.
pub fn translation_overlaps(
    seq: &GateSequence,
    alpha: f64,
    sites: RangeInclusive<i64>,
    space: &FockSpace,
) -> Result<Vec<TranslationOverlap>, FockError> {
    let reach = sites.start().unsigned_abs().max(sites.end().unsigned_abs()) + 1;
    space.check_amplitude(reach as f64 * alpha)?;
    Ok(translation_overlaps_unchecked(seq, alpha, sites, space))
}

/// [`translation_overlaps`] without the truncation check.
pub fn translation_overlaps_unchecked(
    seq: &GateSequence,
    alpha: f64,
    sites: RangeInclusive<i64>,
    space: &FockSpace,
) -> Vec<TranslationOverlap> {
    let mut out = Vec::new();
    for site in sites {
        for (spin, spinor, hop) in [
            (Spin::Up, SpinAmplitude::spin_up(), 1),
            (Spin::Down, SpinAmplitude::spin_down(), -1),
        ] {
            let cavity = coherent_vector_truncated(C64::new(site as f64 * alpha, 0.0), space.dim);
            let input = QubitCavityState::product(spinor, &cavity);
            let output = seq.apply(&input, space);
            let ideal =
                coherent_vector_truncated(C64::new((site + hop) as f64 * alpha, 0.0), space.dim);
            let target = QubitCavityState::product(spinor, &ideal);
            out.push(TranslationOverlap {
                site,
                spin,
                overlap: target.inner(&output),
                output_norm: output.norm_sqr().sqrt(),
            });
        }
    }
    out
}

/// Worst-case `|⟨target|seq·input⟩|²` over sites and spins.
pub fn sequence_fidelity(
    seq: &GateSequence,
    alpha: f64,
    sites: RangeInclusive<i64>,
    space: &FockSpace,
) -> Result<f64, FockError> {
    Ok(worst_fidelity(&translation_overlaps(
        seq, alpha, sites, space,
    )?))
}

/// [`sequence_fidelity`] without the truncation check.
pub fn sequence_fidelity_unchecked(
    seq: &GateSequence,
    alpha: f64,
    sites: RangeInclusive<i64>,
    space: &FockSpace,
) -> f64 {
    worst_fidelity(&translation_overlaps_unchecked(seq, alpha, sites, space))
}

fn worst_fidelity(overlaps: &[TranslationOverlap]) -> f64 {
    overlaps
        .iter()
        .map(|o| o.overlap.norm_sqr())
        .fold(f64::INFINITY, f64::min)
}
