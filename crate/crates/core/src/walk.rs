// SPDX-License-Identifier: Apache-2.0

//! Exact state-vector evolution of the split-step walk on the integer line.
//!
//! One step is `T R_x(2θ2) T R_x(2θ1)` read right to left, with an optional
//! `R_z(2φ)` after each translation. `T` moves spin-up one site right and
//! spin-down one site left, so a walk of `N` steps from site `m` lives on
//! `[m − 2N, m + 2N]`; states are stored densely over that window.

use std::f64::consts::PI;

use thiserror::Error;

pub use crate::spinor::{Mat2, Spin, SpinAmplitude};
use crate::C64;

/// Tolerance for "unit norm" checks on user-provided spinors.
pub const NORM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WalkError {
    #[error("coin angle {name} = {value} is outside [0, π]")]
    AngleOutOfRange { name: &'static str, value: f64 },
    #[error("initial spin has norm² {0}, expected 1")]
    NonUnitSpin(f64),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

/// The two coin angles `θ1`, `θ2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoinAngles {
    theta1: f64,
    theta2: f64,
}

impl CoinAngles {
    pub fn new(theta1: f64, theta2: f64) -> Result<Self, WalkError> {
        for (name, value) in [("theta1", theta1), ("theta2", theta2)] {
            if !value.is_finite() {
                return Err(WalkError::NonFinite(name));
            }
            if !(0.0..=PI).contains(&value) {
                return Err(WalkError::AngleOutOfRange { name, value });
            }
        }
        Ok(CoinAngles { theta1, theta2 })
    }

    pub fn theta1(&self) -> f64 {
        self.theta1
    }

    pub fn theta2(&self) -> f64 {
        self.theta2
    }
}

/// Dense amplitudes `A_{x,σ}` for `x = min_position ..= max_position()`.
#[derive(Clone, Debug, PartialEq)]
pub struct WalkState {
    min_position: i64,
    amplitudes: Vec<SpinAmplitude>,
}

impl WalkState {
    pub fn single_site(position: i64, spin: SpinAmplitude) -> Self {
        WalkState {
            min_position: position,
            amplitudes: vec![spin],
        }
    }

    /// Build a state from explicit amplitudes. No normalization is applied.
    pub fn from_amplitudes(min_position: i64, amplitudes: Vec<SpinAmplitude>) -> Self {
        WalkState {
            min_position,
            amplitudes,
        }
    }

    pub fn min_position(&self) -> i64 {
        self.min_position
    }

    pub fn max_position(&self) -> i64 {
        self.min_position + self.amplitudes.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[SpinAmplitude] {
        &self.amplitudes
    }

    /// Amplitude at `x`; zero outside the stored window.
    pub fn amplitude(&self, x: i64) -> SpinAmplitude {
        let offset = x - self.min_position;
        if offset < 0 {
            return SpinAmplitude::ZERO;
        }
        self.amplitudes
            .get(offset as usize)
            .copied()
            .unwrap_or(SpinAmplitude::ZERO)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &SpinAmplitude)> + '_ {
        self.amplitudes
            .iter()
            .enumerate()
            .map(move |(i, a)| (self.min_position + i as i64, a))
    }

    /// `Σ_{x,σ} |A_{x,σ}|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(SpinAmplitude::norm_sqr).sum()
    }

    /// Multiply every amplitude by `phase(x)`.
    pub fn map_phase(&self, phase: impl Fn(i64) -> C64) -> WalkState {
        let amplitudes = self.iter().map(|(x, a)| a.scale(phase(x))).collect();
        WalkState::from_amplitudes(self.min_position, amplitudes)
    }

    /// Relabel every site `x → x + shift`.
    pub fn shifted(&self, shift: i64) -> WalkState {
        WalkState::from_amplitudes(self.min_position + shift, self.amplitudes.clone())
    }

    fn apply_coin(&mut self, coin: &Mat2) {
        for a in &mut self.amplitudes {
            *a = coin.apply(a);
        }
    }
}

/// Parameters of one walk experiment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WalkSpec {
    pub angles: CoinAngles,
    /// `R_z(2φ)` twist after each translation; zero disables it.
    pub phi: f64,
    pub steps: usize,
    pub initial_position: i64,
    pub initial_spin: SpinAmplitude,
}

impl WalkSpec {
    pub fn new(
        angles: CoinAngles,
        phi: f64,
        steps: usize,
        initial_position: i64,
        initial_spin: SpinAmplitude,
    ) -> Result<Self, WalkError> {
        if !phi.is_finite() {
            return Err(WalkError::NonFinite("phi"));
        }
        if !initial_spin.is_finite() {
            return Err(WalkError::NonFinite("initial_spin"));
        }
        let norm = initial_spin.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(WalkError::NonUnitSpin(norm));
        }
        Ok(WalkSpec {
            angles,
            phi,
            steps,
            initial_position,
            initial_spin,
        })
    }

    /// Same walk started from a different site.
    pub fn at_position(&self, initial_position: i64) -> WalkSpec {
        WalkSpec {
            initial_position,
            ..*self
        }
    }

    pub fn with_phi(&self, phi: f64) -> WalkSpec {
        WalkSpec { phi, ..*self }
    }

    pub fn with_steps(&self, steps: usize) -> WalkSpec {
        WalkSpec { steps, ..*self }
    }

    /// Largest `|x|` the walk can reach.
    pub fn max_excursion(&self) -> u64 {
        self.initial_position.unsigned_abs() + 2 * self.steps as u64
    }
}

/// `P_N(x)` over a contiguous window of sites.
#[derive(Clone, Debug, PartialEq)]
pub struct PositionDistribution {
    min_position: i64,
    probabilities: Vec<f64>,
}

impl PositionDistribution {
    pub fn from_probabilities(min_position: i64, probabilities: Vec<f64>) -> Self {
        PositionDistribution {
            min_position,
            probabilities,
        }
    }

    pub fn min_position(&self) -> i64 {
        self.min_position
    }

    pub fn max_position(&self) -> i64 {
        self.min_position + self.probabilities.len() as i64 - 1
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn get(&self, x: i64) -> f64 {
        let offset = x - self.min_position;
        if offset < 0 {
            return 0.0;
        }
        self.probabilities
            .get(offset as usize)
            .copied()
            .unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.probabilities
            .iter()
            .enumerate()
            .map(move |(i, &p)| (self.min_position + i as i64, p))
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }
}

/// `R_x(2θ) = exp(−iθσ_x)`.
pub fn coin_rx(theta: f64) -> Mat2 {
    let (s, c) = theta.sin_cos();
    let c = C64::new(c, 0.0);
    let off = C64::new(0.0, -s);
    Mat2::new(c, off, off, c)
}

/// `R_z(2φ) = exp(−iφσ_z)`.
pub fn coin_rz(phi: f64) -> Mat2 {
    Mat2::diagonal(C64::from_polar(1.0, -phi), C64::from_polar(1.0, phi))
}

/// Spin-up moves to `x + 1`, spin-down to `x − 1`.
pub fn apply_translation(state: &WalkState) -> WalkState {
    let len = state.amplitudes.len();
    let mut out = vec![SpinAmplitude::ZERO; len + 2];
    // Site x sits at index x − min; in the output window (min − 1) it is at index + 1.
    for (i, a) in state.amplitudes.iter().enumerate() {
        out[i + 2].up = a.up;
        out[i].down = a.down;
    }
    WalkState::from_amplitudes(state.min_position - 1, out)
}

/// One full step: `[R_z] T R_x(2θ2) [R_z] T R_x(2θ1)`.
pub fn step(state: &WalkState, spec: &WalkSpec) -> WalkState {
    let twist = (spec.phi != 0.0).then(|| coin_rz(spec.phi));
    let mut current = state.clone();
    for theta in [spec.angles.theta1, spec.angles.theta2] {
        current.apply_coin(&coin_rx(theta));
        current = apply_translation(&current);
        if let Some(rz) = &twist {
            current.apply_coin(rz);
        }
    }
    current
}

/// `U_W^N (|m⟩ ⊗ spin)`.
pub fn evolve(spec: &WalkSpec) -> WalkState {
    let mut state = WalkState::single_site(spec.initial_position, spec.initial_spin);
    for _ in 0..spec.steps {
        state = step(&state, spec);
    }
    state
}

pub fn distribution(state: &WalkState) -> PositionDistribution {
    let probabilities = state
        .amplitudes
        .iter()
        .map(SpinAmplitude::norm_sqr)
        .collect();
    PositionDistribution::from_probabilities(state.min_position, probabilities)
}

/// `M_j = Σ_x x^j P(x)`.
pub fn moment(dist: &PositionDistribution, j: u32) -> f64 {
    dist.iter()
        .map(|(x, p)| (x as f64).powi(j as i32) * p)
        .sum()
}

/// Axis `A = (0, cos θ1, −sin θ1)` of the chiral symmetry.
pub fn chiral_axis(theta1: f64) -> [f64; 3] {
    let (s, c) = theta1.sin_cos();
    [0.0, c, -s]
}

/// Eigenvalue label of `A·σ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ChiralSign {
    Plus,
    Minus,
}

impl ChiralSign {
    pub fn value(self) -> f64 {
        match self {
            ChiralSign::Plus => 1.0,
            ChiralSign::Minus => -1.0,
        }
    }
}

/// Unit eigenvector of `A·σ` with eigenvalue `±1`.
///
/// The phase is fixed so that the down component is real and non-negative,
/// or, when it vanishes, so that the up component is real and positive.
/// At `θ1 = π/4` the `Minus` vector is `((√2+1)i, 1)/√(2√2+4)`.
pub fn chiral_spinor(theta1: f64, sign: ChiralSign) -> SpinAmplitude {
    let m = Mat2::pauli_dot(chiral_axis(theta1)).0;
    let lambda = C64::from(sign.value());
    // Each row of (M − λ) is annihilated by its "perpendicular"; take the better conditioned one.
    let from_first = SpinAmplitude::new(m[0][1], lambda - m[0][0]);
    let from_second = SpinAmplitude::new(lambda - m[1][1], m[1][0]);
    let v = if from_first.norm_sqr() >= from_second.norm_sqr() {
        from_first
    } else {
        from_second
    };
    let v = v.scale(C64::from(1.0 / v.norm_sqr().sqrt()));
    let phase = if v.down.norm() > 1e-14 {
        v.down.conj() / v.down.norm()
    } else {
        v.up.conj() / v.up.norm()
    };
    let mut v = v.scale(phase);
    // Remove the rounding residue in the component made real.
    if v.down.norm() > 1e-14 {
        v.down = C64::new(v.down.re, 0.0);
    } else {
        v.up = C64::new(v.up.re, 0.0);
        v.down = C64::new(0.0, 0.0);
    }
    v
}
