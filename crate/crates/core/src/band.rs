// SPDX-License-Identifier: Apache-2.0

//! Momentum-space analysis of the split-step walk.
//!
//! In momentum space one step is the 2×2 unitary
//! `U(k) = e^{ikσ_z} R_x(2θ2) e^{ikσ_z} R_x(2θ1) = cos ε − i sin ε n·σ` with
//!
//! ```text
//! cos ε   = cos 2k cos θ1 cos θ2 − sin θ1 sin θ2
//! n_x     = (cos 2k cos θ2 sin θ1 + cos θ1 sin θ2) / sin ε
//! n_y     = −sin 2k cos θ2 sin θ1 / sin ε
//! n_z     = −sin 2k cos θ2 cos θ1 / sin ε
//! ```
//!
//! `n` lies in the plane orthogonal to the chiral axis `A`; its winding around
//! `A` over the Brillouin zone is the topological invariant. All integrals
//! `∫ dk/2π` are midpoint sums on a [`KGrid`], which converge exponentially
//! for the smooth periodic integrands of a gapped walk.

use std::f64::consts::{PI, TAU};

use thiserror::Error;

use crate::spinor::Mat2;
use crate::walk::{chiral_axis, coin_rx, ChiralSign, CoinAngles};
use crate::C64;

/// `sin ε` at or below this value counts as a closed gap.
pub const GAP_TOLERANCE: f64 = 1e-6;

/// Largest allowed distance of the accumulated winding from an integer.
pub const WINDING_RESIDUAL_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BandError {
    #[error("gap closed at k = {k} (sin ε = {sin_epsilon:e})")]
    GapClosed { k: f64, sin_epsilon: f64 },
    #[error("accumulated winding {0} is not within tolerance of an integer")]
    NotQuantized(f64),
    #[error("k-grid needs a positive even point count, got {0}")]
    InvalidGrid(usize),
}

/// Uniform discretization of `k ∈ [−π, π)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KGrid {
    count: usize,
    offset: bool,
}

impl KGrid {
    /// Midpoint grid `k_j = −π + (j + ½)·2π/count`.
    pub fn new(count: usize) -> Result<Self, BandError> {
        Self::with_offset(count, true)
    }

    pub fn with_offset(count: usize, offset: bool) -> Result<Self, BandError> {
        if count == 0 || !count.is_multiple_of(2) {
            return Err(BandError::InvalidGrid(count));
        }
        Ok(KGrid { count, offset })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn offset(&self) -> bool {
        self.offset
    }

    pub fn spacing(&self) -> f64 {
        TAU / self.count as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        let shift = if self.offset { 0.5 } else { 0.0 };
        (0..self.count).map(move |j| -PI + (j as f64 + shift) * self.spacing())
    }

    /// `∫ dk/2π f(k)`, failing on the first error.
    pub fn average<E>(&self, mut f: impl FnMut(f64) -> Result<f64, E>) -> Result<f64, E> {
        let mut sum = 0.0;
        for k in self.points() {
            sum += f(k)?;
        }
        Ok(sum / self.count as f64)
    }
}

/// Band data at one momentum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochData {
    pub k: f64,
    pub epsilon: f64,
    pub n: [f64; 3],
}

/// `e^{ikσ_z} R_x(2θ2) e^{ikσ_z} R_x(2θ1)`.
pub fn momentum_step_matrix(k: f64, angles: &CoinAngles) -> Mat2 {
    let shift = Mat2::diagonal(C64::from_polar(1.0, k), C64::from_polar(1.0, -k));
    shift * coin_rx(angles.theta2()) * shift * coin_rx(angles.theta1())
}

fn cos_quasienergy(k: f64, angles: &CoinAngles) -> f64 {
    let (s1, c1) = angles.theta1().sin_cos();
    let (s2, c2) = angles.theta2().sin_cos();
    (2.0 * k).cos() * c1 * c2 - s1 * s2
}

/// Quasienergy `ε(k) ∈ [0, π]`.
pub fn quasienergy(k: f64, angles: &CoinAngles) -> f64 {
    cos_quasienergy(k, angles).clamp(-1.0, 1.0).acos()
}

fn gapped_sin(k: f64, angles: &CoinAngles) -> Result<f64, BandError> {
    let sin_epsilon = quasienergy(k, angles).sin();
    if sin_epsilon <= GAP_TOLERANCE {
        return Err(BandError::GapClosed { k, sin_epsilon });
    }
    Ok(sin_epsilon)
}

/// Numerator of `n(k)` (i.e. `n·sin ε`) and its `k`-derivative.
fn bloch_numerator(k: f64, angles: &CoinAngles) -> ([f64; 3], [f64; 3]) {
    let (s1, c1) = angles.theta1().sin_cos();
    let (s2, c2) = angles.theta2().sin_cos();
    let (s2k, c2k) = (2.0 * k).sin_cos();
    let value = [c2k * c2 * s1 + c1 * s2, -s2k * c2 * s1, -s2k * c2 * c1];
    let derivative = [
        -2.0 * s2k * c2 * s1,
        -2.0 * c2k * c2 * s1,
        -2.0 * c2k * c2 * c1,
    ];
    (value, derivative)
}

pub fn bloch_vector(k: f64, angles: &CoinAngles) -> Result<[f64; 3], BandError> {
    let sin_epsilon = gapped_sin(k, angles)?;
    let (num, _) = bloch_numerator(k, angles);
    Ok(num.map(|c| c / sin_epsilon))
}

pub fn bloch_data(k: f64, angles: &CoinAngles) -> Result<BlochData, BandError> {
    Ok(BlochData {
        k,
        epsilon: quasienergy(k, angles),
        n: bloch_vector(k, angles)?,
    })
}

/// `V(k) = dε/dk = 2 sin 2k cos θ1 cos θ2 / sin ε`.
pub fn group_velocity(k: f64, angles: &CoinAngles) -> Result<f64, BandError> {
    let sin_epsilon = gapped_sin(k, angles)?;
    Ok(2.0 * (2.0 * k).sin() * angles.theta1().cos() * angles.theta2().cos() / sin_epsilon)
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `(n × ∂n/∂k)·A`, with `∂n/∂k` from the quotient rule.
pub fn winding_density(k: f64, angles: &CoinAngles) -> Result<f64, BandError> {
    let sin_epsilon = gapped_sin(k, angles)?;
    let cos_epsilon = cos_quasienergy(k, angles).clamp(-1.0, 1.0);
    let velocity = group_velocity(k, angles)?;
    let (num, dnum) = bloch_numerator(k, angles);
    let n = num.map(|c| c / sin_epsilon);
    // d(sin ε)/dk = cos ε · V
    let dsin = cos_epsilon * velocity;
    let dn = [0, 1, 2].map(|i| dnum[i] / sin_epsilon - num[i] * dsin / (sin_epsilon * sin_epsilon));
    Ok(dot(cross(n, dn), chiral_axis(angles.theta1())))
}

/// Winding number by angle accumulation of `n` in the plane orthogonal to `A`.
///
/// The in-plane frame `(x̂, A × x̂)` is right-handed about `A`, so the sign
/// agrees with `(1/2π)∮ (n × ∂n/∂k)·A dk`.
pub fn winding_number(angles: &CoinAngles, grid: &KGrid) -> Result<i32, BandError> {
    let axis = chiral_axis(angles.theta1());
    let e1 = [1.0, 0.0, 0.0];
    let e2 = cross(axis, e1);
    let mut first = None;
    let mut previous = 0.0;
    let mut total = 0.0;
    for k in grid.points() {
        let n = bloch_vector(k, angles)?;
        let angle = dot(n, e2).atan2(dot(n, e1));
        match first {
            None => first = Some(angle),
            Some(_) => total += wrap_angle(angle - previous),
        }
        previous = angle;
    }
    if let Some(start) = first {
        total += wrap_angle(start - previous);
    }
    let winding = total / TAU;
    let rounded = winding.round();
    if (winding - rounded).abs() > WINDING_RESIDUAL_TOLERANCE {
        return Err(BandError::NotQuantized(winding));
    }
    Ok(rounded as i32)
}

/// Reduce an angle difference to `(−π, π]`.
fn wrap_angle(delta: f64) -> f64 {
    let wrapped = delta.rem_euclid(TAU);
    if wrapped > PI {
        wrapped - TAU
    } else {
        wrapped
    }
}

/// Direct quadrature of `(1/2π)∫ (n × ∂n/∂k)·A dk`; a cross-check of
/// [`winding_number`] that is only approximately integer.
pub fn winding_integral(angles: &CoinAngles, grid: &KGrid) -> Result<f64, BandError> {
    grid.average(|k| winding_density(k, angles))
}

/// `L = ∫ dk/2π V(k)²`, the limit of `M2(N)/N²`.
pub fn ballistic_coefficient(angles: &CoinAngles, grid: &KGrid) -> Result<f64, BandError> {
    grid.average(|k| group_velocity(k, angles).map(|v| v * v))
}

/// `½ ∫ dk/2π cos(2Nε) (n × ∂n/∂k)·A`, the decaying part of `S_Γ`.
pub fn s_gamma_oscillation(
    steps: usize,
    angles: &CoinAngles,
    grid: &KGrid,
) -> Result<f64, BandError> {
    let two_n = 2.0 * steps as f64;
    let mean = grid.average(|k| {
        let density = winding_density(k, angles)?;
        Ok((two_n * quasienergy(k, angles)).cos() * density)
    })?;
    Ok(0.5 * mean)
}

/// `S_Γ(N) = γ/2 − ½ ∫ dk/2π cos(2Nε) (n × ∂n/∂k)·A`.
pub fn s_gamma(steps: usize, angles: &CoinAngles, grid: &KGrid) -> Result<f64, BandError> {
    let gamma = winding_number(angles, grid)?;
    Ok(0.5 * gamma as f64 - s_gamma_oscillation(steps, angles, grid)?)
}

/// Predicted `M1(N)` for a walk started in the `sign` eigenstate of `A·σ`:
/// `M1 = sign · S_Γ(N)`.
pub fn m1_asymptotic(
    steps: usize,
    angles: &CoinAngles,
    sign: ChiralSign,
    grid: &KGrid,
) -> Result<f64, BandError> {
    Ok(sign.value() * s_gamma(steps, angles, grid)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8};

    fn angles(t1: f64, t2: f64) -> CoinAngles {
        CoinAngles::new(t1, t2).unwrap()
    }

    #[test]
    fn grid_rejects_odd_or_empty() {
        assert_eq!(KGrid::new(0), Err(BandError::InvalidGrid(0)));
        assert_eq!(KGrid::new(63), Err(BandError::InvalidGrid(63)));
        let grid = KGrid::new(4).unwrap();
        let pts: Vec<f64> = grid.points().collect();
        assert_eq!(pts.len(), 4);
        assert!((pts[0] + 0.75 * PI).abs() < 1e-15);
    }

    #[test]
    fn step_matrix_special_cases() {
        let k = 0.37;
        let free = momentum_step_matrix(k, &angles(0.0, 0.0));
        let expected = Mat2::diagonal(
            C64::from_polar(1.0, 2.0 * k),
            C64::from_polar(1.0, -2.0 * k),
        );
        assert!(free.max_abs_diff(&expected) < 1e-15);

        let a = angles(0.4, 1.1);
        let at_zero = momentum_step_matrix(0.0, &a);
        assert!(at_zero.max_abs_diff(&coin_rx(0.4 + 1.1)) < 1e-15);
        assert!(momentum_step_matrix(1.3, &a).unitarity_error() < 1e-14);
    }

    #[test]
    fn trace_is_twice_cos_epsilon() {
        for (t1, t2) in [(FRAC_PI_4, FRAC_PI_8), (0.3, 2.9), (1.9, 0.7)] {
            let a = angles(t1, t2);
            for k in [-3.0, -1.1, 0.0, 0.4, 2.2] {
                let tr = momentum_step_matrix(k, &a).trace();
                assert!((tr - 2.0 * quasienergy(k, &a).cos()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn quasienergy_values() {
        let a = angles(FRAC_PI_4, FRAC_PI_4);
        // cos ε = 1/2 − 1/2 at k = 0; −1/2 − 1/2 at k = π/2 (gap closes there).
        assert!((quasienergy(0.0, &a) - FRAC_PI_2).abs() < 1e-15);
        assert!((quasienergy(FRAC_PI_2, &a) - PI).abs() < 1e-7);
        let flat = angles(FRAC_PI_4, FRAC_PI_2);
        for k in [-2.0, 0.1, 1.4] {
            let expected = (-FRAC_PI_4.sin()).acos();
            assert!((quasienergy(k, &flat) - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn bloch_vector_at_zero_momentum_points_along_x() {
        let n = bloch_vector(0.0, &angles(FRAC_PI_4, FRAC_PI_8)).unwrap();
        assert!((n[0].abs() - 1.0).abs() < 1e-12);
        assert_eq!(n[1], 0.0);
        assert_eq!(n[2], 0.0);
    }

    #[test]
    fn bloch_vector_reconstructs_step_matrix() {
        // U(k) = cos ε − i sin ε n·σ, checked against the independent product.
        let a = angles(FRAC_PI_4, FRAC_PI_8);
        let k = FRAC_PI_4;
        let eps = quasienergy(k, &a);
        let n = bloch_vector(k, &a).unwrap();
        let rebuilt = Mat2::identity().scale(C64::from(eps.cos()))
            + Mat2::pauli_dot(n).scale(C64::new(0.0, -eps.sin()));
        assert!(rebuilt.max_abs_diff(&momentum_step_matrix(k, &a)) < 1e-12);
    }

    #[test]
    fn gap_closed_is_reported() {
        let a = angles(FRAC_PI_4, FRAC_PI_4);
        assert!(matches!(
            bloch_vector(FRAC_PI_2, &a),
            Err(BandError::GapClosed { .. })
        ));
        assert!(matches!(
            group_velocity(FRAC_PI_2, &a),
            Err(BandError::GapClosed { .. })
        ));
        let grid = KGrid::with_offset(64, false).unwrap();
        assert!(matches!(
            winding_number(&a, &grid),
            Err(BandError::GapClosed { .. })
        ));
    }

    #[test]
    fn group_velocity_limits() {
        let flat = angles(FRAC_PI_4, FRAC_PI_2);
        let free = angles(0.0, 0.0);
        for k in [-2.9, -0.7, 0.3, 1.2] {
            assert!(group_velocity(k, &flat).unwrap().abs() < 1e-15);
            assert!((group_velocity(k, &free).unwrap().abs() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn group_velocity_matches_central_difference() {
        let h = 1e-5;
        for (t1, t2) in [(FRAC_PI_4, FRAC_PI_8), (0.9, 2.6), (2.0, 0.5)] {
            let a = angles(t1, t2);
            for k in [-2.7, -1.0, 0.35, 1.9] {
                let fd = (quasienergy(k + h, &a) - quasienergy(k - h, &a)) / (2.0 * h);
                assert!((fd - group_velocity(k, &a).unwrap()).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn winding_values() {
        let grid = KGrid::new(512).unwrap();
        assert_eq!(winding_number(&angles(FRAC_PI_4, FRAC_PI_8), &grid), Ok(2));
        assert_eq!(winding_number(&angles(FRAC_PI_4, FRAC_PI_2), &grid), Ok(0));
        assert_eq!(
            winding_number(&angles(FRAC_PI_4, 7.0 * FRAC_PI_8), &grid),
            Ok(2)
        );
        let integral = winding_integral(&angles(FRAC_PI_4, FRAC_PI_8), &grid).unwrap();
        assert!((integral - 2.0).abs() < 1e-8);
    }

    #[test]
    fn ballistic_coefficient_limits() {
        let grid = KGrid::new(256).unwrap();
        assert!(ballistic_coefficient(&angles(FRAC_PI_4, FRAC_PI_2), &grid).unwrap() < 1e-28);
        let free = ballistic_coefficient(&angles(0.0, 0.0), &grid).unwrap();
        assert!((free - 4.0).abs() < 1e-12);
    }

    #[test]
    fn s_gamma_tends_to_half_winding() {
        let grid = KGrid::new(4096).unwrap();
        // The remainder decays like N^{-1/2}: about 0.043 at N = 200.
        let topo = s_gamma(200, &angles(FRAC_PI_4, FRAC_PI_8), &grid).unwrap();
        assert!((topo - 1.0).abs() < 0.05, "{topo}");
        let trivial = s_gamma(200, &angles(FRAC_PI_4, FRAC_PI_2), &grid).unwrap();
        assert!(trivial.abs() < 0.05, "{trivial}");
    }

    #[test]
    fn s_gamma_oscillation_decays() {
        // The remainder rings, so compare its envelope over a window of steps.
        let grid = KGrid::new(8192).unwrap();
        for t2 in [
            FRAC_PI_8,
            3.0 * FRAC_PI_8,
            5.0 * FRAC_PI_8,
            7.0 * FRAC_PI_8,
            1.0,
        ] {
            let a = angles(FRAC_PI_4, t2);
            let envelope = |n: usize| {
                (n..n + 10)
                    .map(|s| s_gamma_oscillation(s, &a, &grid).unwrap().abs())
                    .fold(0.0, f64::max)
            };
            let (at_n, at_2n, at_4n) = (envelope(25), envelope(50), envelope(100));
            assert!(
                at_2n < at_n && at_4n < at_2n,
                "θ2 = {t2}: {at_n} {at_2n} {at_4n}"
            );
        }
    }
}
