// SPDX-License-Identifier: Apache-2.0

//! Two-level (coin) algebra: spinors, 2×2 complex matrices and Pauli vectors.

use std::ops::{Add, Mul};

use crate::C64;

/// Coin amplitude `(A_↑, A_↓)` at one lattice site.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SpinAmplitude {
    pub up: C64,
    pub down: C64,
}

impl SpinAmplitude {
    pub const ZERO: SpinAmplitude = SpinAmplitude {
        up: C64::new(0.0, 0.0),
        down: C64::new(0.0, 0.0),
    };

    pub fn new(up: C64, down: C64) -> Self {
        SpinAmplitude { up, down }
    }

    pub fn spin_up() -> Self {
        SpinAmplitude::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0))
    }

    pub fn spin_down() -> Self {
        SpinAmplitude::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.up.norm_sqr() + self.down.norm_sqr()
    }

    pub fn is_finite(&self) -> bool {
        self.up.is_finite() && self.down.is_finite()
    }

    pub fn scale(&self, factor: C64) -> Self {
        SpinAmplitude::new(self.up * factor, self.down * factor)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &SpinAmplitude) -> C64 {
        self.up.conj() * other.up + self.down.conj() * other.down
    }

    /// Exchange the two components.
    pub fn swapped(&self) -> Self {
        SpinAmplitude::new(self.down, self.up)
    }

    pub fn component(&self, spin: Spin) -> C64 {
        match spin {
            Spin::Up => self.up,
            Spin::Down => self.down,
        }
    }
}

impl Add for SpinAmplitude {
    type Output = SpinAmplitude;

    fn add(self, rhs: SpinAmplitude) -> SpinAmplitude {
        SpinAmplitude::new(self.up + rhs.up, self.down + rhs.down)
    }
}

/// Coin basis label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub const BOTH: [Spin; 2] = [Spin::Up, Spin::Down];
}

/// Dense 2×2 complex matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn identity() -> Self {
        Mat2::diagonal(C64::new(1.0, 0.0), C64::new(1.0, 0.0))
    }

    pub fn diagonal(a: C64, d: C64) -> Self {
        let z = C64::new(0.0, 0.0);
        Mat2::new(a, z, z, d)
    }

    pub fn pauli_x() -> Self {
        let (z, o) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        Mat2::new(z, o, o, z)
    }

    pub fn pauli_y() -> Self {
        let z = C64::new(0.0, 0.0);
        Mat2::new(z, -C64::i(), C64::i(), z)
    }

    pub fn pauli_z() -> Self {
        Mat2::diagonal(C64::new(1.0, 0.0), C64::new(-1.0, 0.0))
    }

    /// `v·σ` for a real 3-vector.
    pub fn pauli_dot(v: [f64; 3]) -> Self {
        Mat2::pauli_x().scale(C64::from(v[0]))
            + Mat2::pauli_y().scale(C64::from(v[1]))
            + Mat2::pauli_z().scale(C64::from(v[2]))
    }

    pub fn scale(&self, factor: C64) -> Self {
        let m = &self.0;
        Mat2::new(
            m[0][0] * factor,
            m[0][1] * factor,
            m[1][0] * factor,
            m[1][1] * factor,
        )
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Mat2::new(
            m[0][0].conj(),
            m[1][0].conj(),
            m[0][1].conj(),
            m[1][1].conj(),
        )
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn determinant(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn apply(&self, v: &SpinAmplitude) -> SpinAmplitude {
        let m = &self.0;
        SpinAmplitude::new(
            m[0][0] * v.up + m[0][1] * v.down,
            m[1][0] * v.up + m[1][1] * v.down,
        )
    }

    /// Both eigenvalues from the characteristic polynomial.
    pub fn eigenvalues(&self) -> [C64; 2] {
        let half_tr = self.trace() * 0.5;
        let disc = (half_tr * half_tr - self.determinant()).sqrt();
        [half_tr + disc, half_tr - disc]
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut worst = 0.0_f64;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        worst
    }

    /// Deviation of `M†M` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        (self.adjoint() * *self).max_abs_diff(&Mat2::identity())
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[C64::new(0.0, 0.0); 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Mat2(out)
    }
}

impl Add for Mat2 {
    type Output = Mat2;

    fn add(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2::new(
            a[0][0] + b[0][0],
            a[0][1] + b[0][1],
            a[1][0] + b[1][0],
            a[1][1] + b[1][1],
        )
    }
}
