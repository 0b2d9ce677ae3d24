// SPDX-License-Identifier: Apache-2.0

//! Split-step quantum walks on a line and on a lattice of coherent states.
//!
//! The crate is organised around the data flow of an experiment:
//!
//! * [`walk`] evolves the two-component amplitudes `A_{x,σ}` exactly and
//!   extracts position distributions and moments.
//! * [`band`] works in momentum space: quasienergies, Bloch vectors, the
//!   winding number and the closed-form asymptotics of the first two moments.
//! * [`coherent`] reinterprets the same amplitudes on the non-orthogonal
//!   coherent lattice `|xα⟩` and computes projective readouts, the
//!   polynomial-fit reconstruction of `P_N(x)` and photon-number observables.
//! * [`fock`] is an independent brute-force model of a qubit coupled to a
//!   truncated cavity, including the dispersive gate sequence that realizes
//!   the spin-dependent translation.

pub mod band;
pub mod coherent;
pub mod fock;
pub mod spinor;
pub mod walk;

pub use num_complex::Complex64 as C64;
