//! Stability, effective generators and Floquet spectra of parametrically
//! driven harmonic oscillators.
//!
//! [`classical`] builds and classifies one-period maps of the kicked
//! oscillator, [`modulation`] handles smooth frequency profiles such as the
//! Mathieu family, [`heff`] recovers the quadratic generator of a period,
//! [`quantum`] covers quasi-energy spectra, Gaussian states and delta-comb
//! eigenstates, and [`chart`] sweeps two-parameter stability charts.

// NaN must fail the positivity checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chart;
pub mod classical;
pub mod cli;
pub mod error;
pub mod heff;
pub mod mat2;
pub mod modulation;
pub mod quantum;
pub mod selftest;
