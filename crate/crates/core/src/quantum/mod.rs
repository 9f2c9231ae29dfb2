//! Quantum side of the kicked and modulated oscillator.

pub mod comb;
pub mod gaussian;
pub mod spectrum;

pub use comb::{
    build_resonant_eigenstate, comb_overlap, eigen_residual, CombEntry, DeltaCombState, EigenResidual, PositionEntry,
};
pub use gaussian::{propagate_gaussian, variance_growth_exponent, GaussianState};
pub use spectrum::{
    detect_rational, elliptic_spectrum, marginal_partners, quasi_energy_spectrum, QuasiEnergySpectrum, Rationality,
    SpectrumOptions,
};
