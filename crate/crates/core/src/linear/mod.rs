//! Linearized operator: symbol, spectrum, gap and exact semigroup.

pub mod eig;
pub mod expm;
pub mod perturbed;
pub mod semigroup;
pub mod symbol;

pub use eig::{eigenvalues4, matched_deviation};
pub use expm::{exp_phi12, expm, CMatrix};
pub use perturbed::{
    assemble_perturbed_symbol, perturbed_eigenvalues, perturbed_eigenvalues_closed, perturbed_gap,
    Background, PerturbedEigenvalues, PerturbedGap, PerturbedSymbol, DEFAULT_K_MAX,
};
pub use semigroup::{
    frequency_split, low_frequency_mask, propagator, semigroup_apply, semigroup_apply_spectra,
    split_spectra,
};
pub use symbol::{
    admissible_r0_sq_bound, assemble_symbol, default_r0_sq, discriminant, gap_bound, spectral_gap,
    symbol_eigenvalues, EigenSet, SymbolMatrix,
};

/// `a0 = a / 2`, the decay rate used for the high-frequency part.
pub fn high_frequency_rate(gap: f64) -> f64 {
    0.5 * gap
}
