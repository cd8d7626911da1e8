//! Spherical-harmonic expansions and Fourier transforms of norm powers.

pub mod basis;
mod expansion;
mod transform;

pub use basis::{degree_labels, jacobi_values, EvalScratch, HarmonicLabel, HarmonicSet, Part};
pub use expansion::{
    cached_set, harmonic_basis, harmonic_expand, Coefficient, DegreeEnergy, ExpansionMode,
    ExpansionQuadrature,
    HarmonicExpansion, MAX_DEGREE,
};
pub use transform::{bochner_multiplier, ft_norm_power, FourierTransform, TAIL_WARNING_RATIO};
