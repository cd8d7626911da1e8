//! Numerical verification of volume comparison results for complex
//! hyperplane sections of rotation-invariant convex bodies in ℂⁿ ≅ ℝ²ⁿ.

pub mod bodies;
pub mod directions;
pub mod error;
pub mod harmonics;
pub mod sections;
pub mod settings;
pub mod special;
pub mod spherequad;
pub mod theorems;

pub use bodies::{BodyKind, BodySpec, ComplexDim, Direction, LqExponent, PerturbationTerm};
pub use error::{Error, Result};
pub use settings::Settings;
pub use theorems::{
    Corollary1Report, GammaRow, ParsevalReport, PositivityMode, PositivityReport, StabilityReport,
};
