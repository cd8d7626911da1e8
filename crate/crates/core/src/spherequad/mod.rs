//! Quadrature on spheres S^{m-1}, m = 2..=8, and Monte Carlo volume estimates.

pub mod gauss;
pub mod moduli;
pub mod montecarlo;
pub mod rule;
pub mod sum;

pub use moduli::{ModuliRule, ModuliRuleInfo};
pub use montecarlo::{mc_volume, McEstimate};
pub use rule::{cached_rule, invariant_sphere_rule, sphere_rule, QuadratureRule, RuleInfo};

use crate::error::Result;

/// `Σ wᵢ f(nodeᵢ)` in a fixed summation order.
pub fn integrate_sphere<F>(f: F, rule: &QuadratureRule) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    rule.integrate(f)
}
