use serde::Serialize;
use std::f64::consts::PI;

use super::expansion::{harmonic_expand, ExpansionMode, HarmonicExpansion};
use crate::bodies::BodySpec;
use crate::error::{Error, Result};
use crate::special::ln_gamma;
use crate::spherequad::QuadratureRule;

/// Tail-energy share above which a truncation is flagged.
pub const TAIL_WARNING_RATIO: f64 = 1e-3;

/// `λ_j(N, p) = (-1)^{j/2} 2^{N-p} π^{N/2} Γ((j+N-p)/2) / Γ((j+p)/2)`.
///
/// The Fourier transform of `Y_j(θ) r^{-p}` on ℝ^N is `λ_j Y_j(ξ) |ξ|^{p-N}`.
pub fn bochner_multiplier(big_n: usize, p: f64, j: u32) -> Result<f64> {
    let nf = big_n as f64;
    if !(p > 0.0 && p < nf) {
        return Err(Error::invalid(format!("exponent p = {p} must lie in (0, {big_n})")));
    }
    if j % 2 == 1 {
        return Err(Error::invalid(format!("degree {j} must be even")));
    }
    let jf = j as f64;
    let ln = (nf - p) * 2f64.ln() + 0.5 * nf * PI.ln() + ln_gamma(0.5 * (jf + nf - p))
        - ln_gamma(0.5 * (jf + p));
    let sign = if (j / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(sign * ln.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DegreeMultiplier {
    pub degree: u32,
    pub value: f64,
}

/// Sphere restriction of the Fourier transform of `‖·‖_K^{-p}`.
#[derive(Debug, Clone, Serialize)]
pub struct FourierTransform {
    pub body: BodySpec,
    pub p: f64,
    pub multipliers: Vec<DegreeMultiplier>,
    /// Tail-energy ratio of the expansion of `ρ_K^p` before the multipliers.
    pub source_tail_energy_ratio: f64,
    pub warnings: Vec<String>,
    /// Coefficients `λ_j c_{j,ℓ}`.
    pub expansion: HarmonicExpansion,
}

impl FourierTransform {
    pub fn eval(&self, xi: &[f64]) -> f64 {
        self.expansion.eval(xi)
    }

    pub fn eval_many(&self, points: &[Vec<f64>]) -> Vec<f64> {
        self.expansion.eval_many(points)
    }

    pub fn jmax(&self) -> u32 {
        self.expansion.jmax
    }

    /// No truncation warning was raised.
    pub fn is_reliable(&self) -> bool {
        self.warnings.is_empty()
    }
}

/// Expands `ρ_K^p = ‖·‖_K^{-p}` on the sphere and applies the multipliers.
///
/// A full rule runs the reference expansion over every basis function. A
/// circle-reduced rule selects the rotation-invariant fast path, or the
/// moduli-simplex path when the norm ignores all phases.
pub fn ft_norm_power(
    body: &BodySpec,
    p: f64,
    jmax: u32,
    rule: &QuadratureRule,
) -> Result<FourierTransform> {
    let big_n = body.dim().real();
    let multipliers = (0..=jmax)
        .step_by(2)
        .map(|j| bochner_multiplier(big_n, p, j).map(|value| DegreeMultiplier { degree: j, value }))
        .collect::<Result<Vec<_>>>()?;
    let mode = if !rule.is_circle_reduced() {
        ExpansionMode::Full
    } else if body.depends_on_phases() {
        ExpansionMode::Invariant
    } else {
        ExpansionMode::Moduli
    };
    let source = harmonic_expand(big_n, |x| body.rho_unchecked(x).powf(p), jmax, rule, mode)?;
    let mut warnings = Vec::new();
    if source.tail_energy_ratio > TAIL_WARNING_RATIO {
        warnings.push(format!(
            "tail-energy ratio {:.3e} exceeds {TAIL_WARNING_RATIO:e} at Jmax = {jmax}; truncation unreliable",
            source.tail_energy_ratio
        ));
        log::debug!("{}: {}", body.label(), warnings.last().unwrap());
    }
    let expansion = source.map_degrees(|j| multipliers[(j / 2) as usize].value);
    Ok(FourierTransform {
        body: body.clone(),
        p,
        multipliers,
        source_tail_energy_ratio: source.tail_energy_ratio,
        warnings,
        expansion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma;
    use crate::spherequad::{invariant_sphere_rule, sphere_rule};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn multiplier_values() {
        assert!(rel(bochner_multiplier(4, 2.0, 0).unwrap(), 4.0 * PI * PI) < 1e-13);
        assert!(rel(bochner_multiplier(6, 4.0, 0).unwrap(), 4.0 * PI.powi(3)) < 1e-13);
        assert!(rel(bochner_multiplier(4, 2.0, 2).unwrap(), -4.0 * PI * PI) < 1e-13);
        // Γ(4)/Γ(2) at N=6, p=2, j=2 by hand: -16 π³ · 2
        assert!(rel(bochner_multiplier(6, 2.0, 2).unwrap(), -32.0 * PI.powi(3)) < 1e-13);
    }

    #[test]
    fn multiplier_errors() {
        assert!(bochner_multiplier(4, 0.0, 0).is_err());
        assert!(bochner_multiplier(4, 4.0, 0).is_err());
        assert!(bochner_multiplier(4, 2.0, 1).is_err());
        assert!(bochner_multiplier(4, f64::NAN, 0).is_err());
    }

    #[test]
    fn multiplier_large_degree_is_finite() {
        let v = bochner_multiplier(6, 1.0, 32).unwrap();
        assert!(v.is_finite() && v != 0.0);
    }

    #[test]
    fn multiplier_sign_pattern_and_duality() {
        for big_n in [4usize, 6, 8] {
            for p in [0.5, 1.0, 2.0, 2.7, big_n as f64 - 0.5] {
                for j in (0..=32).step_by(2) {
                    let a = bochner_multiplier(big_n, p, j).unwrap();
                    let expected_sign = if (j / 2) % 2 == 0 { 1.0 } else { -1.0 };
                    assert_eq!(a.signum(), expected_sign);
                    let b = bochner_multiplier(big_n, big_n as f64 - p, j).unwrap();
                    let target = (2.0 * PI).powi(big_n as i32);
                    assert!(rel(a * b, target) < 1e-12, "N={big_n} p={p} j={j}");
                }
            }
        }
    }

    #[test]
    fn euclidean_closed_form() {
        // 4πⁿ/Γ(n-1) at p = 2n-2
        for n in [2usize, 3] {
            let ball = BodySpec::euclidean(n, 1.0).unwrap();
            let rule = invariant_sphere_rule(2 * n, 8).unwrap();
            let ft = ft_norm_power(&ball, 2.0 * n as f64 - 2.0, 8, &rule).unwrap();
            let want = 4.0 * PI.powi(n as i32) / gamma(n as f64 - 1.0);
            for xi in [vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0], vec![0.0, 0.6, 0.0, 0.8, 0.0, 0.0]] {
                let v = ft.eval(&xi[..2 * n]);
                assert!(rel(v, want) < 1e-10, "n={n}: {v} vs {want}");
            }
            assert!(ft.is_reliable());
        }
    }

    #[test]
    fn euclidean_p2_in_c3() {
        let ball = BodySpec::euclidean(3, 1.0).unwrap();
        let rule = invariant_sphere_rule(6, 6).unwrap();
        let ft = ft_norm_power(&ball, 2.0, 4, &rule).unwrap();
        assert!(rel(ft.eval(&[0.0, 0.0, 1.0, 0.0, 0.0, 0.0]), 16.0 * PI.powi(3)) < 1e-10);
    }

    #[test]
    fn homogeneity() {
        let k = BodySpec::lq(2, 3.0, 1.0).unwrap();
        let r = 1.7;
        let rk = k.scaled(r).unwrap();
        let rule = invariant_sphere_rule(4, 12).unwrap();
        let a = ft_norm_power(&k, 2.0, 8, &rule).unwrap();
        let b = ft_norm_power(&rk, 2.0, 8, &rule).unwrap();
        let xi = [0.6, 0.0, 0.0, 0.8];
        assert!(rel(b.eval(&xi), r * r * a.eval(&xi)) < 1e-12);
    }

    #[test]
    fn self_duality_on_constants() {
        // applying the transform for p, then for N-p, scales by (2π)^N
        let ball = BodySpec::euclidean(2, 1.0).unwrap();
        let rule = invariant_sphere_rule(4, 4).unwrap();
        let p = 1.3;
        let first = ft_norm_power(&ball, p, 2, &rule).unwrap().eval(&[1.0, 0.0, 0.0, 0.0]);
        let second = first * bochner_multiplier(4, 4.0 - p, 0).unwrap();
        assert!(rel(second, (2.0 * PI).powi(4)) < 1e-12);
    }

    #[test]
    fn transform_of_invariant_body_is_invariant() {
        let k = BodySpec::lq(2, 3.0, 1.0).unwrap();
        let rule = sphere_rule(4, 12).unwrap();
        let ft = ft_norm_power(&k, 2.0, 8, &rule).unwrap();
        let lead = ft.expansion.values()[0].abs();
        assert!(ft.expansion.max_noninvariant_coefficient() <= 1e-8 * lead);
    }

    #[test]
    fn truncation_warning() {
        let k = BodySpec::ellipsoid(&[1.0, 3.0]).unwrap();
        let rule = invariant_sphere_rule(4, 8).unwrap();
        let ft = ft_norm_power(&k, 2.0, 4, &rule).unwrap();
        assert!(!ft.is_reliable());
    }
}
