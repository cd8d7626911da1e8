//! Complex hyperplane sections and volumes by the polar formula.

use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

use crate::bodies::{apply_j, euclid, BodySpec, Direction};
use crate::directions::{
    coarse_grid, extremize, Extremum, ExtremumResult, GridSettings, QuotientPoint,
};
use crate::error::{Error, Result};
use crate::harmonics::{ExpansionQuadrature, FourierTransform};
use crate::spherequad::sum::compensated_sum;
use crate::spherequad::{cached_rule, ModuliRule, QuadratureRule, RuleInfo};

/// Orthonormal basis of `H_ξ = {ξ, Jξ}^⊥`, made of pairs `(b, Jb)`.
#[derive(Debug, Clone, Serialize)]
pub struct SubspaceBasis {
    pub xi: Direction,
    pub vectors: Vec<Vec<f64>>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn orthogonalize(v: &mut [f64], against: &[Vec<f64>]) {
    // two passes keep the residual at rounding level
    for _ in 0..2 {
        for q in against {
            let c = dot(v, q);
            for (a, b) in v.iter_mut().zip(q) {
                *a -= c * b;
            }
        }
    }
}

/// Gram–Schmidt of the standard basis against `{ξ, Jξ}`. At each step the
/// standard vector with the largest residual is taken (lowest index on
/// ties) and added together with its image under `J`.
pub fn hyperplane_basis(xi: &Direction) -> SubspaceBasis {
    let big_n = xi.xi().len();
    let mut q: Vec<Vec<f64>> = vec![xi.xi().to_vec(), xi.jxi().to_vec()];
    let mut vectors = Vec::with_capacity(big_n - 2);
    let mut used = vec![false; big_n];
    while vectors.len() < big_n - 2 {
        let mut best: Option<(usize, Vec<f64>, f64)> = None;
        for i in 0..big_n {
            if used[i] {
                continue;
            }
            let mut e = vec![0.0; big_n];
            e[i] = 1.0;
            orthogonalize(&mut e, &q);
            let len = euclid(&e);
            let better = match &best {
                None => true,
                Some((_, _, l)) => len > l * (1.0 + 1e-9),
            };
            if better {
                best = Some((i, e, len));
            }
        }
        let (i, mut b, len) = best.expect("a residual direction remains");
        used[i] = true;
        b.iter_mut().for_each(|v| *v /= len);
        let mut jb = apply_j(&b);
        orthogonalize(&mut jb, &q);
        let jl = euclid(&jb);
        jb.iter_mut().for_each(|v| *v /= jl);
        q.push(b.clone());
        q.push(jb.clone());
        vectors.push(b);
        vectors.push(jb);
    }
    SubspaceBasis { xi: xi.clone(), vectors }
}

/// Worst deviations from the defining properties of a subspace basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BasisResiduals {
    pub orthonormality: f64,
    pub orthogonal_to_xi: f64,
    pub j_closure: f64,
}

impl SubspaceBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// Writes `Σ θ_i b_i` into `out`.
    pub fn embed_into(&self, theta: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (t, b) in theta.iter().zip(&self.vectors) {
            for (o, v) in out.iter_mut().zip(b) {
                *o += t * v;
            }
        }
    }

    pub fn embed(&self, theta: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.xi.xi().len()];
        self.embed_into(theta, &mut out);
        out
    }

    pub fn residuals(&self) -> BasisResiduals {
        let mut ortho = 0.0f64;
        let mut perp = 0.0f64;
        let mut closure = 0.0f64;
        for (i, a) in self.vectors.iter().enumerate() {
            for (k, b) in self.vectors.iter().enumerate() {
                let target = if i == k { 1.0 } else { 0.0 };
                ortho = ortho.max((dot(a, b) - target).abs());
            }
            perp = perp.max(dot(a, self.xi.xi()).abs()).max(dot(a, self.xi.jxi()).abs());
            let mut ja = apply_j(a);
            orthogonalize(&mut ja, &self.vectors);
            closure = closure.max(euclid(&ja));
        }
        BasisResiduals { orthonormality: ortho, orthogonal_to_xi: perp, j_closure: closure }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SectionMethod {
    Direct,
    Fourier,
}

/// `Vol_{2n-2}(K ∩ H_ξ)` with its provenance.
#[derive(Debug, Clone, Serialize)]
pub struct SectionReport {
    pub body: String,
    pub xi: Vec<f64>,
    pub method: SectionMethod,
    pub value: f64,
    pub error_estimate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<RuleInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expansion: Option<ExpansionQuadrature>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jmax: Option<u32>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

fn check_section_rule(body: &BodySpec, rule: &QuadratureRule) -> Result<()> {
    let m = 2 * body.n() - 2;
    if rule.dim() != m {
        return Err(Error::invalid(format!(
            "section rule must live on S^{} (m = {m}), got m = {}",
            m - 1,
            rule.dim()
        )));
    }
    Ok(())
}

/// Polar-formula section volume without argument checks.
pub fn section_value(body: &BodySpec, basis: &SubspaceBasis, rule: &QuadratureRule) -> f64 {
    let m = basis.dim();
    let mut x = vec![0.0; m + 2];
    let terms = rule.nodes().zip(rule.weights()).map(|(theta, w)| {
        basis.embed_into(theta, &mut x);
        w * body.rho_unchecked(&x).powi(m as i32)
    });
    compensated_sum(terms.collect::<Vec<_>>()) / m as f64
}

/// Section volume in direction `d` (basis built on the fly).
pub fn section_at(body: &BodySpec, d: &Direction, rule: &QuadratureRule) -> f64 {
    section_value(body, &hyperplane_basis(d), rule)
}

/// `(1/(2n-2)) ∫_{S^{2n-3}} ρ_K(embed θ)^{2n-2} dθ`; the error estimate is
/// the change when the rule level is raised by two.
pub fn section_volume_direct(
    body: &BodySpec,
    xi: &Direction,
    rule: &QuadratureRule,
) -> Result<SectionReport> {
    check_section_rule(body, rule)?;
    if xi.complex_dim() != body.n() {
        return Err(Error::invalid("direction and body dimensions differ"));
    }
    let basis = hyperplane_basis(xi);
    let value = section_value(body, &basis, rule);
    let finer = cached_rule(rule.dim(), rule.level() + 2, rule.is_circle_reduced())?;
    let error_estimate = (section_value(body, &basis, &finer) - value).abs();
    if !value.is_finite() {
        return Err(Error::invalid(format!("section volume is not finite ({value})")));
    }
    Ok(SectionReport {
        body: body.label(),
        xi: xi.xi().to_vec(),
        method: SectionMethod::Direct,
        value,
        error_estimate,
        rule: Some(rule.info()),
        expansion: None,
        jmax: None,
        warnings: Vec::new(),
    })
}

/// `ft(ξ)/(4π(n-1))` from a transform built with `p = 2n - 2`. The error
/// estimate is the size of the highest retained degree.
pub fn section_volume_fourier(
    body: &BodySpec,
    xi: &Direction,
    ft: &FourierTransform,
) -> Result<SectionReport> {
    let n = body.n();
    let p = 2.0 * n as f64 - 2.0;
    if (ft.p - p).abs() > 1e-12 || ft.body.n() != n {
        return Err(Error::invalid(format!(
            "section formula needs the transform with p = {p} in complex dimension {n}"
        )));
    }
    if xi.complex_dim() != n {
        return Err(Error::invalid("direction and body dimensions differ"));
    }
    let scale = 4.0 * PI * (n as f64 - 1.0);
    let (total, top) = ft.expansion.eval_with_top(xi.xi());
    let value = total / scale;
    let error_estimate = top.abs() / scale;
    let mut warnings = ft.warnings.clone();
    if value < -error_estimate {
        warnings.push(format!("negative section value {value:.3e}: truncation failure"));
    }
    Ok(SectionReport {
        body: body.label(),
        xi: xi.xi().to_vec(),
        method: SectionMethod::Fourier,
        value,
        error_estimate,
        rule: None,
        expansion: Some(ft.expansion.rule.clone()),
        jmax: Some(ft.jmax()),
        warnings,
    })
}

fn check_volume_rule(body: &BodySpec, rule: &QuadratureRule) -> Result<()> {
    if rule.dim() != body.dim().real() {
        return Err(Error::invalid(format!(
            "volume rule must live in ℝ^{}, got ℝ^{}",
            body.dim().real(),
            rule.dim()
        )));
    }
    Ok(())
}

/// How a volume integral was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VolumeMethod {
    /// The given rule on S^{2n-1}.
    Polar,
    /// Chamber rule on the moduli simplex at the same level; used when the
    /// norm depends only on `|z_k|`.
    Moduli,
}

/// Polar formula `(1/2n) ∫_{S^{2n-1}} ρ_K^{2n}` with the given rule.
pub fn volume_polar(body: &BodySpec, rule: &QuadratureRule) -> Result<f64> {
    check_volume_rule(body, rule)?;
    let big_n = body.dim().real();
    Ok(rule.integrate(|x| body.rho_unchecked(x).powi(big_n as i32))? / big_n as f64)
}

fn volume_by(body: &BodySpec, rule: &QuadratureRule, level: usize) -> Result<(f64, VolumeMethod)> {
    check_volume_rule(body, rule)?;
    let big_n = body.dim().real();
    if body.depends_on_phases() {
        let r = cached_rule(rule.dim(), level, rule.is_circle_reduced())?;
        return Ok((volume_polar(body, &r)?, VolumeMethod::Polar));
    }
    let moduli = ModuliRule::new(body.n(), level)?;
    let v = moduli.integrate(|x| body.rho_unchecked(x).powi(big_n as i32))? / big_n as f64;
    Ok((v, VolumeMethod::Moduli))
}

/// `Vol_{2n}(K) = (1/2n) ∫_{S^{2n-1}} ρ_K^{2n}`.
///
/// Bodies whose norm depends only on the moduli are integrated on the
/// moduli simplex at the rule's level, which resolves the kinks of
/// polydisc-like norms; all others use `rule` directly.
pub fn volume(body: &BodySpec, rule: &QuadratureRule) -> Result<f64> {
    Ok(volume_by(body, rule, rule.level())?.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct VolumeReport {
    pub body: String,
    pub value: f64,
    pub error_estimate: f64,
    pub method: VolumeMethod,
    pub rule: RuleInfo,
}

/// Volume with the level-`(L, L+2)` refinement difference as error.
pub fn volume_with_error(body: &BodySpec, rule: &QuadratureRule) -> Result<VolumeReport> {
    let (value, method) = volume_by(body, rule, rule.level())?;
    let (finer, _) = volume_by(body, rule, rule.level() + 2)?;
    Ok(VolumeReport {
        body: body.label(),
        value,
        error_estimate: (finer - value).abs(),
        method,
        rule: rule.info(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct InradiusReport {
    pub value: f64,
    pub min_radius: f64,
    pub volume: f64,
    pub minimizer: ExtremumResult,
}

/// `r(K) = min ρ_K / Vol_{2n}(K)^{1/2n}` with the minimum over a refined
/// direction grid.
pub fn inradius_normalized(
    body: &BodySpec,
    rule: &QuadratureRule,
    grid: &GridSettings,
) -> Result<InradiusReport> {
    if grid.moduli_points == 0 || grid.phase_points == 0 {
        return Err(Error::invalid("direction grid is empty"));
    }
    let vol = volume(body, rule)?;
    let n = body.n();
    let minimizer = extremize(n, grid, Extremum::Min, |d| body.rho_unchecked(d.xi()));
    Ok(InradiusReport {
        value: minimizer.value / vol.powf(1.0 / (2 * n) as f64),
        min_radius: minimizer.value,
        volume: vol,
        minimizer,
    })
}

/// Direct section volumes over the coarse direction grid.
#[derive(Debug, Clone)]
pub struct SectionTable {
    pub n: usize,
    pub settings: GridSettings,
    pub points: Vec<QuotientPoint>,
    pub values: Vec<f64>,
}

pub fn section_table(
    body: &BodySpec,
    rule: &QuadratureRule,
    settings: &GridSettings,
) -> Result<SectionTable> {
    check_section_rule(body, rule)?;
    let n = body.n();
    let points = coarse_grid(n, settings);
    let values = points
        .par_iter()
        .map(|p| section_at(body, &p.to_direction(), rule))
        .collect();
    Ok(SectionTable { n, settings: *settings, points, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonics::ft_norm_power;
    use crate::spherequad::{invariant_sphere_rule, sphere_rule};
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn section_rule(n: usize) -> std::sync::Arc<QuadratureRule> {
        cached_rule(2 * n - 2, 24, true).unwrap()
    }

    #[test]
    fn basis_of_first_axis() {
        let b = hyperplane_basis(&Direction::basis(2, 0).unwrap());
        assert_eq!(b.vectors, vec![vec![0.0, 0.0, 1.0, 0.0], vec![0.0, 0.0, 0.0, 1.0]]);
        let b = hyperplane_basis(&Direction::basis(3, 0).unwrap());
        for (k, v) in b.vectors.iter().enumerate() {
            let mut e = vec![0.0; 6];
            e[k + 2] = 1.0;
            assert_eq!(v, &e);
        }
    }

    proptest! {
        #[test]
        fn basis_invariants(v in prop::collection::vec(-1.0..1.0f64, 6), n in 2usize..=3) {
            prop_assume!(euclid(&v[..2 * n]) > 1e-3);
            let d = Direction::new(v[..2 * n].to_vec()).unwrap();
            let r = hyperplane_basis(&d).residuals();
            prop_assert!(r.orthonormality < 1e-13);
            prop_assert!(r.orthogonal_to_xi < 1e-13);
            prop_assert!(r.j_closure < 1e-12);
        }
    }

    #[test]
    fn golden_sections() {
        let e1 = Direction::basis(2, 0).unwrap();
        let ball = BodySpec::euclidean(2, 1.0).unwrap();
        let r = section_volume_direct(&ball, &e1, &section_rule(2)).unwrap();
        assert!(rel(r.value, PI) < 1e-14);
        let ell = BodySpec::ellipsoid(&[1.0, 2.0]).unwrap();
        let r = section_volume_direct(&ell, &e1, &section_rule(2)).unwrap();
        assert!(rel(r.value, 4.0 * PI) < 1e-14);
        let poly = BodySpec::polydisc(2, 1.0).unwrap();
        let r = section_volume_direct(&poly, &e1, &section_rule(2)).unwrap();
        assert!(rel(r.value, PI) < 1e-14);
        let ball3 = BodySpec::euclidean(3, 1.0).unwrap();
        let d = Direction::new(vec![0.3, -0.2, 0.5, 0.1, 0.7, 0.2]).unwrap();
        let r = section_volume_direct(&ball3, &d, &section_rule(3)).unwrap();
        assert!(rel(r.value, PI * PI / 2.0) < 1e-13);
    }

    #[test]
    fn full_and_reduced_section_rules_agree() {
        let k = BodySpec::lq(3, 3.0, 1.0).unwrap();
        let d = Direction::new(vec![0.3, -0.2, 0.5, 0.1, 0.7, 0.2]).unwrap();
        let a = section_volume_direct(&k, &d, &sphere_rule(4, 24).unwrap()).unwrap();
        let b = section_volume_direct(&k, &d, &invariant_sphere_rule(4, 24).unwrap()).unwrap();
        assert!(rel(a.value, b.value) < 1e-12);
    }

    #[test]
    fn fourier_golden_sections() {
        for (n, want) in [(2usize, PI), (3, PI * PI / 2.0)] {
            let ball = BodySpec::euclidean(n, 1.0).unwrap();
            let rule = invariant_sphere_rule(2 * n, 8).unwrap();
            let ft = ft_norm_power(&ball, 2.0 * n as f64 - 2.0, 6, &rule).unwrap();
            let d = Direction::basis(n, 1).unwrap();
            let r = section_volume_fourier(&ball, &d, &ft).unwrap();
            assert!(rel(r.value, want) < 1e-10, "n={n}");
        }
    }

    #[test]
    fn fourier_ellipsoid_matches_direct() {
        let ell = BodySpec::ellipsoid(&[1.0, 2.0]).unwrap();
        let rule = invariant_sphere_rule(4, 24).unwrap();
        let ft = ft_norm_power(&ell, 2.0, 16, &rule).unwrap();
        let e1 = Direction::basis(2, 0).unwrap();
        let r = section_volume_fourier(&ell, &e1, &ft).unwrap();
        assert!(rel(r.value, 4.0 * PI) < 5e-3, "{}", r.value);
    }

    #[test]
    fn fourier_rejects_wrong_exponent() {
        let ball = BodySpec::euclidean(3, 1.0).unwrap();
        let rule = invariant_sphere_rule(6, 4).unwrap();
        let ft = ft_norm_power(&ball, 2.0, 2, &rule).unwrap();
        assert!(section_volume_fourier(&ball, &Direction::basis(3, 0).unwrap(), &ft).is_err());
    }

    #[test]
    fn golden_volumes() {
        let r4 = cached_rule(4, 24, true).unwrap();
        let r6 = cached_rule(6, 16, true).unwrap();
        let ball = BodySpec::euclidean(2, 1.0).unwrap();
        assert!(rel(volume(&ball, &r4).unwrap(), PI * PI / 2.0) < 1e-13);
        let ball3 = BodySpec::euclidean(3, 1.0).unwrap();
        assert!(rel(volume(&ball3, &r6).unwrap(), PI.powi(3) / 6.0) < 1e-13);
        let ell = BodySpec::ellipsoid(&[1.0, 2.0]).unwrap();
        assert!(rel(volume(&ell, &r4).unwrap(), 2.0 * PI * PI) < 1e-10);
        let poly = BodySpec::polydisc(2, 1.0).unwrap();
        let v = volume_with_error(&poly, &r4).unwrap();
        assert!(rel(v.value, PI * PI) < 1e-12, "{v:?}");
        assert_eq!(v.method, VolumeMethod::Moduli);
        let poly3 = BodySpec::polydisc(3, 1.0).unwrap();
        assert!(rel(volume(&poly3, &r6).unwrap(), PI.powi(3)) < 1e-12);
        // {|z_1| + |z_2| ≤ 1} has volume π²/6
        let l1 = BodySpec::lq(2, 1.0, 1.0).unwrap();
        assert!(rel(volume(&l1, &r4).unwrap(), PI * PI / 6.0) < 1e-4);
    }

    #[test]
    fn closed_form_volumes_match_quadrature() {
        for (n, m, level) in [(2, 4, 24), (3, 6, 16)] {
            let rule = cached_rule(m, level, true).unwrap();
            for q in [1.0, 1.5, 2.0, 3.0, 4.0, f64::INFINITY] {
                let k = BodySpec::lq(n, q, 0.8).unwrap();
                let exact = k.closed_form_volume().unwrap();
                let tol = if q < 2.0 { 1e-3 } else { 1e-6 };
                assert!(rel(volume(&k, &rule).unwrap(), exact) < tol, "n={n} q={q}");
            }
        }
        let k = BodySpec::lq(2, 2.0, 1.3).unwrap();
        let b = BodySpec::euclidean(2, 1.3).unwrap();
        assert!(rel(k.closed_form_volume().unwrap(), b.closed_form_volume().unwrap()) < 1e-14);
    }

    #[test]
    fn polar_and_moduli_volumes_agree_on_smooth_bodies() {
        let r4 = cached_rule(4, 24, true).unwrap();
        let k = BodySpec::ellipsoid(&[1.0, 1.7]).unwrap();
        assert!(rel(volume(&k, &r4).unwrap(), volume_polar(&k, &r4).unwrap()) < 1e-12);
        let k = BodySpec::lq(2, 4.0, 1.0).unwrap();
        assert!(rel(volume(&k, &r4).unwrap(), volume_polar(&k, &r4).unwrap()) < 1e-6);
    }

    #[test]
    fn volume_rule_dimension_checked() {
        let ball = BodySpec::euclidean(2, 1.0).unwrap();
        assert!(volume(&ball, &sphere_rule(6, 2).unwrap()).is_err());
        let e1 = Direction::basis(2, 0).unwrap();
        assert!(section_volume_direct(&ball, &e1, &sphere_rule(4, 2).unwrap()).is_err());
    }

    #[test]
    fn inradius_examples() {
        let grid = GridSettings::default_for(2);
        let r4 = cached_rule(4, 24, true).unwrap();
        let ball = BodySpec::euclidean(2, 1.0).unwrap();
        let r = inradius_normalized(&ball, &r4, &grid).unwrap();
        assert!(rel(r.value, (PI * PI / 2.0).powf(-0.25)) < 1e-12);
        let ell = BodySpec::ellipsoid(&[1.0, 2.0]).unwrap();
        let r = inradius_normalized(&ell, &r4, &grid).unwrap();
        assert!(rel(r.value, (2.0 * PI * PI).powf(-0.25)) < 1e-10);
        let scaled = inradius_normalized(&ell.scaled(2.5).unwrap(), &r4, &grid).unwrap();
        assert!(rel(scaled.value, r.value) < 1e-12);
    }

    #[test]
    fn complex_line_invariance() {
        let k = BodySpec::lq(3, 4.0, 1.0).unwrap();
        let d = Direction::new(vec![0.3, -0.2, 0.5, 0.1, 0.7, 0.2]).unwrap();
        let rule = section_rule(3);
        let base = section_at(&k, &d, &rule);
        for theta in [0.3, 1.1, 2.9, 5.0] {
            assert!(rel(section_at(&k, &d.rotated(theta), &rule), base) < 1e-10);
        }
    }
}
