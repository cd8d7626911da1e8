//! Checks of the volume comparison theorems, the spherical Parseval
//! identity, positivity of transforms and the Gamma-function lemma.
//!
//! Every inequality carries `tol = multiplier · Σ error estimates` of its
//! inputs, plus a rounding floor, and passes when `margin ≥ -tol`.

use serde::Serialize;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::bodies::BodySpec;
use crate::directions::{extremize, refine, Extremum, ExtremumResult, GridSettings};
use crate::error::{Error, Result};
use crate::harmonics::ft_norm_power;
use crate::sections::{
    hyperplane_basis, section_table, section_value, section_volume_direct, volume_with_error,
    SectionTable, VolumeReport,
};
use crate::settings::Settings;
use crate::special::ln_gamma;
use crate::spherequad::RuleInfo;

/// Relative rounding allowance added to every tolerance, so that checks
/// whose inputs are exact closed forms do not fail on the last bit.
pub const ROUNDING_FLOOR: f64 = 64.0 * f64::EPSILON;

fn body_key(body: &BodySpec) -> String {
    serde_json::to_string(body).expect("body specs serialize")
}

type TableKey = (String, usize, GridSettings);

fn cached_table(body: &BodySpec, settings: &Settings, grid: &GridSettings) -> Result<Arc<SectionTable>> {
    static CACHE: OnceLock<Mutex<HashMap<TableKey, Arc<SectionTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let n = body.n();
    let level = settings.level(2 * n - 2);
    let key = (body_key(body), level, *grid);
    if let Some(t) = cache.lock().unwrap().get(&key) {
        return Ok(t.clone());
    }
    let table = Arc::new(section_table(body, &*settings.section_rule(n)?, grid)?);
    Ok(cache.lock().unwrap().entry(key).or_insert(table).clone())
}

fn cached_volume(body: &BodySpec, settings: &Settings) -> Result<VolumeReport> {
    static CACHE: OnceLock<Mutex<HashMap<(String, usize), VolumeReport>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (body_key(body), settings.level(body.dim().real()));
    if let Some(v) = cache.lock().unwrap().get(&key) {
        return Ok(v.clone());
    }
    let report = volume_with_error(body, &*settings.sphere_rule(body.n())?)?;
    cache.lock().unwrap().insert(key, report.clone());
    Ok(report)
}

fn ensure_valid(body: &BodySpec, settings: &Settings) -> Result<()> {
    body.dim().require_theorem_range()?;
    let report = body.validate(settings.validation_samples, settings.seed);
    if !report.passed() {
        return Err(Error::Validation(format!(
            "{} fails {}",
            body.label(),
            report.failures().join(", ")
        )));
    }
    Ok(())
}

fn same_dim(k: &BodySpec, l: &BodySpec) -> Result<usize> {
    if k.n() != l.n() {
        return Err(Error::invalid(format!(
            "bodies live in different dimensions (n = {} and n = {})",
            k.n(),
            l.n()
        )));
    }
    Ok(k.n())
}

/// Resolution of a direction search.
#[derive(Debug, Clone, Serialize)]
pub struct GridInfo {
    pub settings: GridSettings,
    pub coarse_points: usize,
    pub evaluations: usize,
    pub final_moduli_step: f64,
    pub final_phase_step: f64,
    /// Change of the extremal value during local refinement.
    pub refinement_change: f64,
}

impl GridInfo {
    fn new(settings: GridSettings, r: &ExtremumResult, coarse_best: f64) -> Self {
        GridInfo {
            settings,
            coarse_points: r.coarse_points,
            evaluations: r.evaluations,
            final_moduli_step: r.final_moduli_step,
            final_phase_step: r.final_phase_step,
            refinement_change: (r.value - coarse_best).abs(),
        }
    }
}

/// Extremum over directions of `Vol(A ∩ H_ξ) - Vol(B ∩ H_ξ)`.
#[derive(Debug, Clone, Serialize)]
pub struct SectionDifference {
    pub extremum: Extremum,
    pub value: f64,
    pub location: Vec<f64>,
    pub section_a: f64,
    pub section_b: f64,
    /// Quadrature error of both sections at the location plus the
    /// refinement change.
    pub error_estimate: f64,
    pub grid: GridInfo,
}

fn section_difference(
    a: &BodySpec,
    b: &BodySpec,
    settings: &Settings,
    extremum: Extremum,
) -> Result<SectionDifference> {
    let n = same_dim(a, b)?;
    let grid = settings.grid(n).for_phases(a.depends_on_phases() || b.depends_on_phases());
    let rule = settings.section_rule(n)?;
    let ta = cached_table(a, settings, &grid)?;
    let tb = cached_table(b, settings, &grid)?;
    let values: Vec<f64> = ta.values.iter().zip(&tb.values).map(|(x, y)| x - y).collect();
    let coarse_best = match extremum {
        Extremum::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        Extremum::Min => values.iter().copied().fold(f64::INFINITY, f64::min),
    };
    let r = refine(n, &grid, extremum, &ta.points, &values, |d| {
        let basis = hyperplane_basis(d);
        section_value(a, &basis, &rule) - section_value(b, &basis, &rule)
    });
    let sa = section_volume_direct(a, &r.direction, &rule)?;
    let sb = section_volume_direct(b, &r.direction, &rule)?;
    let grid_info = GridInfo::new(grid, &r, coarse_best);
    Ok(SectionDifference {
        extremum,
        value: r.value,
        location: r.xi.clone(),
        section_a: sa.value,
        section_b: sb.value,
        error_estimate: sa.error_estimate + sb.error_estimate + grid_info.refinement_change,
        grid: grid_info,
    })
}

/// Smallest `ε ≥ 0` with `Vol(K ∩ H_ξ) ≤ Vol(L ∩ H_ξ) + ε` on the grid.
#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub epsilon: f64,
    pub difference: SectionDifference,
}

pub fn section_gap(k: &BodySpec, l: &BodySpec, settings: &Settings) -> Result<GapReport> {
    settings.check()?;
    let difference = section_difference(k, l, settings, Extremum::Max)?;
    Ok(GapReport { epsilon: difference.value.max(0.0), difference })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    Stability,
    Separation,
}

#[derive(Debug, Clone, Serialize)]
pub struct InradiusSummary {
    pub value: f64,
    pub min_radius: f64,
    pub location: Vec<f64>,
    pub grid: GridInfo,
}

/// Both sides of a volume comparison with the section gap that enters it.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub check: CheckKind,
    pub n: usize,
    pub body_k: BodySpec,
    pub body_l: BodySpec,
    pub epsilon: f64,
    /// `"computed"` from the section grid or `"given"` by the caller.
    pub epsilon_source: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sections: Option<SectionDifference>,
    pub volume_k: VolumeReport,
    pub volume_l: VolumeReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inradius_k: Option<InradiusSummary>,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub tolerance: f64,
    pub tolerance_multiplier: f64,
    pub hypothesis_satisfied: bool,
    /// Whether `margin ≥ -tolerance`.
    pub conclusion_holds: bool,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub section_rule: RuleInfo,
}

/// `Vol(K)^{(n-1)/n} ≤ Vol(L)^{(n-1)/n} + ε` with `ε` the section gap.
pub fn stability_verify(k: &BodySpec, l: &BodySpec, settings: &Settings) -> Result<StabilityReport> {
    stability_verify_with(k, l, settings, None)
}

/// As [`stability_verify`], optionally with a caller-supplied `ε`. A given
/// `ε` smaller than the computed gap leaves the hypothesis unsatisfied and
/// the check vacuous.
pub fn stability_verify_with(
    k: &BodySpec,
    l: &BodySpec,
    settings: &Settings,
    given_epsilon: Option<f64>,
) -> Result<StabilityReport> {
    settings.check()?;
    let n = same_dim(k, l)?;
    ensure_valid(k, settings)?;
    ensure_valid(l, settings)?;
    if let Some(e) = given_epsilon {
        if !(e.is_finite() && e >= 0.0) {
            return Err(Error::invalid(format!("ε must be finite and non-negative, got {e}")));
        }
    }
    let gap = section_gap(k, l, settings)?;
    let vk = cached_volume(k, settings)?;
    let vl = cached_volume(l, settings)?;
    let a = (n as f64 - 1.0) / n as f64;
    let mult = settings.tolerance_multiplier;

    let (epsilon, source, hypothesis, eps_err) = match given_epsilon {
        None => (gap.epsilon, "computed", true, gap.difference.error_estimate),
        Some(e) => {
            let holds = gap.difference.value <= e + mult * gap.difference.error_estimate;
            (e, "given", holds, 0.0)
        }
    };
    let lhs = vk.value.powf(a);
    let rhs = vl.value.powf(a) + epsilon;
    let margin = rhs - lhs;
    let tolerance = mult
        * (a * vk.value.powf(a - 1.0) * vk.error_estimate
            + a * vl.value.powf(a - 1.0) * vl.error_estimate
            + eps_err)
        + ROUNDING_FLOOR * lhs.max(rhs.abs());
    let conclusion_holds = margin >= -tolerance;
    let note = (!hypothesis).then(|| {
        "hypothesis not satisfied for the given ε; conclusion not asserted".to_string()
    });
    Ok(StabilityReport {
        check: CheckKind::Stability,
        n,
        body_k: k.clone(),
        body_l: l.clone(),
        epsilon,
        epsilon_source: source.into(),
        sections: Some(gap.difference),
        volume_k: vk,
        volume_l: vl,
        inradius_k: None,
        lhs,
        rhs,
        margin,
        tolerance,
        tolerance_multiplier: mult,
        hypothesis_satisfied: hypothesis,
        conclusion_holds,
        pass: !hypothesis || conclusion_holds,
        note,
        section_rule: settings.section_rule(n)?.info(),
    })
}

/// `|Vol(K)^{(n-1)/n} - Vol(L)^{(n-1)/n}| ≤ max_ξ |ΔVol_{2n-2}|`, checked as
/// the stability inequality in both orders.
#[derive(Debug, Clone, Serialize)]
pub struct Corollary1Report {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub forward: StabilityReport,
    pub backward: StabilityReport,
}

pub fn corollary1_verify(k: &BodySpec, l: &BodySpec, settings: &Settings) -> Result<Corollary1Report> {
    let forward = stability_verify(k, l, settings)?;
    let backward = stability_verify(l, k, settings)?;
    let lhs = (forward.lhs - backward.lhs).abs();
    let rhs = forward.epsilon.max(backward.epsilon);
    Ok(Corollary1Report {
        lhs,
        rhs,
        margin: rhs - lhs,
        tolerance: forward.tolerance.max(backward.tolerance),
        pass: forward.pass && backward.pass,
        forward,
        backward,
    })
}

/// `Vol(K)^{(n-1)/n} ≤ Vol(L)^{(n-1)/n} - (π r(K)²/n) ε` where `ε` is the
/// largest constant with `Vol(K ∩ H_ξ) ≤ Vol(L ∩ H_ξ) - ε` on the grid.
///
/// A negative minimum gap within tolerance is clamped to `ε = 0`; beyond
/// tolerance the hypothesis fails and the check is reported as vacuous.
pub fn separation_verify(k: &BodySpec, l: &BodySpec, settings: &Settings) -> Result<StabilityReport> {
    settings.check()?;
    let n = same_dim(k, l)?;
    ensure_valid(k, settings)?;
    ensure_valid(l, settings)?;
    let mult = settings.tolerance_multiplier;
    let diff = section_difference(l, k, settings, Extremum::Min)?;
    let vk = cached_volume(k, settings)?;
    let vl = cached_volume(l, settings)?;
    let nf = n as f64;
    let a = (nf - 1.0) / nf;

    let grid = settings.grid(n).for_phases(k.depends_on_phases());
    let rmin = extremize(n, &grid, Extremum::Min, |d| k.rho_unchecked(d.xi()));
    let coarse = crate::directions::coarse_directions(n, &grid)
        .iter()
        .map(|d| k.rho_unchecked(d.xi()))
        .fold(f64::INFINITY, f64::min);
    let inradius = rmin.value / vk.value.powf(1.0 / (2.0 * nf));
    let inradius_info = InradiusSummary {
        value: inradius,
        min_radius: rmin.value,
        location: rmin.xi.clone(),
        grid: GridInfo::new(grid, &rmin, coarse),
    };

    let hypothesis = diff.value >= -mult * diff.error_estimate;
    let epsilon = diff.value.max(0.0);
    let note = if !hypothesis {
        Some("hypothesis not satisfied, degenerate check".to_string())
    } else if diff.value < 0.0 {
        Some("ε clamped to zero within tolerance, degenerate check".to_string())
    } else {
        None
    };
    let coupling = PI * inradius * inradius / nf;
    let lhs = vk.value.powf(a);
    let rhs = vl.value.powf(a) - coupling * epsilon;
    let margin = rhs - lhs;
    // r² ∝ ρ_min² V^{-1/n}
    let r2_rel_err = 2.0 * inradius_info.grid.refinement_change / rmin.value
        + vk.error_estimate / (nf * vk.value);
    let tolerance = mult
        * (a * vk.value.powf(a - 1.0) * vk.error_estimate
            + a * vl.value.powf(a - 1.0) * vl.error_estimate
            + coupling * diff.error_estimate
            + coupling * epsilon * r2_rel_err)
        + ROUNDING_FLOOR * lhs.max(rhs.abs());
    let conclusion_holds = margin >= -tolerance;
    Ok(StabilityReport {
        check: CheckKind::Separation,
        n,
        body_k: k.clone(),
        body_l: l.clone(),
        epsilon,
        epsilon_source: "computed".into(),
        sections: Some(diff),
        volume_k: vk,
        volume_l: vl,
        inradius_k: Some(inradius_info),
        lhs,
        rhs,
        margin,
        tolerance,
        tolerance_multiplier: mult,
        hypothesis_satisfied: hypothesis,
        conclusion_holds,
        pass: !hypothesis || conclusion_holds,
        note,
        section_rule: settings.section_rule(n)?.info(),
    })
}

/// Both sides of the spherical Parseval identity for the exponent pair
/// `(p, 2n - p)`.
#[derive(Debug, Clone, Serialize)]
pub struct ParsevalReport {
    pub body_k: BodySpec,
    pub body_l: BodySpec,
    pub p: f64,
    pub jmax: u32,
    /// `∫ (‖·‖_K^{-p})^∧ (‖·‖_L^{-2n+p})^∧` over the sphere.
    pub lhs: f64,
    /// `(2π)^{2n} ∫ ‖x‖_K^{-p} ‖x‖_L^{-2n+p}` over the sphere.
    pub rhs: f64,
    pub relative_error: f64,
    pub warnings: Vec<String>,
    pub rule: RuleInfo,
}

pub fn parseval_check(k: &BodySpec, l: &BodySpec, p: f64, settings: &Settings) -> Result<ParsevalReport> {
    settings.check()?;
    let n = same_dim(k, l)?;
    let big_n = 2 * n;
    if !(p > 0.0 && p < big_n as f64) {
        return Err(Error::invalid(format!("p = {p} must lie in (0, {big_n})")));
    }
    let rule = settings.sphere_rule(n)?;
    let jmax = settings.jmax(big_n);
    let q = big_n as f64 - p;
    let fk = ft_norm_power(k, p, jmax, &rule)?;
    let fl = ft_norm_power(l, q, jmax, &rule)?;
    let lhs = rule.integrate(|x| fk.eval(x) * fl.eval(x))?;
    let rhs = (2.0 * PI).powi(big_n as i32)
        * rule.integrate(|x| k.rho_unchecked(x).powf(p) * l.rho_unchecked(x).powf(q))?;
    let mut warnings = fk.warnings.clone();
    warnings.extend(fl.warnings.iter().cloned());
    Ok(ParsevalReport {
        body_k: k.clone(),
        body_l: l.clone(),
        p,
        jmax,
        lhs,
        rhs,
        relative_error: (lhs - rhs).abs() / rhs.abs(),
        warnings,
        rule: rule.info(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PositivityMode {
    /// n ∈ {2, 3}; the result carries a pass flag.
    Assert,
    /// Any supported n; values are reported without a verdict.
    Exploratory,
}

#[derive(Debug, Clone, Serialize)]
pub struct PositivityReport {
    pub body: BodySpec,
    pub mode: PositivityMode,
    pub jmax: u32,
    pub min: f64,
    pub max: f64,
    pub location: Vec<f64>,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pass: Option<bool>,
    pub warnings: Vec<String>,
    pub grid: GridInfo,
}

/// Minimum of `(‖·‖_K^{-2})^∧` over the refined direction grid.
pub fn positivity_check(
    k: &BodySpec,
    settings: &Settings,
    mode: PositivityMode,
) -> Result<PositivityReport> {
    settings.check()?;
    let n = k.n();
    match mode {
        PositivityMode::Assert => k.dim().require_theorem_range()?,
        PositivityMode::Exploratory if n > 4 => {
            return Err(Error::invalid(format!("n = {n} is beyond the supported range")))
        }
        PositivityMode::Exploratory => {}
    }
    let rule = settings.sphere_rule(n)?;
    let jmax = settings.jmax(2 * n);
    let ft = ft_norm_power(k, 2.0, jmax, &rule)?;
    let grid = settings.grid(n).for_phases(k.depends_on_phases());
    let points = crate::directions::coarse_grid(n, &grid);
    let values = ft.eval_many(&points.iter().map(|p| p.to_direction().xi().to_vec()).collect::<Vec<_>>());
    let eval = |d: &crate::bodies::Direction| ft.eval(d.xi());
    let lo = refine(n, &grid, Extremum::Min, &points, &values, eval);
    let hi = refine(n, &grid, Extremum::Max, &points, &values, eval);
    let coarse_min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let threshold = settings.positivity_threshold;
    let pass = (mode == PositivityMode::Assert).then(|| lo.value >= -threshold * hi.value);
    Ok(PositivityReport {
        body: k.clone(),
        mode,
        jmax,
        min: lo.value,
        max: hi.value,
        location: lo.xi.clone(),
        threshold,
        pass,
        warnings: ft.warnings.clone(),
        grid: GridInfo::new(grid, &lo, coarse_min),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaRow {
    pub n: u32,
    /// `Γ(n)^{1/n}`
    pub lhs: f64,
    /// `n^{(n-1)/n}`
    pub rhs: f64,
    pub pass: bool,
    pub strict: bool,
}

/// `Γ(n)^{1/n} ≤ n^{(n-1)/n}` for `n = 1..=n_max`, compared in log space.
pub fn gamma_lemma_check(n_max: u32) -> Result<Vec<GammaRow>> {
    if !(1..=170).contains(&n_max) {
        return Err(Error::invalid(format!("n_max = {n_max} must lie in 1..=170")));
    }
    Ok((1..=n_max)
        .map(|n| {
            let nf = n as f64;
            let left = ln_gamma(nf) / nf;
            let right = (nf - 1.0) / nf * nf.ln();
            GammaRow {
                n,
                lhs: left.exp(),
                rhs: right.exp(),
                pass: left <= right,
                strict: left < right,
            }
        })
        .collect())
}
