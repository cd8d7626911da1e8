//! The acceptance matrix run by `cbp suite`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use cbp_core::harmonics::ft_norm_power;
use cbp_core::sections::{section_at, section_volume_direct, section_volume_fourier, volume, volume_with_error};
use cbp_core::settings::Settings;
use cbp_core::special::gamma;
use cbp_core::spherequad::montecarlo::{mc_volume, McEstimate};
use cbp_core::theorems::{
    corollary1_verify, gamma_lemma_check, parseval_check, positivity_check, separation_verify,
    stability_verify, PositivityMode,
};
use cbp_core::{BodySpec, Direction, PerturbationTerm};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliResult;
use crate::report::{num, Outcome, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtMost,
    AtLeast,
}

/// One acceptance criterion: a measured quantity against its bound.
#[derive(Debug, Clone, Serialize)]
pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    pub measured: f64,
    pub bound: f64,
    pub relation: Relation,
    pub pass: bool,
    pub outcome: Outcome,
    pub warnings: Vec<String>,
    pub notes: Vec<String>,
    pub details: Value,
}

impl Criterion {
    fn new(id: u8, name: &'static str, measured: f64, bound: f64, relation: Relation) -> Self {
        let pass = match relation {
            Relation::AtMost => measured <= bound,
            Relation::AtLeast => measured >= bound,
        };
        Criterion {
            id,
            name,
            measured,
            bound,
            relation,
            pass,
            outcome: Outcome::Pass,
            warnings: Vec::new(),
            notes: Vec::new(),
            details: Value::Null,
        }
    }

    /// Combines the measured comparison with further conditions and fixes
    /// the outcome.
    fn finish(mut self, extra: bool, warnings: Vec<String>, details: Value) -> Self {
        self.pass &= extra;
        self.warnings = warnings;
        self.details = details;
        self.outcome = Outcome::of_check(self.pass, !self.warnings.is_empty());
        self
    }

    fn note(mut self, s: impl Into<String>) -> Self {
        self.notes.push(s.into());
        self
    }

    pub fn line(&self) -> String {
        let rel = match self.relation {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
        };
        format!(
            "criterion {:>2} {:<32} {}  measured {:.3e} {rel} {:.1e}",
            self.id,
            self.name,
            if self.pass { "PASS" } else { "FAIL" },
            self.measured,
            self.bound
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub criteria: Vec<Criterion>,
    pub outcome: Outcome,
}

impl SuiteReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["id", "name", "measured", "bound", "relation", "pass", "warnings"]);
        for c in &self.criteria {
            t.push(vec![
                c.id.to_string(),
                c.name.to_string(),
                num(c.measured),
                num(c.bound),
                format!("{:?}", c.relation).to_lowercase(),
                c.pass.to_string(),
                c.warnings.len().to_string(),
            ]);
        }
        t
    }
}

pub const CRITERIA: [u8; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

pub fn run_suite(settings: &Settings) -> CliResult<SuiteReport> {
    let mut criteria = Vec::with_capacity(CRITERIA.len());
    for id in CRITERIA {
        let c = run_criterion(id, settings)?;
        log::info!("{}", c.line());
        criteria.push(c);
    }
    let outcome = criteria.iter().fold(Outcome::Pass, |o, c| o.worst(c.outcome));
    Ok(SuiteReport { criteria, outcome })
}

pub fn run_criterion(id: u8, settings: &Settings) -> CliResult<Criterion> {
    settings.check()?;
    match id {
        1 => euclidean_golden(settings),
        2 => section_cross_check(settings),
        3 => parseval(settings),
        4 => positivity(settings),
        5 => stability_sweep(settings),
        6 => separation_sweep(settings),
        7 => corollary_sweep(settings),
        8 => gamma_lemma(),
        9 => volume_oracles(settings),
        10 => structural_invariants(settings),
        _ => Err(crate::error::CliError::Usage(format!("no criterion {id}"))),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn term(degree: u32, index: usize, coeff: f64) -> PerturbationTerm {
    PerturbationTerm { degree, index, coeff }
}

/// The certified perturbed ball used throughout the matrix.
pub fn perturbed_body(n: usize) -> BodySpec {
    static CACHE: OnceLock<Mutex<HashMap<usize, BodySpec>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(b) = cache.lock().unwrap().get(&n) {
        return b.clone();
    }
    let b = BodySpec::perturbed(n, 1.0, &[term(2, 0, 0.2), term(2, 1, 0.15)])
        .expect("matrix perturbation is convex");
    cache.lock().unwrap().insert(n, b.clone());
    b
}

fn ball(n: usize, r: f64) -> BodySpec {
    BodySpec::euclidean(n, r).unwrap()
}

fn lq(n: usize, q: f64) -> BodySpec {
    BodySpec::lq(n, q, 1.0).unwrap()
}

fn ell(a: &[f64]) -> BodySpec {
    BodySpec::ellipsoid(a).unwrap()
}

/// Bodies of the section cross-check.
pub fn section_bodies(n: usize) -> Vec<BodySpec> {
    let e = if n == 2 { ell(&[1.0, 2.0]) } else { ell(&[1.0, 1.5, 2.0]) };
    vec![ball(n, 1.0), e, lq(n, 2.0), lq(n, 3.0), lq(n, 4.0), perturbed_body(n)]
}

/// Bodies whose ordered pairs make up the theorem sweeps.
pub fn matrix_bodies(n: usize) -> Vec<BodySpec> {
    if n == 2 {
        vec![
            ball(2, 1.0),
            ball(2, 1.1),
            BodySpec::polydisc(2, 1.0).unwrap(),
            lq(2, 1.0),
            lq(2, 4.0),
            ell(&[1.0, 3.0]),
            ell(&[2.0, 1.2]),
            perturbed_body(2),
        ]
    } else {
        vec![
            ball(3, 1.0),
            ball(3, 1.2),
            BodySpec::polydisc(3, 1.0).unwrap(),
            lq(3, 1.0),
            lq(3, 4.0),
            ell(&[1.0, 1.5, 3.0]),
            perturbed_body(3),
        ]
    }
}

/// Convex bodies whose transform positivity is asserted, and the ones
/// only reported.
pub fn positivity_bodies(n: usize) -> (Vec<BodySpec>, Vec<BodySpec>) {
    let mut asserted = vec![ball(n, 1.0), lq(n, 1.0), lq(n, 3.0), lq(n, 4.0)];
    let mut exploratory = Vec::new();
    if n == 2 {
        asserted.extend([BodySpec::polydisc(2, 1.0).unwrap(), ell(&[1.0, 2.0]), ell(&[1.0, 3.0])]);
    } else {
        asserted.extend([ell(&[1.0, 1.5, 2.0]), ell(&[1.0, 1.5, 3.0])]);
        exploratory.push(BodySpec::polydisc(3, 1.0).unwrap());
    }
    asserted.push(perturbed_body(n));
    (asserted, exploratory)
}

fn ordered_pairs(n: usize) -> Vec<(BodySpec, BodySpec)> {
    let bodies = matrix_bodies(n);
    let mut pairs = Vec::new();
    for (i, k) in bodies.iter().enumerate() {
        for (j, l) in bodies.iter().enumerate() {
            if i != j {
                pairs.push((k.clone(), l.clone()));
            }
        }
    }
    pairs
}

fn all_pairs() -> Vec<(BodySpec, BodySpec)> {
    let mut p = ordered_pairs(2);
    p.extend(ordered_pairs(3));
    p
}

fn euclidean_golden(settings: &Settings) -> CliResult<Criterion> {
    let mut worst = 0.0f64;
    let mut rows = Vec::new();
    for n in [2usize, 3] {
        let p = 2.0 * n as f64 - 2.0;
        let ft = ft_norm_power(&ball(n, 1.0), p, settings.jmax(2 * n), &*settings.sphere_rule(n)?)?;
        let expected = 4.0 * PI.powi(n as i32) / gamma(n as f64 - 1.0);
        let mut dirs = Direction::random(n, 16, settings.seed)?;
        dirs.push(Direction::basis(n, 0)?);
        let err = dirs.iter().map(|d| rel(ft.eval(d.xi()), expected)).fold(0.0, f64::max);
        worst = worst.max(err);
        rows.push(json!({"n": n, "expected": expected, "max_relative_error": err}));
    }
    Ok(Criterion::new(1, "euclidean golden values", worst, 1e-10, Relation::AtMost).finish(
        true,
        Vec::new(),
        json!(rows),
    ))
}

fn section_cross_check(settings: &Settings) -> CliResult<Criterion> {
    let mut worst = 0.0f64;
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for n in [2usize, 3] {
        let dirs = Direction::random(n, 64, settings.seed)?;
        let rule = settings.section_rule(n)?;
        let sphere = settings.sphere_rule(n)?;
        let jmax = settings.jmax(2 * n);
        for body in section_bodies(n) {
            let ft = ft_norm_power(&body, 2.0 * n as f64 - 2.0, jmax, &sphere)?;
            let mut max = 0.0f64;
            for d in &dirs {
                let a = section_volume_direct(&body, d, &rule)?.value;
                let b = section_volume_fourier(&body, d, &ft)?.value;
                max = max.max(rel(b, a));
            }
            worst = worst.max(max);
            warnings.extend(ft.warnings.iter().map(|w| format!("{}: {w}", body.label())));
            rows.push(json!({"n": n, "body": body.label(), "jmax": jmax, "max_discrepancy": max}));
        }
    }
    Ok(Criterion::new(2, "section cross-validation", worst, 5e-3, Relation::AtMost)
        .finish(true, warnings, json!(rows))
        .note("64 seeded directions per body; polydisc excluded as in the criterion's body list"))
}

fn parseval(settings: &Settings) -> CliResult<Criterion> {
    let target = 32.0 * PI.powi(6);
    let b = ball(2, 1.0);
    let e = parseval_check(&b, &b, 2.0, settings)?;
    let euclid_err = rel(e.lhs, target).max(rel(e.rhs, target));
    let pairs = [(ell(&[1.0, 2.0]), lq(2, 4.0)), (ell(&[1.0, 2.0]), ell(&[2.0, 1.2]))];
    let mut worst = 0.0f64;
    let mut decreasing = true;
    let mut warnings = e.warnings.clone();
    let mut rows = vec![json!({"pair": "ball/ball", "lhs": e.lhs, "rhs": e.rhs, "relative_error": euclid_err})];
    for (k, l) in &pairs {
        let r = parseval_check(k, l, 2.0, settings)?;
        worst = worst.max(r.relative_error);
        warnings.extend(r.warnings.iter().cloned());
        let seq = [12u32, 16, 20]
            .iter()
            .map(|&j| parseval_check(k, l, 2.0, &settings.with_jmax(j)).map(|r| r.relative_error))
            .collect::<Result<Vec<_>, _>>()?;
        let dec = seq.windows(2).all(|w| w[1] < w[0]);
        decreasing &= dec;
        rows.push(json!({
            "pair": format!("{}/{}", k.label(), l.label()),
            "relative_error": r.relative_error,
            "jmax": r.jmax,
            "jmax_12_16_20": seq,
            "strictly_decreasing": dec,
        }));
    }
    let ok = euclid_err <= 1e-10 && decreasing;
    Ok(Criterion::new(3, "parseval identity", worst, 1e-2, Relation::AtMost)
        .finish(ok, warnings, json!(rows))
        .note(format!("euclidean relative error {euclid_err:.3e} (bound 1e-10); decreasing in Jmax: {decreasing}")))
}

fn positivity(settings: &Settings) -> CliResult<Criterion> {
    let mut worst = f64::INFINITY;
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    let mut all = true;
    for n in [2usize, 3] {
        let (asserted, exploratory) = positivity_bodies(n);
        for body in &asserted {
            let r = positivity_check(body, settings, PositivityMode::Assert)?;
            worst = worst.min(r.min / r.max);
            all &= r.pass == Some(true);
            warnings.extend(r.warnings.iter().map(|w| format!("{}: {w}", body.label())));
            rows.push(json!({"body": body.label(), "min": r.min, "max": r.max, "pass": r.pass, "asserted": true}));
        }
        for body in &exploratory {
            let r = positivity_check(body, settings, PositivityMode::Exploratory)?;
            rows.push(json!({"body": body.label(), "min": r.min, "max": r.max, "asserted": false}));
        }
    }
    Ok(Criterion::new(4, "transform positivity", worst, -settings.positivity_threshold, Relation::AtLeast)
        .finish(all, warnings, json!(rows))
        .note("measured is min/max over the asserted bodies; the n = 3 polydisc row is exploratory"))
}

fn sweep_rows<F>(pairs: &[(BodySpec, BodySpec)], check: F) -> CliResult<(usize, f64, Vec<Value>)>
where
    F: Fn(&BodySpec, &BodySpec) -> CliResult<(bool, f64, Value)>,
{
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    let mut rows = Vec::with_capacity(pairs.len());
    for (k, l) in pairs {
        let (pass, slack, row) = check(k, l)?;
        violations += usize::from(!pass);
        worst = worst.min(slack);
        rows.push(row);
    }
    Ok((violations, worst, rows))
}

fn stability_sweep(settings: &Settings) -> CliResult<Criterion> {
    let pairs = all_pairs();
    let (violations, slack, rows) = sweep_rows(&pairs, |k, l| {
        let r = stability_verify(k, l, settings)?;
        let row = json!({
            "k": k.label(), "l": l.label(), "epsilon": r.epsilon, "lhs": r.lhs, "rhs": r.rhs,
            "margin": r.margin, "tolerance": r.tolerance, "pass": r.pass,
        });
        Ok((r.pass, r.margin + r.tolerance, row))
    })?;
    Ok(Criterion::new(5, "stability sweep violations", violations as f64, 0.0, Relation::AtMost)
        .finish(pairs.len() >= 50, Vec::new(), json!(rows))
        .note(format!("{} ordered pairs; smallest margin + tol {slack:.3e}", pairs.len())))
}

fn corollary_sweep(settings: &Settings) -> CliResult<Criterion> {
    let pairs = all_pairs();
    let (violations, slack, rows) = sweep_rows(&pairs, |k, l| {
        let r = corollary1_verify(k, l, settings)?;
        let row = json!({
            "k": k.label(), "l": l.label(), "lhs": r.lhs, "rhs": r.rhs, "margin": r.margin,
            "tolerance": r.tolerance, "pass": r.pass,
        });
        Ok((r.pass, r.margin + r.tolerance, row))
    })?;
    Ok(Criterion::new(7, "corollary sweep violations", violations as f64, 0.0, Relation::AtMost)
        .finish(pairs.len() >= 50, Vec::new(), json!(rows))
        .note(format!("{} ordered pairs, both orders each; smallest margin + tol {slack:.3e}", pairs.len())))
}

fn separation_sweep(settings: &Settings) -> CliResult<Criterion> {
    let eq = separation_verify(&ball(2, 1.0), &ball(2, 1.2), settings)?;
    let mut pairs = all_pairs();
    pairs.push((ball(3, 1.0), ell(&[1.5, 1.5, 1.5])));
    let mut satisfied = 0;
    let (violations, _, rows) = sweep_rows(&pairs, |k, l| {
        let r = separation_verify(k, l, settings)?;
        let row = json!({
            "k": k.label(), "l": l.label(), "epsilon": r.epsilon, "hypothesis_satisfied": r.hypothesis_satisfied,
            "margin": r.margin, "tolerance": r.tolerance, "pass": r.pass, "note": r.note,
        });
        Ok((r.pass, r.margin + r.tolerance, row))
    })?;
    for row in &rows {
        satisfied += usize::from(row["hypothesis_satisfied"] == json!(true));
    }
    Ok(Criterion::new(6, "separation equality case", eq.margin.abs(), 1e-9, Relation::AtMost)
        .finish(violations == 0 && eq.pass, Vec::new(), json!({"equality_case": eq, "pairs": rows}))
        .note(format!(
            "{} pairs, {satisfied} with the hypothesis satisfied, {violations} violations",
            pairs.len()
        )))
}

fn gamma_lemma() -> CliResult<Criterion> {
    let rows = gamma_lemma_check(170)?;
    let failures = rows.iter().filter(|r| !r.pass).count();
    let shape = rows[0].lhs == rows[0].rhs && rows[1..].iter().all(|r| r.strict);
    Ok(Criterion::new(8, "gamma lemma failures", failures as f64, 0.0, Relation::AtMost).finish(
        shape,
        Vec::new(),
        json!(rows),
    ))
}

type McCache = Mutex<HashMap<(String, u64, u64), McEstimate>>;

fn cached_mc(body: &BodySpec, samples: u64, seed: u64) -> CliResult<McEstimate> {
    static CACHE: OnceLock<McCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (serde_json::to_string(body)?, samples, seed);
    if let Some(m) = cache.lock().unwrap().get(&key) {
        return Ok(*m);
    }
    let m = mc_volume(body, samples, seed)?;
    cache.lock().unwrap().insert(key, m);
    Ok(m)
}

/// Every distinct body of the matrix and the cross-check.
pub fn volume_bodies() -> Vec<BodySpec> {
    let mut out: Vec<BodySpec> = Vec::new();
    for n in [2usize, 3] {
        for b in matrix_bodies(n).into_iter().chain(section_bodies(n)) {
            if !out.contains(&b) {
                out.push(b);
            }
        }
    }
    out
}

fn volume_oracles(settings: &Settings) -> CliResult<Criterion> {
    let mut worst_z = 0.0f64;
    let mut worst_closed = 0.0f64;
    let mut rows = Vec::new();
    for body in volume_bodies() {
        let v = volume_with_error(&body, &*settings.sphere_rule(body.n())?)?;
        let mc = cached_mc(&body, settings.mc_samples, settings.seed)?;
        let z = mc.z_score(v.value).abs();
        worst_z = worst_z.max(z);
        let closed = body.closed_form_volume();
        let closed_err = closed.map(|c| rel(v.value, c));
        if let Some(e) = closed_err {
            worst_closed = worst_closed.max(e);
        }
        rows.push(json!({
            "body": body.label(), "quadrature": v.value, "method": v.method, "monte_carlo": mc.estimate,
            "std_error": mc.std_error, "z": z, "closed_form": closed, "closed_form_relative_error": closed_err,
        }));
    }
    Ok(Criterion::new(9, "volume oracle z-score", worst_z, 3.0, Relation::AtMost)
        .finish(worst_closed <= 1e-3, Vec::new(), json!(rows))
        .note(format!(
            "{} monte carlo samples per body; worst closed-form relative error {worst_closed:.3e} (bound 1e-3)",
            settings.mc_samples
        )))
}

fn random_body(rng: &mut ChaCha8Rng, n: usize) -> BodySpec {
    match rng.random_range(0..5) {
        0 => ball(n, rng.random_range(0.5..2.0)),
        1 => BodySpec::lq(n, rng.random_range(1.0..6.0), rng.random_range(0.5..2.0)).unwrap(),
        2 => BodySpec::polydisc(n, rng.random_range(0.5..2.0)).unwrap(),
        3 => ell(&(0..n).map(|_| rng.random_range(0.5..2.0)).collect::<Vec<_>>()),
        _ => perturbed_body(n).scaled(rng.random_range(0.5..2.0)).unwrap(),
    }
}

#[derive(Debug, Default, Clone, Copy, Serialize)]
struct InvariantErrors {
    homogeneity: f64,
    rotation: f64,
    complex_line: f64,
    volume_scaling: f64,
    section_scaling: f64,
    transform_scaling: f64,
}

impl InvariantErrors {
    fn max(&self) -> f64 {
        [
            self.homogeneity,
            self.rotation,
            self.complex_line,
            self.volume_scaling,
            self.section_scaling,
            self.transform_scaling,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub const INVARIANT_TRIALS: usize = 1000;
/// Truncation degree of the transforms in the scaling trials. Scaling is
/// exact at every degree, so a low one keeps the trials cheap.
const SCALING_JMAX: u32 = 8;

fn structural_invariants(settings: &Settings) -> CliResult<Criterion> {
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut e = InvariantErrors::default();
    let mut counts = [0usize; 2];
    for _ in 0..INVARIANT_TRIALS {
        let n = if rng.random_bool(0.5) { 2 } else { 3 };
        counts[n - 2] += 1;
        let k = random_body(&mut rng, n);
        let d = Direction::random(n, 1, rng.random())?.pop().unwrap();
        let len: f64 = rng.random_range(0.1..10.0);
        let x: Vec<f64> = d.xi().iter().map(|v| v * len).collect();
        let lambda = rng.random_range(0.1..5.0) * if rng.random_bool(0.5) { -1.0 } else { 1.0 };
        let theta = rng.random_range(0.0..2.0 * PI);
        let r = rng.random_range(0.5..2.0);
        let p = rng.random_range(0.5..2.0 * n as f64 - 0.5);

        let nx = k.norm(&x)?;
        let lx: Vec<f64> = x.iter().map(|v| v * lambda).collect();
        e.homogeneity = e.homogeneity.max(rel(k.norm(&lx)?, lambda.abs() * nx));
        let rx: Vec<f64> = d.rotated(theta).xi().iter().map(|v| v * len).collect();
        e.rotation = e.rotation.max(rel(k.norm(&rx)?, nx));

        let rule = settings.section_rule(n)?;
        let s = section_at(&k, &d, &rule);
        e.complex_line = e.complex_line.max(rel(section_at(&k, &d.rotated(theta), &rule), s));
        let rk = k.scaled(r)?;
        let big = 2 * n as i32;
        e.section_scaling = e.section_scaling.max(rel(section_at(&rk, &d, &rule), r.powi(big - 2) * s));
        let sphere = settings.sphere_rule(n)?;
        e.volume_scaling =
            e.volume_scaling.max(rel(volume(&rk, &sphere)?, r.powi(big) * volume(&k, &sphere)?));
        let f = ft_norm_power(&k, p, SCALING_JMAX, &sphere)?;
        let fr = ft_norm_power(&rk, p, SCALING_JMAX, &sphere)?;
        let (a, b) = (fr.eval(d.xi()), r.powf(p) * f.eval(d.xi()));
        let scale = a.abs().max(b.abs()).max(r.powf(p) * f.eval(Direction::basis(n, 0)?.xi()).abs());
        e.transform_scaling = e.transform_scaling.max((a - b).abs() / scale);
    }
    Ok(Criterion::new(10, "structural invariants", e.max(), 1e-10, Relation::AtMost)
        .finish(true, Vec::new(), json!({"trials": INVARIANT_TRIALS, "n2": counts[0], "n3": counts[1], "max_relative_errors": e}))
        .note("transform differences are relative to the larger of the two values and the value at e1"))
}
