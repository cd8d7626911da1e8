//! Origin-symmetric convex bodies in ℝ^{2n} that are invariant under the
//! simultaneous rotation of every coordinate pair.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::harmonics::basis::{degree_labels, EvalScratch, HarmonicSet};
use crate::special::ln_gamma;

/// Complex dimension `n`; the body lives in ℝ^N with N = 2n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct ComplexDim(usize);

impl ComplexDim {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("complex dimension must be >= 2, got {n}")));
        }
        Ok(ComplexDim(n))
    }

    pub fn n(self) -> usize {
        self.0
    }

    /// Real dimension N = 2n.
    pub fn real(self) -> usize {
        2 * self.0
    }

    /// The volume-comparison results are only asserted for n ∈ {2, 3}.
    pub fn require_theorem_range(self) -> Result<()> {
        if matches!(self.0, 2 | 3) {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "theorem checks require n in {{2, 3}}, got n = {}",
                self.0
            )))
        }
    }
}

impl TryFrom<usize> for ComplexDim {
    type Error = Error;
    fn try_from(n: usize) -> Result<Self> {
        ComplexDim::new(n)
    }
}

impl From<ComplexDim> for usize {
    fn from(d: ComplexDim) -> usize {
        d.0
    }
}

/// Exponent of a complex ℓ_q ball; `q = ∞` is the polydisc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LqExponent(f64);

impl LqExponent {
    pub fn new(q: f64) -> Result<Self> {
        if q.is_nan() || q < 1.0 {
            return Err(Error::invalid(format!("lq exponent must lie in [1, inf], got {q}")));
        }
        Ok(LqExponent(q))
    }

    pub const INFINITY: LqExponent = LqExponent(f64::INFINITY);

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }
}

impl Serialize for LqExponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for LqExponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let q = match Raw::deserialize(d)? {
            Raw::Num(q) => q,
            Raw::Text(t) => match t.to_ascii_lowercase().as_str() {
                "inf" | "infinity" => f64::INFINITY,
                other => other
                    .parse::<f64>()
                    .map_err(|_| serde::de::Error::custom(format!("bad exponent {t:?}")))?,
            },
        };
        LqExponent::new(q).map_err(serde::de::Error::custom)
    }
}

/// One term `c · Y_{j,ℓ}` of a perturbed radial function, where ℓ indexes
/// the rotation-invariant real harmonics of degree `j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationTerm {
    pub degree: u32,
    pub index: usize,
    pub coeff: f64,
}

fn default_scale() -> f64 {
    1.0
}

/// Parametric family of the body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
pub enum BodyKind {
    #[serde(rename = "euclidean")]
    EuclideanBall { radius: f64 },
    /// `{ z : (Σ |z_k|^q)^{1/q} ≤ scale }`
    #[serde(rename = "lq")]
    ComplexLqBall {
        q: LqExponent,
        #[serde(default = "default_scale")]
        scale: f64,
    },
    /// `{ z : Σ |z_k|²/a_k² ≤ 1 }`
    #[serde(rename = "ellipsoid")]
    ComplexEllipsoid { semiaxes: Vec<f64> },
    /// Radial function `radius · (1 + Σ c·Y_{j,ℓ})`.
    #[serde(rename = "perturbed")]
    PerturbedBall {
        radius: f64,
        terms: Vec<PerturbationTerm>,
    },
}

#[derive(Debug)]
struct Perturbation {
    set: HarmonicSet,
    coeffs: Vec<f64>,
}

/// An origin-symmetric, rotation-invariant body given by its norm.
#[derive(Clone)]
pub struct BodySpec {
    dim: ComplexDim,
    kind: BodyKind,
    perturbation: Option<Arc<Perturbation>>,
}

impl fmt::Debug for BodySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BodySpec")
            .field("n", &self.dim.n())
            .field("kind", &self.kind)
            .finish()
    }
}

impl PartialEq for BodySpec {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.kind == other.kind
    }
}

#[derive(Serialize, Deserialize)]
struct BodyDoc {
    n: usize,
    #[serde(flatten)]
    kind: BodyKind,
}

impl Serialize for BodySpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BodyDoc {
            n: self.dim.n(),
            kind: self.kind.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BodySpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = BodyDoc::deserialize(d)?;
        BodySpec::from_kind(doc.n, doc.kind).map_err(serde::de::Error::custom)
    }
}

/// Seed used when certifying the convexity of perturbed balls.
pub const CERTIFICATION_SEED: u64 = 0x5eed_c0de;
/// Number of midpoint pairs drawn during certification.
pub const CERTIFICATION_PAIRS: usize = 100_000;
/// Allowed midpoint excess `‖(x+y)/2‖ - (‖x‖+‖y‖)/2`.
pub const CONVEXITY_TOLERANCE: f64 = 1e-10;

impl BodySpec {
    pub fn euclidean(n: usize, radius: f64) -> Result<Self> {
        Self::from_kind(n, BodyKind::EuclideanBall { radius })
    }

    pub fn lq(n: usize, q: f64, scale: f64) -> Result<Self> {
        Self::from_kind(
            n,
            BodyKind::ComplexLqBall {
                q: LqExponent::new(q)?,
                scale,
            },
        )
    }

    pub fn polydisc(n: usize, scale: f64) -> Result<Self> {
        Self::lq(n, f64::INFINITY, scale)
    }

    pub fn ellipsoid(semiaxes: &[f64]) -> Result<Self> {
        Self::from_kind(
            semiaxes.len(),
            BodyKind::ComplexEllipsoid {
                semiaxes: semiaxes.to_vec(),
            },
        )
    }

    /// Perturbed ball whose convexity has been certified by midpoint
    /// sampling; rejects coefficient sets that fail.
    pub fn perturbed(n: usize, radius: f64, terms: &[PerturbationTerm]) -> Result<Self> {
        let body = Self::perturbed_unchecked(n, radius, terms)?;
        let report = body.validate_with(CERTIFICATION_PAIRS, CERTIFICATION_SEED);
        if let Some(failed) = report.checks.iter().find(|c| !c.passed) {
            return Err(Error::Validation(format!(
                "perturbed ball rejected: {} violated by {:.3e}",
                failed.name, failed.worst_violation
            )));
        }
        Ok(body)
    }

    /// Perturbed ball without the convexity certificate (structural checks
    /// only); use [`BodySpec::validate`] to inspect it.
    pub fn perturbed_unchecked(n: usize, radius: f64, terms: &[PerturbationTerm]) -> Result<Self> {
        Self::from_kind(
            n,
            BodyKind::PerturbedBall {
                radius,
                terms: terms.to_vec(),
            },
        )
    }

    /// Builds a body from its parameters. Perturbed balls are not certified
    /// here.
    pub fn from_kind(n: usize, kind: BodyKind) -> Result<Self> {
        let dim = ComplexDim::new(n)?;
        let positive = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be positive and finite, got {v}")))
            }
        };
        let mut perturbation = None;
        match &kind {
            BodyKind::EuclideanBall { radius } => positive("radius", *radius)?,
            BodyKind::ComplexLqBall { q, scale } => {
                LqExponent::new(q.value())?;
                positive("scale", *scale)?;
            }
            BodyKind::ComplexEllipsoid { semiaxes } => {
                if semiaxes.len() != n {
                    return Err(Error::invalid(format!(
                        "ellipsoid needs {n} semiaxes, got {}",
                        semiaxes.len()
                    )));
                }
                for &a in semiaxes {
                    positive("semiaxis", a)?;
                }
            }
            BodyKind::PerturbedBall { radius, terms } => {
                positive("radius", *radius)?;
                if n > 4 {
                    return Err(Error::invalid("perturbed balls support n <= 4"));
                }
                let mut labels = Vec::with_capacity(terms.len());
                let mut coeffs = Vec::with_capacity(terms.len());
                for t in terms {
                    if t.degree % 2 != 0 {
                        return Err(Error::invalid(format!(
                            "perturbation degree must be even, got {}",
                            t.degree
                        )));
                    }
                    if t.degree > 32 {
                        return Err(Error::invalid("perturbation degree must be <= 32"));
                    }
                    if !t.coeff.is_finite() {
                        return Err(Error::invalid("perturbation coefficient must be finite"));
                    }
                    let available = degree_labels(n, t.degree, true);
                    let label = available.get(t.index).ok_or_else(|| {
                        Error::invalid(format!(
                            "degree {} has {} invariant harmonics, index {} out of range",
                            t.degree,
                            available.len(),
                            t.index
                        ))
                    })?;
                    labels.push(label.clone());
                    coeffs.push(t.coeff);
                }
                perturbation = Some(Arc::new(Perturbation {
                    set: HarmonicSet::from_labels(n, labels),
                    coeffs,
                }));
            }
        }
        Ok(BodySpec {
            dim,
            kind,
            perturbation,
        })
    }

    pub fn dim(&self) -> ComplexDim {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.dim.n()
    }

    pub fn kind(&self) -> &BodyKind {
        &self.kind
    }

    /// `rK`. Scaling multiplies every radius by `r`.
    /// Exact volume for the named families. For `ℓ_q` balls this is the
    /// Dirichlet integral `(2π)^n Γ(2/q)^n / (q^n Γ(2n/q + 1))` over the
    /// moduli, with the polydisc `(πs²)^n` as the limit `q → ∞`.
    pub fn closed_form_volume(&self) -> Option<f64> {
        let n = self.n() as i32;
        let ball = crate::special::ball_volume(2 * self.n());
        match &self.kind {
            BodyKind::EuclideanBall { radius } => Some(ball * radius.powi(2 * n)),
            BodyKind::ComplexEllipsoid { semiaxes } => {
                Some(ball * semiaxes.iter().map(|a| a * a).product::<f64>())
            }
            BodyKind::ComplexLqBall { q, scale } => {
                let q = q.value();
                let unit = if q.is_infinite() {
                    std::f64::consts::PI.powi(n)
                } else {
                    let nf = n as f64;
                    let ln = nf * (2.0 * std::f64::consts::PI).ln() + nf * ln_gamma(2.0 / q)
                        - nf * q.ln()
                        - ln_gamma(2.0 * nf / q + 1.0);
                    ln.exp()
                };
                Some(unit * scale.powi(2 * n))
            }
            BodyKind::PerturbedBall { .. } => None,
        }
    }

    pub fn scaled(&self, r: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::invalid(format!("scale factor must be positive, got {r}")));
        }
        let kind = match &self.kind {
            BodyKind::EuclideanBall { radius } => BodyKind::EuclideanBall { radius: radius * r },
            BodyKind::ComplexLqBall { q, scale } => BodyKind::ComplexLqBall {
                q: *q,
                scale: scale * r,
            },
            BodyKind::ComplexEllipsoid { semiaxes } => BodyKind::ComplexEllipsoid {
                semiaxes: semiaxes.iter().map(|a| a * r).collect(),
            },
            BodyKind::PerturbedBall { radius, terms } => BodyKind::PerturbedBall {
                radius: radius * r,
                terms: terms.clone(),
            },
        };
        Ok(BodySpec {
            dim: self.dim,
            kind,
            perturbation: self.perturbation.clone(),
        })
    }

    /// Short human-readable identifier.
    pub fn label(&self) -> String {
        let n = self.n();
        match &self.kind {
            BodyKind::EuclideanBall { radius } => format!("ball(n={n},r={radius})"),
            BodyKind::ComplexLqBall { q, scale } => {
                let q = if q.is_infinite() {
                    "inf".to_string()
                } else {
                    format!("{}", q.value())
                };
                format!("lq(n={n},q={q},s={scale})")
            }
            BodyKind::ComplexEllipsoid { semiaxes } => {
                let a: Vec<String> = semiaxes.iter().map(|a| format!("{a}")).collect();
                format!("ellipsoid({})", a.join(","))
            }
            BodyKind::PerturbedBall { radius, terms } => {
                let t: Vec<String> = terms
                    .iter()
                    .map(|t| format!("{}:{}:{}", t.degree, t.index, t.coeff))
                    .collect();
                format!("perturbed(n={n},r={radius},[{}])", t.join(";"))
            }
        }
    }

    /// Whether the norm depends on the phases of the coordinates, not just
    /// on the moduli `|z_k|`.
    pub fn depends_on_phases(&self) -> bool {
        match &self.perturbation {
            Some(p) => p.set.labels().iter().any(|l| l.m.iter().any(|&m| m != 0)),
            None => false,
        }
    }

    /// `‖x‖_K`.
    pub fn norm(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim.real() {
            return Err(Error::invalid(format!(
                "expected a vector of length {}, got {}",
                self.dim.real(),
                x.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("vector has non-finite entries"));
        }
        Ok(self.norm_unchecked(x))
    }

    /// `ρ_K(θ) = 1/‖θ‖_K` for a unit vector θ.
    pub fn radial(&self, theta: &[f64]) -> Result<f64> {
        let nrm = self.norm(theta)?;
        if nrm == 0.0 {
            return Err(Error::invalid("radial function is undefined at the zero vector"));
        }
        Ok(nrm.recip())
    }

    /// Norm without argument checks; `x.len()` must equal `2n`.
    pub fn norm_unchecked(&self, x: &[f64]) -> f64 {
        match &self.kind {
            BodyKind::EuclideanBall { radius } => euclid(x) / radius,
            BodyKind::ComplexLqBall { q, scale } => lq_norm(x, q.value()) / scale,
            BodyKind::ComplexEllipsoid { semiaxes } => {
                let mut acc = 0.0;
                for (k, a) in semiaxes.iter().enumerate() {
                    acc += (x[2 * k] * x[2 * k] + x[2 * k + 1] * x[2 * k + 1]) / (a * a);
                }
                acc.sqrt()
            }
            BodyKind::PerturbedBall { radius, .. } => {
                let len = euclid(x);
                if len == 0.0 {
                    return 0.0;
                }
                let p = self.perturbation.as_ref().expect("perturbation plan");
                let mut scratch = p.set.scratch();
                len / (radius * self.perturbation_factor(p, x, &mut scratch))
            }
        }
    }

    fn perturbation_factor(&self, p: &Perturbation, x: &[f64], scratch: &mut EvalScratch) -> f64 {
        let mut values = [0.0f64; 16];
        let mut heap;
        let vals: &mut [f64] = if p.coeffs.len() <= 16 {
            &mut values[..p.coeffs.len()]
        } else {
            heap = vec![0.0; p.coeffs.len()];
            &mut heap
        };
        p.set.eval_into(x, scratch, vals);
        1.0 + vals.iter().zip(&p.coeffs).map(|(y, c)| y * c).sum::<f64>()
    }

    /// Radial function without argument checks, for unit `theta`.
    pub fn rho_unchecked(&self, theta: &[f64]) -> f64 {
        match &self.kind {
            BodyKind::PerturbedBall { radius, .. } => {
                let p = self.perturbation.as_ref().expect("perturbation plan");
                let mut scratch = p.set.scratch();
                radius * self.perturbation_factor(p, theta, &mut scratch)
            }
            _ => self.norm_unchecked(theta).recip(),
        }
    }

    /// Validates homogeneity, rotation invariance, positivity and midpoint
    /// convexity on `sample_count` random samples (convexity uses the same
    /// number of pairs).
    pub fn validate(&self, sample_count: usize, seed: u64) -> ValidationReport {
        self.validate_with(sample_count.max(1), seed)
    }

    fn validate_with(&self, samples: usize, seed: u64) -> ValidationReport {
        let dim = self.dim.real();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gauss = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
        };

        let mut homogeneity = 0.0f64;
        let mut rotation = 0.0f64;
        let mut positivity_ok = true;
        let mut worst_positive = f64::INFINITY;
        let mut convexity = 0.0f64;

        for _ in 0..samples {
            let x = gauss(&mut rng);
            let nx = self.norm_unchecked(&x);
            if !(nx.is_finite() && nx > 0.0) {
                positivity_ok = false;
                worst_positive = worst_positive.min(if nx.is_nan() { f64::NEG_INFINITY } else { nx });
                continue;
            }
            worst_positive = worst_positive.min(nx / euclid(&x));

            let lambda = loop {
                let l: f64 = rng.random_range(-5.0..5.0);
                if l.abs() > 1e-3 {
                    break l;
                }
            };
            let lx: Vec<f64> = x.iter().map(|v| lambda * v).collect();
            let nlx = self.norm_unchecked(&lx);
            homogeneity = homogeneity.max(rel_gap(nlx, lambda.abs() * nx));

            let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let rx = rotate_pairs(&x, theta);
            rotation = rotation.max(rel_gap(self.norm_unchecked(&rx), nx));
        }

        for _ in 0..samples {
            let x = gauss(&mut rng);
            let nx = self.norm_unchecked(&x);
            if !(nx.is_finite() && nx > 0.0) {
                positivity_ok = false;
                continue;
            }
            // put x on the boundary and pick a partner at a random scale
            let x: Vec<f64> = x.iter().map(|v| v / nx).collect();
            let g = gauss(&mut rng);
            let glen = euclid(&g);
            let t = 10f64.powf(rng.random_range(-2.0..0.3));
            let y: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + t * b / glen).collect();
            let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
            let (ny, nm) = (self.norm_unchecked(&y), self.norm_unchecked(&mid));
            let excess = nm - 0.5 * (1.0 + ny);
            if excess.is_nan() {
                convexity = f64::INFINITY;
            } else {
                convexity = convexity.max(excess);
            }
        }

        let positivity_violation = if positivity_ok { 0.0 } else { f64::INFINITY };
        let checks = vec![
            InvariantCheck::new("homogeneity", homogeneity, 1e-12),
            InvariantCheck::new("rotation_invariance", rotation, 1e-12),
            InvariantCheck {
                name: "positivity".into(),
                passed: positivity_ok,
                worst_violation: positivity_violation,
                tolerance: 0.0,
            },
            InvariantCheck {
                name: "convexity".into(),
                passed: positivity_ok && convexity <= CONVEXITY_TOLERANCE,
                worst_violation: convexity.max(0.0),
                tolerance: CONVEXITY_TOLERANCE,
            },
        ];
        ValidationReport {
            body: self.label(),
            samples,
            seed,
            checks,
        }
    }
}

fn rel_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Outcome of one structural check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantCheck {
    pub name: String,
    pub passed: bool,
    pub worst_violation: f64,
    pub tolerance: f64,
}

impl InvariantCheck {
    fn new(name: &str, worst: f64, tolerance: f64) -> Self {
        InvariantCheck {
            name: name.into(),
            passed: worst <= tolerance,
            worst_violation: worst,
            tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub body: String,
    pub samples: usize,
    pub seed: u64,
    pub checks: Vec<InvariantCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect()
    }
}

pub(crate) fn euclid(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn lq_norm(x: &[f64], q: f64) -> f64 {
    let n = x.len() / 2;
    let mut top = 0.0f64;
    for k in 0..n {
        top = top.max(x[2 * k].hypot(x[2 * k + 1]));
    }
    if q.is_infinite() || top == 0.0 {
        return top;
    }
    let mut acc = 0.0;
    for k in 0..n {
        acc += (x[2 * k].hypot(x[2 * k + 1]) / top).powf(q);
    }
    top * acc.powf(q.recip())
}

/// Multiplication by i on every complex coordinate: `(a, b) ↦ (-b, a)`.
pub fn complex_structure(x: &[f64]) -> Result<Vec<f64>> {
    if !x.len().is_multiple_of(2) || x.is_empty() {
        return Err(Error::invalid(format!(
            "complex structure needs an even, non-zero dimension, got {}",
            x.len()
        )));
    }
    Ok(apply_j(x))
}

pub(crate) fn apply_j(x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x.len()];
    for k in 0..x.len() / 2 {
        out[2 * k] = -x[2 * k + 1];
        out[2 * k + 1] = x[2 * k];
    }
    out
}

/// Rotates every coordinate pair counterclockwise by `theta`.
pub fn rotate_pairs(x: &[f64], theta: f64) -> Vec<f64> {
    let (s, c) = theta.sin_cos();
    let mut out = vec![0.0; x.len()];
    for k in 0..x.len() / 2 {
        let (a, b) = (x[2 * k], x[2 * k + 1]);
        out[2 * k] = c * a - s * b;
        out[2 * k + 1] = s * a + c * b;
    }
    out
}

/// A unit vector ξ ∈ S^{2n-1} together with Jξ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Direction {
    xi: Vec<f64>,
    jxi: Vec<f64>,
}

impl Direction {
    /// Normalizes `v` (length 2n, n ≥ 1).
    pub fn new(v: Vec<f64>) -> Result<Self> {
        if !v.len().is_multiple_of(2) || v.len() < 2 {
            return Err(Error::invalid(format!(
                "direction needs an even dimension, got {}",
                v.len()
            )));
        }
        if v.iter().any(|a| !a.is_finite()) {
            return Err(Error::invalid("direction has non-finite entries"));
        }
        let len = euclid(&v);
        if len == 0.0 {
            return Err(Error::invalid("direction must be non-zero"));
        }
        let xi: Vec<f64> = v.iter().map(|a| a / len).collect();
        let jxi = apply_j(&xi);
        Ok(Direction { xi, jxi })
    }

    /// Standard basis vector e_{i+1} of ℝ^{2n}.
    pub fn basis(n: usize, i: usize) -> Result<Self> {
        if i >= 2 * n {
            return Err(Error::invalid(format!("basis index {i} out of range")));
        }
        let mut v = vec![0.0; 2 * n];
        v[i] = 1.0;
        Self::new(v)
    }

    /// `count` directions uniformly distributed on S^{2n-1}, reproducible
    /// from `seed`.
    pub fn random(n: usize, count: usize, seed: u64) -> Result<Vec<Self>> {
        ComplexDim::new(n)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let v: Vec<f64> = (0..2 * n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            if euclid(&v) > 1e-8 {
                out.push(Self::new(v)?);
            }
        }
        Ok(out)
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn jxi(&self) -> &[f64] {
        &self.jxi
    }

    pub fn complex_dim(&self) -> usize {
        self.xi.len() / 2
    }

    /// `cos θ · ξ + sin θ · Jξ`, another point of the same complex line.
    pub fn rotated(&self, theta: f64) -> Direction {
        let xi = rotate_pairs(&self.xi, theta);
        let jxi = apply_j(&xi);
        Direction { xi, jxi }
    }
}
