use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::basis::{HarmonicLabel, HarmonicSet};
use crate::error::{Error, Result};
use crate::spherequad::sum::compensated_vector_sum;
use crate::spherequad::{ModuliRule, ModuliRuleInfo, QuadratureRule, RuleInfo};

/// Largest supported harmonic degree.
pub const MAX_DEGREE: u32 = 32;
const CHUNK: usize = 512;

pub(crate) fn complex_dim_of(big_n: usize) -> Result<usize> {
    match big_n {
        4 | 6 | 8 => Ok(big_n / 2),
        _ => Err(Error::invalid(format!(
            "ambient dimension {big_n} not supported (expected 4, 6 or 8)"
        ))),
    }
}

pub(crate) fn check_degree(j: u32) -> Result<()> {
    if j % 2 == 1 || j > MAX_DEGREE {
        return Err(Error::invalid(format!(
            "degree {j} must be even and at most {MAX_DEGREE}"
        )));
    }
    Ok(())
}

/// Orthonormal real basis of the degree-`j` harmonics on S^{N-1}.
pub fn harmonic_basis(big_n: usize, j: u32) -> Result<HarmonicSet> {
    let n = complex_dim_of(big_n)?;
    check_degree(j)?;
    Ok(HarmonicSet::degree(n, j, false))
}

type SetKey = (usize, u32, ExpansionMode);

/// Shared harmonic sets of all even degrees up to `jmax`.
pub fn cached_set(n: usize, jmax: u32, mode: ExpansionMode) -> Arc<HarmonicSet> {
    static CACHE: OnceLock<Mutex<HashMap<SetKey, Arc<HarmonicSet>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (n, jmax, mode);
    if let Some(s) = cache.lock().unwrap().get(&key) {
        return s.clone();
    }
    let set = match mode {
        ExpansionMode::Full => HarmonicSet::even_up_to(n, jmax, false),
        ExpansionMode::Invariant => HarmonicSet::even_up_to(n, jmax, true),
        ExpansionMode::Moduli => {
            let labels = HarmonicSet::even_up_to(n, jmax, true)
                .labels()
                .iter()
                .filter(|l| l.m.iter().all(|&m| m == 0))
                .cloned()
                .collect();
            HarmonicSet::from_labels(n, labels)
        }
    };
    cache.lock().unwrap().entry(key).or_insert(Arc::new(set)).clone()
}

/// Which basis functions take part in an expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExpansionMode {
    /// Only functions invariant under the diagonal rotation; valid for
    /// rotation-invariant integrands and allows the reduced rule.
    Invariant,
    /// Every even-degree basis function.
    Full,
    /// Only functions of the moduli `|z_k|`; valid for integrands that
    /// ignore all phases, integrated on the moduli simplex.
    Moduli,
}

/// Quadrature behind an expansion.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ExpansionQuadrature {
    Sphere(RuleInfo),
    Moduli(ModuliRuleInfo),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coefficient {
    #[serde(flatten)]
    pub label: HarmonicLabel,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DegreeEnergy {
    pub degree: u32,
    pub energy: f64,
}

/// Truncated expansion `Σ c_{j,ℓ} Y_{j,ℓ}` over even degrees `j ≤ jmax`.
#[derive(Debug, Clone, Serialize)]
pub struct HarmonicExpansion {
    #[serde(rename = "N")]
    pub ambient_dim: usize,
    pub jmax: u32,
    pub mode: ExpansionMode,
    pub rule: ExpansionQuadrature,
    pub coefficients: Vec<Coefficient>,
    pub degree_energy: Vec<DegreeEnergy>,
    /// Energy share of the two highest retained degrees.
    pub tail_energy_ratio: f64,
    #[serde(skip)]
    set: Arc<HarmonicSet>,
    #[serde(skip)]
    values: Vec<f64>,
}

impl HarmonicExpansion {
    fn assemble(
        set: Arc<HarmonicSet>,
        values: Vec<f64>,
        jmax: u32,
        mode: ExpansionMode,
        rule: ExpansionQuadrature,
    ) -> Self {
        let coefficients = set
            .labels()
            .iter()
            .zip(&values)
            .map(|(l, &v)| Coefficient { label: l.clone(), value: v })
            .collect();
        let degree_energy: Vec<DegreeEnergy> = (0..=jmax)
            .step_by(2)
            .map(|j| DegreeEnergy {
                degree: j,
                energy: set
                    .labels()
                    .iter()
                    .zip(&values)
                    .filter(|(l, _)| l.degree == j)
                    .map(|(_, v)| v * v)
                    .sum(),
            })
            .collect();
        let total: f64 = degree_energy.iter().map(|d| d.energy).sum();
        let tail: f64 = degree_energy
            .iter()
            .filter(|d| d.degree >= 2 && d.degree + 2 >= jmax)
            .map(|d| d.energy)
            .sum();
        let tail_energy_ratio = if total > 0.0 { tail / total } else { 0.0 };
        HarmonicExpansion {
            ambient_dim: set.ambient_dim(),
            jmax,
            mode,
            rule,
            coefficients,
            degree_energy,
            tail_energy_ratio,
            set,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn labels(&self) -> &[HarmonicLabel] {
        self.set.labels()
    }

    /// Coefficients in label order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `Σ c²`, the L² norm squared of the truncated function.
    pub fn energy(&self) -> f64 {
        self.degree_energy.iter().map(|d| d.energy).sum()
    }

    /// Coefficient of the constant function.
    pub fn constant_coefficient(&self) -> f64 {
        self.values[0]
    }

    /// Evaluates the truncated series at a unit vector.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut scratch = self.set.scratch();
        let mut ys = vec![0.0; self.values.len()];
        self.set.eval_into(x, &mut scratch, &mut ys);
        ys.iter().zip(&self.values).map(|(y, c)| y * c).sum()
    }

    /// Value at `x` together with the contribution of degree `jmax` alone.
    pub fn eval_with_top(&self, x: &[f64]) -> (f64, f64) {
        let mut scratch = self.set.scratch();
        let mut ys = vec![0.0; self.values.len()];
        self.set.eval_into(x, &mut scratch, &mut ys);
        let mut total = 0.0;
        let mut top = 0.0;
        for ((y, c), l) in ys.iter().zip(&self.values).zip(self.set.labels()) {
            total += y * c;
            if l.degree == self.jmax {
                top += y * c;
            }
        }
        (total, top)
    }

    /// Evaluates at many points, in parallel.
    pub fn eval_many(&self, points: &[Vec<f64>]) -> Vec<f64> {
        points
            .par_iter()
            .map_init(
                || (self.set.scratch(), vec![0.0; self.values.len()]),
                |(scratch, ys), x| {
                    self.set.eval_into(x, scratch, ys);
                    ys.iter().zip(&self.values).map(|(y, c)| y * c).sum()
                },
            )
            .collect()
    }

    /// Multiplies every degree-`j` coefficient by `factor(j)`.
    pub fn map_degrees(&self, factor: impl Fn(u32) -> f64) -> HarmonicExpansion {
        let values = self
            .set
            .labels()
            .iter()
            .zip(&self.values)
            .map(|(l, v)| v * factor(l.degree))
            .collect();
        Self::assemble(self.set.clone(), values, self.jmax, self.mode, self.rule.clone())
    }

    /// `Σ c_k d_k` with another expansion over the same labels.
    pub fn dot(&self, other: &HarmonicExpansion) -> Result<f64> {
        if self.labels() != other.labels() {
            return Err(Error::invalid("expansions use different bases"));
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum())
    }

    /// Largest |coefficient| on a function that is not rotation invariant.
    pub fn max_noninvariant_coefficient(&self) -> f64 {
        self.labels()
            .iter()
            .zip(&self.values)
            .filter(|(l, _)| !l.is_rotation_invariant())
            .map(|(_, v)| v.abs())
            .fold(0.0, f64::max)
    }
}

/// Computes `c_{j,ℓ} = ∫ f Y_{j,ℓ}` for even `j ≤ jmax` with the given rule.
///
/// `Invariant` mode accepts the circle-reduced rule; `Full` needs the full
/// product rule. `Moduli` mode ignores the rule's nodes and integrates on
/// the moduli simplex at the rule's level.
pub fn harmonic_expand<F>(
    big_n: usize,
    f: F,
    jmax: u32,
    rule: &QuadratureRule,
    mode: ExpansionMode,
) -> Result<HarmonicExpansion>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let n = complex_dim_of(big_n)?;
    check_degree(jmax)?;
    if rule.dim() != big_n {
        return Err(Error::invalid(format!(
            "rule lives in ℝ^{} but the expansion needs ℝ^{big_n}",
            rule.dim()
        )));
    }
    if mode == ExpansionMode::Full && rule.is_circle_reduced() {
        return Err(Error::invalid(
            "full expansions need the full product rule, not the circle-reduced one",
        ));
    }
    if rule.exactness_degree() < 2 * jmax as usize {
        log::warn!(
            "rule exactness {} is below 2·Jmax = {}",
            rule.exactness_degree(),
            2 * jmax
        );
    }
    let set = cached_set(n, jmax, mode);
    let (values, quadrature) = if mode == ExpansionMode::Moduli {
        let moduli = ModuliRule::new(n, rule.level())?;
        let values = project(&set, &f, moduli.len(), |i| moduli.node(i), moduli.weights())?;
        (values, ExpansionQuadrature::Moduli(moduli.info()))
    } else {
        let values = project(&set, &f, rule.len(), |i| rule.node(i), rule.weights())?;
        (values, ExpansionQuadrature::Sphere(rule.info()))
    };
    Ok(HarmonicExpansion::assemble(set, values, jmax, mode, quadrature))
}

fn project<'a, F, N>(
    set: &HarmonicSet,
    f: &F,
    count: usize,
    node: N,
    weights: &[f64],
) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64 + Sync,
    N: Fn(usize) -> &'a [f64] + Sync,
{
    let len = set.len();
    let chunks: Vec<(usize, usize)> =
        (0..count).step_by(CHUNK).map(|a| (a, (a + CHUNK).min(count))).collect();
    let partials: Vec<Result<Vec<f64>>> = chunks
        .par_iter()
        .map(|&(a, b)| {
            let mut scratch = set.scratch();
            let mut ys = vec![0.0; len];
            let mut acc = vec![0.0; len];
            for i in a..b {
                let x = node(i);
                let v = f(x);
                if !v.is_finite() {
                    return Err(Error::NonFinite { index: i, value: v, node: x.to_vec() });
                }
                let wv = weights[i] * v;
                set.eval_into(x, &mut scratch, &mut ys);
                for (s, y) in acc.iter_mut().zip(&ys) {
                    *s += wv * y;
                }
            }
            Ok(acc)
        })
        .collect();
    let partials = partials.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(compensated_vector_sum(len, partials.iter().map(Vec::as_slice)))
}
