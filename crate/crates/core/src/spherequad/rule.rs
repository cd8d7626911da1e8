use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use serde::Serialize;

use super::gauss::gauss_legendre_interval;
use super::sum::compensated_sum;
use crate::error::{Error, Result};

/// Supported ambient dimensions.
pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 8;

/// A positive-weight product rule on S^{m-1}.
///
/// Even `m` splits off one coordinate pair per recursion step:
/// `x = (√(1-w)·u, √w·(cos ψ, sin ψ))`, Gauss–Legendre in `w ∈ [0, 1]` and
/// `2L` equally spaced azimuths `ψ = iπ/L`. Odd `m` splits off one real
/// coordinate `x = (√(1-t²)·y, t)` with Gauss–Legendre in `t`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    m: usize,
    level: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    exactness: usize,
    circle_reduced: bool,
}

/// Rule metadata for reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RuleInfo {
    pub m: usize,
    pub level: usize,
    pub nodes: usize,
    pub exactness_degree: usize,
    pub circle_reduced: bool,
}

impl QuadratureRule {
    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.m..(i + 1) * self.m]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[f64]> {
        self.nodes.chunks_exact(self.m)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn exactness_degree(&self) -> usize {
        self.exactness
    }

    /// True for rules that keep only the zero azimuth of the last coordinate
    /// pair; such rules integrate functions invariant under the diagonal
    /// rotation exactly as the full rule does, and nothing else.
    pub fn is_circle_reduced(&self) -> bool {
        self.circle_reduced
    }

    pub fn info(&self) -> RuleInfo {
        RuleInfo {
            m: self.m,
            level: self.level,
            nodes: self.len(),
            exactness_degree: self.exactness,
            circle_reduced: self.circle_reduced,
        }
    }

    /// `Σ wᵢ f(nodeᵢ)`, evaluated in parallel and summed in node order.
    pub fn integrate<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let values: Vec<f64> = (0..self.len())
            .into_par_iter()
            .map(|i| f(self.node(i)))
            .collect();
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                index: i,
                value: values[i],
                node: self.node(i).to_vec(),
            });
        }
        Ok(compensated_sum(
            values.iter().zip(&self.weights).map(|(v, w)| v * w),
        ))
    }
}

/// Product rule on S^{m-1}, exact for polynomials of degree `2·level - 1`.
pub fn sphere_rule(m: usize, level: usize) -> Result<QuadratureRule> {
    build_checked(m, level, false)
}

/// Circle-reduced rule on S^{m-1} (even `m`): integrates functions that are
/// invariant under `R_θ` exactly like [`sphere_rule`] at the same level
/// with `2·level` times fewer nodes.
pub fn invariant_sphere_rule(m: usize, level: usize) -> Result<QuadratureRule> {
    if !m.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "circle-reduced rules need an even dimension, got {m}"
        )));
    }
    build_checked(m, level, true)
}

fn build_checked(m: usize, level: usize, reduced: bool) -> Result<QuadratureRule> {
    if !(MIN_DIM..=MAX_DIM).contains(&m) {
        return Err(Error::invalid(format!(
            "sphere rules support m in {MIN_DIM}..={MAX_DIM}, got {m}"
        )));
    }
    if level == 0 {
        return Err(Error::invalid("quadrature level must be >= 1"));
    }
    let (nodes, weights) = build(m, level, reduced);
    Ok(QuadratureRule {
        m,
        level,
        nodes,
        weights,
        exactness: 2 * level - 1,
        circle_reduced: reduced,
    })
}

type RuleKey = (usize, usize, bool);

/// Shared, lazily built rules.
pub fn cached_rule(m: usize, level: usize, reduced: bool) -> Result<Arc<QuadratureRule>> {
    static CACHE: OnceLock<Mutex<HashMap<RuleKey, Arc<QuadratureRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().unwrap().get(&(m, level, reduced)) {
        return Ok(rule.clone());
    }
    let rule = Arc::new(build_checked(m, level, reduced)?);
    cache
        .lock()
        .unwrap()
        .entry((m, level, reduced))
        .or_insert(rule.clone());
    Ok(rule)
}

fn azimuths(level: usize, reduced: bool) -> Vec<(f64, f64, f64)> {
    if reduced {
        return vec![(1.0, 0.0, 2.0 * PI)];
    }
    let count = 2 * level;
    let w = PI / level as f64;
    (0..count)
        .map(|i| {
            let (s, c) = (PI * i as f64 / level as f64).sin_cos();
            (c, s, w)
        })
        .collect()
}

fn build(m: usize, level: usize, reduced: bool) -> (Vec<f64>, Vec<f64>) {
    if m == 2 {
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for (c, s, w) in azimuths(level, reduced) {
            nodes.extend([c, s]);
            weights.push(w);
        }
        return (nodes, weights);
    }
    if m.is_multiple_of(2) {
        let (inner_nodes, inner_weights) = build(m - 2, level, false);
        let pairs = m / 2;
        let (ws, gw) = gauss_legendre_interval(level.max((level + pairs).div_ceil(2)), 0.0, 1.0);
        let circle = azimuths(level, reduced);
        let mut nodes = Vec::with_capacity(ws.len() * inner_weights.len() * circle.len() * m);
        let mut weights = Vec::with_capacity(ws.len() * inner_weights.len() * circle.len());
        for (&w, &g) in ws.iter().zip(&gw) {
            let radial_weight = 0.5 * g * (1.0 - w).powi(pairs as i32 - 2);
            let (a, b) = ((1.0 - w).sqrt(), w.sqrt());
            for (u, &uw) in inner_nodes.chunks_exact(m - 2).zip(&inner_weights) {
                for &(c, s, cw) in &circle {
                    nodes.extend(u.iter().map(|v| a * v));
                    nodes.extend([b * c, b * s]);
                    weights.push(radial_weight * uw * cw);
                }
            }
        }
        (nodes, weights)
    } else {
        let (inner_nodes, inner_weights) = build(m - 1, level, false);
        let count = level + (m - 3) / 2;
        let (ts, gw) = gauss_legendre_interval(count, -1.0, 1.0);
        let power = (m - 3) / 2;
        let mut nodes = Vec::with_capacity(ts.len() * inner_weights.len() * m);
        let mut weights = Vec::with_capacity(ts.len() * inner_weights.len());
        for (&t, &g) in ts.iter().zip(&gw) {
            let radial_weight = g * (1.0 - t * t).powi(power as i32);
            let a = (1.0 - t * t).sqrt();
            for (y, &yw) in inner_nodes.chunks_exact(m - 1).zip(&inner_weights) {
                nodes.extend(y.iter().map(|v| a * v));
                nodes.push(t);
                weights.push(radial_weight * yw);
            }
        }
        (nodes, weights)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{ln_gamma, sphere_area};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // ∫_{S^{m-1}} x^α = 2 Π Γ((α_i+1)/2) / Γ((|α|+m)/2) for all α_i even.
    fn monomial_moment(alpha: &[u32]) -> f64 {
        if alpha.iter().any(|a| a % 2 == 1) {
            return 0.0;
        }
        let m = alpha.len() as f64;
        let total: u32 = alpha.iter().sum();
        let ln: f64 = alpha.iter().map(|&a| ln_gamma((a as f64 + 1.0) / 2.0)).sum::<f64>()
            - ln_gamma((total as f64 + m) / 2.0);
        2.0 * ln.exp()
    }

    #[test]
    fn weight_sums() {
        for m in 2..=8 {
            for level in [1, 3, 6] {
                let rule = sphere_rule(m, level).unwrap();
                let sum = crate::spherequad::sum::compensated_sum(rule.weights().iter().copied());
                assert!((sum - sphere_area(m)).abs() < 1e-12 * sphere_area(m), "m={m} level={level} {sum} {}", sphere_area(m));
                assert!(rule.weights().iter().all(|&w| w > 0.0));
            }
        }
        let rule = sphere_rule(4, 5).unwrap();
        assert!((crate::spherequad::sum::compensated_sum(rule.weights().iter().copied()) - 2.0 * PI * PI).abs() < 1e-12);
        let rule = sphere_rule(6, 4).unwrap();
        assert!((crate::spherequad::sum::compensated_sum(rule.weights().iter().copied()) - PI.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn circle_rule() {
        let rule = sphere_rule(2, 5).unwrap();
        assert_eq!(rule.len(), 10);
        assert!(rule.weights().iter().all(|&w| (w - PI / 5.0).abs() < 1e-15));
    }

    #[test]
    fn nodes_are_unit_vectors() {
        for m in 2..=7 {
            let rule = sphere_rule(m, 4).unwrap();
            for x in rule.nodes() {
                let r: f64 = x.iter().map(|v| v * v).sum();
                assert!((r - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn random_monomials_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for m in 2..=7 {
            let level = 5;
            let rule = sphere_rule(m, level).unwrap();
            let d = rule.exactness_degree() as u32;
            for _ in 0..30 {
                let mut alpha = vec![0u32; m];
                let total = rng.random_range(0..=d);
                for _ in 0..total {
                    alpha[rng.random_range(0..m)] += 1;
                }
                let approx = rule
                    .integrate(|x| x.iter().zip(&alpha).map(|(v, &a)| v.powi(a as i32)).product())
                    .unwrap();
                let exact = monomial_moment(&alpha);
                assert!((approx - exact).abs() < 1e-12, "m={m} α={alpha:?} {approx} {exact}");
            }
        }
    }

    #[test]
    fn antipodal_symmetry() {
        for m in 2..=7 {
            let rule = sphere_rule(m, 3).unwrap();
            let mut keyed: HashMap<Vec<i64>, f64> = HashMap::new();
            let key = |x: &[f64]| x.iter().map(|v| (v * 1e9).round() as i64).collect::<Vec<_>>();
            for (x, &w) in rule.nodes().zip(rule.weights()) {
                keyed.insert(key(x), w);
            }
            for (x, &w) in rule.nodes().zip(rule.weights()) {
                let neg: Vec<f64> = x.iter().map(|v| -v).collect();
                let other = keyed.get(&key(&neg)).copied();
                assert!(matches!(other, Some(o) if (o - w).abs() < 1e-14), "m={m}");
            }
        }
    }

    #[test]
    fn integrate_examples() {
        let rule = sphere_rule(4, 6).unwrap();
        assert!((rule.integrate(|_| 1.0).unwrap() - 2.0 * PI * PI).abs() < 1e-12);
        assert!((rule.integrate(|x| x[0] * x[0]).unwrap() - PI * PI / 2.0).abs() < 1e-12);
        assert!((rule.integrate(|_| 2f64.powi(4)).unwrap() - 32.0 * PI * PI).abs() < 1e-11);
    }

    #[test]
    fn non_finite_is_reported() {
        let rule = sphere_rule(3, 2).unwrap();
        let err = rule.integrate(|x| if x[2] > 0.5 { f64::NAN } else { 1.0 });
        assert!(matches!(err, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn reduced_rule_matches_full_on_invariant_integrands() {
        // an invariant polynomial-free integrand built from moduli and Re(z1 conj z2)
        let f = |x: &[f64]| {
            let a = x[0] * x[0] + x[1] * x[1];
            let re = x[0] * x[2] + x[1] * x[3];
            let im = x[1] * x[2] - x[0] * x[3];
            (1.0 + a).sqrt() * (2.0 + re).ln() + im * im * x[4].hypot(x[5])
        };
        for level in [3, 6, 9] {
            let full = sphere_rule(6, level).unwrap().integrate(f).unwrap();
            let red = invariant_sphere_rule(6, level).unwrap().integrate(f).unwrap();
            assert!((full - red).abs() < 1e-12 * full.abs(), "{full} {red}");
        }
    }

    #[test]
    fn unsupported_dimension() {
        assert!(sphere_rule(9, 2).is_err());
        assert!(sphere_rule(1, 2).is_err());
        assert!(sphere_rule(4, 0).is_err());
        assert!(invariant_sphere_rule(5, 2).is_err());
    }
}
