//! Integration of functions that depend only on the moduli `|z_k|`.
//!
//! Under `t_k = |z_k|²` the normalized measure on S^{2n-1} pushes forward to
//! the uniform measure on the simplex `Σ t_k = 1`. The simplex is split into
//! the `n!` chambers `t_{σ1} ≥ … ≥ t_{σn}`; a function like `max_k t_k`
//! is smooth on each of them, so a collapsed Gauss–Legendre rule per chamber
//! converges spectrally where the product rule on the sphere only reaches
//! algebraic rates.

use serde::Serialize;

use super::gauss::gauss_legendre_interval;
use super::sum::compensated_sum;
use crate::error::{Error, Result};
use crate::special::sphere_area;

#[derive(Debug, Clone)]
pub struct ModuliRule {
    n: usize,
    level: usize,
    /// Unit vectors `(√t_1, 0, √t_2, 0, …)`, flattened.
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModuliRuleInfo {
    pub n: usize,
    pub level: usize,
    pub nodes: usize,
    pub chambers: usize,
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 1 {
        return vec![vec![0]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

impl ModuliRule {
    /// Rule for S^{2n-1}, n = 1..=4, with `level + n - 2 - i` points in the
    /// i-th collapsed coordinate.
    pub fn new(n: usize, level: usize) -> Result<Self> {
        if !(1..=4).contains(&n) || level == 0 {
            return Err(Error::invalid(format!(
                "moduli rule needs 1 ≤ n ≤ 4 and level ≥ 1, got n = {n}, level = {level}"
            )));
        }
        let perms = permutations(n);
        let area = sphere_area(2 * n);
        // Duffy collapse of the (n-1)-simplex: λ_i = u_i Π_{k<i}(1-u_k)
        let axes: Vec<(Vec<f64>, Vec<f64>)> = (0..n.saturating_sub(1))
            .map(|i| gauss_legendre_interval(level + n - 2 - i, 0.0, 1.0))
            .collect();
        let mut lambdas: Vec<(Vec<f64>, f64)> = vec![(Vec::new(), 1.0)];
        for (i, (us, ws)) in axes.iter().enumerate() {
            let mut next = Vec::with_capacity(lambdas.len() * us.len());
            for (lam, w) in &lambdas {
                let used: f64 = lam.iter().sum();
                let rest = 1.0 - used;
                for (&u, &g) in us.iter().zip(ws) {
                    let mut l = lam.clone();
                    l.push(rest * u);
                    let jac = (1.0 - u).powi((n - 2 - i) as i32);
                    next.push((l, w * g * jac));
                }
            }
            lambdas = next;
        }
        // (n-1)! normalizes the simplex average; 1/n! averages the chambers
        let fact = |k: usize| (1..=k).product::<usize>() as f64;
        let scale = area * fact(n - 1) / fact(n);
        let mut nodes = Vec::with_capacity(perms.len() * lambdas.len() * 2 * n);
        let mut weights = Vec::with_capacity(perms.len() * lambdas.len());
        for sigma in &perms {
            for (lam, w) in &lambdas {
                let mut l = lam.clone();
                l.push((1.0 - l.iter().sum::<f64>()).max(0.0));
                // vertex v_k = (e_{σ1} + … + e_{σk}) / k
                let mut t = vec![0.0; n];
                for (k, lk) in l.iter().enumerate() {
                    for &s in &sigma[..=k] {
                        t[s] += lk / (k + 1) as f64;
                    }
                }
                for tk in t {
                    nodes.push(tk.max(0.0).sqrt());
                    nodes.push(0.0);
                }
                weights.push(scale * w);
            }
        }
        Ok(ModuliRule { n, level, nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[2 * self.n * i..2 * self.n * (i + 1)]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn info(&self) -> ModuliRuleInfo {
        ModuliRuleInfo {
            n: self.n,
            level: self.level,
            nodes: self.len(),
            chambers: permutations(self.n).len(),
        }
    }

    /// `∫_{S^{2n-1}} f`, valid when `f` depends only on the moduli.
    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, f: F) -> Result<f64> {
        let dim = 2 * self.n;
        let mut terms = Vec::with_capacity(self.len());
        for (i, (x, w)) in self.nodes.chunks_exact(dim).zip(&self.weights).enumerate() {
            let v = f(x);
            if !v.is_finite() {
                return Err(Error::NonFinite { index: i, value: v, node: x.to_vec() });
            }
            terms.push(w * v);
        }
        Ok(compensated_sum(terms))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn weights_sum_to_area() {
        for n in 1..=4 {
            let r = ModuliRule::new(n, 5).unwrap();
            let s = r.integrate(|_| 1.0).unwrap();
            assert!((s - sphere_area(2 * n)).abs() < 1e-12 * s, "n={n}");
        }
    }

    #[test]
    fn moduli_moments() {
        // ∫ |z_1|^4 over S^3 = |S^3| · E[t_1^2] with t_1 ~ U(0,1) → 2π²/3
        let r = ModuliRule::new(2, 4).unwrap();
        let v = r.integrate(|x| x[0].powi(4)).unwrap();
        assert!((v - 2.0 * PI * PI / 3.0).abs() < 1e-13);
        // Dirichlet(1,1,1): E[t_1 t_2] = 1/12, |S^5| = π³
        let r = ModuliRule::new(3, 4).unwrap();
        let v = r.integrate(|x| x[0] * x[0] * x[2] * x[2]).unwrap();
        assert!((v - PI.powi(3) / 12.0).abs() < 1e-13);
    }

    #[test]
    fn nodes_are_unit() {
        let r = ModuliRule::new(3, 6).unwrap();
        for x in r.nodes.chunks_exact(6) {
            let l: f64 = x.iter().map(|v| v * v).sum();
            assert!((l - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn invalid() {
        assert!(ModuliRule::new(5, 3).is_err());
        assert!(ModuliRule::new(2, 0).is_err());
    }
}
