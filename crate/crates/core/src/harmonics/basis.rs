//! Real orthonormal spherical harmonics on S^{2n-1} ⊂ ℂⁿ adapted to the
//! coordinate torus.
//!
//! A point is written recursively as `x = (cos φ_k · u, sin φ_k · e^{iψ_k})`
//! with `u` on the sphere of the first `k-1` complex coordinates. Each
//! complex basis function is a product over levels of
//! `cos^{a} φ sin^{|m|} φ P_s^{(|m|, a+k-2)}(cos 2φ)` times the character
//! `e^{i⟨m,ψ⟩}`, where `a` is the degree carried by the inner coordinates.
//! Real functions are taken as `√2·Re`/`√2·Im` over weights with positive
//! leading entry. The diagonal rotation `z ↦ e^{iθ}z` multiplies a function
//! by `e^{iθ Σm}`, so the rotation-invariant subspace is `Σm = 0`.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;

use crate::special::ln_gamma;

/// Which real part of the complex character a basis function carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    /// `m = 0`: the function is already real.
    Real,
    Cos,
    Sin,
}

/// Identifies one real basis harmonic.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HarmonicLabel {
    pub degree: u32,
    /// Character weight per complex coordinate.
    pub m: Vec<i32>,
    /// Jacobi degree per recursion level; `s[0]` is always zero.
    pub s: Vec<u32>,
    pub part: Part,
}

impl HarmonicLabel {
    pub fn complex_dim(&self) -> usize {
        self.m.len()
    }

    /// Invariant under the diagonal rotation of all coordinate pairs.
    pub fn is_rotation_invariant(&self) -> bool {
        self.m.iter().sum::<i32>() == 0
    }

    fn sort_key(&self) -> (i32, &[i32], &[u32], Part) {
        (self.m.iter().map(|v| v.abs()).sum(), &self.m, &self.s, self.part)
    }
}

/// All labels of exact degree `j` on S^{2n-1}, in canonical order.
pub fn degree_labels(n: usize, j: u32, invariant_only: bool) -> Vec<HarmonicLabel> {
    let mut out = Vec::new();
    let mut m = vec![0i32; n];
    let mut s = vec![0u32; n];
    enumerate_level(n, n, j, &mut m, &mut s, invariant_only, &mut out);
    out.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    out
}

// Distributes the remaining degree over levels n..=1 (1-based), outermost first.
fn enumerate_level(
    n: usize,
    level: usize,
    remaining: u32,
    m: &mut Vec<i32>,
    s: &mut Vec<u32>,
    invariant_only: bool,
    out: &mut Vec<HarmonicLabel>,
) {
    if level == 1 {
        let r = remaining as i32;
        let choices: &[i32] = if r == 0 { &[0] } else { &[r, -r] };
        for &m1 in choices {
            m[0] = m1;
            push_real_labels(n, m, s, invariant_only, out);
        }
        m[0] = 0;
        return;
    }
    let k = level - 1;
    for sk in 0..=remaining / 2 {
        let rest = remaining - 2 * sk;
        for b in 0..=rest {
            let signs: &[i32] = if b == 0 { &[1] } else { &[1, -1] };
            for &sign in signs {
                m[k] = sign * b as i32;
                s[k] = sk;
                enumerate_level(n, level - 1, rest - b, m, s, invariant_only, out);
            }
        }
    }
    m[k] = 0;
    s[k] = 0;
}

fn push_real_labels(
    _n: usize,
    m: &[i32],
    s: &[u32],
    invariant_only: bool,
    out: &mut Vec<HarmonicLabel>,
) {
    if invariant_only && m.iter().sum::<i32>() != 0 {
        return;
    }
    let degree = m.iter().map(|v| v.unsigned_abs()).sum::<u32>() + 2 * s.iter().sum::<u32>();
    let leading = m.iter().copied().find(|&v| v != 0);
    match leading {
        None => out.push(HarmonicLabel {
            degree,
            m: m.to_vec(),
            s: s.to_vec(),
            part: Part::Real,
        }),
        Some(v) if v > 0 => {
            for part in [Part::Cos, Part::Sin] {
                out.push(HarmonicLabel {
                    degree,
                    m: m.to_vec(),
                    s: s.to_vec(),
                    part,
                });
            }
        }
        // the negated weight carries the same real pair
        Some(_) => {}
    }
}

/// Jacobi polynomials P_0..=P_{smax} with weight (1-t)^α (1+t)^β.
pub fn jacobi_values(alpha: f64, beta: f64, smax: usize, t: f64, out: &mut [f64]) {
    out[0] = 1.0;
    if smax == 0 {
        return;
    }
    out[1] = (alpha + 1.0) + (alpha + beta + 2.0) * (t - 1.0) / 2.0;
    for deg in 2..=smax {
        let nf = deg as f64;
        let ab = alpha + beta;
        let c = 2.0 * nf + ab;
        let a1 = 2.0 * nf * (nf + ab) * (c - 2.0);
        let a2 = (c - 1.0) * (alpha * alpha - beta * beta);
        let a3 = (c - 2.0) * (c - 1.0) * c;
        let a4 = 2.0 * (nf + alpha - 1.0) * (nf + beta - 1.0) * c;
        out[deg] = ((a2 + a3 * t) * out[deg - 1] - a4 * out[deg - 2]) / a1;
    }
}

// ∫_0^{π/2} cos^{2a+2k-3} φ sin^{2b+1} φ [P_s^{(b, a+k-2)}(cos 2φ)]² dφ
fn radial_norm_sq(alpha: f64, beta: f64, s: u32) -> f64 {
    let sf = s as f64;
    let ln = ln_gamma(sf + alpha + 1.0) + ln_gamma(sf + beta + 1.0)
        - ln_gamma(sf + 1.0)
        - ln_gamma(sf + alpha + beta + 1.0);
    ln.exp() / (2.0 * (2.0 * sf + alpha + beta + 1.0))
}

#[derive(Debug, Clone)]
struct RadialGroup {
    level: usize,
    a_prev: u32,
    b: u32,
    offset: usize,
    norms: Vec<f64>,
}

#[derive(Debug, Clone)]
struct CompiledLabel {
    factors: Vec<usize>,
    m: Vec<i32>,
    part: Part,
    scale: f64,
}

/// A finite family of basis harmonics that can be evaluated at points of
/// S^{2n-1}.
#[derive(Debug, Clone)]
pub struct HarmonicSet {
    n: usize,
    labels: Vec<HarmonicLabel>,
    compiled: Vec<CompiledLabel>,
    groups: Vec<RadialGroup>,
    factor_count: usize,
    max_m: Vec<usize>,
}

/// Reusable buffers for [`HarmonicSet::eval_into`].
#[derive(Debug, Clone, Default)]
pub struct EvalScratch {
    factors: Vec<f64>,
    jacobi: Vec<f64>,
    powers: Vec<Vec<(f64, f64)>>,
}

impl HarmonicSet {
    /// Compiles an evaluation plan for the given labels (all on S^{2n-1}).
    pub fn from_labels(n: usize, labels: Vec<HarmonicLabel>) -> Self {
        assert!(n >= 1);
        let mut groups: Vec<RadialGroup> = Vec::new();
        let mut index: HashMap<(usize, u32, u32), usize> = HashMap::new();
        let mut smax: Vec<u32> = Vec::new();
        let mut max_m = vec![0usize; n];
        let mut pending: Vec<Vec<(usize, u32)>> = Vec::with_capacity(labels.len());

        for label in &labels {
            assert_eq!(label.m.len(), n, "label dimension mismatch");
            let mut a = label.m[0].unsigned_abs();
            let mut refs = Vec::with_capacity(n.saturating_sub(1));
            for k in 1..n {
                let b = label.m[k].unsigned_abs();
                let sk = label.s[k];
                let key = (k + 1, a, b);
                let g = *index.entry(key).or_insert_with(|| {
                    groups.push(RadialGroup {
                        level: k + 1,
                        a_prev: a,
                        b,
                        offset: 0,
                        norms: Vec::new(),
                    });
                    smax.push(0);
                    groups.len() - 1
                });
                smax[g] = smax[g].max(sk);
                refs.push((g, sk));
                a += b + 2 * sk;
            }
            for (k, v) in label.m.iter().enumerate() {
                max_m[k] = max_m[k].max(v.unsigned_abs() as usize);
            }
            pending.push(refs);
        }

        let mut offset = 0;
        for (g, group) in groups.iter_mut().enumerate() {
            group.offset = offset;
            let alpha = group.b as f64;
            let beta = group.a_prev as f64 + group.level as f64 - 2.0;
            group.norms = (0..=smax[g])
                .map(|s| radial_norm_sq(alpha, beta, s).sqrt().recip())
                .collect();
            offset += smax[g] as usize + 1;
        }

        let base = (2.0 * PI).powf(-(n as f64) / 2.0);
        let compiled = labels
            .iter()
            .zip(pending)
            .map(|(label, refs)| CompiledLabel {
                factors: refs
                    .into_iter()
                    .map(|(g, s)| groups[g].offset + s as usize)
                    .collect(),
                m: label.m.clone(),
                part: label.part,
                scale: if label.part == Part::Real {
                    base
                } else {
                    base * std::f64::consts::SQRT_2
                },
            })
            .collect();

        HarmonicSet {
            n,
            labels,
            compiled,
            groups,
            factor_count: offset,
            max_m,
        }
    }

    /// Every basis function of one even or odd degree.
    pub fn degree(n: usize, j: u32, invariant_only: bool) -> Self {
        Self::from_labels(n, degree_labels(n, j, invariant_only))
    }

    /// All even degrees `0, 2, …, jmax`.
    pub fn even_up_to(n: usize, jmax: u32, invariant_only: bool) -> Self {
        let labels = (0..=jmax)
            .step_by(2)
            .flat_map(|j| degree_labels(n, j, invariant_only))
            .collect();
        Self::from_labels(n, labels)
    }

    pub fn complex_dim(&self) -> usize {
        self.n
    }

    pub fn ambient_dim(&self) -> usize {
        2 * self.n
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[HarmonicLabel] {
        &self.labels
    }

    pub fn scratch(&self) -> EvalScratch {
        EvalScratch {
            factors: vec![0.0; self.factor_count],
            jacobi: Vec::new(),
            powers: self.max_m.iter().map(|&mm| vec![(1.0, 0.0); mm + 1]).collect(),
        }
    }

    /// Evaluates every function of the set at the unit vector `x`.
    ///
    /// `x` has length `2n`; points off the sphere are evaluated at `x/|x|`.
    pub fn eval_into(&self, x: &[f64], scratch: &mut EvalScratch, out: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(x.len(), 2 * n);
        debug_assert_eq!(out.len(), self.labels.len());
        if scratch.factors.len() != self.factor_count || scratch.powers.len() != n {
            *scratch = self.scratch();
        }

        // moduli and unit characters per complex coordinate
        let mut r2 = [0.0f64; 8];
        let mut r2_vec;
        let r2s: &mut [f64] = if n <= 8 {
            &mut r2[..n]
        } else {
            r2_vec = vec![0.0; n];
            &mut r2_vec
        };
        for k in 0..n {
            let (re, im) = (x[2 * k], x[2 * k + 1]);
            let rr = re * re + im * im;
            r2s[k] = rr;
            let pw = &mut scratch.powers[k];
            if pw.len() > 1 {
                let r = rr.sqrt();
                let unit = if r > 0.0 { (re / r, im / r) } else { (1.0, 0.0) };
                for p in 1..pw.len() {
                    let (a, b) = pw[p - 1];
                    pw[p] = (a * unit.0 - b * unit.1, a * unit.1 + b * unit.0);
                }
            }
        }

        // radial factors per group
        for group in &self.groups {
            let k = group.level - 1;
            let inner: f64 = r2s[..k].iter().sum();
            let outer = r2s[k];
            let total = inner + outer;
            let (c, s, t) = if total > 0.0 {
                (
                    (inner / total).sqrt(),
                    (outer / total).sqrt(),
                    (inner - outer) / total,
                )
            } else {
                (1.0, 0.0, 1.0)
            };
            let smax = group.norms.len() - 1;
            scratch.jacobi.resize(smax + 1, 0.0);
            let alpha = group.b as f64;
            let beta = group.a_prev as f64 + group.level as f64 - 2.0;
            jacobi_values(alpha, beta, smax, t, &mut scratch.jacobi);
            let base = c.powi(group.a_prev as i32) * s.powi(group.b as i32);
            for sdeg in 0..=smax {
                scratch.factors[group.offset + sdeg] =
                    base * group.norms[sdeg] * scratch.jacobi[sdeg];
            }
        }

        for (value, label) in out.iter_mut().zip(&self.compiled) {
            let mut radial = label.scale;
            for &f in &label.factors {
                radial *= scratch.factors[f];
            }
            *value = match label.part {
                Part::Real => radial,
                _ => {
                    let (mut pr, mut pi) = (1.0, 0.0);
                    for (k, &mk) in label.m.iter().enumerate() {
                        if mk == 0 {
                            continue;
                        }
                        let (a, b) = scratch.powers[k][mk.unsigned_abs() as usize];
                        let b = if mk < 0 { -b } else { b };
                        let (nr, ni) = (pr * a - pi * b, pr * b + pi * a);
                        pr = nr;
                        pi = ni;
                    }
                    if label.part == Part::Cos {
                        radial * pr
                    } else {
                        radial * pi
                    }
                }
            };
        }
    }

    /// Convenience single-point evaluation.
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut scratch = self.scratch();
        let mut out = vec![0.0; self.len()];
        self.eval_into(x, &mut scratch, &mut out);
        out
    }
}
