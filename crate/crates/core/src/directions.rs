//! Grids over the quotient of the sphere by the diagonal rotation.
//!
//! A direction `ξ ∈ S^{2n-1}` modulo `ξ ↦ e^{iθ}ξ` is parametrised by
//! nested moduli fractions `w_2, …, w_n ∈ [0, 1]` and relative phases
//! `ψ_1, …, ψ_{n-1}` (with `ψ_n = 0`): `|z_n|² = w_n`,
//! `|z_{n-1}|² = (1 - w_n) w_{n-1}` and so on, `z_k = |z_k| e^{iψ_k}`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::bodies::Direction;

/// Resolution of the coarse grid and depth of the local refinement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSettings {
    /// Points per moduli coordinate, including both endpoints.
    pub moduli_points: usize,
    /// Points per phase coordinate on `[0, 2π)`.
    pub phase_points: usize,
    /// Number of step halvings in the compass search.
    pub refine_depth: usize,
}

impl GridSettings {
    pub fn default_for(n: usize) -> Self {
        match n {
            2 => GridSettings { moduli_points: 17, phase_points: 16, refine_depth: 3 },
            3 => GridSettings { moduli_points: 9, phase_points: 8, refine_depth: 3 },
            _ => GridSettings { moduli_points: 5, phase_points: 4, refine_depth: 2 },
        }
    }

    /// Collapses the phase grid when the objective ignores phases.
    pub fn for_phases(mut self, depends: bool) -> Self {
        if !depends {
            self.phase_points = 1;
        }
        self
    }

    pub fn moduli_spacing(&self) -> f64 {
        1.0 / (self.moduli_points.max(2) - 1) as f64
    }

    pub fn phase_spacing(&self) -> f64 {
        2.0 * PI / self.phase_points.max(1) as f64
    }
}

/// A point of the quotient parametrisation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientPoint {
    pub w: Vec<f64>,
    pub phase: Vec<f64>,
}

impl QuotientPoint {
    pub fn to_direction(&self) -> Direction {
        let n = self.w.len() + 1;
        let mut x = vec![0.0; 2 * n];
        let mut rest = 1.0f64;
        for k in (1..n).rev() {
            let sq = rest * self.w[k - 1].clamp(0.0, 1.0);
            let r = sq.max(0.0).sqrt();
            let psi = if k < n - 1 { self.phase[k] } else { 0.0 };
            x[2 * k] = r * psi.cos();
            x[2 * k + 1] = r * psi.sin();
            rest -= sq;
        }
        let r = rest.max(0.0).sqrt();
        x[0] = r * self.phase[0].cos();
        x[1] = r * self.phase[0].sin();
        Direction::new(x).expect("quotient point maps to a unit vector")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extremum {
    Max,
    Min,
}

impl Extremum {
    fn better(self, a: f64, b: f64) -> bool {
        match self {
            Extremum::Max => a > b,
            Extremum::Min => a < b,
        }
    }
}

/// Location and resolution of a grid extremum.
#[derive(Debug, Clone, Serialize)]
pub struct ExtremumResult {
    pub value: f64,
    #[serde(skip)]
    pub direction: Direction,
    pub xi: Vec<f64>,
    pub point: QuotientPoint,
    pub coarse_points: usize,
    pub evaluations: usize,
    /// Final compass step in the moduli and phase coordinates.
    pub final_moduli_step: f64,
    pub final_phase_step: f64,
}

/// Coarse grid points in a fixed order.
pub fn coarse_grid(n: usize, settings: &GridSettings) -> Vec<QuotientPoint> {
    let nw = n - 1;
    let gw = settings.moduli_points.max(2);
    let gp = settings.phase_points.max(1);
    let nphase = if gp == 1 { 0 } else { n - 1 };
    let total = gw.pow(nw as u32) * gp.pow(nphase as u32);
    let mut out = Vec::with_capacity(total);
    for idx in 0..total {
        let mut r = idx;
        let mut w = vec![0.0; nw];
        for v in w.iter_mut() {
            *v = (r % gw) as f64 / (gw - 1) as f64;
            r /= gw;
        }
        let mut phase = vec![0.0; n - 1];
        for v in phase.iter_mut().take(nphase) {
            *v = (r % gp) as f64 * 2.0 * PI / gp as f64;
            r /= gp;
        }
        out.push(QuotientPoint { w, phase });
    }
    out
}

/// Coarse grid as unit directions.
pub fn coarse_directions(n: usize, settings: &GridSettings) -> Vec<Direction> {
    coarse_grid(n, settings).iter().map(QuotientPoint::to_direction).collect()
}

/// Finds the extremum of `f` on the coarse grid and refines it by a compass
/// search.
pub fn extremize<F>(n: usize, settings: &GridSettings, extremum: Extremum, f: F) -> ExtremumResult
where
    F: Fn(&Direction) -> f64 + Sync,
{
    let grid = coarse_grid(n, settings);
    let values: Vec<f64> = grid.par_iter().map(|p| f(&p.to_direction())).collect();
    refine(n, settings, extremum, &grid, &values, f)
}

/// Starts from the best of precomputed coarse `values` and refines.
pub fn refine<F>(
    n: usize,
    settings: &GridSettings,
    extremum: Extremum,
    grid: &[QuotientPoint],
    values: &[f64],
    f: F,
) -> ExtremumResult
where
    F: Fn(&Direction) -> f64 + Sync,
{
    assert_eq!(grid.len(), values.len());
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if extremum.better(v, values[best]) {
            best = i;
        }
    }
    let mut point = grid[best].clone();
    let mut value = values[best];
    let mut evaluations = values.len();
    let use_phases = settings.phase_points > 1;
    let mut dw = 0.5 * settings.moduli_spacing();
    let mut dp = 0.5 * settings.phase_spacing();
    for stage in 0..=settings.refine_depth {
        if stage > 0 {
            dw *= 0.5;
            dp *= 0.5;
        }
        for _ in 0..16 {
            let mut candidates = Vec::new();
            for k in 0..n - 1 {
                for sign in [-1.0, 1.0] {
                    let mut c = point.clone();
                    c.w[k] = (c.w[k] + sign * dw).clamp(0.0, 1.0);
                    if c.w[k] != point.w[k] {
                        candidates.push(c);
                    }
                }
            }
            if use_phases {
                for k in 0..n - 1 {
                    for sign in [-1.0, 1.0] {
                        let mut c = point.clone();
                        c.phase[k] = (c.phase[k] + sign * dp).rem_euclid(2.0 * PI);
                        candidates.push(c);
                    }
                }
            }
            let vals: Vec<f64> = candidates.par_iter().map(|c| f(&c.to_direction())).collect();
            evaluations += vals.len();
            let mut moved = None;
            let mut bv = value;
            for (i, &v) in vals.iter().enumerate() {
                if extremum.better(v, bv) {
                    bv = v;
                    moved = Some(i);
                }
            }
            match moved {
                Some(i) => {
                    point = candidates.swap_remove(i);
                    value = bv;
                }
                None => break,
            }
        }
    }
    let direction = point.to_direction();
    ExtremumResult {
        value,
        xi: direction.xi().to_vec(),
        direction,
        point,
        coarse_points: values.len(),
        evaluations,
        final_moduli_step: dw,
        final_phase_step: if use_phases { dp } else { 0.0 },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes() {
        let s = GridSettings::default_for(2);
        assert_eq!(coarse_grid(2, &s).len(), 17 * 16);
        assert_eq!(coarse_grid(2, &s.for_phases(false)).len(), 17);
        let s = GridSettings::default_for(3);
        assert_eq!(coarse_grid(3, &s).len(), 81 * 64);
    }

    #[test]
    fn moduli_follow_parametrisation() {
        let p = QuotientPoint { w: vec![0.25, 0.5], phase: vec![0.3, 1.0] };
        let d = p.to_direction();
        let x = d.xi();
        let m = |k: usize| x[2 * k].powi(2) + x[2 * k + 1].powi(2);
        assert!((m(2) - 0.5).abs() < 1e-14);
        assert!((m(1) - 0.125).abs() < 1e-14);
        assert!((m(0) - 0.375).abs() < 1e-14);
        assert!((x[1].atan2(x[0]) - 0.3).abs() < 1e-14);
        assert!((x[3].atan2(x[2]) - 1.0).abs() < 1e-14);
        assert!(x[5].abs() < 1e-15);
    }

    #[test]
    fn refinement_finds_interior_maximum() {
        // max of |z_1|²|z_2|² sits at w = 1/2, off the 4-point grid
        let s = GridSettings { moduli_points: 4, phase_points: 1, refine_depth: 6 };
        let r = extremize(2, &s, Extremum::Max, |d| {
            let x = d.xi();
            (x[0] * x[0] + x[1] * x[1]) * (x[2] * x[2] + x[3] * x[3])
        });
        assert!((r.value - 0.25).abs() < 1e-5, "{}", r.value);
    }

    #[test]
    fn phase_refinement() {
        // Re(z_1 conj z_2) is maximal at zero relative phase and equal moduli
        let s = GridSettings { moduli_points: 5, phase_points: 3, refine_depth: 8 };
        let r = extremize(2, &s, Extremum::Min, |d| {
            let x = d.xi();
            -(x[0] * x[2] + x[1] * x[3])
        });
        assert!((r.value + 0.5).abs() < 1e-4, "{}", r.value);
    }
}
