//! Rejection-sampling volume estimates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bodies::BodySpec;
use crate::directions::{extremize, Extremum, GridSettings};
use crate::error::{Error, Result};

/// Minimum accepted sample count.
pub const MIN_SAMPLES: u64 = 10_000;
const BLOCK: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: u64,
    pub hits: u64,
    /// Half-width R of the sampling box [-R, R]^{2n}.
    pub box_half_width: f64,
    pub seed: u64,
}

impl McEstimate {
    /// |estimate - value| in units of the standard error.
    pub fn z_score(&self, value: f64) -> f64 {
        (self.estimate - value).abs() / self.std_error
    }
}

/// Largest radius found on the direction grid.
pub fn max_radius(body: &BodySpec) -> f64 {
    let n = body.n();
    let settings = GridSettings::default_for(n).for_phases(body.depends_on_phases());
    extremize(n, &settings, Extremum::Max, |d| body.rho_unchecked(d.xi())).value
}

/// Volume of `body` by uniform sampling in the box `[-R, R]^{2n}` with
/// `R = 1.01 · max ρ_K`. Blocks of samples use independent ChaCha streams so
/// the result does not depend on the thread count.
pub fn mc_volume(body: &BodySpec, samples: u64, seed: u64) -> Result<McEstimate> {
    if samples < MIN_SAMPLES {
        return Err(Error::invalid(format!(
            "monte carlo needs at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    let r = 1.01 * max_radius(body);
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::invalid(format!("degenerate body: bounding radius {r}")));
    }
    let dim = body.dim().real();
    let blocks = samples.div_ceil(BLOCK);
    let hits: u64 = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let count = BLOCK.min(samples - b * BLOCK);
            let mut x = vec![0.0; dim];
            let mut inside = 0u64;
            for _ in 0..count {
                for v in x.iter_mut() {
                    *v = rng.random_range(-r..r);
                }
                if body.norm_unchecked(&x) <= 1.0 {
                    inside += 1;
                }
            }
            inside
        })
        .sum();
    let box_volume = (2.0 * r).powi(dim as i32);
    let p = hits as f64 / samples as f64;
    Ok(McEstimate {
        estimate: box_volume * p,
        std_error: box_volume * (p * (1.0 - p) / samples as f64).sqrt(),
        samples,
        hits,
        box_half_width: r,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unit_ball_and_polydisc() {
        let ball = BodySpec::euclidean(2, 1.0).unwrap();
        let est = mc_volume(&ball, 400_000, 1).unwrap();
        assert!(est.z_score(PI * PI / 2.0) < 3.0, "{est:?}");

        let poly = BodySpec::polydisc(2, 1.0).unwrap();
        let est = mc_volume(&poly, 400_000, 2).unwrap();
        assert!(est.z_score(PI * PI) < 3.0, "{est:?}");
    }

    #[test]
    fn polydisc_box_covers_body() {
        let poly = BodySpec::polydisc(2, 1.0).unwrap();
        assert!(max_radius(&poly) >= 2f64.sqrt() * (1.0 - 1e-9));
    }

    #[test]
    fn reproducible() {
        let ball = BodySpec::euclidean(3, 1.0).unwrap();
        let a = mc_volume(&ball, 100_000, 9).unwrap();
        let b = mc_volume(&ball, 100_000, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn coverage_over_seeds() {
        let ball = BodySpec::euclidean(2, 1.0).unwrap();
        let truth = PI * PI / 2.0;
        let covered = (0..20)
            .filter(|&s| mc_volume(&ball, 50_000, 100 + s).unwrap().z_score(truth) <= 3.0)
            .count();
        assert!(covered >= 19, "covered {covered}/20");
    }

    #[test]
    fn too_few_samples() {
        let ball = BodySpec::euclidean(2, 1.0).unwrap();
        assert!(mc_volume(&ball, 100, 0).is_err());
    }
}
