//! Numerical resolution shared by the theorem checks.

use serde::{Deserialize, Deserializer, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

use crate::directions::GridSettings;
use crate::error::{Error, Result};
use crate::spherequad::{cached_rule, QuadratureRule};

/// Quadrature levels, truncation degrees, grids and tolerances.
///
/// Maps are keyed by the ambient dimension `m` of the sphere S^{m-1}
/// (levels), by `N = 2n` (Jmax) and by `n` (grids). Missing keys fall back
/// to the built-in defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub levels: BTreeMap<usize, usize>,
    /// Either a map keyed by `N` or one degree used for every `N`.
    #[serde(deserialize_with = "jmax_map")]
    pub jmax: BTreeMap<usize, u32>,
    pub grids: BTreeMap<usize, GridSettings>,
    /// Checks pass when `margin ≥ -tolerance_multiplier · Σ error estimates`.
    pub tolerance_multiplier: f64,
    /// Positivity passes when `min ≥ -positivity_threshold · max`.
    pub positivity_threshold: f64,
    pub validation_samples: usize,
    pub seed: u64,
    pub mc_samples: u64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            levels: BTreeMap::new(),
            jmax: BTreeMap::new(),
            grids: BTreeMap::new(),
            tolerance_multiplier: 3.0,
            positivity_threshold: 1e-6,
            validation_samples: 1000,
            seed: 20_240_601,
            mc_samples: 10_000_000,
        }
    }
}

fn jmax_map<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<usize, u32>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        All(u32),
        Map(BTreeMap<String, u32>),
    }
    match Raw::deserialize(d)? {
        Raw::All(j) => Ok([4, 6, 8].into_iter().map(|big_n| (big_n, j)).collect()),
        Raw::Map(m) => m
            .into_iter()
            .map(|(k, j)| {
                k.parse::<usize>()
                    .map(|big_n| (big_n, j))
                    .map_err(|_| serde::de::Error::custom(format!("bad dimension key {k:?}")))
            })
            .collect(),
    }
}

pub fn default_level(m: usize) -> usize {
    match m {
        2..=4 => 24,
        5 | 6 => 16,
        7 => 12,
        _ => 10,
    }
}

pub fn default_jmax(big_n: usize) -> u32 {
    match big_n {
        4 => 16,
        6 => 12,
        _ => 8,
    }
}

impl Settings {
    pub fn level(&self, m: usize) -> usize {
        self.levels.get(&m).copied().unwrap_or_else(|| default_level(m))
    }

    pub fn jmax(&self, big_n: usize) -> u32 {
        self.jmax.get(&big_n).copied().unwrap_or_else(|| default_jmax(big_n))
    }

    pub fn grid(&self, n: usize) -> GridSettings {
        self.grids.get(&n).copied().unwrap_or_else(|| GridSettings::default_for(n))
    }

    /// Circle-reduced rule on S^{2n-3} for sections.
    pub fn section_rule(&self, n: usize) -> Result<Arc<QuadratureRule>> {
        cached_rule(2 * n - 2, self.level(2 * n - 2), true)
    }

    /// Circle-reduced rule on S^{2n-1} for volumes and expansions.
    pub fn sphere_rule(&self, n: usize) -> Result<Arc<QuadratureRule>> {
        cached_rule(2 * n, self.level(2 * n), true)
    }

    /// Same settings with every Jmax replaced.
    pub fn with_jmax(&self, jmax: u32) -> Self {
        let mut s = self.clone();
        for big_n in [4, 6, 8] {
            s.jmax.insert(big_n, jmax);
        }
        s
    }

    /// The defaults written out explicitly.
    pub fn resolved(&self) -> Self {
        let mut s = self.clone();
        for m in 2..=8 {
            s.levels.insert(m, self.level(m));
        }
        for big_n in [4, 6, 8] {
            s.jmax.insert(big_n, self.jmax(big_n));
        }
        for n in 2..=4 {
            s.grids.insert(n, self.grid(n));
        }
        s
    }

    pub fn check(&self) -> Result<()> {
        for (&m, &l) in &self.levels {
            if !(2..=8).contains(&m) || l == 0 {
                return Err(Error::invalid(format!("level {l} for m = {m} is not allowed")));
            }
        }
        for (&big_n, &j) in &self.jmax {
            if ![4, 6, 8].contains(&big_n) || j % 2 == 1 || j > crate::harmonics::MAX_DEGREE {
                return Err(Error::invalid(format!("Jmax {j} for N = {big_n} is not allowed")));
            }
        }
        for (&n, g) in &self.grids {
            if !(2..=4).contains(&n) || g.moduli_points < 2 || g.phase_points == 0 || g.refine_depth == 0
            {
                return Err(Error::invalid(format!("grid for n = {n} is not allowed: {g:?}")));
            }
        }
        if !(self.tolerance_multiplier.is_finite() && self.tolerance_multiplier >= 0.0) {
            return Err(Error::invalid("tolerance multiplier must be finite and non-negative"));
        }
        if !(self.positivity_threshold.is_finite() && self.positivity_threshold >= 0.0) {
            return Err(Error::invalid("positivity threshold must be finite and non-negative"));
        }
        if self.validation_samples == 0 {
            return Err(Error::invalid("validation needs at least one sample"));
        }
        if self.mc_samples < crate::spherequad::montecarlo::MIN_SAMPLES {
            return Err(Error::invalid("monte carlo sample count below 10^4"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_json_gives_defaults() {
        let s: Settings = serde_json::from_str("{}").unwrap();
        assert_eq!(s, Settings::default());
        assert_eq!(s.level(4), 24);
        assert_eq!(s.level(6), 16);
        assert_eq!(s.jmax(4), 16);
        assert_eq!(s.jmax(6), 12);
        s.check().unwrap();
    }

    #[test]
    fn overrides_and_round_trip() {
        let s: Settings = serde_json::from_str(r#"{"levels": {"4": 12}, "jmax": {"6": 8}}"#).unwrap();
        assert_eq!(s.level(4), 12);
        assert_eq!(s.jmax(6), 8);
        let back: Settings = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
        assert_eq!(s.resolved().resolved(), s.resolved());
        let s: Settings = serde_json::from_str(r#"{"jmax": 4}"#).unwrap();
        assert_eq!(s, Settings::default().with_jmax(4));
    }

    #[test]
    fn rejects_bad_values() {
        for bad in [
            r#"{"levels": {"4": 0}}"#,
            r#"{"jmax": {"4": 3}}"#,
            r#"{"jmax": {"5": 4}}"#,
            r#"{"tolerance_multiplier": -1}"#,
            r#"{"mc_samples": 10}"#,
        ] {
            let s: Settings = serde_json::from_str(bad).unwrap();
            assert!(s.check().is_err(), "{bad}");
        }
        assert!(serde_json::from_str::<Settings>(r#"{"levelz": {}}"#).is_err());
    }
}
