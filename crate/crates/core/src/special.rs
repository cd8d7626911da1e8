//! Gamma-function helpers and sphere constants.

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural logarithm of Γ(x) for x > 0 (Lanczos, g = 7, nine terms).
///
/// Exact zeros are returned at x = 1 and x = 2. Non-positive or non-finite
/// arguments yield NaN.
pub fn ln_gamma(x: f64) -> f64 {
    if !(x > 0.0) || !x.is_finite() {
        return f64::NAN;
    }
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    if x < 0.5 {
        // reflection: Γ(x)Γ(1-x) = π / sin(πx)
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Γ(x) for x > 0.
pub fn gamma(x: f64) -> f64 {
    ln_gamma(x).exp()
}

/// Surface area of the unit sphere S^{m-1} ⊂ ℝ^m, 2π^{m/2}/Γ(m/2).
pub fn sphere_area(m: usize) -> f64 {
    let half = m as f64 / 2.0;
    (2.0f64.ln() + half * PI.ln() - ln_gamma(half)).exp()
}

/// Volume of the unit ball in ℝ^m, π^{m/2}/Γ(m/2 + 1).
pub fn ball_volume(m: usize) -> f64 {
    let half = m as f64 / 2.0;
    (half * PI.ln() - ln_gamma(half + 1.0)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorials() {
        let mut fact = 1.0f64;
        for n in 1..=30u32 {
            let rel = (gamma(n as f64) - fact).abs() / fact;
            assert!(rel < 1e-13, "Γ({n}) rel err {rel}");
            fact *= n as f64;
        }
    }

    #[test]
    fn ln_gamma_large_integers() {
        // ln((n-1)!) summed directly
        let mut acc = 0.0f64;
        for n in 2..=170u32 {
            acc += ((n - 1) as f64).ln();
            let v = ln_gamma(n as f64);
            assert!((v - acc).abs() <= 1e-13 * acc.max(1.0), "n={n}: {v} vs {acc}");
        }
    }

    #[test]
    fn half_integers() {
        // Γ(k + 1/2) = (2k)! √π / (4^k k!)
        let sqrt_pi = PI.sqrt();
        assert!((gamma(0.5) - sqrt_pi).abs() < 1e-14);
        assert!((gamma(1.5) - sqrt_pi / 2.0).abs() < 1e-14);
        assert!((gamma(2.5) - 0.75 * sqrt_pi).abs() < 1e-14);
        assert!((gamma(0.25) - 3.625_609_908_221_908).abs() < 1e-13);
    }

    #[test]
    fn sphere_constants() {
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_area(6) - PI.powi(3)).abs() < 1e-12);
        assert!((ball_volume(4) - PI * PI / 2.0).abs() < 1e-13);
        assert!((ball_volume(6) - PI.powi(3) / 6.0).abs() < 1e-13);
    }

    #[test]
    fn invalid_arguments() {
        assert!(ln_gamma(0.0).is_nan());
        assert!(ln_gamma(-1.5).is_nan());
        assert!(ln_gamma(f64::INFINITY).is_nan());
    }
}
