use cbp_core::sections::{section_at, section_volume_direct, volume};
use cbp_core::theorems::{corollary1_verify, stability_verify};
use cbp_core::{BodySpec, Direction, Settings};
use proptest::prelude::*;

fn unit_direction(n: usize) -> impl Strategy<Value = Direction> {
    prop::collection::vec(-1.0..1.0f64, 2 * n)
        .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-3)
        .prop_map(|v| Direction::new(v).unwrap())
}

fn lq_body(n: usize) -> impl Strategy<Value = BodySpec> {
    (1.0..8.0f64, 0.5..2.0f64).prop_map(move |(q, r)| BodySpec::lq(n, q, r).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn section_constant_along_complex_line(body in lq_body(2), d in unit_direction(2), t in 0.0..6.3f64) {
        let rule = Settings::default().section_rule(2).unwrap();
        let a = section_at(&body, &d, &rule);
        let b = section_at(&body, &d.rotated(t), &rule);
        prop_assert!((a - b).abs() <= 1e-12 * a, "{a} vs {b}");
    }

    #[test]
    fn section_invariant_under_coordinate_phases(
        body in lq_body(3),
        d in unit_direction(3),
        phases in prop::collection::vec(0.0..6.3f64, 3),
    ) {
        let rule = Settings::default().section_rule(3).unwrap();
        let a = section_volume_direct(&body, &d, &rule).unwrap();
        let mut v = d.xi().to_vec();
        for (z, t) in v.chunks_mut(2).zip(&phases) {
            let (s, c) = t.sin_cos();
            let (x, y) = (z[0], z[1]);
            z[0] = c * x - s * y;
            z[1] = s * x + c * y;
        }
        let rotated = Direction::new(v).unwrap();
        let b = section_volume_direct(&body, &rotated, &rule).unwrap();
        let tol = 3.0 * (a.error_estimate + b.error_estimate) + 1e-12 * a.value;
        prop_assert!((a.value - b.value).abs() <= tol, "{} vs {} (tol {tol})", a.value, b.value);
    }

    #[test]
    fn section_and_volume_scale(q in 1.0..8.0f64, r in 0.5..2.0f64, d in unit_direction(2)) {
        let s = Settings::default();
        let unit = BodySpec::lq(2, q, 1.0).unwrap();
        let scaled = BodySpec::lq(2, q, r).unwrap();
        let rule = s.section_rule(2).unwrap();
        let a = section_at(&unit, &d, &rule);
        let b = section_at(&scaled, &d, &rule);
        prop_assert!((b - r.powi(2) * a).abs() <= 1e-12 * b);
        let vr = s.sphere_rule(2).unwrap();
        let va = volume(&unit, &vr).unwrap();
        let vb = volume(&scaled, &vr).unwrap();
        prop_assert!((vb - r.powi(4) * va).abs() <= 1e-12 * vb);
    }

    #[test]
    fn sections_grow_with_the_exponent(q in 1.0..6.0f64, dq in 0.5..4.0f64, d in unit_direction(2)) {
        let rule = Settings::default().section_rule(2).unwrap();
        let small = BodySpec::lq(2, q, 1.0).unwrap();
        let big = BodySpec::lq(2, q + dq, 1.0).unwrap();
        prop_assert!(section_at(&small, &d, &rule) <= section_at(&big, &d, &rule) * (1.0 + 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn ball_pairs_satisfy_the_comparisons(r1 in 0.5..2.0f64, r2 in 0.5..2.0f64, n in 2usize..=3) {
        let s = Settings::default();
        let k = BodySpec::euclidean(n, r1).unwrap();
        let l = BodySpec::euclidean(n, r2).unwrap();
        let st = stability_verify(&k, &l, &s).unwrap();
        prop_assert!(st.pass, "margin {} tolerance {}", st.margin, st.tolerance);
        prop_assert!(corollary1_verify(&k, &l, &s).unwrap().pass);
    }

    #[test]
    fn ellipsoids_satisfy_stability(a in prop::collection::vec(0.7..1.6f64, 2), b in prop::collection::vec(0.7..1.6f64, 2)) {
        let s = Settings::default();
        let k = BodySpec::ellipsoid(&a).unwrap();
        let l = BodySpec::ellipsoid(&b).unwrap();
        let st = stability_verify(&k, &l, &s).unwrap();
        prop_assert!(st.pass, "margin {} tolerance {}", st.margin, st.tolerance);
    }
}
