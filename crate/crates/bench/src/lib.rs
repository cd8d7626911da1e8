//! Fixtures shared by the benchmarks.

use cbp_core::{BodySpec, PerturbationTerm};

/// Bodies covering each evaluation path: closed-form radial function,
/// moduli-only norm and a phase-dependent perturbation.
pub fn fixtures(n: usize) -> Vec<BodySpec> {
    vec![
        BodySpec::euclidean(n, 1.0).unwrap(),
        BodySpec::lq(n, 4.0, 1.0).unwrap(),
        BodySpec::perturbed(
            n,
            1.0,
            &[
                PerturbationTerm { degree: 2, index: 0, coeff: 0.2 },
                PerturbationTerm { degree: 2, index: 1, coeff: 0.15 },
            ],
        )
        .unwrap(),
    ]
}
