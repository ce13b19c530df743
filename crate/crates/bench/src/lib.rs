//! Shared workloads for the criterion benches under `benches/`.

use locdiv_core::coord::{self, ratio};
use locdiv_core::{ConstructionConfig, ConstructionState, FamilySpec, IntervalSet, NullSetSpec};

/// `count` disjoint intervals spread over `[-3, 3]`.
pub fn comb(count: usize) -> IntervalSet {
    let w = 6.0 / (2 * count) as f64;
    let pairs: Vec<(f64, f64)> = (0..count)
        .map(|i| {
            let a = -3.0 + 2.0 * w * i as f64;
            (a, a + w)
        })
        .collect();
    IntervalSet::from_f64_pairs(&pairs).expect("increasing endpoints")
}

/// Haar construction on `{1/3, 2/3}`.
pub fn haar_state(depth: usize) -> ConstructionState {
    ConstructionState::new(
        FamilySpec::HaarDyadic,
        NullSetSpec::Finite { points: vec![ratio(1, 3), ratio(2, 3)] },
        ConstructionConfig { depth, witnesses: 2, ..Default::default() },
    )
}

/// Dirichlet construction on one point, two levels.
pub fn dirichlet_state() -> ConstructionState {
    ConstructionState::new(
        FamilySpec::Dirichlet,
        NullSetSpec::Finite { points: vec![coord::from_f64(0.5)] },
        ConstructionConfig { depth: 2, witnesses: 1, ..Default::default() },
    )
}
