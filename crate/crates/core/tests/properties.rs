//! Engine-level property suites; run alone with `cargo test --test properties`.

mod common;

use common::props;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn operators_preserve_labels_and_bounds(seed in any::<u64>()) {
        props::operator_invariants(&mut rng(seed)).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn zero_fitness_iff_successful(seed in any::<u64>()) {
        props::zero_fitness_iff_successful(&mut rng(seed)).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn min_distance_shrinks_on_extended_traces(seed in any::<u64>()) {
        props::superset_monotonicity(&mut rng(seed)).map_err(TestCaseError::fail)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn runs_are_reproducible_with_monotone_curves(seed in any::<u64>()) {
        props::reproducible_and_monotone(seed).map_err(TestCaseError::fail)?;
    }
}
