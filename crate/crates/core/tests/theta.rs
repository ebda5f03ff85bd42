mod common;

use common::checks::{self, INVARIANT_CHARTS};
use proptest::prelude::*;

fn chart() -> impl Strategy<Value = whittaker::theta::chart::ChartKind> {
    proptest::sample::select(INVARIANT_CHARTS.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn theta_function_is_invariant_under_each_generator(c in chart(), seed in any::<u64>()) {
        prop_assert_eq!(checks::gamma_invariance(c, seed), Ok(()));
    }

    #[test]
    fn automorphy_units_are_multiplicative(c in chart(), seed in any::<u64>()) {
        prop_assert_eq!(checks::u_multiplicativity(c, seed), Ok(()));
    }

    #[test]
    fn automorphy_units_do_not_depend_on_the_base_point(c in chart(), seed in any::<u64>()) {
        prop_assert_eq!(checks::omega_independence(c, seed), Ok(()));
    }

    #[test]
    fn one_more_letter_stays_within_the_certified_error(c in chart(), seed in any::<u64>()) {
        prop_assert_eq!(checks::length_stability(c, seed), Ok(()));
    }

    #[test]
    fn even_theta_products_telescope(c in chart(), seed in any::<u64>()) {
        prop_assert_eq!(checks::theta_w_telescoping(c, seed), Ok(()));
    }

    #[test]
    fn h_is_invariant_under_the_even_subgroup(c in chart(), seed in any::<u64>()) {
        prop_assert_eq!(checks::h_invariance(c, seed), Ok(()));
    }
}
