//! Randomized properties, each checked against a brute-force oracle.

mod common;

use std::time::Duration;

use common::*;
use proptest::prelude::*;
use synrg::ast::Expr;

fn sized_candidate() -> impl Strategy<Value = (usize, Expr)> {
    (2usize..=3).prop_flat_map(|b| (Just(b), bounded_candidate(b as i64)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn simplify_preserves_meaning(e in quantified_constraint(2)) {
        let v = simplify_violation(&e);
        prop_assert!(v.is_none(), "{e}\n  at {v:?}");
    }

    #[test]
    fn restriction_agrees_inside_the_bound(b in 1usize..=2, e in quantified_constraint(2)) {
        let v = restriction_violation(&e, b);
        prop_assert!(v.is_none(), "b={b}: {e}\n  at {v:?}");
    }

    #[test]
    fn generalizing_then_restricting_is_the_identity((b, e) in sized_candidate()) {
        prop_assert!(bool_depth(&e) <= 4, "{e}");
        let v = def3_violation(&e, b);
        prop_assert!(v.is_none(), "b={b}: {e}\n  at {v:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn enumerated_bindings_satisfy_the_problem((b, e) in sized_candidate()) {
        let verdict = enumerator_verdict(&e, b, Duration::from_millis(100));
        prop_assert!(!matches!(verdict, EnumVerdict::Unsound(..)), "b={b}: {e}\n  {verdict:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn fragment_instantiation_is_equisatisfiable(phi in fragment_formula()) {
        let d = fragment_disagreement(&phi);
        prop_assert!(d.is_none(), "{phi}\n  {}", d.unwrap_or_default());
    }
}
