//! Randomized invariants across modules.

use std::collections::HashSet;
use std::sync::OnceLock;

use proptest::prelude::*;

use crate::analysis::{norm_n, weighted_norm};
use crate::construction::{build, ConstructionState, DEFAULT_MAX_HORIZON};
use crate::operator::{apply_t, to_frame};
use crate::scalar::{Rational, Real, Scalar};
use crate::space::{power_space, SpaceDescriptor};
use crate::vector::{FinVector, Frame};

fn l1_state() -> &'static ConstructionState<Rational> {
    static ST: OnceLock<ConstructionState<Rational>> = OnceLock::new();
    ST.get_or_init(|| build(&SpaceDescriptor::l1_power(), 2, DEFAULT_MAX_HORIZON).unwrap())
}

fn rat(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

fn sparse(max_key: u64) -> impl Strategy<Value = Vec<(u64, i64, i64)>> {
    prop::collection::vec((0..max_key, -20i64..=20, 1i64..=8), 1..6)
}

fn e_vec(terms: &[(u64, i64, i64)]) -> FinVector<Rational> {
    FinVector::from_pairs(Frame::E, terms.iter().map(|&(k, n, d)| (k, rat(n, d))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn seminorms_increase(terms in sparse(200), j in 1u32..6) {
        for space in [SpaceDescriptor::l1_power(), SpaceDescriptor::l2_power(), SpaceDescriptor::omega()] {
            let v = FinVector::from_pairs(Frame::E, terms.iter().map(|&(k, n, d)| (k, Real::from_ratio(n, d))));
            prop_assert!(space.seminorm(j, &v).unwrap() <= space.seminorm(j + 1, &v).unwrap());
        }
    }

    #[test]
    fn seminorm_is_subadditive_and_homogeneous(a in sparse(120), b in sparse(120), c in -5i64..=5, j in 1u32..5) {
        let space = SpaceDescriptor::l1_power();
        let (x, y) = (e_vec(&a), e_vec(&b));
        let p = |v: &FinVector<Rational>| space.seminorm(j, v).unwrap();
        prop_assert!(p(&x.add(&y)) <= p(&x) + p(&y));
        prop_assert_eq!(p(&x.scaled(&rat(c, 1))), rat(c, 1).abs() * p(&x));
    }

    #[test]
    fn weighted_norm_dominates(terms in sparse(300), j in 1u32..5) {
        let space = SpaceDescriptor::l1_power();
        let v = e_vec(&terms);
        prop_assert!(space.seminorm(j, &v).unwrap() <= weighted_norm(&space, j, &v).unwrap());
    }

    #[test]
    fn fresh_indices_are_fresh(level in 0u32..=8, count in 1usize..12, floor in 0u64..500, excl in prop::collection::hash_set(0u64..800, 0..30)) {
        let space = SpaceDescriptor::l2_power();
        let got = space.fresh_indices(level, count, &excl, floor).unwrap();
        prop_assert_eq!(got.len(), count);
        let uniq: HashSet<u64> = got.iter().copied().collect();
        prop_assert_eq!(uniq.len(), count);
        for e in &got {
            prop_assert!(*e >= floor && !excl.contains(e));
            prop_assert_eq!(space.level_of(*e).unwrap(), level);
        }
        prop_assert!(got.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn t_is_linear(a in sparse(40), b in sparse(40), c in -4i64..=4) {
        let st = l1_state();
        let in_range = |t: &[(u64, i64, i64)]| t.iter().all(|&(k, _, _)| st.position_of(k).is_some_and(|j| j + 1 < st.horizon()));
        prop_assume!(in_range(&a) && in_range(&b));
        let (x, y) = (e_vec(&a), e_vec(&b));
        let lhs = apply_t(st, &x.add(&y.scaled(&rat(c, 1)))).unwrap();
        let rhs = apply_t(st, &x).unwrap().add(&apply_t(st, &y).unwrap().scaled(&rat(c, 1)));
        prop_assert!(to_frame(st, &lhs.sub(&rhs), Frame::E).unwrap().is_zero());
    }

    #[test]
    fn seminorm_below_stage_norm(terms in sparse(40), j in 1u32..4) {
        let st = l1_state();
        prop_assume!(terms.iter().all(|&(k, _, _)| st.position_of(k).is_some()));
        let v = e_vec(&terms);
        prop_assert!(st.space().seminorm(j, &v).unwrap() <= norm_n(st, j, &v).unwrap());
    }
}

#[test]
fn power_space_classification() {
    for base in [SpaceDescriptor::l1_power(), SpaceDescriptor::l2_power()] {
        assert!(!base.classify_isp().unwrap().satisfies_isp());
    }
    let omega = SpaceDescriptor::omega();
    let power = power_space(&omega).unwrap();
    assert!(power.classify_isp().unwrap().satisfies_isp());
    assert!(power_space(&power).is_err());
}
