use num_bigint::BigInt;
use proptest::prelude::*;

use kronlab::numkit::expr::eval_expr;
use kronlab::numkit::rational::rational;
use kronlab::numkit::{Monomial, NumericReal, Rational, Real, SymbolicReal, Tier};
use kronlab::qindep::{
    check_group_independence, check_q_independence, expand_group, symbolic_relation_value, Bounds, IndependenceStatus,
};

fn nonzero_rational() -> impl Strategy<Value = Rational> {
    (1i64..=30, 1i64..=12, any::<bool>()).prop_map(|(p, q, neg)| rational(if neg { -p } else { p }, q))
}

/// Distinct Laurent monomials in two symbols, each with a nonzero coefficient.
fn monomial_set() -> impl Strategy<Value = Vec<SymbolicReal>> {
    (prop::collection::btree_set((-4i32..=4, -2i32..=2), 1..7), prop::collection::vec(nonzero_rational(), 7)).prop_map(
        |(exps, coeffs)| {
            exps.into_iter()
                .zip(coeffs)
                .map(|((a, b), c)| SymbolicReal::term(c, Monomial::power("tau", a).mul(&Monomial::power("tau_1", b))))
                .collect()
        },
    )
}

fn reals(xs: &[SymbolicReal]) -> Vec<Real> {
    xs.iter().cloned().map(Real::from).collect()
}

fn scale_all(xs: &[Real], c: &Rational) -> Vec<Real> {
    xs.iter()
        .map(|x| match x {
            Real::Symbolic(_) => x.mul(&Real::rational(c.clone())).unwrap(),
            Real::Numeric(v) => Real::Numeric(v.mul(&NumericReal::from_rational(c, v.precision()).unwrap())),
        })
        .collect()
}

fn same_up_to_sign(a: &[BigInt], b: &[BigInt]) -> bool {
    a == b || a.iter().zip(b).all(|(x, y)| *x == -y)
}

proptest! {
    #[test]
    fn distinct_monomials_are_exactly_independent(xs in monomial_set()) {
        let v = check_q_independence(&reals(&xs), Bounds::default()).unwrap();
        prop_assert_eq!(v.status, IndependenceStatus::IndependentExact);
        prop_assert!(v.relation.is_none());
    }

    #[test]
    fn subsets_inherit_exact_independence(xs in monomial_set(), mask in prop::collection::vec(any::<bool>(), 7)) {
        let sub: Vec<SymbolicReal> = xs.iter().zip(&mask).filter(|(_, &keep)| keep).map(|(x, _)| x.clone()).collect();
        prop_assume!(!sub.is_empty());
        let v = check_q_independence(&reals(&sub), Bounds::default()).unwrap();
        prop_assert_eq!(v.status, IndependenceStatus::IndependentExact);
    }

    #[test]
    fn symbolic_dependence_is_scale_covariant(xs in monomial_set(), a in nonzero_rational(), b in nonzero_rational(), c in nonzero_rational()) {
        prop_assume!(xs.len() >= 2);
        let combo = &xs[0].scale(&a) + &xs[1].scale(&b);
        prop_assume!(!combo.is_zero() && !xs.contains(&combo));
        let mut set = xs.clone();
        set.push(combo);
        let base = check_q_independence(&reals(&set), Bounds::default()).unwrap();
        prop_assert_eq!(base.status, IndependenceStatus::Dependent);
        let k = base.relation.unwrap().coefficients;
        prop_assert!(symbolic_relation_value(&set, &k).is_zero());
        let scaled = check_q_independence(&scale_all(&reals(&set), &c), Bounds::default()).unwrap();
        prop_assert_eq!(scaled.status, IndependenceStatus::Dependent);
        prop_assert_eq!(scaled.relation.unwrap().coefficients, k);
    }

    #[test]
    fn numeric_dependence_is_scale_covariant(p in prop::sample::select(vec![2u32, 3, 5, 7]), a in -5i64..=5, b in 1i64..=5, c in nonzero_rational()) {
        prop_assume!(a != 0 || b != 1);
        let xs: Vec<Real> = ["1".to_string(), format!("sqrt({p})"), format!("{a}+{b}*sqrt({p})")]
            .iter()
            .map(|e| Real::Numeric(eval_expr(e, 128).unwrap()))
            .collect();
        let bounds = Bounds { max_coeff: 20, precision_bits: 128 };
        let base = check_q_independence(&xs, bounds).unwrap();
        prop_assert_eq!(base.status, IndependenceStatus::Dependent);
        let scaled = check_q_independence(&scale_all(&xs, &c), bounds).unwrap();
        prop_assert_eq!(scaled.status, IndependenceStatus::Dependent);
        let (k0, k1) = (base.relation.unwrap().coefficients, scaled.relation.unwrap().coefficients);
        prop_assert!(same_up_to_sign(&k0, &k1), "{:?} vs {:?}", k0, k1);
    }

    #[test]
    fn dependence_persists_as_the_radius_grows(
        gen in prop::sample::select(vec!["sqrt(2)", "sqrt(3)", "2^(1/3)", "3/2", "2"]),
        tier in prop::sample::select(vec![Tier::Numeric, Tier::Symbolic]),
        start in 1u32..=2,
    ) {
        let g = match (tier, gen.parse::<SymbolicReal>()) {
            (Tier::Symbolic, Ok(s)) => Real::Symbolic(s),
            (Tier::Symbolic, Err(_)) => return Ok(()),
            (Tier::Numeric, _) => Real::Numeric(eval_expr(gen, 128).unwrap()),
        };
        let bounds = Bounds { max_coeff: 1000, precision_bits: 128 };
        let first = check_group_independence(&expand_group(std::slice::from_ref(&g), start).unwrap(), bounds).unwrap();
        prop_assume!(first.status == IndependenceStatus::Dependent);
        for radius in start + 1..=start + 2 {
            let v = check_group_independence(&expand_group(std::slice::from_ref(&g), radius).unwrap(), bounds).unwrap();
            prop_assert_eq!(v.status, IndependenceStatus::Dependent, "radius {}", radius);
        }
    }
}

#[test]
fn symbolic_generators_stay_independent_at_every_radius() {
    let tau = Real::parse("tau", Tier::Symbolic, 128).unwrap();
    for radius in 0..=6 {
        let slice = expand_group(std::slice::from_ref(&tau), radius).unwrap();
        assert_eq!(slice.len(), 2 * radius as usize + 1);
        let v = check_group_independence(&slice, Bounds::default()).unwrap();
        assert_eq!(v.status, IndependenceStatus::IndependentExact);
    }
}
