use proptest::prelude::*;

use kronlab::numkit::rational::rational;
use kronlab::numkit::{NumericReal, Rational, Real, Tier};
use kronlab::specmeasure::{
    abs_continuity_test, bochner, mix, scale_measure, self_similarity_scales, singularity_test, symmetrize,
    translate_measure, weak_distance, Atom, Measure, MetricConfig, Piece, Position,
};

fn weight() -> impl Strategy<Value = Rational> {
    (1i64..=9, 1i64..=8).prop_map(|(p, q)| rational(p, q))
}

fn nonzero_rational() -> impl Strategy<Value = Rational> {
    (1i64..=12, 1i64..=6, any::<bool>()).prop_map(|(p, q, neg)| rational(if neg { -p } else { p }, q))
}

/// Exact positions drawn from rationals and multiples of two symbols.
fn exact_measure() -> impl Strategy<Value = Measure> {
    let pos = (-8i64..=8, 1i64..=4, 0usize..3).prop_map(|(p, q, kind)| {
        let r = format!("{p}/{q}");
        match kind {
            0 => r,
            1 => format!("{r}+1*tau^1"),
            _ => format!("0+{p}/{q}*tau_1^-1"),
        }
    });
    prop::collection::vec((pos, weight()), 1..5).prop_filter_map("zero position", |atoms| {
        let atoms: Vec<Atom> = atoms
            .into_iter()
            .map(|(p, w)| Atom { pos: Position::parse(&p, Tier::Symbolic).unwrap(), w })
            .collect();
        Measure::new(Tier::Symbolic, atoms, Vec::new()).ok()
    })
}

fn numeric_measure() -> impl Strategy<Value = Measure> {
    let atoms = prop::collection::vec((-6.0f64..6.0, weight()), 0..4);
    let pieces = prop::collection::vec((-4.0f64..4.0, 0.1f64..2.0, 0.05f64..1.0), 0..3);
    (atoms, pieces).prop_filter_map("empty measure", |(atoms, pieces)| {
        let atoms = atoms.into_iter().map(|(x, w)| Atom { pos: Position::Float(x), w }).collect();
        let density = pieces.into_iter().map(|(l, len, level)| Piece { l, u: l + len, level }).collect();
        let m = Measure::new(Tier::Numeric, atoms, density).ok()?;
        (!m.is_zero()).then_some(m)
    })
}

fn q(r: &Rational) -> Real {
    Real::rational(r.clone())
}

fn num(x: f64) -> Real {
    Real::Numeric(NumericReal::from_f64(x, 128).unwrap())
}

fn positions_close(a: &Measure, b: &Measure) -> bool {
    a.atoms().len() == b.atoms().len()
        && a.atoms().iter().zip(b.atoms()).all(|(x, y)| {
            let (u, v) = (x.pos.to_f64().unwrap(), y.pos.to_f64().unwrap());
            x.w == y.w && (u - v).abs() <= 1e-12 * u.abs().max(1.0)
        })
}

proptest! {
    #[test]
    fn pushforwards_compose_exactly(m in exact_measure(), s in nonzero_rational(), r in nonzero_rational(), a in nonzero_rational(), b in nonzero_rational()) {
        let twice = scale_measure(&scale_measure(&m, &q(&s)).unwrap(), &q(&r)).unwrap();
        prop_assert_eq!(twice, scale_measure(&m, &q(&(&s * &r))).unwrap());
        let shifted = translate_measure(&translate_measure(&m, &q(&a)).unwrap(), &q(&b)).unwrap();
        prop_assert_eq!(shifted, translate_measure(&m, &q(&(&a + &b))).unwrap());
        prop_assert_eq!(scale_measure(&m, &q(&rational(1, 1))).unwrap(), m.clone());
    }

    #[test]
    fn pushforwards_compose_numerically(m in numeric_measure(), s in 0.2f64..4.0, r in 0.2f64..4.0, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let twice = scale_measure(&scale_measure(&m, &num(s)).unwrap(), &num(r)).unwrap();
        prop_assert!(positions_close(&twice, &scale_measure(&m, &num(s * r)).unwrap()));
        let shifted = translate_measure(&translate_measure(&m, &num(a)).unwrap(), &num(b)).unwrap();
        prop_assert!(positions_close(&shifted, &translate_measure(&m, &num(a + b)).unwrap()));
        prop_assert_eq!(scale_measure(&m, &num(1.0)).unwrap(), m.clone());
    }

    #[test]
    fn mass_is_preserved(m in numeric_measure(), s in 0.2f64..4.0, neg in any::<bool>(), r in -3.0f64..3.0) {
        let s = if neg { -s } else { s };
        let mass = m.total_mass();
        let tol = 1e-12 * mass.max(1.0);
        prop_assert!((scale_measure(&m, &num(s)).unwrap().total_mass() - mass).abs() <= tol);
        prop_assert!((translate_measure(&m, &num(r)).unwrap().total_mass() - mass).abs() <= tol);
        let sym = symmetrize(&m).unwrap();
        prop_assert!((sym.total_mass() / 2.0 - mass).abs() <= tol);
        let reflected = scale_measure(&sym, &num(-1.0)).unwrap();
        prop_assert!(positions_close(&reflected, &sym));
    }

    #[test]
    fn transform_is_bounded_by_mass(m in numeric_measure(), t in -20.0f64..20.0) {
        let mass = m.total_mass();
        prop_assert!(bochner(&m, t).unwrap().norm() <= mass * (1.0 + 1e-12));
        let at_zero = bochner(&m, 0.0).unwrap();
        prop_assert!((at_zero.re - mass).abs() <= 1e-12 * mass && at_zero.im == 0.0);
    }

    #[test]
    fn mixtures_transform_linearly(a in numeric_measure(), b in numeric_measure(), w in 1i64..=9, t in -10.0f64..10.0) {
        let (wa, wb) = (rational(w, 10), rational(10 - w, 10));
        let m = mix(&[a.clone(), b.clone()], &[wa, wb]).unwrap();
        let lhs = bochner(&m, t).unwrap();
        let rhs = bochner(&a, t).unwrap() * (w as f64 / 10.0) + bochner(&b, t).unwrap() * ((10 - w) as f64 / 10.0);
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (a.total_mass() + b.total_mass()));
    }

    #[test]
    fn self_similarity_scales_form_a_group(
        support in prop::collection::btree_set(prop::sample::select(vec![-3i64, -2, -1, 1, 2, 3, 4, 6]), 1..5),
        denom in prop::sample::select(vec![1i64, 2, 3]),
    ) {
        let atoms: Vec<(Position, Rational)> =
            support.iter().map(|&p| (Position::rational(rational(p, denom)), rational(1, 1))).collect();
        let m = Measure::atomic(Tier::Symbolic, atoms).unwrap();
        let scales = self_similarity_scales(&m).unwrap();
        let one = Position::rational(rational(1, 1));
        prop_assert!(scales.contains(&one));
        for s in &scales {
            let Position::Exact(v) = s else { panic!("exact tier yields exact scales") };
            let inv = Position::rational(rational(1, 1) / v.as_rational().unwrap());
            prop_assert!(scales.contains(&inv), "{} has no inverse in {:?}", s.canonical(), scales);
        }
    }

    #[test]
    fn metric_axioms(a in numeric_measure(), b in numeric_measure(), c in numeric_measure()) {
        let cfg = MetricConfig::new(-20.0, 20.0);
        let d = |x: &Measure, y: &Measure| weak_distance(x, y, &cfg).unwrap();
        prop_assert_eq!(d(&a, &a), 0.0);
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-12);
    }

    #[test]
    fn singular_pairs_are_not_absolutely_continuous(a in numeric_measure(), b in numeric_measure()) {
        if singularity_test(&a, &b).is_singular() {
            prop_assert!(!abs_continuity_test(&a, &b));
            prop_assert!(!abs_continuity_test(&b, &a));
        }
        prop_assert!(abs_continuity_test(&a, &a));
    }
}
