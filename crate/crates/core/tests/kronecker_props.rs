use proptest::prelude::*;

use kronlab::kronecker::{
    build_kronecker_points, exact_residual, recheck_residuals, rigidity_witness, solve_kronecker_approx, Approximation,
    BuildConfig, Method, SolveOptions, UnimodularTarget,
};
use kronlab::numkit::expr::eval_expr;
use kronlab::numkit::rational::rational;
use kronlab::numkit::{NumericReal, Real, Tier};
use kronlab::qindep::{check_q_independence, expand_group, Bounds, IndependenceStatus};
use kronlab::specmeasure::Measure;

const POOL: [&str; 7] = ["1", "sqrt(2)", "sqrt(3)", "sqrt(5)", "sqrt(7)", "pi", "ln(2)"];

/// Up to three distinct irrational-ish points with phases in [0, 1).
fn target(max_len: usize) -> impl Strategy<Value = UnimodularTarget> {
    prop::sample::subsequence(POOL.to_vec(), 1..=max_len)
        .prop_flat_map(|pts| {
            let n = pts.len();
            (Just(pts), prop::collection::vec(0.0f64..1.0, n))
        })
        .prop_map(|(pts, phases)| {
            let xs = pts.iter().map(|e| eval_expr(e, 128).unwrap()).collect();
            UnimodularTarget::new(xs, phases).unwrap()
        })
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn witnesses_survive_a_precision_doubling(tgt in target(3), eps in 0.05f64..0.2) {
        for opts in [SolveOptions::default(), SolveOptions::grid()] {
            let r = solve_kronecker_approx(&tgt, eps, 1.0, &opts).unwrap();
            let w = r.found().expect("small instances are solvable");
            prop_assert!(w.t >= 1.0 && w.max_residual < eps);
            let again = recheck_residuals(w.t, &tgt, 256).unwrap();
            for (a, b) in again.iter().zip(&w.residuals) {
                prop_assert!((a - b).abs() <= 1e-10, "{} vs {}", a, b);
            }
            prop_assert_eq!(w.max_residual, w.residuals.iter().copied().fold(0.0, f64::max));
        }
    }

    #[test]
    fn lattice_matches_the_grid_oracle(tgt in target(3), eps in 0.05f64..0.15) {
        let grid = solve_kronecker_approx(&tgt, eps, 1.0, &SolveOptions::grid()).unwrap();
        let lattice = solve_kronecker_approx(&tgt, eps, 1.0, &SolveOptions::default()).unwrap();
        if let Some(g) = grid.found() {
            let l = lattice.found().expect("the oracle found a witness, so must the lattice route");
            prop_assert!(l.max_residual < eps && g.max_residual < eps);
        }
    }

    #[test]
    fn rescaling_points_rescales_witnesses(tgt in target(3), k in -2i32..=2, c in 0.25f64..4.0) {
        let w = solve_kronecker_approx(&tgt, 0.1, 1.0, &SolveOptions::default()).unwrap().found().unwrap().clone();
        for (factor, tol) in [(2f64.powi(k), 0.0), (c, 1e-9)] {
            let f = NumericReal::from_f64(factor, 128).unwrap();
            let scaled: Vec<NumericReal> = tgt.points.iter().map(|x| x.mul(&f)).collect();
            let t = w.t / factor;
            for ((x, &phase), &r) in scaled.iter().zip(&tgt.phases).zip(&w.residuals) {
                let moved = exact_residual(t, x, phase);
                prop_assert!((moved - r).abs() <= tol, "factor {}: {} vs {}", factor, moved, r);
            }
        }
    }

    #[test]
    fn relaxing_eps_keeps_witnesses(tgt in target(3), eps in 0.02f64..0.08, extra in 0.0f64..0.1, grid in any::<bool>()) {
        let opts = SolveOptions {
            method: if grid { Method::Grid } else { Method::Lattice },
            grid_evaluations: 200_000,
            lattice_attempts: 200,
        };
        let tight = solve_kronecker_approx(&tgt, eps, 1.0, &opts).unwrap();
        if tight.is_found() {
            let loose = solve_kronecker_approx(&tgt, eps + extra, 1.0, &opts).unwrap();
            prop_assert!(loose.is_found(), "eps {} found but {} not", eps, eps + extra);
        }
    }

    #[test]
    fn dirichlet_residuals_grow_at_most_linearly(pts in prop::sample::subsequence(POOL.to_vec(), 1..=3), eps in 0.05f64..0.2) {
        let xs: Vec<f64> = pts.iter().map(|e| eval_expr(e, 128).unwrap().to_f64()).collect();
        let w: Vec<(f64, _)> = xs.iter().map(|&x| (x, rational(1, xs.len() as i64))).collect();
        let sigma = Measure::floats(&w).unwrap();
        let Approximation::Found(wit) = rigidity_witness(&sigma, eps, 1.0, &SolveOptions::default()).unwrap() else {
            return Err(TestCaseError::fail("no Dirichlet witness"));
        };
        for atom in sigma.atoms() {
            let x = NumericReal::from_f64(atom.pos.to_f64().unwrap(), 128).unwrap();
            let base = exact_residual(wit.t, &x, 0.0);
            for k in 1..=8u32 {
                let r = exact_residual(k as f64 * wit.t, &x, 0.0);
                prop_assert!(r <= k as f64 * base + 1e-12, "k={}: {} > {}", k, r, k as f64 * base);
            }
        }
    }

    #[test]
    fn symbolic_builds_are_independent(
        radius in 0u32..=3,
        ys in prop::collection::btree_set(-30i64..=30, 1..=5),
        delta in prop::sample::select(vec![rational(1, 100), rational(1, 10), rational(1, 2)]),
        seed in any::<u64>(),
    ) {
        let tau = Real::parse("tau", Tier::Symbolic, 128).unwrap();
        let slice = expand_group(&[tau], radius).unwrap();
        let targets: Vec<_> = ys.iter().map(|&y| rational(y, 10)).collect();
        let cfg = BuildConfig { seed, ..BuildConfig::default() };
        let spec = build_kronecker_points(&targets, &delta, &slice, &cfg).unwrap();
        prop_assert_eq!(spec.realized.len(), targets.len() * slice.len());
        let v = check_q_independence(&spec.realized, Bounds::default()).unwrap();
        prop_assert_eq!(v.status, IndependenceStatus::IndependentExact);
    }
}
