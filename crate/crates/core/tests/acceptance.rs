//! Acceptance run: one line per criterion, non-zero exit if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kronlab::cli::{run_scenario, ScenarioConfig};
use kronlab::gaussflow::{
    empirical_autocovariance, gaussianity_test, rescale_paths, rigidity_check, simulate, spectral_estimate, strongest_peaks,
    Grid, ProcessSpec,
};
use kronlab::kronecker::{
    build_kronecker_points, rigidity_witness, solve_kronecker_approx, weak_convergence_check, BuildConfig,
    Certificate, Convergence, SolveOptions, UnimodularTarget, WeakTarget,
};
use kronlab::numkit::circle::{powi, unit};
use kronlab::numkit::expr::eval_expr;
use kronlab::numkit::rational::rational;
use kronlab::numkit::{find_integer_relation, NumericReal, Real, RelationSearch, Tier};
use kronlab::qindep::{check_q_independence, expand_group, Bounds, IndependenceStatus};
use kronlab::specmeasure::{
    abs_continuity_test, bochner, overlap_fraction, realize, scale_measure, singularity_test, structural_self_similarity,
    symmetrize, translate_measure, weak_distance, GroupMeasure, Measure, MetricConfig, Piece, StructuralVerdict,
};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn num(text: &str) -> NumericReal {
    eval_expr(text, 128).unwrap()
}

fn c1_kronecker_approximation() -> Check {
    let xs: Vec<NumericReal> = ["1", "sqrt(2)", "sqrt(3)", "sqrt(5)", "sqrt(7)"].iter().map(|t| num(t)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let targets: Vec<Vec<f64>> = (0..20).map(|_| (0..5).map(|_| rng.gen::<f64>()).collect()).collect();
    let mut slowest = Duration::ZERO;
    let mut worst = 0.0f64;
    for (k, phases) in targets.iter().enumerate() {
        let target = UnimodularTarget::new(xs.clone(), phases.clone()).map_err(|e| e.to_string())?;
        let start = Instant::now();
        let r = solve_kronecker_approx(&target, 0.05, 1.0, &SolveOptions::default()).map_err(|e| e.to_string())?;
        let took = start.elapsed();
        slowest = slowest.max(took);
        let w = r.found().ok_or(format!("target {k}: lattice found no witness"))?;
        ensure(w.max_residual < 0.05, format!("target {k}: residual {}", w.max_residual))?;
        ensure(took < Duration::from_secs(10), format!("target {k}: {took:?}"))?;
        worst = worst.max(w.max_residual);
    }
    let mut pairs = 0;
    for i in 0..5 {
        for j in i + 1..5 {
            for (k, phases) in targets.iter().enumerate() {
                let t = UnimodularTarget::new(vec![xs[i].clone(), xs[j].clone()], vec![phases[i], phases[j]])
                    .map_err(|e| e.to_string())?;
                let r = solve_kronecker_approx(&t, 0.05, 1.0, &SolveOptions::grid()).map_err(|e| e.to_string())?;
                let w = r.found().ok_or(format!("grid oracle: subset ({i},{j}) target {k} infeasible"))?;
                ensure(w.max_residual < 0.05, format!("grid oracle residual {}", w.max_residual))?;
                pairs += 1;
            }
        }
    }
    Ok(format!("20/20 lattice witnesses, worst residual {worst:.4}, slowest {slowest:?}; grid oracle {pairs}/200 pair targets"))
}

fn c2_rigidity() -> Check {
    let sigma = Measure::floats(&[(1.0, rational(1, 2)), (2f64.sqrt(), rational(1, 2))]).unwrap();
    let r = rigidity_witness(&sigma, 0.1, 1.0, &SolveOptions::default()).map_err(|e| e.to_string())?;
    let w = r.found().ok_or("no Dirichlet witness")?;
    ensure(w.t == 29.0 || w.max_residual <= 0.0766 + 1e-6, format!("t={} residual {}", w.t, w.max_residual))?;
    let var = 2.0;
    let sym = symmetrize(&sigma).unwrap();
    let theoretical = 2.0 * (var - bochner(&sym, w.t).unwrap().re);
    ensure(theoretical < 0.01 * var, format!("theoretical {theoretical}"))?;
    let sample = simulate(&ProcessSpec::new(sigma, Grid { t0: 0.0, step: 0.5, count: 16 }, 10_000, 7)).unwrap();
    let rep = rigidity_check(&sample, w.t, 0.01).unwrap();
    ensure((rep.theoretical - theoretical).abs() < 1e-12, "theoretical columns disagree")?;
    ensure(rep.agrees, format!("empirical {} vs {} (stderr {})", rep.empirical, rep.theoretical, rep.stderr))?;
    Ok(format!(
        "t={:.4} residual {:.4}; E|dX|^2 theory {:.5}, empirical {:.5} +- {:.5} (10^4 paths)",
        w.t, w.max_residual, theoretical, rep.empirical, rep.stderr
    ))
}

fn relation(xs: &[&str], max_coeff: u64) -> Result<(RelationSearch, Duration), String> {
    let vals: Vec<NumericReal> = xs.iter().map(|t| num(t)).collect();
    let start = Instant::now();
    let r = find_integer_relation(&vals, max_coeff, 128).map_err(|e| e.to_string())?;
    Ok((r, start.elapsed()))
}

fn c3_relations() -> Check {
    let mut notes = Vec::new();
    for xs in [["1", "sqrt(2)", "1+sqrt(2)"], ["1", "phi", "phi^2"]] {
        let (r, took) = relation(&xs, 10)?;
        let rel = r.relation().ok_or(format!("{xs:?}: none found"))?;
        let k: Vec<i64> = rel.coefficients.iter().map(|c| c.try_into().unwrap()).collect();
        ensure(k == [1, 1, -1] || k == [-1, -1, 1], format!("{xs:?}: {k:?}"))?;
        ensure(took < Duration::from_secs(1), format!("{xs:?}: {took:?}"))?;
        notes.push(format!("{k:?}"));
    }
    let (r, took) = relation(&["1", "2^(1/3)", "2^(2/3)", "2"], 10)?;
    let rel = r.relation().ok_or("cube-root slice: none found")?;
    ensure(rel.coefficients.iter().all(|c| c.magnitude() <= &10u32.into()), "coefficient above 10")?;
    ensure(took < Duration::from_secs(1), format!("cube-root slice: {took:?}"))?;
    notes.push(format!("{:?}", rel.coefficients.iter().map(ToString::to_string).collect::<Vec<_>>()));
    let (r, _) = relation(&["1", "sqrt(2)", "sqrt(3)", "sqrt(6)"], 10_000)?;
    ensure(r.relation().is_none(), "{1, sqrt2, sqrt3, sqrt6}: spurious relation")?;
    let taus: Vec<Real> = (-5..=5).map(|k| Real::parse(&format!("tau^{k}"), Tier::Symbolic, 128).unwrap()).collect();
    let start = Instant::now();
    let v = check_q_independence(&taus, Bounds::default()).map_err(|e| e.to_string())?;
    ensure(v.status == IndependenceStatus::IndependentExact, "tau powers not independent-exact")?;
    Ok(format!("relations {} ; sqrt set none-found at 10^4; tau^-5..5 exact in {:?}", notes.join(" "), start.elapsed()))
}

fn c4_construction() -> Check {
    let tau = Real::parse("tau", Tier::Symbolic, 128).unwrap();
    let mut built = 0;
    for radius in 0..=3 {
        let slice = expand_group(std::slice::from_ref(&tau), radius).unwrap();
        for n in 1..=5i64 {
            let ys: Vec<_> = (1..=n).map(|i| rational(3 * i, 10)).collect();
            let spec = build_kronecker_points(&ys, &rational(1, 100), &slice, &BuildConfig::default())
                .map_err(|e| format!("radius {radius}, N {n}: {e}"))?;
            let v = check_q_independence(&spec.realized, Bounds::default()).unwrap();
            ensure(v.status == IndependenceStatus::IndependentExact, format!("radius {radius}, N {n}: {:?}", v.status))?;
            built += 1;
        }
    }
    let pi = Real::parse("pi", Tier::Numeric, 128).unwrap();
    let slice = expand_group(&[pi], 1).unwrap();
    let mut rounds = Vec::new();
    for seed in 0..10 {
        let cfg = BuildConfig { seed, ..Default::default() };
        let spec = build_kronecker_points(&[rational(3, 10), rational(3, 5)], &rational(1, 100), &slice, &cfg)
            .map_err(|e| format!("numeric seed {seed}: {e}"))?;
        match spec.certificate {
            Certificate::NumericNoRelation { rounds: r, .. } => {
                ensure(r <= 10, format!("seed {seed}: {r} rounds"))?;
                rounds.push(r);
            }
            _ => return Err("numeric build without numeric certificate".into()),
        }
    }
    Ok(format!("{built} symbolic builds independent-exact; <pi> r1 seeds 0-9 accepted after rounds {rounds:?}"))
}

fn random_measure(rng: &mut ChaCha8Rng) -> Measure {
    let atoms: Vec<(f64, _)> =
        (0..rng.gen_range(1..=4)).map(|_| (rng.gen_range(-5.0..5.0), rational(rng.gen_range(1..=9), 10))).collect();
    let mut m = Measure::floats(&atoms).unwrap();
    for _ in 0..rng.gen_range(0..=2) {
        let l = rng.gen_range(-3.0..3.0);
        let p = Piece { l, u: l + rng.gen_range(0.1..2.0), level: rng.gen_range(0.1..1.0) };
        m = m.add(&Measure::density_only(Tier::Numeric, vec![p]).unwrap()).unwrap();
    }
    m
}

fn c5_bochner() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ts: Vec<f64> = (0..100).map(|k| -10.0 + 20.0 * k as f64 / 99.0).collect();
    let (mut e_scale, mut e_shift, mut e_imag) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..50 {
        let sigma = random_measure(&mut rng);
        let s = rng.gen_range(0.2..3.0) * if rng.gen_bool(0.5) { -1.0 } else { 1.0 };
        let r = rng.gen_range(-3.0..3.0);
        let scaled = scale_measure(&sigma, &Real::Numeric(NumericReal::from_f64(s, 128).unwrap())).unwrap();
        let shifted = translate_measure(&sigma, &Real::Numeric(NumericReal::from_f64(r, 128).unwrap())).unwrap();
        let sym = symmetrize(&sigma).unwrap();
        for &t in &ts {
            let b = bochner(&sigma, t).unwrap();
            e_scale = e_scale.max((bochner(&scaled, t).unwrap() - bochner(&sigma, s * t).unwrap()).norm());
            e_shift = e_shift.max((bochner(&shifted, t).unwrap() - unit(r * t) * b).norm());
            e_imag = e_imag.max(bochner(&sym, t).unwrap().im.abs());
        }
    }
    let max = e_scale.max(e_shift).max(e_imag);
    ensure(max <= 1e-12, format!("scale {e_scale:e}, translate {e_shift:e}, imag {e_imag:e}"))?;
    Ok(format!("50 measures x 100 t: scale {e_scale:.1e}, translate {e_shift:.1e}, imag {e_imag:.1e}"))
}

fn c6_self_similarity() -> Check {
    let tau = Real::parse("tau", Tier::Symbolic, 128).unwrap();
    let gm = GroupMeasure {
        generators: vec![tau.clone()],
        base: Measure::exact(&[("1", rational(1, 1))]).unwrap(),
        lambda: rational(1, 2),
        radius: 6,
    };
    let v = structural_self_similarity(&gm, &tau).unwrap();
    ensure(v == StructuralVerdict::MemberOfH { word: vec![1], sign: 1 }, format!("tau: {v:?}"))?;
    for s in [rational(2, 1), rational(3, 2)] {
        let v = structural_self_similarity(&gm, &Real::rational(s.clone())).unwrap();
        ensure(v == StructuralVerdict::CollisionCount { radius: 6, count: 0 }, format!("{s}: {v:?}"))?;
    }
    let sigma = realize(&gm).unwrap();
    let tau_value = num("ln(3)");
    let mut assignment = kronlab::numkit::Assignment::new();
    assignment.insert("tau".into(), tau_value.clone());
    let numeric = sigma.evaluate(&assignment).unwrap();
    let o = overlap_fraction(&numeric, tau_value.to_f64()).unwrap();
    ensure(o.fraction == rational(12, 13), format!("overlap {}", o.fraction))?;
    Ok(format!("tau member-of-H, collisions 0 for 2 and 3/2, overlap {}/{} = 12/13", o.overlapping, o.total))
}

fn c7_mkj() -> Check {
    let r = run_scenario(&ScenarioConfig::new("mkj-singularity", None)).map_err(|e| e.to_string())?;
    let mut singular = 0;
    let mut cases = 0;
    for a in r.assertions.iter().filter(|a| a.name.starts_with("singular")) {
        singular += a.detail["singular"].as_u64().unwrap();
        cases += a.detail["cases"].as_u64().unwrap();
    }
    ensure(r.pass && singular == 300 && cases == 300, format!("{singular}/{cases} singular"))?;
    let f = run_scenario(&ScenarioConfig::new("mkj-factor", None).with("s", "sqrt(2)")).map_err(|e| e.to_string())?;
    let acont: Vec<bool> = f.assertions.iter().filter(|a| a.operation.starts_with("abs_continuity")).map(|a| a.pass).collect();
    ensure(acont == [true, true], format!("mkj-factor: {acont:?}"))?;
    Ok(format!("{singular}/{cases} singular; mkj-factor containments {acont:?}"))
}

fn c8_gaussian_law() -> Check {
    let sigma = Measure::floats(&[(1.0, rational(1, 2)), (2f64.sqrt(), rational(1, 2))]).unwrap();
    let sample = simulate(&ProcessSpec::new(sigma, Grid { t0: 0.0, step: 0.1, count: 21 }, 10_000, 11)).unwrap();
    let lags: Vec<f64> = (1..=20).map(|k| k as f64 * 0.1).collect();
    let cov = empirical_autocovariance(&sample, &lags).unwrap();
    for (i, &t) in lags.iter().enumerate() {
        let closed = (2.0 * std::f64::consts::PI * t).cos() + (2.0 * std::f64::consts::PI * 2f64.sqrt() * t).cos();
        ensure((cov.theoretical[i] - closed).abs() < 1e-12, format!("lag {t}: law column"))?;
    }
    let inside = cov.within(3.0).iter().filter(|&&b| b).count();
    ensure(inside == 20, format!("{inside}/20 lags within 3 stderr"))?;
    let g = gaussianity_test(&sample, 0.01).unwrap();
    ensure(g.pass, "omnibus test rejected")?;
    let base = Measure::floats(&[(1.0, rational(1, 2)), (2f64.sqrt(), rational(1, 2))]).unwrap();
    let grid = Grid { t0: 0.0, step: 1.0 / 16.0, count: 512 };
    let df = 1.0 / grid.span();
    let raw = simulate(&ProcessSpec::new(base, grid, 20, 3)).unwrap();
    let mut found = Vec::new();
    for s in [0.5, 2.0] {
        let rs = rescale_paths(&raw, s).unwrap();
        let freqs: Vec<f64> = (1..=200).map(|k| k as f64 * df).collect();
        let mut peaks = strongest_peaks(&spectral_estimate(&rs, &freqs).unwrap(), 2);
        peaks.sort_by(f64::total_cmp);
        let expect = [s, s * 2f64.sqrt()];
        for (p, e) in peaks.iter().zip(expect) {
            ensure((p - e).abs() <= df, format!("s={s}: peak {p} vs {e}"))?;
        }
        found.push(format!("s={s}: {peaks:?}"));
    }
    Ok(format!("20/20 lags within 3 stderr; omnibus pass; peaks {}", found.join(", ")))
}

fn c9_metric_coherence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let pool = [1.0, 2.0, 3.0, 2f64.sqrt(), 0.5, -1.5];
    let pick = |rng: &mut ChaCha8Rng| {
        let n = rng.gen_range(1..=3);
        let atoms: Vec<(f64, _)> = (0..n).map(|_| (pool[rng.gen_range(0..pool.len())], rational(rng.gen_range(1..=4), 4))).collect();
        let mut m = Measure::floats(&atoms).unwrap();
        if rng.gen_bool(0.3) {
            let l = rng.gen_range(-2.0..2.0);
            m = m.add(&Measure::density_only(Tier::Numeric, vec![Piece { l, u: l + 1.0, level: 0.5 }]).unwrap()).unwrap();
        }
        m
    };
    let cfg = MetricConfig::new(-10.0, 10.0);
    let mut worst_triangle = f64::NEG_INFINITY;
    for _ in 0..200 {
        let (a, b, c) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
        let d = |x: &Measure, y: &Measure| weak_distance(x, y, &cfg).unwrap();
        ensure(d(&a, &a) == 0.0, "d(a,a) != 0")?;
        ensure(d(&a, &b) == d(&b, &a), "asymmetric")?;
        worst_triangle = worst_triangle.max(d(&a, &c) - d(&a, &b) - d(&b, &c));
    }
    ensure(worst_triangle <= 1e-12, format!("triangle excess {worst_triangle:e}"))?;
    let mut singular_pairs = 0;
    for _ in 0..200 {
        let (a, b) = (pick(&mut rng), pick(&mut rng));
        if singularity_test(&a, &b).is_singular() {
            singular_pairs += 1;
            ensure(a.is_zero() || !abs_continuity_test(&a, &b), "singular yet absolutely continuous")?;
        }
    }
    let mut worst_power = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let (z1, z2) = (unit(rng.gen::<f64>()), unit(rng.gen::<f64>()));
        let n: i32 = rng.gen_range(-32..=32);
        let lhs = (powi(z1, n) - powi(z2, n)).norm();
        let rhs = n.unsigned_abs() as f64 * (z1 - z2).norm();
        worst_power = worst_power.max(lhs - rhs);
    }
    ensure(worst_power <= 1e-12, format!("power inequality excess {worst_power:e}"))?;
    Ok(format!(
        "200 triples (triangle excess {worst_triangle:.1e}); {singular_pairs}/200 singular pairs coherent; 1000 power samples (excess {worst_power:.1e})"
    ))
}

fn c10_weak_convergence() -> Check {
    let mu = Measure::density_only(Tier::Numeric, vec![Piece { l: 0.0, u: 1.0, level: 1.0 }]).unwrap();
    let ts: Vec<f64> = (1..=200).map(f64::from).collect();
    let r = weak_convergence_check(&mu, &[1.0], &[WeakTarget::Constant(Complex64::new(0.0, 0.0))], &ts, &[0.25, 0.5, 0.75], 0.01)
        .map_err(|e| e.to_string())?;
    let s = &r.series[0];
    let closed = 1.0 / std::f64::consts::PI;
    ensure(s.fitted_c >= closed / 2.0 && s.fitted_c <= 2.0 * closed, format!("fitted C {}", s.fitted_c))?;
    for (&t, &d) in ts.iter().zip(&s.defects).skip(100) {
        ensure(d <= s.fitted_c * 2.0 / t, format!("defect {d} at n={t}"))?;
    }
    let atomic = Measure::floats(&[(1.0, rational(1, 2)), (2f64.sqrt(), rational(1, 2))]).unwrap();
    let targets = [
        WeakTarget::Constant(Complex64::new(0.5, 0.0)),
        WeakTarget::Affine { c1: Complex64::new(0.3, 0.0), c2: Complex64::new(0.3, 0.0), u: 0.7 },
    ];
    let ts10: Vec<f64> = (1..=10).map(f64::from).collect();
    let w = weak_convergence_check(&atomic, &[1.0, 1.0], &targets, &ts10, &[0.0, 0.5], 0.01).map_err(|e| e.to_string())?;
    let mut bounds = Vec::new();
    for (series, g) in w.series.iter().zip(&targets) {
        match series.status {
            Convergence::CannotConverge { lower_bound } => {
                ensure(lower_bound >= 1.0 - g.modulus_bound(), format!("lower bound {lower_bound}"))?;
                bounds.push(lower_bound);
            }
            ref other => return Err(format!("{}: {other:?}", series.target)),
        }
    }
    Ok(format!("fitted C {:.4} vs 1/pi {:.4}; atomic obstruction lower bounds {bounds:.3?}", s.fitted_c, closed))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("kronecker approximation", c1_kronecker_approximation),
        ("dirichlet rigidity end-to-end", c2_rigidity),
        ("independence detection", c3_relations),
        ("finite kronecker set construction", c4_construction),
        ("bochner identities", c5_bochner),
        ("self-similarity bookkeeping", c6_self_similarity),
        ("singularity and common factor", c7_mkj),
        ("gaussian simulation law", c8_gaussian_law),
        ("metric and verdict coherence", c9_metric_coherence),
        ("weak-convergence checker", c10_weak_convergence),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({took:.2}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({took:.2}s): {why}", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
