//! Registered scenarios. Each builds a concrete instance, runs the relevant
//! operations on it and records one assertion per checked statement.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::io::write_file;
use super::{read_measure, CliError, Context};
use crate::gaussflow::{rigidity_check, simulate, Grid, ProcessSpec};
use crate::kronecker::{
    build_kronecker_points, rigidity_witness, verify_kronecker_property, BuildConfig, KroneckerSetSpec,
    SolveOptions,
};
use crate::numkit::rational::{parse_rational, rational};
use crate::numkit::{NumericReal, Rational, Real, Tier};
use crate::qindep::{check_q_independence, expand_group, Bounds, GroupSlice};
use crate::specmeasure::{
    abs_continuity_test, mix, realize, scale_measure, singularity_test, structural_self_similarity, translate_measure,
    GroupMeasure, Measure, Position, StructuralVerdict, EPS_POS,
};

pub const SCENARIOS: [&str; 5] = ["km10-demo", "mkj-singularity", "mkj-factor", "rigidity-e2e", "kronecker-verify"];

fn defaults(name: &str) -> Option<&'static [(&'static str, &'static str)]> {
    Some(match name {
        "km10-demo" => &[
            ("seed", "0"),
            ("tier", "symbolic"),
            ("radius", "auto"),
            ("targets", "3/10,3/5"),
            ("delta", "1/100"),
            ("lambda", "1/2"),
            ("max_coeff", "10000"),
            ("tau_value", "ln(3)"),
        ],
        "mkj-singularity" => &[
            ("seed", "0"),
            ("targets", "3/10,3/5,9/10,6/5"),
            ("delta", "1/100"),
            ("scales", "2,1/2,3/2"),
            ("shifts", "100"),
            ("shift_range", "1"),
            ("max_coeff", "10000"),
        ],
        "mkj-factor" => &[("seed", "0"), ("s", "sqrt(2)"), ("measure", ""), ("max_coeff", "10000")],
        "rigidity-e2e" => &[
            ("seed", "0"),
            ("measure", ""),
            ("eps", "0.1"),
            ("t_min", "1"),
            ("paths", "10000"),
            ("t0", "0"),
            ("step", "0.5"),
            ("count", "16"),
            ("tol", "0.01"),
        ],
        "kronecker-verify" => &[
            ("seed", "0"),
            ("targets", "3/10,3/5,9/10"),
            ("delta", "1/100"),
            ("trials", "20"),
            ("eps", "0.05"),
            ("t_min", "1"),
            ("max_coeff", "10000"),
        ],
        _ => return None,
    })
}

/// Parameters that name input files.
const FILE_PARAMS: [&str; 1] = ["measure"];

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    /// Overrides of the scenario defaults.
    pub parameters: BTreeMap<String, String>,
    /// Where the report and artifacts are written; nothing is written when absent.
    pub output_dir: Option<PathBuf>,
    pub timings: bool,
    pub jobs: usize,
    pub precision_bits: usize,
}

impl ScenarioConfig {
    pub fn new(name: &str, output_dir: Option<PathBuf>) -> Self {
        Self {
            name: name.to_string(),
            parameters: BTreeMap::new(),
            output_dir,
            timings: false,
            jobs: 1,
            precision_bits: crate::numkit::DEFAULT_PRECISION,
        }
    }

    pub fn with(mut self, key: &str, value: &str) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    /// Defaults merged with the overrides, after checking names and files.
    pub fn effective(&self) -> Result<BTreeMap<String, String>, CliError> {
        let defs = defaults(&self.name).ok_or_else(|| CliError::UnknownScenario(self.name.clone()))?;
        let mut out: BTreeMap<String, String> = defs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        for (k, v) in &self.parameters {
            if !out.contains_key(k) {
                let known: Vec<&str> = defs.iter().map(|(k, _)| *k).collect();
                return Err(CliError::Usage(format!(
                    "unknown parameter `{k}` for {} (known: {})",
                    self.name,
                    known.join(", ")
                )));
            }
            if FILE_PARAMS.contains(&k.as_str()) && !v.is_empty() && !Path::new(v).exists() {
                return Err(CliError::Io { path: v.clone(), message: "referenced file does not exist".into() });
            }
            out.insert(k.clone(), v.clone());
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub operation: String,
    pub tolerance: String,
    /// The input the statement was checked on.
    pub instance: String,
    pub pass: bool,
    pub detail: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub name: String,
    pub version: String,
    pub config_hash: String,
    pub parameters: BTreeMap<String, String>,
    pub tolerances: BTreeMap<String, f64>,
    pub instance: Value,
    pub assertions: Vec<Assertion>,
    pub artifacts: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<BTreeMap<String, f64>>,
    pub pass: bool,
}

struct Params {
    map: BTreeMap<String, String>,
    prec: usize,
}

impl Params {
    fn get(&self, k: &str) -> &str {
        self.map.get(k).map(String::as_str).expect("parameter has a default")
    }

    fn bad(&self, k: &str, what: &str) -> CliError {
        CliError::Usage(format!("parameter {k}={}: expected {what}", self.get(k)))
    }

    fn f64(&self, k: &str) -> Result<f64, CliError> {
        self.get(k).parse().map_err(|_| self.bad(k, "a number"))
    }

    fn u64(&self, k: &str) -> Result<u64, CliError> {
        self.get(k).parse().map_err(|_| self.bad(k, "a non-negative integer"))
    }

    fn usize(&self, k: &str) -> Result<usize, CliError> {
        self.get(k).parse().map_err(|_| self.bad(k, "a non-negative integer"))
    }

    fn rational(&self, k: &str) -> Result<Rational, CliError> {
        parse_rational(self.get(k)).map_err(|_| self.bad(k, "a rational"))
    }

    fn rationals(&self, k: &str) -> Result<Vec<Rational>, CliError> {
        self.get(k).split(',').map(|t| parse_rational(t).map_err(|_| self.bad(k, "comma-separated rationals"))).collect()
    }

    fn numeric(&self, k: &str) -> Result<Real, CliError> {
        Real::parse(self.get(k), Tier::Numeric, self.prec).context(format!("parameter {k}"))
    }

    fn bounds(&self) -> Result<Bounds, CliError> {
        Ok(Bounds { max_coeff: self.u64("max_coeff")?, precision_bits: self.prec })
    }

    /// The measure in the file named by `measure`, or `fallback`.
    fn measure_or(&self, fallback: Measure) -> Result<Measure, CliError> {
        match self.get("measure") {
            "" => Ok(fallback),
            path => Ok(read_measure(Path::new(path), None, Tier::Numeric, false)?.0),
        }
    }
}

struct Stopwatch {
    enabled: bool,
    last: Instant,
    laps: BTreeMap<String, f64>,
}

impl Stopwatch {
    fn new(enabled: bool) -> Self {
        Self { enabled, last: Instant::now(), laps: BTreeMap::new() }
    }

    fn lap(&mut self, name: &str) {
        if self.enabled {
            let now = Instant::now();
            self.laps.insert(name.to_string(), (now - self.last).as_secs_f64());
            self.last = now;
        }
    }
}

#[derive(Default)]
struct Outcome {
    instance: Value,
    assertions: Vec<Assertion>,
    tolerances: BTreeMap<String, f64>,
    artifacts: Vec<(String, Vec<u8>)>,
}

impl Outcome {
    fn check(&mut self, name: &str, operation: &str, tolerance: &str, instance: &str, pass: bool, detail: Value) {
        self.assertions.push(Assertion {
            name: name.into(),
            operation: operation.into(),
            tolerance: tolerance.into(),
            instance: instance.into(),
            pass,
            detail,
        });
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioReport, CliError> {
    let parameters = cfg.effective()?;
    let canonical = json!({ "name": cfg.name, "parameters": parameters, "precision_bits": cfg.precision_bits });
    let config_hash = hex(&Sha256::digest(canonical.to_string().as_bytes()));
    let p = Params { map: parameters.clone(), prec: cfg.precision_bits };
    let seed = p.u64("seed")?;
    let mut clock = Stopwatch::new(cfg.timings);
    let outcome = match cfg.name.as_str() {
        "km10-demo" => km10_demo(&p, seed, &mut clock),
        "mkj-singularity" => mkj_singularity(&p, seed, cfg.jobs, &mut clock),
        "mkj-factor" => mkj_factor(&p, &mut clock),
        "rigidity-e2e" => rigidity_e2e(&p, seed, &mut clock),
        "kronecker-verify" => kronecker_verify(&p, seed, &mut clock),
        other => Err(CliError::UnknownScenario(other.to_string())),
    }
    .context(format!("scenario {}", cfg.name))?;
    let pass = outcome.assertions.iter().all(|a| a.pass);
    let mut report = ScenarioReport {
        name: cfg.name.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash,
        parameters,
        tolerances: outcome.tolerances,
        instance: outcome.instance,
        assertions: outcome.assertions,
        artifacts: Vec::new(),
        timings: cfg.timings.then_some(clock.laps),
        pass,
    };
    if let Some(dir) = &cfg.output_dir {
        for (file, bytes) in &outcome.artifacts {
            let path = dir.join(file);
            write_file(&path, bytes)?;
            report.artifacts.push(path.display().to_string());
        }
        let path = dir.join("report.json");
        report.artifacts.push(path.display().to_string());
        let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
        text.push('\n');
        write_file(&path, text.as_bytes())?;
    }
    Ok(report)
}

fn json_bytes(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s.into_bytes()
}

fn uniform_atoms(points: &[Real], tier: Tier) -> Result<Measure, CliError> {
    let w = Rational::new(1.into(), (points.len() as i64).into());
    let atoms = points.iter().map(|x| Ok((Position::from_real(x, tier)?, w.clone()))).collect::<Result<Vec<_>, CliError>>()?;
    Ok(Measure::atomic(tier, atoms)?)
}

fn build_numeric(p: &Params, seed: u64) -> Result<KroneckerSetSpec, CliError> {
    let cfg = BuildConfig { bounds: p.bounds()?, seed, ..Default::default() };
    build_kronecker_points(&p.rationals("targets")?, &p.rational("delta")?, &GroupSlice::trivial(Tier::Numeric), &cfg)
        .context("building a rationally independent set")
}

fn canon(xs: &[Real]) -> Vec<String> {
    xs.iter().map(Real::canonical).collect()
}

fn bounds_text(b: &Bounds) -> String {
    format!("no integer relation with |k_i| <= {} at {} bits", b.max_coeff, b.precision_bits)
}

fn km10_demo(p: &Params, seed: u64, clock: &mut Stopwatch) -> Result<Outcome, CliError> {
    let mut o = Outcome::default();
    let tier: Tier = p.get("tier").parse().map_err(|_| p.bad("tier", "symbolic or numeric"))?;
    let radius: u32 = match (p.get("radius"), tier) {
        ("auto", Tier::Symbolic) => 3,
        ("auto", Tier::Numeric) => 1,
        (r, _) => r.parse().map_err(|_| p.bad("radius", "a non-negative integer or auto"))?,
    };
    let (h_text, h) = match tier {
        Tier::Symbolic => ("tau", Real::parse("tau", Tier::Symbolic, p.prec)?),
        Tier::Numeric => ("pi", Real::parse("pi", Tier::Numeric, p.prec)?),
    };
    let bounds = p.bounds()?;
    let slice = expand_group(std::slice::from_ref(&h), radius).context("expanding the group")?;
    let cfg = BuildConfig { bounds, seed, ..Default::default() };
    let spec = build_kronecker_points(&p.rationals("targets")?, &p.rational("delta")?, &slice, &cfg)
        .context("building the points")?;
    clock.lap("build");
    let group = format!("<{h_text}> radius {radius}");
    let verdict = check_q_independence(&spec.realized, bounds).context("checking the realized set")?;
    let tol = match tier {
        Tier::Symbolic => "exact".to_string(),
        Tier::Numeric => bounds_text(&bounds),
    };
    o.check(
        "realized-set-independent",
        "check_q_independence",
        &tol,
        &format!("{} dilates of {:?} over {group}", spec.realized.len(), canon(&spec.points)),
        verdict.is_independent(),
        json!(verdict),
    );
    let gm = GroupMeasure {
        generators: vec![h.clone()],
        base: uniform_atoms(&spec.points, tier)?,
        lambda: p.rational("lambda")?,
        radius,
    };
    let sigma = realize(&gm).context("realizing the group measure")?;
    o.check(
        "group-measure-realized",
        "realize",
        &format!("positions distinct beyond {EPS_POS:e}"),
        &group,
        sigma.atoms().len() == spec.realized.len(),
        json!({ "atoms": sigma.atoms().len(), "expected": spec.realized.len() }),
    );
    clock.lap("realize");

    let mut words: Vec<(String, Real, Vec<i32>, i8)> = Vec::new();
    for k in 1..=radius.min(2) as i32 {
        words.push((format!("{h_text}^{k}"), h.powi(k)?, vec![k], 1));
    }
    let minus = Real::parse(&format!("-{h_text}"), tier, p.prec)?;
    words.push((format!("-{h_text}"), minus, vec![1], -1));
    for (label, s, word, sign) in words {
        let v = structural_self_similarity(&gm, &s).context(format!("scale {label}"))?;
        let pass = v == StructuralVerdict::MemberOfH { word, sign };
        o.check(&format!("member-of-H {label}"), "structural_self_similarity", "exact", &group, pass, json!(v));
    }

    let exact_samples = [("2", rational(2, 1)), ("3/2", rational(3, 2))];
    for (label, r) in exact_samples {
        let s = match tier {
            Tier::Symbolic => Real::rational(r),
            Tier::Numeric => Real::parse(label, Tier::Numeric, p.prec)?,
        };
        let v = structural_self_similarity(&gm, &s).context(format!("scale {label}"))?;
        let pass = matches!(v, StructuralVerdict::CollisionCount { count: 0, .. });
        let tol = if tier == Tier::Symbolic { "exact".to_string() } else { format!("{EPS_POS:e}") };
        o.check(&format!("collision-count {label}"), "structural_self_similarity", &tol, &group, pass, json!(v));
    }
    // e has no symbolic form, so the symbolic measure is evaluated first.
    let e = Real::parse("e", Tier::Numeric, p.prec)?;
    let (numeric_gm, note) = match tier {
        Tier::Numeric => (gm.clone(), group.clone()),
        Tier::Symbolic => {
            let mut assignment = spec.fresh_assignment(seed, p.prec)?;
            let tau = crate::numkit::expr::eval_expr(p.get("tau_value"), p.prec).context("parameter tau_value")?;
            assignment.insert("tau".into(), tau);
            let atoms = gm
                .base
                .atoms()
                .iter()
                .map(|a| Ok((Position::Float(a.pos.evaluate(&assignment)?), a.w.clone())))
                .collect::<Result<Vec<_>, CliError>>()?;
            let lifted = GroupMeasure {
                generators: vec![Real::Numeric(h.evaluate(&assignment)?)],
                base: Measure::atomic(Tier::Numeric, atoms)?,
                lambda: gm.lambda.clone(),
                radius,
            };
            (lifted, format!("{group} evaluated at tau={} with seeded fresh symbols", p.get("tau_value")))
        }
    };
    let v = structural_self_similarity(&numeric_gm, &e).context("scale e")?;
    let pass = matches!(v, StructuralVerdict::CollisionCount { count: 0, .. });
    o.check("collision-count e", "structural_self_similarity", &format!("{EPS_POS:e}"), &note, pass, json!(v));
    clock.lap("self-similarity");

    o.tolerances.insert("eps_pos".into(), EPS_POS);
    o.instance = json!({ "set": spec.to_json(), "measure": sigma.to_json() });
    o.artifacts.push(("kronecker_set.json".into(), json_bytes(&spec.to_json())));
    o.artifacts.push(("group_measure.json".into(), json_bytes(&json!(sigma.to_json()))));
    Ok(o)
}

fn mkj_singularity(p: &Params, seed: u64, jobs: usize, clock: &mut Stopwatch) -> Result<Outcome, CliError> {
    let mut o = Outcome::default();
    let spec = build_numeric(p, seed)?;
    let sigma = uniform_atoms(&spec.points, Tier::Numeric)?;
    let bounds = p.bounds()?;
    let verdict = check_q_independence(&spec.points, bounds)?;
    let points = canon(&spec.points);
    o.check(
        "support-independent",
        "check_q_independence",
        &bounds_text(&bounds),
        &format!("{points:?}"),
        verdict.is_independent(),
        json!(verdict),
    );
    clock.lap("build");
    let shifts = p.usize("shifts")?;
    let range = p.f64("shift_range")?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x5eed_5eed);
    let rs: Vec<f64> = (0..shifts).map(|_| rng.gen_range(-range..range)).collect();
    for s_text in p.get("scales").split(',') {
        let s = Real::parse(s_text, Tier::Numeric, p.prec).context(format!("scale {s_text}"))?;
        let scaled = scale_measure(&sigma, &s)?;
        let case = |r: &f64| -> Result<(f64, bool), CliError> {
            let shifted = translate_measure(&scaled, &Real::Numeric(NumericReal::from_f64(*r, p.prec)?))?;
            Ok((*r, singularity_test(&sigma, &shifted).is_singular()))
        };
        let results: Vec<(f64, bool)> = if jobs > 1 {
            rs.par_iter().map(case).collect::<Result<_, _>>()?
        } else {
            rs.iter().map(case).collect::<Result<_, _>>()?
        };
        let failures: Vec<f64> = results.iter().filter(|(_, ok)| !ok).map(|(r, _)| *r).collect();
        o.check(
            &format!("singular s={s_text}"),
            "singularity_test(sigma, translate(scale(sigma, s), r))",
            &format!("positions apart by more than {EPS_POS:e}"),
            &format!("uniform atoms on {points:?}, {shifts} seeded r in [-{range}, {range})"),
            failures.is_empty(),
            json!({ "cases": results.len(), "singular": results.len() - failures.len(), "failures": failures }),
        );
    }
    clock.lap("singularity");
    o.tolerances.insert("eps_pos".into(), EPS_POS);
    o.instance = json!({ "set": spec.to_json(), "measure": sigma.to_json(), "shifts": rs });
    o.artifacts.push(("measure.json".into(), json_bytes(&json!(sigma.to_json()))));
    Ok(o)
}

fn mkj_factor(p: &Params, clock: &mut Stopwatch) -> Result<Outcome, CliError> {
    let mut o = Outcome::default();
    let s = p.numeric("s")?;
    let sigma = p.measure_or(Measure::floats(&[(1.0, rational(1, 1))])?)?;
    let sigma_s = scale_measure(&sigma, &s)?;
    let half = rational(1, 2);
    let eta = mix(&[sigma.clone(), sigma_s.clone()], &[half.clone(), half])?;
    let eta_s = scale_measure(&eta, &s)?;
    let instance = format!("s={}, sigma={}", p.get("s"), sigma.to_json_string());
    let support: Vec<Real> = sigma
        .atoms()
        .iter()
        .map(|a| Real::parse(&a.pos.canonical(), Tier::Numeric, p.prec))
        .collect::<Result<_, _>>()?;
    let mut both = support.clone();
    for x in &support {
        both.push(x.mul(&s)?);
    }
    let bounds = p.bounds()?;
    let verdict = check_q_independence(&both, bounds)?;
    o.check(
        "eta-support-independent",
        "check_q_independence",
        &bounds_text(&bounds),
        &instance,
        verdict.is_independent(),
        json!(verdict),
    );
    let tol = format!("atoms matched within {EPS_POS:e}");
    let a1 = abs_continuity_test(&sigma_s, &eta);
    o.check("sigma_s << eta", "abs_continuity_test(sigma_s, eta)", &tol, &instance, a1, json!({ "eta": eta.to_json() }));
    let a2 = abs_continuity_test(&sigma_s, &eta_s);
    o.check(
        "sigma_s << eta_s",
        "abs_continuity_test(sigma_s, scale(eta, s))",
        &tol,
        &instance,
        a2,
        json!({ "eta_s": eta_s.to_json() }),
    );
    clock.lap("containment");
    o.tolerances.insert("eps_pos".into(), EPS_POS);
    o.instance = json!({ "sigma": sigma.to_json(), "sigma_s": sigma_s.to_json(), "eta": eta.to_json() });
    o.artifacts.push(("eta.json".into(), json_bytes(&json!(eta.to_json()))));
    Ok(o)
}

fn rigidity_e2e(p: &Params, seed: u64, clock: &mut Stopwatch) -> Result<Outcome, CliError> {
    let mut o = Outcome::default();
    let r2 = std::f64::consts::SQRT_2;
    let sigma = p.measure_or(Measure::floats(&[(1.0, rational(1, 2)), (r2, rational(1, 2))])?)?;
    let eps = p.f64("eps")?;
    let tol = p.f64("tol")?;
    let instance = format!("sigma={}", sigma.to_json_string());
    let approx = rigidity_witness(&sigma, eps, p.f64("t_min")?, &SolveOptions::default()).context("Dirichlet witness")?;
    clock.lap("witness");
    let found = approx.is_found();
    let w = approx.witness().clone();
    o.check("witness", "rigidity_witness", &format!("max residual < {eps}"), &instance, found, json!(approx));
    o.tolerances.insert("eps".into(), eps);
    o.tolerances.insert("tol".into(), tol);
    o.tolerances.insert("stderr_multiple".into(), 3.0);
    if !found {
        o.instance = json!({ "sigma": sigma.to_json() });
        return Ok(o);
    }
    let grid = Grid { t0: p.f64("t0")?, step: p.f64("step")?, count: p.usize("count")? };
    let paths = p.usize("paths")?;
    let spec = ProcessSpec::new(sigma.clone(), grid, paths, seed);
    let sample = simulate(&spec).context("simulating paths")?;
    clock.lap("simulate");
    let r = rigidity_check(&sample, w.t, tol)?;
    clock.lap("rigidity");
    let at = format!("{instance}, t={}, {paths} paths, {} grid times", w.t, grid.count);
    let detail = json!(r);
    o.check(
        "theoretical-below-tol",
        "2 (C(0) - C(t)) < tol * Var",
        &format!("{tol}"),
        &at,
        r.theoretical < tol * r.variance,
        detail.clone(),
    );
    o.check(
        "empirical-below-tol",
        "mean |X_{u+t} - X_u|^2 < tol * Var",
        &format!("{tol}"),
        &at,
        r.empirical < tol * r.variance,
        detail.clone(),
    );
    o.check("empirical-agrees", "|empirical - theoretical| <= 3 stderr", "3 stderr", &at, r.agrees, detail);
    o.instance = json!({ "sigma": sigma.to_json(), "t": w.t, "grid": grid, "paths": paths });
    Ok(o)
}

fn kronecker_verify(p: &Params, seed: u64, clock: &mut Stopwatch) -> Result<Outcome, CliError> {
    let mut o = Outcome::default();
    let spec = build_numeric(p, seed)?;
    let sigma = uniform_atoms(&spec.points, Tier::Numeric)?;
    clock.lap("build");
    let eps = p.f64("eps")?;
    let trials = p.usize("trials")?;
    let r = verify_kronecker_property(&sigma, trials, eps, p.f64("t_min")?, &SolveOptions::default(), seed)
        .context("random-phase trials")?;
    clock.lap("verify");
    o.check(
        "all-trials-solved",
        "verify_kronecker_property",
        &format!("max residual < {eps}"),
        &format!("uniform atoms on {:?}, {trials} seeded phase vectors", canon(&spec.points)),
        r.successes == r.trials,
        json!(r),
    );
    o.tolerances.insert("eps".into(), eps);
    o.instance = json!({ "set": spec.to_json(), "measure": sigma.to_json() });
    Ok(o)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_names_are_rejected() {
        assert!(matches!(run_scenario(&ScenarioConfig::new("nope", None)), Err(CliError::UnknownScenario(_))));
        let cfg = ScenarioConfig::new("mkj-factor", None).with("bogus", "1");
        assert!(matches!(run_scenario(&cfg), Err(CliError::Usage(_))));
        let cfg = ScenarioConfig::new("mkj-factor", None).with("measure", "/no/such/file.json");
        assert!(matches!(run_scenario(&cfg), Err(CliError::Io { .. })));
    }

    #[test]
    fn mkj_factor_holds_for_sqrt2() {
        let r = run_scenario(&ScenarioConfig::new("mkj-factor", None)).unwrap();
        assert!(r.pass, "{r:#?}");
        let eta = &r.instance["eta"]["atoms"];
        assert_eq!(eta[0]["pos"], "1");
        assert_eq!(eta[0]["w"], "1/2");
        assert_eq!(eta[1]["pos"], format!("{}", std::f64::consts::SQRT_2));
        assert_eq!(eta[1]["w"], "1/2");
    }

    #[test]
    fn km10_symbolic_radius_three() {
        let r = run_scenario(&ScenarioConfig::new("km10-demo", None)).unwrap();
        assert!(r.pass, "{r:#?}");
        let names: Vec<&str> = r.assertions.iter().map(|a| a.name.as_str()).collect();
        for n in ["member-of-H tau^1", "member-of-H tau^2", "member-of-H -tau", "collision-count 2", "collision-count 3/2", "collision-count e"] {
            assert!(names.contains(&n), "{names:?}");
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let cfg = ScenarioConfig::new("km10-demo", None).with("tier", "numeric").with("seed", "3");
        let a = run_scenario(&cfg).unwrap();
        let b = run_scenario(&cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert!(a.pass, "{a:#?}");
        assert!(a.timings.is_none());
    }
}
