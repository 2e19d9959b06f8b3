//! The four commands: stabilizer certificates (`find-g`), star multiplication
//! tables with the theta-constant oracle column (`table`), classical theta
//! evaluation (`theta-eval`), and the verification suites (`verify`).
//!
//! Every command returns a JSON report plus an exit code; the caller renders
//! the report byte-stably. Verification suites degrade per item: a radius
//! budget overrun marks the item "untestable at this scale" and the run exits
//! 3, never reporting an unchecked invariant as passing.

use crate::config::{
    first_violated, parse_complex, parse_rational, resolve_g, CliError, Result, RunConfig,
};
use num_bigint::BigInt;
use num_complex::Complex64;
use qtheta::bimodule::{
    apply_generator_power, embed_holomorphic, holo_inner, make_geometry, rieffel_inner, star,
    star_periodicity_residual, verify_imprimitivity, verify_tensor_compatibility, BimoduleError,
    GaussianVector, GeneratorAction, HolomorphicVector, ModuleGeometry, Side,
};
use qtheta::nctorus::{phase_half_theta, phase_theta, te_adjoint, te_mul, TorusElement};
use qtheta::qarith::{
    find_generating_g, mobius_apply, power_entries, IntMatrix2, QarithError, QuadraticIrrational,
};
use qtheta::rings::{
    dimension_check_r, generation_check, polishchuk_predicate, quadraticity_check,
    quantum_theta_suite, CheckReport, RingKind, RingsError,
};
use qtheta::theta::{classical_theta, ThetaCharacteristic};
use serde_json::{json, Map, Value};

/// A command's JSON report and the exit code it earned.
#[derive(Debug)]
pub struct Report {
    pub value: Value,
    pub exit: i32,
}

/// Which verification suite to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Arith,
    Torus,
    Bimodule,
    Rings,
    All,
}

impl Suite {
    fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }

    fn name(self) -> &'static str {
        match self {
            Suite::Arith => "arith",
            Suite::Torus => "torus",
            Suite::Bimodule => "bimodule",
            Suite::Rings => "rings",
            Suite::All => "all",
        }
    }
}

const UNTESTABLE: &str = "untestable at this scale";

const TOL_TORUS_ALGEBRA: f64 = 1e-12;
const TOL_STAR_ASSOC: f64 = 1e-9;
const TOL_HOLO_RIEFFEL: f64 = 1e-9;
const TOL_STAR_PERIODIC: f64 = 1e-10;
const TOL_THETA_CONST: f64 = 1e-10;
const TOL_IMPRIMITIVITY: f64 = 1e-8;
const TOL_TENSOR: f64 = 1e-7;
const TOL_FIXEDNESS: f64 = 1e-9;

/// The S_θ membership certificate plus the three Polishchuk bound levels.
fn certificate(g: &IntMatrix2, config: &RunConfig) -> Value {
    let fixes = mobius_apply(g, &config.theta).map(|y| y == config.theta).unwrap_or(false);
    json!({
        "S_theta_proof": {
            "c": g.c.to_string(),
            "det": g.det().to_string(),
            "fixes_theta": fixes,
            "trace": g.trace().to_string(),
        },
        "g": matrix_json(g),
        "polishchuk": {
            "e0": polishchuk_predicate(g, 0),
            "e1": polishchuk_predicate(g, 1),
            "e2": polishchuk_predicate(g, 2),
        },
        "theta": config.theta.to_string(),
    })
}

fn matrix_json(g: &IntMatrix2) -> Value {
    json!([g.a.to_string(), g.b.to_string(), g.c.to_string(), g.d.to_string()])
}

fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn complex_list(zs: &[Complex64]) -> Value {
    Value::Array(zs.iter().map(|&z| complex_json(z)).collect())
}

/// Validates the supplied matrix or searches for one with c ≥ a + d + ε,
/// emitting the condition certificate either way. A failed search or a
/// violated condition is a structured exit-1 report, not a bare error.
pub fn find_g(config: &RunConfig) -> Result<Report> {
    if let Some(g) = &config.g {
        return Ok(match first_violated(g, &config.theta) {
            Some(cond) => Report {
                value: json!({
                    "certificate": certificate(g, config),
                    "error": format!("supplied g is not in S_theta: {cond} fails"),
                    "first_violated": cond,
                }),
                exit: 1,
            },
            None => Report { value: certificate(g, config), exit: 0 },
        });
    }
    match find_generating_g(&config.theta, config.epsilon_level) {
        Ok(g) => Ok(Report { value: certificate(&g, config), exit: 0 }),
        Err(e @ QarithError::NoGeneratorExists { .. }) => Ok(Report {
            value: json!({
                "criterion": "|theta - theta'| >= 1",
                "error": e.to_string(),
                "theta": config.theta.to_string(),
            }),
            exit: 1,
        }),
        Err(e) => Err(CliError::Config(e.to_string())),
    }
}

fn geometry(g: &IntMatrix2, config: &RunConfig, n: u32) -> Result<ModuleGeometry> {
    make_geometry(g, &config.theta, config.tau, n).map_err(|e| CliError::Config(e.to_string()))
}

fn ones(geom: &ModuleGeometry) -> HolomorphicVector {
    HolomorphicVector::new(geom.clone(), vec![Complex64::new(1.0, 0.0); geom.c_n() as usize])
        .expect("length matches the component count")
}

fn budget_or_config(e: BimoduleError) -> CliError {
    match e {
        BimoduleError::RadiusBudgetExceeded { .. } => CliError::Budget(e.to_string()),
        other => CliError::Config(other.to_string()),
    }
}

/// Emits the star structure constants A_{ik,p} at grades (n, m) together with
/// the 1⋆1 column next to its classical-theta oracle values.
pub fn table(config: &RunConfig, n: u32, m: u32) -> Result<Report> {
    if n == 0 || m == 0 {
        return Err(CliError::Config("table grades n and m must be at least 1".into()));
    }
    if n + m > config.max_grade {
        return Err(CliError::Config(format!(
            "table at grades ({n}, {m}) needs max_grade >= {}, got {}",
            n + m,
            config.max_grade
        )));
    }
    let g = resolve_g(config)?;
    let opts = config.series_options();
    let geom_n = geometry(&g, config, n)?;
    let geom_m = geometry(&g, config, m)?;
    let geom_k = geometry(&g, config, n + m)?;
    let (cn, cm, ck) = (geom_n.c_n(), geom_m.c_n(), geom_k.c_n());

    let mut entries = Vec::with_capacity((cn * cm) as usize);
    for i in 0..cn {
        let di = HolomorphicVector::delta(geom_n.clone(), i);
        for k in 0..cm {
            let dk = HolomorphicVector::delta(geom_m.clone(), k);
            let prod = star(&di, &dk, &opts).map_err(budget_or_config)?;
            entries.push(json!({"coeffs": complex_list(prod.f()), "i": i, "k": k}));
        }
    }

    let prod = star(&ones(&geom_n), &ones(&geom_m), &opts).map_err(budget_or_config)?;
    let tau_s = config.tau * (ck as f64 / (cn * cm) as f64);
    let mut column = Vec::with_capacity(ck as usize);
    let mut worst: f64 = 0.0;
    for alpha in 0..ck {
        let ch = ThetaCharacteristic::new(cm * geom_k.d_n() * alpha, ck, 0, 1)
            .map_err(|e| CliError::Config(e.to_string()))?;
        let oracle = classical_theta(&ch, Complex64::new(0.0, 0.0), tau_s, 1e-14)
            .map_err(|e| CliError::Config(e.to_string()))?;
        let computed = prod.f()[alpha as usize];
        let diff = (computed - oracle).norm();
        worst = worst.max(diff);
        column.push(json!({
            "abs_diff": diff,
            "alpha": alpha,
            "computed": complex_json(computed),
            "oracle": complex_json(oracle),
        }));
    }

    Ok(Report {
        value: json!({
            "c_m": cm,
            "c_n": cn,
            "c_nm": ck,
            "g": matrix_json(&g),
            "grade_m": m,
            "grade_n": n,
            "max_theta_diff": worst,
            "structure_constants": entries,
            "tau": complex_json(config.tau),
            "theta": config.theta.to_string(),
            "theta_constants": column,
        }),
        exit: 0,
    })
}

/// Arguments of `theta-eval`, parsed from their flag syntax.
pub struct ThetaEvalArgs {
    pub alpha: String,
    pub beta: String,
    pub z: String,
    pub tau_s: String,
    pub tol: f64,
}

/// Evaluates θ[α;β](z, τs) by truncated summation.
pub fn theta_eval(args: &ThetaEvalArgs) -> Result<Report> {
    let (an, ad) = parse_rational(&args.alpha)?;
    let (bn, bd) = parse_rational(&args.beta)?;
    let z = parse_complex(&args.z)?;
    let tau_s = parse_complex(&args.tau_s)?;
    if !(args.tol > 0.0) || !args.tol.is_finite() {
        return Err(CliError::Config("tol must be a positive finite number".into()));
    }
    let ch =
        ThetaCharacteristic::new(an, ad, bn, bd).map_err(|e| CliError::Config(e.to_string()))?;
    let value =
        classical_theta(&ch, z, tau_s, args.tol).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(Report {
        value: json!({
            "alpha": [an, ad],
            "beta": [bn, bd],
            "tau_s": complex_json(tau_s),
            "tol": args.tol,
            "value": complex_json(value),
            "z": complex_json(z),
        }),
        exit: 0,
    })
}

/// One row of a verification report, with only the populated fields emitted.
#[derive(Clone)]
struct Row {
    map: Map<String, Value>,
}

impl Row {
    fn new(check: &str) -> Self {
        let mut map = Map::new();
        map.insert("check".into(), json!(check));
        Self { map }
    }

    fn grade(mut self, n: u32) -> Self {
        self.map.insert("grade".into(), json!(n));
        self
    }

    fn rank(mut self, rank: usize, expected: usize) -> Self {
        self.map.insert("rank".into(), json!(rank));
        self.map.insert("expected".into(), json!(expected));
        self
    }

    fn residual(mut self, r: f64) -> Self {
        self.map.insert("residual_max".into(), json!(r));
        self
    }

    fn pass(mut self, p: bool) -> Self {
        self.map.insert("pass".into(), json!(p));
        self
    }

    fn note(mut self, text: impl Into<String>) -> Self {
        self.map.insert("note".into(), json!(text.into()));
        self
    }

    fn into_value(self) -> Value {
        Value::Object(self.map)
    }
}

/// Collected check rows plus the flags that decide the final exit code.
#[derive(Default)]
struct Checks {
    rows: Vec<Value>,
    budget_hit: bool,
    uncertified: bool,
}

impl Checks {
    fn push(&mut self, row: Row) {
        self.rows.push(row.into_value());
    }

    /// Runs one check item; a budget overrun or an ill-conditioned rank
    /// becomes an annotated row instead of aborting the whole suite.
    fn item(
        &mut self,
        check: &'static str,
        grade: Option<u32>,
        f: impl FnOnce(Row) -> std::result::Result<Row, RingsError>,
    ) -> Result<()> {
        let base = match grade {
            Some(n) => Row::new(check).grade(n),
            None => Row::new(check),
        };
        match f(base.clone()) {
            Ok(row) => self.push(row),
            Err(RingsError::Bimodule(BimoduleError::RadiusBudgetExceeded { .. })) => {
                self.budget_hit = true;
                self.push(base.note(UNTESTABLE));
            }
            Err(RingsError::IllConditionedRank { ratio }) => {
                self.uncertified = true;
                self.push(base.note(format!(
                    "rank threshold falls inside a singular-value cluster (gap ratio {ratio:.2e})"
                )));
            }
            Err(e) => return Err(CliError::Config(e.to_string())),
        }
        Ok(())
    }

    fn push_report(&mut self, report: &CheckReport) -> Result<()> {
        if report.note.as_deref() == Some(UNTESTABLE) {
            self.budget_hit = true;
        }
        let value =
            serde_json::to_value(report).map_err(|e| CliError::Config(e.to_string()))?;
        self.rows.push(value);
        Ok(())
    }
}

/// Runs the named suites against the configured geometry; exit 0 iff every
/// checked invariant passes, 1 on failure, 3 when a budget overrun left any
/// item untested. The report is emitted in full either way.
pub fn verify(config: &RunConfig, suite: Suite) -> Result<Report> {
    let g = resolve_g(config)?;
    let mut checks = Checks::default();
    if suite.includes(Suite::Arith) {
        arith_suite(config, &g, &mut checks)?;
    }
    if suite.includes(Suite::Torus) {
        torus_suite(config, &mut checks)?;
    }
    if suite.includes(Suite::Bimodule) {
        bimodule_suite(config, &g, &mut checks)?;
    }
    if suite.includes(Suite::Rings) {
        rings_suite(config, &g, &mut checks)?;
    }
    let failed = checks
        .rows
        .iter()
        .filter(|row| row.get("pass").and_then(Value::as_bool) == Some(false))
        .count();
    let pass = failed == 0 && !checks.budget_hit && !checks.uncertified;
    let exit = if checks.budget_hit {
        3
    } else if pass {
        0
    } else {
        1
    };
    let mut config_echo = json!({
        "epsilon_level": config.epsilon_level,
        "g": matrix_json(&g),
        "max_grade": config.max_grade,
        "tau": complex_json(config.tau),
        "theta": config.theta.to_string(),
        "trunc_tol": config.trunc_tol,
    });
    if let Some(budget) = config.radius_budget {
        config_echo["radius_budget"] = json!(budget);
    }
    Ok(Report {
        value: json!({
            "checks": checks.rows,
            "config": config_echo,
            "failed": failed,
            "pass": pass,
            "suite": suite.name(),
        }),
        exit,
    })
}

/// Exact integer and rational identities of the stabilizer data.
fn arith_suite(config: &RunConfig, g: &IntMatrix2, checks: &mut Checks) -> Result<()> {
    let theta = &config.theta;
    let fixes = mobius_apply(g, theta).map(|y| y == *theta).unwrap_or(false);
    checks.push(Row::new("fixes_theta_exactly").pass(fixes));

    let entries = (1..=20)
        .map(|k| power_entries(g, theta, k))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let tr = g.trace();
    let recurrence_ok = (1..entries.len() - 1)
        .all(|k| entries[k + 1].c_n == &tr * &entries[k].c_n - &entries[k - 1].c_n);
    checks.push(Row::new("c_recurrence_exact").note("n <= 20").pass(recurrence_ok));

    let r2 = theta.r() * theta.r();
    let four_q2d = BigInt::from(4) * theta.q() * theta.q() * theta.d();
    let identity_ok = entries.iter().take(10).all(|e| {
        let lhs = (&e.a_n + &e.d_n).pow(2) * &r2;
        let rhs = &e.c_n * &e.c_n * &four_q2d + BigInt::from(4) * &r2;
        lhs == rhs
    });
    checks.push(Row::new("trace_identity_exact").note("n <= 10").pass(identity_ok));

    let one = QuadraticIrrational::rational(1, 1, theta.d().clone())
        .map_err(|e| CliError::Config(e.to_string()))?;
    let eps1 = &entries[0].eps_n;
    let unit_ok = eps1.mul(&eps1.galois_conjugate()).map(|p| p == one).unwrap_or(false);
    checks.push(Row::new("unit_has_norm_one").pass(unit_ok));

    checks.push(Row::new("polishchuk_levels").note(format!(
        "c >= a+d+eps: e0={}, e1={}, e2={}",
        polishchuk_predicate(g, 0),
        polishchuk_predicate(g, 1),
        polishchuk_predicate(g, 2)
    )));
    Ok(())
}

/// Algebra identities of finitely supported torus elements and the exact
/// phase reductions.
fn torus_suite(config: &RunConfig, checks: &mut Checks) -> Result<()> {
    let theta = &config.theta;
    let random_element = |seed: u64| -> TorusElement {
        let mut state = seed;
        let mut el = TorusElement::new(theta.clone(), config.trunc_tol)
            .expect("the tolerance was validated");
        el.insert_add((0, 0), Complex64::new(1.0, 0.5));
        for m1 in -2..=2 {
            for m2 in -2..=2 {
                if splitmix(&mut state) % 3 == 0 {
                    el.insert_add((m1, m2), splitmix_complex(&mut state));
                }
            }
        }
        el
    };
    let alg = |e: qtheta::nctorus::NcError| CliError::Config(e.to_string());

    let mut assoc: f64 = 0.0;
    let mut adjoint: f64 = 0.0;
    for seed in 0..5u64 {
        let a = random_element(3 * seed + 1);
        let b = random_element(3 * seed + 2);
        let c = random_element(3 * seed + 3);
        let lhs = te_mul(&te_mul(&a, &b).map_err(alg)?, &c).map_err(alg)?;
        let rhs = te_mul(&a, &te_mul(&b, &c).map_err(alg)?).map_err(alg)?;
        assoc = assoc.max(lhs.max_abs_diff(&rhs));
        let star_lhs = te_adjoint(&te_mul(&a, &b).map_err(alg)?);
        let star_rhs = te_mul(&te_adjoint(&b), &te_adjoint(&a)).map_err(alg)?;
        adjoint = adjoint.max(star_lhs.max_abs_diff(&star_rhs));
    }
    checks.push(Row::new("mul_associative").residual(assoc).pass(assoc < TOL_TORUS_ALGEBRA));
    checks
        .push(Row::new("adjoint_antihomomorphism").residual(adjoint).pass(adjoint < TOL_TORUS_ALGEBRA));

    let one = TorusElement::identity(theta.clone(), config.trunc_tol)
        .expect("the tolerance was validated");
    let a = random_element(99);
    let neutral = te_mul(&one, &a)
        .map_err(alg)?
        .max_abs_diff(&a)
        .max(te_mul(&a, &one).map_err(alg)?.max_abs_diff(&a));
    checks.push(Row::new("identity_neutral").residual(neutral).pass(neutral < 1e-15));

    let mut phase: f64 = 0.0;
    for &k in &[1i64, 12_345, 1_000_003, 1_000_000_007, -987_654_321] {
        let half = phase_half_theta(theta, k);
        let full = phase_theta(theta, k);
        phase = phase.max((half * half - full).norm()).max((full.norm() - 1.0).abs());
    }
    checks.push(Row::new("half_phase_squares_to_full").residual(phase).pass(phase < TOL_TORUS_ALGEBRA));
    Ok(())
}

/// Bimodule invariants at grade one: star associativity, the closed pairing
/// against the Rieffel series, the theta-constant oracle, periodicity,
/// imprimitivity, and tensor compatibility.
fn bimodule_suite(config: &RunConfig, g: &IntMatrix2, checks: &mut Checks) -> Result<()> {
    let opts = config.series_options();
    let geom = geometry(g, config, 1)?;
    let c = geom.c_n();

    checks.item("star_associative", Some(1), |row| {
        let mut worst: f64 = 0.0;
        for seed in 0..20u64 {
            let x = random_holo(&geom, seed);
            let y = random_holo(&geom, seed + 100);
            let z = random_holo(&geom, seed + 200);
            let lhs = star(&star(&x, &y, &opts)?, &z, &opts)?;
            let rhs = star(&x, &star(&y, &z, &opts)?, &opts)?;
            worst = worst.max(max_abs_vec_diff(lhs.f(), rhs.f()));
        }
        Ok(row.residual(worst).pass(worst < TOL_STAR_ASSOC))
    })?;

    checks.item("holo_matches_rieffel", Some(1), |row| {
        let mut worst: f64 = 0.0;
        for i in 0..c {
            for j in 0..c {
                let vi = HolomorphicVector::delta(geom.clone(), i);
                let wj = HolomorphicVector::delta(geom.clone(), j);
                let closed = holo_inner(&vi, &wj, &opts)?;
                let series = rieffel_inner(
                    &embed_holomorphic(&vi, opts.trunc_tol),
                    &embed_holomorphic(&wj, opts.trunc_tol),
                    &geom,
                    Side::Left,
                    &opts,
                )?;
                worst = worst.max(closed.max_abs_diff(&series));
            }
        }
        Ok(row.residual(worst).pass(worst < TOL_HOLO_RIEFFEL))
    })?;

    checks.item("star_periodic", Some(1), |row| {
        let residual =
            star_periodicity_residual(&random_holo(&geom, 5), &random_holo(&geom, 6), &opts)?;
        Ok(row.residual(residual).pass(residual < TOL_STAR_PERIODIC))
    })?;

    checks.item("theta_constants_match_oracle", Some(1), |row| {
        let prod = star(&ones(&geom), &ones(&geom), &opts)?;
        let target = prod.geom().clone();
        let tau_s = config.tau * (target.c_n() as f64 / (c * c) as f64);
        let mut worst: f64 = 0.0;
        for alpha in 0..target.c_n() {
            let ch = ThetaCharacteristic::new(c * target.d_n() * alpha, target.c_n(), 0, 1)
                .expect("denominators are nonzero");
            let oracle = classical_theta(&ch, Complex64::new(0.0, 0.0), tau_s, 1e-14)
                .expect("tau_s inherits Im tau > 0");
            worst = worst.max((prod.f()[alpha as usize] - oracle).norm());
        }
        Ok(row.residual(worst).pass(worst < TOL_THETA_CONST))
    })?;

    checks.item("imprimitivity", Some(1), |row| {
        let mut worst: f64 = 0.0;
        let mut all = true;
        for seed in 0..20u64 {
            let v = random_gaussian(&geom, 7 * seed + 1, opts.trunc_tol);
            let w = random_gaussian(&geom, 7 * seed + 2, opts.trunc_tol);
            let z = random_gaussian(&geom, 7 * seed + 3, opts.trunc_tol);
            let report = verify_imprimitivity(&v, &w, &z, &geom, &opts, TOL_IMPRIMITIVITY)?;
            worst = worst.max(report.max_abs_diff);
            all &= report.pass;
        }
        Ok(row.residual(worst).pass(all))
    })?;

    checks.item("tensor_compatibility", Some(1), |row| {
        let mut worst: f64 = 0.0;
        let mut all = true;
        for seed in 0..10u64 {
            let f1 = random_holo(&geom, 11 * seed + 1);
            let s1 = random_holo(&geom, 11 * seed + 2);
            let f2 = random_holo(&geom, 11 * seed + 3);
            let s2 = random_holo(&geom, 11 * seed + 4);
            let report = verify_tensor_compatibility(&f1, &s1, &f2, &s2, &opts, TOL_TENSOR)?;
            worst = worst.max(report.max_abs_diff);
            all &= report.pass;
        }
        Ok(row.residual(worst).pass(all))
    })?;
    Ok(())
}

/// Ring-level checks: dim Rₙ = cₙ², generation in degree one for E and R,
/// fixedness of the quantum theta functions, and (when three grades are
/// cached) the quadraticity verdict.
fn rings_suite(config: &RunConfig, g: &IntMatrix2, checks: &mut Checks) -> Result<()> {
    let ctx = config.ring_context(g, config.max_grade)?;
    let deep = config.max_grade.min(2);

    for n in 1..=deep {
        let expected = {
            let c = ctx.geometry(n).map_err(|e| CliError::Config(e.to_string()))?.c_n() as usize;
            c * c
        };
        checks.item("dimension_R", Some(n), |row| {
            let (rank, ok) = dimension_check_r(&ctx, n)?;
            Ok(row.rank(rank, expected).pass(ok))
        })?;
    }

    for kind in [RingKind::E, RingKind::R] {
        match generation_check(&ctx, kind, config.max_grade) {
            Ok(reports) => {
                for report in &reports {
                    checks.push_report(report)?;
                }
            }
            Err(RingsError::Bimodule(BimoduleError::RadiusBudgetExceeded { .. })) => {
                checks.budget_hit = true;
                let name = if kind == RingKind::E { "generation_E" } else { "generation_R" };
                checks.push(Row::new(name).note(UNTESTABLE));
            }
            Err(e) => return Err(CliError::Config(e.to_string())),
        }
    }

    for n in 1..=deep {
        checks.item("quantum_theta_fixedness", Some(n), |row| {
            let report = quantum_theta_suite(&ctx, n, TOL_FIXEDNESS)?;
            let row = row.residual(report.max_residual).pass(report.pass && report.siegel_ok);
            Ok(if report.failing.is_empty() {
                row
            } else {
                row.note(format!("{} failing basis pairs", report.failing.len()))
            })
        })?;
    }

    if config.max_grade >= 3 {
        checks.item("quadraticity", None, |row| {
            let report = quadraticity_check(&ctx)?;
            Ok(row.note(format!(
                "dim_k2={}, dim_k3={}, span_rank={}, quadratic={}",
                report.dim_k2, report.dim_k3, report.span_rank, report.quadratic
            )))
        })?;
    }
    Ok(())
}

fn max_abs_vec_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn splitmix_complex(state: &mut u64) -> Complex64 {
    let u = |x: u64| (x >> 11) as f64 / (1u64 << 53) as f64;
    Complex64::new(2.0 * u(splitmix(state)) - 1.0, 2.0 * u(splitmix(state)) - 1.0)
}

fn random_holo(geom: &ModuleGeometry, seed: u64) -> HolomorphicVector {
    let mut state = seed;
    let f = (0..geom.c_n()).map(|_| splitmix_complex(&mut state)).collect();
    HolomorphicVector::new(geom.clone(), f).expect("length matches the component count")
}

/// A random Gaussian vector reachable from the holomorphic slice by a few
/// generator actions, so it carries nonzero β and ξ.
fn random_gaussian(geom: &ModuleGeometry, seed: u64, trunc_tol: f64) -> GaussianVector {
    let base = embed_holomorphic(&random_holo(geom, seed), trunc_tol);
    let u = apply_generator_power(&base, geom, GeneratorAction::URight, (seed % 3) as i64 - 1)
        .expect("component counts match");
    apply_generator_power(&u, geom, GeneratorAction::VRight, (seed % 5) as i64 - 2)
        .expect("component counts match")
}
