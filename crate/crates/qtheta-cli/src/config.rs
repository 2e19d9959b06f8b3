//! Run configuration: a flat JSON config file, flags that override file
//! values, defaults for everything except θ, and the radius-budget override
//! from the environment. All validation happens here, before any computation.

use num_complex::Complex64;
use qtheta::bimodule::SeriesOptions;
use qtheta::qarith::{in_s_theta, stabilizer_matrix, IntMatrix2, QuadraticIrrational};
use qtheta::rings::RingContext;
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Environment variable that caps every adaptive series radius.
pub const RADIUS_BUDGET_ENV: &str = "QTHETA_RADIUS_BUDGET";

/// Errors that abort a command before it can produce a report:
/// configuration errors exit 2, radius budget overruns exit 3. Verification
/// failures (exit 1) are not errors; they ride on the report itself.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Budget(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Budget(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// One layer of configuration, every field optional: the file layer and the
/// flag layer have the same shape, and a later layer overrides an earlier one
/// field by field.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    pub theta: Option<String>,
    pub g: Option<String>,
    pub tau: Option<String>,
    pub epsilon_level: Option<u8>,
    pub max_grade: Option<u32>,
    pub trunc_tol: Option<f64>,
    pub out: Option<String>,
}

impl RawConfig {
    /// Reads the flat JSON file: one top-level object, string values in the
    /// same syntax as the flags. Unknown keys are rejected to catch typos.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{} is not valid JSON: {e}", path.display())))?;
        let Value::Object(map) = value else {
            return Err(CliError::Config(format!("{} must hold a JSON object", path.display())));
        };
        let mut raw = RawConfig::default();
        for (key, v) in map {
            match key.as_str() {
                "theta" => raw.theta = Some(string_value(&key, &v)?),
                "g" => raw.g = Some(string_value(&key, &v)?),
                "tau" => raw.tau = Some(string_value(&key, &v)?),
                "epsilon_level" => {
                    let n = integer_value(&key, &v)?;
                    raw.epsilon_level =
                        Some(u8::try_from(n).map_err(|_| bad_value(&key, "0, 1, or 2"))?);
                }
                "max_grade" => {
                    let n = integer_value(&key, &v)?;
                    raw.max_grade =
                        Some(u32::try_from(n).map_err(|_| bad_value(&key, "a small positive integer"))?);
                }
                "trunc_tol" => {
                    raw.trunc_tol =
                        Some(v.as_f64().ok_or_else(|| bad_value(&key, "a positive number"))?);
                }
                "out" => raw.out = Some(string_value(&key, &v)?),
                other => {
                    return Err(CliError::Config(format!(
                        "unknown config key {other:?} (expected theta, g, tau, epsilon_level, max_grade, trunc_tol, out)"
                    )));
                }
            }
        }
        Ok(raw)
    }

    /// Lays `over` on top of `self`: set fields in `over` win.
    pub fn overlay(mut self, over: RawConfig) -> Self {
        self.theta = over.theta.or(self.theta);
        self.g = over.g.or(self.g);
        self.tau = over.tau.or(self.tau);
        self.epsilon_level = over.epsilon_level.or(self.epsilon_level);
        self.max_grade = over.max_grade.or(self.max_grade);
        self.trunc_tol = over.trunc_tol.or(self.trunc_tol);
        self.out = over.out.or(self.out);
        self
    }
}

fn string_value(key: &str, v: &Value) -> Result<String> {
    v.as_str().map(str::to_owned).ok_or_else(|| bad_value(key, "a string"))
}

fn integer_value(key: &str, v: &Value) -> Result<u64> {
    v.as_u64().ok_or_else(|| bad_value(key, "a nonnegative integer"))
}

fn bad_value(key: &str, expected: &str) -> CliError {
    CliError::Config(format!("config key {key:?} must be {expected}"))
}

/// The resolved, validated configuration every config-driven command runs on.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub theta: QuadraticIrrational,
    pub g: Option<IntMatrix2>,
    pub tau: Complex64,
    pub epsilon_level: u8,
    pub max_grade: u32,
    pub trunc_tol: f64,
    pub out_path: Option<PathBuf>,
    pub radius_budget: Option<i64>,
}

impl RunConfig {
    /// Parses and validates a merged raw layer. θ is required; τ defaults to
    /// i, ε-level to 2, max_grade to 2, trunc_tol to 10⁻¹⁴.
    pub fn resolve(raw: RawConfig) -> Result<Self> {
        let theta_text = raw
            .theta
            .ok_or_else(|| CliError::Config("theta is required: pass --theta \"(p+q*sqrt(D))/r\" or set it in the config file".into()))?;
        let theta = QuadraticIrrational::from_str(&theta_text)
            .map_err(|e| CliError::Config(e.to_string()))?;
        let g = raw.g.as_deref().map(parse_matrix).transpose()?;
        let tau = raw.tau.as_deref().map(parse_complex).transpose()?.unwrap_or(Complex64::I);
        if !(tau.im > 0.0) || !tau.re.is_finite() {
            return Err(CliError::Config(format!(
                "tau = {},{} must lie in the upper half-plane (Im tau > 0)",
                tau.re, tau.im
            )));
        }
        let epsilon_level = raw.epsilon_level.unwrap_or(2);
        if epsilon_level > 2 {
            return Err(CliError::Config("epsilon_level must be 0, 1, or 2".into()));
        }
        let max_grade = raw.max_grade.unwrap_or(2);
        if max_grade == 0 {
            return Err(CliError::Config("max_grade must be at least 1".into()));
        }
        let trunc_tol = raw.trunc_tol.unwrap_or(1e-14);
        if !(trunc_tol > 0.0) || !trunc_tol.is_finite() {
            return Err(CliError::Config("trunc_tol must be a positive finite number".into()));
        }
        let radius_budget = match std::env::var(RADIUS_BUDGET_ENV) {
            Ok(text) => Some(text.parse::<i64>().ok().filter(|b| *b >= 0).ok_or_else(|| {
                CliError::Config(format!("{RADIUS_BUDGET_ENV}={text:?} must be a nonnegative integer"))
            })?),
            Err(_) => None,
        };
        Ok(RunConfig {
            theta,
            g,
            tau,
            epsilon_level,
            max_grade,
            trunc_tol,
            out_path: raw.out.map(PathBuf::from),
            radius_budget,
        })
    }

    /// Series truncation policy with the environment budget applied.
    pub fn series_options(&self) -> SeriesOptions {
        let mut opts = SeriesOptions::with_tol(self.trunc_tol);
        if let Some(budget) = self.radius_budget {
            opts.radius_budget = budget;
        }
        opts
    }

    /// Ring context over the resolved stabilizer, grades cached to `grades`.
    pub fn ring_context(&self, g: &IntMatrix2, grades: u32) -> Result<RingContext> {
        let ctx = RingContext::new(g, &self.theta, self.tau, self.trunc_tol, grades)
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(match self.radius_budget {
            Some(budget) => ctx.with_radius_budget(budget),
            None => ctx,
        })
    }
}

/// The first membership condition of S_θ the matrix violates, if any, in the
/// order det 1, g ≠ ±1, tr > 0, c > 0, gθ = θ.
pub fn first_violated(g: &IntMatrix2, theta: &QuadraticIrrational) -> Option<&'static str> {
    use num_bigint::BigInt;
    if g.det() != BigInt::from(1) {
        return Some("det = 1");
    }
    if g.is_identity() || g.is_neg_identity() {
        return Some("g != +-1");
    }
    if g.trace() <= BigInt::from(0) {
        return Some("trace > 0");
    }
    if g.c <= BigInt::from(0) {
        return Some("c > 0");
    }
    if !in_s_theta(g, theta) {
        return Some("g*theta = theta");
    }
    None
}

/// The supplied g when present (rejected with the first violated condition
/// otherwise), else the continued-fraction stabilizer of θ normalized into
/// S_θ by sign flips and inversion.
pub fn resolve_g(config: &RunConfig) -> Result<IntMatrix2> {
    if let Some(g) = &config.g {
        return match first_violated(g, &config.theta) {
            Some(cond) => {
                Err(CliError::Config(format!("supplied g is not in S_theta: {cond} fails")))
            }
            None => Ok(g.clone()),
        };
    }
    let s = stabilizer_matrix(&config.theta).map_err(|e| CliError::Config(e.to_string()))?;
    let inv = s.inverse_unimodular().map_err(|e| CliError::Config(e.to_string()))?;
    [s.clone(), inv.clone(), s.neg(), inv.neg()]
        .into_iter()
        .find(|cand| in_s_theta(cand, &config.theta))
        .ok_or_else(|| {
            CliError::Config("the continued-fraction stabilizer cannot be normalized into S_theta".into())
        })
}

/// Parses "a,b,c,d" (row major) into an integer matrix.
pub fn parse_matrix(text: &str) -> Result<IntMatrix2> {
    let parts: Vec<i64> = text
        .split(',')
        .map(|p| p.trim().parse::<i64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| CliError::Config(format!("cannot parse g {text:?}; expected \"a,b,c,d\"")))?;
    match parts[..] {
        [a, b, c, d] => Ok(IntMatrix2::new(a, b, c, d)),
        _ => Err(CliError::Config(format!("g {text:?} must have exactly 4 entries"))),
    }
}

/// Parses "re,im" into a complex number.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| CliError::Config(format!("cannot parse {text:?}; expected \"re,im\"")))?;
    match parts[..] {
        [re, im] => Ok(Complex64::new(re, im)),
        _ => Err(CliError::Config(format!("{text:?} must have exactly 2 components"))),
    }
}

/// Parses "p/q" (or a bare integer "p") into a rational pair.
pub fn parse_rational(text: &str) -> Result<(i64, i64)> {
    let bad = || CliError::Config(format!("cannot parse {text:?}; expected \"p/q\" or \"p\""));
    match text.split_once('/') {
        Some((num, den)) => {
            let p = num.trim().parse::<i64>().map_err(|_| bad())?;
            let q = den.trim().parse::<i64>().map_err(|_| bad())?;
            if q == 0 {
                return Err(CliError::Config(format!("{text:?} has a zero denominator")));
            }
            Ok((p, q))
        }
        None => Ok((text.trim().parse::<i64>().map_err(|_| bad())?, 1)),
    }
}
