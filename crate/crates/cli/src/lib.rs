//! Pipeline orchestration behind the `toricurve` binary: fan loading,
//! ample divisor selection, sampling, certification and the seed retry loop.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use toricurve_core::curve::ProjectiveLine;
use toricurve_core::embed::{build_embedding_data, check_theorem_conditions, ConditionReport};
use toricurve_core::intersect::{find_ample, is_ample, xi_vector};
use toricurve_core::rational::{fmt_rational, parse_rational};
use toricurve_core::verify::{certify, VerifyOptions, DEFAULT_DEGREE_CAP};
use toricurve_core::{
    Certificate, EmbeddingData, Error, Fan, Rational, TDivisor, ValidationReport, XiMethod,
    XiVector,
};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const OTHER: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const VALIDATION: i32 = 3;
    pub const NOT_PROJECTIVE: i32 = 4;
    pub const RETRIES_EXHAUSTED: i32 = 5;
    pub const REJECTED: i32 = 6;
}

pub const EMBEDDING_FILE: &str = "embedding.json";
pub const CERTIFICATE_FILE: &str = "certificate.json";
pub const CONFIG_FILE: &str = "run.json";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("fan failed validation: {message}")]
    Validation { message: String, report: Option<Box<ValidationReport>> },
    #[error("fan is not projective")]
    NotProjective,
    #[error("no certified embedding after {} attempts", attempts.len())]
    RetriesExhausted { attempts: Vec<Attempt> },
    #[error("certificate rejects the embedding")]
    Rejected,
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error(transparent)]
    Core(Error),
    #[error("{0}")]
    Config(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NotProjective => CliError::NotProjective,
            Error::MalformedFan(_) | Error::NotComplete(..) => {
                CliError::Validation { message: e.to_string(), report: None }
            }
            e => CliError::Core(e),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation { .. } => exit::VALIDATION,
            CliError::NotProjective => exit::NOT_PROJECTIVE,
            CliError::RetriesExhausted { .. } => exit::RETRIES_EXHAUSTED,
            CliError::Rejected => exit::REJECTED,
            CliError::Io { .. } | CliError::Core(_) | CliError::Config(_) => exit::OTHER,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Validation { .. } => "validation",
            CliError::NotProjective => "not_projective",
            CliError::RetriesExhausted { .. } => "retries_exhausted",
            CliError::Rejected => "rejected",
            CliError::Io { .. } => "io",
            CliError::Core(Error::DegreeOverflow { .. }) => "degree_overflow",
            CliError::Core(_) => "error",
            CliError::Config(_) => "config",
        }
    }

    /// The structured report printed for this error.
    pub fn report(&self, command: &str) -> Value {
        let mut v = json!({
            "status": "error",
            "command": command,
            "exit_code": self.exit_code(),
            "kind": self.kind(),
            "message": self.to_string(),
        });
        match self {
            CliError::Validation { report: Some(r), .. } => {
                v["validation"] = json!(r);
                v["offending_rays"] = json!(r.non_primitive_rays);
            }
            CliError::RetriesExhausted { attempts } => v["attempts"] = json!(attempts),
            CliError::Core(Error::DegreeOverflow { chart, degree, cap }) => {
                v["chart"] = json!(chart);
                v["degree"] = json!(degree);
                v["cap"] = json!(cap);
            }
            _ => {}
        }
        v
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FanSource {
    File(PathBuf),
    Preset(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmpleSource {
    Auto,
    File(PathBuf),
}

impl std::str::FromStr for AmpleSource {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(if s == "auto" { AmpleSource::Auto } else { AmpleSource::File(s.into()) })
    }
}

/// Everything needed to replay a run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub fan: FanSource,
    pub ample: AmpleSource,
    pub xi_method: XiMethod,
    pub seed: u64,
    #[serde(with = "torus_serde")]
    pub torus: [Rational; 3],
    /// Re-samplings allowed after the first attempt, at least 1.
    pub max_retries: u32,
    pub degree_cap: usize,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(fan: FanSource) -> Self {
        Self {
            fan,
            ample: AmpleSource::Auto,
            xi_method: XiMethod::Intersection,
            seed: 0,
            torus: [1, 1, 1].map(|x| Rational::from_integer(x.into())),
            max_retries: 3,
            degree_cap: DEFAULT_DEGREE_CAP,
            out: None,
        }
    }

    fn check(&self) -> CliResult<()> {
        if self.max_retries < 1 {
            return Err(CliError::Config("max retries must be at least 1".into()));
        }
        Ok(())
    }
}

mod torus_serde {
    use serde::{Deserialize, Deserializer, Serializer};
    use toricurve_core::Rational;

    pub fn serialize<S: Serializer>(t: &[Rational; 3], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format_torus(t))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[Rational; 3], D::Error> {
        let text = String::deserialize(d)?;
        super::parse_torus(&text).map_err(serde::de::Error::custom)
    }
}

/// Parses `a,b,c` with rational entries such as `1/3`.
pub fn parse_torus(text: &str) -> Result<[Rational; 3], String> {
    let parts: Vec<Rational> = text
        .split(',')
        .map(|p| parse_rational(p.trim()).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    parts.try_into().map_err(|_| format!("torus `{text}` needs exactly three entries"))
}

pub fn format_torus(t: &[Rational; 3]) -> String {
    t.iter().map(fmt_rational).collect::<Vec<_>>().join(",")
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io { path: path.into(), message: e.to_string() })
}

pub fn write(path: &Path, text: &str) -> CliResult<()> {
    let io = |e: std::io::Error| CliError::Io { path: path.into(), message: e.to_string() };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    fs::write(path, text).map_err(io)
}

/// Loads a fan and requires it to be smooth and complete.
pub fn load_fan(source: &FanSource) -> CliResult<Fan> {
    let fan = match source {
        FanSource::Preset(name) => Fan::preset(name)?,
        FanSource::File(path) => Fan::from_toml(&read(path)?).map_err(|e| match e {
            Error::Parse(m) => CliError::Validation { message: m, report: None },
            e => e.into(),
        })?,
    };
    let report = fan.validate();
    if !(report.smooth && report.complete) {
        let message = describe(&report);
        return Err(CliError::Validation { message, report: Some(Box::new(report)) });
    }
    Ok(fan)
}

fn describe(r: &ValidationReport) -> String {
    if let Some(i) = r.non_primitive_rays.first() {
        format!("ray {i} is not primitive")
    } else if let Some(c) = r.singular_cones.first() {
        format!("cone {c} is not unimodular")
    } else if let Some((a, b)) = r.overlapping_cones.first() {
        format!("cones {a} and {b} do not meet in a common face")
    } else if let Some(((i, j), n)) = r.unbalanced_faces.first() {
        format!("2-face ({i}, {j}) lies in {n} maximal cone(s)")
    } else {
        "fan has no cones".into()
    }
}

pub fn load_ample(fan: &Fan, source: &AmpleSource) -> CliResult<TDivisor> {
    match source {
        AmpleSource::Auto => Ok(find_ample(fan)?),
        AmpleSource::File(path) => {
            let h: TDivisor = serde_json::from_str(&read(path)?)
                .map_err(|e| CliError::Core(Error::Parse(e.to_string())))?;
            if !is_ample(fan, &h)? {
                return Err(Error::NotAmple.into());
            }
            Ok(h)
        }
    }
}

pub fn compute_xi(fan: &Fan, h: &TDivisor, method: XiMethod) -> CliResult<XiVector> {
    Ok(xi_vector(fan, h, method, &ProjectiveLine)?)
}

/// One sampling attempt of the retry loop.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Attempt {
    pub seed: u64,
    pub conditions: bool,
    pub certified: bool,
    pub failing_charts: Vec<usize>,
    pub pullback: bool,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub fan: Fan,
    pub h: TDivisor,
    pub xi: XiVector,
    pub attempts: Vec<Attempt>,
    pub conditions: ConditionReport,
    pub data: EmbeddingData,
    pub certificate: Certificate,
}

impl RunOutcome {
    pub fn retries(&self) -> usize {
        self.attempts.len() - 1
    }

    pub fn passed(&self) -> bool {
        self.conditions.passed() && self.certificate.embedding
    }
}

/// Samples and certifies, moving to the next seed until a certificate
/// passes or the retries run out. Artifacts of the last attempt are written
/// in either case when an output directory is set.
pub fn run_pipeline(cfg: &RunConfig) -> CliResult<RunOutcome> {
    run_pipeline_with(cfg, certify)
}

/// `run_pipeline` with a replaceable certifier.
pub fn run_pipeline_with(
    cfg: &RunConfig,
    certifier: impl Fn(&EmbeddingData, &VerifyOptions) -> toricurve_core::Result<Certificate>,
) -> CliResult<RunOutcome> {
    cfg.check()?;
    let fan = load_fan(&cfg.fan)?;
    let h = load_ample(&fan, &cfg.ample)?;
    let xi = compute_xi(&fan, &h, cfg.xi_method)?;
    let opts = VerifyOptions { degree_cap: cfg.degree_cap };
    let mut attempts = Vec::new();
    let mut seed = cfg.seed;
    loop {
        let data = build_embedding_data(&fan, &h, &xi, seed, &cfg.torus)?;
        let conditions = check_theorem_conditions(&data);
        let certificate = certifier(&data, &opts)?;
        attempts.push(Attempt {
            seed,
            conditions: conditions.passed(),
            certified: certificate.embedding,
            failing_charts: certificate
                .charts
                .iter()
                .filter(|c| !(c.injective && c.immersive))
                .map(|c| c.chart)
                .collect(),
            pullback: certificate.pullback.pass,
        });
        let outcome = RunOutcome {
            fan: fan.clone(),
            h: h.clone(),
            xi: xi.clone(),
            attempts: attempts.clone(),
            conditions,
            data,
            certificate,
        };
        let done = outcome.passed();
        if done || attempts.len() > cfg.max_retries as usize {
            if let Some(dir) = &cfg.out {
                write_artifacts(dir, cfg, &outcome)?;
            }
            if done {
                return Ok(outcome);
            }
            return Err(CliError::RetriesExhausted { attempts });
        }
        seed = seed.wrapping_add(1);
    }
}

fn write_artifacts(dir: &Path, cfg: &RunConfig, outcome: &RunOutcome) -> CliResult<()> {
    write(&dir.join(EMBEDDING_FILE), &outcome.data.to_json())?;
    write(&dir.join(CERTIFICATE_FILE), &outcome.certificate.to_json())?;
    let config = serde_json::to_string_pretty(cfg).expect("config serializes");
    write(&dir.join(CONFIG_FILE), &config)
}

pub fn load_config(path: &Path) -> CliResult<RunConfig> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn load_embedding(path: &Path) -> CliResult<EmbeddingData> {
    Ok(EmbeddingData::from_json(&read(path)?)?)
}

/// The success report of a pipeline run.
pub fn run_report(command: &str, cfg: &RunConfig, outcome: &RunOutcome) -> Value {
    let mut v = json!({
        "status": "ok",
        "command": command,
        "fan": outcome.fan.name,
        "h": outcome.h.coeffs,
        "xi": outcome.xi,
        "seed": outcome.data.seed,
        "retries": outcome.retries(),
        "attempts": outcome.attempts,
        "conditions": outcome.conditions,
        "embedding": outcome.certificate.embedding,
        "charts": outcome.certificate.charts.len(),
    });
    if let Some(dir) = &cfg.out {
        v["artifacts"] = json!({
            "embedding": dir.join(EMBEDDING_FILE),
            "certificate": dir.join(CERTIFICATE_FILE),
            "config": dir.join(CONFIG_FILE),
        });
    }
    v
}
