use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use toricurve_cli::{
    compute_xi, exit, load_ample, load_config, load_embedding, load_fan, parse_torus, run_pipeline,
    run_report, write, AmpleSource, CliError, CliResult, FanSource, RunConfig, CERTIFICATE_FILE,
    EMBEDDING_FILE,
};
use toricurve_core::embed::{build_embedding_data, check_theorem_conditions};
use toricurve_core::verify::{certify, VerifyOptions, DEFAULT_DEGREE_CAP};
use toricurve_core::{Fan, Rational, XiMethod};

/// Builds and certifies embeddings of the projective line into smooth
/// projective toric 3-folds. Every invocation prints one JSON report.
#[derive(Parser)]
#[command(name = "toricurve", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fan inspection and construction.
    #[command(subcommand)]
    Fan(FanCommand),
    /// Ample divisor search.
    #[command(subcommand)]
    Ample(AmpleCommand),
    /// Positive kernel vector of the ray matrix from an ample divisor.
    Xi {
        #[command(flatten)]
        fan: FanArgs,
        #[command(flatten)]
        divisor: DivisorArgs,
        /// Write the vector as JSON to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample divisors and write the embedding data, without certifying.
    Embed {
        #[command(flatten)]
        fan: FanArgs,
        #[command(flatten)]
        divisor: DivisorArgs,
        #[command(flatten)]
        sample: SampleArgs,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify previously written embedding data.
    Verify {
        /// Embedding data JSON.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = DEFAULT_DEGREE_CAP)]
        degree_cap: usize,
        /// Output directory for the certificate.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full pipeline on a preset.
    Demo {
        preset: String,
        #[command(flatten)]
        sample: SampleArgs,
        #[command(flatten)]
        retry: RetryArgs,
        #[arg(long, default_value = "toricurve-out")]
        out: PathBuf,
    },
    /// Full pipeline with retries, or a replay of a recorded run.
    Run {
        #[command(flatten)]
        fan: OptionalFanArgs,
        /// Recorded run configuration; other flags are ignored except --out.
        #[arg(long, conflicts_with_all = ["fan", "preset"])]
        config: Option<PathBuf>,
        #[command(flatten)]
        divisor: DivisorArgs,
        #[command(flatten)]
        sample: SampleArgs,
        #[command(flatten)]
        retry: RetryArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum FanCommand {
    /// Smoothness and completeness report.
    Validate {
        #[command(flatten)]
        fan: FanArgs,
    },
    /// A built-in fan.
    Preset {
        name: String,
        /// Write the fan as TOML to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Star subdivision of a maximal cone, or a seeded chain of them.
    Subdivide {
        #[command(flatten)]
        fan: FanArgs,
        /// Ray indices `i,j,k` of the cone to subdivide.
        #[arg(long, value_parser = parse_cone, conflicts_with = "random")]
        cone: Option<[usize; 3]>,
        /// Number of random subdivisions.
        #[arg(long, required_unless_present = "cone")]
        random: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum AmpleCommand {
    /// Minimal ample divisor vanishing on the first maximal cone.
    Find {
        #[command(flatten)]
        fan: FanArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct FanArgs {
    /// Fan file (TOML).
    #[arg(long)]
    fan: Option<PathBuf>,
    /// Built-in fan: p3, p1p1p1, bl-p3-point.
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Args)]
#[group(required = false, multiple = false)]
struct OptionalFanArgs {
    #[arg(long)]
    fan: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Args)]
struct DivisorArgs {
    /// `auto` or a JSON file holding `{"coeffs": [...]}`.
    #[arg(long, default_value = "auto")]
    ample: AmpleSource,
    #[arg(long, default_value = "intersection")]
    xi_method: XiMethod,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Torus element `a,b,c`, entries rational and nonzero.
    #[arg(long, value_parser = parse_torus, allow_hyphen_values = true, default_value = "1,1,1")]
    torus: [Rational; 3],
}

#[derive(Args)]
struct RetryArgs {
    #[arg(long, default_value_t = 3)]
    max_retries: u32,
    #[arg(long, default_value_t = DEFAULT_DEGREE_CAP)]
    degree_cap: usize,
}

fn parse_cone(text: &str) -> Result<[usize; 3], String> {
    let v: Vec<usize> = text
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    v.try_into().map_err(|_| "a cone needs three ray indices".into())
}

fn source(fan: Option<PathBuf>, preset: Option<String>) -> CliResult<FanSource> {
    match (fan, preset) {
        (Some(p), None) => Ok(FanSource::File(p)),
        (None, Some(n)) => Ok(FanSource::Preset(n)),
        _ => Err(CliError::Config("exactly one of --fan and --preset is required".into())),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Fan(FanCommand::Validate { .. }) => "fan validate",
        Command::Fan(FanCommand::Preset { .. }) => "fan preset",
        Command::Fan(FanCommand::Subdivide { .. }) => "fan subdivide",
        Command::Ample(_) => "ample find",
        Command::Xi { .. } => "xi",
        Command::Embed { .. } => "embed",
        Command::Verify { .. } => "verify",
        Command::Demo { .. } => "demo",
        Command::Run { .. } => "run",
    }
}

fn ok(command: &str, mut body: Value) -> Value {
    body["status"] = json!("ok");
    body["command"] = json!(command);
    body
}

fn write_fan(out: &Option<PathBuf>, fan: &Fan) -> CliResult<()> {
    match out {
        Some(p) => write(p, &fan.to_toml()),
        None => Ok(()),
    }
}

fn execute(command: Command) -> CliResult<Value> {
    let name = command_name(&command);
    match command {
        Command::Fan(FanCommand::Validate { fan }) => {
            let fan = load_fan(&source(fan.fan, fan.preset)?)?;
            Ok(ok(name, json!({ "fan": fan.name, "validation": fan.validate() })))
        }
        Command::Fan(FanCommand::Preset { name: preset, out }) => {
            let fan = Fan::preset(&preset)?;
            write_fan(&out, &fan)?;
            Ok(ok(name, json!({ "fan": fan })))
        }
        Command::Fan(FanCommand::Subdivide { fan, cone, random, seed, out }) => {
            let base = load_fan(&source(fan.fan, fan.preset)?)?;
            let fan = match (cone, random) {
                (Some(c), _) => base.star_subdivision(c)?,
                (None, Some(n)) => base.random_blowups(n, seed)?,
                (None, None) => unreachable!("clap requires --cone or --random"),
            };
            write_fan(&out, &fan)?;
            Ok(ok(name, json!({ "fan": fan, "validation": fan.validate() })))
        }
        Command::Ample(AmpleCommand::Find { fan, out }) => {
            let fan = load_fan(&source(fan.fan, fan.preset)?)?;
            let h = load_ample(&fan, &AmpleSource::Auto)?;
            if let Some(p) = out {
                write(&p, &serde_json::to_string_pretty(&h).expect("divisor serializes"))?;
            }
            Ok(ok(name, json!({ "fan": fan.name, "ample": h })))
        }
        Command::Xi { fan, divisor, out } => {
            let fan = load_fan(&source(fan.fan, fan.preset)?)?;
            let h = load_ample(&fan, &divisor.ample)?;
            let xi = compute_xi(&fan, &h, divisor.xi_method)?;
            if let Some(p) = out {
                write(&p, &serde_json::to_string_pretty(&xi).expect("xi serializes"))?;
            }
            Ok(ok(name, json!({ "fan": fan.name, "h": h.coeffs, "xi": xi })))
        }
        Command::Embed { fan, divisor, sample, out } => {
            let fan = load_fan(&source(fan.fan, fan.preset)?)?;
            let h = load_ample(&fan, &divisor.ample)?;
            let xi = compute_xi(&fan, &h, divisor.xi_method)?;
            let data = build_embedding_data(&fan, &h, &xi, sample.seed, &sample.torus)?;
            let conditions = check_theorem_conditions(&data);
            let mut body = json!({ "fan": fan.name, "xi": xi, "seed": sample.seed, "conditions": conditions });
            if let Some(dir) = out {
                let path = dir.join(EMBEDDING_FILE);
                write(&path, &data.to_json())?;
                body["artifacts"] = json!({ "embedding": path });
            } else {
                body["data"] = serde_json::to_value(&data).expect("data serializes");
            }
            Ok(ok(name, body))
        }
        Command::Verify { data, degree_cap, out } => {
            let data = load_embedding(&data)?;
            let conditions = check_theorem_conditions(&data);
            let cert = certify(&data, &VerifyOptions { degree_cap })?;
            if let Some(dir) = &out {
                write(&dir.join(CERTIFICATE_FILE), &cert.to_json())?;
            }
            if !(conditions.passed() && cert.embedding) {
                let mut v = CliError::Rejected.report(name);
                v["conditions"] = json!(conditions);
                v["certificate"] = json!(cert);
                return Ok(v);
            }
            Ok(ok(name, json!({ "conditions": conditions, "certificate": cert })))
        }
        Command::Demo { preset, sample, retry, out } => {
            let cfg = RunConfig {
                fan: FanSource::Preset(preset),
                seed: sample.seed,
                torus: sample.torus,
                max_retries: retry.max_retries,
                degree_cap: retry.degree_cap,
                out: Some(out),
                ..RunConfig::new(FanSource::Preset(String::new()))
            };
            let outcome = run_pipeline(&cfg)?;
            Ok(run_report(name, &cfg, &outcome))
        }
        Command::Run { fan, config, divisor, sample, retry, out } => {
            let cfg = match config {
                Some(path) => {
                    let mut cfg = load_config(&path)?;
                    if out.is_some() {
                        cfg.out = out;
                    }
                    cfg
                }
                None => RunConfig {
                    fan: source(fan.fan, fan.preset)?,
                    ample: divisor.ample,
                    xi_method: divisor.xi_method,
                    seed: sample.seed,
                    torus: sample.torus,
                    max_retries: retry.max_retries,
                    degree_cap: retry.degree_cap,
                    out,
                },
            };
            let outcome = run_pipeline(&cfg)?;
            Ok(run_report(name, &cfg, &outcome))
        }
    }
}

fn print(v: &Value) {
    // a closed pipe is not an error of the run
    let text = serde_json::to_string_pretty(v).expect("report serializes");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            e.exit()
        }
        Err(e) => {
            print(&json!({
                "status": "error",
                "command": null,
                "exit_code": exit::USAGE,
                "kind": "usage",
                "message": e.render().to_string().trim(),
            }));
            return ExitCode::from(exit::USAGE as u8);
        }
    };
    let name = command_name(&cli.command);
    let (report, code) = match execute(cli.command) {
        Ok(v) => {
            let code = v["exit_code"].as_i64().map_or(exit::OK, |c| c as i32);
            (v, code)
        }
        Err(e) => (e.report(name), e.exit_code()),
    };
    print(&report);
    ExitCode::from(code as u8)
}
