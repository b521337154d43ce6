//! `vccs`: command-line front end for the vc-compress toolkit.
//!
//! Exit codes: 0 pass, 1 verdict failure, 2 config or IO error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use vc_compress::approx::{epsilon_approximation, ApproxConfig, ProbabilityVector};
use vc_compress::game::{solve, solve_exact, solve_mw, sparse_epsilon_nash, GameConfig};
use vc_compress::harness::{
    generalization_experiment, generate, run_suite, ExperimentConfig, GeneratorSpec, SuiteConfig,
};
use vc_compress::scheme::{reconstruct_traced, Scheme};
use vc_compress::{CompressedSample, ConceptClass, DiscoveryMode, Error, LabeledSample, PayoffMatrix, SchemeConfig};

#[derive(Parser)]
#[command(name = "vccs", version, about = "Sample compression schemes for finite VC classes")]
struct Cli {
    /// Seed for every randomized step [default: 0, or the config file's seed].
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Concept class file: header `n m`, then one 0/1 row per concept.
    #[arg(long, global = true, value_name = "PATH")]
    class_file: Option<PathBuf>,
    /// Write the JSON output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ClassSource {
    /// Generator spec as JSON, e.g. '{"kind":"intervals","n":10}'. Used when
    /// --class-file is absent.
    #[arg(long, value_name = "JSON")]
    generator: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Auto,
    Exhaustive,
    DoubleOracle,
}

impl From<Mode> for DiscoveryMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Auto => DiscoveryMode::Auto,
            Mode::Exhaustive => DiscoveryMode::Exhaustive,
            Mode::DoubleOracle => DiscoveryMode::DoubleOracle,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Auto,
    Exact,
    Mw,
}

#[derive(Subcommand)]
enum Command {
    /// VC dimension of the class, with a shattered witness set.
    Vc {
        #[command(flatten)]
        class: ClassSource,
    },
    /// Dual class and its VC dimension.
    Dual {
        #[command(flatten)]
        class: ClassSource,
    },
    /// ε-approximation certificate of a distribution against the class.
    Approx {
        #[command(flatten)]
        class: ClassSource,
        #[arg(long, default_value_t = 0.125)]
        epsilon: f64,
        /// Comma-separated nonnegative point weights, normalized; uniform when absent.
        #[arg(long, value_name = "W0,W1,...")]
        distribution: Option<String>,
    },
    /// Solve a zero-sum game given as a 0/1 payoff matrix file.
    Game {
        /// Matrix file: header `r c`, then one 0/1 row per row action.
        #[arg(long, value_name = "PATH")]
        matrix: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        method: Method,
        /// Target exploitability for the iterative solver.
        #[arg(long, default_value_t = 0.01)]
        target: f64,
    },
    /// Compress a labeled sample.
    Compress {
        #[command(flatten)]
        class: ClassSource,
        /// Sample file: one `point label` pair per line.
        #[arg(long, value_name = "PATH")]
        sample: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        mode: Mode,
        /// Also write the serialized compressed sample here.
        #[arg(long, value_name = "PATH")]
        binary_out: Option<PathBuf>,
    },
    /// Reconstruct a hypothesis from a compressed sample.
    Reconstruct {
        #[command(flatten)]
        class: ClassSource,
        /// Serialized compressed sample, or the JSON written by `compress`.
        #[arg(long, value_name = "PATH", conflicts_with = "hex")]
        input: Option<PathBuf>,
        /// Serialized compressed sample as hex.
        #[arg(long)]
        hex: Option<String>,
    },
    /// Compress, serialize, reconstruct and check every sample label.
    Verify {
        #[command(flatten)]
        class: ClassSource,
        #[arg(long, value_name = "PATH")]
        sample: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        mode: Mode,
    },
    /// Sparse ε-Nash equilibrium of a 0/1 payoff matrix.
    Nash {
        #[arg(long, value_name = "PATH")]
        matrix: PathBuf,
        #[arg(long, default_value_t = 0.125)]
        epsilon: f64,
    },
    /// Generalization experiment from a JSON config.
    Experiment {
        /// Experiment config (JSON).
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
    },
    /// Run the verification suite.
    Suite {
        /// Suite config (JSON); the default suite when absent.
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
    },
}

/// Either a usage/IO problem (exit 2) or a completed run with a verdict.
enum Outcome {
    Pass(Value),
    Fail(Value),
}

fn read_text(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn with_path(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse { line, message } => Error::Config(format!("{}:{line}: {message}", path.display())),
        other => other,
    }
}

fn load_class(cli: &Cli, source: &ClassSource) -> Result<ConceptClass, Error> {
    match (&cli.class_file, &source.generator) {
        (Some(path), _) => ConceptClass::parse(&read_text(path)?).map_err(|e| with_path(path, e)),
        (None, Some(spec)) => {
            let spec: GeneratorSpec =
                serde_json::from_str(spec).map_err(|e| Error::Config(format!("--generator: {e}")))?;
            generate(&spec)
        }
        (None, None) => Err(Error::Config(
            "a class is required: pass --class-file or --generator".into(),
        )),
    }
}

fn load_sample(path: &Path) -> Result<LabeledSample, Error> {
    LabeledSample::parse(&read_text(path)?).map_err(|e| with_path(path, e))
}

fn load_matrix(path: &Path) -> Result<PayoffMatrix, Error> {
    PayoffMatrix::parse(&read_text(path)?).map_err(|e| with_path(path, e))
}

fn load_compressed(input: Option<&PathBuf>, hex_text: Option<&String>) -> Result<CompressedSample, Error> {
    let bytes = match (input, hex_text) {
        (_, Some(h)) => hex::decode(h.trim()).map_err(|e| Error::Config(format!("--hex: {e}")))?,
        (Some(path), None) => {
            let raw = std::fs::read(path).map_err(|e| io_err(path, e))?;
            if raw.starts_with(b"MYSCS1") {
                raw
            } else {
                let v: Value = serde_json::from_slice(&raw).map_err(|e| {
                    Error::Config(format!("{}: neither a compressed sample nor JSON: {e}", path.display()))
                })?;
                let h = v["compressed"]
                    .as_str()
                    .ok_or_else(|| Error::Config(format!("{}: no `compressed` field", path.display())))?;
                hex::decode(h).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
            }
        }
        (None, None) => return Err(Error::Config("pass --input or --hex".into())),
    };
    CompressedSample::from_bytes(&bytes)
}

fn scheme_config(mode: Mode) -> SchemeConfig {
    let mut config = SchemeConfig::default();
    config.mode.0 = mode.into();
    config
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn run(cli: &Cli) -> Result<Outcome, Error> {
    let seed = cli.seed.unwrap_or(0);
    match &cli.command {
        Command::Vc { class } => {
            let c = load_class(cli, class)?;
            let d = c.vc_dimension();
            let witness = c.largest_shattered_set();
            Ok(Outcome::Pass(json!({
                "domain_size": c.domain_size(),
                "concepts": c.len(),
                "vc_dimension": d,
                "shattered_set": witness,
            })))
        }
        Command::Dual { class } => {
            let c = load_class(cli, class)?;
            let dual = c.dual();
            Ok(Outcome::Pass(json!({
                "vc_dimension": c.vc_dimension(),
                "dual_vc_dimension": dual.class.vc_dimension(),
                "dual_class": dual.class.to_text(),
                "point_to_concept": dual.point_to_concept,
            })))
        }
        Command::Approx {
            class,
            epsilon,
            distribution,
        } => {
            let c = load_class(cli, class)?;
            let mu = match distribution {
                Some(text) => {
                    let weights = text
                        .split(',')
                        .map(|w| w.trim().parse::<f64>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|e| Error::Config(format!("--distribution: {e}")))?;
                    ProbabilityVector::normalized(weights).map_err(|e| Error::Config(format!("--distribution: {e}")))?
                }
                None => ProbabilityVector::uniform(c.domain_size()),
            };
            let cert = epsilon_approximation(&c, &mu, *epsilon, seed, &ApproxConfig::default())?;
            let ok = cert.verify(&c, &mu);
            let out = json!({ "seed": seed, "verified": ok, "certificate": to_value(&cert) });
            Ok(if ok { Outcome::Pass(out) } else { Outcome::Fail(out) })
        }
        Command::Game { matrix, method, target } => {
            let m = load_matrix(matrix)?;
            let cfg = GameConfig::default();
            let sol = match method {
                Method::Auto => solve(&m, *target, &cfg)?,
                Method::Exact => solve_exact(&m, &cfg)?,
                Method::Mw => solve_mw(&m, *target, &cfg)?,
            };
            Ok(Outcome::Pass(
                json!({ "rows": m.rows(), "cols": m.cols(), "solution": to_value(&sol) }),
            ))
        }
        Command::Nash { matrix, epsilon } => {
            let m = load_matrix(matrix)?;
            let eq = sparse_epsilon_nash(&m, *epsilon, seed, &GameConfig::default(), &ApproxConfig::default())?;
            let ok = eq.verify(&m);
            let out = json!({ "seed": seed, "verified": ok, "equilibrium": to_value(&eq) });
            Ok(if ok { Outcome::Pass(out) } else { Outcome::Fail(out) })
        }
        Command::Compress {
            class,
            sample,
            mode,
            binary_out,
        } => {
            let c = load_class(cli, class)?;
            let s = load_sample(sample)?;
            let (compressed, report) = Scheme::new(&c, scheme_config(*mode)).compress(&s, seed)?;
            let bytes = compressed.to_bytes();
            if let Some(path) = binary_out {
                std::fs::write(path, &bytes).map_err(|e| io_err(path, e))?;
            }
            Ok(Outcome::Pass(json!({
                "seed": seed,
                "compressed": hex::encode(&bytes),
                "kernel_points": compressed.kernel_points(),
                "kernel_labels": compressed.kernel_labels(),
                "side_info": hex::encode(compressed.side_info()),
                "report": to_value(&report),
            })))
        }
        Command::Reconstruct { class, input, hex } => {
            let c = load_class(cli, class)?;
            let compressed = load_compressed(input.as_ref(), hex.as_ref())?;
            let (h, votes) = reconstruct_traced(&c, &compressed)?;
            Ok(Outcome::Pass(json!({
                "hypothesis": h.as_row().to_string(),
                "votes": votes,
            })))
        }
        Command::Verify { class, sample, mode } => {
            let c = load_class(cli, class)?;
            let s = load_sample(sample)?;
            c.check_sample(&s)?;
            let rt = Scheme::new(&c, scheme_config(*mode)).verify_round_trip(&s, seed);
            let out = json!({ "seed": seed, "round_trip": to_value(&rt) });
            Ok(if rt.passed {
                Outcome::Pass(out)
            } else {
                Outcome::Fail(out)
            })
        }
        Command::Experiment { config } => {
            let text = read_text(config)?;
            let mut exp: ExperimentConfig = serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("{}:{}:{}: {e}", config.display(), e.line(), e.column())))?;
            if let Some(seed) = cli.seed {
                exp.seed = seed;
            }
            let report = generalization_experiment(&exp, &SchemeConfig::default())?;
            let out = to_value(&report);
            Ok(if report.passed {
                Outcome::Pass(out)
            } else {
                Outcome::Fail(out)
            })
        }
        Command::Suite { config } => {
            let mut cfg = match config {
                Some(path) => SuiteConfig::load(path)?,
                None => SuiteConfig::default(),
            };
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            let report = run_suite(&cfg)?;
            let out = to_value(&report);
            Ok(if report.passed {
                Outcome::Pass(out)
            } else {
                Outcome::Fail(out)
            })
        }
    }
}

fn emit(cli: &Cli, value: &Value) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(value).expect("json values serialize") + "\n";
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| io_err(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|outcome| {
        let (value, code) = match outcome {
            Outcome::Pass(v) => (v, 0),
            Outcome::Fail(v) => (v, 1),
        };
        emit(&cli, &value).map(|_| code)
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
