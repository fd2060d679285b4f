//! `qpse`: run phase-space entropy experiments from JSON spec files.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod output;
mod spec;
mod verify;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qpse_core::dynamics::{entropy_series, evolve};
use qpse_core::entropy::continuous_entropy;
use qpse_core::factory::{make_spinor_packet, make_state};
use qpse_core::spin::{canonical_theta, spin_entropy_entangled_pair};
use qpse_core::spinor::spinor_entropy;
use qpse_core::transform::{apply_transform, TransformOutcome};
use qpse_core::QpseError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::output::{number, report_json, row_json, series_csv, to_pretty, write_atomic};
use crate::spec::{locate, parse, SpecFile, DEFAULT_PRECISION};

const EXIT_VALIDATION: u8 = 2;
const EXIT_GUARD: u8 = 3;
const EXIT_USAGE: u8 = 64;
const EXIT_IO: u8 = 74;

#[derive(Parser, Debug)]
#[command(
    name = "qpse",
    version,
    about = "Phase-space entropy experiments on quantum states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment spec file (JSON, schema 1).
    #[arg(long, global = true, value_name = "FILE")]
    spec: Option<PathBuf>,

    /// Seed for randomized states (overrides the spec's `seed`).
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Significant digits in written numbers (6 to 17).
    #[arg(long, global = true, value_name = "D", value_parser = clap::value_parser!(u8).range(6..=17))]
    precision: Option<u8>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Entropy report for the spec's state.
    Entropy { file: Option<PathBuf> },
    /// Apply each listed transform and report entropy changes.
    Invariance { file: Option<PathBuf> },
    /// Time-evolve the state and write the entropy series as CSV.
    Evolve { file: Option<PathBuf> },
    /// Everything the spec requests.
    Run { file: Option<PathBuf> },
    /// Built-in self-test table.
    Verify,
    /// Entropy of an entangled spin-1/2 pair at mixing angle theta.
    Spin {
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Entropy,
    Invariance,
    Evolve,
    Run,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Entropy => "entropy",
            Mode::Invariance => "invariance",
            Mode::Evolve => "evolve",
            Mode::Run => "run",
        }
    }
}

#[derive(Debug)]
enum Failure {
    Validation(String),
    Guard(QpseError),
    Io(String),
    VerifyFailed,
}

impl Failure {
    fn exit(&self) -> ExitCode {
        match self {
            Failure::Validation(m) => {
                eprintln!("error: {m}");
                ExitCode::from(EXIT_VALIDATION)
            }
            Failure::Guard(e) => {
                eprintln!("error: numerical guard {e}");
                ExitCode::from(EXIT_GUARD)
            }
            Failure::Io(m) => {
                eprintln!("error: {m}");
                ExitCode::from(EXIT_IO)
            }
            Failure::VerifyFailed => ExitCode::FAILURE,
        }
    }
}

/// A spec file loaded from disk, kept with its text for line anchors.
struct Loaded {
    path: PathBuf,
    text: String,
    spec: SpecFile,
}

impl Loaded {
    fn at(&self, key: &str, message: impl std::fmt::Display) -> Failure {
        let (line, column) = locate(&self.text, key);
        Failure::Validation(format!(
            "{}:{line}:{column}: {message}",
            self.path.display()
        ))
    }

    /// Guards exit 3; other core errors are bad input anchored at `key`.
    fn core(&self, key: &str, e: QpseError) -> Failure {
        match e {
            QpseError::InvalidParameter(_)
            | QpseError::InvalidGrid(_)
            | QpseError::UnsupportedSpin(_)
            | QpseError::GridMismatch(_) => self.at(key, e),
            other => Failure::Guard(other),
        }
    }
}

fn load(path: &Path) -> Result<Loaded, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Validation(format!("{}: cannot read spec: {e}", path.display())))?;
    let spec = parse(&text).map_err(|l| {
        Failure::Validation(format!(
            "{}:{}:{}: {}",
            path.display(),
            l.line,
            l.column,
            l.message
        ))
    })?;
    Ok(Loaded {
        path: path.to_path_buf(),
        text,
        spec,
    })
}

struct Settings {
    seed: u64,
    precision: usize,
    out: PathBuf,
}

enum Prepared {
    Scalar(qpse_core::WaveFunction),
    Spinor(qpse_core::SpinorField),
}

fn run_spec(mode: Mode, loaded: &Loaded, cli: &Cli) -> Result<(), Failure> {
    let spec = &loaded.spec;
    let settings = Settings {
        seed: cli.seed.or(spec.seed).unwrap_or(0),
        precision: cli
            .precision
            .map(usize::from)
            .or(spec.outputs.precision.map(|p| p.0))
            .unwrap_or(DEFAULT_PRECISION),
        out: cli.out.clone().unwrap_or_else(|| PathBuf::from(".")),
    };
    let digits = settings.precision;

    let want_entropy = matches!(mode, Mode::Entropy) || (mode == Mode::Run && spec.entropy);
    let want_transforms =
        matches!(mode, Mode::Invariance) || (mode == Mode::Run && !spec.transforms.is_empty());
    let want_evolution =
        matches!(mode, Mode::Evolve) || (mode == Mode::Run && spec.evolution.is_some());
    if mode == Mode::Run && !(want_entropy || want_transforms || want_evolution) {
        return Err(loaded.at(
            "entropy",
            "nothing to do: entropy is false and no transforms or evolution are given",
        ));
    }
    if mode == Mode::Invariance && spec.transforms.is_empty() {
        return Err(loaded.at("state", "invariance needs a non-empty transforms list"));
    }
    if mode == Mode::Evolve && spec.evolution.is_none() {
        return Err(loaded.at("state", "evolve needs an evolution block"));
    }
    if spec.state.is_spinor() {
        if want_transforms {
            return Err(loaded.at(
                "transforms",
                "transforms apply to scalar states, not spinor_packet",
            ));
        }
        if want_evolution {
            return Err(loaded.at(
                "evolution",
                "evolution applies to scalar states, not spinor_packet",
            ));
        }
        if spec.spin.is_some() {
            return Err(loaded.at("spin", "spinor_packet already carries spin 1/2"));
        }
    }

    let grid = spec.grid.0.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let state_spec = spec
        .state
        .to_spec(grid.dim(), &mut rng)
        .map_err(|m| loaded.at("state", m))?;
    let prepared = if spec.state.is_spinor() {
        Prepared::Spinor(
            make_spinor_packet(&state_spec, &grid).map_err(|e| loaded.core("state", e))?,
        )
    } else {
        Prepared::Scalar(make_state(&state_spec, &grid).map_err(|e| loaded.core("state", e))?)
    };

    let mut doc = Map::new();
    doc.insert("schema".into(), json!(1));
    doc.insert("command".into(), json!(mode.name()));
    doc.insert("seed".into(), json!(settings.seed));
    doc.insert("precision".into(), json!(digits));
    doc.insert("grid".into(), output::grid_json(&grid, digits));
    let mut summary = Vec::new();
    let s_spin = match &spec.spin {
        Some(s) => Some(s.0.entropy().map_err(|e| loaded.core("spin", e))?),
        None => None,
    };

    if want_entropy {
        let report = match &prepared {
            Prepared::Spinor(f) => spinor_entropy(f).map_err(|e| loaded.core("state", e))?,
            Prepared::Scalar(psi) => {
                let r = continuous_entropy(psi).map_err(|e| loaded.core("state", e))?;
                match s_spin {
                    Some(s) => r.with_spin(s),
                    None => r,
                }
            }
        };
        summary.push(format!("s_r = {}", number(report.s_r, digits)));
        summary.push(format!("s_k = {}", number(report.s_k, digits)));
        summary.push(format!("s_spin = {}", number(report.s_spin, digits)));
        summary.push(format!("s_total = {}", number(report.s_total, digits)));
        summary.push(format!(
            "bbm_margin = {}",
            number(report.bbm_margin, digits)
        ));
        doc.insert("entropy".into(), report_json(&report, digits));
    }

    if want_transforms {
        let Prepared::Scalar(psi) = &prepared else {
            unreachable!()
        };
        let mut items = Vec::new();
        for t in &spec.transforms {
            let ts = t.to_spec();
            ts.validate().map_err(|e| loaded.core("transforms", e))?;
            let outcome = apply_transform(psi, &ts).map_err(|e| loaded.core("transforms", e))?;
            let mut item = Map::new();
            item.insert("kind".into(), json!(ts.kind.name()));
            item.insert("amount".into(), number(ts.amount, digits));
            match &outcome {
                TransformOutcome::State { before, after, .. } => {
                    let (dr, dk, dt) = outcome.deltas().expect("state outcome");
                    item.insert("delta_s_r".into(), number(dr, digits));
                    item.insert("delta_s_k".into(), number(dk, digits));
                    item.insert("delta_s_total".into(), number(dt, digits));
                    item.insert("before".into(), report_json(before, digits));
                    item.insert("after".into(), report_json(after, digits));
                    summary.push(format!(
                        "{}({}): delta_s_total = {}",
                        ts.kind.name(),
                        ts.amount,
                        number(dt, digits)
                    ));
                }
                TransformOutcome::Lorentz(m) => {
                    item.insert("mass".into(), number(ts.mass, digits));
                    item.insert("rest_integral".into(), number(m.rest_integral, digits));
                    item.insert(
                        "boosted_integral".into(),
                        number(m.boosted_integral, digits),
                    );
                    item.insert(
                        "boosted_probability".into(),
                        number(m.boosted_probability, digits),
                    );
                    item.insert("residual".into(), number(m.residual(), digits));
                    summary.push(format!(
                        "{}({}): residual = {}",
                        ts.kind.name(),
                        ts.amount,
                        number(m.residual(), digits)
                    ));
                }
            }
            items.push(Value::Object(item));
        }
        doc.insert("transforms".into(), Value::Array(items));
    }

    let mut csv = None;
    if want_evolution {
        let Prepared::Scalar(psi) = &prepared else {
            unreachable!()
        };
        let evo = spec.evolution.as_ref().expect("checked above");
        let snaps = evolve(psi, &evo.0).map_err(|e| loaded.core("evolution", e))?;
        let mut series = entropy_series(&snaps).map_err(|e| loaded.core("evolution", e))?;
        // The Hamiltonian is spin-independent, so the spin term is a constant offset.
        if let Some(s) = s_spin {
            for row in &mut series.rows {
                row.report = row.report.with_spin(s);
            }
        }
        let csv_name = spec
            .outputs
            .csv
            .as_ref()
            .map_or_else(|| "evolution.csv".to_string(), |f| f.0.clone());
        let last = series.rows.last().expect("series includes t = 0");
        summary.push(format!(
            "evolved {} steps, final s_total = {}",
            evo.0.steps,
            number(last.report.s_total, digits)
        ));
        let mut block = Map::new();
        block.insert("csv".into(), json!(csv_name));
        block.insert("rows".into(), json!(series.rows.len()));
        block.insert("dt".into(), number(evo.0.dt, digits));
        block.insert("steps".into(), json!(evo.0.steps));
        block.insert("final".into(), row_json(last, digits));
        block.insert(
            "monotonicity".into(),
            series.monotonicity.map_or(Value::Null, |m| {
                json!({
                    "decreasing_steps": m.decreasing_steps,
                    "max_decrease": number(m.max_decrease, digits),
                })
            }),
        );
        doc.insert("evolution".into(), Value::Object(block));
        csv = Some((csv_name, series_csv(&series.rows, digits)));
    }

    let json_name = spec
        .outputs
        .json
        .as_ref()
        .map_or_else(|| format!("{}.json", mode.name()), |f| f.0.clone());
    if let Some((name, _)) = &csv {
        if *name == json_name {
            return Err(loaded.at("outputs", "json and csv outputs must have different names"));
        }
    }
    let io =
        |e: std::io::Error| Failure::Io(format!("cannot write to {}: {e}", settings.out.display()));
    if let Some((name, text)) = &csv {
        let path = write_atomic(&settings.out, name, text).map_err(io)?;
        summary.push(format!("wrote {}", path.display()));
    }
    let path = write_atomic(&settings.out, &json_name, &to_pretty(doc)).map_err(io)?;
    summary.push(format!("wrote {}", path.display()));
    for line in summary {
        println!("{line}");
    }
    Ok(())
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("QPSE_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            Failure::Validation(format!(
                "QPSE_THREADS must be a positive integer, got {value:?}"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Validation(format!("cannot configure {threads} threads: {e}")))
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    configure_threads()?;
    let (mode, file) = match &cli.command {
        Command::Verify => {
            let rows = verify::run_all(cli.seed.unwrap_or(0));
            print!("{}", verify::render(&rows));
            return if rows.iter().all(|r| r.pass) {
                Ok(())
            } else {
                Err(Failure::VerifyFailed)
            };
        }
        Command::Spin { theta } => {
            if !theta.is_finite() {
                return Err(Failure::Validation(format!(
                    "--theta must be finite, got {theta}"
                )));
            }
            let digits = cli.precision.map_or(DEFAULT_PRECISION, usize::from);
            let s = spin_entropy_entangled_pair(canonical_theta(*theta));
            println!("{}", number(s, digits));
            return Ok(());
        }
        Command::Entropy { file } => (Mode::Entropy, file),
        Command::Invariance { file } => (Mode::Invariance, file),
        Command::Evolve { file } => (Mode::Evolve, file),
        Command::Run { file } => (Mode::Run, file),
    };
    let path = match (file, &cli.spec) {
        (Some(p), None) | (None, Some(p)) => p,
        (Some(_), Some(_)) => {
            return Err(Failure::Validation(
                "give the spec either positionally or with --spec, not both".into(),
            ))
        }
        (None, None) => {
            return Err(Failure::Validation(format!(
                "{} needs a spec file (--spec FILE)",
                mode.name()
            )))
        }
    };
    let loaded = load(path)?;
    run_spec(mode, &loaded, cli)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => f.exit(),
    }
}
