//! Command-line harness: configuration ingestion, experiment execution,
//! parameter scans, and machine-readable result emission.
//!
//! Subcommands:
//! - `teleport` — run the protocol, emit a JSON result document.
//! - `min-x`    — print the minimum admissible POVM scaling for a channel.
//! - `scan`     — sweep `x` or the channel skew angle `t`, emit CSV.
//! - `chsh`     — print singlet correlations and the CHSH quantity.
//!
//! Contracts kept by every command:
//! - exit 0 on success, 2 on configuration/usage errors, 3 when a protocol
//!   precondition fails (e.g. `x` below the admissible minimum), 1 on I/O
//!   failures;
//! - the result document goes to `--out` (or the config's `output_path`, or
//!   stdout); diagnostics go to stderr only and `--quiet` silences them;
//! - identical configuration and seed produce byte-identical documents:
//!   floating-point values are printed with 15 significant digits and all
//!   randomness flows from the seed.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bellcheck::{chsh_value, sampled_chsh, singlet_correlation, AnalyzerSetting};
use crate::error::SimError;
use crate::povm::{build_povm, is_psd, min_x, ChannelParams};
use crate::protocol::{run_teleportation, InputSpec, InputState, RunStatistics, XChoice};
use crate::tolerances::EPS_PSD;
use num_complex::Complex64;

/// Schema identifier embedded in every emitted document.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(
    name = "telsim",
    version,
    about = "Exact simulator for two-qubit teleportation through a partially \
             entangled four-particle channel with POVM discrimination"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for all randomness (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Write the result document here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Output format; each command accepts only its native format
    /// (teleport: json, scan: csv).
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,

    /// Suppress diagnostics on stderr.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the teleportation protocol and emit a JSON result document.
    Teleport {
        /// JSON config file with ExperimentConfig fields; flags override it.
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
    },
    /// Print the minimum admissible POVM scaling for a channel, together
    /// with the minimum eigenvalue of each POVM element at that scaling.
    #[command(name = "min-x")]
    MinX {
        /// Channel coefficients α β γ δ (positive, unit sum of squares).
        #[arg(num_args = 4, value_name = "COEFF", required = true)]
        channel: Vec<f64>,
    },
    /// Sweep a parameter and emit a CSV table.
    Scan {
        /// JSON config file with ExperimentConfig fields; flags override it.
        #[arg(long, value_name = "PATH")]
        config: Option<PathBuf>,
        /// Parameter to sweep: the POVM scaling `x`, or the channel skew
        /// angle `t` with coefficients (cos t, cos t, cos t, sin t)
        /// normalized.
        #[arg(long, value_enum)]
        param: ScanParam,
        #[arg(long, allow_negative_numbers = true)]
        start: f64,
        #[arg(long, allow_negative_numbers = true)]
        stop: f64,
        /// Number of points, endpoints included.
        #[arg(long)]
        steps: usize,
    },
    /// Print singlet correlations and the CHSH quantity for four analyzer
    /// angles; optionally also seeded Monte Carlo estimates.
    Chsh {
        /// Analyzer angles in radians: a1 a2 b1 b2.
        #[arg(
            num_args = 4,
            value_name = "ANGLE",
            required = true,
            allow_negative_numbers = true
        )]
        angles: Vec<f64>,
        /// Sample each correlation with this many measurements as well.
        #[arg(long)]
        trials: Option<u64>,
    },
}

/// Result-document format. Each command has a native format (teleport:
/// JSON, scan: CSV); requesting the other is a configuration error.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ScanParam {
    /// POVM scaling.
    X,
    /// Channel skew angle.
    T,
}

/// Configuration of a teleportation experiment. Every field has a default,
/// so `{}` is a valid config; CLI flags override file values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Channel coefficients (α, β, γ, δ): positive, unit sum of squares.
    #[serde(default = "default_channel")]
    pub channel: [f64; 4],
    /// `"random"` for a fresh Haar-random input per trial, or four
    /// amplitudes as `[re, im]` pairs (normalized on ingestion).
    #[serde(default = "default_input")]
    pub input: InputChoice,
    /// POVM scaling: `"auto"` (resolve to the channel's minimum) or a number.
    #[serde(default = "default_x")]
    pub x: XSpec,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    /// Where to write the result document; stdout when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
    /// Output format; defaults to the command's native format.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
}

fn default_channel() -> [f64; 4] {
    [0.5; 4]
}

fn default_input() -> InputChoice {
    InputChoice::Keyword("random".to_owned())
}

fn default_x() -> XSpec {
    XSpec::Keyword("auto".to_owned())
}

fn default_trials() -> u64 {
    1000
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            channel: default_channel(),
            input: default_input(),
            x: default_x(),
            trials: default_trials(),
            seed: 0,
            output_path: None,
            format: None,
        }
    }
}

/// Input field of the config: the keyword `"random"` or four `[re, im]`
/// amplitude pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InputChoice {
    Keyword(String),
    Amplitudes([[f64; 2]; 4]),
}

/// Scaling field of the config: the keyword `"auto"` or a number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum XSpec {
    Keyword(String),
    Value(f64),
}

/// CLI failure with its exit code. 2 = configuration error, 3 = protocol
/// precondition (domain) error, 1 = I/O error.
#[derive(Debug)]
enum CliError {
    Config(String),
    Domain(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Domain(_) => 3,
            CliError::Io(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Domain(m) | CliError::Io(m) => m,
        }
    }
}

fn domain(err: SimError) -> CliError {
    CliError::Domain(err.to_string())
}

impl ExperimentConfig {
    fn channel_params(&self) -> Result<ChannelParams, CliError> {
        ChannelParams::new(
            self.channel[0],
            self.channel[1],
            self.channel[2],
            self.channel[3],
        )
        .map_err(|e| CliError::Config(format!("channel: {e}")))
    }

    fn input_spec(&self) -> Result<InputSpec, CliError> {
        match &self.input {
            InputChoice::Keyword(word) if word == "random" => Ok(InputSpec::Random),
            InputChoice::Keyword(word) => Err(CliError::Config(format!(
                "input: unknown keyword {word:?} (expected \"random\" or four [re, im] pairs)"
            ))),
            InputChoice::Amplitudes(pairs) => {
                let amps = pairs.map(|[re, im]| Complex64::new(re, im));
                if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
                    return Err(CliError::Config(
                        "input: amplitudes must be finite numbers".to_owned(),
                    ));
                }
                let state = InputState::from_unnormalized(amps)
                    .map_err(|e| CliError::Config(format!("input: {e}")))?;
                Ok(InputSpec::Fixed(state))
            }
        }
    }

    fn x_choice(&self) -> Result<XChoice, CliError> {
        match &self.x {
            XSpec::Keyword(word) if word == "auto" => Ok(XChoice::Auto),
            XSpec::Keyword(word) => Err(CliError::Config(format!(
                "x: unknown keyword {word:?} (expected \"auto\" or a positive number)"
            ))),
            XSpec::Value(v) if v.is_finite() && *v > 0.0 => Ok(XChoice::Fixed(*v)),
            XSpec::Value(v) => Err(CliError::Config(format!(
                "x: must be a finite positive number (got {v})"
            ))),
        }
    }

    fn validated_trials(&self) -> Result<u64, CliError> {
        if self.trials == 0 {
            return Err(CliError::Config(
                "trials: a run needs at least one trial".to_owned(),
            ));
        }
        Ok(self.trials)
    }
}

/// Parses a config document, naming the offending field on failure.
fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let location = if path == "." {
            String::new()
        } else {
            format!("{path}: ")
        };
        CliError::Config(format!("config: {location}{}", e.inner()))
    })
}

fn load_config(path: &Option<PathBuf>) -> Result<ExperimentConfig, CliError> {
    match path {
        None => Ok(ExperimentConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| {
                CliError::Config(format!("config: cannot read {}: {e}", p.display()))
            })?;
            parse_config(&text)
        }
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_entry() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("telsim: error: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Teleport { config } => cmd_teleport(&cli, config),
        Command::MinX { channel } => cmd_min_x(&cli, channel),
        Command::Scan {
            config,
            param,
            start,
            stop,
            steps,
        } => cmd_scan(&cli, config, *param, *start, *stop, *steps),
        Command::Chsh { angles, trials } => cmd_chsh(&cli, angles, *trials),
    }
}

/// Applies the global flag overrides to a config loaded from file.
fn apply_overrides(config: &mut ExperimentConfig, cli: &Cli) {
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output_path = Some(out.display().to_string());
    }
    if let Some(format) = cli.format {
        config.format = Some(format);
    }
}

fn require_format(
    config: &ExperimentConfig,
    native: OutputFormat,
    command: &str,
) -> Result<(), CliError> {
    match config.format {
        None => Ok(()),
        Some(f) if f == native => Ok(()),
        Some(f) => Err(CliError::Config(format!(
            "format: {command} emits {native:?} documents, not {f:?}",
        ))),
    }
}

/// 15-significant-digit scientific notation used for every float we print,
/// making equal values byte-identical across runs.
fn sci(value: f64) -> String {
    format!("{value:.14e}")
}

/// JSON serializer whose floats use [`sci`] formatting.
struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.14e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.14e}")
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| CliError::Io(format!("serialization failed: {e}")))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| CliError::Io(format!("serialization failed: {e}")))
}

/// Writes a result document to the resolved destination (the `--out` flag,
/// already merged into `output_path`, or stdout).
fn emit(
    output_path: &Option<String>,
    content: &str,
    quiet: bool,
    what: &str,
) -> Result<(), CliError> {
    match output_path {
        Some(path) => {
            fs::write(path, content)
                .map_err(|e| CliError::Io(format!("cannot write {path}: {e}")))?;
            if !quiet {
                eprintln!("telsim: wrote {what} to {path}");
            }
            Ok(())
        }
        None => {
            print!("{content}");
            std::io::stdout()
                .flush()
                .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}")))
        }
    }
}

#[derive(Serialize)]
struct ToolInfo {
    name: &'static str,
    version: &'static str,
}

fn tool_info() -> ToolInfo {
    ToolInfo {
        name: "telsim",
        version: env!("CARGO_PKG_VERSION"),
    }
}

#[derive(Serialize)]
struct TeleportDocument<'a> {
    schema_version: u32,
    tool: ToolInfo,
    config: &'a ExperimentConfig,
    statistics: &'a RunStatistics,
}

fn cmd_teleport(cli: &Cli, config_path: &Option<PathBuf>) -> Result<(), CliError> {
    let mut config = load_config(config_path)?;
    apply_overrides(&mut config, cli);
    require_format(&config, OutputFormat::Json, "teleport")?;

    let channel = config.channel_params()?;
    let input = config.input_spec()?;
    let x = config.x_choice()?;
    let trials = config.validated_trials()?;

    let stats = run_teleportation(&input, &channel, x, trials, config.seed).map_err(domain)?;

    if !cli.quiet {
        eprintln!(
            "telsim: teleport: {} trials at x = {}, conclusive rate {}",
            stats.trials,
            sci(stats.x_used),
            sci(stats.conclusive_rate),
        );
    }

    let document = TeleportDocument {
        schema_version: SCHEMA_VERSION,
        tool: tool_info(),
        config: &config,
        statistics: &stats,
    };
    emit(
        &config.output_path,
        &to_json(&document)?,
        cli.quiet,
        "teleport document",
    )
}

fn cmd_min_x(cli: &Cli, coeffs: &[f64]) -> Result<(), CliError> {
    let channel = ChannelParams::new(coeffs[0], coeffs[1], coeffs[2], coeffs[3])
        .map_err(|e| CliError::Config(format!("channel: {e}")))?;
    let x = min_x(&channel);
    let povm = build_povm(&channel, x).map_err(domain)?;

    let mut text = String::new();
    let _ = writeln!(text, "min_x = {}", sci(x));
    for (i, element) in povm.elements().iter().enumerate() {
        let (_, min_eig) = is_psd(element, EPS_PSD).map_err(domain)?;
        let _ = writeln!(text, "P{}_min_eigenvalue = {}", i + 1, sci(min_eig));
    }

    let output_path = cli.out.as_ref().map(|p| p.display().to_string());
    emit(&output_path, &text, cli.quiet, "min-x report")
}

/// Evenly spaced sweep values, endpoints included; a single step sits at
/// `start`.
fn linspace(start: f64, stop: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![start];
    }
    (0..steps)
        .map(|k| start + (stop - start) * k as f64 / (steps - 1) as f64)
        .collect()
}

fn render_csv(rows: &[(f64, RunStatistics)]) -> String {
    let mut text = String::new();
    text.push_str("# schema_version=1\n");
    text.push_str("param,exact_success_prob,min_x,conclusive_rate,mean_fidelity\n");
    for (value, stats) in rows {
        let mean = stats.mean_conclusive_fidelity.unwrap_or(f64::NAN);
        let _ = writeln!(
            text,
            "{},{},{},{},{}",
            sci(*value),
            sci(stats.exact_success_probability),
            sci(stats.min_x),
            sci(stats.conclusive_rate),
            sci(mean),
        );
    }
    text
}

fn cmd_scan(
    cli: &Cli,
    config_path: &Option<PathBuf>,
    param: ScanParam,
    start: f64,
    stop: f64,
    steps: usize,
) -> Result<(), CliError> {
    let mut config = load_config(config_path)?;
    apply_overrides(&mut config, cli);
    require_format(&config, OutputFormat::Csv, "scan")?;
    if steps == 0 {
        return Err(CliError::Config(
            "steps: a scan needs at least one step".to_owned(),
        ));
    }
    if !start.is_finite() || !stop.is_finite() {
        return Err(CliError::Config("scan range must be finite".to_owned()));
    }

    let input = config.input_spec()?;
    let trials = config.validated_trials()?;

    let mut rows = Vec::with_capacity(steps);
    for value in linspace(start, stop, steps) {
        let (channel, x) = match param {
            ScanParam::X => (config.channel_params()?, XChoice::Fixed(value)),
            ScanParam::T => {
                let channel = ChannelParams::skew(value)
                    .map_err(|e| CliError::Config(format!("t = {value}: {e}")))?;
                (channel, config.x_choice()?)
            }
        };
        let stats = run_teleportation(&input, &channel, x, trials, config.seed).map_err(domain)?;
        rows.push((value, stats));
    }

    if !cli.quiet {
        eprintln!(
            "telsim: scan: {} row(s) of {:?} from {} to {}",
            rows.len(),
            param,
            sci(start),
            sci(stop),
        );
    }
    emit(
        &config.output_path,
        &render_csv(&rows),
        cli.quiet,
        "scan table",
    )
}

fn cmd_chsh(cli: &Cli, angles: &[f64], trials: Option<u64>) -> Result<(), CliError> {
    if let Some(bad) = angles.iter().find(|a| !a.is_finite()) {
        return Err(CliError::Config(format!(
            "angles must be finite (got {bad})"
        )));
    }
    let [a1, a2, b1, b2] = [
        AnalyzerSetting::new(angles[0]),
        AnalyzerSetting::new(angles[1]),
        AnalyzerSetting::new(angles[2]),
        AnalyzerSetting::new(angles[3]),
    ];

    let mut text = String::new();
    for (label, a, b) in [
        ("E(a1,b1)", a1, b1),
        ("E(a1,b2)", a1, b2),
        ("E(a2,b1)", a2, b1),
        ("E(a2,b2)", a2, b2),
    ] {
        let e = singlet_correlation(a, b).map_err(domain)?;
        let _ = writeln!(text, "{label} = {}", sci(e));
    }
    let s = chsh_value(a1, a2, b1, b2).map_err(domain)?;
    let _ = writeln!(text, "S = {}", sci(s));

    if let Some(trials) = trials {
        if trials == 0 {
            return Err(CliError::Config(
                "trials: sampling needs at least one trial".to_owned(),
            ));
        }
        let seed = cli.seed.unwrap_or(0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (estimate, se) = sampled_chsh(a1, a2, b1, b2, trials, &mut rng).map_err(domain)?;
        let _ = writeln!(text, "sampled_S = {} +- {}", sci(estimate), sci(se));
        let _ = writeln!(text, "sampled_trials_per_setting = {trials}");
        let _ = writeln!(text, "seed = {seed}");
    }

    let output_path = cli.out.as_ref().map(|p| p.display().to_string());
    emit(&output_path, &text, cli.quiet, "chsh report")
}
