//! Command line and JSON configuration, merged into a validated [`RunConfig`].
//!
//! Flags override values from `--config`. Within one source, `lambda` and
//! `lambda_rel` are mutually exclusive; a λ given on the command line in
//! either form replaces whatever the file said.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(
    name = "spsolve",
    version,
    about = "Radial solver for the critical Schrödinger-Poisson system on a ball"
)]
#[command(allow_negative_numbers = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Eigen,
    Ground,
    Instanton,
    Probe,
    Sweep,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Principal Dirichlet eigenpair and the existence window.
    #[command(allow_negative_numbers = true)]
    Eigen(Flags),
    /// Positive ground state at one (λ, q).
    #[command(allow_negative_numbers = true)]
    Ground(Flags),
    /// Instanton norms, S and K estimates, sup J along the eps schedule.
    #[command(allow_negative_numbers = true)]
    Instanton(Flags),
    /// Nonexistence probe over a refinement schedule.
    #[command(allow_negative_numbers = true)]
    Probe(Flags),
    /// Ground-state levels over a (λ/λ₁, q) grid.
    #[command(allow_negative_numbers = true)]
    Sweep(Flags),
}

impl Command {
    fn split(self) -> (CommandKind, Flags) {
        match self {
            Command::Eigen(f) => (CommandKind::Eigen, f),
            Command::Ground(f) => (CommandKind::Ground, f),
            Command::Instanton(f) => (CommandKind::Instanton, f),
            Command::Probe(f) => (CommandKind::Probe, f),
            Command::Sweep(f) => (CommandKind::Sweep, f),
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitKind {
    Eig,
    Instanton,
    File,
}

#[derive(Args, Debug, Default, Clone)]
pub struct Flags {
    /// Ball radius.
    #[arg(long = "R")]
    pub radius: Option<f64>,
    /// Number of mesh intervals (even, at least 16).
    #[arg(long = "M")]
    pub intervals: Option<usize>,
    #[arg(long)]
    pub q: Option<f64>,
    /// Absolute λ.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// λ as a multiple of the discrete λ₁.
    #[arg(long = "lambda-rel")]
    pub lambda_rel: Option<f64>,
    /// Comma-separated, strictly decreasing.
    #[arg(long = "eps-schedule", value_delimiter = ',')]
    pub eps_schedule: Option<Vec<f64>>,
    #[arg(long = "grad-tol")]
    pub grad_tol: Option<f64>,
    #[arg(long = "max-iters")]
    pub max_iters: Option<usize>,
    #[arg(long, value_enum)]
    pub init: Option<InitKind>,
    /// CSV with columns r,u (extra columns ignored) for `--init file`.
    #[arg(long = "init-file")]
    pub init_file: Option<PathBuf>,
    /// Instanton parameter for `--init instanton`; defaults to the smallest
    /// resolvable eps.
    #[arg(long = "init-eps")]
    pub init_eps: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Sweep grid in units of λ₁.
    #[arg(
        long = "sweep-lambda-rel",
        value_delimiter = ',',
        allow_hyphen_values = true
    )]
    pub sweep_lambda_rel: Option<Vec<f64>>,
    #[arg(long = "sweep-q", value_delimiter = ',')]
    pub sweep_q: Option<Vec<f64>>,
    /// Mesh sizes for `probe`.
    #[arg(long = "probe-schedule", value_delimiter = ',')]
    pub probe_schedule: Option<Vec<usize>>,
}

/// The JSON document accepted by `--config`; every key is optional.
#[derive(Deserialize, Debug, Default, Clone)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(rename = "R")]
    pub radius: Option<f64>,
    #[serde(rename = "M")]
    pub intervals: Option<usize>,
    pub q: Option<f64>,
    pub lambda: Option<f64>,
    pub lambda_rel: Option<f64>,
    pub eps_schedule: Option<Vec<f64>>,
    pub grad_tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub init: Option<InitKind>,
    pub init_file: Option<PathBuf>,
    pub init_eps: Option<f64>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub sweep_lambda_rel: Option<Vec<f64>>,
    pub sweep_q: Option<Vec<f64>>,
    pub probe_schedule: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum LambdaSpec {
    Absolute(f64),
    Relative(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum InitSpec {
    Eigenfunction,
    /// `None` means the resolution guard of the grid.
    Instanton(Option<f64>),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub radius: f64,
    pub intervals: usize,
    pub q: f64,
    pub lambda: LambdaSpec,
    pub eps_schedule: Vec<f64>,
    pub grad_tol: f64,
    pub max_iters: usize,
    pub init: InitSpec,
    pub seed: u64,
    pub sweep_lambda_rel: Vec<f64>,
    pub sweep_q: Vec<f64>,
    pub probe_schedule: Vec<usize>,
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip)]
    pub workers: usize,
}

impl Serialize for CommandKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Eigen => "eigen",
            CommandKind::Ground => "ground",
            CommandKind::Instanton => "instanton",
            CommandKind::Probe => "probe",
            CommandKind::Sweep => "sweep",
        }
    }
}

pub fn default_eps_schedule() -> Vec<f64> {
    (0..5).map(|k| 10f64.powf(-1.0 - 0.5 * k as f64)).collect()
}

impl RunConfig {
    /// SHA-256 of the canonical JSON of every setting that affects numbers
    /// (output directory and worker count excluded), first 16 hex digits.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        hex::encode(digest)[..16].to_string()
    }
}

/// Parses `argv` (program name first) and the optional config file.
pub fn parse_config<I, T>(argv: I) -> CliResult<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Config(e.to_string()))?;
    from_cli(cli)
}

/// Merges parsed flags with the config file they name, if any.
pub fn from_cli(cli: Cli) -> CliResult<RunConfig> {
    let (command, flags) = cli.command.split();
    let file = match &flags.config {
        Some(path) => read_config_file(path)?,
        None => FileConfig::default(),
    };
    resolve(command, flags, file)
}

fn read_config_file(path: &Path) -> CliResult<FileConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))
}

fn lambda_of(lambda: Option<f64>, rel: Option<f64>, source: &str) -> CliResult<Option<LambdaSpec>> {
    match (lambda, rel) {
        (Some(_), Some(_)) => Err(CliError::Config(format!(
            "lambda: both an absolute value and lambda-rel given in {source}"
        ))),
        (Some(l), None) => Ok(Some(LambdaSpec::Absolute(l))),
        (None, Some(r)) => Ok(Some(LambdaSpec::Relative(r))),
        (None, None) => Ok(None),
    }
}

fn finite(name: &str, x: f64) -> CliResult<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::Config(format!("{name}: must be finite, got {x}")))
    }
}

fn positive(name: &str, x: f64) -> CliResult<f64> {
    if finite(name, x)? > 0.0 {
        Ok(x)
    } else {
        Err(CliError::Config(format!(
            "{name}: must be positive, got {x}"
        )))
    }
}

fn nonempty_finite(name: &str, v: Vec<f64>) -> CliResult<Vec<f64>> {
    if v.is_empty() {
        return Err(CliError::Config(format!("{name}: grid is empty")));
    }
    for &x in &v {
        finite(name, x)?;
    }
    Ok(v)
}

fn resolve(command: CommandKind, flags: Flags, file: FileConfig) -> CliResult<RunConfig> {
    let lambda = lambda_of(flags.lambda, flags.lambda_rel, "flags")?
        .or(lambda_of(file.lambda, file.lambda_rel, "config file")?)
        .unwrap_or(LambdaSpec::Relative(0.5));
    match lambda {
        LambdaSpec::Absolute(l) => finite("lambda", l)?,
        LambdaSpec::Relative(r) => finite("lambda-rel", r)?,
    };

    let radius = positive("R", flags.radius.or(file.radius).unwrap_or(1.0))?;
    let intervals = flags.intervals.or(file.intervals).unwrap_or(1024);
    if intervals < 16 || !intervals.is_multiple_of(2) {
        return Err(CliError::Config(format!(
            "M: must be even and at least 16, got {intervals}"
        )));
    }
    let q = positive("q", flags.q.or(file.q).unwrap_or(1.0))?;
    let grad_tol = positive("grad-tol", flags.grad_tol.or(file.grad_tol).unwrap_or(1e-9))?;
    let max_iters = flags.max_iters.or(file.max_iters).unwrap_or(5000);
    if max_iters == 0 {
        return Err(CliError::Config("max-iters: must be at least 1".into()));
    }

    let eps_schedule = flags
        .eps_schedule
        .or(file.eps_schedule)
        .unwrap_or_else(default_eps_schedule);
    let eps_schedule = nonempty_finite("eps-schedule", eps_schedule)?;
    if eps_schedule.len() < 3 {
        return Err(CliError::Config(format!(
            "eps-schedule: needs at least 3 points, got {}",
            eps_schedule.len()
        )));
    }
    if eps_schedule.iter().any(|&e| e <= 0.0) || eps_schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(CliError::Config(
            "eps-schedule: must be positive and strictly decreasing".into(),
        ));
    }

    let init_kind = flags.init.or(file.init);
    let init_file = flags.init_file.or(file.init_file);
    let init_eps = flags.init_eps.or(file.init_eps);
    if let Some(e) = init_eps {
        positive("init-eps", e)?;
    }
    let init = match init_kind {
        Some(InitKind::Eig) => InitSpec::Eigenfunction,
        Some(InitKind::Instanton) => InitSpec::Instanton(init_eps),
        Some(InitKind::File) => InitSpec::File(
            init_file
                .ok_or_else(|| CliError::Config("init: `file` requires --init-file".into()))?,
        ),
        None if command == CommandKind::Probe => InitSpec::Instanton(init_eps),
        None => InitSpec::Eigenfunction,
    };
    if init_eps.is_some() && !matches!(init, InitSpec::Instanton(_)) {
        return Err(CliError::Config(
            "init-eps: only valid with --init instanton".into(),
        ));
    }

    let sweep_lambda_rel = nonempty_finite(
        "sweep-lambda-rel",
        flags
            .sweep_lambda_rel
            .or(file.sweep_lambda_rel)
            .unwrap_or_else(|| vec![0.4, 0.6, 0.8]),
    )?;
    let sweep_q = nonempty_finite(
        "sweep-q",
        flags.sweep_q.or(file.sweep_q).unwrap_or_else(|| vec![1.0]),
    )?;
    for &x in &sweep_q {
        positive("sweep-q", x)?;
    }
    let probe_schedule = flags
        .probe_schedule
        .or(file.probe_schedule)
        .unwrap_or_else(|| vec![256, 512, 1024, 2048]);
    if probe_schedule.is_empty() {
        return Err(CliError::Config("probe-schedule: grid is empty".into()));
    }
    if let Some(&m) = probe_schedule
        .iter()
        .find(|&&m| m < 16 || !m.is_multiple_of(2))
    {
        return Err(CliError::Config(format!(
            "probe-schedule: mesh sizes must be even and at least 16, got {m}"
        )));
    }

    let workers = flags
        .workers
        .or(file.workers)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        return Err(CliError::Config("workers: must be at least 1".into()));
    }

    Ok(RunConfig {
        command,
        radius,
        intervals,
        q,
        lambda,
        eps_schedule,
        grad_tol,
        max_iters,
        init,
        seed: flags.seed.or(file.seed).unwrap_or(0),
        sweep_lambda_rel,
        sweep_q,
        probe_schedule,
        out: flags
            .out
            .or(file.out)
            .unwrap_or_else(|| PathBuf::from("out")),
        workers,
    })
}
