//! Command-line front end: argument and config handling, subcommand
//! dispatch and output files.

mod commands;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

pub use commands::{
    BandsArgs, BoundStatesArgs, FiberSpecArgs, HolonomyArgs, SweepArgs, VerifyArgs,
};

pub const THREADS_ENV: &str = "ANYONSPECTRA_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, configs or parameter values.
    #[error("{0}")]
    Usage(String),
    /// A verification that ran and did not hold.
    #[error("{0}")]
    Failed(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<anyonspectra::Error> for CliError {
    fn from(e: anyonspectra::Error) -> Self {
        match e {
            anyonspectra::Error::Numerical(_) => CliError::Failed(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "anyonspectra", version, about = "Spectra and operator identities of dynamical abelian quantum double models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Bands of the 4x4 pair Bloch matrix on a momentum grid.
    Bands(Invocation<BandsArgs>),
    /// Truncated fiber spectrum at one momentum.
    Fiberspec(Invocation<FiberSpecArgs>),
    /// Transfer-matrix bound states against the truncated fiber.
    Boundstates(Invocation<BoundStatesArgs>),
    /// Fiber spectra over a range of hopping strengths.
    Sweep(Invocation<SweepArgs>),
    /// Operator identity suite on a torus.
    Verify(Invocation<VerifyArgs>),
    /// Charge-around-flux phase on a torus.
    Holonomy(Invocation<HolonomyArgs>),
}

#[derive(Debug, clap::Args)]
#[command(allow_negative_numbers = true)]
struct Invocation<A: clap::Args> {
    #[command(flatten)]
    args: A,
    /// JSON object whose keys override the corresponding flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// What a subcommand produced.
pub struct Outcome {
    /// Primary output (CSV or JSON text).
    pub body: String,
    /// Written to `PATH.meta.json` next to the primary output.
    pub meta: Option<String>,
    /// `Some(reason)` when a verification failed; exits with 1.
    pub failure: Option<String>,
}

/// Subcommand arguments: a serde-mergeable config with an output path.
pub trait RunArgs: Serialize + DeserializeOwned {
    const NAME: &'static str;
    fn output(&self) -> Option<&Path>;
    fn execute(&self) -> Result<Outcome, CliError>;
}

/// Overlays the keys of `config` on the flag values.
fn merge<A: RunArgs>(args: A, config: Option<&Path>) -> Result<A, CliError> {
    let Some(path) = config else { return Ok(args) };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let overlay: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("config {} is not valid JSON: {e}", path.display())))?;
    let Value::Object(overlay) = overlay else {
        return Err(CliError::Usage(format!("config {} must be a JSON object", path.display())));
    };
    let mut base = serde_json::to_value(&args).map_err(|e| CliError::Usage(e.to_string()))?;
    let map = base.as_object_mut().expect("argument structs serialize to objects");
    for (k, v) in overlay {
        if !map.contains_key(&k) {
            return Err(CliError::Usage(format!("unknown config key '{k}' for {}", A::NAME)));
        }
        map.insert(k, v);
    }
    serde_json::from_value(base).map_err(|e| CliError::Usage(format!("invalid config value: {e}")))
}

/// Fully resolved configuration as echoed into `PATH.config.json`.
#[derive(Serialize)]
struct Resolved<'a, A> {
    command: &'a str,
    config: A,
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn invoke<A: RunArgs + clap::Args>(inv: Invocation<A>, stdout: &mut dyn Write) -> Result<Option<String>, CliError> {
    let args = merge(inv.args, inv.config.as_deref())?;
    let out = args.execute()?;
    let resolved = output::to_json(&Resolved { command: A::NAME, config: &args })?;
    match args.output() {
        Some(path) => {
            std::fs::write(path, &out.body)?;
            std::fs::write(sidecar(path, ".config.json"), resolved)?;
            if let Some(meta) = &out.meta {
                std::fs::write(sidecar(path, ".meta.json"), meta)?;
            }
        }
        None => stdout.write_all(out.body.as_bytes())?,
    }
    Ok(out.failure)
}

fn configure_threads() -> Result<(), CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .ok()
                .filter(|n| *n > 0)
                .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
            anyonspectra::exec::configure_threads(n);
            Ok(())
        }
        Err(_) => Ok(()),
    }
}

/// Runs one command line; returns the process exit code.
pub fn run_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{text}");
            return code;
        }
    };
    let result = configure_threads().and_then(|_| match cli.command {
        Command::Bands(i) => invoke(i, stdout),
        Command::Fiberspec(i) => invoke(i, stdout),
        Command::Boundstates(i) => invoke(i, stdout),
        Command::Sweep(i) => invoke(i, stdout),
        Command::Verify(i) => invoke(i, stdout),
        Command::Holonomy(i) => invoke(i, stdout),
    });
    match result {
        Ok(None) => 0,
        Ok(Some(reason)) => {
            let _ = writeln!(stderr, "verification failed: {reason}");
            1
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
