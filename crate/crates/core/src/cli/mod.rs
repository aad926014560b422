//! Command-line front end.
//!
//! `subtraction <command> --config <path> [--out <path>] [--format csv|json]`
//!
//! The table goes to `--out` (or `$SUBTRACTION_OUT_DIR/<command>.<format>`, or
//! stdout) and a metadata record to `<out>.meta.json` (or stderr). Exit status
//! is 2 for configuration errors, 3 for domain errors and 4 for convergence
//! failures.

pub mod commands;
pub mod config;
pub mod table;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, ErrorClass};
pub use commands::Output;
pub use config::RunConfig;
pub use table::{Cell, Table};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SUBTRACTION_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Tadpole,
    Fish,
    Amplitude,
    Rgflow,
    Energy,
    Propagator,
    Poles,
    Curved,
    Hadamard,
    Pairing,
    Decohere,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "subtraction", version, about = "Divergent-graph evaluation, pole reports and kernel pairings")]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// Configuration file (`key = value` lines under `[section]` headers).
    #[arg(long)]
    pub config: PathBuf,
    /// Output table path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Table format; overrides `[output] format`.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Module(Error),
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Module(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Module(e) => match e.class() {
                ErrorClass::Domain => 3,
                ErrorClass::Convergence => 4,
            },
            CliError::Io(_) => 1,
        }
    }
}

/// Rendered table plus metadata, ready to write.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub table: String,
    pub metadata: String,
}

/// Runs `command` on an already parsed config. Relative kernel paths resolve
/// against `base`.
pub fn render(
    command: Command,
    mut cfg: RunConfig,
    format_flag: Option<Format>,
    base: &Path,
) -> Result<(Rendered, Option<PathBuf>), CliError> {
    let format = match cfg.string("output", "format") {
        None => Format::Csv,
        Some(f) => match f.as_str() {
            "csv" => Format::Csv,
            "json" => Format::Json,
            other => return Err(CliError::Config(format!("output.format '{other}' is not csv or json"))),
        },
    };
    let format = format_flag.unwrap_or(format);
    let out_path = cfg.string("output", "path").map(|p| base.join(p));
    let echo = cfg.echo().clone();

    let out = commands::run(command, &mut cfg, base)?;
    let table = match format {
        Format::Csv => out.table.to_csv(),
        Format::Json => out.table.to_json(),
    };
    let meta = json!({
        "tool": "subtraction",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "format": format,
        "inputs": echo,
        "tolerances": out.tolerances,
        "notes": out.notes,
        "columns": out.table.columns,
        "rows": out.table.rows.len(),
    });
    let mut metadata = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    metadata.push('\n');
    Ok((Rendered { table, metadata }, out_path))
}

fn meta_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Full run: load config, compute, write artifacts. Returns the table path
/// when one was written.
pub fn run(args: &Args) -> Result<Option<PathBuf>, CliError> {
    let cfg = RunConfig::load(&args.config)?;
    let base = args
        .config
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let (rendered, cfg_out) = render(args.command, cfg, args.format, &base)?;
    let ext = args
        .format
        .map(Format::extension)
        .unwrap_or_else(|| if rendered.table.starts_with('[') { "json" } else { "csv" });
    let target = args.out.clone().or(cfg_out).or_else(|| {
        std::env::var_os(OUT_DIR_ENV)
            .filter(|d| !d.is_empty())
            .map(|d| PathBuf::from(d).join(format!("{}.{ext}", command_name(args.command))))
    });
    match &target {
        Some(path) => {
            write_file(path, &rendered.table)?;
            write_file(&meta_path(path), &rendered.metadata)?;
        }
        None => {
            print!("{}", rendered.table);
            eprint!("{}", rendered.metadata);
        }
    }
    Ok(target)
}

fn command_name(c: Command) -> String {
    c.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
}

/// Entry point for the binary.
pub fn main_entry() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("subtraction: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn go(command: Command, text: &str, format: Option<Format>) -> Result<Rendered, CliError> {
        let cfg = RunConfig::parse(text)?;
        render(command, cfg, format, Path::new(".")).map(|(r, _)| r)
    }

    #[test]
    fn amplitude_symmetric_point_is_real() {
        let r = go(
            Command::Amplitude,
            "[couplings]\nlambda0 = 0.1\nm_sq = 1\nmu = 1\n[kinematics]\ns = -1\nt = -1\nu = -1\n",
            None,
        )
        .unwrap();
        let lines: Vec<&str> = r.table.lines().collect();
        assert_eq!(lines[0], "s,t,u,re_T,im_T");
        assert_eq!(lines.len(), 2);
        assert!(lines[1].ends_with(",0.0"));
    }

    #[test]
    fn poles_json_all_finite() {
        let r = go(
            Command::Poles,
            "[couplings]\nlambda0 = 0.1\nm_sq = 1\nmu = 1\n",
            Some(Format::Json),
        )
        .unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.table).unwrap();
        let list = v.as_array().unwrap();
        assert_eq!(list.len(), 2);
        assert!(list.iter().all(|rep| rep["is_finite"] == true));
    }

    #[test]
    fn exit_codes() {
        let unknown = go(Command::Tadpole, "[couplings]\nm_sq = 1\nbogus = 2\n", None).unwrap_err();
        assert_eq!(unknown.exit_code(), 2);
        let invalid = go(Command::Tadpole, "[couplings]\nm_sq = -1\n", None).unwrap_err();
        assert_eq!(invalid.exit_code(), 2);
        let domain = go(
            Command::Fish,
            "[couplings]\nm_sq = 1\n[kinematics]\np_sq = -5\n",
            None,
        )
        .unwrap_err();
        assert_eq!(domain.exit_code(), 3);
        let convergence = go(
            Command::Rgflow,
            "[couplings]\nlambda0 = 4\nm_sq = 1\n[flow]\nmu_end = 1e3\nsteps = 16\n",
            None,
        )
        .unwrap_err();
        assert_eq!(convergence.exit_code(), 4, "{convergence}");
    }

    #[test]
    fn deterministic_output() {
        let text = "[couplings]\nlambda0 = 0.2\nm_sq = 2\nmu = 3\n[kinematics]\np_sq = 0.5, 1, 4\n";
        let a = go(Command::Propagator, text, None).unwrap();
        let b = go(Command::Propagator, text, None).unwrap();
        assert_eq!(a, b);
        assert!(!a.table.contains('\r'));
    }
}
