//! `finsler`: runs verification suites on Finsler metric families.
//!
//! Exit codes: 0 all checks pass, 1 some check fails, 2 configuration
//! error, 3 domain or sampling error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use finsler::harness::{self, error_exit_code, Format, RunConfig, RunOptions};
use finsler::registry;
use finsler::Error;

#[derive(Parser)]
#[command(
    name = "finsler",
    version,
    about = "Numerical checks of Finsler tensor identities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks listed in one or more config files.
    Run {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Print the family registry with parameter schemas.
    List {
        #[arg(long, value_parser = parse_format)]
        format: Option<Format>,
    },
    /// Sweep family parameters over a grid such as `a=0.5:3:6,b=0:3:7`.
    Scan {
        config: PathBuf,
        #[arg(long)]
        grid: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Replaces the config's sample seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated `key=value` tolerance overrides.
    #[arg(long = "tol-override")]
    tol_override: Option<String>,
    #[arg(long, value_parser = parse_format)]
    format: Option<Format>,
    /// Write the report here instead of the config's path or stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl Common {
    fn options(&self) -> finsler::Result<RunOptions> {
        let tol_overrides = match &self.tol_override {
            Some(s) => harness::config::parse_tol_overrides(s)?,
            None => Default::default(),
        };
        Ok(RunOptions {
            seed: self.seed,
            tol_overrides,
        })
    }
}

fn emit(text: &str, path: Option<&Path>) -> finsler::Result<()> {
    match path {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .map_err(|e| Error::Config(format!("stdout: {e}")))
        }
    }
}

fn run(configs: &[PathBuf], common: &Common) -> finsler::Result<i32> {
    let opts = common.options()?;
    let mut code = 0;
    let mut joined = String::new();
    let mut target = common.output.clone();
    let mut format = common.format;
    for path in configs {
        let cfg = RunConfig::load(path)?;
        let report = harness::run(&cfg, &opts)?;
        let fmt = format.get_or_insert(cfg.output.format);
        if target.is_none() {
            target = cfg.output.path.clone();
        }
        let text = report.render(*fmt)?;
        if !joined.is_empty() && *fmt == Format::Txt {
            joined.push('\n');
        }
        joined.push_str(&text);
        let failed: Vec<&str> = report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect();
        if failed.is_empty() {
            eprintln!("{}: PASS ({} checks)", path.display(), report.checks.len());
        } else {
            eprintln!("{}: FAIL ({})", path.display(), failed.join(", "));
        }
        code = code.max(report.exit_code());
    }
    emit(&joined, target.as_deref())?;
    Ok(code)
}

#[derive(serde::Serialize)]
struct Catalog {
    family: Vec<registry::FamilyInfo>,
}

fn list(format: Option<Format>) -> finsler::Result<i32> {
    let families = registry::families();
    let text = match format.unwrap_or_default() {
        Format::JsonLines => families
            .iter()
            .map(|f| serde_json::to_string(f).map(|s| s + "\n"))
            .collect::<Result<String, _>>()
            .map_err(|e| Error::Config(e.to_string()))?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let map = |e: csv::Error| Error::Config(e.to_string());
            w.write_record(["key", "dim", "params", "reference"])
                .map_err(map)?;
            for f in &families {
                let params: Vec<&str> = f.params.iter().map(|p| p.name).collect();
                w.write_record([f.key, &f.dim.to_string(), &params.join(" "), f.reference])
                    .map_err(map)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
            String::from_utf8(bytes).expect("utf-8 fields")
        }
        Format::Txt => toml::to_string_pretty(&Catalog { family: families })
            .map_err(|e| Error::Config(e.to_string()))?,
    };
    emit(&text, None)?;
    Ok(0)
}

fn scan(config: &Path, grid: &str, common: &Common) -> finsler::Result<i32> {
    let cfg = RunConfig::load(config)?;
    let table = harness::scan(&cfg, grid, &common.options()?)?;
    let format = common.format.unwrap_or(Format::Csv);
    emit(
        &table.render(format)?,
        common.output.as_deref().or(cfg.output.path.as_deref()),
    )?;
    let skipped = table.rows.iter().filter(|r| r.status != "ok").count();
    eprintln!(
        "{}: {} grid points, {skipped} skipped",
        config.display(),
        table.rows.len()
    );
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { configs, common } => run(configs, common),
        Command::List { format } => list(*format),
        Command::Scan {
            config,
            grid,
            common,
        } => scan(config, grid, common),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_exit_code(&e) as u8)
        }
    }
}
