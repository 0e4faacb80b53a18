//! `colspace`: one binary, one experiment per invocation.
//!
//! Exit codes: 0 success, 1 a verdict failed, 2 usage error, 3 budget
//! exceeded.

mod args;
mod commands;
mod config;
mod output;
mod suite;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::Parser;
use serde::Serialize;
use serde_json::Value;

use args::{Cli, Command, Format, GlobalArgs};
use commands::{execute, usage, Report, UsageError};

const OUTPUT_DIR_VAR: &str = "COLSPACE_OUTPUT_DIR";

fn command_params<T: Serialize>(name: &'static str, args: &T) -> (&'static str, Value) {
    (name, output::to_value(args))
}

fn run(cli: Cli) -> Result<Report> {
    let file = cli.global.config.as_deref().map(config::load).transpose()?;
    let (name, flags) = match &cli.command {
        Command::Validate { dir } => return suite::validate(dir),
        Command::Run => {
            let file = file.ok_or_else(|| usage("`run` needs --config"))?;
            let name = file
                .command
                .ok_or_else(|| usage("the config names no `command`"))?;
            return execute(&name, file.params);
        }
        Command::Count(a) => command_params("count", a),
        Command::Sample(a) => command_params("sample", a),
        Command::Classify(a) => command_params("classify", a),
        Command::Clusters(a) => command_params("clusters", a),
        Command::Bounds(a) => command_params("bounds", a),
        Command::Dominate(a) => command_params("dominate", a),
        Command::Percolate(a) => command_params("percolate", a),
        Command::Solve(a) => command_params("solve", a),
        Command::Freeenergy(a) => command_params("freeenergy", a),
    };
    let base = match file {
        Some(file) => {
            if let Some(other) = file.command.as_deref().filter(|c| *c != name) {
                return Err(usage(format!(
                    "config is for `{other}` but `{name}` was requested"
                )));
            }
            file.params
        }
        None => config::empty(),
    };
    execute(name, config::overlay(base, flags))
}

fn render(report: &Report, format: Format, duration: Option<f64>) -> Result<String> {
    let mut doc = report.document();
    let mut header = report.header();
    if let Some(secs) = duration {
        doc["duration_seconds"] = secs.into();
        header["duration_seconds"] = secs.into();
    }
    Ok(match format {
        Format::Json => output::pretty(&doc) + "\n",
        Format::Jsonl => match &report.lines {
            Some(lines) => std::iter::once(&header)
                .chain(lines)
                .map(|v| output::compact(v) + "\n")
                .collect(),
            None => output::compact(&doc) + "\n",
        },
        Format::Csv => {
            let table = report
                .table
                .as_ref()
                .ok_or_else(|| usage(format!("`{}` has no CSV form", report.command)))?;
            let mut text = format!("# {}\n", output::compact(&header));
            for row in std::iter::once(table.header.iter().map(|h| h.to_string()).collect())
                .chain(table.rows.iter().cloned())
            {
                let fields: Vec<String> = row.iter().map(|f| output::csv_field(f)).collect();
                text += &fields.join(",");
                text.push('\n');
            }
            text
        }
    })
}

/// Where the report goes: `--output`, resolved against the output
/// directory when relative, else `<dir>/<command>.<ext>` when only the
/// directory is set, else stdout.
fn destination(global: &GlobalArgs, report: &Report, format: Format) -> Option<PathBuf> {
    let dir = std::env::var_os(OUTPUT_DIR_VAR).map(PathBuf::from);
    match (&global.output, dir) {
        (Some(out), Some(dir)) if out.is_relative() => Some(dir.join(out)),
        (Some(out), _) => Some(out.clone()),
        (None, Some(dir)) => Some(dir.join(format!("{}.{}", report.command, format.extension()))),
        (None, None) => None,
    }
}

fn emit(global: &GlobalArgs, report: &Report, text: &str, format: Format) -> Result<()> {
    match destination(global, report, format) {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)
                    .with_context(|| format!("creating {}", parent.display()))?;
            }
            std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {}", path.display());
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .context("writing to stdout")?,
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<colspace::Error>() {
            return match e {
                colspace::Error::BudgetExceeded { .. } => 3,
                _ => 2,
            };
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.global.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("error: --jobs: {e}");
            return ExitCode::from(2);
        }
    }
    let start = Instant::now();
    let global = GlobalArgs {
        config: cli.global.config.clone(),
        output: cli.global.output.clone(),
        format: cli.global.format,
        jobs: cli.global.jobs,
        timing: cli.global.timing,
    };
    let outcome = run(cli).and_then(|report| {
        let format = global.format.unwrap_or(report.default_format);
        let duration = global.timing.then(|| start.elapsed().as_secs_f64());
        let text = render(&report, format, duration)?;
        emit(&global, &report, &text, format)?;
        Ok(report.verdict)
    });
    match outcome {
        Ok(Some(false)) => ExitCode::from(1),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
