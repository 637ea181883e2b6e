mod args;
mod commands;
mod load;
mod report;

use std::fs;
use std::process::ExitCode;

use clap::Parser;
use log::{info, LevelFilter};

use args::{Cli, Command, Format};
use report::{Report, RunConfig};

/// A message plus the exit code it maps to: 1 for bad input, 2 for
/// runtime caps and numeric failures.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    pub fn core(err: causalprobe::Error) -> Self {
        Failure {
            code: if err.is_runtime() { 2 } else { 1 },
            message: err.to_string(),
        }
    }

    pub fn context(mut self, prefix: String) -> Self {
        self.message = format!("{prefix}: {}", self.message);
        self
    }
}

impl From<causalprobe::Error> for Failure {
    fn from(err: causalprobe::Error) -> Self {
        Failure::core(err)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(err: serde_json::Error) -> Self {
        Failure::core(err.into())
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => LevelFilter::Warn,
        1 => LevelFilter::Info,
        _ => LevelFilter::Debug,
    };
    let mut b = env_logger::Builder::new();
    b.filter_level(level).format_timestamp(None);
    if std::env::var_os("NO_COLOR").is_some() {
        b.write_style(env_logger::WriteStyle::Never);
    }
    b.init();
}

fn supports_dot(cmd: &Command) -> bool {
    matches!(cmd, Command::Circuit(_) | Command::Export(_))
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    let g = &cli.global;
    if g.format == Format::Dot && !supports_dot(&cli.command) {
        return Err(Failure::usage("--format dot applies to `circuit` and `export` only"));
    }
    let seed = match g.seed {
        Some(s) => s,
        None => {
            info!("no --seed given; using 0");
            0
        }
    };
    let out = commands::run(&cli.command, seed)?;
    let report = Report {
        config: RunConfig {
            command: &cli.command,
            seed,
            format: g.format,
            output: g.out.as_ref(),
            resolved: &out.resolved,
        },
        generated_at: report::timestamp(g.no_timestamp),
        result: &out.result,
    };
    let json = report.to_json();
    if let Some(path) = &g.out {
        fs::write(path, &json).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        info!("report written to {}", path.display());
    }
    let stdout = match g.format {
        Format::Text => out.text,
        Format::Json => json,
        Format::Csv => out.csv,
        Format::Dot => out.dot.expect("checked above"),
    };
    print!("{stdout}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    init_logging(cli.global.verbose);
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
