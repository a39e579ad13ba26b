use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use mwr_sim::experiments::{execute, read_config, ExperimentKind, ExperimentSpec, RunOutput};
use mwr_sim::Error;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    /// Sum rate versus K at fixed M/K
    Fig1,
    /// Sum-rate distribution over random drops
    Fig2,
    /// Monte Carlo checks of the matrix identities
    Validate,
    /// Replay one result row
    Single,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Zf,
    Mr,
    Both,
}

/// Zero-forcing multi-way massive MIMO relay simulator.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Flat `key = value` config file; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo trials per point (per drop for fig2)
    #[arg(long)]
    trials: Option<usize>,
    /// Output CSV (`-` for stdout)
    #[arg(long)]
    out: Option<String>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    threads: Option<usize>,
}

fn spec_from(cli: &Cli) -> mwr_sim::Result<ExperimentSpec> {
    let kind = match cli.command {
        Command::Fig1 => ExperimentKind::Fig1,
        Command::Fig2 => ExperimentKind::Fig2,
        Command::Validate => ExperimentKind::Validate,
        Command::Single => ExperimentKind::Single,
    };
    let mut entries = match &cli.config {
        Some(path) => read_config(path)?,
        None => Default::default(),
    };
    let mut flag = |key: &str, value: Option<String>| {
        if let Some(v) = value {
            entries.insert(key.to_string(), v);
        }
    };
    flag("seed", cli.seed.map(|s| s.to_string()));
    flag("trials", cli.trials.map(|t| t.to_string()));
    flag("out", cli.out.clone());
    flag("threads", cli.threads.map(|t| t.to_string()));
    flag(
        "mode",
        cli.mode.map(|m| {
            match m {
                ModeArg::Zf => "zf",
                ModeArg::Mr => "mr",
                ModeArg::Both => "both",
            }
            .to_string()
        }),
    );
    if kind != ExperimentKind::Single && !entries.contains_key("out") {
        entries.insert("out".into(), format!("{}.csv", kind.label()));
    }
    ExperimentSpec::from_entries(kind, &entries)
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::OracleFailure(_) => 3,
        Error::Io(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = spec_from(&cli).and_then(|spec| {
        let output = execute(&spec)?;
        let target = spec
            .out
            .as_ref()
            .map_or("stdout".to_string(), |p| p.display().to_string());
        let count = match output {
            RunOutput::Rows(rows) => rows.len(),
            RunOutput::Validation(rows) => rows.len(),
        };
        eprintln!("{}: wrote {count} rows to {target}", spec.kind);
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
