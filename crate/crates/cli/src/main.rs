use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use monoflow_cli::{
    cmd_converge, cmd_plot, cmd_rescale, cmd_run, cmd_verify, parse_refine, write_converge_csv,
    write_rescale_csv,
};

/// Viscous monotone systems: runs, invariant checks and refinement studies.
#[derive(Parser)]
#[command(name = "monoflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configuration and write its fields and monitors CSV.
    Run {
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Exit nonzero if any invariant check fails.
        #[arg(long)]
        strict: bool,
    },
    /// Run a configuration and print the invariant report.
    Verify {
        config: PathBuf,
        /// Exit nonzero if any invariant check fails.
        #[arg(long)]
        strict: bool,
    },
    /// Grid-refinement study against the configured reference.
    Converge {
        config: PathBuf,
        /// Cell counts, comma separated (default n,2n,4n,8n).
        #[arg(long, value_parser = parse_levels)]
        refine: Option<Levels>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Write a plotting script next to a CSV file.
    Plot { csv: PathBuf },
    /// Dislocation model runs.
    Dislocation {
        #[command(subcommand)]
        command: DislocationCommand,
    },
}

#[derive(Subcommand)]
enum DislocationCommand {
    /// Periodic-plus-linear run.
    Run {
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long)]
        strict: bool,
    },
    /// Compare runs with and without the rescaled nonlocal term.
    Rescale {
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

#[derive(Clone)]
struct Levels(Vec<usize>);

fn parse_levels(s: &str) -> Result<Levels, String> {
    parse_refine(s).map(Levels).map_err(|e| format!("{e:#}"))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned())
}

fn run_cmd(config: &Path, out_dir: &Path, strict: bool) -> Result<ExitCode> {
    let summary = cmd_run(config, out_dir)?;
    for w in &summary.warnings {
        log::warn!("{w}");
    }
    println!("wrote {}", summary.fields_csv.display());
    println!("wrote {}", summary.monitors_csv.display());
    if !summary.report.passed() {
        for c in summary.report.checks.iter().filter(|c| !c.passed) {
            eprintln!("{c}");
        }
        if strict {
            return Ok(ExitCode::from(1));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run { config, out_dir, strict } => run_cmd(&config, &out_dir, strict),
        Command::Verify { config, strict } => {
            let (report, warnings) = cmd_verify(&config)?;
            for w in &warnings {
                log::warn!("{w}");
            }
            println!("{report}");
            Ok(if strict && !report.passed() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Converge { config, refine, out_dir } => {
            let rows = cmd_converge(&config, refine.as_ref().map(|l| l.0.as_slice()))?;
            println!("{:>8}  {:>12}  {:>14}  {:>10}", "n", "eps", "L1 error", "order");
            for r in &rows {
                let order = r.order.map_or_else(|| "-".to_string(), |o| o.to_string());
                println!("{:>8}  {:>12.4e}  {:>14.6e}  {:>10}", r.n, r.eps, r.error, order);
            }
            std::fs::create_dir_all(&out_dir)?;
            let path = out_dir.join(format!("{}-converge.csv", stem(&config)));
            write_converge_csv(&path, &rows)?;
            println!("wrote {}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Plot { csv } => {
            let (script, kind) = cmd_plot(&csv)?;
            println!("wrote {} ({kind:?} plot)", script.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Dislocation { command } => match command {
            DislocationCommand::Run { config, out_dir, strict } => run_cmd(&config, &out_dir, strict),
            DislocationCommand::Rescale { config, out_dir } => {
                let rows = cmd_rescale(&config)?;
                println!("{:>10}  {:>7}  {:>14}  {:>14}", "delta", "n", "nonlocal sup", "distance");
                for r in &rows {
                    println!("{:>10.6}  {:>7}  {:>14.6e}  {:>14.6e}", r.delta, r.n, r.nonlocal_sup, r.distance);
                }
                std::fs::create_dir_all(&out_dir)?;
                let path = out_dir.join(format!("{}-rescale.csv", stem(&config)));
                write_rescale_csv(&path, &rows)?;
                println!("wrote {}", path.display());
                Ok(ExitCode::SUCCESS)
            }
        },
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
