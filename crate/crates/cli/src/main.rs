use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use skewalk::{emit_plotdata, run, CliError, Overrides, RunConfig, Task};
use skewalk_core::verify::VerificationReport;

#[derive(Parser)]
#[command(version, about = "Zero-restarted random walks and their skew Brownian limits")]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

/// Runs the configured tasks and writes results to the output directory.
#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = "SKEWALK_THREADS")]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// May be repeated; overrides the task list of the file.
    #[arg(long = "task", num_args = 1..)]
    tasks: Vec<Task>,
    /// `auto` or `fixed:RULE:SHIFT`.
    #[arg(long)]
    convention: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Print plot data for one check of a verification report.
    Plot {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        curve: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command, cli.run) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cmd: Option<Command>, args: RunArgs) -> Result<(), CliError> {
    match cmd {
        None => {
            let RunArgs { config, seed, threads, out, tasks, convention } = args;
            let config = config.ok_or_else(|| CliError::ConfigInvalid("--config is required".into()))?;
            let overrides = Overrides { seed, threads, out, tasks, convention };
            let cfg = RunConfig::from_file(&config, &overrides)?;
            let manifest = run(&cfg)?;
            for (task, files) in &manifest.tasks {
                eprintln!("{task:?}: {} files", files.len());
            }
            if let Some(v) = manifest.verdict {
                eprintln!("verdict: {v:?}");
            }
            println!("{}", cfg.out.join("manifest.json").display());
            Ok(())
        }
        Some(Command::Plot { report, curve }) => {
            let text = std::fs::read_to_string(&report).map_err(|e| CliError::Failed(format!("{}: {e}", report.display())))?;
            let r: VerificationReport =
                serde_json::from_str(&text).map_err(|e| CliError::Failed(format!("{}: {e}", report.display())))?;
            print!("{}", emit_plotdata(&r, &curve)?);
            Ok(())
        }
    }
}
