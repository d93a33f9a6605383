use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "spinforge", version, about = "Coherent control of coupled spin-1/2 systems")]
struct Cli {
    /// Seed for every random draw in the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for grid and ensemble evaluation (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Artifact path; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress the report on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimize a pulse with GRAPE.
    Grape(commands::GrapeArgs),
    /// Error map of a composite pulse.
    Compulse(commands::CompulseArgs),
    /// Memory error map or toggling-frame phase test of a decoupling sequence.
    Dd(commands::DdArgs),
    /// Compile a time-optimal refocusing program.
    Refocus(commands::RefocusArgs),
    /// Prepare a pseudo-pure state.
    Pps(commands::PpsArgs),
    /// Fidelity between two matrices read from files.
    Fid(commands::FidArgs),
}

/// Collects the report and the artifact of one run.
pub struct Run {
    pub seed: u64,
    quiet: bool,
    out: Option<PathBuf>,
}

impl Run {
    pub fn report(&self, line: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", line.as_ref());
        }
    }

    pub fn emit(&self, artifact: &str) -> Result<()> {
        match &self.out {
            Some(p) => std::fs::write(p, artifact).with_context(|| format!("writing {}", p.display()))?,
            None => std::io::stdout().lock().write_all(artifact.as_bytes())?,
        }
        Ok(())
    }
}

fn run(cli: Cli) -> Result<()> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let ctx = Run {
        seed: cli.seed,
        quiet: cli.quiet,
        out: cli.out.clone(),
    };
    ctx.report(format!("# spinforge {} seed={}", spinforge::io::VERSION, cli.seed));
    ctx.report(format!("# threads={} out={:?}", cli.threads, cli.out));
    ctx.report(format!("# config {:?}", cli.command));
    match &cli.command {
        Command::Grape(a) => commands::grape(&ctx, a),
        Command::Compulse(a) => commands::compulse(&ctx, a),
        Command::Dd(a) => commands::dd(&ctx, a),
        Command::Refocus(a) => commands::refocus(&ctx, a),
        Command::Pps(a) => commands::pps(&ctx, a),
        Command::Fid(a) => commands::fid(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
