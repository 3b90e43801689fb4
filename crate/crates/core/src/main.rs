use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use scrunch::harness::{run_command, Command, Config};

#[derive(Parser)]
#[command(name = "scrunch", version, about = "Pulled metric spaces, sewn manifolds and their limits")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// Plain-text `key = value` config with `[section]` headers.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Pulled-space ball volumes, total volume and tube exponent.
    Pull(Common),
    /// Plan and sew a region; diameter certificate and scrunch-map defect.
    Sew(Common),
    /// Rotationally symmetric profile: embedding, round trip, curvature.
    Rotsym(Common),
    /// Weak scalar curvature and Bishop–Gromov density.
    Wscal(Common),
    /// Method I convergence sequence.
    Method1(Common),
    /// Method II diagonal sequence over stripe manifolds.
    Method2(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, common) = match cli.cmd {
        Cmd::Pull(c) => (Command::Pull, c),
        Cmd::Sew(c) => (Command::Sew, c),
        Cmd::Rotsym(c) => (Command::RotSym, c),
        Cmd::Wscal(c) => (Command::WScal, c),
        Cmd::Method1(c) => (Command::Method1, c),
        Cmd::Method2(c) => (Command::Method2, c),
    };
    let result = common
        .config
        .as_deref()
        .map(Config::load)
        .unwrap_or_else(|| Ok(Config::default()))
        .and_then(|mut cfg| run_command(cmd, &mut cfg, common.seed, &common.out));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("scrunch: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
