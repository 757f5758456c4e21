use clap::{Args, Parser, Subcommand};
use cqpolar::cli::{parse_config, run, Command, DecodeMode, RunOptions};
use cqpolar::Error;
use std::path::PathBuf;
use std::process::ExitCode;

/// Classical-quantum polar code experiments.
#[derive(Parser)]
#[command(name = "cqpolar", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Holevo information, fidelity and single-use measurement figures.
    Info(Flags),
    /// Per-index F, I, Z_FC, Z_Hel and good-set membership.
    Synth(Flags),
    /// Information set and error bound of the configured code.
    Select(Flags),
    /// Block error of the successive-cancellation decoder.
    Decode(Flags),
    /// Explicit two-, four- and eight-bit test identities.
    VerifySmallcodes(Flags),
    /// Fuchs-Caves optimality and error bounds on the configured channel.
    FcTest(Flags),
    /// BPSK collective-fraction curve.
    BosonicCurve(Flags),
    /// F_i <= Z_FC,i and the good-set inclusion.
    SubsetCheck(Flags),
}

#[derive(Args)]
struct Flags {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Root seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Monte Carlo trials, overriding the config.
    #[arg(long)]
    trials: Option<u64>,
    /// Exact decoding error by enumeration.
    #[arg(long, conflicts_with = "monte_carlo")]
    exact: bool,
    /// Decoding error by simulation.
    #[arg(long)]
    monte_carlo: bool,
    /// Number of curve points.
    #[arg(long)]
    points: Option<usize>,
    /// Logarithmic energy spacing (`--log-spacing=false` for linear).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    log_spacing: Option<bool>,
    #[arg(long, hide = true)]
    corrupt_f: Option<usize>,
}

impl Cmd {
    fn split(self) -> (Command, Flags) {
        match self {
            Cmd::Info(f) => (Command::Info, f),
            Cmd::Synth(f) => (Command::Synth, f),
            Cmd::Select(f) => (Command::Select, f),
            Cmd::Decode(f) => (Command::Decode, f),
            Cmd::VerifySmallcodes(f) => (Command::VerifySmallCodes, f),
            Cmd::FcTest(f) => (Command::FcTest, f),
            Cmd::BosonicCurve(f) => (Command::BosonicCurve, f),
            Cmd::SubsetCheck(f) => (Command::SubsetCheck, f),
        }
    }
}

fn execute(cli: Cli) -> Result<(), Error> {
    let (command, flags) = cli.command.split();
    let text = std::fs::read_to_string(&flags.config)
        .map_err(|e| Error::Config(format!("{}: {e}", flags.config.display())))?;
    let config = parse_config(&text)?;
    let options = RunOptions {
        seed: flags.seed,
        out: flags.out,
        trials: flags.trials,
        mode: match (flags.exact, flags.monte_carlo) {
            (true, _) => Some(DecodeMode::Exact),
            (_, true) => Some(DecodeMode::MonteCarlo),
            _ => None,
        },
        points: flags.points,
        log_spacing: flags.log_spacing,
        corrupt_f: flags.corrupt_f,
    };
    let summary = run(command, &config, &options)?;
    println!("{command}: {}", summary.message);
    for a in &summary.artifacts {
        println!("  {}  {}", a.sha256, summary.out_dir.join(&a.file).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.category().exit_code() as u8)
        }
    }
}
