use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use refprice::cli::{load_config, run, ExperimentConfig, Mode};

#[derive(Parser)]
#[command(name = "refprice", version, about = "Reference-price competition experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the mode named in the config.
    Run(Common),
    /// Two-firm mirror-descent dynamics.
    Simulate(Common),
    /// The three-player game with nature posting the reference price.
    SimulateInduced(Common),
    /// Best-response dynamics from an initial reference price.
    BestResponse(Common),
    /// Closed-form stable equilibrium.
    Sne(Common),
    /// Constant step-size region and contraction certificate.
    ConstRegion(Common),
    /// Rate constant for decreasing steps.
    RateConstant(Common),
    /// Parameter sweeps.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: the config's output.dir, else ./out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the horizon T.
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    quiet: bool,
}

impl Command {
    fn split(self) -> (Option<Mode>, Common) {
        match self {
            Command::Run(c) => (None, c),
            Command::Simulate(c) => (Some(Mode::Simulate), c),
            Command::SimulateInduced(c) => (Some(Mode::SimulateInduced), c),
            Command::BestResponse(c) => (Some(Mode::BestResponse), c),
            Command::Sne(c) => (Some(Mode::Sne), c),
            Command::ConstRegion(c) => (Some(Mode::ConstRegion), c),
            Command::RateConstant(c) => (Some(Mode::RateConstant), c),
            Command::Sweep(c) => (Some(Mode::Sweep), c),
        }
    }
}

fn prepare(mode: Option<Mode>, args: &Common) -> Result<ExperimentConfig, refprice::cli::ConfigError> {
    let mut cfg = load_config(&args.config)?;
    if let Some(m) = mode {
        cfg.mode = m;
    }
    if let Some(h) = args.horizon {
        cfg.horizon = h;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (mode, args) = cli.command.split();
    let cfg = match prepare(mode, &args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let out = args
        .out
        .clone()
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    match run(&cfg, &out) {
        Ok(summary) => {
            if !args.quiet {
                println!("{}: {}", summary.mode, summary.headline);
                for f in &summary.files {
                    println!("  wrote {}", f.display());
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
