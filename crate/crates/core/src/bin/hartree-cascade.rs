use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use hartree_cascade::cli::{error_code, run, Command};
use hartree_cascade::config::RunConfig;

#[derive(Clone, Copy, ValueEnum)]
enum Cmd {
    Pset,
    Layers,
    Expand,
    Hydro,
    Nls,
    Compare,
    Blowup,
    Sweep,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Pset => Command::Pset,
            Cmd::Layers => Command::Layers,
            Cmd::Expand => Command::Expand,
            Cmd::Hydro => Command::Hydro,
            Cmd::Nls => Command::Nls,
            Cmd::Compare => Command::Compare,
            Cmd::Blowup => Command::Blowup,
            Cmd::Sweep => Command::Sweep,
        }
    }
}

/// Radial Hartree / Grenier / Euler–Poisson laboratory.
#[derive(Parser)]
#[command(version, about)]
struct Args {
    command: Cmd,
    /// TOML run configuration (defaults apply to missing tables and keys).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads for parallel sweeps.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    verbose: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    env_logger::Builder::new().filter_level(if args.verbose { log::LevelFilter::Debug } else { log::LevelFilter::Warn }).init();
    let cfg = match &args.config {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    };
    let cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(jobs) = args.jobs.or(cfg.run.jobs) {
        if jobs == 0 || rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global().is_err() {
            eprintln!("error: cannot start {jobs} worker threads");
            return ExitCode::from(2);
        }
    }
    match run(args.command.into(), &cfg, &args.out) {
        Ok(o) => {
            println!("{}", o.summary);
            for f in &o.files {
                log::info!("wrote {}", f.display());
            }
            ExitCode::from(o.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_code(&e) as u8)
        }
    }
}
