use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ksmv::mild::SolveMode;
use ksmv::Error;
use ksmv_cli::commands::{self, Context};
use ksmv_cli::config::RunConfig;
use ksmv_cli::exit_code;

#[derive(Parser)]
#[command(
    name = "ksmv",
    version,
    about = "Keller-Segel mild solver, particles and density bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (defaults apply when absent).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; falls back to the config, then $KSMV_OUT, then ./ksmv-out.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (all cores by default).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides particles.seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// -v for info, -vv for debug logging.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand)]
enum Command {
    /// Kernel hypotheses and the contraction horizon.
    CheckKernel,
    /// Solve the mild equation and the chemical field.
    Solve {
        #[arg(long, value_enum)]
        mode: Option<Mode>,
    },
    /// Particle system against the mild solution.
    Particles,
    /// Sgn-drift density checks and the density bound.
    Qz,
    /// Picard contraction and window restart.
    Picard,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    March,
    PicardRestart,
}

fn run(cli: Cli) -> Result<bool, Error> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::parse("", std::path::Path::new("."))?,
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Usage(e.to_string()))?;
    }
    let out = commands::output_dir(cli.out.as_deref(), &cfg);
    std::fs::create_dir_all(&out)?;
    let seed = cli.seed.unwrap_or(cfg.particles.seed);
    let ctx = Context { cfg, out, seed };
    let (name, report) = match cli.command {
        Command::CheckKernel => ("check-kernel", commands::check_kernel(&ctx)?),
        Command::Solve { mode } => {
            let mode = mode.map(|m| match m {
                Mode::March => SolveMode::March,
                Mode::PicardRestart => SolveMode::PicardWithRestart(ctx.cfg.picard),
            });
            ("solve", commands::solve(&ctx, mode)?)
        }
        Command::Particles => ("particles", commands::particles(&ctx)?),
        Command::Qz => ("qz", commands::qz(&ctx)?),
        Command::Picard => ("picard", commands::picard_cmd(&ctx)?),
    };
    let mut report = report;
    report.print();
    report.write(&ctx.out.join(format!("{name}-report.json")))?;
    Ok(report.pass())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("ksmv: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
