use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pricing_cli::commands::{cmd_batch, cmd_check, cmd_enforce, cmd_gen, CommandOutput, Format, Options};
use pricing_cli::gen::Size;
use pricing_core::duality::Mode;
use pricing_core::game::DEFAULT_CAP;

#[derive(Parser)]
#[command(name = "pricer", version, about = "Exact resource prices that enforce a target load as an equilibrium")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Enforce,
    WeakMarket,
    Unique,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Text,
}

#[derive(clap::Args)]
struct Common {
    /// Overrides the mode declared in the file.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    /// Largest number of strategies or profiles enumerated before giving up.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    candidate_cap: usize,
}

impl Common {
    fn options(&self) -> Options {
        Options {
            mode: self.mode.map(|m| match m {
                ModeArg::Enforce => Mode::Enforce,
                ModeArg::WeakMarket => Mode::WeakMarket,
                ModeArg::Unique => Mode::Unique,
            }),
            cap: self.candidate_cap,
            format: match self.format {
                FormatArg::Json => Format::Json,
                FormatArg::Text => Format::Text,
            },
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solves an instance file and prints a report.
    Enforce {
        path: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Verifies a certificate report against its instance file.
    Check {
        path: PathBuf,
        certificate: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Prints a generated instance file.
    Gen {
        family: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
    },
    /// Solves every instance file in a directory.
    Batch {
        dir: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let out: CommandOutput = match &cli.command {
        Command::Enforce { path, common } => cmd_enforce(path, &common.options()),
        Command::Check { path, certificate, common } => cmd_check(path, certificate, &common.options()),
        Command::Gen { family, seed, n, m, k } => cmd_gen(family, *seed, &Size { n: *n, m: *m, k: *k }),
        Command::Batch { dir, jobs, common } => cmd_batch(dir, *jobs, &common.options()),
    };
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    ExitCode::from(out.code as u8)
}
