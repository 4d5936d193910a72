use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use warpflow::commands::{self, Options};

/// Volume-preserving curvature flow of star-shaped radial graphs in
/// warped-product spaces.
#[derive(Parser)]
#[command(name = "warpflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the flow and write records, snapshots, and a summary.
    Run(Common),
    /// Evaluate the admissibility conditions of the ambient profile.
    Check(Common),
    /// Run the identity, Minkowski, and evolution-equation oracles.
    Verify(Common),
    /// Tabulate leaf area and enclosed volume over a list of radii.
    Profile {
        #[command(flatten)]
        common: Common,
        /// Comma-separated radii, e.g. `1,1.5,2`.
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
    },
}

#[derive(Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: the config's `output.directory`, else `out/` next to the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Suppress progress output on stdout.
    #[arg(long)]
    quiet: bool,
}

impl Common {
    fn options(self, radii: Option<Vec<f64>>) -> Options {
        Options { config: self.config, out: self.out, quiet: self.quiet, radii }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // Usage errors share the config-error code; help and version exit 0.
            return ExitCode::from(if e.use_stderr() { commands::EXIT_CONFIG as u8 } else { 0 });
        }
    };
    let code = match cli.command {
        Command::Run(c) => commands::cmd_run(&c.options(None)),
        Command::Check(c) => commands::cmd_check(&c.options(None)),
        Command::Verify(c) => commands::cmd_verify(&c.options(None)),
        Command::Profile { common, radii } => commands::cmd_profile(&common.options(radii)),
    };
    ExitCode::from(code as u8)
}
