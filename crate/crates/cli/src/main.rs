use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mangeron::solver::Method;
use mangeron_cli::commands::{cmd_check, cmd_convert, cmd_solve, cmd_verify, Outcome};
use mangeron_cli::config::{parse_grid, parse_p, Overrides};
use mangeron_cli::datafile::DataKind;
use mangeron_cli::error::Result;

#[derive(Parser, Debug)]
#[command(
    name = "mangeron",
    version,
    about = "Solve the generalized Mangeron equation on a rectangle"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// Run configuration (TOML)
    #[arg(long)]
    config: PathBuf,

    /// Grid size, overriding the config: N1xN2 or N
    #[arg(long, value_parser = parse_grid_arg)]
    grid: Option<(usize, usize)>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve and write solution.csv and report.json
    Solve {
        #[command(flatten)]
        common: Common,
        /// Output directory
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Solve even when the data fail the admissibility check
        #[arg(long)]
        force: bool,
        /// auto, neumann, dense or coupled
        #[arg(long)]
        method: Option<Method>,
        /// Norm exponent for the reported norms: a number >= 1 or inf
        #[arg(long, value_parser = parse_p_arg)]
        p: Option<mangeron::fields::NormSpec>,
    },
    /// Convert boundary data between the classical and nonclassical forms
    Convert {
        #[command(flatten)]
        common: Common,
        /// Output directory
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Target form; defaults to the other one
        #[arg(long)]
        to: Option<DataKind>,
    },
    /// Check corner matching and the data constraints
    Check {
        #[command(flatten)]
        common: Common,
        /// Also write check.json here
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a convergence suite: smooth-basic, exact-bilinear or piecewise-a00
    Verify {
        suite: String,
        /// Also write CSV tables and a JSON summary here
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_parser = parse_p_arg)]
        p: Option<mangeron::fields::NormSpec>,
    },
}

fn parse_grid_arg(s: &str) -> std::result::Result<(usize, usize), String> {
    parse_grid(s).map_err(|e| e.to_string())
}

fn parse_p_arg(s: &str) -> std::result::Result<mangeron::fields::NormSpec, String> {
    parse_p(s).map_err(|e| e.to_string())
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Solve {
            common,
            out,
            force,
            method,
            p,
        } => {
            let ov = Overrides {
                method,
                grid: common.grid,
                p,
                force,
            };
            cmd_solve(&common.config, &out, &ov)
        }
        Command::Convert { common, out, to } => {
            let ov = Overrides {
                grid: common.grid,
                ..Overrides::default()
            };
            cmd_convert(&common.config, &out, to, &ov)
        }
        Command::Check { common, out } => {
            let ov = Overrides {
                grid: common.grid,
                ..Overrides::default()
            };
            cmd_check(&common.config, out.as_deref(), &ov)
        }
        Command::Verify { suite, out, p } => cmd_verify(&suite, out.as_deref(), p),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            ExitCode::from(outcome.exit as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit() as u8)
        }
    }
}
