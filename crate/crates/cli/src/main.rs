//! `jetforms`: variational operators and Lepage equivalents for problem
//! files.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use jetforms_core::varcalc::LepageKind;

#[derive(Parser, Debug)]
#[command(
    name = "jetforms",
    version,
    about = "Euler-Lagrange forms, Lepage equivalents and their checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Highest jet order the engine may introduce.
    #[arg(long, global = true, env = "JETFORMS_MAX_ORDER", default_value_t = 8)]
    pub max_order: usize,
    /// Write the result to a file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Print whole residuals on verification failures.
    #[arg(long, global = true)]
    pub verbose: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Euler-Lagrange source form.
    El { file: PathBuf },
    /// A Lepage equivalent of the Lagrangian.
    Lepage {
        #[arg(long, value_enum)]
        kind: Kind,
        file: PathBuf,
    },
    /// Vainberg-Tonti Lagrangian of the Euler-Lagrange form.
    Vt { file: PathBuf },
    /// Splitting of the Lagrangian into its Vainberg-Tonti part and h dα.
    Split { file: PathBuf },
    /// Verify Lepage conditions, closure or the homotopy identity.
    Check(CheckArgs),
    /// Noether current of a projectable vector field.
    Noether {
        /// Components as `name=expr` pairs separated by `;`, e.g. `t=1` or
        /// `phi=phi`; omitted components are zero.
        #[arg(long)]
        xi: String,
        #[arg(long, value_enum, default_value_t = Kind::Principal)]
        kind: Kind,
        file: PathBuf,
    },
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("mode").required(true).args(["lepage", "closure", "homotopy"])))]
pub struct CheckArgs {
    /// hθ = λ and p1 dθ is the Euler-Lagrange form.
    #[arg(long)]
    pub lepage: bool,
    /// dΦ = 0 (holds exactly for trivial Lagrangians).
    #[arg(long)]
    pub closure: bool,
    /// ρ = I dρ + d Iρ + pullback of ρ to the zero section.
    #[arg(long)]
    pub homotopy: bool,
    /// Lepage equivalent to check; all applicable ones for --lepage.
    #[arg(long, value_enum)]
    pub kind: Option<Kind>,
    /// Also evaluate the residuals at this many random jet points.
    #[arg(long)]
    pub numeric: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    pub file: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Latex,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Principal,
    Fundamental,
    Canonical,
    Reduced,
}

impl From<Kind> for LepageKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Principal => LepageKind::Principal,
            Kind::Fundamental => LepageKind::Fundamental,
            Kind::Canonical => LepageKind::Canonical,
            Kind::Reduced => LepageKind::Reduced,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(outcome) => {
            let mut text = outcome.text;
            if !text.ends_with('\n') {
                text.push('\n');
            }
            match &cli.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, text) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                }
                None => print!("{text}"),
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
