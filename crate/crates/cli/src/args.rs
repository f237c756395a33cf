use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use cweno::harness::{GridKind, TestId};
use cweno::solver::{Integrator, SourceQuadrature};

#[derive(Parser, Debug)]
#[command(name = "cweno", version, about = "CWENO finite volume experiments", args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Grid refinement study of a smooth test; writes `N,error,rate`.
    #[command(args_override_self = true)]
    Convergence {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Runs a named test; writes `x,comp0,comp1,...` at each output time.
    #[command(args_override_self = true)]
    Solve {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Lake at rest over a random bottom; writes the largest discharge
    /// and surface deviation at the final time.
    #[command(args_override_self = true)]
    Wellbalance {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Range of the reconstruction on a cell containing a jump, for
    /// D = 0.01..0.99; writes `d0,D,min,max`.
    #[command(args_override_self = true)]
    Discscan {
        #[command(flatten)]
        scheme: SchemeArgs,
    },
    /// Indicator ratio I[P_0]/I[P_opt] on Heaviside data, minimised over
    /// the jump position; writes `order,d0,h,ratio`.
    #[command(name = "property-r", args_override_self = true)]
    PropertyR {
        #[command(flatten)]
        scheme: SchemeArgs,
        /// Cell counts per unit length; the cell sizes are h = 1/N
        #[arg(long = "N", value_delimiter = ',', action = ArgAction::Set)]
        n: Vec<usize>,
    },
}

/// Reconstruction parameters and output, shared by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct SchemeArgs {
    /// Order of accuracy (3, 5, 7 or 9); comma-separated where a list is allowed
    #[arg(long, value_delimiter = ',', action = ArgAction::Set, value_parser = parse_order)]
    pub order: Vec<usize>,
    /// Linear coefficient of the central polynomial, in (0, 1); comma-separated for scans
    #[arg(long, value_delimiter = ',', action = ArgAction::Set)]
    pub d0: Vec<f64>,
    /// Scale of epsilon = eps_hat * h^p
    #[arg(long)]
    pub eps_hat: Option<f64>,
    /// Power p of epsilon = eps_hat * h^p
    #[arg(long, value_parser = clap::value_parser!(i32).range(0..=2))]
    pub eps_power: Option<i32>,
    /// Exponent t of the nonlinear weights (at least 2)
    #[arg(long)]
    pub t_exp: Option<i32>,
    /// Output file; standard output when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// File of `key=value` lines, one per flag; flags on the command line win
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: one per core); 1 runs sequentially
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Time evolution parameters.
#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Test problem (see the list below)
    #[arg(long)]
    pub test: Option<TestId>,
    /// Model of the test (advection, burgers, euler, euler_radial, swe);
    /// selects its first test when --test is absent
    #[arg(long)]
    pub model: Option<String>,
    /// Number of cells, comma-separated where a list is allowed
    #[arg(long = "N", value_delimiter = ',', action = ArgAction::Set)]
    pub n: Vec<usize>,
    /// Final time (default: the test's own output times)
    #[arg(long)]
    pub tend: Option<f64>,
    /// CFL number in (0, 1)
    #[arg(long)]
    pub cfl: Option<f64>,
    /// Reconstruct along characteristic variables
    #[arg(long)]
    pub char_proj: Option<OnOff>,
    /// Seed of random grids and random bottoms
    #[arg(long)]
    pub seed: Option<u64>,
    /// uniform or random:<max size ratio>
    #[arg(long)]
    pub grid: Option<GridKind>,
    /// Source quadrature: gauss:<nodes> or richardson:<order>
    #[arg(long)]
    pub quad: Option<SourceQuadrature>,
    /// Well-balanced shallow water scheme
    #[arg(long)]
    pub wb: Option<OnOff>,
    /// Butcher tableau file: stage count, rows of A, b, c
    #[arg(long)]
    pub tableau: Option<PathBuf>,
    /// Built-in integrator: ssprk3, rk4 or extrap8
    #[arg(long, conflicts_with = "tableau")]
    pub integrator: Option<Integrator>,
    /// Gravitational constant of the shallow water tests
    #[arg(long)]
    pub gravity: Option<f64>,
    /// Order of the reference run of swe_smooth
    #[arg(long, value_parser = parse_order)]
    pub ref_order: Option<usize>,
    /// Cells of the reference run of swe_smooth
    #[arg(long)]
    pub ref_n: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OnOff {
    On,
    Off,
}

impl OnOff {
    pub fn is_on(self) -> bool {
        self == OnOff::On
    }
}

fn parse_order(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(o @ (3 | 5 | 7 | 9)) => Ok(o),
        _ => Err(format!("order must be 3, 5, 7 or 9, got `{s}`")),
    }
}

fn tests_help() -> String {
    let mut text = String::from("Tests:\n");
    for t in TestId::ALL {
        text.push_str(&format!("  {:<14} Test {}: {}\n", t.name(), t.number(), t.description()));
    }
    text
}

pub fn command() -> clap::Command {
    let help = tests_help();
    let mut cmd = Cli::command().after_help(help.clone());
    for name in ["convergence", "solve", "wellbalance"] {
        cmd = cmd.mut_subcommand(name, |c| c.after_help(help.clone()));
    }
    cmd
}

/// Parses the command line after splicing in the `--config` file.
pub fn parse(argv: Vec<OsString>) -> Result<Cli, ParseFailure> {
    let argv = splice_config(argv)?;
    let matches = command().try_get_matches_from(argv).map_err(ParseFailure::Clap)?;
    Cli::from_arg_matches(&matches).map_err(ParseFailure::Clap)
}

#[derive(Debug)]
pub enum ParseFailure {
    Clap(clap::Error),
    Config(String),
}

/// Inserts the flags of a `--config` file right after the subcommand, so
/// that flags given on the command line override them.
fn splice_config(argv: Vec<OsString>) -> Result<Vec<OsString>, ParseFailure> {
    let args: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut path = None;
    for (i, a) in args.iter().enumerate() {
        if a == "--config" {
            path = args.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else { return Ok(argv) };
    let extra = config_flags(Path::new(&path))?;
    let Some(sub) = args.iter().skip(1).position(|a| !a.starts_with('-')) else { return Ok(argv) };
    let mut out = argv;
    let at = sub + 2;
    out.splice(at..at, extra.into_iter().map(OsString::from));
    Ok(out)
}

fn config_flags(path: &Path) -> Result<Vec<String>, ParseFailure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ParseFailure::Config(format!("cannot read config `{}`: {e}", path.display())))?;
    let mut flags = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ParseFailure::Config(format!("{}:{}: expected key=value", path.display(), k + 1)))?;
        let key = key.trim().trim_start_matches("--");
        if key == "config" {
            return Err(ParseFailure::Config(format!("{}:{}: nested config files", path.display(), k + 1)));
        }
        flags.push(format!("--{key}"));
        flags.push(value.trim().to_string());
    }
    Ok(flags)
}
