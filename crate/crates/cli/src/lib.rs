//! Command-line front end for `pindex-core`.
//!
//! [`run`] parses an argument vector, dispatches one subcommand and returns
//! the JSON report together with the process exit code. Usage errors are
//! reported on stderr only.

mod commands;
pub mod plot;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use pindex_core::Exec;

pub use report::{Diagnostic, Report, Status};

#[derive(Parser, Debug)]
#[command(name = "pindex", version, about = "Indices of planar singularities and Euler-characteristic checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Index of a singularity by winding, tangency census, or both.
    Index(IndexArgs),
    /// Tangencies of the field with a circle, sorted by angle.
    Tangencies(TangencyArgs),
    /// Discrete Poincare-Hopf sum on a closed triangulated surface.
    Ph(MeshArgs),
    /// Poincare's 1885 vertex/edge/face counting identities.
    Poincare1885(MeshArgs),
    /// Lift of a non-orientable index to the orientation double cover.
    Lift(LiftArgs),
    /// Riemann-Hurwitz value, optionally with the index reduction chain.
    Rh(RhArgs),
    /// Euler obstruction verdict for a bag with pipes.
    Feasible(FeasibleArgs),
    /// Replay or verify concavity-reducing surgeries on a circuit.
    Surgery(SurgeryArgs),
    /// Phase portrait as SVG, or direction samples as CSV.
    Plot(PlotArgs),
    /// List builtin singularities, optionally checking the loop-free bound.
    Catalog(CatalogArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Index(_) => "index",
            Command::Tangencies(_) => "tangencies",
            Command::Ph(_) => "ph",
            Command::Poincare1885(_) => "poincare1885",
            Command::Lift(_) => "lift",
            Command::Rh(_) => "rh",
            Command::Feasible(_) => "feasible",
            Command::Surgery(_) => "surgery",
            Command::Plot(_) => "plot",
            Command::Catalog(_) => "catalog",
        }
    }
}

fn parse_point(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [x, y] = parts[..] else {
        return Err(format!("expected X,Y, got `{s}`"));
    };
    let num = |t: &str| t.parse::<f64>().map_err(|_| format!("`{t}` is not a number"));
    Ok([num(x)?, num(y)?])
}

#[derive(Args, Debug, Clone)]
pub struct NumericArgs {
    /// Initial number of samples on the circle.
    #[arg(long, default_value_t = 256)]
    pub samples: usize,
    /// Maximum bisection depth per sample interval.
    #[arg(long, default_value_t = 24)]
    pub max_depth: u32,
    /// Run on one thread.
    #[arg(long)]
    pub sequential: bool,
}

impl NumericArgs {
    pub fn exec(&self) -> Exec {
        if self.sequential {
            Exec::Sequential
        } else {
            Exec::Parallel
        }
    }
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Winding,
    Bendixson,
    Hamburger,
    All,
}

#[derive(Args, Debug)]
pub struct IndexArgs {
    /// Field file, inline JSON, or catalog name.
    #[arg(long)]
    pub field: String,
    /// Circle centre; defaults to the field's singular point.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub center: Option<[f64; 2]>,
    #[arg(long, allow_hyphen_values = true)]
    pub radius: f64,
    #[arg(long, value_enum, default_value_t = Method::All)]
    pub method: Method,
    #[command(flatten)]
    pub numeric: NumericArgs,
}

#[derive(Args, Debug)]
pub struct TangencyArgs {
    #[arg(long)]
    pub field: String,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub center: Option<[f64; 2]>,
    #[arg(long, allow_hyphen_values = true)]
    pub radius: f64,
    /// Samples for root bracketing.
    #[arg(long, default_value_t = 2048)]
    pub samples: usize,
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false, id = "surface")]
pub struct MeshArgs {
    /// Triangulation file in the `tri` format.
    #[arg(long, group = "surface")]
    pub mesh: Option<PathBuf>,
    /// Built-in orientable fixture of this genus.
    #[arg(long, group = "surface")]
    pub genus: Option<u32>,
    /// Built-in non-orientable fixture with this many crosscaps.
    #[arg(long, group = "surface")]
    pub crosscaps: Option<u32>,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false, id = "lift_input")]
pub struct LiftArgs {
    /// Doubled index of a line-model singularity; runs the numeric check.
    #[arg(long, group = "lift_input", allow_hyphen_values = true)]
    pub two_j: Option<i64>,
    /// Index `p/2`; formula only.
    #[arg(long, group = "lift_input", allow_hyphen_values = true)]
    pub j: Option<String>,
    /// Upstairs index; returns the downstairs index.
    #[arg(long, group = "lift_input", allow_hyphen_values = true)]
    pub descend: Option<String>,
    /// Downstairs circle radius for the numeric check.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub radius: f64,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub center: Option<[f64; 2]>,
    #[command(flatten)]
    pub numeric: NumericArgs,
}

#[derive(Args, Debug)]
pub struct RhArgs {
    /// Euler characteristic of the base surface.
    #[arg(long, allow_hyphen_values = true)]
    pub chi: i64,
    /// Number of branch points; defaults to the number of non-orientable
    /// singularities when a partition is given.
    #[arg(long)]
    pub deg: Option<u64>,
    /// Indices of orientable singularities, e.g. `1,-1`.
    #[arg(long, allow_hyphen_values = true)]
    pub orientable: Option<String>,
    /// Indices of non-orientable singularities, e.g. `1/2,1/2,-1/2`.
    #[arg(long, allow_hyphen_values = true)]
    pub non_orientable: Option<String>,
}

#[derive(Args, Debug)]
pub struct FeasibleArgs {
    /// Euler characteristic of the bag.
    #[arg(long, allow_hyphen_values = true)]
    pub chi_bag: i64,
    #[arg(long)]
    pub pipes: u32,
    /// Cap indices to test instead of searching, e.g. `1/2,0,1`.
    #[arg(long, allow_hyphen_values = true)]
    pub caps: Option<String>,
}

#[derive(Args, Debug)]
pub struct SurgeryArgs {
    /// Convex corners of the starting circuit.
    #[arg(long)]
    pub c: u64,
    /// Concave corners of the starting circuit.
    #[arg(long)]
    pub cprime: u64,
    /// Steps: `A` or `B`, optionally `A:<extra convex lost>:<extra concave lost>`.
    #[arg(long, default_value = "")]
    pub steps: String,
    /// Observed `(c, c')` after each step, as `c:c',c:c',...`; switches to
    /// verification.
    #[arg(long)]
    pub observed: Option<String>,
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    #[arg(long)]
    pub field: String,
    /// Output file; `.csv` writes direction samples, anything else SVG.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 40, value_parser = clap::value_parser!(u32).range(2..=400))]
    pub grid: u32,
    /// Overlay this circle and its tangencies.
    #[arg(long, allow_hyphen_values = true)]
    pub circle: Option<f64>,
    /// Overlay circle centre; defaults to the singular point.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub center: Option<[f64; 2]>,
    /// Half width of the viewed square.
    #[arg(long, allow_hyphen_values = true)]
    pub extent: Option<f64>,
}

#[derive(Args, Debug)]
pub struct CatalogArgs {
    /// One entry (also `z^k`, -8 <= k <= 8).
    #[arg(long)]
    pub name: Option<String>,
    /// Check that loop-free entries have index at most 1.
    #[arg(long)]
    pub loop_free_bound: bool,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub radius: f64,
}

/// Result of one invocation.
#[derive(Debug)]
pub struct Outcome {
    pub report: Option<Report>,
    pub stdout: String,
    pub stderr: String,
    pub exit_code: i32,
}

/// Parse `argv` (program name first) and run one subcommand.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    Outcome { report: None, stdout: text, stderr: String::new(), exit_code: 0 }
                }
                _ => Outcome { report: None, stdout: String::new(), stderr: text, exit_code: 2 },
            };
        }
    };
    let echo: Vec<String> = argv.iter().skip(1).cloned().collect();
    let report = commands::dispatch(&cli.command, echo);
    let stderr = match report.status {
        Status::InputError => {
            let d = &report.diagnostics[0];
            format!("pindex {}: {}: {}\n", report.command, d.code, d.message)
        }
        _ => String::new(),
    };
    Outcome { stdout: report.to_json(), stderr, exit_code: report.exit_code, report: Some(report) }
}
