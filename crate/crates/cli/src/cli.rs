use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Interaction energies of rigid charge distributions, mountain-pass paths
/// and semirelativistic kinetic-energy checks.
///
/// Every subcommand writes one JSON object (or CSV rows with --format csv).
/// Exit status is 0 when the property check passes, 2 when it fails and 1
/// on usage or input errors. DISPERSIA_THREADS caps the worker threads.
#[derive(Debug, Parser)]
#[command(name = "dispersia", version)]
pub struct Cli {
    /// Seed for every random choice of the run.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    /// `series,parameter,value` rows.
    Csv,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Cartesian multipole moment of a density.
    Multipole(MultipoleArgs),
    /// Remainder of the truncated multipole expansion against brute force.
    Expand(ExpandArgs),
    /// Van der Waals coefficient of toy molecule pairs.
    Vdw(VdwArgs),
    /// Feshbach fixed point against dense ground energies.
    Feshbach(FeshbachArgs),
    /// Min-max relaxation of a path between two local minima.
    Mountainpass(MountainpassArgs),
    /// Rebuilds a path so that it stays below L_cut.
    Boundpath(BoundpathArgs),
    /// Pseudo-minimum descents on a multipolar interaction.
    Negativity(NegativityArgs),
    /// Connected components of a sampled negative sublevel set.
    Sublevel(SublevelArgs),
    /// Numerical checks of the operator √(1 − Δ) − 1.
    Semirel(SemirelArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Multipole(_) => "multipole",
            Command::Expand(_) => "expand",
            Command::Vdw(_) => "vdw",
            Command::Feshbach(_) => "feshbach",
            Command::Mountainpass(_) => "mountainpass",
            Command::Boundpath(_) => "boundpath",
            Command::Negativity(_) => "negativity",
            Command::Sublevel(_) => "sublevel",
            Command::Semirel(_) => "semirel",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct MultipoleArgs {
    /// Density file (JSON or CSV) or fixture:<dipole|quadrupole|octopole|planar-octopole>.
    #[arg(long)]
    pub density: String,
    #[arg(long)]
    pub order: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct ExpandArgs {
    #[arg(long)]
    pub rho1: String,
    #[arg(long)]
    pub rho2: String,
    /// Truncation order.
    #[arg(long = "K", default_value_t = 4)]
    pub k: usize,
    /// Separations, increasing.
    #[arg(long = "L", value_delimiter = ',', default_values_t = [40.0, 80.0, 160.0, 320.0])]
    pub l: Vec<f64>,
    /// Orientation of rho1: quaternion w,x,y,z or 9 row-major entries.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub u: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub v: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct VdwArgs {
    /// Frequency of the truncated isotropic oscillator used for both molecules.
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    /// Toy molecule files; both replace the oscillator.
    #[arg(long, requires = "mol2")]
    pub mol1: Option<PathBuf>,
    #[arg(long, requires = "mol1")]
    pub mol2: Option<PathBuf>,
    /// Haar-random orientation pairs.
    #[arg(long, default_value_t = 10)]
    pub samples: usize,
    /// Separation of the full-diagonalization fit.
    #[arg(long = "fit-L")]
    pub fit_l: Option<f64>,
    /// Additional random toy model pairs.
    #[arg(long, default_value_t = 0)]
    pub random_models: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct FeshbachArgs {
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 8)]
    pub dim: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct MountainpassArgs {
    /// Energy surface JSON.
    #[arg(long, required_unless_present = "toy", conflicts_with = "toy")]
    pub surface: Option<PathBuf>,
    /// Use the built-in two-parameter toy landscape.
    #[arg(long)]
    pub toy: bool,
    /// Start configuration, inline JSON or file.
    #[arg(long)]
    pub tau0: String,
    #[arg(long)]
    pub tau1: String,
    #[arg(long, default_value_t = 16)]
    pub nodes: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct BoundpathArgs {
    #[arg(long)]
    pub surface: PathBuf,
    /// Input path JSON.
    #[arg(long, conflicts_with_all = ["tau0", "tau1"])]
    pub path: Option<PathBuf>,
    /// Without --path, a geodesic from tau0 to tau1 is used.
    #[arg(long, requires = "tau1")]
    pub tau0: Option<String>,
    #[arg(long, requires = "tau0")]
    pub tau1: Option<String>,
    #[arg(long, default_value_t = 9)]
    pub nodes: usize,
    /// Lift the middle node of the input path to this multiple of L_cut.
    #[arg(long)]
    pub lift: Option<f64>,
    /// Cut-off separation; selected from --delta when absent.
    #[arg(long = "Lcut")]
    pub l_cut: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct NegativityArgs {
    #[arg(long)]
    pub rho1: String,
    #[arg(long)]
    pub rho2: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct SublevelArgs {
    #[arg(long)]
    pub rho1: String,
    #[arg(long)]
    pub rho2: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, default_value_t = 5000)]
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Symbol,
    Kernel,
    Commutator,
    Ims,
    Decay,
    Zhislin,
}

#[derive(Debug, Args, Serialize)]
pub struct SemirelArgs {
    #[arg(long, value_enum)]
    pub experiment: Experiment,
    /// Points per axis, a power of two; defaults depend on the experiment.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Box side length; defaults depend on the experiment.
    #[arg(long = "box")]
    pub box_len: Option<f64>,
}
