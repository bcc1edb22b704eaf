use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use expander_core::profiles::Family;

/// Comma-separated values, e.g. `33,65,129`.
#[derive(Debug, Clone, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T>
where
    T::Err: std::fmt::Display,
{
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.trim().is_empty() {
            return Ok(List(Vec::new()));
        }
        s.split(',').map(|p| p.trim().parse::<T>().map_err(|e| format!("{p:?}: {e}"))).collect::<Result<_, _>>().map(List)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Disk,
    Neck,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::Disk => Family::Disk,
            FamilyArg::Neck => Family::Neck,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "expander",
    version,
    about = "Construct and verify rotationally symmetric expanding solitons of mean curvature flow",
    after_help = "Angles are in radians and profile lengths are arc length. Exit codes: 0 pass, 1 gate failure, \
                  2 configuration error, 3 computation error."
)]
pub struct Cli {
    /// File of `key = value` lines naming flags of the subcommand; flags on
    /// the command line override it.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form curvature of the cone C_α at one point.
    Cone(ConeArgs),
    /// Integrate one profile curve of a rotationally symmetric expander.
    Profile(ProfileArgs),
    /// Find the shooting parameters whose profiles are asymptotic to a cone.
    Shoot(ShootArgs),
    /// Smallest cone angle reached by the neck family.
    CriticalAngle(CriticalArgs),
    /// Grid-refinement study of the Jacobi identities on a revolved profile.
    Verify(VerifyArgs),
    /// Annulus decay of curvature on the far end of a revolved profile.
    Asymptotics(AsymptoticsArgs),
}

#[derive(Debug, Args)]
pub struct ConeArgs {
    /// Hypersurface dimension n ≥ 2.
    #[arg(long)]
    pub n: usize,
    /// Cone angle α in (0, π/2], radians.
    #[arg(long)]
    pub alpha: f64,
    /// Distance from the vertex.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// n − 1 link angles in radians [default: π/2 each].
    #[arg(long)]
    pub angles: Option<List<f64>>,
    /// Also check K random (n, α, r) against the discrete curvature engine.
    #[arg(long, value_name = "K", default_value_t = 0)]
    pub random: usize,
    /// Seed for --random.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the report as JSON.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

/// Integration settings shared by the ODE-based subcommands.
#[derive(Debug, Args, Clone)]
pub struct OdeArgs {
    /// Local error tolerance of the integrator.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Arc length to integrate to.
    #[arg(long, default_value_t = 60.0)]
    pub s_max: f64,
    /// Largest sample spacing in arc length.
    #[arg(long, default_value_t = 0.01)]
    pub sample_step: f64,
    /// Largest allowed |H − ½⟨γ, ν⟩| along a profile.
    #[arg(long, default_value_t = 1e-8)]
    pub residual_gate: f64,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    /// Height of a disk profile on the axis (negative for the lower sheet).
    #[arg(long, allow_hyphen_values = true)]
    pub z0: Option<f64>,
    /// Neck radius of a neck profile.
    #[arg(long)]
    pub x0: Option<f64>,
    #[command(flatten)]
    pub ode: OdeArgs,
    /// Write the profile as JSON.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Write the samples as CSV (s, x, z, theta).
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct ScanArgs {
    /// Lower end of the log-spaced scan of |z0| or x0.
    #[arg(long, default_value_t = 1e-2)]
    pub scan_min: f64,
    /// Upper end of the scan.
    #[arg(long, default_value_t = 1e2)]
    pub scan_max: f64,
    /// Scan points per decade.
    #[arg(long, default_value_t = 64)]
    pub per_decade: usize,
    /// Bisection tolerance on the asymptotic angle, radians.
    #[arg(long, default_value_t = 1e-6)]
    pub angle_tol: f64,
}

#[derive(Debug, Args)]
pub struct ShootArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    /// Target cone angle, radians.
    #[arg(long)]
    pub alpha: f64,
    #[command(flatten)]
    pub scan: ScanArgs,
    #[command(flatten)]
    pub ode: OdeArgs,
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CriticalArgs {
    /// Dimension n ≥ 3.
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub scan: ScanArgs,
    #[command(flatten)]
    pub ode: OdeArgs,
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Profile JSON written by `profile`.
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    /// Nodes per grid axis at each refinement level.
    #[arg(long, default_value = "33,65,129")]
    pub resolutions: List<usize>,
    /// Rotation axes for f_R: `ek` rotates the two highest other
    /// coordinates, `ei^ej` rotates the (i, j) plane.
    #[arg(long, default_value = "")]
    pub axes: List<String>,
    /// Constant vectors e_k for ⟨V, ν⟩.
    #[arg(long = "V", default_value = "")]
    pub v: List<String>,
    /// Arc-length window of the patch [default: 0.5..2.5 for disks, −2..2 for necks].
    #[arg(long, allow_hyphen_values = true)]
    pub s_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub s_max: Option<f64>,
    /// Also check the quotient identity for each f_R.
    #[arg(long)]
    pub quotient: bool,
    /// Eigenvalue λ of the quotient identity.
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
    /// Shift ε of the quotient identity.
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Required fitted order.
    #[arg(long, default_value_t = 1.9)]
    pub min_order: f64,
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Residual table as CSV (identity, spacing, sup, l2).
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AsymptoticsArgs {
    /// Profile JSON written by `profile`.
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    /// Inner radius of the first dyadic annulus.
    #[arg(long, default_value_t = 3.5)]
    pub r0: f64,
    /// Number of dyadic annuli.
    #[arg(long, default_value_t = 4)]
    pub annuli: usize,
    /// Extra f_R quantities, axes as in `verify`.
    #[arg(long, default_value = "")]
    pub axes: List<String>,
    /// Radial grid spacing in arc length.
    #[arg(long, default_value_t = 0.125)]
    pub spacing: f64,
    /// Nodes per angular axis.
    #[arg(long, default_value_t = 9)]
    pub angular_nodes: usize,
    /// Allowed relative deviation of r²|A|² from (n−1)cot²α̂ on the last annulus.
    #[arg(long, default_value_t = 0.05)]
    pub cone_tolerance: f64,
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Annulus table as CSV (r_lo, r_hi, quantity, sup, l2, fitted_slope).
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
}
