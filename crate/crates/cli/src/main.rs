mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Diagnostics for candidate self-similar blowup profiles of 3D Euler.
///
/// Exit status: 0 when every entry is PASS, INFO or INCONCLUSIVE; 1 when any
/// entry FAILs; 2 on usage or I/O errors.
#[derive(Parser, Debug)]
#[command(name = "ssguard", version, about)]
pub struct Cli {
    /// Report format on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Jsonl)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Line-delimited JSON: one header line, then one line per entry.
    Jsonl,
    /// Aligned text for terminals.
    Table,
}

#[derive(Args, Debug, Clone)]
pub struct Tol {
    /// Multiply every check tolerance by this factor.
    #[arg(long, default_value_t = 1.0)]
    pub tol_scale: f64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the full applicable battery on a profile file.
    Check {
        file: PathBuf,
        /// Replace the file's similarity exponent.
        #[arg(long)]
        gamma_override: Option<f64>,
        #[command(flatten)]
        tol: Tol,
        /// Exponents for the L^p stretching identity.
        #[arg(long, value_delimiter = ',', default_value = "2")]
        lp: Vec<f64>,
        /// Certification radius at nodal points.
        #[arg(long)]
        eps_star: Option<f64>,
    },
    /// Self-similar residuals and Bernoulli checks only.
    Residual {
        file: PathBuf,
        #[command(flatten)]
        tol: Tol,
        #[arg(long, value_delimiter = ',', default_value = "2")]
        lp: Vec<f64>,
    },
    /// Stretching factor as a singular integral, split at a cutoff, with its bounds.
    Stretching {
        file: PathBuf,
        /// File of points (x y z per line) or `auto`.
        #[arg(long, default_value = "auto")]
        points: String,
        /// Inner/outer cutoff radius.
        #[arg(long = "L", default_value_t = 0.5)]
        cutoff: f64,
        /// Lebesgue exponent of the outer bound (accepts `inf`).
        #[arg(long, default_value = "2", value_parser = input::parse_exponent)]
        p: f64,
        /// Allowed relative gap between the integral and the strain contraction.
        #[arg(long, default_value_t = 1e-3)]
        rel_tol: f64,
        /// Gauss-Legendre nodes per radial panel.
        #[arg(long, default_value_t = 10)]
        radial: usize,
        /// Gauss-Legendre nodes in cos(theta).
        #[arg(long, default_value_t = 48)]
        polar: usize,
        /// Uniform nodes in phi.
        #[arg(long, default_value_t = 96)]
        azimuthal: usize,
    },
    /// Self-similar trajectories and the flow-map identities.
    Flow {
        file: PathBuf,
        /// File of labels (x y z per line) or `auto` (two 7-point patches, enabling the Weber check).
        #[arg(long, default_value = "auto")]
        seeds: String,
        /// Time window a:b; trajectories run for b - a from each label.
        #[arg(long, default_value = "0:1", allow_hyphen_values = true)]
        tau: String,
        /// Run the window in negative tau.
        #[arg(long)]
        backward: bool,
        /// Output samples over the window.
        #[arg(long, default_value_t = 8)]
        samples: usize,
        #[command(flatten)]
        tol: Tol,
    },
    /// Zeros of the transport velocity and the outgoing certificate.
    Nodal {
        file: PathBuf,
        #[arg(long)]
        eps_star: Option<f64>,
        #[command(flatten)]
        tol: Tol,
    },
    /// Drift of the self-similar circulation on an advected loop.
    Circulation {
        file: PathBuf,
        /// File of loop vertices (x y z per line).
        #[arg(long = "loop", conflicts_with = "circle")]
        loop_file: Option<PathBuf>,
        /// Horizontal circle `r z n` about the z axis.
        #[arg(long, num_args = 3, value_names = ["R", "Z", "N"], allow_hyphen_values = true)]
        circle: Option<Vec<f64>>,
        #[arg(long, default_value = "0:1", allow_hyphen_values = true)]
        tau: String,
        #[arg(long, default_value_t = 8)]
        samples: usize,
        #[command(flatten)]
        tol: Tol,
    },
    /// Meridional-plane diagnostics for axisymmetric profiles.
    Axisym {
        file: PathBuf,
        action: AxisymAction,
        /// Seeds (r z per line) or `auto`.
        #[arg(long, default_value = "auto")]
        seeds: String,
        #[arg(long, default_value = "0:1", allow_hyphen_values = true)]
        tau: String,
        /// Polygon vertices (r z per line) for `area`.
        #[arg(long)]
        polygon: Option<PathBuf>,
        /// Seed `r,z` for `alpha-limit`.
        #[arg(long, allow_hyphen_values = true)]
        seed: Option<String>,
        /// Backward horizon for `alpha-limit`.
        #[arg(long, default_value_t = -20.0, allow_hyphen_values = true)]
        tau_min: f64,
        #[command(flatten)]
        tol: Tol,
    },
    /// Blowup criteria on exponents and time series.
    Criteria(CriteriaArgs),
    /// Write a synthetic profile file.
    Fixture {
        /// trivial, gaussian-column, gaussian-ring, burgers, linear-strain, manufactured-swirl or off-axis-zero
        family: String,
        /// Parameters as key=value (e.g. gamma=0.45 amp=2).
        params: Vec<String>,
        #[arg(short, long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AxisymAction {
    Residual,
    Flow,
    FixedPoints,
    Area,
    Invariants,
    AlphaLimit,
}

#[derive(Args, Debug)]
pub struct CriteriaArgs {
    /// Print the lower bound p/(p+3) on gamma for velocity in L^p (accepts `inf`).
    #[arg(long, value_parser = input::parse_exponent)]
    pub gamma_bound: Option<f64>,

    /// Hoelder length-scale criterion; needs --holder, --energy, --mu.
    #[arg(long, requires_all = ["holder", "energy", "mu"])]
    pub ell_mu: bool,
    /// Two-column series of the vorticity Hoelder seminorm.
    #[arg(long)]
    pub holder: Option<PathBuf>,
    /// Two-column series of the L^2 norm of the velocity.
    #[arg(long)]
    pub energy: Option<PathBuf>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub l0: f64,

    /// Optimized split bound on the stretching factor; needs --gradw, --lp-series, --p.
    #[arg(long, requires_all = ["gradw", "lp_series", "p"])]
    pub alpha_bound: bool,
    /// Two-column series of sup |grad omega|.
    #[arg(long)]
    pub gradw: Option<PathBuf>,
    /// Two-column series of |u|_{L^p}.
    #[arg(long)]
    pub lp_series: Option<PathBuf>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub c_in: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c_out: f64,

    /// Blowup time of the series.
    #[arg(long, default_value_t = 1.0)]
    pub t_star: f64,

    /// Viscous split bound 16(budget + amplitude^4/(6 gamma - 3)); needs --gamma.
    #[arg(long, requires = "gamma")]
    pub viscous: bool,
    #[arg(long, default_value_t = 1.0)]
    pub budget: f64,
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
    #[arg(long)]
    pub gamma: Option<f64>,
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(v) = std::env::var("SSGUARD_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| anyhow::anyhow!("SSGUARD_THREADS must be a positive integer, got {v:?}"))?;
    if n == 0 {
        anyhow::bail!("SSGUARD_THREADS must be at least 1");
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = configure_threads().and_then(|_| commands::run(&cli));
    match run {
        Ok(out) => {
            print!("{}", out.text);
            ExitCode::from(if out.failed { 1 } else { 0 })
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
