//! Command line definition.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "wact",
    version,
    about = "Numerical verification of weak almost contact metric structures"
)]
pub struct Cli {
    #[command(flatten)]
    pub opts: Options,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Options {
    /// Sample points per check.
    #[arg(long, global = true, default_value_t = 100)]
    pub points: usize,
    /// Sampling seed.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Fraction of each interval kept clear of the domain boundary.
    #[arg(long, global = true, default_value_t = 0.05)]
    pub margin: f64,
    /// Residual tolerance.
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub tol: f64,
    /// Also write the JSON report here (`-` for stdout instead of the table).
    #[arg(long, global = true, value_name = "PATH")]
    pub json: Option<PathBuf>,
    /// Record wall-clock timings in the JSON report.
    #[arg(long, global = true)]
    pub timings: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate the structure axioms.
    Check { file: PathBuf },
    /// Report which structure classes the file belongs to.
    Classify { file: PathBuf },
    /// Run registered identity checks.
    Verify {
        file: PathBuf,
        /// Check id, or `all`.
        #[arg(long, default_value = "all")]
        check: String,
    },
    /// Apply the homothetic deformation.
    Deform {
        file: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long = "lambda-prime", allow_negative_numbers = true)]
        lambda_prime: f64,
        /// Apply the inverse map.
        #[arg(long)]
        inverse: bool,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Deform a weak Sasakian structure to a classical one.
    ExtractSasakian {
        file: PathBuf,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Build a weak cosymplectic structure on a product with a line.
    Product {
        #[arg(long)]
        phitilde: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        nu: f64,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Test a vector field for the weak contact property.
    Cvf {
        file: PathBuf,
        /// Components separated by `;`.
        #[arg(long, required_unless_present = "potential", conflicts_with = "potential")]
        field: Option<String>,
        /// Build the field from a contact potential instead.
        #[arg(long)]
        potential: Option<String>,
    },
}
