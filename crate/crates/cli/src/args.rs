use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[command(
    name = "fracframe",
    version,
    about = "Self-affine measures, packing certificates and Fourier frame bounds"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Global {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Write results here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Write the fully resolved invocation as JSON to this path.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    /// Worker thread cap (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Reserved; every algorithm is deterministic.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Atom budget (default: FRACFRAME_ATOM_BUDGET or 65536).
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    /// Largest atom count accepted by the eigen solver.
    #[arg(long, global = true, default_value_t = 4096)]
    pub eigen_budget: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Command {
    /// Build or combine level-n measures.
    #[command(subcommand)]
    Measure(MeasureCmd),
    /// Fourier transforms.
    #[command(subcommand)]
    Ft(FtCmd),
    /// Packing certificates and singularity witnesses.
    #[command(subcommand)]
    Packing(PackingCmd),
    /// Frame bounds of exponential systems.
    #[command(subcommand)]
    Frame(FrameCmd),
    /// Experiments (mechanism demonstrations at finite level).
    #[command(subcommand)]
    Exp(ExpCmd),
    /// Independent re-verification of emitted artifacts.
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MeasureCmd {
    /// Level-n measure of a digit system.
    Build {
        /// `N:b1,b2,..` or a JSON digit-system file.
        #[arg(long)]
        system: String,
        #[arg(long)]
        level: usize,
    },
    /// Convolution of two measure files.
    Convolve {
        #[arg(long)]
        first: PathBuf,
        #[arg(long)]
        second: PathBuf,
    },
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FtCmd {
    /// Transform on an evenly spaced 1D grid: certified infinite product for
    /// `--system`, exact finite sum for `--measure`.
    Grid {
        #[arg(long, conflicts_with = "measure", required_unless_present = "measure")]
        system: Option<String>,
        #[arg(long)]
        measure: Option<PathBuf>,
        #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
        hi: f64,
        #[arg(long, default_value_t = 201)]
        count: usize,
        #[arg(long, default_value_t = 1e-12)]
        eps: f64,
    },
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PackingCmd {
    /// Norm criterion for `(R, B, C)`, or finite-level separation for two
    /// systems.
    Check {
        #[arg(long = "R", requires_all = ["b", "c"], conflicts_with_all = ["first", "second"])]
        r: Option<i64>,
        #[arg(long = "B", value_delimiter = ',', allow_hyphen_values = true)]
        b: Option<Vec<i64>>,
        #[arg(long = "C", value_delimiter = ',', allow_hyphen_values = true)]
        c: Option<Vec<i64>>,
        #[arg(long, requires = "second")]
        first: Option<String>,
        #[arg(long)]
        second: Option<String>,
        #[arg(long, default_value_t = 4)]
        level: usize,
    },
    /// Finite-level singularity witness for `nu * lambda + delta_t * nu`.
    Witness {
        #[arg(long)]
        nu: String,
        #[arg(long)]
        lambda: String,
        /// Rational translation, comma separated coordinates.
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        t: String,
        #[arg(long)]
        level: usize,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumKind {
    Jp,
    Lattice,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FrameCmd {
    /// Frame bounds of a level-n measure against a frequency set.
    Bounds {
        #[arg(long)]
        system: String,
        #[arg(long)]
        level: usize,
        #[arg(long, value_enum, default_value_t = SpectrumKind::Jp)]
        spectrum: SpectrumKind,
        /// Hadamard partner digits for `jp` (searched when omitted).
        #[arg(long = "L", value_delimiter = ',', allow_hyphen_values = true)]
        l: Option<Vec<i64>>,
        /// Pool size for `lattice` (default: twice the atom count).
        #[arg(long)]
        pool_size: Option<usize>,
    },
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ExpCmd {
    /// Bessel degeneracy table on a packing sum.
    Degeneracy {
        #[arg(long, default_value = "16:0,1")]
        nu: String,
        #[arg(long, default_value = "16:0,4")]
        lambda: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        t: String,
        #[arg(long, default_value_t = 4)]
        level: usize,
        /// System whose JP spectrum is tested.
        #[arg(long, default_value = "4:0,1")]
        spectrum_system: String,
        #[arg(long = "spectrum-L", value_delimiter = ',')]
        spectrum_l: Option<Vec<i64>>,
        #[arg(long, default_value_t = 4)]
        spectrum_level: usize,
        #[arg(long, value_delimiter = ',', default_value = "2,8,32,128,512")]
        ks: Vec<u64>,
    },
    /// Frame bounds of the rotated sum against sheared spectra.
    Rotation {
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "10,30,45,60,80,90",
            allow_hyphen_values = true
        )]
        thetas: Vec<f64>,
        #[arg(long, default_value_t = 4)]
        level: usize,
        /// Levels of the collinear comparison table.
        #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
        collinear_levels: Vec<usize>,
    },
    /// Bessel constants of one measure's spectrum against another measure.
    CrossBessel {
        #[arg(long, default_value = "8:0,1")]
        src: String,
        #[arg(long = "src-L", value_delimiter = ',', default_value = "0,4")]
        src_l: Vec<i64>,
        #[arg(long, default_value = "4:0,1")]
        dst: String,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6")]
        levels: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        depth_ratio: usize,
    },
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum VerifyCmd {
    /// Recompute a packing certificate and compare.
    Certificate {
        #[arg(long)]
        input: PathBuf,
    },
}
