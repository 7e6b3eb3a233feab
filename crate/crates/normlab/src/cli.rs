use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "normlab", version, about = "Numerical ranges and isometry groups of finite-dimensional normed spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub group: Group,
    #[command(flatten)]
    pub global: Global,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Space descriptor (JSON).
    #[arg(long, global = true)]
    pub space: Option<PathBuf>,
    /// Operator descriptor (JSON).
    #[arg(long, global = true)]
    pub op: Option<PathBuf>,
    /// Tolerance; defaults to 1e-9, or 1e-6 on spaces with sampled norms.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 64)]
    pub budget: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Group {
    /// Dual spaces, extreme points and duality pairs.
    Space {
        #[command(subcommand)]
        cmd: SpaceCmd,
    },
    /// Numerical range computations.
    Nr {
        #[command(subcommand)]
        cmd: NrCmd,
    },
    /// Skew-hermitian operators and one-parameter groups.
    Lie {
        #[command(subcommand)]
        cmd: LieCmd,
    },
    /// Numerical index search.
    Index {
        #[command(subcommand)]
        cmd: IndexCmd,
    },
    /// Direct sums and extended operators.
    Sum {
        #[command(subcommand)]
        cmd: SumCmd,
    },
    /// Piecewise-linear function spaces over Cantor grids.
    Cantor {
        #[command(subcommand)]
        cmd: CantorCmd,
    },
}

#[derive(Debug, Subcommand)]
pub enum SpaceCmd {
    Dual,
    Extremes,
    Pairs,
}

#[derive(Debug, Subcommand)]
pub enum NrCmd {
    Summary,
    Expformula,
    Daugavet,
}

#[derive(Debug, Subcommand)]
pub enum LieCmd {
    Basis,
    Verify,
    Classify,
}

#[derive(Debug, Subcommand)]
pub enum IndexCmd {
    Estimate,
    Dualcheck {
        /// Random operators compared in the radius identity.
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SumKindArg {
    L1,
    Linf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ExtendMode {
    Zero,
    Isometry,
}

#[derive(Debug, Subcommand)]
pub enum SumCmd {
    Build {
        #[arg(long, value_enum)]
        kind: SumKindArg,
        /// Summand descriptor; repeat for each part.
        #[arg(long = "part", required = true)]
        parts: Vec<PathBuf>,
    },
    /// Extends the operator given by --op to the l1-sum with another space.
    Extend {
        #[arg(long)]
        with: PathBuf,
        #[arg(long, value_enum, default_value_t = ExtendMode::Zero)]
        mode: ExtendMode,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EArg {
    Constants,
    #[value(name = "l2_2")]
    L2Plane,
    Zero,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Cantor level.
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    /// Grid size; a multiple of 3^k.
    #[arg(long, default_value_t = 27)]
    pub m: u64,
}

#[derive(Debug, Subcommand)]
pub enum CantorCmd {
    Grid {
        #[command(flatten)]
        grid: GridArgs,
    },
    Build {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum, default_value_t = EArg::Constants)]
        e: EArg,
    },
    Bump {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum, default_value_t = EArg::Constants)]
        e: EArg,
        #[arg(long, allow_negative_numbers = true)]
        lo: f64,
        #[arg(long, allow_negative_numbers = true)]
        hi: f64,
    },
    Quotient {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum, default_value_t = EArg::Constants)]
        e: EArg,
    },
    Experiment {
        #[arg(long, value_enum, default_value_t = EArg::L2Plane)]
        e: EArg,
        #[arg(long, default_value_t = 1)]
        k: u32,
        /// Comma-separated grid sizes.
        #[arg(long = "m", value_delimiter = ',', default_values_t = [27u64, 81])]
        m_list: Vec<u64>,
    },
}
