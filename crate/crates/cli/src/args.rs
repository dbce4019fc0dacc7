use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "cavity-decay",
    version,
    about = "Decay of a state trapped behind a delta barrier: spectra, poles, evolution and norms"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Tolerance override `name=value`; repeatable.
    #[arg(long = "tol", global = true, value_name = "KEY=VALUE")]
    pub tol: Vec<String>,

    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Also write an SVG line chart of the series.
    #[arg(long, global = true, value_name = "FILE.svg")]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RouteArg {
    /// Direct up to t_direct_max, decomposed beyond.
    Auto,
    Direct,
    Decomposed,
    Power,
    Exponential,
    Asymptotic,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Continuum data on a k grid: 4ab, N², inside amplitude, expansion coefficient.
    Spectrum {
        #[arg(long, allow_hyphen_values = true)]
        g: f64,
        #[arg(long, default_value_t = 1)]
        l: usize,
        /// Wavenumbers, same syntax as --t.
        #[arg(long, default_value = "0.05:5:0.05")]
        k: String,
    },
    /// The bound state of the attractive well (empty table when there is none).
    BoundState {
        #[arg(long, allow_hyphen_values = true)]
        g: f64,
        #[arg(long, default_value_t = 1)]
        l: usize,
    },
    /// Resonance poles n = 1..n_max.
    Poles {
        #[arg(long, allow_hyphen_values = true)]
        g: f64,
        #[arg(long, default_value_t = 10)]
        n_max: usize,
    },
    /// ψ(x, t) on a uniform grid of [0, π].
    Evolve {
        #[arg(long, allow_hyphen_values = true)]
        g: f64,
        #[arg(long, default_value_t = 1)]
        l: usize,
        #[arg(long, default_value_t = 33)]
        x_grid: usize,
        /// `start:stop:step`, `log:start:stop:count`, `a,b,c` or a single value.
        #[arg(long)]
        t: String,
        #[arg(long, value_enum, default_value_t = RouteArg::Direct)]
        route: RouteArg,
        /// Asymptotic series order (1 or 2).
        #[arg(long, default_value_t = 2)]
        order: u8,
        /// Cap on the number of poles in the residue sum.
        #[arg(long, default_value_t = 400)]
        n_poles: usize,
    },
    /// Survival probability ∫_0^π |ψ|² dx.
    Survival {
        #[arg(long, allow_hyphen_values = true)]
        g: f64,
        #[arg(long, default_value_t = 1)]
        l: usize,
        #[arg(long)]
        t: String,
        #[arg(long, value_enum, default_value_t = RouteArg::Auto)]
        route: RouteArg,
    },
    /// Time at which the power-tail norm overtakes the exponential norm.
    Crossover {
        #[arg(long, allow_hyphen_values = true)]
        g: f64,
        #[arg(long, default_value_t = 1)]
        l: usize,
    },
    /// Exponential and power norms against t (ground state, g = 0.2).
    Figure2 {
        #[arg(long, default_value_t = 0.2, allow_hyphen_values = true)]
        g: f64,
        #[arg(long, default_value_t = 1)]
        l: usize,
        #[arg(long, default_value = "log:0.5:500:80")]
        t: String,
    },
    /// Scaled first pole, second pole and power norms (first excited state, g = 0.1).
    Figure3 {
        #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
        g: f64,
        #[arg(long, default_value_t = 2)]
        l: usize,
        #[arg(long, default_value = "log:0.5:1000:100")]
        t: String,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum { .. } => "spectrum",
            Command::BoundState { .. } => "bound-state",
            Command::Poles { .. } => "poles",
            Command::Evolve { .. } => "evolve",
            Command::Survival { .. } => "survival",
            Command::Crossover { .. } => "crossover",
            Command::Figure2 { .. } => "figure2",
            Command::Figure3 { .. } => "figure3",
        }
    }
}
