//! Command-line surface for the optstretch library.
//!
//! Every subcommand is a thin shell over the library API: parsing,
//! thread-pool selection, JSON serialization, and exit-code mapping live
//! here, computation does not.
//!
//! Exit codes: 0 success, 1 validation error, 2 computational guard,
//! 3 verification failure.

mod commands;
mod verify;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use optstretch::{Error as CoreError, Objective, RegionKind, SearchConfig};

#[derive(Parser)]
#[command(
    name = "optstretch",
    version,
    about = "Lattice-point counts, measures, and optimal stretching factors \
             for domains x_1^w1 + ... + x_d^wd <= 1 with even exponents"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print closed-form measures and balanced factors
    Volume(VolumeArgs),
    /// Count lattice points of one region exactly
    Count(CountArgs),
    /// Print the two-term prediction and error budget for one region
    Predict(PredictArgs),
    /// Search for the optimal stretching factors at one dilation
    Optimize(OptimizeArgs),
    /// Sweep dilations, fit the deviation decay rate, and emit files
    Sweep(SweepArgs),
    /// Run the verification suites and print a pass/fail table
    Verify(VerifyArgs),
}

#[derive(Args)]
struct OmegaArg {
    /// Comma-separated even exponents, e.g. 2,2,4
    #[arg(long, value_delimiter = ',', required = true)]
    omega: Vec<u32>,
}

#[derive(Args)]
struct ThreadsArg {
    /// Worker threads (defaults to available parallelism)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum RegionArg {
    Full,
    Positive,
    Nonnegative,
    HyperplaneUnion,
}

impl From<RegionArg> for RegionKind {
    fn from(r: RegionArg) -> Self {
        match r {
            RegionArg::Full => RegionKind::Full,
            RegionArg::Positive => RegionKind::Positive,
            RegionArg::Nonnegative => RegionKind::Nonnegative,
            RegionArg::HyperplaneUnion => RegionKind::HyperplaneUnion,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ObjectiveArg {
    MaxPositive,
    MinNonnegative,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::MaxPositive => Objective::MaximizePositive,
            ObjectiveArg::MinNonnegative => Objective::MinimizeNonnegative,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Svg,
}

#[derive(Args)]
struct SearchArgs {
    /// Refinement levels
    #[arg(long)]
    levels: Option<u32>,
    /// Grid points per free axis (odd)
    #[arg(long)]
    grid: Option<u32>,
    /// Initial log-space half-width of the search box
    #[arg(long)]
    radius: Option<f64>,
    /// Cells carried to the next level
    #[arg(long)]
    keep_top: Option<usize>,
}

impl SearchArgs {
    fn to_config(&self) -> SearchConfig {
        let mut config = SearchConfig::default();
        if let Some(levels) = self.levels {
            config.levels = levels;
        }
        if let Some(grid) = self.grid {
            config.grid_per_axis = grid;
        }
        if let Some(radius) = self.radius {
            config.initial_radius = radius;
        }
        if let Some(keep_top) = self.keep_top {
            config.keep_top = keep_top;
        }
        config
    }
}

#[derive(Args)]
struct VolumeArgs {
    #[command(flatten)]
    omega: OmegaArg,
}

#[derive(Args)]
struct CountArgs {
    #[command(flatten)]
    omega: OmegaArg,
    /// Dilation parameter
    #[arg(long)]
    t: f64,
    /// Region of lattice points to count
    #[arg(long, value_enum, default_value = "full")]
    region: RegionArg,
    /// Comma-separated stretch factors (renormalized to determinant 1)
    #[arg(long, value_delimiter = ',')]
    a: Option<Vec<f64>>,
    /// Cross-check against the brute-force oracle
    #[arg(long)]
    oracle: bool,
    #[command(flatten)]
    threads: ThreadsArg,
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    omega: OmegaArg,
    /// Dilation parameter
    #[arg(long)]
    t: f64,
    /// Region of lattice points to predict
    #[arg(long, value_enum, default_value = "full")]
    region: RegionArg,
    /// Comma-separated stretch factors (renormalized to determinant 1)
    #[arg(long, value_delimiter = ',')]
    a: Option<Vec<f64>>,
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    omega: OmegaArg,
    /// Dilation parameter (must be >= 1)
    #[arg(long)]
    t: f64,
    /// Optimization objective
    #[arg(long, value_enum, default_value = "max-positive")]
    objective: ObjectiveArg,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    threads: ThreadsArg,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    omega: OmegaArg,
    /// Smallest dilation
    #[arg(long, default_value_t = 20.0)]
    t_min: f64,
    /// Largest dilation
    #[arg(long, default_value_t = 300.0)]
    t_max: f64,
    /// Number of logarithmically spaced dilations
    #[arg(long, default_value_t = 25)]
    points: usize,
    /// Optimization objective
    #[arg(long, value_enum, default_value = "max-positive")]
    objective: ObjectiveArg,
    /// Output directory for sweep.{csv,json,svg}
    #[arg(long, default_value = ".")]
    out: std::path::PathBuf,
    /// Formats to write
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [FormatArg::Csv, FormatArg::Json, FormatArg::Svg])]
    format: Vec<FormatArg>,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    threads: ThreadsArg,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    omega: OmegaArg,
    /// Largest dilation exercised by the counting suites
    #[arg(long, default_value_t = 6.0)]
    t_max: f64,
    /// Seed for the randomized suites
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    threads: ThreadsArg,
}

/// Runs `f` inside a dedicated pool when a thread count was requested.
fn with_threads<T>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T
where
    T: Send,
{
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

fn exit_code_for(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<CoreError>() {
        Some(CoreError::GuardExceeded { .. }) => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Volume(args) => commands::volume(&args.omega.omega).map(|_| 0),
        Command::Count(args) => with_threads(args.threads.threads, || {
            commands::count(
                &args.omega.omega,
                args.t,
                args.region.into(),
                args.a.as_deref(),
                args.oracle,
            )
            .map(|_| 0)
        }),
        Command::Predict(args) => commands::predict(
            &args.omega.omega,
            args.t,
            args.region.into(),
            args.a.as_deref(),
        )
        .map(|_| 0),
        Command::Optimize(args) => with_threads(args.threads.threads, || {
            commands::optimize(
                &args.omega.omega,
                args.t,
                args.objective.into(),
                &args.search.to_config(),
            )
            .map(|_| 0)
        }),
        Command::Sweep(args) => with_threads(args.threads.threads, || {
            let formats: Vec<optstretch::EmitFormat> = args
                .format
                .iter()
                .map(|f| match f {
                    FormatArg::Csv => optstretch::EmitFormat::Csv,
                    FormatArg::Json => optstretch::EmitFormat::Json,
                    FormatArg::Svg => optstretch::EmitFormat::SvgScatter,
                })
                .collect();
            commands::sweep(
                &args.omega.omega,
                args.t_min,
                args.t_max,
                args.points,
                args.objective.into(),
                &args.search.to_config(),
                &args.out,
                &formats,
            )
            .map(|_| 0)
        }),
        Command::Verify(args) => with_threads(args.threads.threads, || {
            verify::run(&args.omega.omega, args.t_max, args.seed)
        }),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(exit_code_for(&err));
        }
    }
}
