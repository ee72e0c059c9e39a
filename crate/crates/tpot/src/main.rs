use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tpot::config::{DiagramMassName, IncidenceName, RunConfig};
use tpot::datasets::{write_example, Example};
use tpot::formats::{AlgorithmName, KernelName};
use tpot::pipeline::{cmd_baseline, cmd_build, cmd_geodesic, cmd_solve, cmd_track};

/// Topological optimal transport between point clouds.
#[derive(Parser, Debug)]
#[command(name = "tpot", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a measure topological network from a point CSV.
    Build { points: PathBuf },
    /// Solve the transport problem between two networks.
    Solve { source: PathBuf, target: PathBuf },
    /// Match the two persistence diagrams alone.
    BaselinePd { source: PathBuf, target: PathBuf },
    /// Sample the geodesic of a solved pair as embedded frames.
    Geodesic {
        result: PathBuf,
        source: PathBuf,
        target: PathBuf,
        /// Point CSVs of source and target, used for a Euclidean display gauge.
        #[arg(long, num_args = 2, value_names = ["SOURCE_CSV", "TARGET_CSV"])]
        points: Option<Vec<PathBuf>>,
    },
    /// Match features between consecutive snapshot CSVs of a directory.
    Track { snapshots: PathBuf },
    /// Write a bundled example dataset and its config.
    GenExample {
        #[arg(value_enum)]
        name: Example,
        /// Destination directory (defaults to the output directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Default)]
struct Overrides {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    kernel: Option<KernelName>,
    #[arg(long, global = true)]
    degree: Option<usize>,
    #[arg(long, global = true)]
    top_k: Option<usize>,
    #[arg(long, global = true)]
    threshold: Option<f64>,
    #[arg(long, global = true, value_enum)]
    incidence: Option<IncidenceName>,
    #[arg(long, global = true)]
    lambda: Option<f64>,
    #[arg(long, global = true, value_enum)]
    diagram_mass: Option<DiagramMassName>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    beta: Option<f64>,
    #[arg(long, global = true)]
    eps_v: Option<f64>,
    #[arg(long, global = true)]
    eps_e: Option<f64>,
    #[arg(long, global = true, value_enum)]
    algorithm: Option<AlgorithmName>,
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    gauss_seidel: Option<bool>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    n_frames: Option<usize>,
    #[arg(long, global = true)]
    d_embed: Option<usize>,
    #[arg(long, global = true)]
    known_correspondence: Option<bool>,
    #[arg(long, global = true)]
    truth: Option<PathBuf>,
}

macro_rules! apply {
    ($cfg:ident, $o:ident, $($field:ident),*) => {
        $(if let Some(v) = $o.$field { $cfg.$field = v; })*
    };
}

impl Overrides {
    fn resolve(self) -> tpot::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        cfg.apply_env();
        let o = self;
        apply!(
            cfg,
            o,
            output_dir,
            kernel,
            degree,
            alpha,
            beta,
            eps_v,
            eps_e,
            algorithm,
            max_iter,
            tol,
            gauss_seidel,
            seed,
            n_frames,
            d_embed,
            known_correspondence,
            incidence,
            lambda,
            diagram_mass
        );
        if o.top_k.is_some() {
            cfg.top_k = o.top_k;
        }
        if o.threshold.is_some() {
            cfg.threshold = o.threshold;
        }
        if o.truth.is_some() {
            cfg.truth = o.truth;
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> tpot::Result<()> {
    let cfg = cli.overrides.resolve()?;
    let written = match cli.command {
        Command::Build { points } => vec![cmd_build(&points, &cfg)?],
        Command::Solve { source, target } => vec![cmd_solve(&source, &target, &cfg)?],
        Command::BaselinePd { source, target } => vec![cmd_baseline(&source, &target, &cfg)?],
        Command::Geodesic {
            result,
            source,
            target,
            points,
        } => {
            let clouds = points.as_ref().map(|p| (p[0].as_path(), p[1].as_path()));
            vec![cmd_geodesic(&result, &source, &target, clouds, &cfg)?]
        }
        Command::Track { snapshots } => vec![cmd_track(&snapshots, &cfg)?],
        Command::GenExample { name, out } => {
            let dir = out.unwrap_or_else(|| cfg.output_dir.clone());
            write_example(name, &dir, cfg.seed)?
        }
    };
    for path in written {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
