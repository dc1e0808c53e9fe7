use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use aqfc::cli::{
    run_bench, run_estimate, BenchConfig, BenchExperiment, EstimateConfig, Method,
};
use aqfc::io::ScalarField;

/// Per-vertex mean and Gaussian curvature estimation on polygon meshes via
/// algebraic quadric fitting, with a discrete-operator baseline and analytic
/// benchmarks.
#[derive(Parser)]
#[command(name = "aqfc", version)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate curvature for a mesh file and write a colored PLY.
    Estimate {
        /// Input mesh (.obj or .ply).
        input: PathBuf,
        /// Output PLY path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Aqfc)]
        method: MethodArg,
        /// Neighborhood size (vertex-normals per fit).
        #[arg(long, default_value_t = 20)]
        m: usize,
        /// Scalar written as the PLY quality property.
        #[arg(long, value_enum, default_value_t = FieldArg::Mean)]
        field: FieldArg,
        /// Also write a CSV summary of the raw estimates.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Also dump the fitted quadric coefficients, one line per vertex.
        #[arg(long)]
        dump_quadrics: Option<PathBuf>,
        /// Lower colormap bound (defaults depend on the field).
        #[arg(long, requires = "upper")]
        lower: Option<f64>,
        /// Upper colormap bound.
        #[arg(long, requires = "lower")]
        upper: Option<f64>,
        /// Write binary-little-endian PLY instead of ascii.
        #[arg(long)]
        binary: bool,
        /// Worker threads (default: AQFC_THREADS or all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run a benchmark against analytic ground truth and write CSV + meshes.
    Bench {
        #[command(subcommand)]
        experiment: Experiment,
    },
}

#[derive(Subcommand)]
enum Experiment {
    /// Uniformly sampled quad torus at one or more vertex counts.
    TorusRegular {
        /// Vertex counts; each must be a perfect square.
        #[arg(long, value_delimiter = ',', default_value = "400,3600,10000")]
        levels: Vec<usize>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Randomly sampled torus, triangulated in the periodic parameter domain.
    TorusIrregular {
        /// Number of random samples.
        #[arg(long, default_value_t = 10000)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Latitude-longitude sphere with seeded random diagonal splits.
    SphereIrregular {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Output directory for CSV, meshes and ground truth.
    #[arg(long, default_value = "bench_out")]
    out_dir: PathBuf,
    /// Neighborhood size (vertex-normals per fit).
    #[arg(long, default_value_t = 20)]
    m: usize,
    /// Worker threads (default: AQFC_THREADS or all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Aqfc,
    Ddgo,
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldArg {
    Mean,
    Gaussian,
    Curvedness,
    ShapeIndex,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Aqfc => Method::Aqfc,
            MethodArg::Ddgo => Method::Ddgo,
        }
    }
}

impl From<FieldArg> for ScalarField {
    fn from(f: FieldArg) -> Self {
        match f {
            FieldArg::Mean => ScalarField::Mean,
            FieldArg::Gaussian => ScalarField::Gaussian,
            FieldArg::Curvedness => ScalarField::Curvedness,
            FieldArg::ShapeIndex => ScalarField::ShapeIndex,
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = match args.command {
        Command::Estimate {
            input,
            out,
            method,
            m,
            field,
            csv,
            dump_quadrics,
            lower,
            upper,
            binary,
            threads,
        } => run_estimate(&EstimateConfig {
            input,
            output: out,
            csv,
            dump_quadrics,
            method: method.into(),
            neighborhood_size: m,
            field: field.into(),
            bounds: lower.zip(upper),
            binary,
            threads,
        })
        .map(|summary| {
            println!(
                "estimated {} vertices in {:.2} s ({} failed)",
                summary.vertex_count, summary.seconds, summary.n_failed
            );
        }),
        Command::Bench { experiment } => {
            let (experiment, common) = match experiment {
                Experiment::TorusRegular { levels, common } => {
                    (BenchExperiment::TorusRegular { levels }, common)
                }
                Experiment::TorusIrregular { n, seed, common } => {
                    (BenchExperiment::TorusIrregular { n, seed }, common)
                }
                Experiment::SphereIrregular { seed, common } => {
                    (BenchExperiment::SphereIrregular { seed }, common)
                }
            };
            run_bench(&BenchConfig {
                experiment,
                out_dir: common.out_dir,
                neighborhood_size: common.m,
                threads: common.threads,
            })
            .map(|_| ())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
