//! Reproducible estimation and benchmark runs; the library side of the
//! `aqfc` binary.
//!
//! Runs are deterministic for fixed arguments and seed: per-vertex work is
//! pure and collected in vertex order, so the thread count never changes any
//! emitted byte. The configuration echoed into CSV comments therefore omits
//! the thread count.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;

use crate::benchmark::{self, error_report, BenchError, GroundTruth};
use crate::curvature::{aqfc_all_detailed, AqfcParams, CurvatureResult};
use crate::ddgo::DdgoEstimator;
use crate::fit::Quadric;
use crate::io::{self, ColorMap, PlyFormat, ScalarField};
use crate::mesh::{Mesh, NEIGHBORHOOD_FLOOR};

/// Environment variable supplying the default worker count.
pub const THREADS_ENV_VAR: &str = "AQFC_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or unsupported input, bad arguments. Exit code 2.
    #[error("{0}")]
    Input(String),
    /// The pipeline could not produce its outputs. Exit code 3.
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Aqfc,
    Ddgo,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Aqfc => "aqfc",
            Method::Ddgo => "ddgo",
        }
    }
}

/// Configuration of an `estimate` run.
#[derive(Debug, Clone)]
pub struct EstimateConfig {
    pub input: PathBuf,
    pub output: PathBuf,
    /// Optional CSV summary of the raw estimates.
    pub csv: Option<PathBuf>,
    /// Optional plain-text dump of the fitted quadrics.
    pub dump_quadrics: Option<PathBuf>,
    pub method: Method,
    pub neighborhood_size: usize,
    pub field: ScalarField,
    /// Colormap override; defaults depend on the field.
    pub bounds: Option<(f64, f64)>,
    pub binary: bool,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy)]
pub struct EstimateSummary {
    pub vertex_count: usize,
    pub n_failed: usize,
    pub seconds: f64,
}

/// Configuration of a `bench` run.
#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub experiment: BenchExperiment,
    pub out_dir: PathBuf,
    pub neighborhood_size: usize,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone)]
pub enum BenchExperiment {
    /// Regular torus at the given vertex counts (perfect squares).
    TorusRegular { levels: Vec<usize> },
    TorusIrregular { n: usize, seed: u64 },
    SphereIrregular { seed: u64 },
}

/// Read a mesh file, estimate curvature at every vertex, and write the
/// colored PLY plus optional CSV summary and quadric dump.
///
/// Per-vertex failures never fail the run; they are reported on stderr and
/// counted in the summary.
pub fn run_estimate(config: &EstimateConfig) -> Result<EstimateSummary, CliError> {
    if config.neighborhood_size < NEIGHBORHOOD_FLOOR {
        return Err(CliError::Input(format!(
            "neighborhood size must be at least {NEIGHBORHOOD_FLOOR}, got {}",
            config.neighborhood_size
        )));
    }
    let bytes = fs::read(&config.input)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", config.input.display())))?;
    let (mesh, file_normals) = read_mesh(&config.input, &bytes)?;

    let pool = thread_pool(config.threads)?;
    let start = Instant::now();
    let (results, quadrics) = pool.install(|| -> Result<_, CliError> {
        let normals = match file_normals {
            Some(n) => n,
            None => mesh
                .vertex_normals()
                .map_err(|e| CliError::Input(format!("cannot compute vertex normals: {e}")))?,
        };
        match config.method {
            Method::Aqfc => {
                let params = AqfcParams {
                    neighborhood_size: config.neighborhood_size,
                    ..AqfcParams::default()
                };
                let detailed = aqfc_all_detailed(&mesh, &normals, &params);
                let mut results = Vec::with_capacity(detailed.len());
                let mut quadrics = Vec::with_capacity(detailed.len());
                for (r, q) in detailed {
                    results.push(r);
                    quadrics.push(q);
                }
                Ok((results, Some(quadrics)))
            }
            Method::Ddgo => {
                let estimator = DdgoEstimator::new(&mesh)
                    .map_err(|e| CliError::Input(format!("baseline needs valid normals: {e}")))?;
                let results = estimator
                    .estimate_all()
                    .into_iter()
                    .map(|d| d.to_curvature_result())
                    .collect();
                Ok((results, None))
            }
        }
    })?;
    let seconds = start.elapsed().as_secs_f64();

    let n_failed = results.iter().filter(|r| r.flags.fit_failed).count();
    if n_failed > 0 {
        eprintln!(
            "warning: {n_failed} of {} vertices failed to fit (NaN in output)",
            results.len()
        );
    }

    let colormap = colormap_for(config.field, config.bounds, &results);
    let format = if config.binary {
        PlyFormat::BinaryLittleEndian
    } else {
        PlyFormat::Ascii
    };
    let ply = io::write_ply(&mesh, &results, config.field, &colormap, format);
    write_output(&config.output, &ply)?;

    if let Some(path) = &config.csv {
        let name = config
            .input
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "mesh".to_string());
        let mut csv = format!(
            "# command=estimate\n# input={}\n# output={}\n# method={}\n# m={}\n# field={}\n",
            config.input.display(),
            config.output.display(),
            config.method.name(),
            config.neighborhood_size,
            config.field.name(),
        )
        .into_bytes();
        csv.extend_from_slice(&io::write_estimate_summary(
            &name,
            config.method.name(),
            &results,
        ));
        write_output(path, &csv)?;
    }
    if let Some(path) = &config.dump_quadrics {
        let fits: Vec<(Option<Quadric>, _)> = match &quadrics {
            Some(qs) => qs
                .iter()
                .zip(&results)
                .map(|(q, r)| (*q, r.flags))
                .collect(),
            None => results.iter().map(|r| (None, r.flags)).collect(),
        };
        write_output(path, &io::write_quadric_dump(&fits))?;
    }

    Ok(EstimateSummary {
        vertex_count: results.len(),
        n_failed,
        seconds,
    })
}

/// Generate the requested benchmark meshes, score both estimators against
/// the analytic ground truth, and persist the CSV report, the sampled meshes
/// and the ground truth for replay.
pub fn run_bench(config: &BenchConfig) -> Result<Vec<io::NamedReport>, CliError> {
    if config.neighborhood_size < NEIGHBORHOOD_FLOOR {
        return Err(CliError::Input(format!(
            "neighborhood size must be at least {NEIGHBORHOOD_FLOOR}, got {}",
            config.neighborhood_size
        )));
    }
    fs::create_dir_all(&config.out_dir).map_err(|e| {
        CliError::Internal(format!("cannot create {}: {e}", config.out_dir.display()))
    })?;

    let (csv_name, mut config_lines) = match &config.experiment {
        BenchExperiment::TorusRegular { levels } => (
            "torus_regular",
            vec![
                "# command=bench torus-regular".to_string(),
                format!(
                    "# levels={}",
                    levels
                        .iter()
                        .map(|l| l.to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                ),
            ],
        ),
        BenchExperiment::TorusIrregular { n, seed } => (
            "torus_irregular",
            vec![
                "# command=bench torus-irregular".to_string(),
                format!("# n={n}"),
                format!("# seed={seed}"),
            ],
        ),
        BenchExperiment::SphereIrregular { seed } => (
            "sphere_irregular",
            vec![
                "# command=bench sphere-irregular".to_string(),
                format!("# seed={seed}"),
            ],
        ),
    };
    config_lines.push(format!("# m={}", config.neighborhood_size));

    let mut meshes: Vec<(String, Mesh, GroundTruth)> = Vec::new();
    match &config.experiment {
        BenchExperiment::TorusRegular { levels } => {
            if levels.is_empty() {
                return Err(CliError::Input("no levels given".into()));
            }
            for &level in levels {
                let side = (level as f64).sqrt().round() as usize;
                if side * side != level || side < 3 {
                    return Err(CliError::Input(format!(
                        "torus level {level} is not a square grid size (use e.g. 400, 3600, 10000)"
                    )));
                }
                let (mesh, truth) = benchmark::sample_torus_regular(side, side)
                    .map_err(bench_to_cli)?;
                meshes.push((format!("torus_regular_{level}"), mesh, truth));
            }
        }
        BenchExperiment::TorusIrregular { n, seed } => {
            let (mesh, truth) =
                benchmark::sample_torus_irregular(*n, *seed).map_err(bench_to_cli)?;
            meshes.push((format!("torus_irregular_{n}_seed{seed}"), mesh, truth));
        }
        BenchExperiment::SphereIrregular { seed } => {
            let (n_theta, n_phi) = benchmark::SPHERE_DEFAULT_GRID;
            let (mesh, truth) = benchmark::sample_sphere_irregular(n_theta, n_phi, *seed)
                .map_err(bench_to_cli)?;
            meshes.push((format!("sphere_irregular_seed{seed}"), mesh, truth));
        }
    }

    let pool = thread_pool(config.threads)?;
    let params = AqfcParams {
        neighborhood_size: config.neighborhood_size,
        ..AqfcParams::default()
    };

    let mut reports = Vec::new();
    for (name, mesh, truth) in &meshes {
        let (aqfc_results, ddgo_results) = pool.install(|| -> Result<_, CliError> {
            let normals = mesh
                .vertex_normals()
                .map_err(|e| CliError::Internal(format!("{name}: {e}")))?;
            let aqfc = crate::curvature::aqfc_all(mesh, &normals, &params);
            let estimator = DdgoEstimator::new(mesh)
                .map_err(|e| CliError::Internal(format!("{name}: {e}")))?;
            let ddgo: Vec<CurvatureResult> = estimator
                .estimate_all()
                .into_iter()
                .map(|d| d.to_curvature_result())
                .collect();
            Ok((aqfc, ddgo))
        })?;

        for (method, results) in [("aqfc", &aqfc_results), ("ddgo", &ddgo_results)] {
            let report = error_report(results, truth)
                .map_err(|e| CliError::Internal(format!("{name}/{method}: {e}")))?;
            println!(
                "{name} {method}: h_avg={} k_avg={} h=[{}, {}] k=[{}, {}] failed={}",
                io::format_significant(report.h_avg),
                io::format_significant(report.k_avg),
                io::format_significant(report.h_min),
                io::format_significant(report.h_max),
                io::format_significant(report.k_min),
                io::format_significant(report.k_max),
                report.n_failed,
            );
            reports.push(io::NamedReport {
                name: name.clone(),
                method: method.to_string(),
                report,
            });
        }

        // Persist the sampled mesh (colored by the quadric-fit mean
        // curvature, truth-bounded colormap) and its ground truth so the run
        // can be replayed from artifacts.
        let truth_bounds = min_max(&truth.mean);
        let colormap = colormap_from_range(truth_bounds.0, truth_bounds.1);
        let ply = io::write_ply(
            mesh,
            &aqfc_results,
            ScalarField::Mean,
            &colormap,
            PlyFormat::Ascii,
        );
        write_output(&config.out_dir.join(format!("{name}.ply")), &ply)?;
        write_output(
            &config.out_dir.join(format!("{name}_truth.csv")),
            &io::write_ground_truth_csv(truth),
        )?;
    }

    let mut csv = config_lines.join("\n").into_bytes();
    csv.push(b'\n');
    csv.extend_from_slice(&io::write_csv_report(&reports));
    write_output(&config.out_dir.join(format!("{csv_name}.csv")), &csv)?;

    Ok(reports)
}

fn bench_to_cli(e: BenchError) -> CliError {
    match e {
        BenchError::Precondition(msg) => CliError::Input(msg),
        other => CliError::Internal(other.to_string()),
    }
}

fn min_max(values: &[f64]) -> (f64, f64) {
    values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    })
}

/// Colormap bounds that tolerate a constant range.
fn colormap_from_range(lower: f64, upper: f64) -> ColorMap {
    if lower < upper {
        ColorMap::new(lower, upper)
    } else {
        ColorMap::new(lower - 0.5, upper + 0.5)
    }
}

/// Default colormap bounds when no ground truth is at hand: fixed display
/// ranges for the bounded/unbounded descriptors, percentiles otherwise.
fn colormap_for(field: ScalarField, bounds: Option<(f64, f64)>, results: &[CurvatureResult]) -> ColorMap {
    if let Some((lower, upper)) = bounds {
        return colormap_from_range(lower, upper);
    }
    match field {
        // Curvedness has no natural upper bound; fixed display range.
        ScalarField::Curvedness => ColorMap::new(0.0, 200.0),
        ScalarField::ShapeIndex => ColorMap::new(-1.0, 1.0),
        ScalarField::Mean | ScalarField::Gaussian => {
            let values: Vec<f64> = results.iter().map(|r| field.extract(r)).collect();
            ColorMap::from_percentiles(&values)
        }
    }
}

fn read_mesh(path: &Path, bytes: &[u8]) -> Result<io::ParsedMesh, CliError> {
    let extension = path
        .extension()
        .map(|e| e.to_string_lossy().to_lowercase())
        .unwrap_or_default();
    let parsed = match extension.as_str() {
        "obj" => io::read_obj(bytes),
        "ply" => io::read_ply(bytes),
        other => {
            return Err(CliError::Input(format!(
                "unsupported input extension `{other}` (expected .obj or .ply)"
            )))
        }
    };
    parsed.map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes)
        .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))
}

fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let count = threads
        .or_else(|| {
            std::env::var(THREADS_ENV_VAR)
                .ok()
                .and_then(|v| v.parse::<usize>().ok())
        })
        .unwrap_or(0); // 0 = library default
    rayon::ThreadPoolBuilder::new()
        .num_threads(count)
        .build()
        .map_err(|e| CliError::Internal(format!("cannot build worker pool: {e}")))
}
