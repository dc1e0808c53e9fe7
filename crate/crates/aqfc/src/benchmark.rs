//! Analytic test surfaces and deviation measures.
//!
//! Generates regular and irregular samplings of a torus (minor radius 1,
//! major radius 3) and an irregularly triangulated unit sphere, each paired
//! with per-vertex analytic ground truth, plus the min/max/avg deviation
//! report used to score estimators.
//!
//! All samplers are pure functions of their arguments (including the seed):
//! identical calls produce bit-identical meshes.

use std::collections::HashSet;
use std::f64::consts::{PI, TAU};

use nalgebra::{Point3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spade::{DelaunayTriangulation, Point2, Triangulation};
use thiserror::Error;

use crate::curvature::CurvatureResult;
use crate::mesh::{Mesh, MeshError};

pub const TORUS_MAJOR_RADIUS: f64 = 3.0;
pub const TORUS_MINOR_RADIUS: f64 = 1.0;

/// Grid dimensions that produce the default 482-vertex irregular sphere.
pub const SPHERE_DEFAULT_GRID: (usize, usize) = (30, 17);

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("sampler precondition violated: {0}")]
    Precondition(String),
    #[error("periodic triangulation produced {got} faces, expected {expected}")]
    Triangulation { got: usize, expected: usize },
    #[error("estimate count {estimates} does not match ground-truth count {truth}")]
    LengthMismatch { estimates: usize, truth: usize },
    #[error("every vertex failed; no statistics to report")]
    EmptyReport,
}

/// Per-vertex analytic curvature of the sampled surface, with the parameter
/// pair each vertex was sampled at.
///
/// Mean curvature is orientation-matched to outward vertex normals under the
/// implicit-formula sign convention (unit sphere: `H = -1`, `K = 1`).
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub mean: Vec<f64>,
    pub gaussian: Vec<f64>,
    pub params: Vec<(f64, f64)>,
}

/// Deviation statistics of an estimate against ground truth.
///
/// `h_avg`/`k_avg` are means of absolute deviations; the extrema are over the
/// raw estimates, not the deviations. Vertices flagged `fit_failed` are
/// excluded from the statistics and counted in `n_failed`.
#[derive(Debug, Clone, Copy)]
pub struct ErrorReport {
    pub h_min: f64,
    pub h_max: f64,
    pub h_avg: f64,
    pub k_min: f64,
    pub k_max: f64,
    pub k_avg: f64,
    pub n_failed: usize,
}

/// Torus point at parameters (theta around the tube, phi around the axis).
pub fn torus_point(theta: f64, phi: f64) -> Point3<f64> {
    let r = TORUS_MAJOR_RADIUS + theta.cos();
    Point3::new(r * phi.cos(), r * phi.sin(), theta.sin())
}

/// Analytic outward unit normal of the torus.
pub fn torus_normal(theta: f64, phi: f64) -> Vector3<f64> {
    Vector3::new(theta.cos() * phi.cos(), theta.cos() * phi.sin(), theta.sin())
}

/// Analytic mean curvature of the torus, orientation-matched to outward
/// normals: `H = -(3 + 2 cos theta) / (2 (3 + cos theta))`.
pub fn torus_mean_curvature(theta: f64) -> f64 {
    -(TORUS_MAJOR_RADIUS + 2.0 * theta.cos()) / (2.0 * (TORUS_MAJOR_RADIUS + theta.cos()))
}

/// Analytic Gaussian curvature of the torus: `K = cos theta / (3 + cos theta)`.
pub fn torus_gaussian_curvature(theta: f64) -> f64 {
    theta.cos() / (TORUS_MAJOR_RADIUS + theta.cos())
}

/// Closed quad mesh from uniform sampling of the torus parameter domain,
/// `n_theta * n_phi` vertices, wound so face normals point outward.
pub fn sample_torus_regular(
    n_theta: usize,
    n_phi: usize,
) -> Result<(Mesh, GroundTruth), BenchError> {
    if n_theta < 3 || n_phi < 3 {
        return Err(BenchError::Precondition(format!(
            "torus grid must be at least 3x3, got {n_theta}x{n_phi}"
        )));
    }
    let mut vertices = Vec::with_capacity(n_theta * n_phi);
    let mut mean = Vec::with_capacity(n_theta * n_phi);
    let mut gaussian = Vec::with_capacity(n_theta * n_phi);
    let mut params = Vec::with_capacity(n_theta * n_phi);
    for i in 0..n_theta {
        let theta = TAU * i as f64 / n_theta as f64;
        for j in 0..n_phi {
            let phi = TAU * j as f64 / n_phi as f64;
            vertices.push(torus_point(theta, phi));
            mean.push(torus_mean_curvature(theta));
            gaussian.push(torus_gaussian_curvature(theta));
            params.push((theta, phi));
        }
    }
    let idx = |i: usize, j: usize| ((i % n_theta) * n_phi + (j % n_phi)) as u32;
    let mut faces = Vec::with_capacity(n_theta * n_phi);
    for i in 0..n_theta {
        for j in 0..n_phi {
            faces.push(vec![idx(i, j), idx(i, j + 1), idx(i + 1, j + 1), idx(i + 1, j)]);
        }
    }
    let mesh = Mesh::new(vertices, faces)?;
    Ok((mesh, GroundTruth { mean, gaussian, params }))
}

/// Closed triangle mesh from `m` random parameter pairs on the torus,
/// triangulated by a Delaunay triangulation of the flat periodic parameter
/// domain (the [0, 2pi)^2 torus).
///
/// The periodic triangulation is obtained by tiling the samples 3x3,
/// triangulating the tiling, and keeping each triangle whose centroid falls
/// in the central tile; for points this dense the central tile is unaffected
/// by the tiling hull, so the kept faces form the periodic Delaunay
/// triangulation (exactly `2m` triangles, genus 1).
pub fn sample_torus_irregular(m: usize, seed: u64) -> Result<(Mesh, GroundTruth), BenchError> {
    if m < 100 {
        return Err(BenchError::Precondition(format!(
            "irregular torus needs at least 100 samples, got {m}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::with_capacity(m);
    let mut params = Vec::with_capacity(m);
    while params.len() < m {
        let theta = rng.random::<f64>() * TAU;
        let phi = rng.random::<f64>() * TAU;
        if seen.insert((theta.to_bits(), phi.to_bits())) {
            params.push((theta, phi));
        }
    }

    let faces = periodic_delaunay(&params, TAU)?;
    let mut vertices = Vec::with_capacity(m);
    let mut mean = Vec::with_capacity(m);
    let mut gaussian = Vec::with_capacity(m);
    for &(theta, phi) in &params {
        vertices.push(torus_point(theta, phi));
        mean.push(torus_mean_curvature(theta));
        gaussian.push(torus_gaussian_curvature(theta));
    }
    let mesh = Mesh::new(vertices, faces)?;
    Ok((mesh, GroundTruth { mean, gaussian, params }))
}

/// Delaunay triangulation of points on the flat periodic square of side
/// `period`, as counter-clockwise parameter-plane triangles mapped back to
/// original point indices and then reversed (the torus parametrization flips
/// orientation).
fn periodic_delaunay(points: &[(f64, f64)], period: f64) -> Result<Vec<Vec<u32>>, BenchError> {
    let m = points.len();
    let mut dt: DelaunayTriangulation<Point2<f64>> = DelaunayTriangulation::new();
    for offset_y in [-period, 0.0, period] {
        for offset_x in [-period, 0.0, period] {
            for &(x, y) in points {
                dt.insert(Point2::new(x + offset_x, y + offset_y))
                    .expect("finite coordinates");
            }
        }
    }

    let mut faces: Vec<[u32; 3]> = Vec::with_capacity(2 * m);
    for face in dt.inner_faces() {
        let centroid = face.center();
        if centroid.x < 0.0 || centroid.x >= period || centroid.y < 0.0 || centroid.y >= period {
            continue;
        }
        let [a, b, c] = face.vertices().map(|v| (v.fix().index() % m) as u32);
        // Canonical rotation: smallest index first, cyclic order preserved.
        let tri = if a <= b && a <= c {
            [a, b, c]
        } else if b <= a && b <= c {
            [b, c, a]
        } else {
            [c, a, b]
        };
        faces.push(tri);
    }
    faces.sort_unstable();
    faces.dedup();
    if faces.len() != 2 * m {
        return Err(BenchError::Triangulation {
            got: faces.len(),
            expected: 2 * m,
        });
    }
    // Parameter-plane CCW maps to inward surface normals; reverse each face.
    Ok(faces.into_iter().map(|[a, b, c]| vec![a, c, b]).collect())
}

/// Closed triangle mesh from a latitude-longitude sampling of the unit
/// sphere: each grid quad is split along a seeded random diagonal, and each
/// pole row collapses to a single vertex with a triangle fan.
///
/// Produces `n_theta * (n_phi - 1) + 2` vertices; the default 30x17 grid
/// yields 482.
pub fn sample_sphere_irregular(
    n_theta: usize,
    n_phi: usize,
    seed: u64,
) -> Result<(Mesh, GroundTruth), BenchError> {
    if n_theta < 3 || n_phi < 3 {
        return Err(BenchError::Precondition(format!(
            "sphere grid must be at least 3x3, got {n_theta}x{n_phi}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ring_count = n_phi - 1;
    let mut vertices = Vec::with_capacity(n_theta * ring_count + 2);
    let mut params = Vec::with_capacity(n_theta * ring_count + 2);
    for j in 1..=ring_count {
        let phi = PI * j as f64 / n_phi as f64;
        for i in 0..n_theta {
            let theta = TAU * i as f64 / n_theta as f64;
            vertices.push(Point3::new(
                phi.sin() * theta.cos(),
                phi.sin() * theta.sin(),
                phi.cos(),
            ));
            params.push((theta, phi));
        }
    }
    let north = vertices.len() as u32;
    vertices.push(Point3::new(0.0, 0.0, 1.0));
    params.push((0.0, 0.0));
    let south = vertices.len() as u32;
    vertices.push(Point3::new(0.0, 0.0, -1.0));
    params.push((0.0, PI));

    let ring = |j: usize, i: usize| ((j - 1) * n_theta + (i % n_theta)) as u32;
    let mut faces = Vec::new();
    for i in 0..n_theta {
        faces.push(vec![north, ring(1, i), ring(1, i + 1)]);
    }
    for j in 1..ring_count {
        for i in 0..n_theta {
            let a = ring(j, i);
            let b = ring(j + 1, i);
            let c = ring(j + 1, i + 1);
            let d = ring(j, i + 1);
            if rng.random::<bool>() {
                faces.push(vec![a, b, c]);
                faces.push(vec![a, c, d]);
            } else {
                faces.push(vec![a, b, d]);
                faces.push(vec![b, c, d]);
            }
        }
    }
    for i in 0..n_theta {
        faces.push(vec![south, ring(ring_count, i + 1), ring(ring_count, i)]);
    }

    let n = vertices.len();
    let mesh = Mesh::new(vertices, faces)?;
    Ok((
        mesh,
        GroundTruth {
            mean: vec![-1.0; n],
            gaussian: vec![1.0; n],
            params,
        },
    ))
}

/// Deviation statistics of per-vertex estimates against ground truth.
///
/// Vertices flagged `fit_failed` are excluded and counted; summation runs in
/// ascending vertex order so the result is independent of how the estimates
/// were scheduled.
pub fn error_report(
    estimates: &[CurvatureResult],
    truth: &GroundTruth,
) -> Result<ErrorReport, BenchError> {
    if estimates.len() != truth.mean.len() {
        return Err(BenchError::LengthMismatch {
            estimates: estimates.len(),
            truth: truth.mean.len(),
        });
    }
    let mut n_failed = 0usize;
    let mut count = 0usize;
    let mut h_sum = 0.0;
    let mut k_sum = 0.0;
    let mut h_min = f64::INFINITY;
    let mut h_max = f64::NEG_INFINITY;
    let mut k_min = f64::INFINITY;
    let mut k_max = f64::NEG_INFINITY;
    for (i, est) in estimates.iter().enumerate() {
        if est.flags.fit_failed {
            n_failed += 1;
            continue;
        }
        count += 1;
        h_sum += (est.mean - truth.mean[i]).abs();
        k_sum += (est.gaussian - truth.gaussian[i]).abs();
        h_min = h_min.min(est.mean);
        h_max = h_max.max(est.mean);
        k_min = k_min.min(est.gaussian);
        k_max = k_max.max(est.gaussian);
    }
    if count == 0 {
        return Err(BenchError::EmptyReport);
    }
    Ok(ErrorReport {
        h_min,
        h_max,
        h_avg: h_sum / count as f64,
        k_min,
        k_max,
        k_avg: k_sum / count as f64,
        n_failed,
    })
}
