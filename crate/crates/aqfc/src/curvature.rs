//! Implicit-surface curvature formulas, the per-vertex quadric-fit curvature
//! estimator, and the derived shape quantities (principal curvatures,
//! curvedness, shape index).
//!
//! Sign convention: curvatures are reported exactly as the implicit formulas
//! produce them for outward-pointing vertex normals. A unit sphere with
//! outward normals has `H = -1`, `K = 1`.

use std::fmt;

use nalgebra::{Matrix3, Point3, Vector3};
use rayon::prelude::*;
use thiserror::Error;

use crate::fit::{self, ProjectionParams, Quadric};
use crate::mesh::{Mesh, Neighborhood, VertexNormal};

/// Gradient norms below this are treated as singular points.
const GRADIENT_FLOOR: f64 = 1e-12;

/// Curvedness below this makes the shape index indeterminate (planar point).
const PLANAR_FLOOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum CurvatureError {
    #[error("gradient norm {norm:.3e} below regularity floor; curvature undefined")]
    SingularPoint { norm: f64 },
}

/// Diagnostic flags carried by a per-vertex curvature result.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ResultFlags {
    /// The fit solver needed Tikhonov regularization.
    pub regularized: bool,
    /// Newton projection did not converge; a first-order foot point was used.
    pub first_order_projection: bool,
    /// The fitted quadric degenerated to a plane.
    pub degenerate_to_plane: bool,
    /// Fit or projection failed entirely; curvatures are NaN.
    pub fit_failed: bool,
    /// The vertex lies on a mesh boundary.
    pub boundary_vertex: bool,
}

impl ResultFlags {
    pub fn is_empty(&self) -> bool {
        !(self.regularized
            || self.first_order_projection
            || self.degenerate_to_plane
            || self.fit_failed
            || self.boundary_vertex)
    }
}

impl fmt::Display for ResultFlags {
    /// Comma-joined flag names, or `-` when no flag is set.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "-");
        }
        let mut names = Vec::new();
        if self.regularized {
            names.push("regularized");
        }
        if self.first_order_projection {
            names.push("first_order_projection");
        }
        if self.degenerate_to_plane {
            names.push("degenerate_to_plane");
        }
        if self.fit_failed {
            names.push("fit_failed");
        }
        if self.boundary_vertex {
            names.push("boundary_vertex");
        }
        write!(f, "{}", names.join(","))
    }
}

/// Per-vertex curvature estimates and derived quantities.
#[derive(Debug, Clone, Copy)]
pub struct CurvatureResult {
    /// Mean curvature (1 / length).
    pub mean: f64,
    /// Gaussian curvature (1 / length^2).
    pub gaussian: f64,
    /// Larger principal curvature.
    pub kappa1: f64,
    /// Smaller principal curvature.
    pub kappa2: f64,
    /// Curvedness, >= 0.
    pub curvedness: f64,
    /// Shape index in [-1, 1]; NaN at planar points where it is indeterminate.
    pub shape_index: f64,
    pub flags: ResultFlags,
}

impl CurvatureResult {
    /// Fill the derived quantities from mean and Gaussian curvature.
    pub fn from_mean_gaussian(mean: f64, gaussian: f64, flags: ResultFlags) -> Self {
        let (kappa1, kappa2) = principal_curvatures(mean, gaussian);
        let r = curvedness(mean, gaussian);
        let s = shape_index(mean, gaussian).unwrap_or(f64::NAN);
        Self {
            mean,
            gaussian,
            kappa1,
            kappa2,
            curvedness: r,
            shape_index: s,
            flags,
        }
    }

    /// A failed estimate: NaN everywhere, `fit_failed` set.
    pub fn failed(mut flags: ResultFlags) -> Self {
        flags.fit_failed = true;
        Self {
            mean: f64::NAN,
            gaussian: f64::NAN,
            kappa1: f64::NAN,
            kappa2: f64::NAN,
            curvedness: f64::NAN,
            shape_index: f64::NAN,
            flags,
        }
    }
}

/// Transpose of the cofactor matrix; `adj(A) * A = det(A) * I`.
fn adjugate(m: &Matrix3<f64>) -> Matrix3<f64> {
    Matrix3::new(
        m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)],
        m[(0, 2)] * m[(2, 1)] - m[(0, 1)] * m[(2, 2)],
        m[(0, 1)] * m[(1, 2)] - m[(0, 2)] * m[(1, 1)],
        m[(1, 2)] * m[(2, 0)] - m[(1, 0)] * m[(2, 2)],
        m[(0, 0)] * m[(2, 2)] - m[(0, 2)] * m[(2, 0)],
        m[(0, 2)] * m[(1, 0)] - m[(0, 0)] * m[(1, 2)],
        m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)],
        m[(0, 1)] * m[(2, 0)] - m[(0, 0)] * m[(2, 1)],
        m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
    )
}

/// Gaussian curvature of an implicit surface from its gradient and Hessian:
/// `K = g^T adj(H) g / |g|^4`.
pub fn implicit_gaussian(grad: &Vector3<f64>, hess: &Matrix3<f64>) -> Result<f64, CurvatureError> {
    let norm2 = grad.norm_squared();
    if norm2.sqrt() <= GRADIENT_FLOOR {
        return Err(CurvatureError::SingularPoint { norm: norm2.sqrt() });
    }
    Ok((grad.transpose() * adjugate(hess) * grad)[0] / (norm2 * norm2))
}

/// Mean curvature of an implicit surface from its gradient and Hessian:
/// `H = (g^T H g - |g|^2 tr(H)) / (2 |g|^3)`.
pub fn implicit_mean(grad: &Vector3<f64>, hess: &Matrix3<f64>) -> Result<f64, CurvatureError> {
    let norm2 = grad.norm_squared();
    let norm = norm2.sqrt();
    if norm <= GRADIENT_FLOOR {
        return Err(CurvatureError::SingularPoint { norm });
    }
    let quad = (grad.transpose() * hess * grad)[0];
    Ok((quad - norm2 * hess.trace()) / (2.0 * norm2 * norm))
}

/// The gradient of `q` at the projected point, rescaled to the length of the
/// vertex normal: `s(n, V) = |n| * grad q(p) / |grad q(p)|`.
///
/// With unit vertex normals this is simply the unit gradient direction, which
/// keeps the gradient-norm powers in the curvature denominators from
/// amplifying fitting error.
pub fn corrected_gradient(
    n: &Vector3<f64>,
    q: &Quadric,
    projected: &Point3<f64>,
) -> Result<Vector3<f64>, CurvatureError> {
    let g = q.gradient(projected);
    let norm = g.norm();
    if norm <= GRADIENT_FLOOR {
        return Err(CurvatureError::SingularPoint { norm });
    }
    Ok(g * (n.norm() / norm))
}

/// Principal curvatures `H +- sqrt(H^2 - K)`, with the discriminant clamped
/// at zero so floating noise at umbilics cannot produce NaN.
pub fn principal_curvatures(mean: f64, gaussian: f64) -> (f64, f64) {
    let d = (mean * mean - gaussian).max(0.0).sqrt();
    (mean + d, mean - d)
}

/// Curvedness `sqrt(2 H^2 - K)`, clamped at zero.
pub fn curvedness(mean: f64, gaussian: f64) -> f64 {
    (2.0 * mean * mean - gaussian).max(0.0).sqrt()
}

/// Shape index in [-1, 1], or `None` at planar points where it is
/// indeterminate.
///
/// Computed from the principal curvatures with a two-argument arctangent so
/// the umbilic case `kappa1 = kappa2` yields `-sign(H) * 1` instead of a
/// division by zero.
pub fn shape_index(mean: f64, gaussian: f64) -> Option<f64> {
    if curvedness(mean, gaussian) < PLANAR_FLOOR {
        return None;
    }
    let (k1, k2) = principal_curvatures(mean, gaussian);
    Some(-std::f64::consts::FRAC_2_PI * (k1 + k2).atan2(k1 - k2))
}

/// Parameters of the quadric-fit estimator.
#[derive(Debug, Clone, Copy)]
pub struct AqfcParams {
    /// Minimum number of vertex-normals per fitting neighborhood.
    pub neighborhood_size: usize,
    pub projection: ProjectionParams,
}

impl Default for AqfcParams {
    fn default() -> Self {
        Self {
            neighborhood_size: 20,
            projection: ProjectionParams::default(),
        }
    }
}

/// Estimate curvature at one vertex and also return the fitted quadric in
/// mesh coordinates (when a fit was obtained).
///
/// Failures never panic: fit or projection failure yields NaN curvatures with
/// the `fit_failed` flag so whole-mesh runs can continue.
pub fn aqfc_estimate_detailed(
    mesh: &Mesh,
    normals: &[Vector3<f64>],
    vertex: usize,
    params: &AqfcParams,
) -> (CurvatureResult, Option<Quadric>) {
    let mut flags = ResultFlags {
        boundary_vertex: mesh.is_boundary_vertex(vertex),
        ..ResultFlags::default()
    };

    let nb = match mesh.neighborhood(normals, vertex, params.neighborhood_size) {
        Ok(nb) => nb,
        Err(_) => return (CurvatureResult::failed(flags), None),
    };

    // Fit in coordinates translated so the center vertex sits at the origin;
    // this conditions the 10x10 system. The coefficients are transported back
    // exactly, so the reported quadric lives in mesh coordinates.
    let center = nb.center.position;
    let local = Neighborhood {
        center: VertexNormal {
            position: Point3::origin(),
            normal: nb.center.normal,
        },
        samples: nb
            .samples
            .iter()
            .map(|s| VertexNormal {
                position: Point3::from(s.position - center),
                normal: s.normal,
            })
            .collect(),
        ring_depth: nb.ring_depth,
    };

    let weights = fit::compute_weights(&local);
    let system = fit::assemble_normal_equations(&local, &weights);
    let solved = match fit::solve_quadric(&system) {
        Ok(s) => s,
        Err(_) => return (CurvatureResult::failed(flags), None),
    };
    flags.regularized = solved.regularized;
    flags.degenerate_to_plane = solved.degenerate_to_plane;
    let global_quadric = solved.quadric.translated(&center.coords);

    let projected = match fit::project_point(&solved.quadric, &Point3::origin(), &params.projection)
    {
        Ok(p) => p,
        Err(_) => return (CurvatureResult::failed(flags), Some(global_quadric)),
    };
    flags.first_order_projection = projected.first_order;

    let hessian = solved.quadric.hessian();
    let curvatures = corrected_gradient(&nb.center.normal, &solved.quadric, &projected.point)
        .and_then(|s| {
            let h = implicit_mean(&s, &hessian)?;
            let k = implicit_gaussian(&s, &hessian)?;
            Ok((h, k))
        });
    match curvatures {
        Ok((h, k)) => (
            CurvatureResult::from_mean_gaussian(h, k, flags),
            Some(global_quadric),
        ),
        Err(_) => (CurvatureResult::failed(flags), Some(global_quadric)),
    }
}

/// Estimate curvature at one vertex.
pub fn aqfc_estimate(
    mesh: &Mesh,
    normals: &[Vector3<f64>],
    vertex: usize,
    params: &AqfcParams,
) -> CurvatureResult {
    aqfc_estimate_detailed(mesh, normals, vertex, params).0
}

/// Estimate curvature at every vertex. Evaluation may run in parallel; the
/// output is ordered by vertex index regardless of scheduling.
pub fn aqfc_all(mesh: &Mesh, normals: &[Vector3<f64>], params: &AqfcParams) -> Vec<CurvatureResult> {
    (0..mesh.vertex_count())
        .into_par_iter()
        .map(|v| aqfc_estimate(mesh, normals, v, params))
        .collect()
}

/// Like [`aqfc_all`] but keeps the fitted quadrics for dumping.
pub fn aqfc_all_detailed(
    mesh: &Mesh,
    normals: &[Vector3<f64>],
    params: &AqfcParams,
) -> Vec<(CurvatureResult, Option<Quadric>)> {
    (0..mesh.vertex_count())
        .into_par_iter()
        .map(|v| aqfc_estimate_detailed(mesh, normals, v, params))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmark;
    use crate::test_util::quad_grid;
    use approx::assert_relative_eq;
    use nalgebra::Rotation3;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const UNIT_SPHERE: [f64; 10] = [0.5, 0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -0.5];

    #[test]
    fn gaussian_hand_values() {
        let g = Vector3::new(1.0, 0.0, 0.0);
        assert_relative_eq!(implicit_gaussian(&g, &Matrix3::identity()).unwrap(), 1.0);
        assert_eq!(implicit_gaussian(&g, &Matrix3::zeros()).unwrap(), 0.0);
        // Sphere quadric x^2+y^2+z^2-1 at (1,0,0): gradient (2,0,0), Hessian 2I.
        let g2 = Vector3::new(2.0, 0.0, 0.0);
        assert_relative_eq!(
            implicit_gaussian(&g2, &(Matrix3::identity() * 2.0)).unwrap(),
            1.0
        );
    }

    #[test]
    fn mean_hand_values() {
        let g = Vector3::new(1.0, 0.0, 0.0);
        assert_relative_eq!(implicit_mean(&g, &Matrix3::identity()).unwrap(), -1.0);
        assert_eq!(implicit_mean(&g, &Matrix3::zeros()).unwrap(), 0.0);
        let g2 = Vector3::new(0.0, 0.0, 1.0);
        let hess = Matrix3::from_diagonal(&Vector3::new(2.0, 0.0, 0.0));
        assert_relative_eq!(implicit_mean(&g2, &hess).unwrap(), -1.0);
    }

    #[test]
    fn singular_point_rejected() {
        let tiny = Vector3::new(1e-13, 0.0, 0.0);
        assert!(implicit_gaussian(&tiny, &Matrix3::identity()).is_err());
        assert!(implicit_mean(&tiny, &Matrix3::identity()).is_err());
    }

    #[test]
    fn rescaling_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let g = Vector3::new(
                rng.random::<f64>() * 2.0 - 1.0,
                rng.random::<f64>() * 2.0 - 1.0,
                rng.random::<f64>() * 2.0 - 1.0,
            );
            if g.norm() < 1e-3 {
                continue;
            }
            let mut h = Matrix3::zeros();
            for i in 0..3 {
                for j in i..3 {
                    let v = rng.random::<f64>() * 2.0 - 1.0;
                    h[(i, j)] = v;
                    h[(j, i)] = v;
                }
            }
            let c = rng.random::<f64>() * 10.0 + 0.1;
            let k0 = implicit_gaussian(&g, &h).unwrap();
            let k1 = implicit_gaussian(&(g * c), &(h * c)).unwrap();
            assert_relative_eq!(k0, k1, max_relative = 1e-12, epsilon = 1e-14);
            let h0 = implicit_mean(&g, &h).unwrap();
            let h1 = implicit_mean(&(g * c), &(h * c)).unwrap();
            assert_relative_eq!(h0, h1, max_relative = 1e-12, epsilon = 1e-14);
        }
    }

    #[test]
    fn corrected_gradient_normalizes() {
        let sphere = Quadric::new(UNIT_SPHERE);
        let p = Point3::new(1.0, 0.0, 0.0);
        let n = Vector3::new(0.0, 1.0, 0.0); // any unit normal
        assert_relative_eq!(
            corrected_gradient(&n, &sphere, &p).unwrap(),
            Vector3::new(1.0, 0.0, 0.0)
        );
        let plane_z = Quadric::new([0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert_relative_eq!(
            corrected_gradient(&n, &plane_z, &Point3::origin()).unwrap(),
            Vector3::z()
        );
        let mut scaled = UNIT_SPHERE;
        for c in &mut scaled {
            *c *= 5.0;
        }
        assert_relative_eq!(
            corrected_gradient(&n, &Quadric::new(scaled), &p).unwrap(),
            Vector3::new(1.0, 0.0, 0.0)
        );
    }

    #[test]
    fn principal_curvature_cases() {
        assert_eq!(principal_curvatures(-1.0, 1.0), (-1.0, -1.0));
        assert_eq!(principal_curvatures(0.0, -1.0), (1.0, -1.0));
        // Noise pushes the discriminant slightly negative; clamp keeps both
        // curvatures equal to H.
        let (k1, k2) = principal_curvatures(1.0, 1.0 + 1e-12);
        assert_eq!(k1, 1.0);
        assert_eq!(k2, 1.0);
    }

    #[test]
    fn curvedness_cases() {
        assert_relative_eq!(curvedness(-1.0, 1.0), 1.0);
        assert_eq!(curvedness(0.0, 0.0), 0.0);
        assert_relative_eq!(
            curvedness(-0.625, 0.25),
            (17.0f64 / 32.0).sqrt(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn shape_index_cases() {
        // Unit sphere with outward normals: kappa1 = kappa2 = -1 -> S = +1.
        assert_relative_eq!(shape_index(-1.0, 1.0).unwrap(), 1.0);
        // Symmetric saddle.
        assert_relative_eq!(shape_index(0.0, -1.0).unwrap(), 0.0);
        // Planar point: indeterminate.
        assert!(shape_index(0.0, 0.0).is_none());
    }

    #[test]
    fn consistency_triple() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let h = rng.random::<f64>() * 4.0 - 2.0;
            let k = rng.random::<f64>() * 4.0 - 2.0;
            let res = CurvatureResult::from_mean_gaussian(h, k, ResultFlags::default());
            if h * h >= k {
                assert_relative_eq!(res.kappa1 * res.kappa2, k, max_relative = 1e-9, epsilon = 1e-12);
                assert_relative_eq!((res.kappa1 + res.kappa2) / 2.0, h, max_relative = 1e-9, epsilon = 1e-12);
            }
            if 2.0 * h * h >= k {
                assert_relative_eq!(
                    res.curvedness * res.curvedness,
                    2.0 * h * h - k,
                    max_relative = 1e-9,
                    epsilon = 1e-12
                );
            }
            assert!(res.kappa1 >= res.kappa2);
            assert!(res.curvedness >= 0.0);
        }
    }

    #[test]
    fn exact_sphere_recovery() {
        // Positions exactly on the unit sphere, analytic outward normals.
        let (mesh, _) = benchmark::sample_sphere_irregular(30, 17, 1).unwrap();
        let normals: Vec<Vector3<f64>> = mesh.vertices().iter().map(|p| p.coords).collect();
        let params = AqfcParams::default();
        for vertex in [0, 57, 240, 399, 480, 481] {
            let (res, quadric) = aqfc_estimate_detailed(&mesh, &normals, vertex, &params);
            assert!(!res.flags.fit_failed);
            assert!((res.mean + 1.0).abs() < 1e-8, "H at {vertex}: {}", res.mean);
            assert!((res.gaussian - 1.0).abs() < 1e-8, "K at {vertex}: {}", res.gaussian);
            let q = quadric.unwrap();
            for (i, expected) in UNIT_SPHERE.iter().enumerate() {
                assert!(
                    (q.coefficients()[i] - expected).abs() < 1e-9,
                    "coefficient {i} at vertex {vertex}: {}",
                    q.coefficients()[i]
                );
            }
        }
    }

    #[test]
    fn exact_plane_is_flat() {
        let mesh = quad_grid(8, 8);
        let normals = vec![Vector3::z(); mesh.vertex_count()];
        let res = aqfc_estimate(&mesh, &normals, 4 * 9 + 4, &AqfcParams::default());
        assert!(res.flags.degenerate_to_plane);
        assert!(res.mean.abs() < 1e-10, "H = {}", res.mean);
        assert!(res.gaussian.abs() < 1e-10, "K = {}", res.gaussian);
        assert!(res.shape_index.is_nan());
    }

    #[test]
    fn torus_outer_equator() {
        let (mesh, truth) = benchmark::sample_torus_regular(100, 100).unwrap();
        let normals = mesh.vertex_normals().unwrap();
        // Vertex 0 sits at theta = 0 (outer equator).
        assert_eq!(truth.params[0], (0.0, 0.0));
        let res = aqfc_estimate(&mesh, &normals, 0, &AqfcParams::default());
        assert!((res.mean - (-0.625)).abs() < 0.02, "H = {}", res.mean);
        assert!((res.gaussian - 0.25).abs() < 0.02, "K = {}", res.gaussian);
    }

    #[test]
    fn normal_flip_negates_mean() {
        let (mesh, _) = benchmark::sample_torus_regular(20, 20).unwrap();
        let normals = mesh.vertex_normals().unwrap();
        let flipped: Vec<Vector3<f64>> = normals.iter().map(|n| -n).collect();
        let params = AqfcParams::default();
        for vertex in [0, 7, 133, 399] {
            let a = aqfc_estimate(&mesh, &normals, vertex, &params);
            let b = aqfc_estimate(&mesh, &flipped, vertex, &params);
            assert_relative_eq!(a.mean, -b.mean, max_relative = 1e-9, epsilon = 1e-12);
            assert_relative_eq!(a.gaussian, b.gaussian, max_relative = 1e-9, epsilon = 1e-12);
        }
    }

    #[test]
    fn rigid_motion_invariance() {
        let (mesh, _) = benchmark::sample_torus_regular(20, 20).unwrap();
        let rot = Rotation3::from_euler_angles(0.7, 0.2, -1.3);
        let t = Vector3::new(4.0, -1.5, 2.5);
        let moved = Mesh::new(
            mesh.vertices().iter().map(|p| rot * p + t).collect(),
            mesh.faces().to_vec(),
        )
        .unwrap();
        let params = AqfcParams::default();
        let normals = mesh.vertex_normals().unwrap();
        let moved_normals = moved.vertex_normals().unwrap();
        for vertex in (0..mesh.vertex_count()).step_by(37) {
            let a = aqfc_estimate(&mesh, &normals, vertex, &params);
            let b = aqfc_estimate(&moved, &moved_normals, vertex, &params);
            assert!(
                (a.mean - b.mean).abs() < 1e-6,
                "H changed under rigid motion at {vertex}: {} vs {}",
                a.mean,
                b.mean
            );
            assert!(
                (a.gaussian - b.gaussian).abs() < 1e-6,
                "K changed under rigid motion at {vertex}: {} vs {}",
                a.gaussian,
                b.gaussian
            );
        }
    }

    #[test]
    fn boundary_vertices_are_flagged_but_processed() {
        let mesh = quad_grid(8, 8);
        let normals = vec![Vector3::z(); mesh.vertex_count()];
        let corner = aqfc_estimate(&mesh, &normals, 0, &AqfcParams::default());
        assert!(corner.flags.boundary_vertex);
        assert!(!corner.flags.fit_failed);
        assert!(corner.mean.abs() < 1e-9);
        let interior = aqfc_estimate(&mesh, &normals, 4 * 9 + 4, &AqfcParams::default());
        assert!(!interior.flags.boundary_vertex);
    }

    #[test]
    fn flags_render_for_dumps() {
        assert_eq!(ResultFlags::default().to_string(), "-");
        let flags = ResultFlags {
            regularized: true,
            degenerate_to_plane: true,
            ..ResultFlags::default()
        };
        assert_eq!(flags.to_string(), "regularized,degenerate_to_plane");
    }
}
