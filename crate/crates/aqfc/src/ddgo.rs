//! Discrete-differential-geometry-operator baseline (DDGO): Gaussian
//! curvature from the angle deficit and mean curvature from the cotangent
//! Laplacian, both over the per-vertex mixed (Voronoi) area.
//!
//! Sign convention matches the quadric-fit estimator: a unit sphere with
//! outward normals reports `H = -1`, `K = 1`.

use std::f64::consts::PI;

use nalgebra::{Point3, Vector3};
use rayon::prelude::*;

use crate::curvature::{CurvatureResult, ResultFlags};
use crate::mesh::{Mesh, MeshError};

/// One vertex of the baseline estimate.
#[derive(Debug, Clone, Copy)]
pub struct DdgoResult {
    pub mean: f64,
    pub gaussian: f64,
    /// Mixed Voronoi area used as the denominator.
    pub mixed_area: f64,
    /// One-sided sums: the vertex lies on a boundary.
    pub boundary: bool,
}

impl DdgoResult {
    pub fn to_curvature_result(self) -> CurvatureResult {
        let flags = ResultFlags {
            boundary_vertex: self.boundary,
            ..ResultFlags::default()
        };
        CurvatureResult::from_mean_gaussian(self.mean, self.gaussian, flags)
    }
}

/// Precomputed triangulation and normals for whole-mesh baseline runs.
///
/// Polygon faces are fan-triangulated deterministically from their
/// lowest-index corner. Vertex normals (for the sign of H) come from
/// unweighted face-normal averaging.
pub struct DdgoEstimator<'a> {
    mesh: &'a Mesh,
    triangles: Vec<[u32; 3]>,
    vertex_triangles: Vec<Vec<u32>>,
    normals: Vec<Vector3<f64>>,
}

impl<'a> DdgoEstimator<'a> {
    pub fn new(mesh: &'a Mesh) -> Result<Self, MeshError> {
        let normals = mesh.vertex_normals()?;
        let mut triangles = Vec::new();
        for face in mesh.faces() {
            let n = face.len();
            let start = face
                .iter()
                .enumerate()
                .min_by_key(|(_, &v)| v)
                .map(|(k, _)| k)
                .unwrap();
            for i in 1..n - 1 {
                triangles.push([
                    face[start],
                    face[(start + i) % n],
                    face[(start + i + 1) % n],
                ]);
            }
        }
        let mut vertex_triangles = vec![Vec::new(); mesh.vertex_count()];
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                vertex_triangles[v as usize].push(t as u32);
            }
        }
        Ok(Self {
            mesh,
            triangles,
            vertex_triangles,
            normals,
        })
    }

    /// Mixed Voronoi area around a vertex: circumcentric area for non-obtuse
    /// triangles, half the triangle area when the triangle is obtuse at the
    /// vertex, a quarter when obtuse elsewhere.
    pub fn mixed_area(&self, vertex: usize) -> f64 {
        let p = self.mesh.vertex(vertex);
        let mut area = 0.0;
        for &t in &self.vertex_triangles[vertex] {
            let (b, c) = self.opposite_corners(t, vertex);
            area += mixed_area_contribution(&p, &b, &c);
        }
        area
    }

    /// The two non-center corners of triangle `t`, in cyclic order after the
    /// center vertex.
    fn opposite_corners(&self, t: u32, vertex: usize) -> (Point3<f64>, Point3<f64>) {
        let tri = self.triangles[t as usize];
        let v = vertex as u32;
        let (b, c) = if tri[0] == v {
            (tri[1], tri[2])
        } else if tri[1] == v {
            (tri[2], tri[0])
        } else {
            (tri[0], tri[1])
        };
        (self.mesh.vertex(b as usize), self.mesh.vertex(c as usize))
    }

    /// Baseline estimate at one vertex.
    pub fn estimate(&self, vertex: usize) -> DdgoResult {
        let p = self.mesh.vertex(vertex);
        let mut angle_sum = 0.0;
        let mut area = 0.0;
        let mut laplacian = Vector3::zeros();
        for &t in &self.vertex_triangles[vertex] {
            let (b, c) = self.opposite_corners(t, vertex);
            angle_sum += angle_at(&p, &b, &c);
            area += mixed_area_contribution(&p, &b, &c);
            // Edge (v, b) is opposite the angle at c and vice versa.
            laplacian += cotangent(&c, &p, &b) * (p - b);
            laplacian += cotangent(&b, &p, &c) * (p - c);
        }
        if area <= 0.0 {
            return DdgoResult {
                mean: f64::NAN,
                gaussian: f64::NAN,
                mixed_area: area,
                boundary: self.mesh.is_boundary_vertex(vertex),
            };
        }
        let gaussian = (2.0 * PI - angle_sum) / area;
        let m = laplacian / (2.0 * area);
        let sign = if m.dot(&self.normals[vertex]) >= 0.0 {
            1.0
        } else {
            -1.0
        };
        // Negated so that a sphere with outward normals reports H = -1.
        let mean = -sign * m.norm() / 2.0;
        DdgoResult {
            mean,
            gaussian,
            mixed_area: area,
            boundary: self.mesh.is_boundary_vertex(vertex),
        }
    }

    /// Estimate every vertex; output ordered by vertex index regardless of
    /// scheduling.
    pub fn estimate_all(&self) -> Vec<DdgoResult>
    where
        Self: Sync,
    {
        (0..self.mesh.vertex_count())
            .into_par_iter()
            .map(|v| self.estimate(v))
            .collect()
    }
}

/// Convenience wrapper estimating a single vertex; builds the triangulation
/// on every call, so use [`DdgoEstimator`] for whole-mesh runs.
pub fn ddgo_estimate(mesh: &Mesh, vertex: usize) -> Result<(f64, f64), MeshError> {
    let est = DdgoEstimator::new(mesh)?;
    let r = est.estimate(vertex);
    Ok((r.mean, r.gaussian))
}

/// Interior angle at `p` in triangle (p, b, c).
fn angle_at(p: &Point3<f64>, b: &Point3<f64>, c: &Point3<f64>) -> f64 {
    let u = b - p;
    let v = c - p;
    let denom = u.norm() * v.norm();
    if denom == 0.0 {
        return 0.0;
    }
    (u.dot(&v) / denom).clamp(-1.0, 1.0).acos()
}

/// Cotangent of the angle at `apex` in triangle (apex, p, q); 0 for
/// degenerate triangles.
fn cotangent(apex: &Point3<f64>, p: &Point3<f64>, q: &Point3<f64>) -> f64 {
    let u = p - apex;
    let v = q - apex;
    let cross = u.cross(&v).norm();
    if cross <= 1e-14 * u.norm() * v.norm() {
        0.0
    } else {
        u.dot(&v) / cross
    }
}

fn mixed_area_contribution(p: &Point3<f64>, b: &Point3<f64>, c: &Point3<f64>) -> f64 {
    let obtuse_at_p = (b - p).dot(&(c - p)) < 0.0;
    let obtuse_at_b = (p - b).dot(&(c - b)) < 0.0;
    let obtuse_at_c = (p - c).dot(&(b - c)) < 0.0;
    let tri_area = 0.5 * (b - p).cross(&(c - p)).norm();
    if obtuse_at_p {
        tri_area / 2.0
    } else if obtuse_at_b || obtuse_at_c {
        tri_area / 4.0
    } else {
        // Voronoi: (|pb|^2 cot(angle at c) + |pc|^2 cot(angle at b)) / 8.
        ((b - p).norm_squared() * cotangent(c, p, b) + (c - p).norm_squared() * cotangent(b, p, c))
            / 8.0
    }
}
