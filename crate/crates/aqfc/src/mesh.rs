//! Polygon-mesh representation with derived adjacency, vertex normals and
//! ring-growing neighborhood extraction.
//!
//! A [`Mesh`] is an indexed face set: a list of 3D vertex positions plus a
//! list of faces, each face a counter-clockwise (viewed from outside) list of
//! vertex indices. Adjacency maps are built eagerly at construction and the
//! mesh is immutable afterwards, so all read operations are safe to call
//! concurrently.

use std::collections::{BTreeSet, HashSet};

use nalgebra::{Point3, Vector3};
use thiserror::Error;

/// Minimum number of samples a fitting neighborhood must contain.
///
/// The fitted quadric has 10 unknowns; fewer samples leave the position term
/// of the normal-equation system rank-deficient.
pub const NEIGHBORHOOD_FLOOR: usize = 10;

/// Errors raised by mesh construction and per-vertex queries.
#[derive(Debug, Error)]
pub enum MeshError {
    #[error("face {face} references vertex {index}, but the mesh has {vertex_count} vertices")]
    FaceIndexOutOfRange {
        face: usize,
        index: u32,
        vertex_count: usize,
    },
    #[error("face {face} is degenerate: {reason}")]
    DegenerateFace { face: usize, reason: &'static str },
    #[error("face {face} has zero area")]
    ZeroAreaFace { face: usize },
    #[error("vertex {vertex} has no incident face")]
    IsolatedVertex { vertex: usize },
    #[error("vertex {vertex} has no non-degenerate incident face")]
    NoValidIncidentFace { vertex: usize },
    #[error("face normals around vertex {vertex} cancel; averaged normal is degenerate")]
    DegenerateVertexNormal { vertex: usize },
    #[error("neighborhood size {requested} is below the floor of {floor}")]
    NeighborhoodTooSmall { requested: usize, floor: usize },
    #[error(
        "connected component around vertex {vertex} has only {achievable} vertices, \
         {requested} requested"
    )]
    ComponentTooSmall {
        vertex: usize,
        achievable: usize,
        requested: usize,
    },
}

/// A position paired with a unit normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexNormal {
    pub position: Point3<f64>,
    /// Unit length within 1e-12.
    pub normal: Vector3<f64>,
}

/// A fitting neighborhood: the processed vertex-normal plus the vertex-normals
/// of the rings grown around it.
///
/// `samples[0]` is always the center. The remaining samples are ordered by
/// (ring depth, vertex index), so identical inputs always produce identical
/// sample order.
#[derive(Debug, Clone)]
pub struct Neighborhood {
    pub center: VertexNormal,
    pub samples: Vec<VertexNormal>,
    /// Number of ring expansions performed (0 = the center alone).
    pub ring_depth: usize,
}

impl Neighborhood {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Immutable indexed polygon mesh with derived adjacency.
#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Point3<f64>>,
    faces: Vec<Vec<u32>>,
    /// vertex -> indices of incident faces, ascending.
    vertex_faces: Vec<Vec<u32>>,
    /// vertex -> edge-adjacent vertices, ascending.
    adjacent: Vec<Vec<u32>>,
    /// vertex -> lies on an edge with exactly one incident face.
    boundary: Vec<bool>,
    bbox_diag_sq: f64,
}

impl Mesh {
    /// Build a mesh from vertex positions and faces, validating indices and
    /// constructing all adjacency maps.
    ///
    /// Every face must have at least 3 vertices, all indices in range and no
    /// repeated vertex within a face.
    pub fn new(vertices: Vec<Point3<f64>>, faces: Vec<Vec<u32>>) -> Result<Self, MeshError> {
        let vertex_count = vertices.len();
        for (fi, face) in faces.iter().enumerate() {
            if face.len() < 3 {
                return Err(MeshError::DegenerateFace {
                    face: fi,
                    reason: "fewer than 3 vertices",
                });
            }
            for &v in face {
                if v as usize >= vertex_count {
                    return Err(MeshError::FaceIndexOutOfRange {
                        face: fi,
                        index: v,
                        vertex_count,
                    });
                }
            }
            // Faces are short; the quadratic scan beats hashing here.
            for i in 0..face.len() {
                for j in (i + 1)..face.len() {
                    if face[i] == face[j] {
                        return Err(MeshError::DegenerateFace {
                            face: fi,
                            reason: "repeated vertex index",
                        });
                    }
                }
            }
        }

        let mut vertex_faces = vec![Vec::new(); vertex_count];
        let mut adjacent: Vec<Vec<u32>> = vec![Vec::new(); vertex_count];
        let mut edges: Vec<u64> = Vec::new();
        for (fi, face) in faces.iter().enumerate() {
            for (k, &v) in face.iter().enumerate() {
                let w = face[(k + 1) % face.len()];
                vertex_faces[v as usize].push(fi as u32);
                adjacent[v as usize].push(w);
                adjacent[w as usize].push(v);
                let (a, b) = if v < w { (v, w) } else { (w, v) };
                edges.push(((a as u64) << 32) | b as u64);
            }
        }
        for list in &mut adjacent {
            list.sort_unstable();
            list.dedup();
        }

        // An edge used by exactly one face is a boundary edge.
        edges.sort_unstable();
        let mut boundary = vec![false; vertex_count];
        let mut i = 0;
        while i < edges.len() {
            let mut j = i + 1;
            while j < edges.len() && edges[j] == edges[i] {
                j += 1;
            }
            if j - i == 1 {
                boundary[(edges[i] >> 32) as usize] = true;
                boundary[(edges[i] & 0xffff_ffff) as usize] = true;
            }
            i = j;
        }

        let bbox_diag_sq = bounding_box_diagonal_squared(&vertices);

        Ok(Self {
            vertices,
            faces,
            vertex_faces,
            adjacent,
            boundary,
            bbox_diag_sq,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn vertices(&self) -> &[Point3<f64>] {
        &self.vertices
    }

    pub fn vertex(&self, index: usize) -> Point3<f64> {
        self.vertices[index]
    }

    pub fn faces(&self) -> &[Vec<u32>] {
        &self.faces
    }

    pub fn face(&self, index: usize) -> &[u32] {
        &self.faces[index]
    }

    /// Indices of the faces incident to `vertex`, ascending.
    pub fn vertex_faces(&self, vertex: usize) -> &[u32] {
        &self.vertex_faces[vertex]
    }

    /// Edge-adjacent vertices of `vertex`, ascending.
    pub fn adjacent_vertices(&self, vertex: usize) -> &[u32] {
        &self.adjacent[vertex]
    }

    /// True when the vertex lies on an edge with exactly one incident face.
    pub fn is_boundary_vertex(&self, vertex: usize) -> bool {
        self.boundary[vertex]
    }

    pub fn bounding_box_diagonal_squared(&self) -> f64 {
        self.bbox_diag_sq
    }

    /// Outward unit normal of a face.
    ///
    /// Triangles use the cross product of the first two edges; larger polygons
    /// use the Newell normal, which tolerates slight non-planarity.
    pub fn face_normal(&self, face: usize) -> Result<Vector3<f64>, MeshError> {
        let ids = &self.faces[face];
        let n = if ids.len() == 3 {
            let a = self.vertices[ids[0] as usize];
            let b = self.vertices[ids[1] as usize];
            let c = self.vertices[ids[2] as usize];
            (b - a).cross(&(c - a))
        } else {
            newell_normal(ids.iter().map(|&v| self.vertices[v as usize]))
        };
        let norm = n.norm();
        if norm < 1e-14 * self.bbox_diag_sq {
            return Err(MeshError::ZeroAreaFace { face });
        }
        Ok(n / norm)
    }

    /// Per-vertex normals from unweighted averaging of incident face unit
    /// normals, renormalized to unit length.
    ///
    /// Zero-area faces are skipped; a vertex needs at least one valid incident
    /// face, and the average must not cancel to (numerical) zero.
    pub fn vertex_normals(&self) -> Result<Vec<Vector3<f64>>, MeshError> {
        let mut face_normals = Vec::with_capacity(self.faces.len());
        for f in 0..self.faces.len() {
            match self.face_normal(f) {
                Ok(n) => face_normals.push(Some(n)),
                Err(MeshError::ZeroAreaFace { .. }) => face_normals.push(None),
                Err(e) => return Err(e),
            }
        }

        let mut normals = Vec::with_capacity(self.vertices.len());
        for v in 0..self.vertices.len() {
            let incident = &self.vertex_faces[v];
            if incident.is_empty() {
                return Err(MeshError::IsolatedVertex { vertex: v });
            }
            let mut sum = Vector3::zeros();
            let mut count = 0usize;
            for &f in incident {
                if let Some(n) = face_normals[f as usize] {
                    sum += n;
                    count += 1;
                }
            }
            if count == 0 {
                return Err(MeshError::NoValidIncidentFace { vertex: v });
            }
            let avg = sum / count as f64;
            let norm = avg.norm();
            if norm < 1e-10 {
                return Err(MeshError::DegenerateVertexNormal { vertex: v });
            }
            normals.push(avg / norm);
        }
        Ok(normals)
    }

    /// Grow the smallest whole-ring neighborhood around `vertex` containing at
    /// least `m` vertex-normals.
    ///
    /// Ring 0 is the vertex itself; each expansion adds every unvisited vertex
    /// sharing a face with the current ring. Rings are added whole, so the
    /// returned sample count may exceed `m`. `normals` must be parallel to the
    /// mesh vertices.
    pub fn neighborhood(
        &self,
        normals: &[Vector3<f64>],
        vertex: usize,
        m: usize,
    ) -> Result<Neighborhood, MeshError> {
        assert_eq!(
            normals.len(),
            self.vertices.len(),
            "normals must be parallel to mesh vertices"
        );
        if m < NEIGHBORHOOD_FLOOR {
            return Err(MeshError::NeighborhoodTooSmall {
                requested: m,
                floor: NEIGHBORHOOD_FLOOR,
            });
        }

        let center = VertexNormal {
            position: self.vertices[vertex],
            normal: normals[vertex],
        };
        let mut samples = vec![center];
        let mut visited: HashSet<u32> = HashSet::new();
        visited.insert(vertex as u32);
        let mut current = vec![vertex as u32];
        let mut depth = 0usize;

        while samples.len() < m {
            let mut next = BTreeSet::new();
            for &u in &current {
                for &f in &self.vertex_faces[u as usize] {
                    for &w in &self.faces[f as usize] {
                        if !visited.contains(&w) {
                            next.insert(w);
                        }
                    }
                }
            }
            if next.is_empty() {
                return Err(MeshError::ComponentTooSmall {
                    vertex,
                    achievable: samples.len(),
                    requested: m,
                });
            }
            depth += 1;
            current = next.into_iter().collect();
            for &w in &current {
                visited.insert(w);
                samples.push(VertexNormal {
                    position: self.vertices[w as usize],
                    normal: normals[w as usize],
                });
            }
        }

        Ok(Neighborhood {
            center,
            samples,
            ring_depth: depth,
        })
    }
}

fn bounding_box_diagonal_squared(vertices: &[Point3<f64>]) -> f64 {
    if vertices.is_empty() {
        return 0.0;
    }
    let mut lo = vertices[0];
    let mut hi = vertices[0];
    for p in vertices {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (hi - lo).norm_squared()
}

/// Newell normal of a polygon, not normalized (length is twice the area for
/// planar polygons). Coordinates are shifted to the first vertex to limit
/// cancellation on far-from-origin meshes.
fn newell_normal(points: impl Iterator<Item = Point3<f64>> + Clone) -> Vector3<f64> {
    let origin = points.clone().next().expect("polygon has vertices");
    let shifted: Vec<Vector3<f64>> = points.map(|p| p - origin).collect();
    let mut n = Vector3::zeros();
    for i in 0..shifted.len() {
        let a = shifted[i];
        let b = shifted[(i + 1) % shifted.len()];
        n.x += (a.y - b.y) * (a.z + b.z);
        n.y += (a.z - b.z) * (a.x + b.x);
        n.z += (a.x - b.x) * (a.y + b.y);
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::{cube, quad_grid, triangle_fan};
    use approx::assert_relative_eq;
    use nalgebra::{Rotation3, Vector3};

    fn single_triangle() -> Mesh {
        Mesh::new(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
            ],
            vec![vec![0, 1, 2]],
        )
        .unwrap()
    }

    #[test]
    fn triangle_adjacency() {
        let mesh = single_triangle();
        for v in 0..3 {
            assert_eq!(mesh.adjacent_vertices(v).len(), 2);
        }
    }

    #[test]
    fn cube_adjacency() {
        let mesh = cube();
        for v in 0..8 {
            assert_eq!(mesh.adjacent_vertices(v).len(), 3, "vertex {v}");
        }
    }

    #[test]
    fn out_of_range_index_rejected() {
        let err = Mesh::new(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
            ],
            vec![vec![0, 1, 99]],
        )
        .unwrap_err();
        assert!(matches!(
            err,
            MeshError::FaceIndexOutOfRange { face: 0, index: 99, .. }
        ));
    }

    #[test]
    fn repeated_index_rejected() {
        let err = Mesh::new(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
            ],
            vec![vec![0, 1, 1]],
        )
        .unwrap_err();
        assert!(matches!(err, MeshError::DegenerateFace { face: 0, .. }));
    }

    #[test]
    fn adjacency_is_symmetric() {
        for mesh in [single_triangle(), cube(), quad_grid(4, 4)] {
            for u in 0..mesh.vertex_count() {
                for &v in mesh.adjacent_vertices(u) {
                    assert!(
                        mesh.adjacent_vertices(v as usize).contains(&(u as u32)),
                        "{u} -> {v} not symmetric"
                    );
                }
            }
        }
    }

    #[test]
    fn triangle_face_normal() {
        let mesh = single_triangle();
        assert_relative_eq!(
            mesh.face_normal(0).unwrap(),
            Vector3::new(0.0, 0.0, 1.0),
            epsilon = 1e-15
        );
    }

    #[test]
    fn reversed_winding_flips_normal() {
        let mesh = Mesh::new(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
            ],
            vec![vec![0, 2, 1]],
        )
        .unwrap();
        assert_relative_eq!(
            mesh.face_normal(0).unwrap(),
            Vector3::new(0.0, 0.0, -1.0),
            epsilon = 1e-15
        );
    }

    #[test]
    fn newell_normal_of_planar_quad() {
        let mesh = Mesh::new(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(1.0, 1.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
            ],
            vec![vec![0, 1, 2, 3]],
        )
        .unwrap();
        assert_relative_eq!(
            mesh.face_normal(0).unwrap(),
            Vector3::new(0.0, 0.0, 1.0),
            epsilon = 1e-15
        );
    }

    #[test]
    fn zero_area_face_rejected() {
        let mesh = Mesh::new(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(2.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
            ],
            vec![vec![0, 1, 3], vec![0, 1, 2]],
        )
        .unwrap();
        assert!(matches!(
            mesh.face_normal(1),
            Err(MeshError::ZeroAreaFace { face: 1 })
        ));
    }

    #[test]
    fn flat_grid_vertex_normals() {
        let mesh = quad_grid(4, 4);
        let normals = mesh.vertex_normals().unwrap();
        for n in &normals {
            assert_relative_eq!(*n, Vector3::new(0.0, 0.0, 1.0), epsilon = 1e-14);
        }
    }

    #[test]
    fn cube_corner_normal() {
        let mesh = cube();
        let normals = mesh.vertex_normals().unwrap();
        let expected = Vector3::new(1.0, 1.0, 1.0) / 3f64.sqrt();
        // Vertex 7 of the unit cube sits at (1,1,1) with outward faces +x, +y, +z.
        let corner = mesh
            .vertices()
            .iter()
            .position(|p| (p - Point3::new(1.0, 1.0, 1.0)).norm() < 1e-12)
            .unwrap();
        assert_relative_eq!(normals[corner], expected, epsilon = 1e-12);
    }

    #[test]
    fn isolated_vertex_rejected() {
        let mesh = Mesh::new(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
                Point3::new(5.0, 5.0, 5.0),
            ],
            vec![vec![0, 1, 2]],
        )
        .unwrap();
        assert!(matches!(
            mesh.vertex_normals(),
            Err(MeshError::IsolatedVertex { vertex: 3 })
        ));
    }

    #[test]
    fn vertex_normals_rotation_equivariant() {
        let mesh = cube();
        let normals = mesh.vertex_normals().unwrap();
        let rot = Rotation3::from_euler_angles(0.3, -1.1, 2.4);
        let rotated = Mesh::new(
            mesh.vertices().iter().map(|p| rot * p).collect(),
            mesh.faces().to_vec(),
        )
        .unwrap();
        let rotated_normals = rotated.vertex_normals().unwrap();
        for (n, rn) in normals.iter().zip(&rotated_normals) {
            assert_relative_eq!(rot * n, *rn, epsilon = 1e-10);
        }
    }

    #[test]
    fn neighborhood_rejects_below_floor() {
        let mesh = quad_grid(6, 6);
        let normals = mesh.vertex_normals().unwrap();
        for m in [1, 9] {
            assert!(matches!(
                mesh.neighborhood(&normals, 14, m),
                Err(MeshError::NeighborhoodTooSmall { requested, floor: 10 }) if requested == m
            ));
        }
    }

    #[test]
    fn grid_interior_two_rings() {
        // Interior vertex of a quad grid: ring sizes are 1, 8, 16. A request
        // of 10 exceeds 1 + 8, so the second ring is included whole.
        let mesh = quad_grid(6, 6);
        let normals = mesh.vertex_normals().unwrap();
        let center = 3 * 7 + 3; // interior vertex of the 7x7 vertex grid
        let nb = mesh.neighborhood(&normals, center, 10).unwrap();
        assert_eq!(nb.len(), 25);
        assert_eq!(nb.ring_depth, 2);
        assert_eq!(nb.samples[0].position, mesh.vertex(center));
    }

    #[test]
    fn high_valence_fan_stops_after_one_ring() {
        // A 12-spoke fan reaches 13 samples in one ring, so ring 2 is not added.
        let mesh = triangle_fan(12);
        let normals = mesh.vertex_normals().unwrap();
        let nb = mesh.neighborhood(&normals, 0, 10).unwrap();
        assert_eq!(nb.len(), 13);
        assert_eq!(nb.ring_depth, 1);
    }

    #[test]
    fn neighborhood_component_too_small() {
        let mesh = single_triangle();
        let normals = mesh.vertex_normals().unwrap();
        assert!(matches!(
            mesh.neighborhood(&normals, 0, 10),
            Err(MeshError::ComponentTooSmall { achievable: 3, requested: 10, .. })
        ));
    }

    #[test]
    fn neighborhood_deterministic() {
        let mesh = quad_grid(8, 8);
        let normals = mesh.vertex_normals().unwrap();
        for vertex in [0, 4, 9 * 4 + 4, 9 * 8 + 8] {
            let a = mesh.neighborhood(&normals, vertex, 12).unwrap();
            let b = mesh.neighborhood(&normals, vertex, 12).unwrap();
            assert_eq!(a.samples.len(), b.samples.len());
            for (x, y) in a.samples.iter().zip(&b.samples) {
                assert_eq!(x.position, y.position);
            }
        }
    }

    #[test]
    fn neighborhood_ring_depth_is_minimal() {
        // Interior quad-grid rings have sizes 1, 8, 16, 24, ...; for every
        // requested m the reported depth must be the first prefix sum >= m,
        // and the prefix without the last ring must fall below m.
        let mesh = quad_grid(10, 10);
        let normals = mesh.vertex_normals().unwrap();
        let center = 5 * 11 + 5;
        let ring_sizes = [1usize, 8, 16, 24, 32];
        for m in [10, 12, 25, 26, 49, 50] {
            let nb = mesh.neighborhood(&normals, center, m).unwrap();
            let full: usize = ring_sizes[..=nb.ring_depth].iter().sum();
            let without_last: usize = ring_sizes[..nb.ring_depth].iter().sum();
            assert_eq!(nb.len(), full, "m = {m}");
            assert!(without_last < m, "m = {m}: depth not minimal");
        }
    }
}
