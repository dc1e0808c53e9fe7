//! Small meshes shared by unit tests.

use nalgebra::Point3;

use crate::mesh::Mesh;

/// Flat quad grid in the z = 0 plane with `nx` by `ny` cells (unit spacing),
/// wound so face normals point along +z.
pub fn quad_grid(nx: usize, ny: usize) -> Mesh {
    let mut vertices = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(Point3::new(i as f64, j as f64, 0.0));
        }
    }
    let idx = |i: usize, j: usize| (j * (nx + 1) + i) as u32;
    let mut faces = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            faces.push(vec![idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    Mesh::new(vertices, faces).unwrap()
}

/// Flat triangulated grid (each quad split along the same diagonal).
pub fn tri_grid(nx: usize, ny: usize) -> Mesh {
    let mut vertices = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(Point3::new(i as f64, j as f64, 0.0));
        }
    }
    let idx = |i: usize, j: usize| (j * (nx + 1) + i) as u32;
    let mut faces = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            faces.push(vec![idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            faces.push(vec![idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    Mesh::new(vertices, faces).unwrap()
}

/// Axis-aligned unit cube with outward-facing quads.
pub fn cube() -> Mesh {
    let vertices = vec![
        Point3::new(0.0, 0.0, 0.0),
        Point3::new(1.0, 0.0, 0.0),
        Point3::new(1.0, 1.0, 0.0),
        Point3::new(0.0, 1.0, 0.0),
        Point3::new(0.0, 0.0, 1.0),
        Point3::new(1.0, 0.0, 1.0),
        Point3::new(1.0, 1.0, 1.0),
        Point3::new(0.0, 1.0, 1.0),
    ];
    let faces = vec![
        vec![0, 3, 2, 1], // bottom, -z
        vec![4, 5, 6, 7], // top, +z
        vec![0, 1, 5, 4], // -y
        vec![2, 3, 7, 6], // +y
        vec![1, 2, 6, 5], // +x
        vec![3, 0, 4, 7], // -x
    ];
    Mesh::new(vertices, faces).unwrap()
}

/// Closed fan: a center vertex surrounded by `spokes` rim vertices on a unit
/// circle in the z = 0 plane, one triangle per consecutive rim pair.
pub fn triangle_fan(spokes: usize) -> Mesh {
    let mut vertices = vec![Point3::new(0.0, 0.0, 0.0)];
    for k in 0..spokes {
        let a = 2.0 * std::f64::consts::PI * k as f64 / spokes as f64;
        vertices.push(Point3::new(a.cos(), a.sin(), 0.0));
    }
    let mut faces = Vec::new();
    for k in 0..spokes {
        let a = 1 + k as u32;
        let b = 1 + ((k + 1) % spokes) as u32;
        faces.push(vec![0, a, b]);
    }
    Mesh::new(vertices, faces).unwrap()
}
