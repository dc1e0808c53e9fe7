//! Algebraic quadric fitting curvature (AQFC) for polygon meshes.
//!
//! Estimates per-vertex mean and Gaussian curvature by fitting an implicit
//! quadric to the point-normal neighborhood of each vertex in the algebraic
//! sense (weighted algebraic distances plus gradient-to-normal deviations),
//! projecting the vertex orthogonally onto the fitted quadric, and evaluating
//! the implicit-surface curvature formulas there. Derived quantities
//! (principal curvatures, curvedness, shape index) come along for free, and a
//! discrete-operator baseline (angle deficit + cotangent Laplacian) is
//! included for comparison.
//!
//! The `benchmark` module generates regular and irregular torus/sphere
//! samplings with analytic ground truth; `io` reads OBJ/PLY meshes and writes
//! colored PLY and CSV reports. Runnable end-to-end demos live in the crate's
//! `examples/` directory, and the `aqfc` binary exposes the same pipeline as
//! `estimate` and `bench` subcommands.

pub mod benchmark;
pub mod cli;
pub mod curvature;
pub mod ddgo;
pub mod fit;
pub mod io;
pub mod mesh;

#[cfg(test)]
pub(crate) mod test_util;

pub use curvature::{aqfc_all, aqfc_estimate, AqfcParams, CurvatureResult, ResultFlags};
pub use fit::Quadric;
pub use mesh::{Mesh, MeshError, Neighborhood, VertexNormal};
