//! Mesh and result serialization: OBJ/PLY reading, PLY writing with
//! per-vertex curvature scalars and colors, CSV reports.

mod obj;
mod ply;
mod report;

pub use obj::read_obj;
pub use ply::{read_ply, write_ply, PlyFormat};
pub use report::{
    format_significant, read_ground_truth_csv, write_csv_report, write_estimate_summary,
    write_ground_truth_csv, write_quadric_dump, NamedReport,
};

use nalgebra::Vector3;
use thiserror::Error;

use crate::curvature::CurvatureResult;
use crate::mesh::{Mesh, MeshError};

/// A parsed mesh plus the unit vertex normals embedded in the file, if any.
pub type ParsedMesh = (Mesh, Option<Vec<Vector3<f64>>>);

/// Errors from reading or validating mesh files.
#[derive(Debug, Error)]
pub enum IoError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("truncated payload at byte offset {offset}")]
    Truncated { offset: usize },
    #[error("unsupported format: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Scalar selected for PLY `quality` output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarField {
    Mean,
    Gaussian,
    Curvedness,
    ShapeIndex,
}

impl ScalarField {
    pub fn extract(&self, result: &CurvatureResult) -> f64 {
        match self {
            ScalarField::Mean => result.mean,
            ScalarField::Gaussian => result.gaussian,
            ScalarField::Curvedness => result.curvedness,
            ScalarField::ShapeIndex => result.shape_index,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScalarField::Mean => "mean",
            ScalarField::Gaussian => "gaussian",
            ScalarField::Curvedness => "curvedness",
            ScalarField::ShapeIndex => "shape_index",
        }
    }
}

/// Piecewise-linear blue -> green -> red scale over [lower, upper].
///
/// Finite values are clamped to the bounds; NaN maps to mid-gray.
#[derive(Debug, Clone, Copy)]
pub struct ColorMap {
    lower: f64,
    upper: f64,
}

impl ColorMap {
    /// Requires `lower < upper`.
    pub fn new(lower: f64, upper: f64) -> Self {
        assert!(
            lower < upper,
            "colormap bounds must satisfy lower < upper, got [{lower}, {upper}]"
        );
        Self { lower, upper }
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    /// Bounds from the 2nd/98th percentile of the finite values, widened
    /// symmetrically when the data are constant.
    pub fn from_percentiles(values: &[f64]) -> Self {
        let mut finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
        if finite.is_empty() {
            return Self::new(-0.5, 0.5);
        }
        finite.sort_unstable_by(f64::total_cmp);
        let pick = |p: f64| {
            let k = ((finite.len() - 1) as f64 * p).round() as usize;
            finite[k]
        };
        let (mut lower, mut upper) = (pick(0.02), pick(0.98));
        if lower >= upper {
            lower -= 0.5;
            upper += 0.5;
        }
        Self::new(lower, upper)
    }

    /// Map a value to 8-bit RGB.
    pub fn color(&self, value: f64) -> [u8; 3] {
        if value.is_nan() {
            return [128, 128, 128];
        }
        let t = ((value - self.lower) / (self.upper - self.lower)).clamp(0.0, 1.0);
        let channel = |x: f64| (x * 255.0).round().clamp(0.0, 255.0) as u8;
        if t <= 0.5 {
            let s = 2.0 * t; // blue -> green
            [0, channel(s), channel(1.0 - s)]
        } else {
            let s = 2.0 * t - 1.0; // green -> red
            [channel(s), channel(1.0 - s), 0]
        }
    }
}
