//! Zero-residual sanity check: on points sampled exactly from the unit
//! sphere with analytic normals, the fitted quadric is the sphere itself and
//! the curvature estimates are exact.
//!
//!     cargo run --example sphere_recovery

use aqfc::benchmark::sample_sphere_irregular;
use aqfc::curvature::{aqfc_estimate_detailed, AqfcParams};
use nalgebra::Vector3;

fn main() {
    let (mesh, _) = sample_sphere_irregular(30, 17, 1).expect("sampler");
    // Analytic outward normals: on the unit sphere the normal is the position.
    let normals: Vec<Vector3<f64>> = mesh.vertices().iter().map(|p| p.coords).collect();
    let params = AqfcParams::default();

    println!("vertex      H           K           max |coeff - sphere|");
    let mut worst = 0.0f64;
    for vertex in (0..mesh.vertex_count()).step_by(53) {
        let (result, quadric) = aqfc_estimate_detailed(&mesh, &normals, vertex, &params);
        let q = quadric.expect("fit succeeded");
        // The unit sphere as an implicit quadric: (x^2 + y^2 + z^2 - 1) / 2.
        let expected = [0.5, 0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -0.5];
        let coeff_err = q
            .coefficients()
            .iter()
            .zip(&expected)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        worst = worst.max(coeff_err);
        println!(
            "{vertex:>6} {:>12.9} {:>12.9} {:>12.3e}",
            result.mean, result.gaussian, coeff_err
        );
    }
    println!("\nexpected H = -1, K = 1 (outward normals); worst coefficient error {worst:.3e}");
}
