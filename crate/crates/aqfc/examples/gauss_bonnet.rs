//! Discrete Gauss-Bonnet check for the baseline operator: angle deficits
//! times mixed areas sum to 2*pi times the Euler characteristic, 4*pi on the
//! sphere and 0 on the torus, independent of sampling quality.
//!
//!     cargo run --release --example gauss_bonnet

use aqfc::benchmark::{sample_sphere_irregular, sample_torus_irregular, sample_torus_regular};
use aqfc::ddgo::DdgoEstimator;
use std::f64::consts::PI;

fn total_curvature(mesh: &aqfc::Mesh) -> f64 {
    let estimator = DdgoEstimator::new(mesh).expect("valid mesh");
    (0..mesh.vertex_count())
        .map(|v| {
            let r = estimator.estimate(v);
            r.gaussian * r.mixed_area
        })
        .sum()
}

fn main() {
    let cases: Vec<(&str, aqfc::Mesh, f64)> = vec![
        (
            "regular torus (3600)",
            sample_torus_regular(60, 60).unwrap().0,
            0.0,
        ),
        (
            "irregular torus (2000, seed 3)",
            sample_torus_irregular(2000, 3).unwrap().0,
            0.0,
        ),
        (
            "irregular sphere (482, seed 7)",
            sample_sphere_irregular(30, 17, 7).unwrap().0,
            4.0 * PI,
        ),
    ];
    println!("{:<32} {:>16} {:>16} {:>12}", "mesh", "sum K*A", "expected", "error");
    for (name, mesh, expected) in cases {
        let total = total_curvature(&mesh);
        println!(
            "{name:<32} {total:>16.12} {expected:>16.12} {:>12.3e}",
            (total - expected).abs()
        );
    }
}
