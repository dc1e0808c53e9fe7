//! The fitting primitives in isolation: assemble the weighted system for a
//! point-normal neighborhood, solve for the quadric, project a point onto it
//! and read curvature off the implicit formulas.
//!
//!     cargo run --example fit_and_project

use aqfc::curvature::{corrected_gradient, implicit_gaussian, implicit_mean};
use aqfc::fit::{
    assemble_normal_equations, compute_weights, project_point, solve_quadric, ProjectionParams,
};
use aqfc::mesh::{Neighborhood, VertexNormal};
use nalgebra::{Point3, Vector3};

/// Point-normals on a sphere of radius `r` around a cap at the +z pole.
fn sphere_cap(r: f64, rings: usize, per_ring: usize) -> Vec<VertexNormal> {
    let mut samples = vec![VertexNormal {
        position: Point3::new(0.0, 0.0, r),
        normal: Vector3::z(),
    }];
    for ring in 1..=rings {
        let polar = 0.25 * ring as f64 / rings as f64;
        for k in 0..per_ring {
            let azimuth = std::f64::consts::TAU * k as f64 / per_ring as f64;
            let normal = Vector3::new(
                polar.sin() * azimuth.cos(),
                polar.sin() * azimuth.sin(),
                polar.cos(),
            );
            samples.push(VertexNormal {
                position: Point3::from(normal * r),
                normal,
            });
        }
    }
    samples
}

fn main() {
    let radius = 2.0;
    let samples = sphere_cap(radius, 2, 10);
    let neighborhood = Neighborhood {
        center: samples[0],
        samples,
        ring_depth: 2,
    };

    let weights = compute_weights(&neighborhood);
    println!(
        "weights: position in [{:.4}, {:.4}], normal in [{:.6}, {:.6}]",
        weights.position.iter().cloned().fold(f64::INFINITY, f64::min),
        weights.position.iter().cloned().fold(0.0, f64::max),
        weights.normal.iter().cloned().fold(f64::INFINITY, f64::min),
        weights.normal.iter().cloned().fold(0.0, f64::max),
    );

    let system = assemble_normal_equations(&neighborhood, &weights);
    let fit = solve_quadric(&system).expect("positive definite system");
    println!(
        "fit: regularized={} degenerate_to_plane={}",
        fit.regularized, fit.degenerate_to_plane
    );
    println!("coefficients: {:?}", fit.quadric.coefficients());

    // Project a point hovering above the cap back onto the quadric.
    let probe = Point3::new(0.1, -0.05, radius + 0.3);
    let projection = project_point(&fit.quadric, &probe, &ProjectionParams::default())
        .expect("regular gradient");
    println!(
        "projection of {probe}: {} (first_order={}, residual {:.2e})",
        projection.point,
        projection.first_order,
        fit.quadric.evaluate(&projection.point).abs()
    );

    let normal = Vector3::z();
    let s = corrected_gradient(&normal, &fit.quadric, &projection.point).expect("regular point");
    let hessian = fit.quadric.hessian();
    let h = implicit_mean(&s, &hessian).expect("regular point");
    let k = implicit_gaussian(&s, &hessian).expect("regular point");
    println!(
        "curvature at the projection: H = {h:.9}, K = {k:.9} (sphere of radius {radius}: H = {}, K = {})",
        -1.0 / radius,
        1.0 / (radius * radius)
    );
}
