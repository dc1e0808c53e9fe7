//! Estimate curvature for a mesh file and write a colored PLY, the same
//! pipeline the `aqfc estimate` subcommand drives.
//!
//!     cargo run --release --example estimate_file -- input.ply output.ply
//!
//! With no arguments, a demo torus is generated, estimated and written to
//! `torus_curvedness.ply` in the working directory.

use aqfc::benchmark::sample_torus_regular;
use aqfc::curvature::{aqfc_all, AqfcParams};
use aqfc::io::{read_obj, read_ply, write_ply, ColorMap, PlyFormat, ScalarField};
use std::path::Path;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();

    let (mesh, file_normals, out_path) = match args.as_slice() {
        [] => {
            let (mesh, _) = sample_torus_regular(100, 100).expect("sampler");
            (mesh, None, "torus_curvedness.ply".to_string())
        }
        [input, output] => {
            let bytes = std::fs::read(input).expect("readable input");
            let (mesh, normals) = match Path::new(input)
                .extension()
                .map(|e| e.to_string_lossy().to_lowercase())
                .as_deref()
            {
                Some("obj") => read_obj(&bytes).expect("valid OBJ"),
                Some("ply") => read_ply(&bytes).expect("valid PLY"),
                _ => panic!("expected a .obj or .ply input"),
            };
            (mesh, normals, output.clone())
        }
        _ => {
            eprintln!("usage: estimate_file [input.{{obj,ply}} output.ply]");
            std::process::exit(2);
        }
    };

    // Embedded normals are used when present; otherwise face-normal averaging.
    let normals = match file_normals {
        Some(n) => n,
        None => mesh.vertex_normals().expect("every vertex needs a face"),
    };
    let results = aqfc_all(&mesh, &normals, &AqfcParams::default());
    let failed = results.iter().filter(|r| r.flags.fit_failed).count();

    let field = ScalarField::Curvedness;
    let values: Vec<f64> = results.iter().map(|r| field.extract(r)).collect();
    let colormap = ColorMap::from_percentiles(&values);
    let ply = write_ply(&mesh, &results, field, &colormap, PlyFormat::Ascii);
    std::fs::write(&out_path, ply).expect("writable output");

    let (lo, hi) = colormap.bounds();
    println!(
        "{} vertices estimated ({failed} failed); curvedness colormap [{lo:.4}, {hi:.4}]",
        mesh.vertex_count()
    );
    println!("wrote {out_path}");
}
