//! End-to-end checks of the `aqfc` binary: flags, exit codes and output
//! artifacts, run through the real executable.

use std::path::Path;
use std::process::Command;

fn aqfc() -> Command {
    Command::new(env!("CARGO_BIN_EXE_aqfc"))
}

/// 4x4 flat grid as OBJ text (z = 0 everywhere).
fn flat_grid_obj() -> String {
    let mut obj = String::new();
    for j in 0..5 {
        for i in 0..5 {
            obj.push_str(&format!("v {} {} 0\n", i, j));
        }
    }
    for j in 0..4u32 {
        for i in 0..4u32 {
            let a = j * 5 + i + 1;
            obj.push_str(&format!("f {} {} {} {}\n", a, a + 1, a + 6, a + 5));
        }
    }
    obj
}

#[test]
fn estimate_flat_grid_has_zero_quality() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("grid.obj");
    let output = dir.path().join("grid_mean.ply");
    std::fs::write(&input, flat_grid_obj()).unwrap();

    let status = aqfc()
        .args(["estimate", "--field", "mean", "--out"])
        .arg(&output)
        .arg(&input)
        .status()
        .unwrap();
    assert!(status.success());

    let text = std::fs::read_to_string(&output).unwrap();
    let body: Vec<&str> = text
        .lines()
        .skip_while(|l| *l != "end_header")
        .skip(1)
        .take(25)
        .collect();
    assert_eq!(body.len(), 25);
    for line in body {
        let quality = line.split_whitespace().nth(3).unwrap();
        assert_eq!(quality, "0", "flat grid must have zero mean curvature: {line}");
    }
}

#[test]
fn estimate_missing_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let status = aqfc()
        .args(["estimate", "definitely_missing.ply", "--out"])
        .arg(dir.path().join("out.ply"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn estimate_unsupported_extension_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("mesh.stl");
    std::fs::write(&input, b"solid nope").unwrap();
    let status = aqfc()
        .arg("estimate")
        .arg(&input)
        .arg("--out")
        .arg(dir.path().join("out.ply"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn estimate_rejects_tiny_neighborhood() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("grid.obj");
    std::fs::write(&input, flat_grid_obj()).unwrap();
    let status = aqfc()
        .args(["estimate", "--m", "5", "--out"])
        .arg(dir.path().join("out.ply"))
        .arg(&input)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

fn read_dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort_by(|a, b| a.0.cmp(&b.0));
    files
}

#[test]
fn bench_torus_regular_row_count_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("run1");
    let out2 = dir.path().join("run2");
    for (out, threads) in [(&out1, "1"), (&out2, "2")] {
        let status = aqfc()
            .args([
                "bench",
                "torus-regular",
                "--levels",
                "400,3600",
                "--threads",
                threads,
                "--out-dir",
            ])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }

    let csv = std::fs::read_to_string(out1.join("torus_regular.csv")).unwrap();
    let rows: Vec<&str> = csv
        .lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .collect();
    // Header plus 2 levels x 2 methods.
    assert_eq!(rows.len(), 5, "unexpected rows: {rows:?}");
    assert!(rows[0].starts_with("name,method,"));
    assert!(rows[1].starts_with("torus_regular_400,aqfc,"));
    assert!(rows[2].starts_with("torus_regular_400,ddgo,"));
    assert!(rows[3].starts_with("torus_regular_3600,aqfc,"));
    assert!(rows[4].starts_with("torus_regular_3600,ddgo,"));

    assert_eq!(read_dir_bytes(&out1), read_dir_bytes(&out2));
}

#[test]
fn bench_sphere_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    for out in [&out1, &out2] {
        let status = aqfc()
            .args(["bench", "sphere-irregular", "--seed", "7", "--out-dir"])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    assert_eq!(read_dir_bytes(&out1), read_dir_bytes(&out2));
}

#[test]
fn bench_rejects_non_square_level() {
    let dir = tempfile::tempdir().unwrap();
    let status = aqfc()
        .args(["bench", "torus-regular", "--levels", "500", "--out-dir"])
        .arg(dir.path().join("x"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn estimate_replays_persisted_benchmark_mesh() {
    // A bench run persists its sampled meshes; `estimate` must accept them.
    let dir = tempfile::tempdir().unwrap();
    let bench_dir = dir.path().join("bench");
    let status = aqfc()
        .args(["bench", "torus-irregular", "--n", "500", "--seed", "9", "--out-dir"])
        .arg(&bench_dir)
        .status()
        .unwrap();
    assert!(status.success());

    let mesh = bench_dir.join("torus_irregular_500_seed9.ply");
    let out = dir.path().join("replay.ply");
    let status = aqfc()
        .args(["estimate", "--method", "ddgo", "--field", "gaussian", "--out"])
        .arg(&out)
        .arg(&mesh)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.exists());
}
