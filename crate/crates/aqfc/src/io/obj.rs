//! Wavefront OBJ reader (positions, faces, optional per-vertex normals).

use nalgebra::{Point3, Vector3};

use super::{IoError, ParsedMesh};
use crate::mesh::Mesh;

/// Parse an OBJ file.
///
/// `v` lines become vertices in file order, `f` lines faces; 1-based and
/// negative (relative) indices are supported, as are the `v/vt`, `v//vn` and
/// `v/vt/vn` corner forms. When every vertex is referenced with one
/// consistent `vn` index, the normals are returned (renormalized to unit
/// length); otherwise they are absent. Unknown keywords are ignored.
pub fn read_obj(bytes: &[u8]) -> Result<ParsedMesh, IoError> {
    let text = std::str::from_utf8(bytes).map_err(|e| IoError::Parse {
        line: 0,
        message: format!("not valid UTF-8: {e}"),
    })?;

    let mut positions: Vec<Point3<f64>> = Vec::new();
    let mut normals: Vec<Vector3<f64>> = Vec::new();
    let mut faces: Vec<Vec<u32>> = Vec::new();
    // Per-vertex normal index; consistency is invalidated on conflict.
    let mut vertex_normal: Vec<Option<usize>> = Vec::new();
    let mut normals_consistent = true;

    for (line_no, raw_line) in text.lines().enumerate() {
        let line_no = line_no + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let keyword = tokens.next().unwrap();
        match keyword {
            "v" => {
                let p = parse_three_floats(&mut tokens, line_no, "v")?;
                positions.push(Point3::new(p[0], p[1], p[2]));
                vertex_normal.push(None);
            }
            "vn" => {
                let n = parse_three_floats(&mut tokens, line_no, "vn")?;
                normals.push(Vector3::new(n[0], n[1], n[2]));
            }
            "f" => {
                let mut face = Vec::new();
                for token in tokens {
                    let (vi, ni) = parse_face_corner(token, line_no, positions.len(), normals.len())?;
                    face.push(vi as u32);
                    match ni {
                        Some(ni) => match vertex_normal[vi] {
                            None => vertex_normal[vi] = Some(ni),
                            Some(existing) if existing == ni => {}
                            Some(_) => normals_consistent = false,
                        },
                        None => normals_consistent = false,
                    }
                }
                if face.len() < 3 {
                    return Err(IoError::Parse {
                        line: line_no,
                        message: format!("face has {} corners, need at least 3", face.len()),
                    });
                }
                faces.push(face);
            }
            // vt, o, g, s, usemtl, mtllib and friends are irrelevant here.
            _ => {}
        }
    }

    let vertex_normals = if normals_consistent
        && !normals.is_empty()
        && !vertex_normal.is_empty()
        && vertex_normal.iter().all(Option::is_some)
    {
        let mut out = Vec::with_capacity(vertex_normal.len());
        let mut ok = true;
        for ni in &vertex_normal {
            let n = normals[ni.unwrap()];
            let norm = n.norm();
            if norm < 1e-12 {
                ok = false;
                break;
            }
            out.push(n / norm);
        }
        ok.then_some(out)
    } else {
        None
    };

    let mesh = Mesh::new(positions, faces)?;
    Ok((mesh, vertex_normals))
}

fn parse_three_floats<'a>(
    tokens: &mut impl Iterator<Item = &'a str>,
    line: usize,
    keyword: &str,
) -> Result<[f64; 3], IoError> {
    let mut out = [0.0; 3];
    for slot in &mut out {
        let token = tokens.next().ok_or_else(|| IoError::Parse {
            line,
            message: format!("`{keyword}` needs 3 coordinates"),
        })?;
        *slot = token.parse::<f64>().map_err(|_| IoError::Parse {
            line,
            message: format!("`{token}` is not a number"),
        })?;
    }
    Ok(out)
}

/// One `f` corner: `i`, `i/t`, `i//n` or `i/t/n`, returning the 0-based
/// vertex index and optional 0-based normal index.
fn parse_face_corner(
    token: &str,
    line: usize,
    vertex_count: usize,
    normal_count: usize,
) -> Result<(usize, Option<usize>), IoError> {
    let mut parts = token.split('/');
    let v_part = parts.next().unwrap_or("");
    let _t_part = parts.next();
    let n_part = parts.next();

    let vi = resolve_index(v_part, vertex_count, line, token)?;
    let ni = match n_part {
        Some(p) if !p.is_empty() => Some(resolve_index(p, normal_count, line, token)?),
        _ => None,
    };
    Ok((vi, ni))
}

/// OBJ indices are 1-based; negative values count back from the latest
/// definition.
fn resolve_index(part: &str, count: usize, line: usize, token: &str) -> Result<usize, IoError> {
    let raw: i64 = part.parse().map_err(|_| IoError::Parse {
        line,
        message: format!("`{token}` is not a valid face corner"),
    })?;
    let idx = if raw > 0 {
        raw - 1
    } else if raw < 0 {
        count as i64 + raw
    } else {
        -1
    };
    if idx < 0 || idx >= count as i64 {
        return Err(IoError::Parse {
            line,
            message: format!("index {raw} out of range (have {count})"),
        });
    }
    Ok(idx as usize)
}
