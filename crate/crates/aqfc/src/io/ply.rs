//! PLY 1.0 reader and writer.
//!
//! Reading supports ascii and binary-little-endian files with `vertex`
//! (float/double x, y, z and optional nx, ny, nz) and `face`
//! (integer-list) elements; unknown properties and elements are skipped.
//! Writing produces a colored mesh: positions, the selected scalar as a
//! 32-bit `quality` property, and an RGB triple per vertex. Output bytes are
//! deterministic for identical inputs.

use nalgebra::{Point3, Vector3};

use super::{ColorMap, IoError, ParsedMesh, ScalarField};
use crate::curvature::CurvatureResult;
use crate::mesh::Mesh;

/// Output encoding for [`write_ply`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyFormat {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ScalarType {
    Char,
    UChar,
    Short,
    UShort,
    Int,
    UInt,
    Float,
    Double,
}

impl ScalarType {
    fn parse(token: &str) -> Option<Self> {
        Some(match token {
            "char" | "int8" => Self::Char,
            "uchar" | "uint8" => Self::UChar,
            "short" | "int16" => Self::Short,
            "ushort" | "uint16" => Self::UShort,
            "int" | "int32" => Self::Int,
            "uint" | "uint32" => Self::UInt,
            "float" | "float32" => Self::Float,
            "double" | "float64" => Self::Double,
            _ => return None,
        })
    }

    fn size(&self) -> usize {
        match self {
            Self::Char | Self::UChar => 1,
            Self::Short | Self::UShort => 2,
            Self::Int | Self::UInt | Self::Float => 4,
            Self::Double => 8,
        }
    }

    fn read_le(&self, bytes: &[u8]) -> f64 {
        match self {
            Self::Char => bytes[0] as i8 as f64,
            Self::UChar => bytes[0] as f64,
            Self::Short => i16::from_le_bytes([bytes[0], bytes[1]]) as f64,
            Self::UShort => u16::from_le_bytes([bytes[0], bytes[1]]) as f64,
            Self::Int => i32::from_le_bytes(bytes[..4].try_into().unwrap()) as f64,
            Self::UInt => u32::from_le_bytes(bytes[..4].try_into().unwrap()) as f64,
            Self::Float => f32::from_le_bytes(bytes[..4].try_into().unwrap()) as f64,
            Self::Double => f64::from_le_bytes(bytes[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar { name: String, ty: ScalarType },
    List { name: String, count: ScalarType, item: ScalarType },
}

impl Property {
    fn name(&self) -> &str {
        match self {
            Property::Scalar { name, .. } | Property::List { name, .. } => name,
        }
    }
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

/// Parse a PLY file into a mesh and optional unit vertex normals.
pub fn read_ply(bytes: &[u8]) -> Result<ParsedMesh, IoError> {
    let (elements, ascii, body_start) = parse_header(bytes)?;

    let mut positions: Vec<Point3<f64>> = Vec::new();
    let mut normals: Vec<Vector3<f64>> = Vec::new();
    let mut faces: Vec<Vec<u32>> = Vec::new();
    let mut has_normals = false;

    let mut reader: Box<dyn ValueReader> = if ascii {
        Box::new(AsciiReader::new(bytes, body_start))
    } else {
        Box::new(BinaryReader::new(bytes, body_start))
    };

    for element in &elements {
        let is_vertex = element.name == "vertex";
        let is_face = element.name == "face";
        if is_vertex {
            positions.reserve(element.count);
            has_normals = ["nx", "ny", "nz"]
                .iter()
                .all(|n| element.properties.iter().any(|p| p.name() == *n));
            if has_normals {
                normals.reserve(element.count);
            }
        }
        for _ in 0..element.count {
            let mut coords = [f64::NAN; 3];
            let mut normal = [f64::NAN; 3];
            let mut face: Option<Vec<u32>> = None;
            for property in &element.properties {
                match property {
                    Property::Scalar { name, ty } => {
                        let value = reader.read_scalar(*ty)?;
                        if is_vertex {
                            match name.as_str() {
                                "x" => coords[0] = value,
                                "y" => coords[1] = value,
                                "z" => coords[2] = value,
                                "nx" => normal[0] = value,
                                "ny" => normal[1] = value,
                                "nz" => normal[2] = value,
                                _ => {}
                            }
                        }
                    }
                    Property::List { name, count, item } => {
                        let n = reader.read_scalar(*count)?;
                        if !(n.fract() == 0.0 && n >= 0.0) {
                            return Err(reader.parse_error(format!("bad list count {n}")));
                        }
                        let n = n as usize;
                        let wanted = is_face && (name == "vertex_indices" || name == "vertex_index");
                        let mut items = wanted.then(|| Vec::with_capacity(n));
                        for _ in 0..n {
                            let value = reader.read_scalar(*item)?;
                            if let Some(items) = items.as_mut() {
                                if value.fract() != 0.0 || value < 0.0 || value > u32::MAX as f64 {
                                    return Err(
                                        reader.parse_error(format!("bad vertex index {value}"))
                                    );
                                }
                                items.push(value as u32);
                            }
                        }
                        if let Some(items) = items {
                            face = Some(items);
                        }
                    }
                }
            }
            if is_vertex {
                if coords.iter().any(|c| c.is_nan()) {
                    return Err(reader.parse_error("vertex is missing x/y/z".into()));
                }
                positions.push(Point3::new(coords[0], coords[1], coords[2]));
                if has_normals {
                    normals.push(Vector3::new(normal[0], normal[1], normal[2]));
                }
            }
            if let Some(face) = face {
                faces.push(face);
            }
        }
    }

    let normals = if has_normals {
        let mut out = Vec::with_capacity(normals.len());
        let mut ok = !normals.is_empty();
        for n in &normals {
            let norm = n.norm();
            if !norm.is_finite() || norm <= 1e-12 {
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
    Ok((mesh, normals))
}

fn parse_header(bytes: &[u8]) -> Result<(Vec<Element>, bool, usize), IoError> {
    let mut pos = 0usize;
    let mut line_no = 0usize;
    let mut next_line = || -> Result<(String, usize), IoError> {
        if pos >= bytes.len() {
            return Err(IoError::Truncated { offset: pos });
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos] != b'\n' {
            pos += 1;
        }
        let line = String::from_utf8_lossy(&bytes[start..pos]).trim_end().to_string();
        pos += 1; // consume the newline
        line_no += 1;
        Ok((line, line_no))
    };

    let (magic, line) = next_line()?;
    if magic.trim() != "ply" {
        return Err(IoError::Parse {
            line,
            message: "missing `ply` magic".into(),
        });
    }

    let mut ascii = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let (text, line) = next_line()?;
        let mut tokens = text.split_whitespace();
        match tokens.next() {
            Some("format") => {
                let kind = tokens.next().unwrap_or("");
                ascii = Some(match kind {
                    "ascii" => true,
                    "binary_little_endian" => false,
                    "binary_big_endian" => {
                        return Err(IoError::Unsupported(
                            "binary_big_endian PLY is not supported".into(),
                        ))
                    }
                    other => {
                        return Err(IoError::Parse {
                            line,
                            message: format!("unknown format `{other}`"),
                        })
                    }
                });
            }
            Some("comment") | Some("obj_info") => {}
            Some("element") => {
                let name = tokens.next().unwrap_or("").to_string();
                let count = tokens
                    .next()
                    .and_then(|t| t.parse::<usize>().ok())
                    .ok_or_else(|| IoError::Parse {
                        line,
                        message: "element needs a count".into(),
                    })?;
                elements.push(Element {
                    name,
                    count,
                    properties: Vec::new(),
                });
            }
            Some("property") => {
                let element = elements.last_mut().ok_or_else(|| IoError::Parse {
                    line,
                    message: "property before any element".into(),
                })?;
                let first = tokens.next().unwrap_or("");
                if first == "list" {
                    let count = parse_type(tokens.next(), line)?;
                    let item = parse_type(tokens.next(), line)?;
                    let name = tokens.next().unwrap_or("").to_string();
                    element.properties.push(Property::List { name, count, item });
                } else {
                    let ty = parse_type(Some(first), line)?;
                    let name = tokens.next().unwrap_or("").to_string();
                    element.properties.push(Property::Scalar { name, ty });
                }
            }
            Some("end_header") => break,
            Some(other) => {
                return Err(IoError::Parse {
                    line,
                    message: format!("unknown header keyword `{other}`"),
                })
            }
            None => {}
        }
    }

    let ascii = ascii.ok_or(IoError::Unsupported("missing format line".into()))?;
    Ok((elements, ascii, pos))
}

fn parse_type(token: Option<&str>, line: usize) -> Result<ScalarType, IoError> {
    let token = token.unwrap_or("");
    ScalarType::parse(token).ok_or_else(|| IoError::Parse {
        line,
        message: format!("unknown property type `{token}`"),
    })
}

trait ValueReader {
    fn read_scalar(&mut self, ty: ScalarType) -> Result<f64, IoError>;
    fn parse_error(&self, message: String) -> IoError;
}

struct AsciiReader<'a> {
    bytes: &'a [u8],
    pos: usize,
    line: usize,
}

impl<'a> AsciiReader<'a> {
    fn new(bytes: &'a [u8], start: usize) -> Self {
        let line = bytes[..start].iter().filter(|&&b| b == b'\n').count() + 1;
        Self { bytes, pos: start, line }
    }
}

impl ValueReader for AsciiReader<'_> {
    fn read_scalar(&mut self, _ty: ScalarType) -> Result<f64, IoError> {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            if self.bytes[self.pos] == b'\n' {
                self.line += 1;
            }
            self.pos += 1;
        }
        if self.pos >= self.bytes.len() {
            return Err(IoError::Truncated { offset: self.pos });
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let token = std::str::from_utf8(&self.bytes[start..self.pos]).map_err(|_| IoError::Parse {
            line: self.line,
            message: "non-UTF-8 token".into(),
        })?;
        token.parse::<f64>().map_err(|_| IoError::Parse {
            line: self.line,
            message: format!("`{token}` is not a number"),
        })
    }

    fn parse_error(&self, message: String) -> IoError {
        IoError::Parse { line: self.line, message }
    }
}

struct BinaryReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> BinaryReader<'a> {
    fn new(bytes: &'a [u8], start: usize) -> Self {
        Self { bytes, pos: start }
    }
}

impl ValueReader for BinaryReader<'_> {
    fn read_scalar(&mut self, ty: ScalarType) -> Result<f64, IoError> {
        let size = ty.size();
        if self.pos + size > self.bytes.len() {
            return Err(IoError::Truncated { offset: self.pos });
        }
        let value = ty.read_le(&self.bytes[self.pos..self.pos + size]);
        self.pos += size;
        Ok(value)
    }

    fn parse_error(&self, message: String) -> IoError {
        IoError::Parse { line: 0, message: format!("at byte {}: {message}", self.pos) }
    }
}

/// Serialize a colored mesh: per-vertex position, the selected scalar as a
/// 32-bit `quality`, and the colormapped RGB; faces are copied verbatim.
///
/// `results` must be parallel to the mesh vertices. Byte output is identical
/// across runs for identical inputs.
pub fn write_ply(
    mesh: &Mesh,
    results: &[CurvatureResult],
    field: ScalarField,
    colormap: &ColorMap,
    format: PlyFormat,
) -> Vec<u8> {
    assert_eq!(
        results.len(),
        mesh.vertex_count(),
        "one result per vertex required"
    );
    let mut out = Vec::new();
    let format_name = match format {
        PlyFormat::Ascii => "ascii",
        PlyFormat::BinaryLittleEndian => "binary_little_endian",
    };
    out.extend_from_slice(format!("ply\nformat {format_name} 1.0\n").as_bytes());
    out.extend_from_slice(format!("element vertex {}\n", mesh.vertex_count()).as_bytes());
    for prop in ["x", "y", "z", "quality"] {
        out.extend_from_slice(format!("property float {prop}\n").as_bytes());
    }
    for prop in ["red", "green", "blue"] {
        out.extend_from_slice(format!("property uchar {prop}\n").as_bytes());
    }
    out.extend_from_slice(format!("element face {}\n", mesh.face_count()).as_bytes());
    out.extend_from_slice(b"property list uchar int vertex_indices\nend_header\n");

    match format {
        PlyFormat::Ascii => {
            for (p, result) in mesh.vertices().iter().zip(results) {
                let q = field.extract(result) as f32;
                let [r, g, b] = colormap.color(q as f64);
                out.extend_from_slice(
                    format!(
                        "{} {} {} {} {r} {g} {b}\n",
                        fmt_f32(p.x as f32),
                        fmt_f32(p.y as f32),
                        fmt_f32(p.z as f32),
                        fmt_f32(q),
                    )
                    .as_bytes(),
                );
            }
            for face in mesh.faces() {
                let mut line = face.len().to_string();
                for &v in face {
                    line.push(' ');
                    line.push_str(&v.to_string());
                }
                line.push('\n');
                out.extend_from_slice(line.as_bytes());
            }
        }
        PlyFormat::BinaryLittleEndian => {
            for (p, result) in mesh.vertices().iter().zip(results) {
                let q = field.extract(result) as f32;
                let [r, g, b] = colormap.color(q as f64);
                for v in [p.x as f32, p.y as f32, p.z as f32, q] {
                    out.extend_from_slice(&v.to_le_bytes());
                }
                out.extend_from_slice(&[r, g, b]);
            }
            for face in mesh.faces() {
                assert!(face.len() < 256, "face too large for uchar list count");
                out.push(face.len() as u8);
                for &v in face {
                    out.extend_from_slice(&(v as i32).to_le_bytes());
                }
            }
        }
    }
    out
}

/// Shortest-roundtrip float formatting; NaN as `nan` for viewer
/// compatibility.
fn fmt_f32(v: f32) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v}")
    }
}
