//! OBJ and PLY readers and writers.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::init::OrientedSampleSet;
use crate::mesh::TriMesh;

/// A triangulated mesh together with what was discarded on the way in.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedMesh {
    pub mesh: TriMesh,
    /// Zero-area or repeated-index triangles that were removed.
    pub dropped_faces: usize,
    /// Per-vertex normals when the file carried them.
    pub normals: Option<Vec<Vec3>>,
}

fn parse_err(path: &Path, location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        location: location.into(),
        message: message.into(),
    }
}

fn extension(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase()
}

/// Loads an OBJ or PLY file; polygons are fan-triangulated.
pub fn load_mesh(path: &Path) -> Result<LoadedMesh> {
    let bytes = fs::read(path)?;
    match extension(path).as_str() {
        "obj" => {
            let text = std::str::from_utf8(&bytes).map_err(|e| parse_err(path, format!("byte {}", e.valid_up_to()), "invalid UTF-8"))?;
            parse_obj(text, path)
        }
        "ply" => parse_ply(&bytes, path),
        other => Err(Error::UnsupportedFormat(format!(
            "unknown mesh extension '{other}' for {}",
            path.display()
        ))),
    }
}

fn finish(vertices: Vec<Vec3>, polys: Vec<Vec<usize>>, normals: Option<Vec<Vec3>>) -> LoadedMesh {
    let mut faces = Vec::with_capacity(polys.len());
    for p in polys {
        for k in 1..p.len().saturating_sub(1) {
            faces.push([p[0], p[k], p[k + 1]]);
        }
    }
    let mut mesh = TriMesh::new(vertices, faces);
    let dropped_faces = mesh.drop_degenerate();
    if dropped_faces > 0 {
        log::warn!("dropped {dropped_faces} degenerate faces");
    }
    LoadedMesh {
        mesh,
        dropped_faces,
        normals,
    }
}

/// Parses Wavefront OBJ text (`v` and `f` records; other records ignored).
pub fn parse_obj(text: &str, path: &Path) -> Result<LoadedMesh> {
    let mut vertices = Vec::new();
    let mut polys = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let loc = || format!("line {}", ln + 1);
        let line = line.split('#').next().unwrap_or("");
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let mut p = [0.0; 3];
                for slot in &mut p {
                    let tok = it.next().ok_or_else(|| parse_err(path, loc(), "vertex needs 3 coordinates"))?;
                    *slot = tok
                        .parse()
                        .map_err(|_| parse_err(path, loc(), format!("bad coordinate '{tok}'")))?;
                }
                vertices.push(p);
            }
            Some("f") => {
                let mut poly = Vec::new();
                for tok in it {
                    let first = tok.split('/').next().unwrap_or("");
                    let idx: i64 = first
                        .parse()
                        .map_err(|_| parse_err(path, loc(), format!("bad face index '{tok}'")))?;
                    let resolved = if idx > 0 {
                        idx - 1
                    } else if idx < 0 {
                        vertices.len() as i64 + idx
                    } else {
                        return Err(parse_err(path, loc(), "face index 0"));
                    };
                    if resolved < 0 || resolved as usize >= vertices.len() {
                        return Err(parse_err(path, loc(), format!("face index {idx} out of range")));
                    }
                    poly.push(resolved as usize);
                }
                if poly.len() < 3 {
                    return Err(parse_err(path, loc(), "face needs at least 3 vertices"));
                }
                polys.push(poly);
            }
            _ => {}
        }
    }
    Ok(finish(vertices, polys, None))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn read_le(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::U32 => u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F64 => f64::from_le_bytes(b[..8].try_into().expect("8 bytes")),
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar(String, Scalar),
    List(String, Scalar, Scalar),
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    props: Vec<Property>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum PlyFormat {
    Ascii,
    BinaryLe,
}

struct PlyHeader {
    format: PlyFormat,
    elements: Vec<Element>,
    body_start: usize,
}

fn parse_ply_header(bytes: &[u8], path: &Path) -> Result<PlyHeader> {
    let mut pos = 0;
    let mut line_no = 0;
    let mut next_line = |pos: &mut usize| -> Option<(usize, String)> {
        if *pos >= bytes.len() {
            return None;
        }
        let end = bytes[*pos..].iter().position(|&b| b == b'\n').map(|i| *pos + i).unwrap_or(bytes.len());
        let line = String::from_utf8_lossy(&bytes[*pos..end]).trim_end_matches('\r').to_string();
        *pos = (end + 1).min(bytes.len());
        line_no += 1;
        Some((line_no, line))
    };
    match next_line(&mut pos) {
        Some((_, l)) if l.trim() == "ply" => {}
        _ => return Err(parse_err(path, "line 1", "missing 'ply' magic")),
    }
    let mut format = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let Some((ln, line)) = next_line(&mut pos) else {
            return Err(parse_err(path, format!("byte {pos}"), "header not terminated by end_header"));
        };
        let loc = format!("line {ln}");
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.first().copied() {
            Some("format") => {
                format = Some(match toks.get(1).copied() {
                    Some("ascii") => PlyFormat::Ascii,
                    Some("binary_little_endian") => PlyFormat::BinaryLe,
                    Some(f) => return Err(Error::UnsupportedFormat(format!("PLY format '{f}'"))),
                    None => return Err(parse_err(path, loc, "format line without a format")),
                });
            }
            Some("element") => {
                let (Some(name), Some(count)) = (toks.get(1), toks.get(2)) else {
                    return Err(parse_err(path, loc, "malformed element line"));
                };
                let count = count
                    .parse()
                    .map_err(|_| parse_err(path, loc.clone(), format!("bad element count '{count}'")))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    props: Vec::new(),
                });
            }
            Some("property") => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| parse_err(path, loc.clone(), "property before any element"))?;
                let prop = if toks.get(1) == Some(&"list") {
                    match (toks.get(2), toks.get(3), toks.get(4)) {
                        (Some(c), Some(i), Some(n)) => Property::List(
                            n.to_string(),
                            Scalar::parse(c).ok_or_else(|| parse_err(path, loc.clone(), format!("unknown type '{c}'")))?,
                            Scalar::parse(i).ok_or_else(|| parse_err(path, loc.clone(), format!("unknown type '{i}'")))?,
                        ),
                        _ => return Err(parse_err(path, loc, "malformed list property")),
                    }
                } else {
                    match (toks.get(1), toks.get(2)) {
                        (Some(t), Some(n)) => Property::Scalar(
                            n.to_string(),
                            Scalar::parse(t).ok_or_else(|| parse_err(path, loc.clone(), format!("unknown type '{t}'")))?,
                        ),
                        _ => return Err(parse_err(path, loc, "malformed property")),
                    }
                };
                el.props.push(prop);
            }
            Some("end_header") => break,
            Some("comment") | Some("obj_info") | None => {}
            Some(other) => return Err(parse_err(path, loc, format!("unexpected header keyword '{other}'"))),
        }
    }
    let format = format.ok_or_else(|| parse_err(path, "header", "missing format line"))?;
    Ok(PlyHeader {
        format,
        elements,
        body_start: pos,
    })
}

/// Element records as rows of scalars (list properties are flattened with
/// their length first).
struct PlyBody {
    rows: Vec<Vec<Vec<f64>>>,
}

fn read_ply_body(bytes: &[u8], header: &PlyHeader, path: &Path) -> Result<PlyBody> {
    let mut rows = Vec::with_capacity(header.elements.len());
    match header.format {
        PlyFormat::Ascii => {
            let text = String::from_utf8_lossy(&bytes[header.body_start..]);
            let header_lines = bytes[..header.body_start].iter().filter(|&&b| b == b'\n').count();
            let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
            for el in &header.elements {
                let mut recs = Vec::with_capacity(el.count);
                for _ in 0..el.count {
                    let (ln, line) = lines
                        .next()
                        .ok_or_else(|| parse_err(path, "end of file", format!("missing {} records", el.name)))?;
                    let loc = format!("line {}", header_lines + ln + 1);
                    let vals: Vec<f64> = line
                        .split_whitespace()
                        .map(|t| t.parse::<f64>().map_err(|_| parse_err(path, loc.clone(), format!("bad number '{t}'"))))
                        .collect::<Result<_>>()?;
                    recs.push(vals);
                }
                rows.push(recs);
            }
        }
        PlyFormat::BinaryLe => {
            let mut pos = header.body_start;
            let take = |n: usize, pos: &mut usize| -> Result<&[u8]> {
                if *pos + n > bytes.len() {
                    return Err(parse_err(path, format!("byte {}", *pos), "unexpected end of binary data"));
                }
                let s = &bytes[*pos..*pos + n];
                *pos += n;
                Ok(s)
            };
            for el in &header.elements {
                let mut recs = Vec::with_capacity(el.count);
                for _ in 0..el.count {
                    let mut vals = Vec::new();
                    for p in &el.props {
                        match *p {
                            Property::Scalar(_, t) => vals.push(t.read_le(take(t.size(), &mut pos)?)),
                            Property::List(_, ct, it) => {
                                let n = ct.read_le(take(ct.size(), &mut pos)?);
                                if !(n >= 0.0) || n.fract() != 0.0 {
                                    return Err(parse_err(path, format!("byte {pos}"), "invalid list length"));
                                }
                                vals.push(n);
                                for _ in 0..n as usize {
                                    vals.push(it.read_le(take(it.size(), &mut pos)?));
                                }
                            }
                        }
                    }
                    recs.push(vals);
                }
                rows.push(recs);
            }
        }
    }
    Ok(PlyBody { rows })
}

fn scalar_index(el: &Element, name: &str) -> Option<usize> {
    // position of a scalar property, valid only when it precedes any list
    let mut k = 0;
    for p in &el.props {
        match p {
            Property::Scalar(n, _) if n == name => return Some(k),
            Property::Scalar(..) => k += 1,
            Property::List(..) => return None,
        }
    }
    None
}

struct PlyData {
    vertices: Vec<Vec3>,
    normals: Option<Vec<Vec3>>,
    polys: Vec<Vec<usize>>,
}

fn decode_ply(bytes: &[u8], path: &Path) -> Result<PlyData> {
    let header = parse_ply_header(bytes, path)?;
    let body = read_ply_body(bytes, &header, path)?;
    let mut data = PlyData {
        vertices: Vec::new(),
        normals: None,
        polys: Vec::new(),
    };
    for (el, recs) in header.elements.iter().zip(&body.rows) {
        match el.name.as_str() {
            "vertex" => {
                let idx = |n: &str| scalar_index(el, n);
                let (Some(x), Some(y), Some(z)) = (idx("x"), idx("y"), idx("z")) else {
                    return Err(parse_err(path, "header", "vertex element lacks x, y, z"));
                };
                let nidx = match (idx("nx"), idx("ny"), idx("nz")) {
                    (Some(a), Some(b), Some(c)) => Some([a, b, c]),
                    _ => None,
                };
                let need = [x, y, z].into_iter().chain(nidx.into_iter().flatten()).max().unwrap_or(0);
                let mut normals = Vec::new();
                for (r, rec) in recs.iter().enumerate() {
                    if rec.len() <= need {
                        return Err(parse_err(path, format!("vertex {r}"), "too few values"));
                    }
                    data.vertices.push([rec[x], rec[y], rec[z]]);
                    if let Some([a, b, c]) = nidx {
                        normals.push([rec[a], rec[b], rec[c]]);
                    }
                }
                if nidx.is_some() {
                    data.normals = Some(normals);
                }
            }
            "face" => {
                // vertex_indices (or vertex_index), else the first list
                let lists: Vec<usize> = (0..el.props.len())
                    .filter(|&k| matches!(el.props[k], Property::List(..)))
                    .collect();
                let target = lists
                    .iter()
                    .copied()
                    .find(|&k| matches!(&el.props[k], Property::List(n, ..) if n == "vertex_indices" || n == "vertex_index"))
                    .or(lists.first().copied())
                    .ok_or_else(|| parse_err(path, "header", "face element has no index list"))?;
                for (r, rec) in recs.iter().enumerate() {
                    // skip the properties before the target list
                    let mut lead = 0;
                    for p in &el.props[..target] {
                        lead += match p {
                            Property::Scalar(..) => 1,
                            Property::List(..) => 1 + rec.get(lead).copied().unwrap_or(0.0) as usize,
                        };
                    }
                    let n = rec.get(lead).copied().unwrap_or(0.0) as usize;
                    let ids = rec.get(lead + 1..lead + 1 + n).ok_or_else(|| parse_err(path, format!("face {r}"), "truncated index list"))?;
                    let mut poly = Vec::with_capacity(n);
                    for &v in ids {
                        if v < 0.0 {
                            return Err(parse_err(path, format!("face {r}"), format!("negative vertex index {v}")));
                        }
                        poly.push(v as usize);
                    }
                    if poly.len() >= 3 {
                        data.polys.push(poly);
                    }
                }
            }
            _ => {}
        }
    }
    if let Some(bad) = data.polys.iter().flatten().find(|&&v| v >= data.vertices.len()) {
        return Err(parse_err(path, "face data", format!("vertex index {bad} out of range")));
    }
    Ok(data)
}

/// Parses ASCII or binary little-endian PLY.
pub fn parse_ply(bytes: &[u8], path: &Path) -> Result<LoadedMesh> {
    let d = decode_ply(bytes, path)?;
    Ok(finish(d.vertices, d.polys, d.normals))
}

/// Loads a PLY point cloud with `nx, ny, nz` properties as oriented samples.
/// Normals are renormalized (with a warning) when they are not unit length.
pub fn load_point_cloud(path: &Path, dim: usize) -> Result<OrientedSampleSet> {
    if extension(path) != "ply" {
        return Err(Error::UnsupportedFormat(format!(
            "point clouds must be PLY: {}",
            path.display()
        )));
    }
    let bytes = fs::read(path)?;
    let d = decode_ply(&bytes, path)?;
    let normals = d
        .normals
        .ok_or_else(|| parse_err(path, "header", "point cloud lacks nx, ny, nz"))?;
    OrientedSampleSet::normalized(dim, d.vertices, normals, path.display().to_string())
}

/// Whether a PLY file carries per-vertex normals and no faces.
pub fn is_point_cloud(path: &Path) -> Result<bool> {
    if extension(path) != "ply" {
        return Ok(false);
    }
    let bytes = fs::read(path)?;
    let h = parse_ply_header(&bytes, path)?;
    let has_faces = h.elements.iter().any(|e| e.name == "face" && e.count > 0);
    let has_normals = h
        .elements
        .iter()
        .filter(|e| e.name == "vertex")
        .any(|e| scalar_index(e, "nx").is_some());
    Ok(has_normals && !has_faces)
}

/// OBJ text for a triangle mesh.
pub fn obj_string(mesh: &TriMesh) -> String {
    let mut s = String::new();
    for v in &mesh.vertices {
        let _ = writeln!(s, "v {} {} {}", v[0], v[1], v[2]);
    }
    for f in &mesh.faces {
        let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    s
}

pub fn save_obj(mesh: &TriMesh, path: &Path) -> Result<()> {
    fs::write(path, obj_string(mesh))?;
    Ok(())
}

/// Binary little-endian PLY with double-precision vertices.
pub fn ply_bytes(mesh: &TriMesh) -> Vec<u8> {
    let mut out = format!(
        "ply\nformat binary_little_endian 1.0\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\nelement face {}\nproperty list uchar int vertex_indices\nend_header\n",
        mesh.vertices.len(),
        mesh.faces.len()
    )
    .into_bytes();
    for v in &mesh.vertices {
        for c in v {
            out.extend_from_slice(&c.to_le_bytes());
        }
    }
    for f in &mesh.faces {
        out.push(3);
        for &i in f {
            out.extend_from_slice(&(i as i32).to_le_bytes());
        }
    }
    out
}

pub fn save_ply(mesh: &TriMesh, path: &Path) -> Result<()> {
    fs::write(path, ply_bytes(mesh))?;
    Ok(())
}

/// ASCII PLY point cloud with normals.
pub fn save_point_cloud(samples: &OrientedSampleSet, path: &Path) -> Result<()> {
    let mut s = format!(
        "ply\nformat ascii 1.0\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\nproperty double nx\nproperty double ny\nproperty double nz\nend_header\n",
        samples.len()
    );
    for (p, n) in samples.points.iter().zip(&samples.normals) {
        let _ = writeln!(s, "{} {} {} {} {} {}", p[0], p[1], p[2], n[0], n[1], n[2]);
    }
    fs::write(path, s)?;
    Ok(())
}
