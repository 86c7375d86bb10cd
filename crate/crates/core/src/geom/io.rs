//! Mesh and point-cloud file formats: binary/ASCII STL, OBJ (triangles
//! only), and whitespace-separated xyz text. All lengths in mm.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geom::cloud::PointCloud;
use crate::geom::mesh::TriMesh;

/// Loads a mesh by file extension (`.stl`, `.obj`), welding duplicate
/// vertices. Returns the mesh and any non-fatal format warnings.
pub fn load_mesh(path: &Path) -> Result<(TriMesh, Vec<String>)> {
    match path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase())
        .as_deref()
    {
        Some("stl") => load_stl(path),
        Some("obj") => load_obj(path),
        other => Err(Error::Parse(format!(
            "unsupported mesh extension {other:?} (expected .stl or .obj)"
        ))),
    }
}

pub fn load_stl(path: &Path) -> Result<(TriMesh, Vec<String>)> {
    let bytes = std::fs::read(path)?;
    if looks_like_ascii_stl(&bytes) {
        parse_ascii_stl(&bytes)
    } else {
        parse_binary_stl(&bytes)
    }
}

fn looks_like_ascii_stl(bytes: &[u8]) -> bool {
    if !bytes.starts_with(b"solid") {
        return false;
    }
    // Binary files may also start with "solid"; an ASCII body must mention
    // "facet" early on.
    let head = &bytes[..bytes.len().min(1024)];
    String::from_utf8_lossy(head).contains("facet")
}

fn parse_ascii_stl(bytes: &[u8]) -> Result<(TriMesh, Vec<String>)> {
    let text = std::str::from_utf8(bytes).map_err(|_| Error::Parse("STL is not UTF-8".into()))?;
    let mut welder = VertexWelder::default();
    let mut triangles = Vec::new();
    let mut current: Vec<[f64; 3]> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let mut it = line.split_whitespace();
        match it.next() {
            Some("vertex") => {
                let mut v = [0.0; 3];
                for x in &mut v {
                    *x = it
                        .next()
                        .and_then(|t| t.parse::<f64>().ok())
                        .ok_or_else(|| {
                            Error::Parse(format!("bad STL vertex at line {}", lineno + 1))
                        })?;
                }
                current.push(v);
            }
            Some("endfacet") => {
                if current.len() != 3 {
                    return Err(Error::Parse(format!(
                        "facet with {} vertices at line {}",
                        current.len(),
                        lineno + 1
                    )));
                }
                let tri = [
                    welder.insert(current[0]),
                    welder.insert(current[1]),
                    welder.insert(current[2]),
                ];
                triangles.push(tri);
                current.clear();
            }
            _ => {}
        }
    }
    finish_mesh(welder, triangles)
}

fn parse_binary_stl(bytes: &[u8]) -> Result<(TriMesh, Vec<String>)> {
    if bytes.len() < 84 {
        return Err(Error::Parse("binary STL shorter than header".into()));
    }
    let count = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
    let expected = 84 + count * 50;
    if bytes.len() < expected {
        return Err(Error::Parse(format!(
            "binary STL truncated: {} bytes, need {expected}",
            bytes.len()
        )));
    }
    let mut welder = VertexWelder::default();
    let mut triangles = Vec::with_capacity(count);
    for i in 0..count {
        let base = 84 + i * 50 + 12; // skip the facet normal
        let mut tri = [0u32; 3];
        for (v, t) in tri.iter_mut().enumerate() {
            let off = base + v * 12;
            let read = |o: usize| f32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as f64;
            *t = welder.insert([read(off), read(off + 4), read(off + 8)]);
        }
        triangles.push(tri);
    }
    finish_mesh(welder, triangles)
}

pub fn save_stl_binary(mesh: &TriMesh, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let mut header = [0u8; 80];
    let tag = b"jigplan binary stl";
    header[..tag.len()].copy_from_slice(tag);
    out.write_all(&header)?;
    out.write_all(&(mesh.triangles.len() as u32).to_le_bytes())?;
    for i in 0..mesh.triangles.len() {
        let n = mesh.triangle_normal(i);
        for v in [n.x, n.y, n.z] {
            out.write_all(&(v as f32).to_le_bytes())?;
        }
        for p in mesh.triangle_points(i) {
            for v in [p.x, p.y, p.z] {
                out.write_all(&(v as f32).to_le_bytes())?;
            }
        }
        out.write_all(&0u16.to_le_bytes())?;
    }
    Ok(())
}

/// OBJ subset: `v` and triangular `f` records. Faces with more than three
/// vertices are fan-triangulated; anything else is ignored with a warning.
pub fn load_obj(path: &Path) -> Result<(TriMesh, Vec<String>)> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut vertices: Vec<[f64; 3]> = Vec::new();
    let mut triangles: Vec<[u32; 3]> = Vec::new();
    let mut warnings: Vec<String> = Vec::new();
    let mut ignored: std::collections::BTreeMap<String, usize> = std::collections::BTreeMap::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let mut v = [0.0; 3];
                for x in &mut v {
                    *x = it
                        .next()
                        .and_then(|t| t.parse::<f64>().ok())
                        .ok_or_else(|| {
                            Error::Parse(format!("bad OBJ vertex at line {}", lineno + 1))
                        })?;
                }
                vertices.push(v);
            }
            Some("f") => {
                let idx: Vec<u32> = it
                    .map(|tok| parse_obj_index(tok, vertices.len(), lineno + 1))
                    .collect::<Result<_>>()?;
                if idx.len() < 3 {
                    return Err(Error::Parse(format!(
                        "face with {} vertices at line {}",
                        idx.len(),
                        lineno + 1
                    )));
                }
                for k in 1..idx.len() - 1 {
                    triangles.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            Some(other) => {
                *ignored.entry(other.to_string()).or_insert(0) += 1;
            }
            None => {}
        }
    }
    for (rec, count) in ignored {
        warnings.push(format!("ignored {count} '{rec}' record(s)"));
    }
    let mesh = TriMesh::new(vertices, triangles)?;
    Ok((mesh.oriented_outward(), warnings))
}

fn parse_obj_index(token: &str, vertex_count: usize, lineno: usize) -> Result<u32> {
    let first = token.split('/').next().unwrap_or("");
    let raw: i64 = first
        .parse()
        .map_err(|_| Error::Parse(format!("bad OBJ face index '{token}' at line {lineno}")))?;
    let idx = if raw > 0 {
        raw - 1
    } else if raw < 0 {
        vertex_count as i64 + raw
    } else {
        return Err(Error::Parse(format!("zero OBJ index at line {lineno}")));
    };
    if idx < 0 || idx as usize >= vertex_count {
        return Err(Error::Parse(format!(
            "OBJ index {raw} out of range at line {lineno}"
        )));
    }
    Ok(idx as u32)
}

/// Whitespace-separated `x y z` text, one point per line, mm.
pub fn load_xyz(path: &Path) -> Result<PointCloud> {
    let file = std::fs::File::open(path)?;
    let mut points = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Parse(format!("bad xyz line {}", lineno + 1)))?;
        if vals.len() < 3 {
            return Err(Error::Parse(format!(
                "xyz line {} has {} fields",
                lineno + 1,
                vals.len()
            )));
        }
        points.push([vals[0], vals[1], vals[2]]);
    }
    Ok(PointCloud::new(points))
}

pub fn save_xyz(cloud: &PointCloud, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for p in &cloud.points {
        writeln!(out, "{} {} {}", p[0], p[1], p[2])?;
    }
    Ok(())
}

/// Reads STL from any reader (used by tests; files go through `load_stl`).
pub fn read_stl<R: Read>(mut r: R) -> Result<(TriMesh, Vec<String>)> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if looks_like_ascii_stl(&bytes) {
        parse_ascii_stl(&bytes)
    } else {
        parse_binary_stl(&bytes)
    }
}

#[derive(Default)]
struct VertexWelder {
    map: std::collections::HashMap<[u64; 3], u32>,
    vertices: Vec<[f64; 3]>,
}

impl VertexWelder {
    fn insert(&mut self, v: [f64; 3]) -> u32 {
        let key = [v[0].to_bits(), v[1].to_bits(), v[2].to_bits()];
        *self.map.entry(key).or_insert_with(|| {
            self.vertices.push(v);
            (self.vertices.len() - 1) as u32
        })
    }
}

fn finish_mesh(welder: VertexWelder, triangles: Vec<[u32; 3]>) -> Result<(TriMesh, Vec<String>)> {
    let mesh = TriMesh::new(welder.vertices, triangles)?;
    Ok((mesh.oriented_outward(), Vec::new()))
}

/// Normal of a triangle given three points; used by the STL writer.
#[allow(dead_code)]
fn normal_of(a: Vector3<f64>, b: Vector3<f64>, c: Vector3<f64>) -> Vector3<f64> {
    (b - a).cross(&(c - a)).normalize()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::mesh::box_mesh;
    use nalgebra::Vector3;

    #[test]
    fn stl_binary_round_trip() {
        let mesh = box_mesh(Vector3::new(1.0, 2.0, 3.0), Vector3::new(10.0, 20.0, 30.0));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("box.stl");
        save_stl_binary(&mesh, &path).unwrap();
        let (loaded, warnings) = load_stl(&path).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(loaded.triangles.len(), 12);
        assert_eq!(loaded.vertices.len(), 8);
        assert!((loaded.signed_volume() - 6000.0).abs() < 1.0);
    }

    #[test]
    fn ascii_stl_parses() {
        let text = "\
solid tri
facet normal 0 0 1
 outer loop
  vertex 0 0 0
  vertex 10 0 0
  vertex 0 10 0
 endloop
endfacet
facet normal 0 0 -1
 outer loop
  vertex 0 0 0
  vertex 0 10 0
  vertex 10 0 0
 endloop
endfacet
endsolid tri
";
        let (mesh, _) = read_stl(text.as_bytes()).unwrap();
        assert_eq!(mesh.vertices.len(), 3);
        assert_eq!(mesh.triangles.len(), 2);
    }

    #[test]
    fn obj_parses_and_warns_on_extras() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("quad.obj");
        std::fs::write(
            &path,
            "# comment\nmtllib foo.mtl\nv 0 0 0\nv 10 0 0\nv 10 10 0\nv 0 10 0\nv 0 0 5\nvn 0 0 1\nf 1/1/1 2/2/1 3/3/1 4/4/1\nf 1 2 5\nf 2 3 5\nf 3 4 5\nf 4 1 5\n",
        )
        .unwrap();
        let (mesh, warnings) = load_obj(&path).unwrap();
        assert_eq!(mesh.vertices.len(), 5);
        assert_eq!(mesh.triangles.len(), 6); // quad fan + 4 sides
        assert!(warnings.iter().any(|w| w.contains("mtllib")));
        assert!(warnings.iter().any(|w| w.contains("vn")));
    }

    #[test]
    fn xyz_round_trip() {
        let cloud = PointCloud::new(vec![[0.5, -1.25, 3.0], [10.0, 20.0, 30.0]]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pts.xyz");
        save_xyz(&cloud, &path).unwrap();
        let loaded = load_xyz(&path).unwrap();
        assert_eq!(loaded.points, cloud.points);
    }
}
