//! Minimal OBJ reader/writer for triangle meshes. Vertices are written with
//! Rust's shortest-round-trip float formatting, so load(save(mesh)) restores
//! coordinates bitwise.

use std::io::Write;
use std::path::Path;

use nalgebra::Point3;
use shapewarp::mesh::TriMesh;

use super::{io_err, malformed, FileFormatError};

pub fn write_obj(path: &Path, mesh: &TriMesh) -> Result<(), FileFormatError> {
    let mut buf: Vec<u8> = Vec::with_capacity(mesh.vertex_count() * 32);
    for v in mesh.vertices() {
        writeln!(buf, "v {} {} {}", v.x, v.y, v.z).expect("writing to a Vec cannot fail");
    }
    for f in mesh.faces() {
        writeln!(buf, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)
            .expect("writing to a Vec cannot fail");
    }
    std::fs::write(path, buf).map_err(|e| io_err(path, e))
}

pub fn read_obj(path: &Path) -> Result<TriMesh, FileFormatError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut vertices: Vec<Point3<f64>> = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("v") => {
                let mut c = tok.map(|t| t.parse::<f64>());
                match (c.next(), c.next(), c.next(), c.next()) {
                    (Some(Ok(x)), Some(Ok(y)), Some(Ok(z)), None) => {
                        vertices.push(Point3::new(x, y, z))
                    }
                    _ => {
                        return Err(malformed(
                            path,
                            format!("line {}: bad vertex `{line}`", lineno + 1),
                        ))
                    }
                }
            }
            Some("f") => {
                let refs: Vec<&str> = tok.collect();
                if refs.len() != 3 {
                    return Err(malformed(
                        path,
                        format!(
                            "line {}: face with {} vertices (only triangles are supported)",
                            lineno + 1,
                            refs.len()
                        ),
                    ));
                }
                let mut idx = [0usize; 3];
                for (slot, r) in idx.iter_mut().zip(&refs) {
                    // Accept `i`, `i/t`, `i//n`, `i/t/n`; reject relative
                    // (negative) references.
                    let head = r.split('/').next().unwrap_or("");
                    let i: i64 = head.parse().map_err(|_| {
                        malformed(path, format!("line {}: bad face index `{r}`", lineno + 1))
                    })?;
                    if i < 1 {
                        return Err(malformed(
                            path,
                            format!("line {}: face index {i} out of range", lineno + 1),
                        ));
                    }
                    *slot = (i - 1) as usize;
                }
                faces.push(idx);
            }
            // Normals, texture coordinates, groups, materials and comments
            // carry no geometry we use.
            Some("vn") | Some("vt") | Some("g") | Some("o") | Some("s") | Some("usemtl")
            | Some("mtllib") | Some("#") | None => {}
            Some(other) if other.starts_with('#') => {}
            Some(other) => {
                return Err(malformed(
                    path,
                    format!("line {}: unsupported directive `{other}`", lineno + 1),
                ))
            }
        }
    }
    TriMesh::new(vertices, faces).map_err(|e| malformed(path, e.to_string()))
}
