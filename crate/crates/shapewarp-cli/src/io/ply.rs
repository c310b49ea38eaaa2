//! PLY point-cloud reader/writer supporting the ASCII and
//! binary-little-endian variants with float32 x/y/z vertex properties.

use std::io::Write;
use std::path::Path;

use nalgebra::Point3;
use shapewarp::cloud::PointCloud;

use super::{io_err, malformed, FileFormatError};

/// Writes a point cloud as PLY. Coordinates are narrowed to f32 as required
/// by the format contract.
pub fn write_ply(path: &Path, cloud: &PointCloud, binary: bool) -> Result<(), FileFormatError> {
    let mut buf: Vec<u8> = Vec::with_capacity(128 + cloud.len() * 24);
    let format = if binary {
        "binary_little_endian"
    } else {
        "ascii"
    };
    write!(
        buf,
        "ply\nformat {format} 1.0\nelement vertex {}\nproperty float x\nproperty float y\nproperty float z\nend_header\n",
        cloud.len()
    )
    .expect("writing to a Vec cannot fail");
    if binary {
        for p in cloud.iter() {
            for c in [p.x as f32, p.y as f32, p.z as f32] {
                buf.extend_from_slice(&c.to_le_bytes());
            }
        }
    } else {
        for p in cloud.iter() {
            writeln!(buf, "{} {} {}", p.x as f32, p.y as f32, p.z as f32)
                .expect("writing to a Vec cannot fail");
        }
    }
    std::fs::write(path, buf).map_err(|e| io_err(path, e))
}

/// Reads either PLY variant back into an f64 point cloud.
pub fn read_ply(path: &Path) -> Result<PointCloud, FileFormatError> {
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    let header_end = find_header_end(&bytes).ok_or_else(|| {
        malformed(path, "missing end_header line")
    })?;
    let header = std::str::from_utf8(&bytes[..header_end])
        .map_err(|_| malformed(path, "header is not valid UTF-8"))?;
    let mut lines = header.lines();
    if lines.next().map(str::trim) != Some("ply") {
        return Err(malformed(path, "not a PLY file (missing `ply` magic)"));
    }

    let mut binary = None;
    let mut vertex_count: Option<usize> = None;
    let mut properties: Vec<String> = Vec::new();
    let mut in_vertex_element = false;
    for line in lines {
        let line = line.trim();
        if line.is_empty() || line.starts_with("comment") {
            continue;
        }
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("format") => match tok.next() {
                Some("ascii") => binary = Some(false),
                Some("binary_little_endian") => binary = Some(true),
                other => {
                    return Err(malformed(
                        path,
                        format!("unsupported format {:?}", other.unwrap_or("")),
                    ))
                }
            },
            Some("element") => match (tok.next(), tok.next()) {
                (Some("vertex"), Some(n)) => {
                    let n = n
                        .parse()
                        .map_err(|_| malformed(path, format!("bad vertex count {n:?}")))?;
                    vertex_count = Some(n);
                    in_vertex_element = true;
                }
                (Some(other), _) => {
                    return Err(malformed(
                        path,
                        format!("unsupported element `{other}` (only vertex clouds are supported)"),
                    ))
                }
                _ => return Err(malformed(path, "malformed element line")),
            },
            Some("property") => {
                if !in_vertex_element {
                    return Err(malformed(path, "property before any element"));
                }
                let ty = tok.next().unwrap_or("");
                let name = tok.next().unwrap_or("");
                if ty != "float" && ty != "float32" {
                    return Err(malformed(
                        path,
                        format!("property {name} has type {ty}, expected float32"),
                    ));
                }
                properties.push(name.to_string());
            }
            Some("end_header") => break,
            Some(other) => {
                return Err(malformed(path, format!("unsupported header line `{other}`")))
            }
            None => {}
        }
    }
    if properties != ["x", "y", "z"] {
        return Err(malformed(
            path,
            format!("vertex properties must be exactly float x, y, z; found {properties:?}"),
        ));
    }
    let binary = binary.ok_or_else(|| malformed(path, "missing format line"))?;
    let n = vertex_count.ok_or_else(|| malformed(path, "missing element vertex line"))?;

    let body = &bytes[header_end..];
    let mut points = Vec::with_capacity(n);
    if binary {
        let need = n * 12;
        if body.len() < need {
            return Err(malformed(
                path,
                format!("binary body too short: {} bytes, expected {need}", body.len()),
            ));
        }
        for chunk in body[..need].chunks_exact(12) {
            let x = f32::from_le_bytes(chunk[0..4].try_into().unwrap());
            let y = f32::from_le_bytes(chunk[4..8].try_into().unwrap());
            let z = f32::from_le_bytes(chunk[8..12].try_into().unwrap());
            points.push(Point3::new(x as f64, y as f64, z as f64));
        }
    } else {
        let text = std::str::from_utf8(body)
            .map_err(|_| malformed(path, "ASCII body is not valid UTF-8"))?;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if points.len() == n {
                return Err(malformed(path, "more vertex lines than declared"));
            }
            let mut c = line.split_whitespace().map(|t| t.parse::<f32>());
            match (c.next(), c.next(), c.next(), c.next()) {
                (Some(Ok(x)), Some(Ok(y)), Some(Ok(z)), None) => {
                    points.push(Point3::new(x as f64, y as f64, z as f64))
                }
                _ => return Err(malformed(path, format!("bad vertex line `{line}`"))),
            }
        }
        if points.len() != n {
            return Err(malformed(
                path,
                format!("expected {n} vertices, found {}", points.len()),
            ));
        }
    }
    Ok(PointCloud::new(points))
}

/// Byte offset just past the `end_header` line, handling both `\n` and
/// `\r\n` endings.
fn find_header_end(bytes: &[u8]) -> Option<usize> {
    const MARK: &[u8] = b"end_header";
    let mut i = 0;
    while i + MARK.len() <= bytes.len() {
        if &bytes[i..i + MARK.len()] == MARK && (i == 0 || bytes[i - 1] == b'\n') {
            let mut j = i + MARK.len();
            while j < bytes.len() && (bytes[j] == b'\r' || bytes[j] == b' ') {
                j += 1;
            }
            if j < bytes.len() && bytes[j] == b'\n' {
                return Some(j + 1);
            }
        }
        i += 1;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_cloud() -> PointCloud {
        PointCloud::new(vec![
            Point3::new(0.125, -3.5, 7.0),
            Point3::new(1e-3, 0.0, -2.25),
            Point3::new(0.7219432, 443.21, -0.0001),
        ])
    }

    #[test]
    fn ascii_round_trip_preserves_f32_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.ply");
        let cloud = sample_cloud();
        write_ply(&path, &cloud, false).unwrap();
        let back = read_ply(&path).unwrap();
        assert_eq!(back.len(), cloud.len());
        for (a, b) in cloud.iter().zip(back.iter()) {
            assert_eq!(a.x as f32, b.x as f32);
            assert_eq!(a.y as f32, b.y as f32);
            assert_eq!(a.z as f32, b.z as f32);
        }
    }

    #[test]
    fn binary_round_trip_preserves_f32_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.ply");
        let cloud = sample_cloud();
        write_ply(&path, &cloud, true).unwrap();
        let back = read_ply(&path).unwrap();
        for (a, b) in cloud.iter().zip(back.iter()) {
            assert_eq!(a.x as f32, b.x as f32);
            assert_eq!(a.y as f32, b.y as f32);
            assert_eq!(a.z as f32, b.z as f32);
        }
    }

    #[test]
    fn rewriting_a_loaded_cloud_is_byte_identical() {
        // After the first f64→f32 narrowing the values are exactly
        // representable, so a second write emits the same bytes.
        let dir = tempfile::tempdir().unwrap();
        for binary in [false, true] {
            let first = dir.path().join(format!("a_{binary}.ply"));
            let second = dir.path().join(format!("b_{binary}.ply"));
            write_ply(&first, &sample_cloud(), binary).unwrap();
            let loaded = read_ply(&first).unwrap();
            write_ply(&second, &loaded, binary).unwrap();
            assert_eq!(
                std::fs::read(&first).unwrap(),
                std::fs::read(&second).unwrap()
            );
        }
    }

    #[test]
    fn rejects_other_layouts() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.ply");
        let cases: [&str; 4] = [
            "ply\nformat ascii 1.0\nelement vertex 1\nproperty double x\nproperty double y\nproperty double z\nend_header\n0 0 0\n",
            "ply\nformat ascii 1.0\nelement face 1\nend_header\n",
            "ply\nformat binary_big_endian 1.0\nelement vertex 0\nend_header\n",
            "not a ply\n",
        ];
        for text in cases {
            std::fs::write(&path, text).unwrap();
            assert!(read_ply(&path).is_err(), "accepted: {text:?}");
        }
    }

    #[test]
    fn ascii_vertex_count_is_enforced() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("short.ply");
        std::fs::write(
            &path,
            "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\nend_header\n1 2 3\n",
        )
        .unwrap();
        assert!(read_ply(&path).is_err());
    }
}
