//! Model persistence: a single binary file holding a length-prefixed UTF-8
//! JSON header followed by raw little-endian arrays. The header records the
//! shape, dtype and byte offset of every array, so the payload needs no
//! delimiters; round trips are bitwise lossless.

use std::path::Path;

use nalgebra::Point3;
use serde::{Deserialize, Serialize};
use shapewarp::cloud::PointCloud;
use shapewarp::mesh::TriMesh;
use shapewarp::warp::WarpSpace;

use super::{io_err, malformed, FileFormatError};

pub const FORMAT_VERSION: u32 = 1;

/// Everything needed to reproduce a training run, echoed into the container.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrainingInfo {
    pub object_count: usize,
    pub seed: u64,
    pub selection: String,
    pub alpha: f64,
    pub kernel_beta: f64,
    pub outlier_weight: f64,
    pub cpd_max_iters: usize,
    pub cpd_tol: f64,
    pub canonical_samples: usize,
    pub training_samples: usize,
}

/// A learned warp space plus its provenance, as stored on disk.
#[derive(Debug, Clone)]
pub struct ModelContainer {
    pub category: String,
    pub space: WarpSpace,
    pub training: TrainingInfo,
}

#[derive(Serialize, Deserialize)]
struct ArrayEntry {
    name: String,
    dtype: String,
    shape: Vec<usize>,
    /// Byte offset from the start of the payload (the byte after the header).
    offset: usize,
}

#[derive(Serialize, Deserialize)]
struct Header {
    format_version: u32,
    category: String,
    canonical_index: usize,
    vertex_count: usize,
    point_count: usize,
    face_count: usize,
    latent_dim: usize,
    training: TrainingInfo,
    arrays: Vec<ArrayEntry>,
}

fn push_f64s(payload: &mut Vec<u8>, values: impl IntoIterator<Item = f64>) {
    for v in values {
        payload.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn save_model(path: &Path, model: &ModelContainer) -> Result<(), FileFormatError> {
    let space = &model.space;
    let n = space.point_count();
    let d = space.latent_dim();
    let k = space.training_latents.len();

    let mut arrays = Vec::new();
    let mut payload: Vec<u8> = Vec::new();
    let record = |name: &str, dtype: &str, shape: Vec<usize>, payload: &Vec<u8>| ArrayEntry {
        name: name.to_string(),
        dtype: dtype.to_string(),
        shape,
        offset: payload.len(),
    };

    arrays.push(record("canonical_points", "f64", vec![n, 3], &payload));
    push_f64s(
        &mut payload,
        space.canonical_points.iter().flat_map(|p| [p.x, p.y, p.z]),
    );

    arrays.push(record(
        "faces",
        "u64",
        vec![space.canonical_mesh.face_count(), 3],
        &payload,
    ));
    for f in space.canonical_mesh.faces() {
        for &i in f {
            payload.extend_from_slice(&(i as u64).to_le_bytes());
        }
    }

    arrays.push(record("mean", "f64", vec![3 * n], &payload));
    push_f64s(&mut payload, space.mean.iter().copied());

    arrays.push(record("basis", "f64", vec![d, 3 * n], &payload));
    for row in &space.basis {
        push_f64s(&mut payload, row.iter().copied());
    }

    arrays.push(record(
        "singular_values",
        "f64",
        vec![space.singular_values.len()],
        &payload,
    ));
    push_f64s(&mut payload, space.singular_values.iter().copied());

    arrays.push(record("training_latents", "f64", vec![k, d], &payload));
    for row in &space.training_latents {
        push_f64s(&mut payload, row.iter().copied());
    }

    let header = Header {
        format_version: FORMAT_VERSION,
        category: model.category.clone(),
        canonical_index: space.canonical_index,
        vertex_count: space.vertex_count,
        point_count: n,
        face_count: space.canonical_mesh.face_count(),
        latent_dim: d,
        training: model.training.clone(),
        arrays,
    };
    let header_bytes = serde_json::to_vec(&header)
        .map_err(|e| malformed(path, format!("header serialization failed: {e}")))?;

    let mut file = Vec::with_capacity(8 + header_bytes.len() + payload.len());
    file.extend_from_slice(&(header_bytes.len() as u64).to_le_bytes());
    file.extend_from_slice(&header_bytes);
    file.extend_from_slice(&payload);
    std::fs::write(path, file).map_err(|e| io_err(path, e))
}

struct PayloadReader<'a> {
    path: &'a Path,
    payload: &'a [u8],
}

impl<'a> PayloadReader<'a> {
    fn slice(&self, entry: &ArrayEntry, dtype: &str) -> Result<&'a [u8], FileFormatError> {
        if entry.dtype != dtype {
            return Err(malformed(
                self.path,
                format!("array {} has dtype {}, expected {dtype}", entry.name, entry.dtype),
            ));
        }
        let count: usize = entry.shape.iter().product();
        let bytes = count * 8;
        let end = entry.offset.checked_add(bytes).filter(|&e| e <= self.payload.len());
        match end {
            Some(end) => Ok(&self.payload[entry.offset..end]),
            None => Err(malformed(
                self.path,
                format!("array {} overruns the payload", entry.name),
            )),
        }
    }

    fn f64s(&self, entry: &ArrayEntry) -> Result<Vec<f64>, FileFormatError> {
        Ok(self
            .slice(entry, "f64")?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    fn u64s(&self, entry: &ArrayEntry) -> Result<Vec<u64>, FileFormatError> {
        Ok(self
            .slice(entry, "u64")?
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

fn find<'h>(header: &'h Header, name: &str, path: &Path) -> Result<&'h ArrayEntry, FileFormatError> {
    header
        .arrays
        .iter()
        .find(|a| a.name == name)
        .ok_or_else(|| malformed(path, format!("missing array {name}")))
}

fn expect_shape(
    entry: &ArrayEntry,
    expected: &[usize],
    path: &Path,
) -> Result<(), FileFormatError> {
    if entry.shape != expected {
        return Err(malformed(
            path,
            format!(
                "array {} has shape {:?}, expected {:?}",
                entry.name, entry.shape, expected
            ),
        ));
    }
    Ok(())
}

pub fn load_model(path: &Path) -> Result<ModelContainer, FileFormatError> {
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    if bytes.len() < 8 {
        return Err(malformed(path, "file too short for a header length prefix"));
    }
    let header_len = u64::from_le_bytes(bytes[..8].try_into().unwrap()) as usize;
    if 8 + header_len > bytes.len() {
        return Err(malformed(path, "header length prefix overruns the file"));
    }
    let header: Header = serde_json::from_slice(&bytes[8..8 + header_len])
        .map_err(|e| malformed(path, format!("bad header: {e}")))?;
    if header.format_version != FORMAT_VERSION {
        return Err(malformed(
            path,
            format!(
                "unsupported format version {} (this build reads version {FORMAT_VERSION})",
                header.format_version
            ),
        ));
    }
    let n = header.point_count;
    let d = header.latent_dim;
    let k = header.training.object_count;
    if header.vertex_count > n {
        return Err(malformed(path, "vertex_count exceeds point_count"));
    }
    let reader = PayloadReader {
        path,
        payload: &bytes[8 + header_len..],
    };

    let points_entry = find(&header, "canonical_points", path)?;
    expect_shape(points_entry, &[n, 3], path)?;
    let flat = reader.f64s(points_entry)?;
    let canonical_points = PointCloud::new(
        flat.chunks_exact(3)
            .map(|c| Point3::new(c[0], c[1], c[2]))
            .collect(),
    );

    let faces_entry = find(&header, "faces", path)?;
    expect_shape(faces_entry, &[header.face_count, 3], path)?;
    let face_flat = reader.u64s(faces_entry)?;
    let faces: Vec<[usize; 3]> = face_flat
        .chunks_exact(3)
        .map(|c| [c[0] as usize, c[1] as usize, c[2] as usize])
        .collect();
    let vertices: Vec<Point3<f64>> = canonical_points.points()[..header.vertex_count].to_vec();
    let canonical_mesh =
        TriMesh::new(vertices, faces).map_err(|e| malformed(path, e.to_string()))?;

    let mean_entry = find(&header, "mean", path)?;
    expect_shape(mean_entry, &[3 * n], path)?;
    let mean = reader.f64s(mean_entry)?;

    let basis_entry = find(&header, "basis", path)?;
    expect_shape(basis_entry, &[d, 3 * n], path)?;
    let basis_flat = reader.f64s(basis_entry)?;
    let basis: Vec<Vec<f64>> = basis_flat.chunks_exact(3 * n).map(|c| c.to_vec()).collect();

    let sv_entry = find(&header, "singular_values", path)?;
    let singular_values = reader.f64s(sv_entry)?;

    let latents_entry = find(&header, "training_latents", path)?;
    expect_shape(latents_entry, &[k, d], path)?;
    let latents_flat = reader.f64s(latents_entry)?;
    let training_latents: Vec<Vec<f64>> = if d == 0 {
        vec![Vec::new(); k]
    } else {
        latents_flat.chunks_exact(d).map(|c| c.to_vec()).collect()
    };

    if header.canonical_index >= k {
        return Err(malformed(path, "canonical_index out of range"));
    }

    Ok(ModelContainer {
        category: header.category,
        space: WarpSpace {
            canonical_index: header.canonical_index,
            canonical_mesh,
            canonical_points,
            vertex_count: header.vertex_count,
            mean,
            basis,
            singular_values,
            training_latents,
        },
        training: header.training,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use shapewarp::rng::rng_for_seed;
    use shapewarp::warp::ShapeParams;

    fn toy_model() -> ModelContainer {
        let mut rng = rng_for_seed(7);
        let vertices = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(0.0, 0.0, 1.0),
        ];
        let faces = vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]];
        let mesh = TriMesh::new(vertices.clone(), faces).unwrap();
        let mut pts = vertices;
        for _ in 0..6 {
            pts.push(Point3::new(rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()));
        }
        let n = pts.len();
        let d = 2;
        let k = 4;
        let mut basis = vec![vec![0.0; 3 * n]; d];
        // Orthonormal enough for a storage test: disjoint support.
        basis[0][0] = 1.0;
        basis[1][4] = 1.0;
        let space = WarpSpace {
            canonical_index: 1,
            canonical_mesh: mesh,
            canonical_points: PointCloud::new(pts),
            vertex_count: 4,
            mean: (0..3 * n).map(|i| (i as f64).sin() * 1e-3).collect(),
            basis,
            singular_values: vec![0.9, 0.4, 0.1, 1e-17],
            training_latents: (0..k)
                .map(|i| vec![i as f64 * 0.1, -(i as f64) * 0.2])
                .collect(),
        };
        ModelContainer {
            category: "mug".into(),
            space,
            training: TrainingInfo {
                object_count: k,
                seed: 7,
                selection: "exhaustive".into(),
                alpha: 2.0,
                kernel_beta: 2.0,
                outlier_weight: 0.0,
                cpd_max_iters: 100,
                cpd_tol: 1e-7,
                canonical_samples: 6,
                training_samples: 10,
            },
        }
    }

    #[test]
    fn save_load_round_trip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.model");
        let model = toy_model();
        save_model(&path, &model).unwrap();
        let loaded = load_model(&path).unwrap();

        assert_eq!(loaded.category, model.category);
        assert_eq!(loaded.training, model.training);
        let (a, b) = (&model.space, &loaded.space);
        assert_eq!(a.canonical_index, b.canonical_index);
        assert_eq!(a.vertex_count, b.vertex_count);
        assert_eq!(a.canonical_mesh.faces(), b.canonical_mesh.faces());
        for (p, q) in a.canonical_points.iter().zip(b.canonical_points.iter()) {
            assert_eq!(p.x.to_bits(), q.x.to_bits());
            assert_eq!(p.y.to_bits(), q.y.to_bits());
            assert_eq!(p.z.to_bits(), q.z.to_bits());
        }
        assert_eq!(a.mean, b.mean);
        assert_eq!(a.basis, b.basis);
        assert_eq!(a.singular_values, b.singular_values);
        assert_eq!(a.training_latents, b.training_latents);

        // A second save of the loaded model reproduces the file bytes.
        let path2 = dir.path().join("m2.model");
        save_model(&path2, &loaded).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
    }

    #[test]
    fn decode_after_round_trip_is_bitwise_for_random_params() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.model");
        let model = toy_model();
        save_model(&path, &model).unwrap();
        let loaded = load_model(&path).unwrap();
        let mut rng = rng_for_seed(11);
        for _ in 0..100 {
            let params = ShapeParams {
                latent: (0..model.space.latent_dim())
                    .map(|_| rng.gen_range(-1.0..1.0))
                    .collect(),
            };
            let a = model.space.decode(&params).unwrap();
            let b = loaded.space.decode(&params).unwrap();
            for (p, q) in a.iter().zip(b.iter()) {
                assert_eq!(p.x.to_bits(), q.x.to_bits());
                assert_eq!(p.y.to_bits(), q.y.to_bits());
                assert_eq!(p.z.to_bits(), q.z.to_bits());
            }
        }
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.model");
        save_model(&path, &toy_model()).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        // Bump the version digit inside the JSON header.
        let needle = br#""format_version":1"#;
        let pos = bytes
            .windows(needle.len())
            .position(|w| w == needle)
            .expect("header should contain the version field");
        bytes[pos + needle.len() - 1] = b'9';
        std::fs::write(&path, bytes).unwrap();
        let err = load_model(&path).unwrap_err();
        assert!(err.to_string().contains("version"), "{err}");
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.model");
        save_model(&path, &toy_model()).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 9]).unwrap();
        assert!(load_model(&path).is_err());
    }
}
