//! Volume files (raw f32 + JSON header) and ASCII PLY output.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use super::{DensityVolume, TexturedMesh};
use crate::error::{Error, Result};

/// JSON sidecar describing a raw volume. Unknown fields are ignored so the
/// same file can carry pipeline-specific extras.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeHeader {
    pub dims: [usize; 3],
    pub origin: [f64; 3],
    pub spacing: [f64; 3],
}

fn raw_path(header: &Path) -> PathBuf {
    header.with_extension("raw")
}

/// Reads `<stem>.json` and its `<stem>.raw` payload: `n` little-endian f32
/// densities followed by `n` RGB triples, both x-fastest.
pub fn read_volume(header_path: &Path) -> Result<DensityVolume> {
    let text = fs::read_to_string(header_path).map_err(|e| Error::io(header_path, e))?;
    let header: VolumeHeader =
        serde_json::from_str(&text).map_err(|e| Error::json(header_path, e))?;
    let raw = raw_path(header_path);
    let bytes = fs::read(&raw).map_err(|e| Error::io(&raw, e))?;

    let n = header
        .dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::invalid("volume dims overflow"))?;
    let expected = n * 4 * 4;
    if bytes.len() != expected {
        return Err(Error::invalid(format!(
            "{}: expected {expected} bytes for dims {:?}, found {}",
            raw.display(),
            header.dims,
            bytes.len()
        )));
    }
    let floats: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    let (density, color) = floats.split_at(n);
    let color = color.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();

    DensityVolume::new(
        header.dims,
        Point3::from(header.origin),
        Vector3::from(header.spacing),
        density.to_vec(),
        color,
    )
}

/// Writes `volume` as `<stem>.json` + `<stem>.raw`.
pub fn write_volume(volume: &DensityVolume, header_path: &Path) -> Result<()> {
    let header = VolumeHeader {
        dims: volume.dims(),
        origin: volume.origin().coords.into(),
        spacing: volume.spacing().into(),
    };
    let json = serde_json::to_string_pretty(&header).map_err(|e| Error::json(header_path, e))?;
    fs::write(header_path, json).map_err(|e| Error::io(header_path, e))?;

    let mut bytes = Vec::with_capacity(volume.len() * 16);
    for d in volume.density() {
        bytes.extend_from_slice(&d.to_le_bytes());
    }
    for c in volume.color() {
        for v in c {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    let raw = raw_path(header_path);
    fs::write(&raw, bytes).map_err(|e| Error::io(&raw, e))
}

fn to_u8(c: f32) -> u8 {
    (c.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// ASCII PLY with float positions and uchar per-vertex RGB.
pub fn write_ply<W: Write>(mesh: &TexturedMesh, mut w: W) -> std::io::Result<()> {
    writeln!(w, "ply")?;
    writeln!(w, "format ascii 1.0")?;
    writeln!(w, "element vertex {}", mesh.vertices.len())?;
    for axis in ["x", "y", "z"] {
        writeln!(w, "property float {axis}")?;
    }
    for channel in ["red", "green", "blue"] {
        writeln!(w, "property uchar {channel}")?;
    }
    writeln!(w, "element face {}", mesh.triangles.len())?;
    writeln!(w, "property list uchar int vertex_indices")?;
    writeln!(w, "end_header")?;
    for (p, c) in mesh.vertices.iter().zip(&mesh.colors) {
        writeln!(
            w,
            "{} {} {} {} {} {}",
            p.x as f32,
            p.y as f32,
            p.z as f32,
            to_u8(c[0]),
            to_u8(c[1]),
            to_u8(c[2])
        )?;
    }
    for t in &mesh.triangles {
        writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volume_round_trips_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let v = DensityVolume::from_fn(
            [3, 4, 2],
            Point3::new(0.5, -1.0, 2.0),
            Vector3::new(0.1, 0.2, 0.3),
            |i, j, k| ((i * 100 + j * 10 + k) as f32 * 0.5, [i as f32 / 2.0, j as f32 / 3.0, 0.25]),
        )
        .unwrap();
        let path = dir.path().join("head.json");
        write_volume(&v, &path).unwrap();
        assert!(dir.path().join("head.raw").exists());
        assert_eq!(read_volume(&path).unwrap(), v);
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.json");
        fs::write(&path, r#"{"dims":[2,2,2],"origin":[0,0,0],"spacing":[1,1,1],"extra":1}"#).unwrap();
        fs::write(dir.path().join("v.raw"), vec![0u8; 100]).unwrap();
        assert!(matches!(read_volume(&path), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn ply_header_and_body() {
        let mesh = TexturedMesh {
            vertices: vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.5, 0.0),
            ],
            colors: vec![[1.0, 0.0, 0.5], [0.0, 1.0, 0.0], [0.2, 0.2, 2.0]],
            triangles: vec![[0, 1, 2]],
        };
        let mut buf = Vec::new();
        write_ply(&mesh, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "ply");
        assert!(lines.contains(&"element vertex 3"));
        assert!(lines.contains(&"element face 1"));
        let body = &lines[lines.iter().position(|l| *l == "end_header").unwrap() + 1..];
        assert_eq!(body, ["0 0 0 255 0 128", "1 0 0 0 255 0", "0 1.5 0 51 51 255", "3 0 1 2"]);
    }
}
