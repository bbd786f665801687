//! Textured triangle meshes from sampled density + color volumes.
//!
//! The surface is the `iso_level` crossing of the density field, with
//! `density > iso_level` taken as inside. Triangles are wound
//! counter-clockwise when seen from outside, so right-handed face normals
//! point from high density toward low density.

mod io;
mod tables;

use std::collections::HashMap;

use nalgebra::{Point3, Vector3};

use crate::error::{Error, Result};

pub use io::{read_volume, write_ply, write_volume, VolumeHeader};

/// A regular grid of density and RGB color samples.
///
/// Grids are stored x-fastest: node `(i, j, k)` lives at `i + nx * (j + ny * k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityVolume {
    dims: [usize; 3],
    origin: Point3<f64>,
    spacing: Vector3<f64>,
    density: Vec<f32>,
    color: Vec<[f32; 3]>,
}

impl DensityVolume {
    pub fn new(
        dims: [usize; 3],
        origin: Point3<f64>,
        spacing: Vector3<f64>,
        density: Vec<f32>,
        color: Vec<[f32; 3]>,
    ) -> Result<Self> {
        if dims.iter().any(|&n| n < 2) {
            return Err(Error::invalid(format!(
                "volume dims must each be at least 2, got {dims:?}"
            )));
        }
        if !(spacing.iter().all(|s| s.is_finite() && *s > 0.0)) {
            return Err(Error::invalid(format!(
                "voxel spacing must be strictly positive, got {spacing:?}"
            )));
        }
        if !origin.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("volume origin must be finite"));
        }
        let n = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::invalid("volume dims overflow"))?;
        if density.len() != n || color.len() != n {
            return Err(Error::invalid(format!(
                "expected {n} samples, got {} densities and {} colors",
                density.len(),
                color.len()
            )));
        }
        if let Some(i) = density.iter().position(|d| !d.is_finite()) {
            return Err(Error::invalid(format!("non-finite density at node {i}")));
        }
        if let Some(i) = color
            .iter()
            .position(|c| c.iter().any(|v| !(0.0..=1.0).contains(v)))
        {
            return Err(Error::invalid(format!("color outside [0, 1] at node {i}")));
        }
        Ok(Self {
            dims,
            origin,
            spacing,
            density,
            color,
        })
    }

    /// Builds a volume by evaluating `f` at every node's integer grid coordinates.
    pub fn from_fn<F>(
        dims: [usize; 3],
        origin: Point3<f64>,
        spacing: Vector3<f64>,
        mut f: F,
    ) -> Result<Self>
    where
        F: FnMut(usize, usize, usize) -> (f32, [f32; 3]),
    {
        let n = dims[0] * dims[1] * dims[2];
        let mut density = Vec::with_capacity(n);
        let mut color = Vec::with_capacity(n);
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    let (d, c) = f(i, j, k);
                    density.push(d);
                    color.push(c);
                }
            }
        }
        Self::new(dims, origin, spacing, density, color)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn origin(&self) -> Point3<f64> {
        self.origin
    }

    pub fn spacing(&self) -> Vector3<f64> {
        self.spacing
    }

    pub fn density(&self) -> &[f32] {
        &self.density
    }

    pub fn color(&self) -> &[[f32; 3]] {
        &self.color
    }

    pub fn len(&self) -> usize {
        self.density.len()
    }

    pub fn is_empty(&self) -> bool {
        self.density.is_empty()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    pub fn node_position(&self, i: usize, j: usize, k: usize) -> Point3<f64> {
        self.origin
            + Vector3::new(
                i as f64 * self.spacing.x,
                j as f64 * self.spacing.y,
                k as f64 * self.spacing.z,
            )
    }

    /// World-space center of the sampled box.
    pub fn center(&self) -> Point3<f64> {
        self.origin
            + Vector3::new(
                (self.dims[0] - 1) as f64 * self.spacing.x,
                (self.dims[1] - 1) as f64 * self.spacing.y,
                (self.dims[2] - 1) as f64 * self.spacing.z,
            ) * 0.5
    }

    /// Same grid with every density transformed by `f`; colors are kept.
    pub fn map_density<F: Fn(f32) -> f32>(&self, f: F) -> Result<Self> {
        Self::new(
            self.dims,
            self.origin,
            self.spacing,
            self.density.iter().map(|&d| f(d)).collect(),
            self.color.clone(),
        )
    }
}

/// Triangle mesh with one RGB color per vertex.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TexturedMesh {
    pub vertices: Vec<Point3<f64>>,
    pub colors: Vec<[f32; 3]>,
    pub triangles: Vec<[u32; 3]>,
}

impl TexturedMesh {
    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Checks index bounds, color count and degenerate index triples.
    pub fn validate(&self) -> Result<()> {
        if self.colors.len() != self.vertices.len() {
            return Err(Error::invalid(format!(
                "{} colors for {} vertices",
                self.colors.len(),
                self.vertices.len()
            )));
        }
        let n = self.vertices.len();
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&v| v as usize >= n) {
                return Err(Error::invalid(format!("triangle {t} indexes past {n} vertices")));
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::invalid(format!("triangle {t} repeats a vertex")));
            }
        }
        Ok(())
    }

    /// Number of distinct undirected edges.
    pub fn edge_count(&self) -> usize {
        let mut edges: Vec<(u32, u32)> = self
            .triangles
            .iter()
            .flat_map(|t| [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])])
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges.len()
    }

    /// V − E + F.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edge_count() as i64 + self.triangles.len() as i64
    }

    pub fn surface_area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i as usize]);
                (b - a).cross(&(c - a)).norm() * 0.5
            })
            .sum()
    }

    /// Signed enclosed volume; positive when faces wind outward.
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i as usize].coords);
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }

    /// Area-weighted vertex normals (unit length; zero for isolated vertices).
    pub fn vertex_normals(&self) -> Vec<Vector3<f64>> {
        let mut normals = vec![Vector3::zeros(); self.vertices.len()];
        for t in &self.triangles {
            let [a, b, c] = t.map(|i| self.vertices[i as usize]);
            // Cross product length is twice the area, which is the weighting we want.
            let n = (b - a).cross(&(c - a));
            for &i in t {
                normals[i as usize] += n;
            }
        }
        for n in &mut normals {
            let len = n.norm();
            if len > 0.0 {
                *n /= len;
            }
        }
        normals
    }
}

/// Extracts the `iso_level` surface of `volume` with the classic 256-case table.
///
/// Vertices are placed on grid edges by linear interpolation and shared between
/// neighbouring cells, so closed surfaces come out watertight. Vertex order
/// follows the crossing edges in grid order and does not depend on the case
/// table, which makes the output stable under `density, iso → -density, -iso`.
pub fn marching_cubes(volume: &DensityVolume, iso_level: f64) -> Result<TexturedMesh> {
    if !iso_level.is_finite() {
        return Err(Error::invalid("iso level must be finite"));
    }
    let [nx, ny, nz] = volume.dims;
    if nx < 2 || ny < 2 || nz < 2 {
        return Err(Error::invalid(format!("degenerate volume dims {:?}", volume.dims)));
    }
    let density = &volume.density;
    let inside = |idx: usize| density[idx] as f64 > iso_level;
    let strides = [1, nx, nx * ny];

    let mut mesh = TexturedMesh::default();
    let mut edge_vertex: HashMap<(usize, usize), u32> = HashMap::new();

    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let node = volume.index(i, j, k);
                let coords = [i, j, k];
                for axis in 0..3 {
                    if coords[axis] + 1 >= volume.dims[axis] {
                        continue;
                    }
                    let next = node + strides[axis];
                    if inside(node) == inside(next) {
                        continue;
                    }
                    let da = density[node] as f64;
                    let db = density[next] as f64;
                    let t = (iso_level - da) / (db - da);
                    let mut p = volume.node_position(i, j, k);
                    p[axis] += t * volume.spacing[axis];
                    edge_vertex.insert((node, axis), mesh.vertices.len() as u32);
                    mesh.vertices.push(p);
                }
            }
        }
    }

    for k in 0..nz - 1 {
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let mut case = 0usize;
                for (bit, c) in tables::CORNERS.iter().enumerate() {
                    if !inside(volume.index(i + c[0], j + c[1], k + c[2])) {
                        case |= 1 << bit;
                    }
                }
                if case == 0 || case == 255 {
                    continue;
                }
                let row = &tables::TRI_TABLE[case];
                for tri in row.chunks_exact(3).take_while(|t| t[0] >= 0) {
                    let mut ids = [0u32; 3];
                    for (slot, &e) in ids.iter_mut().zip(tri) {
                        let (a, b) = tables::EDGES[e as usize];
                        let ca = tables::CORNERS[a];
                        let cb = tables::CORNERS[b];
                        let axis = (0..3).find(|&d| ca[d] != cb[d]).expect("edge spans one axis");
                        let node = volume.index(i + ca[0], j + ca[1], k + ca[2]);
                        *slot = *edge_vertex
                            .get(&(node, axis))
                            .expect("table edge is a crossing edge");
                    }
                    mesh.triangles.push(ids);
                }
            }
        }
    }

    mesh.colors = vec![[0.0; 3]; mesh.vertices.len()];
    Ok(mesh)
}

/// Colors every vertex with the color of the nearest grid node.
///
/// Distance is Euclidean in world units; ties go to the lowest linear node
/// index. Vertices outside the box are clamped onto it.
pub fn assign_nearest_colors(mesh: &TexturedMesh, volume: &DensityVolume) -> TexturedMesh {
    let mut out = mesh.clone();
    out.colors = mesh
        .vertices
        .iter()
        .map(|p| volume.color[nearest_node(volume, p)])
        .collect();
    out
}

/// On a rectilinear grid the nearest node decomposes per axis.
fn nearest_node(volume: &DensityVolume, p: &Point3<f64>) -> usize {
    let mut idx = [0usize; 3];
    for axis in 0..3 {
        let g = (p[axis] - volume.origin[axis]) / volume.spacing[axis];
        // ceil(g - 0.5) rounds exact halves down, toward the lower index.
        let r = (g - 0.5).ceil();
        let max = (volume.dims[axis] - 1) as f64;
        idx[axis] = if r.is_nan() { 0.0 } else { r.clamp(0.0, max) } as usize;
    }
    volume.index(idx[0], idx[1], idx[2])
}
