//! Pinhole rasterization with per-pixel Phong shading, and the
//! camera-distance series used to build distorted / undistorted pairs.
//!
//! The camera looks down its local +z axis with x right and y down. Its focal
//! length is always `distance * focal_f0`, expressed in units of the image
//! width, so anything lying in the subject plane keeps the same projected size
//! at every distance while nearer features grow as the camera approaches.
//!
//! Image coordinates are continuous with pixel `(i, j)` covering
//! `[i, i + 1) × [j, j + 1)`; the principal point is `(size / 2, size / 2)`.

use image::{Rgb, RgbImage};
use nalgebra::{Matrix3, Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volumesh::TexturedMesh;

pub const DEFAULT_FOCAL_F0: f64 = 2.9;
pub const DEFAULT_INPUT_DISTANCES: [f64; 4] = [1.0, 1.3, 1.6, 1.9];
pub const DEFAULT_GT_DISTANCE: f64 = 10.0;
pub const DEFAULT_IMAGE_SIZE: u32 = 512;

/// Triangles with a vertex closer than this (camera z) are dropped.
const NEAR_PLANE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Camera {
    rotation: Matrix3<f64>,
    distance: f64,
    focal_f0: f64,
    image_size: u32,
    subject_center: Point3<f64>,
}

impl Camera {
    /// `rotation` maps world directions into the camera frame (rows are the
    /// camera axes expressed in world coordinates).
    pub fn new(
        rotation: Matrix3<f64>,
        distance: f64,
        focal_f0: f64,
        image_size: u32,
        subject_center: Point3<f64>,
    ) -> Result<Self> {
        let err = (rotation.transpose() * rotation - Matrix3::identity()).abs().max();
        if !(err <= 1e-9) {
            return Err(Error::invalid(format!(
                "camera rotation is not orthonormal (|RᵀR − I| = {err:e})"
            )));
        }
        if !(distance.is_finite() && distance > 0.0) {
            return Err(Error::invalid(format!("camera distance must be > 0, got {distance}")));
        }
        if !(focal_f0.is_finite() && focal_f0 > 0.0) {
            return Err(Error::invalid(format!("focal f0 must be > 0, got {focal_f0}")));
        }
        if image_size == 0 {
            return Err(Error::invalid("image size must be positive"));
        }
        if !subject_center.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("subject center must be finite"));
        }
        Ok(Self {
            rotation,
            distance,
            focal_f0,
            image_size,
            subject_center,
        })
    }

    /// Identity orientation (looking along world +z) with the default f0.
    pub fn looking_at(subject_center: Point3<f64>, distance: f64, image_size: u32) -> Result<Self> {
        Self::new(
            Matrix3::identity(),
            distance,
            DEFAULT_FOCAL_F0,
            image_size,
            subject_center,
        )
    }

    pub fn with_distance(&self, distance: f64) -> Result<Self> {
        Self::new(
            self.rotation,
            distance,
            self.focal_f0,
            self.image_size,
            self.subject_center,
        )
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn focal_f0(&self) -> f64 {
        self.focal_f0
    }

    pub fn image_size(&self) -> u32 {
        self.image_size
    }

    pub fn subject_center(&self) -> Point3<f64> {
        self.subject_center
    }

    /// Effective focal length, `distance · f0`.
    pub fn focal_length(&self) -> f64 {
        self.distance * self.focal_f0
    }

    /// Focal length in pixels.
    fn focal_px(&self) -> f64 {
        self.focal_length() * self.image_size as f64
    }

    /// World position of the optical center.
    pub fn position(&self) -> Point3<f64> {
        self.subject_center - self.rotation.transpose() * Vector3::z() * self.distance
    }

    /// World point expressed in the camera frame.
    pub fn to_camera(&self, p: &Point3<f64>) -> Vector3<f64> {
        self.rotation * (p - self.position())
    }

    fn principal_point(&self) -> f64 {
        self.image_size as f64 * 0.5
    }

    fn project_camera(&self, pc: &Vector3<f64>) -> (f64, f64) {
        let f = self.focal_px();
        let c = self.principal_point();
        (c + f * pc.x / pc.z, c + f * pc.y / pc.z)
    }
}

/// Sub-pixel projection of a world point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub x: f64,
    pub y: f64,
    /// Camera-frame z of the point.
    pub depth: f64,
    /// False for points on or behind the camera plane; `x`/`y` are NaN then.
    pub valid: bool,
}

pub fn project(camera: &Camera, point: &Point3<f64>) -> Result<Projection> {
    let pc = camera.to_camera(point);
    if pc.norm() == 0.0 {
        return Err(Error::degenerate("point coincides with the camera center"));
    }
    if pc.z <= 0.0 {
        return Ok(Projection {
            x: f64::NAN,
            y: f64::NAN,
            depth: pc.z,
            valid: false,
        });
    }
    let (x, y) = camera.project_camera(&pc);
    Ok(Projection {
        x,
        y,
        depth: pc.z,
        valid: true,
    })
}

/// Single directional light. `light_direction` points from the surface toward
/// the light and is expressed in the camera frame, so the default
/// `(0, 0, -1)` lights along the view axis from the camera.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhongLighting {
    pub light_direction: [f64; 3],
    pub ambient: f64,
    pub diffuse: f64,
    pub specular: f64,
    pub shininess: f64,
}

impl Default for PhongLighting {
    fn default() -> Self {
        Self {
            light_direction: [0.0, 0.0, -1.0],
            ambient: 0.25,
            diffuse: 0.65,
            specular: 0.1,
            shininess: 32.0,
        }
    }
}

impl PhongLighting {
    pub fn validate(&self) -> Result<()> {
        let norm = Vector3::from(self.light_direction).norm();
        if !((norm - 1.0).abs() <= 1e-9) {
            return Err(Error::invalid(format!(
                "light direction must be unit length, got norm {norm}"
            )));
        }
        for (name, k) in [
            ("ambient", self.ambient),
            ("diffuse", self.diffuse),
            ("specular", self.specular),
        ] {
            if !(0.0..=1.0).contains(&k) {
                return Err(Error::invalid(format!("{name} coefficient {k} outside [0, 1]")));
            }
        }
        if !(self.shininess >= 1.0) {
            return Err(Error::invalid(format!("shininess must be >= 1, got {}", self.shininess)));
        }
        Ok(())
    }

    /// Phong intensity for `albedo` at a surface point with unit normal `n`
    /// and unit direction to the viewer `v`, clamped to [0, 1].
    pub fn shade(&self, albedo: [f64; 3], n: &Vector3<f64>, v: &Vector3<f64>) -> [f64; 3] {
        let l = Vector3::from(self.light_direction);
        let ndotl = n.dot(&l);
        let diffuse = self.ambient + self.diffuse * ndotl.max(0.0);
        let specular = if ndotl > 0.0 && self.specular > 0.0 {
            let r = n * (2.0 * ndotl) - l;
            self.specular * r.dot(v).max(0.0).powf(self.shininess)
        } else {
            0.0
        };
        albedo.map(|a| (a * diffuse + specular).clamp(0.0, 1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RasterOptions {
    pub background: [u8; 3],
    /// Drop triangles facing away from the camera.
    pub cull_back_faces: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderedImage {
    pub rgb: RgbImage,
    /// Camera-frame z per pixel, `f32::INFINITY` where nothing was drawn.
    pub depth: Option<Vec<f32>>,
}

impl RenderedImage {
    pub fn width(&self) -> u32 {
        self.rgb.width()
    }

    pub fn height(&self) -> u32 {
        self.rgb.height()
    }
}

fn to_u8(c: f64) -> u8 {
    (c.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Z-buffered rasterization of `mesh` with perspective-correct attribute
/// interpolation and per-pixel Phong shading. Both sides of a triangle are lit
/// (the normal is flipped toward the viewer) unless back faces are culled.
pub fn rasterize_phong(
    mesh: &TexturedMesh,
    camera: &Camera,
    lighting: &PhongLighting,
    opts: &RasterOptions,
) -> Result<RenderedImage> {
    lighting.validate()?;
    mesh.validate()?;
    let normals = mesh.vertex_normals();
    Ok(rasterize_with_normals(mesh, &normals, camera, lighting, opts))
}

fn rasterize_with_normals(
    mesh: &TexturedMesh,
    normals: &[Vector3<f64>],
    camera: &Camera,
    lighting: &PhongLighting,
    opts: &RasterOptions,
) -> RenderedImage {
    let size = camera.image_size();
    let npx = size as usize * size as usize;
    let mut rgb = RgbImage::from_pixel(size, size, Rgb(opts.background));
    let mut zbuf = vec![f64::INFINITY; npx];

    let cam_pos: Vec<Vector3<f64>> = mesh.vertices.iter().map(|p| camera.to_camera(p)).collect();
    let cam_nrm: Vec<Vector3<f64>> = normals.iter().map(|n| camera.rotation() * n).collect();

    for tri in &mesh.triangles {
        let ids = tri.map(|i| i as usize);
        let p = ids.map(|i| cam_pos[i]);
        if p.iter().any(|v| v.z <= NEAR_PLANE) {
            continue;
        }
        let s = p.map(|v| camera.project_camera(&v));
        let area = edge(s[0], s[1], s[2]);
        if area == 0.0 || !area.is_finite() {
            continue;
        }
        if opts.cull_back_faces {
            // Outward-wound faces appear clockwise in y-down image space.
            let face_n = (p[1] - p[0]).cross(&(p[2] - p[0]));
            if face_n.dot(&p[0]) >= 0.0 {
                continue;
            }
        }
        let inv_z = p.map(|v| 1.0 / v.z);

        let min_x = s.iter().map(|q| q.0).fold(f64::INFINITY, f64::min);
        let max_x = s.iter().map(|q| q.0).fold(f64::NEG_INFINITY, f64::max);
        let min_y = s.iter().map(|q| q.1).fold(f64::INFINITY, f64::min);
        let max_y = s.iter().map(|q| q.1).fold(f64::NEG_INFINITY, f64::max);
        let x0 = (min_x - 0.5).ceil().max(0.0) as i64;
        let x1 = (max_x - 0.5).floor().min(size as f64 - 1.0) as i64;
        let y0 = (min_y - 0.5).ceil().max(0.0) as i64;
        let y1 = (max_y - 0.5).floor().min(size as f64 - 1.0) as i64;

        for py in y0..=y1 {
            let cy = py as f64 + 0.5;
            for px in x0..=x1 {
                let c = (px as f64 + 0.5, cy);
                let l = [
                    edge(s[1], s[2], c) / area,
                    edge(s[2], s[0], c) / area,
                    edge(s[0], s[1], c) / area,
                ];
                if l.iter().any(|&w| w < 0.0) {
                    continue;
                }
                let iz = l[0] * inv_z[0] + l[1] * inv_z[1] + l[2] * inv_z[2];
                let z = 1.0 / iz;
                let idx = py as usize * size as usize + px as usize;
                if z >= zbuf[idx] {
                    continue;
                }
                zbuf[idx] = z;

                // Perspective-correct weights.
                let b = [0, 1, 2].map(|k| l[k] * inv_z[k] * z);
                let mut albedo = [0.0; 3];
                for (k, &vi) in ids.iter().enumerate() {
                    for (ch, a) in albedo.iter_mut().enumerate() {
                        *a += b[k] * mesh.colors[vi][ch] as f64;
                    }
                }
                let pos = p[0] * b[0] + p[1] * b[1] + p[2] * b[2];
                let view = -pos.normalize();
                let mut n = cam_nrm[ids[0]] * b[0] + cam_nrm[ids[1]] * b[1] + cam_nrm[ids[2]] * b[2];
                if n.norm() == 0.0 {
                    n = (p[1] - p[0]).cross(&(p[2] - p[0]));
                }
                n = n.normalize();
                if n.dot(&view) < 0.0 {
                    n = -n;
                }
                let c = lighting.shade(albedo, &n, &view);
                rgb.put_pixel(px as u32, py as u32, Rgb(c.map(to_u8)));
            }
        }
    }

    RenderedImage {
        rgb,
        depth: Some(zbuf.into_iter().map(|z| z as f32).collect()),
    }
}

#[inline]
fn edge(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

/// Camera distances for one series: the distorted inputs and the shared target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceSeriesConfig {
    pub input_distances: Vec<f64>,
    pub gt_distance: f64,
}

impl Default for DistanceSeriesConfig {
    fn default() -> Self {
        Self {
            input_distances: DEFAULT_INPUT_DISTANCES.to_vec(),
            gt_distance: DEFAULT_GT_DISTANCE,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SeriesFrame {
    pub distance: f64,
    pub camera: Camera,
    pub image: RenderedImage,
}

#[derive(Debug, Clone)]
pub struct DistanceSeries {
    pub inputs: Vec<SeriesFrame>,
    pub ground_truth: SeriesFrame,
}

/// Renders `mesh` once per input distance and once at the ground-truth
/// distance. Orientation, f0 and subject center come from `base_camera`;
/// only the distance (and with it the focal length) changes.
pub fn render_distance_series(
    mesh: &TexturedMesh,
    base_camera: &Camera,
    lighting: &PhongLighting,
    opts: &RasterOptions,
    series: &DistanceSeriesConfig,
) -> Result<DistanceSeries> {
    if series.input_distances.is_empty() {
        return Err(Error::invalid("distance series needs at least one input distance"));
    }
    lighting.validate()?;
    mesh.validate()?;
    let normals = mesh.vertex_normals();
    let render = |d: f64| -> Result<SeriesFrame> {
        let camera = base_camera.with_distance(d)?;
        let image = rasterize_with_normals(mesh, &normals, &camera, lighting, opts);
        Ok(SeriesFrame {
            distance: d,
            camera,
            image,
        })
    };
    let inputs = series
        .input_distances
        .iter()
        .map(|&d| render(d))
        .collect::<Result<Vec<_>>>()?;
    let ground_truth = render(series.gt_distance)?;
    Ok(DistanceSeries {
        inputs,
        ground_truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad(center_z: f64, half: f64, color: [f32; 3]) -> TexturedMesh {
        TexturedMesh {
            vertices: vec![
                Point3::new(-half, -half, center_z),
                Point3::new(half, -half, center_z),
                Point3::new(half, half, center_z),
                Point3::new(-half, half, center_z),
            ],
            colors: vec![color; 4],
            triangles: vec![[0, 1, 2], [0, 2, 3]],
        }
    }

    fn flat() -> PhongLighting {
        PhongLighting {
            ambient: 1.0,
            diffuse: 0.0,
            specular: 0.0,
            ..Default::default()
        }
    }

    #[test]
    fn focal_length_tracks_distance() {
        let cam = Camera::looking_at(Point3::origin(), 1.6, 512).unwrap();
        assert_eq!(cam.focal_length(), 1.6 * 2.9);
        assert_eq!(cam.with_distance(10.0).unwrap().focal_length(), 10.0 * 2.9);
    }

    #[test]
    fn invalid_cameras_are_rejected() {
        let r = Matrix3::new(1.0, 0.1, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        assert!(Camera::new(r, 1.0, 2.9, 64, Point3::origin()).is_err());
        assert!(Camera::looking_at(Point3::origin(), 0.0, 64).is_err());
        assert!(Camera::looking_at(Point3::origin(), -1.0, 64).is_err());
        assert!(Camera::looking_at(Point3::origin(), 1.0, 0).is_err());
    }

    #[test]
    fn subject_center_projects_to_image_center() {
        let center = Point3::new(0.3, -0.2, 5.0);
        for d in [1.0, 1.3, 1.6, 1.9, 10.0] {
            let cam = Camera::looking_at(center, d, 512).unwrap();
            let p = project(&cam, &center).unwrap();
            assert!(p.valid);
            assert_eq!((p.x, p.y), (256.0, 256.0));
        }
    }

    #[test]
    fn subject_plane_offset_is_independent_of_distance() {
        let u = 0.05;
        let expected = 256.0 + u * 2.9 * 512.0;
        for d in [1.0, 1.3, 1.6, 1.9, 10.0] {
            let cam = Camera::looking_at(Point3::origin(), d, 512).unwrap();
            let p = project(&cam, &Point3::new(u, 0.0, 0.0)).unwrap();
            assert!((p.x - expected).abs() < 1e-9, "d = {d}: {}", p.x);
            assert!((p.y - 256.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rotated_camera_keeps_subject_plane_law() {
        let r = *nalgebra::Rotation3::from_euler_angles(0.2, -0.4, 0.1).matrix();
        let center = Point3::new(1.0, 2.0, 3.0);
        // A point in the subject plane, offset along the camera's x axis.
        let offset = r.transpose() * Vector3::new(0.04, 0.0, 0.0);
        for d in [1.0, 1.9, 10.0] {
            let cam = Camera::new(r, d, 2.9, 512, center).unwrap();
            let p = project(&cam, &(center + offset)).unwrap();
            assert!((p.x - (256.0 + 0.04 * 2.9 * 512.0)).abs() < 1e-8);
            assert!((p.y - 256.0).abs() < 1e-8);
        }
    }

    #[test]
    fn points_behind_camera_are_invalid() {
        let cam = Camera::looking_at(Point3::origin(), 1.0, 64).unwrap();
        let p = project(&cam, &Point3::new(0.0, 0.0, -2.0)).unwrap();
        assert!(!p.valid);
        assert!(p.x.is_nan());
    }

    #[test]
    fn camera_center_is_degenerate() {
        let cam = Camera::looking_at(Point3::origin(), 1.0, 64).unwrap();
        let r = project(&cam, &cam.position());
        assert!(matches!(r, Err(Error::Degenerate(_))));
    }

    #[test]
    fn nearer_points_shrink_as_distance_grows() {
        let p = Point3::new(0.05, 0.0, -0.1);
        let mut last = f64::INFINITY;
        for d in [1.0, 1.3, 1.6, 1.9, 10.0] {
            let cam = Camera::looking_at(Point3::origin(), d, 512).unwrap();
            let off = project(&cam, &p).unwrap().x - 256.0;
            assert!(off < last);
            last = off;
        }
    }

    #[test]
    fn ambient_only_gives_flat_albedo() {
        let mesh = quad(0.0, 0.02, [0.2, 0.4, 0.6]);
        let cam = Camera::looking_at(Point3::origin(), 1.0, 64).unwrap();
        let img = rasterize_phong(&mesh, &cam, &flat(), &RasterOptions::default()).unwrap();
        let covered: Vec<_> = img.rgb.pixels().filter(|p| p.0 != [0, 0, 0]).collect();
        assert!(!covered.is_empty());
        assert!(covered.iter().all(|p| p.0 == [51, 102, 153]));
    }

    #[test]
    fn diffuse_normal_parallel_to_light() {
        let lighting = PhongLighting {
            ambient: 0.1,
            diffuse: 0.6,
            specular: 0.0,
            ..Default::default()
        };
        let albedo = [1.0, 0.5, 0.25];
        let out = lighting.shade(albedo, &Vector3::new(0.0, 0.0, -1.0), &Vector3::new(0.0, 0.0, -1.0));
        for (o, a) in out.iter().zip(albedo) {
            assert!((o - 0.7 * a).abs() < 1e-12);
        }
        // And through the rasterizer.
        let mesh = quad(0.0, 0.02, [1.0, 1.0, 1.0]);
        let cam = Camera::looking_at(Point3::origin(), 1.0, 32).unwrap();
        let img = rasterize_phong(&mesh, &cam, &lighting, &RasterOptions::default()).unwrap();
        assert_eq!(img.rgb.get_pixel(16, 16).0, [179, 179, 179]); // round(0.7 · 255)
    }

    #[test]
    fn specular_peaks_on_mirror_direction() {
        let lighting = PhongLighting {
            ambient: 0.0,
            diffuse: 0.0,
            specular: 0.5,
            shininess: 10.0,
            ..Default::default()
        };
        let n = Vector3::new(0.0, 0.0, -1.0);
        let on = lighting.shade([0.0; 3], &n, &Vector3::new(0.0, 0.0, -1.0));
        assert!((on[0] - 0.5).abs() < 1e-12);
        let off = lighting.shade([0.0; 3], &n, &Vector3::new(0.6, 0.0, -0.8));
        assert!((off[0] - 0.5 * 0.8f64.powf(10.0)).abs() < 1e-12);
    }

    #[test]
    fn lighting_validation() {
        let mut l = PhongLighting::default();
        assert!(l.validate().is_ok());
        l.light_direction = [0.0, 0.0, -2.0];
        assert!(l.validate().is_err());
        l = PhongLighting {
            shininess: 0.5,
            ..Default::default()
        };
        assert!(l.validate().is_err());
        l = PhongLighting {
            ambient: 1.5,
            ..Default::default()
        };
        assert!(l.validate().is_err());
    }

    #[test]
    fn mesh_behind_camera_renders_background_only() {
        let mesh = quad(-3.0, 0.5, [1.0, 1.0, 1.0]);
        let cam = Camera::looking_at(Point3::origin(), 1.0, 32).unwrap();
        let opts = RasterOptions {
            background: [7, 8, 9],
            ..Default::default()
        };
        let img = rasterize_phong(&mesh, &cam, &flat(), &opts).unwrap();
        assert!(img.rgb.pixels().all(|p| p.0 == [7, 8, 9]));
        assert!(img.depth.unwrap().iter().all(|z| z.is_infinite()));
    }

    #[test]
    fn back_face_culling_is_optional() {
        // Wound so its right-hand normal points away from the camera.
        let mut mesh = quad(0.0, 0.02, [1.0, 1.0, 1.0]);
        for t in &mut mesh.triangles {
            t.swap(1, 2);
        }
        let cam = Camera::looking_at(Point3::origin(), 1.0, 32).unwrap();
        let shown = rasterize_phong(&mesh, &cam, &flat(), &RasterOptions::default()).unwrap();
        assert_eq!(shown.rgb.get_pixel(16, 16).0, [255; 3]);
        let culled = rasterize_phong(
            &mesh,
            &cam,
            &flat(),
            &RasterOptions {
                cull_back_faces: true,
                ..Default::default()
            },
        )
        .unwrap();
        // The quad's original winding faces the camera: that one survives culling.
        let front = rasterize_phong(
            &quad(0.0, 0.02, [1.0, 1.0, 1.0]),
            &cam,
            &flat(),
            &RasterOptions {
                cull_back_faces: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert_ne!(
            culled.rgb.get_pixel(16, 16) == &Rgb([255; 3]),
            front.rgb.get_pixel(16, 16) == &Rgb([255; 3])
        );
    }

    #[test]
    fn series_defaults_match_constants() {
        let cfg = DistanceSeriesConfig::default();
        assert_eq!(cfg.input_distances, vec![1.0, 1.3, 1.6, 1.9]);
        assert_eq!(cfg.gt_distance, 10.0);
        let cam = Camera::looking_at(Point3::origin(), 1.0, 16).unwrap();
        assert_eq!(cam.focal_f0(), 2.9);
    }

    #[test]
    fn empty_distance_list_is_rejected() {
        let cam = Camera::looking_at(Point3::origin(), 1.0, 16).unwrap();
        let cfg = DistanceSeriesConfig {
            input_distances: vec![],
            gt_distance: 10.0,
        };
        let r = render_distance_series(&quad(0.0, 0.1, [1.0; 3]), &cam, &flat(), &RasterOptions::default(), &cfg);
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn rendering_is_deterministic() {
        let mesh = quad(0.01, 0.05, [0.9, 0.3, 0.1]);
        let cam = Camera::looking_at(Point3::origin(), 1.3, 64).unwrap();
        let l = PhongLighting::default();
        let a = rasterize_phong(&mesh, &cam, &l, &RasterOptions::default()).unwrap();
        let b = rasterize_phong(&mesh, &cam, &l, &RasterOptions::default()).unwrap();
        assert_eq!(a, b);
    }
}
