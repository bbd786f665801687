//! Volume file to mesh to PLY and rendered distance series.

use std::f64::consts::PI;

use nalgebra::{Point3, Vector3};
use selfiegen::renderer::{
    project, render_distance_series, Camera, DistanceSeriesConfig, PhongLighting, RasterOptions,
};
use selfiegen::volumesh::{
    assign_nearest_colors, marching_cubes, read_volume, write_ply, write_volume, DensityVolume,
};

fn head_volume() -> DensityVolume {
    let n = 40;
    let h = 1.0 / 128.0;
    let o = -(n as f64 - 1.0) * h / 2.0;
    DensityVolume::from_fn([n, n, n], Point3::new(o, o, o), Vector3::new(h, h, h), |i, j, k| {
        let p = Vector3::new(o + i as f64 * h, o + j as f64 * h, o + k as f64 * h);
        let d = 0.1 - p.norm();
        let c = if p.x < 0.0 { [0.9, 0.6, 0.5] } else { [0.3, 0.4, 0.9] };
        (d as f32, c)
    })
    .unwrap()
}

#[test]
fn volume_to_series() {
    let dir = tempfile::tempdir().unwrap();
    let header = dir.path().join("head.json");
    let vol = head_volume();
    write_volume(&vol, &header).unwrap();
    let back = read_volume(&header).unwrap();
    assert_eq!(back.len(), vol.len());

    let mesh = assign_nearest_colors(&marching_cubes(&back, 0.0).unwrap(), &back);
    assert_eq!(mesh.euler_characteristic(), 2);
    let r = 0.1;
    assert!((mesh.surface_area() - 4.0 * PI * r * r).abs() / (4.0 * PI * r * r) < 0.02);

    let mut ply = Vec::new();
    write_ply(&mesh, &mut ply).unwrap();
    let text = String::from_utf8(ply).unwrap();
    assert!(text.contains(&format!("element vertex {}", mesh.vertices.len())));
    assert!(text.contains(&format!("element face {}", mesh.triangles.len())));

    let base = Camera::looking_at(back.center(), 1.0, 128).unwrap();
    let series = render_distance_series(
        &mesh,
        &base,
        &PhongLighting::default(),
        &RasterOptions::default(),
        &DistanceSeriesConfig::default(),
    )
    .unwrap();
    assert_eq!(series.inputs.len(), 4);
    assert_eq!(series.ground_truth.distance, 10.0);

    // The silhouette of a sphere widens slightly with distance under f = d·f0
    // (less of it is hidden), but the subject-plane scale is fixed.
    let widths: Vec<u32> = series
        .inputs
        .iter()
        .chain([&series.ground_truth])
        .map(|f| {
            let row = 64;
            (0..128)
                .filter(|&x| f.image.rgb.get_pixel(x, row).0 != [0, 0, 0])
                .count() as u32
        })
        .collect();
    assert!(widths.windows(2).all(|w| w[0] <= w[1] + 1), "{widths:?}");
    for f in series.inputs.iter().chain([&series.ground_truth]) {
        let edge = project(&f.camera, &(back.center() + Vector3::new(r, 0.0, 0.0))).unwrap();
        assert!((edge.x - 64.0 - r * 2.9 * 128.0).abs() < 1e-9);
    }
}
