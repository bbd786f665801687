//! Fixture builders shared by the CLI test targets.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use image::{Rgb, RgbImage};
use nalgebra::{Point3, Vector3};
use serde_json::json;
use sha2::{Digest, Sha256};

use selfiegen::segmap::{LabelGroup, SemanticMap, Taxonomy, TaxonomyEntry};
use selfiegen::volumesh::{write_volume, DensityVolume};
use selfiegen::warp::{Keypoint, KeypointSet};

pub fn selfiegen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_selfiegen"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

pub fn selfiegen_in(out: &Path, args: &[&str]) -> Output {
    let mut all: Vec<&str> = args.to_vec();
    let out = out.to_str().unwrap();
    all.extend(["--out", out]);
    selfiegen(&all)
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// SHA-256 over every file under `dir`: relative path and contents, sorted.
pub fn tree_hash(dir: &Path) -> String {
    fn walk(dir: &Path, out: &mut Vec<PathBuf>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                walk(&path, out);
            } else {
                out.push(path);
            }
        }
    }
    let mut files = Vec::new();
    walk(dir, &mut files);
    files.sort();
    let mut h = Sha256::new();
    for f in files {
        h.update(f.strip_prefix(dir).unwrap().to_string_lossy().as_bytes());
        h.update([0]);
        h.update(std::fs::read(&f).unwrap());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn file_names(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    v.sort();
    v
}

pub fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Procedural head: an ellipsoid with a nose bump, tinted per `variant`.
pub fn head_volume(variant: usize) -> DensityVolume {
    let n = 28;
    let h = 1.0 / 100.0;
    let o = -(n as f64 - 1.0) * h / 2.0;
    let tint = [0.9 - 0.1 * variant as f32, 0.65, 0.5 + 0.1 * variant as f32];
    DensityVolume::from_fn([n, n, n], Point3::new(o, o, o), Vector3::new(h, h, h), |i, j, k| {
        let q = Vector3::new(o + i as f64 * h, o + j as f64 * h, o + k as f64 * h);
        let e = Vector3::new(q.x / 0.09, q.y / 0.11, q.z / 0.1);
        let nose = Vector3::new(q.x, q.y, q.z + 0.1);
        let d = (1.0 - e.norm()).max(0.02 - nose.norm()) as f32;
        let eye = (q.y + 0.02).abs() < 0.015 && (q.x.abs() - 0.035).abs() < 0.015;
        let c = if eye && q.z < 0.0 { [0.1, 0.1, 0.2] } else { tint };
        (d, c)
    })
    .unwrap()
}

/// Writes `n` head volumes. Even-numbered ones carry face landmarks.
pub fn write_volumes(dir: &Path, n: usize) {
    std::fs::create_dir_all(dir).unwrap();
    for i in 0..n {
        let header = dir.join(format!("head{i:02}.json"));
        write_volume(&head_volume(i), &header).unwrap();
        if i % 2 == 0 {
            let mut v = read_json(&header);
            v["landmarks"] = json!({
                "eye_left": [-0.035, -0.02, -0.085],
                "eye_right": [0.035, -0.02, -0.085],
                "mouth": [0.0, 0.05, -0.085],
            });
            std::fs::write(&header, serde_json::to_string_pretty(&v).unwrap()).unwrap();
        }
    }
}

pub fn taxonomy() -> Taxonomy {
    let e = |id, name: &str, group| TaxonomyEntry {
        id,
        name: name.into(),
        group,
    };
    Taxonomy::new([
        e(0, "background", LabelGroup::Other),
        e(1, "shirt", LabelGroup::Upper),
        e(2, "jacket", LabelGroup::Upper),
        e(3, "pants", LabelGroup::Lower),
        e(4, "skirt", LabelGroup::Lower),
        e(5, "shoes", LabelGroup::Shoes),
        e(6, "face", LabelGroup::Face),
        e(7, "arms", LabelGroup::Body),
        e(8, "hair", LabelGroup::Body),
        e(9, "boots", LabelGroup::Shoes),
        e(10, "bag", LabelGroup::Other),
    ])
    .unwrap()
}

/// Standing figure on a 128×192 canvas with the given clothing labels.
pub fn person_map(upper: u8, lower: u8, shoes: u8) -> SemanticMap {
    SemanticMap::from_fn(128, 192, taxonomy(), |x, y| {
        let (x, y) = (x as i64, y as i64);
        if (x - 64).pow(2) + (y - 24).pow(2) <= 12 * 12 {
            if y < 18 { 8 } else { 6 }
        } else if (44..84).contains(&x) && (38..96).contains(&y) {
            upper
        } else if ((34..44).contains(&x) || (84..94).contains(&x)) && (40..90).contains(&y) {
            7
        } else if (46..82).contains(&x) && (96..170).contains(&y) && !(62..66).contains(&x) {
            lower
        } else if ((40..62).contains(&x) || (66..88).contains(&x)) && (170..180).contains(&y) {
            shoes
        } else {
            0
        }
    })
    .unwrap()
}

/// Selfie-side maps: mostly the given label with a few stray pixels of another.
pub fn write_selfie_maps(dir: &Path, upper: u8, lower: u8, shoes: u8) {
    std::fs::create_dir_all(dir).unwrap();
    for (name, main, stray) in [("upper", upper, 2u8), ("lower", lower, 4), ("shoes", shoes, 9)] {
        let m = SemanticMap::from_fn(64, 64, taxonomy(), |x, y| {
            if x < 4 && y < 5 {
                stray
            } else if (8..56).contains(&x) && (8..56).contains(&y) {
                main
            } else {
                0
            }
        })
        .unwrap();
        m.write(&dir.join(format!("{name}.png"))).unwrap();
    }
}

pub fn write_collection(dir: &Path) {
    std::fs::create_dir_all(dir).unwrap();
    let specs = [(2, 4, 9), (1, 3, 5), (1, 4, 9), (2, 3, 5), (1, 3, 9), (2, 4, 5)];
    for (i, (u, l, s)) in specs.into_iter().enumerate() {
        person_map(u, l, s).write(&dir.join(format!("ref{i:02}.png"))).unwrap();
    }
}

fn textured(w: u32, h: u32, seed: u32) -> RgbImage {
    RgbImage::from_fn(w, h, |x, y| {
        let v = (x * 7 + y * 13 + seed * 31) % 200;
        Rgb([30 + v as u8, 40 + ((x + seed) % 180) as u8, 50 + ((y * 3) % 170) as u8])
    })
}

/// Selfies for every part, never black so padded boxes are measurable.
pub fn write_selfies(dir: &Path) {
    std::fs::create_dir_all(dir).unwrap();
    for (i, (name, w, h)) in [("face", 90, 100), ("upper", 80, 96), ("lower", 60, 110), ("shoes", 120, 70)]
        .into_iter()
        .enumerate()
    {
        textured(w, h, i as u32).save(dir.join(format!("{name}.png"))).unwrap();
    }
}

/// Twenty candidates; half describe their part boxes, half point at a label map.
pub fn write_pool(dir: &Path) {
    std::fs::create_dir_all(dir).unwrap();
    for i in 0..20 {
        let id = format!("cand{i:02}");
        let map = person_map(1 + (i % 2) as u8, 3 + (i % 2) as u8, 5);
        let bg = RgbImage::from_fn(128, 192, |x, y| {
            let l = map.label(x, y);
            Rgb([l * 20 + i as u8, 100, (x + y) as u8])
        });
        bg.save(dir.join(format!("{id}.png"))).unwrap();
        let desc = if i % 2 == 0 {
            json!({
                "image": format!("{id}.png"),
                "part_bboxes": {
                    "face": {"x0": 52, "y0": 18, "x1": 77, "y1": 37},
                    "upper": {"x0": 44, "y0": 38, "x1": 84, "y1": 96},
                    "lower": {"x0": 46, "y0": 96, "x1": 82, "y1": 170},
                    "shoes": {"x0": 40, "y0": 170, "x1": 88, "y1": 180},
                }
            })
        } else {
            let seg = format!("{id}_seg.png");
            std::fs::create_dir_all(dir.join("maps")).unwrap();
            map.write(&dir.join("maps").join(&seg)).unwrap();
            json!({"image": format!("{id}.png"), "semantic_map": format!("maps/{seg}")})
        };
        std::fs::write(dir.join(format!("{id}.json")), serde_json::to_string_pretty(&desc).unwrap()).unwrap();
    }
}

fn kp(name: &str, x: f64, y: f64, confidence: f64) -> Keypoint {
    Keypoint {
        name: name.into(),
        x,
        y,
        confidence,
    }
}

pub const BODY_POINTS: [(&str, f64, f64); 24] = [
    ("Nose", 128.0, 40.0),
    ("Neck", 128.0, 70.0),
    ("RShoulder", 100.0, 74.0),
    ("LShoulder", 156.0, 75.0),
    ("RElbow", 88.0, 120.0),
    ("LElbow", 168.0, 118.0),
    ("RWrist", 84.0, 160.0),
    ("LWrist", 172.0, 158.0),
    ("MidHip", 128.0, 172.0),
    ("RHip", 110.0, 170.0),
    ("LHip", 146.0, 171.0),
    ("RKnee", 108.0, 240.0),
    ("LKnee", 149.0, 238.0),
    ("RAnkle", 106.0, 310.0),
    ("LAnkle", 151.0, 309.0),
    ("REye", 120.0, 34.0),
    ("LEye", 136.0, 34.0),
    ("REar", 112.0, 36.0),
    ("LEar", 144.0, 36.0),
    ("LBigToe", 160.0, 330.0),
    ("LSmallToe", 166.0, 326.0),
    ("LHeel", 148.0, 318.0),
    ("RBigToe", 96.0, 331.0),
    ("RSmallToe", 90.0, 327.0),
];

fn body_set(conf: impl Fn(&str) -> f64) -> KeypointSet {
    let mut pts: Vec<Keypoint> = BODY_POINTS.iter().map(|&(n, x, y)| kp(n, x, y, conf(n))).collect();
    pts.push(kp("RHeel", 104.0, 319.0, conf("RHeel")));
    pts.push(kp("Mouth", 128.0, 50.0, conf("Mouth")));
    KeypointSet::new([256, 384], pts).unwrap()
}

/// Typical positions: the detected joints pushed through a fixed similarity
/// into a 512² canvas centered on the part.
fn typical_for(part: &str, body: &KeypointSet) -> KeypointSet {
    let (cx, cy, s) = match part {
        "upper" => (128.0, 120.0, 2.4),
        "lower" => (128.0, 240.0, 2.2),
        _ => (128.0, 320.0, 5.0),
    };
    let pts = body
        .iter()
        .map(|k| kp(&k.name, 256.0 + s * (k.x - cx), 256.0 + s * (k.y - cy), 0.9))
        .collect();
    KeypointSet::new([512, 512], pts).unwrap()
}

/// Full-body photos with keypoints plus typical sets. `photo01` has
/// unreliable foot joints, so its shoe selfie is skipped.
pub fn write_selfie_inputs(images: &Path, typical: &Path) {
    std::fs::create_dir_all(images).unwrap();
    std::fs::create_dir_all(typical).unwrap();
    let good = body_set(|_| 0.9);
    for (i, conf_feet) in [0.9, 0.1].into_iter().enumerate() {
        let id = format!("photo{i:02}");
        textured(256, 384, 7 + i as u32).save(images.join(format!("{id}.png"))).unwrap();
        let feet = ["LBigToe", "LSmallToe", "LHeel", "RBigToe", "RSmallToe", "RHeel"];
        let set = body_set(|n| if feet.contains(&n) { conf_feet } else { 0.9 });
        set.write_json(&images.join(format!("{id}.json"))).unwrap();
    }
    typical_for("upper", &good).write_json(&typical.join("upper.json")).unwrap();
    typical_for("shoes", &good).write_json(&typical.join("shoes.json")).unwrap();
    // Lower-body typical positions as a directory of examples to average.
    let lower = typical_for("lower", &good);
    let dir = typical.join("lower");
    std::fs::create_dir_all(&dir).unwrap();
    for (j, dx) in [-3.0, 0.0, 3.0].into_iter().enumerate() {
        let pts = lower.iter().map(|k| kp(&k.name, k.x + dx, k.y, k.confidence)).collect();
        KeypointSet::new([512, 512], pts).unwrap().write_json(&dir.join(format!("ex{j}.json"))).unwrap();
    }
}
