mod common;

use std::collections::BTreeSet;
use std::path::Path;

use common::*;
use image::GrayImage;
use selfiegen::segmap::{
    dilate, person_bbox, rank_collection, scale_bbox_to_mask, Mask, SelfieLabelSets, SemanticMap,
};

fn code(o: &std::process::Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &std::process::Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Every file in `out` except the manifest is listed in it, and every listed file exists.
fn assert_manifest_complete(out: &Path, listed: &[String]) {
    let on_disk: BTreeSet<String> = file_names(out).into_iter().filter(|f| f != "manifest.json").collect();
    let listed: BTreeSet<String> = listed.iter().cloned().collect();
    assert_eq!(on_disk, listed);
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    assert_eq!(code(&selfiegen(&["no-such-command"])), 1);
    assert_eq!(code(&selfiegen(&["augment", "--mode", "sideways"])), 1);
    assert_eq!(code(&selfiegen(&["--help"])), 0);
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"thresholds": {"blend_s": 3}}"#).unwrap();
    let o = selfiegen_in(&dir.path().join("o"), &["canny-target", "--config", p(&cfg), "--map", p(&cfg)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("blend_s"));
}

#[test]
fn gen_pairs_writes_four_inputs_and_one_target_per_volume() {
    let dir = tempfile::tempdir().unwrap();
    let vols = dir.path().join("vols");
    write_volumes(&vols, 2);
    let out = dir.path().join("out");
    let o = selfiegen_in(&out, &["gen-pairs", "--volumes", p(&vols), "--iso", "0", "--resolution", "96"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m = read_json(&out.join("manifest.json"));
    assert_eq!(m["counts"]["inputs"], 8);
    assert_eq!(m["counts"]["ground_truths"], 2);
    let mut listed = Vec::new();
    for e in m["entries"].as_array().unwrap() {
        listed.push(e["mesh"].as_str().unwrap().to_string());
        listed.push(e["ground_truth"]["file"].as_str().unwrap().to_string());
        for f in e["inputs"].as_array().unwrap() {
            listed.push(f["file"].as_str().unwrap().to_string());
        }
    }
    assert_manifest_complete(&out, &listed);
    assert_eq!(m["entries"][0]["aligned"], true);
    assert_eq!(m["entries"][1]["aligned"], false);
    // Aligned frames use the alignment size, plain renders the render size.
    let aligned = image::open(out.join("head00_d1.png")).unwrap();
    assert_eq!((aligned.width(), aligned.height()), (512, 512));
    let plain = image::open(out.join("head01_gt.png")).unwrap();
    assert_eq!((plain.width(), plain.height()), (96, 96));
    assert!(std::fs::read_to_string(out.join("head01.ply")).unwrap().starts_with("ply\n"));
}

#[test]
fn gen_pairs_failures() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty");
    std::fs::create_dir_all(&empty).unwrap();
    let o = selfiegen_in(&dir.path().join("o1"), &["gen-pairs", "--volumes", p(&empty), "--iso", "0"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("no volume headers"));

    let vols = dir.path().join("vols");
    write_volumes(&vols, 2);
    let o = selfiegen_in(&dir.path().join("o2"), &["gen-pairs", "--volumes", p(&vols)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("--iso"));

    // A truncated payload is skipped; the other volume still renders.
    std::fs::write(vols.join("head01.raw"), [0u8; 10]).unwrap();
    let out = dir.path().join("o3");
    let o = selfiegen_in(&out, &["gen-pairs", "--volumes", p(&vols), "--iso", "0", "--resolution", "64"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    let m = read_json(&out.join("manifest.json"));
    assert_eq!(m["counts"]["meshes"], 1);
    assert_eq!(m["skipped"][0]["item"], "head01");
    assert!(!out.join("head01.ply").exists());
}

#[test]
fn simulate_selfies_crops_and_skips() {
    let dir = tempfile::tempdir().unwrap();
    let (images, typical) = (dir.path().join("images"), dir.path().join("typical"));
    write_selfie_inputs(&images, &typical);
    let out = dir.path().join("out");
    let o = selfiegen_in(&out, &["simulate-selfies", "--images", p(&images), "--typical", p(&typical)]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    let m = read_json(&out.join("manifest.json"));
    let files0 = m["entries"][0]["files"].as_object().unwrap();
    assert_eq!(files0.len(), 4);
    let files1 = m["entries"][1]["files"].as_object().unwrap();
    assert_eq!(files1.len(), 3);
    assert!(!files1.contains_key("shoes"));
    assert_eq!(m["skipped"][0]["item"], "photo01/shoes");
    let listed: Vec<String> = files0.values().chain(files1.values()).map(|v| v.as_str().unwrap().to_string()).collect();
    assert_manifest_complete(&out, &listed);
    let upper = image::open(out.join("photo00_upper.png")).unwrap();
    assert_eq!((upper.width(), upper.height()), (512, 512));

    std::fs::remove_file(typical.join("upper.json")).unwrap();
    let o = selfiegen_in(&dir.path().join("o2"), &["simulate-selfies", "--images", p(&images), "--typical", p(&typical)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("upper"));
}

#[test]
fn rank_poses_matches_library_and_writes_top_mask() {
    let dir = tempfile::tempdir().unwrap();
    let (selfies, coll) = (dir.path().join("selfies"), dir.path().join("coll"));
    write_selfie_maps(&selfies, 1, 3, 5);
    write_collection(&coll);
    let out = dir.path().join("out");
    let o = selfiegen_in(&out, &["rank-poses", "--selfie-maps", p(&selfies), "--collection", p(&coll)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let ranking = read_json(&out.join("ranking.json"));
    let sets = SelfieLabelSets::from_maps(
        &SemanticMap::read(&selfies.join("upper.png")).unwrap(),
        &SemanticMap::read(&selfies.join("lower.png")).unwrap(),
        &SemanticMap::read(&selfies.join("shoes.png")).unwrap(),
        21,
    );
    let maps: Vec<_> = (0..6).map(|i| SemanticMap::read(&coll.join(format!("ref{i:02}.png"))).unwrap()).collect();
    let want = rank_collection(&sets, &maps, 5);
    let got: Vec<(usize, usize)> = ranking
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["index"].as_u64().unwrap() as usize, r["score"].as_u64().unwrap() as usize))
        .collect();
    assert_eq!(got, want.iter().map(|r| (r.index, r.score)).collect::<Vec<_>>());
    assert_eq!(got[0], (1, 3));
    assert!(ranking[0]["path"].as_str().unwrap().ends_with("ref01.png"));
    let mask = Mask::read_png(&out.join("top_mask.png")).unwrap();
    assert_eq!(mask.dimensions(), (128, 192));
    let b = person_bbox(&maps[1]).unwrap();
    assert_eq!(mask, scale_bbox_to_mask(&b, 1.1, 128, 192).unwrap());

    let empty = dir.path().join("empty");
    std::fs::create_dir_all(&empty).unwrap();
    let out2 = dir.path().join("out2");
    let o = selfiegen_in(&out2, &["rank-poses", "--selfie-maps", p(&selfies), "--collection", p(&empty)]);
    assert_eq!(code(&o), 0);
    assert_eq!(read_json(&out2.join("ranking.json")), serde_json::json!([]));
    assert!(!out2.join("top_mask.png").exists());
}

#[test]
fn canny_target_cases() {
    let dir = tempfile::tempdir().unwrap();
    let uniform = dir.path().join("uniform.png");
    SemanticMap::from_fn(40, 30, taxonomy(), |_, _| 3).unwrap().write(&uniform).unwrap();
    let split = dir.path().join("split.png");
    SemanticMap::from_fn(40, 30, taxonomy(), |x, _| if x < 20 { 0 } else { 1 }).unwrap().write(&split).unwrap();
    let out = dir.path().join("out");

    assert_eq!(code(&selfiegen_in(&out, &["canny-target", "--map", p(&uniform), "--name", "u.png"])), 0);
    let u = image::open(out.join("u.png")).unwrap().into_luma8();
    assert!(u.pixels().all(|p| p.0[0] == 0));

    assert_eq!(code(&selfiegen_in(&out, &["canny-target", "--map", p(&split), "--name", "s.png"])), 0);
    let s: GrayImage = image::open(out.join("s.png")).unwrap().into_luma8();
    let edge: Vec<_> = s.enumerate_pixels().filter(|(_, _, p)| p.0[0] == 255).map(|(x, y, _)| (x, y)).collect();
    assert_eq!(edge.len(), 30);
    assert!(edge.iter().all(|&(x, _)| x == 19));

    let o = selfiegen_in(&out, &["canny-target", "--map", p(&split), "--low", "4000", "--high", "4000", "--name", "h.png"]);
    assert_eq!(code(&o), 0);
    assert!(image::open(out.join("h.png")).unwrap().into_luma8().pixels().all(|p| p.0[0] == 0));
}

#[test]
fn make_mask_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let map_path = dir.path().join("person.png");
    let map = person_map(1, 3, 5);
    map.write(&map_path).unwrap();
    let out = dir.path().join("out");
    let o = selfiegen_in(&out, &["make-mask", "--map", p(&map_path), "--latent-size", "16", "24"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let mask = Mask::read_png(&out.join("mask.png")).unwrap();
    assert_eq!(mask, scale_bbox_to_mask(&person_bbox(&map).unwrap(), 1.1, 128, 192).unwrap());
    let fg = Mask::read_png(&out.join("foreground_dilated.png")).unwrap();
    assert_eq!(fg, dilate(&map.person_mask(), 21));
    let latent = Mask::read_png(&out.join("foreground_latent.png")).unwrap();
    assert_eq!(latent.dimensions(), (16, 24));

    let bg = dir.path().join("bg.png");
    SemanticMap::from_fn(8, 8, taxonomy(), |_, _| 0).unwrap().write(&bg).unwrap();
    assert_eq!(code(&selfiegen_in(&dir.path().join("o2"), &["make-mask", "--map", p(&bg)])), 1);
}

#[test]
fn augment_small_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (selfies, pool) = (dir.path().join("selfies"), dir.path().join("pool"));
    write_selfies(&selfies);
    write_pool(&pool);
    let out = dir.path().join("ft");
    let o = selfiegen_in(&out, &["augment", "--mode", "finetune", "--selfies", p(&selfies), "--pool", p(&pool), "--count", "12", "--seed", "3"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m = read_json(&out.join("manifest.json"));
    let entries = m["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 12);
    let listed: Vec<String> = entries.iter().map(|e| e["file"].as_str().unwrap().to_string()).collect();
    assert_manifest_complete(&out, &listed);
    for e in entries {
        let c = e["candidate_index"].as_u64().unwrap();
        assert!(c < 20);
    }

    let out = dir.path().join("db");
    let o = selfiegen_in(&out, &["augment", "--mode", "dreambooth", "--selfies", p(&selfies), "--count", "3", "--parts", "face"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(file_names(&out).len(), 4);

    let lonely = dir.path().join("lonely");
    std::fs::create_dir_all(&lonely).unwrap();
    let o = selfiegen_in(&dir.path().join("x"), &["augment", "--mode", "dreambooth", "--selfies", p(&lonely)]);
    assert_eq!(code(&o), 1);
}

#[test]
fn config_file_values_and_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let selfies = dir.path().join("selfies");
    write_selfies(&selfies);
    let cfg = dir.path().join("cfg.json");
    let out_cfg = dir.path().join("from_config");
    std::fs::write(
        &cfg,
        serde_json::to_string(&serde_json::json!({
            "seed": 5,
            "paths": {"selfies": selfies, "out": out_cfg},
            "augment": {"face": {"count": 2, "min_res": 100, "max_res": 120}}
        }))
        .unwrap(),
    )
    .unwrap();
    let o = selfiegen(&["augment", "--config", p(&cfg), "--mode", "dreambooth", "--parts", "face"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m = read_json(&out_cfg.join("manifest.json"));
    assert_eq!(m["seed"], 5);
    for e in m["entries"].as_array().unwrap() {
        let r = e["resolution"][0].as_u64().unwrap();
        assert!((100..=120).contains(&r));
    }
    let out_flag = dir.path().join("from_flag");
    let o = selfiegen(&["augment", "--config", p(&cfg), "--mode", "dreambooth", "--parts", "face", "--seed", "6", "--out", p(&out_flag)]);
    assert_eq!(code(&o), 0);
    assert_eq!(read_json(&out_flag.join("manifest.json"))["seed"], 6);
}
