use std::path::Path;
use std::process::{Command, Output};

fn fishrep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fishrep")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = fishrep(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(fishrep(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(fishrep(&["fit", "--annotations", "/nonexistent.json", "--out", "x"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"version":"1","images":[{"image_id":"a","camera_id":"front","width":8,"height":8,
        "objects":[{"class":0,"contour":[[0,0],[1,1]]}]}]}"#)
        .unwrap();
    let out = fishrep(&["eval-miou", "--annotations", path(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("object 0"));
    // the lenient flag drops the object instead
    ok(&["--lenient", "eval-miou", "--annotations", path(&bad)]);
}

#[test]
fn synth_fit_nms_and_map() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["gen-synth", "--seed", "3", "--images", "4", "--out", path(d)]);
    assert!(d.join("previews/scene0000_front.svg").exists());
    let fitted = d.join("fitted.json");
    ok(&["fit", "--annotations", path(&d.join("annotations.json")), "--out", path(&fitted), "--representations", "standard,poly24"]);

    // Three scored copies of every fitted shape.
    let file: serde_json::Value = serde_json::from_slice(&std::fs::read(&fitted).unwrap()).unwrap();
    let mut dets = Vec::new();
    let mut n_objects = 0;
    for img in file["images"].as_array().unwrap() {
        for obj in img["objects"].as_array().unwrap() {
            n_objects += 1;
            for rep in ["standard", "poly24"] {
                for k in 0..3 {
                    dets.push(serde_json::json!({
                        "image_id": img["image_id"], "class": obj["class"],
                        "confidence": 0.9 - 0.1 * k as f64, "shape": obj["shapes"][rep],
                    }));
                }
            }
        }
    }
    let raw = d.join("dets.json");
    std::fs::write(&raw, serde_json::json!({ "detections": dets }).to_string()).unwrap();
    let kept = d.join("kept.json");
    ok(&["nms", "--input", path(&raw), "--out", path(&kept)]);
    let kept_v: serde_json::Value = serde_json::from_slice(&std::fs::read(&kept).unwrap()).unwrap();
    assert_eq!(kept_v["detections"].as_array().unwrap().len(), 2 * n_objects);

    let report = ok(&["eval-map", "--annotations", path(&d.join("annotations.json")), "--predictions", path(&kept), "--format", "csv"]);
    let poly = report.lines().find(|l| l.starts_with("poly24,")).unwrap();
    assert!(poly.ends_with(",1.000000"), "{report}");
}

#[test]
fn fit_division_and_cube() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(&["fit-division", "--camera", "rear", "--out", path(dir.path())]);
    assert!(stdout.contains("max residual"));
    let csv = std::fs::read_to_string(dir.path().join("division_rear.csv")).unwrap();
    assert_eq!(csv.lines().count(), 257);
    ok(&["render", "--cube", "--camera", "left", "--grid", "3", "--out", path(dir.path())]);
    let svg = std::fs::read_to_string(dir.path().join("open_cube_left.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 12 + 30);
}

#[test]
fn report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["gen-synth", "--seed", "5", "--objects", "12", "--out", path(d), "--no-previews"]);
    ok(&["eval-miou", "--annotations", path(&d.join("annotations.json")), "--out", path(&d.join("r")), "--representations", "standard,oriented"]);
    let csv = ok(&["report", "--input", path(&d.join("r/miou.json")), "--format", "csv"]);
    assert_eq!(csv, std::fs::read_to_string(d.join("r/miou.csv")).unwrap());
    assert!(csv.ends_with(",12,,\n"), "{csv}");
}
