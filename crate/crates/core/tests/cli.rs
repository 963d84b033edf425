//! The `plt` binary, driven end to end through temporary directories.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use poisson_laguerre::io::{load_gens, load_step};

fn repo() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn plt(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plt")).current_dir(dir).args(args).output().unwrap()
}

fn ok(dir: &Path, args: &[&str]) {
    let out = plt(dir, args);
    assert!(
        out.status.success(),
        "plt {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn f2_csv(dir: &Path) {
    std::fs::copy(repo().join("data/f2.csv"), dir.join("f2.csv")).unwrap();
}

fn svg_paths(path: &Path) -> usize {
    let text = std::fs::read_to_string(path).unwrap();
    let doc = roxmltree::Document::parse(&text).expect("well-formed SVG");
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    doc.descendants().filter(|n| n.has_tag_name("path")).count()
}

#[test]
fn simulate_estimate_plot() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    f2_csv(d);
    ok(d, &["simulate", "--dist", "discrete:f2.csv", "--pn", "1000", "--seed", "7", "--out", "g.json"]);
    let g = load_gens(&d.join("g.json")).unwrap();
    assert_eq!(g.d, 2);
    // F2 has unit mass, so the count is Poisson with mean the region area
    let lambda = g.region().volume();
    assert!((g.window.volume() - 1000.0 / 0.599_006_68).abs() < 0.01);
    assert!((g.points.len() as f64 - lambda).abs() < 4.0 * lambda.sqrt(), "{} vs {lambda}", g.points.len());

    ok(d, &["estimate", "f0", "--gens", "g.json", "--out", "f0.csv"]);
    let f0 = load_step(&d.join("f0.csv")).unwrap();
    assert!((f0.eval(10.0) - 1.0).abs() < 0.3);
    ok(d, &["plot", "--in", "f0.csv", "--ref", "f2.csv", "--out", "fig.svg"]);
    assert_eq!(svg_paths(&d.join("fig.svg")), 2);

    ok(d, &["estimate", "g", "--gens", "g.json", "--out", "g.csv"]);
    ok(d, &["estimate", "fv", "--gens", "g.json", "--out", "fv.csv"]);
    assert_eq!(load_step(&d.join("fv.csv")).unwrap().terminal(), 1.0);
    ok(d, &["estimate", "f", "--gens", "g.json", "--out", "f.csv"]);
    let side: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("f.meta.json")).unwrap()).unwrap();
    assert!(side["m_hat"].as_f64().unwrap() > 1.0);
    assert!(side["warnings"].is_array());

    ok(d, &["plot", "--in", "f0.csv", "f.csv", "--average", "--ref", "f2", "--out", "avg.svg"]);
    assert_eq!(svg_paths(&d.join("avg.svg")), 4);
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    for out in ["a.json", "b.json"] {
        ok(d, &["simulate", "--dist", "uniform:M=1", "--pn", "200", "--seed", "3", "--out", out]);
    }
    assert_eq!(std::fs::read(d.join("a.json")).unwrap(), std::fs::read(d.join("b.json")).unwrap());
    for out in ["a.csv", "b.csv"] {
        ok(d, &["estimate", "f", "--gens", "a.json", "--out", out]);
    }
    assert_eq!(std::fs::read(d.join("a.csv")).unwrap(), std::fs::read(d.join("b.csv")).unwrap());
    ok(d, &["simulate", "--dist", "uniform:M=1", "--pn", "200", "--seed", "4", "--out", "c.json"]);
    assert_ne!(std::fs::read(d.join("a.json")).unwrap(), std::fs::read(d.join("c.json")).unwrap());
}

#[test]
fn section_tessellate_stereo() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["section", "--distH", "uniform:M=1", "--hmax", "auto", "--pn", "300", "--seed", "5", "--out", "s.json"]);
    let g = load_gens(&d.join("s.json")).unwrap();
    assert_eq!(g.d, 2);
    ok(d, &["tessellate", "--gens", "s.json", "--circles", "--out", "t.svg"]);
    let cells = svg_paths(&d.join("t.svg"));
    assert!(cells > 300 && cells <= g.points.len());

    ok(d, &["estimate", "f0", "--gens", "s.json", "--out", "fbar.csv"]);
    ok(d, &["stereo", "--fbar", "fbar.csv", "--M", "inf", "--out", "H.csv", "--plugin", "plugin.csv"]);
    let h = load_step(&d.join("H.csv")).unwrap();
    assert!(h.values().windows(2).all(|w| w[0] <= w[1]));
    let plugin = std::fs::read_to_string(d.join("plugin.csv")).unwrap();
    assert!(plugin.starts_with("z,value\n"));
    assert!(plugin.lines().any(|l| l.ends_with(",inf")));
    ok(d, &["stereo", "--fbar", "fbar.csv", "--M", "0.8", "--out", "H8.csv"]);
    ok(d, &["plot", "--in", "plugin.csv", "H.csv", "--ref", "uniform:M=1", "--out", "h.svg"]);
    let svg = std::fs::read_to_string(d.join("h.svg")).unwrap();
    assert!(svg.contains("class=\"clipped\""));
}

#[test]
fn study_table_shape() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let cfg = repo().join("configs/paper_table1.json");
    ok(d, &["study", "--config", cfg.to_str().unwrap(), "--curves", "curves.csv"]);
    let results = std::fs::read_to_string(d.join("results.csv")).unwrap();
    let mut lines = results.lines();
    assert_eq!(
        lines.next().unwrap(),
        "estimator,P_n,probe_z,mean_abs_err,q025,q975,n_reps,n_excluded"
    );
    assert_eq!(lines.count(), 12);
    assert!(d.join("curves.csv").exists());
}

#[test]
fn failures_are_machine_readable() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let json_line = |o: &Output| -> serde_json::Value {
        let err = String::from_utf8_lossy(&o.stderr);
        serde_json::from_str(err.lines().last().unwrap()).unwrap()
    };

    let o = plt(d, &["simulate", "--nope"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json_line(&o)["command"], "usage");

    std::fs::write(d.join("bad.csv"), "h,value\n2,0.5\n1,0.7\n").unwrap();
    let o = plt(d, &["stereo", "--fbar", "bad.csv", "--out", "H.csv"]);
    assert_eq!(o.status.code(), Some(1));
    let v = json_line(&o);
    assert_eq!(v["command"], "stereo");
    assert!(v["error"].as_str().unwrap().contains("bad.csv"));

    let o = plt(d, &["simulate", "--dist", "uniform:M=1", "--out", "x.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(json_line(&o)["error"].as_str().unwrap().contains("--pn"));

    ok(d, &["simulate", "--dist", "uniform:M=1", "--pn", "50", "--guard", "0.5", "--out", "g.json"]);
    let o = plt(d, &["estimate", "f0", "--gens", "g.json", "--erode", "0.1", "--out", "f0.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(json_line(&o)["error"].as_str().unwrap().contains("guard"));
}
