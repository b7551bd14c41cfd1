use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use patchwork_core::io::{load_checkpoint, load_mesh, save_checkpoint, save_obj};
use patchwork_core::metrics::compare_meshes;
use patchwork_core::{shapes, Group, LinearTerm, PatchworkModel};
use tempfile::TempDir;

fn patchwork(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_patchwork"))
        .args(args)
        .env_remove("PATCHWORK_RUN_DIR")
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = patchwork(args);
    assert!(
        out.status.success(),
        "patchwork {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn core_fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

const QUICK_FIT: [&str; 8] = ["--samples", "256", "--iterations", "60", "--batch-size", "256", "--prune-interval", "20"];

fn quick_fit(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["fit", "sphere(0.8)", "--run-dir", s(dir), "--seed", "5", "--json"];
    args.extend_from_slice(&QUICK_FIT);
    args.extend_from_slice(extra);
    ok(&args)
}

#[test]
fn sphere_fit_writes_three_files() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().join("run");
    quick_fit(&dir, &[]);
    for f in ["model.json", "fit.csv", "manifest.json"] {
        assert!(dir.join(f).is_file(), "{f} missing");
    }
    let model = load_checkpoint(&dir.join("model.json")).unwrap();
    assert_eq!(model.dim, 3);
    let csv = fs::read_to_string(dir.join("fit.csv")).unwrap();
    assert_eq!(csv.lines().count(), 61);
}

#[test]
fn seeded_rerun_is_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    quick_fit(&a, &[]);
    quick_fit(&b, &[]);
    for f in ["model.json", "fit.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
    let c = tmp.path().join("c");
    ok(&["fit", "sphere(0.8)", "--run-dir", s(&c), "--seed", "6", "--samples", "256", "--iterations", "60", "--batch-size", "256"]);
    assert_ne!(fs::read(a.join("model.json")).unwrap(), fs::read(c.join("model.json")).unwrap());
}

#[test]
fn thread_count_does_not_change_results() {
    let tmp = TempDir::new().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    quick_fit(&a, &["--threads", "1"]);
    quick_fit(&b, &["--threads", "3"]);
    let ma = load_checkpoint(&a.join("model.json")).unwrap();
    let mb = load_checkpoint(&b.join("model.json")).unwrap();
    for (x, y) in ma.terms.iter().zip(&mb.terms) {
        assert!((x.offset - y.offset).abs() <= 1e-12);
        for k in 0..3 {
            assert!((x.slope[k] - y.slope[k]).abs() <= 1e-12);
        }
    }
}

#[test]
fn no_prune_keeps_active_count() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().join("run");
    let report = json(&quick_fit(&dir, &["--no-prune"]));
    assert_eq!(report["initial_terms"], report["final_active_terms"]);
    assert_eq!(report["prune_events"].as_array().unwrap().len(), 0);
    let csv = fs::read_to_string(dir.join("fit.csv")).unwrap();
    let counts: Vec<&str> = csv.lines().skip(1).map(|l| l.rsplit(',').next().unwrap()).collect();
    assert!(counts.windows(2).all(|w| w[0] == w[1]));
    assert_eq!(counts[0], "512");
}

#[test]
fn fit_from_mesh_and_point_cloud() {
    let tmp = TempDir::new().unwrap();
    let cube = core_fixture("cube.obj");
    let mut args = vec!["fit", s(&cube), "--run-dir"];
    let d1 = tmp.path().join("mesh");
    args.push(s(&d1));
    args.extend_from_slice(&QUICK_FIT);
    ok(&args);
    let m = load_mesh(&core_fixture("cube.obj")).unwrap();
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(1);
    let cloud = patchwork_core::pipeline::sample_mesh_oriented(&m.mesh, 300, &mut rng).unwrap();
    let ply = tmp.path().join("cloud.ply");
    patchwork_core::io::save_point_cloud(&cloud, &ply).unwrap();
    let d2 = tmp.path().join("cloud");
    let report = json(&ok(&["fit", s(&ply), "--run-dir", s(&d2), "--iterations", "5", "--batch-size", "64", "--json"]));
    assert_eq!(report["samples"], 300);
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(d2.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["input"]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn config_file_is_honored_and_flags_override_it() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("fit.toml");
    fs::write(&cfg, "iterations = 7\nbatch_size = 32\n").unwrap();
    let dir = tmp.path().join("run");
    ok(&["fit", "circle(0.6)", "--config", s(&cfg), "--run-dir", s(&dir), "--samples", "64"]);
    assert_eq!(fs::read_to_string(dir.join("fit.csv")).unwrap().lines().count(), 8);
    ok(&["fit", "circle(0.6)", "--config", s(&cfg), "--run-dir", s(&dir), "--samples", "64", "--iterations", "3"]);
    assert_eq!(fs::read_to_string(dir.join("fit.csv")).unwrap().lines().count(), 4);
}

#[test]
fn eval_matches_recorded_fixture_values() {
    let ck = core_fixture("dodecahedron.json");
    let out = json(&ok(&["eval", s(&ck), "--at", "0.5,0.2,-0.1", "--at", "0,0,0", "--json"]));
    let pts = out["points"].as_array().unwrap();
    assert_eq!(pts[0]["smooth"].as_f64().unwrap(), -0.32198966570390497);
    assert_eq!(pts[0]["tropical"].as_f64().unwrap(), -0.32210148461206667);
    assert!((pts[1]["tropical"].as_f64().unwrap() + 0.8).abs() < 1e-12);
    let bad = patchwork(&["eval", s(&ck), "--at", "1,2"]);
    assert_eq!(bad.status.code(), Some(5));
}

#[test]
fn dodecahedron_tropical_extract_has_twelve_faces() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("dodeca.obj");
    let report = json(&ok(&["extract", s(&core_fixture("dodecahedron.json")), "--mode", "tropical", "--out", s(&out), "--json"]));
    assert_eq!(report["active_cells"], 12);
    assert_eq!(report["euler_characteristic"], 2);
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 12);
}

#[test]
fn mc_and_tropical_extracts_agree() {
    let tmp = TempDir::new().unwrap();
    let ck = tmp.path().join("d.json");
    save_checkpoint(&shapes::dodecahedron_model(0.8, 2000.0).unwrap(), &ck).unwrap();
    let (mc, tr) = (tmp.path().join("mc.obj"), tmp.path().join("tr.obj"));
    ok(&["extract", s(&ck), "--mode", "mc", "--resolution", "64", "--out", s(&mc)]);
    ok(&["extract", s(&ck), "--mode", "tropical", "--out", s(&tr)]);
    let a = load_mesh(&mc).unwrap().mesh;
    let b = load_mesh(&tr).unwrap().mesh;
    let r = compare_meshes(&a, &b, 20_000, 3).unwrap();
    let cell = 2.2 / 63.0;
    assert!(r.hausdorff < 2.0 * cell, "hausdorff {} vs cell {cell}", r.hausdorff);
}

#[test]
fn empty_field_extracts_to_empty_obj() {
    let tmp = TempDir::new().unwrap();
    let ck = tmp.path().join("empty.json");
    let model = PatchworkModel::new(3, 100.0, 100.0, vec![LinearTerm::new([0.0; 3], 1.0, Group::Plus)]).unwrap();
    save_checkpoint(&model, &ck).unwrap();
    let out = tmp.path().join("e.obj");
    let run = patchwork(&["extract", s(&ck), "--resolution", "16", "--out", s(&out)]);
    assert!(run.status.success());
    assert_eq!(fs::read_to_string(&out).unwrap(), "");
    assert!(String::from_utf8_lossy(&run.stderr).contains("no zero set"));
}

#[test]
fn mesh_against_itself_scores_perfectly() {
    let tmp = TempDir::new().unwrap();
    let cube = core_fixture("cube.obj");
    let out = json(&ok(&["metrics", s(&cube), s(&cube), "--samples", "2000", "--json"]));
    assert_eq!(out["chamfer"].as_f64().unwrap(), 0.0);
    assert_eq!(out["hausdorff"].as_f64().unwrap(), 0.0);
    assert_eq!(out["fscore"].as_f64().unwrap(), 100.0);
    let csv = ok(&["metrics", s(&cube), s(&cube), "--samples", "500", "--format", "csv", "--label", "self"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "label,CH,HD,FS,#Params");
    assert_eq!(text.lines().nth(1).unwrap(), "self,0,0,100,0");
    drop(tmp);
}

#[test]
fn metrics_match_library_call() {
    let tmp = TempDir::new().unwrap();
    let gt = tmp.path().join("gt.obj");
    let cand = tmp.path().join("cand.obj");
    save_obj(&shapes::icosphere(1.0, 3), &gt).unwrap();
    save_obj(&shapes::cube(0.7), &cand).unwrap();
    let ck = core_fixture("dodecahedron.json");
    let out = json(&ok(&["metrics", s(&gt), s(&cand), "--samples", "3000", "--seed", "11", "--checkpoint", s(&ck), "--json"]));
    let lib = compare_meshes(
        &load_mesh(&cand).unwrap().mesh,
        &load_mesh(&gt).unwrap().mesh,
        3000,
        11,
    )
    .unwrap();
    assert_eq!(out["chamfer"].as_f64().unwrap(), lib.chamfer);
    assert_eq!(out["hausdorff"].as_f64().unwrap(), lib.hausdorff);
    assert_eq!(out["fscore"].as_f64().unwrap(), lib.fscore);
    assert_eq!(out["parameters"], load_checkpoint(&ck).unwrap().parameter_count());
}

#[test]
fn construct_writes_checkpoints_and_renders() {
    let tmp = TempDir::new().unwrap();
    let g2 = tmp.path().join("grid.json");
    let r = json(&ok(&["construct", "grid2", "-n", "10", "--shape", "circle(0.7)", "--out", s(&g2), "--render", "--json"]));
    assert_eq!(r["terms"], 441);
    let svg = fs::read_to_string(g2.with_extension("svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert!(r["render"]["surface_cells"].as_u64().unwrap() > 0);

    let h2 = tmp.path().join("hex.json");
    let r = json(&ok(&["construct", "hex2", "-n", "4", "--shape", "circle(0.7)", "--out", s(&h2), "--json"]));
    assert_eq!(r["terms"], 81);
    assert_eq!(load_checkpoint(&h2).unwrap().len(), 81);
}

#[test]
fn grid3_all_outside_renders_empty() {
    let tmp = TempDir::new().unwrap();
    let ck = tmp.path().join("g3.json");
    let r = json(&ok(&["construct", "grid3", "-n", "1", "--shape", "torus(0.5,0.1)", "--out", s(&ck), "--render", "--json"]));
    assert_eq!(r["minus"], 0);
    assert_eq!(r["render"]["surface_cells"], 0);
    assert_eq!(fs::read_to_string(ck.with_extension("obj")).unwrap().lines().filter(|l| l.starts_with("f ")).count(), 0);
}

#[test]
fn exit_codes_follow_the_table() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(patchwork(&["bogus"]).status.code(), Some(2));
    assert_eq!(patchwork(&["--version"]).status.code(), Some(0));

    let missing = tmp.path().join("missing.json");
    assert_eq!(patchwork(&["eval", s(&missing), "--at", "0,0,0"]).status.code(), Some(3));
    assert_eq!(patchwork(&["fit", "blob(1)", "--run-dir", s(&tmp.path().join("x"))]).status.code(), Some(3));

    let tampered = tmp.path().join("tampered.json");
    let text = fs::read_to_string(core_fixture("dodecahedron.json")).unwrap();
    fs::write(&tampered, text.replacen("0.8", "0.9", 1)).unwrap();
    assert_eq!(patchwork(&["eval", s(&tampered), "--at", "0,0,0"]).status.code(), Some(4));

    assert_eq!(
        patchwork(&["fit", "sphere(1)", "--learning-rate", "0", "--run-dir", s(&tmp.path().join("y"))]).status.code(),
        Some(5)
    );

    let out = tmp.path().join("big.obj");
    let ck = core_fixture("dodecahedron.json");
    let big = patchwork(&["extract", s(&ck), "--resolution", "64", "--max-nodes", "1000", "--out", s(&out)]);
    assert_eq!(big.status.code(), Some(7));
    assert!(String::from_utf8_lossy(&big.stderr).contains("memory budget"));
    let cap = patchwork(&["construct", "grid3", "-n", "20", "--shape", "sphere(0.5)", "--max-terms", "100", "--out", s(&tmp.path().join("g.json"))]);
    assert_eq!(cap.status.code(), Some(7));
}

#[test]
fn demo_writes_run_and_metric_rows() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path().join("demo");
    let out = json(&ok(&[
        "demo", "--run-dir", s(&dir), "--samples", "256", "--iterations", "30", "--construct-n", "3",
        "--resolution", "32", "--metric-samples", "2000", "--json",
    ]));
    let rows = out["rows"].as_array().unwrap();
    assert_eq!(rows[0]["label"], "construct N=3");
    assert!(rows.iter().all(|r| r["fscore"].as_f64().unwrap() >= 0.0));
    for f in ["model.json", "fit.csv", "constructed.json", "mesh.obj", "metrics.csv", "manifest.json"] {
        assert!(dir.join(f).is_file(), "{f} missing");
    }
    let csv = fs::read_to_string(dir.join("metrics.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "label,CH,HD,FS,#Params");
    assert_eq!(csv.lines().count(), rows.len() + 1);
}
