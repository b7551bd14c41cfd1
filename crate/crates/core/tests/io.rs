use std::path::{Path, PathBuf};

use patchwork_core::field::{eval_field, eval_tropical, Group, LinearTerm, PatchworkModel};
use patchwork_core::geom::{self, BBox};
use patchwork_core::io::{
    box_normalization, checkpoint_string, is_point_cloud, load_checkpoint, load_mesh, load_point_cloud,
    normalize_to_box, parse_checkpoint, parse_obj, parse_ply, ply_bytes, save_checkpoint, save_point_cloud,
    sha256_hex, InputProvenance, RunDir, RunManifest,
};
use patchwork_core::mesh::TriMesh;
use patchwork_core::{Error, OrientedSampleSet};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn random_model(seed: u64, dim: usize, n: usize) -> PatchworkModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms = (0..n)
        .map(|i| {
            let mut a = [0.0; 3];
            for v in a.iter_mut().take(dim) {
                *v = rng.gen_range(-3.0..3.0);
            }
            let g = if i % 3 == 0 { Group::Minus } else { Group::Plus };
            let mut t = LinearTerm::new(a, rng.gen_range(-1.0..1.0), g);
            t.log_weight = rng.gen_range(-4.0..1.0);
            t.active = i % 5 != 4;
            t
        })
        .collect();
    let mut m = PatchworkModel::new(dim, rng.gen_range(1.0..200.0), rng.gen_range(1.0..200.0), terms).unwrap();
    if seed % 2 == 0 {
        m.enable_weight_norm();
    }
    m
}

#[test]
fn minimal_obj_triangle() {
    let m = load_mesh(&fixture("triangle.obj")).unwrap();
    assert_eq!(m.mesh.vertices.len(), 3);
    assert_eq!(m.mesh.faces, vec![[0, 1, 2]]);
    assert_eq!(m.dropped_faces, 0);
}

#[test]
fn quad_is_fan_triangulated() {
    let m = parse_obj("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n", Path::new("q.obj")).unwrap();
    assert_eq!(m.mesh.faces, vec![[0, 1, 2], [0, 2, 3]]);
    assert!((m.mesh.area() - 1.0).abs() < 1e-15);
}

#[test]
fn obj_accepts_slashes_negative_indices_and_comments() {
    let text = "# c\nv 0 0 0\nv 1 0 0 # x\nvn 0 0 1\nv 0 1 0\nf 1//1 2//1 3//1\nf -3/1 -2/1 -1/1\n";
    let m = parse_obj(text, Path::new("s.obj")).unwrap();
    assert_eq!(m.mesh.faces.len(), 2);
}

#[test]
fn degenerate_faces_are_dropped_and_counted() {
    let m = parse_obj("v 0 0 0\nv 1 0 0\nv 2 0 0\nv 0 1 0\nf 1 2 3\nf 1 2 4\nf 1 1 4\n", Path::new("d.obj")).unwrap();
    assert_eq!(m.mesh.faces.len(), 1);
    assert_eq!(m.dropped_faces, 2);
}

#[test]
fn parse_errors_carry_locations() {
    let e = parse_obj("v 0 0 0\nv 1 0 0\nf 1 2 9\n", Path::new("bad.obj")).unwrap_err();
    match e {
        Error::Parse { location, .. } => assert_eq!(location, "line 3"),
        other => panic!("{other:?}"),
    }
    let e = parse_obj("v 0 zero 0\n", Path::new("bad.obj")).unwrap_err();
    assert!(matches!(e, Error::Parse { ref location, .. } if location == "line 1"), "{e:?}");
    assert!(matches!(parse_ply(b"plx\n", Path::new("x.ply")), Err(Error::Parse { .. })));
    let big_endian = b"ply\nformat binary_big_endian 1.0\nelement vertex 0\nend_header\n";
    assert!(matches!(parse_ply(big_endian, Path::new("x.ply")), Err(Error::UnsupportedFormat(_))));
    let dir = tempfile::tempdir().unwrap();
    let stl = dir.path().join("a.stl");
    std::fs::write(&stl, "solid").unwrap();
    assert!(matches!(load_mesh(&stl), Err(Error::UnsupportedFormat(_))));
}

#[test]
fn truncated_binary_ply_is_rejected() {
    let cube = load_mesh(&fixture("cube.ply")).unwrap().mesh;
    let bytes = ply_bytes(&cube);
    let e = parse_ply(&bytes[..bytes.len() - 3], Path::new("t.ply")).unwrap_err();
    assert!(matches!(e, Error::Parse { .. }), "{e:?}");
}

#[test]
fn cube_fixture_golden_round_trip() {
    // hash recorded when the fixture was written
    let raw = std::fs::read(fixture("cube.ply")).unwrap();
    assert_eq!(sha256_hex(&raw), "ee9b65acc59ca4f81023afc3c395f15d67fa6597d1d535fb8abd276bd91c02bc");
    let ply = load_mesh(&fixture("cube.ply")).unwrap().mesh;
    let obj = load_mesh(&fixture("cube.obj")).unwrap().mesh;
    assert_eq!(ply, obj);
    assert_eq!(ply.faces.len(), 12);
    assert!(ply.is_closed_manifold());
    assert_eq!(ply.euler_characteristic(), 2);
    assert!((ply.signed_volume() - 1.0).abs() < 1e-15);
    assert!((ply.area() - 6.0).abs() < 1e-15);
    // binary write and re-read preserve the mesh and the bytes
    let bin = ply_bytes(&ply);
    let back = parse_ply(&bin, Path::new("b.ply")).unwrap().mesh;
    assert_eq!(back, ply);
    assert_eq!(ply_bytes(&back), bin);
    let text = patchwork_core::io::obj_string(&ply);
    assert_eq!(parse_obj(&text, Path::new("c.obj")).unwrap().mesh, ply);
}

#[test]
fn point_cloud_ply_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cloud.ply");
    let s = OrientedSampleSet::new(
        3,
        vec![[0.1, 0.2, 0.3], [-0.5, 0.25, 1.0]],
        vec![[0.0, 0.0, 1.0], [0.6, 0.0, -0.8]],
        "t",
    )
    .unwrap();
    save_point_cloud(&s, &path).unwrap();
    assert!(is_point_cloud(&path).unwrap());
    assert!(!is_point_cloud(&fixture("cube.ply")).unwrap());
    let back = load_point_cloud(&path, 3).unwrap();
    assert_eq!(back.points, s.points);
    assert_eq!(back.normals, s.normals);
    // non-unit normals are renormalized
    std::fs::write(
        &path,
        "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\nproperty float nx\nproperty float ny\nproperty float nz\nend_header\n0 0 0 0 0 2\n",
    )
    .unwrap();
    assert_eq!(load_point_cloud(&path, 3).unwrap().normals[0], [0.0, 0.0, 1.0]);
    assert!(load_point_cloud(&fixture("cube.ply"), 3).is_err());
}

#[test]
fn normalize_offset_cube() {
    let cube = load_mesh(&fixture("cube.ply")).unwrap().mesh;
    let moved = TriMesh::new(
        cube.vertices.iter().map(|v| [v[0] * 3.0 + 5.0, v[1] * 2.0 - 1.0, v[2] + 0.25]).collect(),
        cube.faces.clone(),
    );
    let (norm, inv) = normalize_to_box(&moved).unwrap();
    let b = norm.bbox().unwrap();
    assert_eq!((b.min[0], b.max[0]), (-1.0, 1.0));
    for k in 1..3 {
        assert!((b.min[k] + b.max[k]).abs() < 1e-12);
        assert!(b.max[k] < 1.0);
    }
    for (p, q) in inv.apply_mesh(&norm).vertices.iter().zip(&moved.vertices) {
        assert!(geom::dist(p, q) < 1e-9);
    }
}

#[test]
fn normalize_is_identity_on_normalized_input() {
    let cube = load_mesh(&fixture("cube.ply")).unwrap().mesh;
    let unit = TriMesh::new(cube.vertices.iter().map(|v| geom::scale(v, 2.0)).collect(), cube.faces.clone());
    let (norm, inv) = normalize_to_box(&unit).unwrap();
    for (p, q) in norm.vertices.iter().zip(&unit.vertices) {
        assert!(geom::dist(p, q) < 1e-12);
    }
    assert!((inv.scale - 1.0).abs() < 1e-12);
    let flat = BBox { min: [0.0; 3], max: [0.0; 3] };
    assert!(matches!(box_normalization(&flat, 3), Err(Error::DegenerateBBox)));
    assert!(normalize_to_box(&TriMesh::new(vec![], vec![])).is_err());
}

#[test]
fn checkpoint_round_trip_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..20 {
        let m = random_model(seed, 2 + (seed as usize % 2), 17);
        let path = dir.path().join(format!("m{seed}.json"));
        save_checkpoint(&m, &path).unwrap();
        let back = load_checkpoint(&path).unwrap();
        assert_eq!(back, m);
        assert_eq!(checkpoint_string(&back).unwrap(), std::fs::read_to_string(&path).unwrap());
    }
}

#[test]
fn tampered_checkpoints_fail() {
    let text = checkpoint_string(&random_model(3, 3, 8)).unwrap();
    let key = "\"checksum\": \"";
    let at = text.find(key).unwrap() + key.len();
    let mut bad = text.clone().into_bytes();
    bad[at] = if bad[at] == b'0' { b'1' } else { b'0' };
    let bad = String::from_utf8(bad).unwrap();
    assert!(matches!(parse_checkpoint(&bad), Err(Error::CorruptCheckpoint(_))));

    let edited = text.replacen("\"dim\": 3", "\"dim\": 2", 1);
    assert!(matches!(parse_checkpoint(&edited), Err(Error::CorruptCheckpoint(_))));

    let future = text.replacen("\"version\": 1", "\"version\": 2", 1);
    assert!(matches!(parse_checkpoint(&future), Err(Error::VersionMismatch { found: 2, supported: 1 })));

    assert!(matches!(parse_checkpoint("{"), Err(Error::CorruptCheckpoint(_))));
    assert!(matches!(parse_checkpoint("{\"version\": 1}"), Err(Error::CorruptCheckpoint(_))));
}

#[test]
fn fixture_checkpoint_evaluates_to_recorded_values() {
    let m = load_checkpoint(&fixture("dodecahedron.json")).unwrap();
    assert_eq!(m.len(), 13);
    let recorded = [
        ([0.5, 0.2, -0.1], -0.32198966570390497, -0.32210148461206667),
        ([0.9, 0.9, 0.9], 0.4497298513107373, 0.43874372842405607),
        ([-0.3, 0.7, 0.4], -0.04671354996311486, -0.04682510051783195),
    ];
    for (p, smooth, trop) in recorded {
        assert!((eval_field(&m, &p).unwrap().value - smooth).abs() < 1e-12);
        assert!((eval_tropical(&m, &p).unwrap() - trop).abs() < 1e-12);
    }
    // at the center only the constant term is nonnegative: f = -inradius
    assert!((eval_tropical(&m, &[0.0; 3]).unwrap() + 0.8).abs() < 1e-15);
}

#[test]
fn manifest_and_run_dir() {
    let dir = tempfile::tempdir().unwrap();
    let run = RunDir::open(&dir.path().join("r")).unwrap();
    let input = InputProvenance::of_file(&fixture("cube.ply")).unwrap();
    assert_eq!(input.sha256, "ee9b65acc59ca4f81023afc3c395f15d67fa6597d1d535fb8abd276bd91c02bc");
    let mut man = RunManifest::new("fit", serde_json::json!({"iterations": 3}), Some(input), 7);
    man.outputs.push("model.json".into());
    man.save(&run.join("manifest.json")).unwrap();
    let back = RunManifest::load(&run.join("manifest.json")).unwrap();
    assert_eq!(back, man);
    assert!(back.finished_unix >= back.started_unix);
    assert_eq!(InputProvenance::named("sphere(1)"), InputProvenance::named("sphere(1)"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn checkpoints_round_trip(seed in any::<u64>(), n in 1usize..30) {
        let m = random_model(seed, 3, n.max(1));
        let text = checkpoint_string(&m).unwrap();
        let back = parse_checkpoint(&text).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(checkpoint_string(&back).unwrap(), text);
    }

    #[test]
    fn normalization_inverts(s in 0.01f64..100.0, tx in -50.0f64..50.0, ty in -50.0f64..50.0, tz in -50.0f64..50.0) {
        let cube = load_mesh(&fixture("cube.ply")).unwrap().mesh;
        let moved = TriMesh::new(
            cube.vertices.iter().map(|v| [v[0] * s + tx, v[1] * s * 0.5 + ty, v[2] * s * 0.3 + tz]).collect(),
            cube.faces.clone(),
        );
        let (norm, inv) = normalize_to_box(&moved).unwrap();
        let b = norm.bbox().unwrap();
        prop_assert_eq!((b.min[0], b.max[0]), (-1.0, 1.0));
        for (p, q) in inv.apply_mesh(&norm).vertices.iter().zip(&moved.vertices) {
            prop_assert!(geom::dist(p, q) < 1e-9 * (1.0 + geom::norm(q)));
        }
    }
}
