//! Constructions checked against brute-force argmax and dense sampling of
//! the tropical field.

use patchwork_core::extract::{extract_tropical, ExtractOptions};
use patchwork_core::field::{Group, PatchworkModel};
use patchwork_core::geom::{self, Vec3};
use patchwork_core::init::oracle::Complement;
use patchwork_core::init::{
    digital_curve_grid, digital_curve_hex, digital_surface_grid, geometric_init, hex_cell_center, kaiming_init,
    OccupancyOracle, OrientedSampleSet, ShapeOracle, DEFAULT_BETA, DEFAULT_RHO,
};
use patchwork_core::pipeline::sample_shape;
use patchwork_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Max over a group by direct enumeration; ties go to the lowest index.
fn group_max(model: &PatchworkModel, g: Group, x: &Vec3) -> (f64, usize) {
    let mut best = (f64::NEG_INFINITY, usize::MAX);
    for (i, t) in model.terms.iter().enumerate() {
        if t.group == g && t.active {
            let v = t.slope[0] * x[0] + t.slope[1] * x[1] + t.slope[2] * x[2] + t.offset;
            if v > best.0 {
                best = (v, i);
            }
        }
    }
    best
}

fn trop(model: &PatchworkModel, x: &Vec3) -> f64 {
    group_max(model, Group::Plus, x).0 - group_max(model, Group::Minus, x).0
}

fn sphere_samples(m: usize, seed: u64) -> OrientedSampleSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_shape(&ShapeOracle::Sphere { r: 1.0 }, m, &mut rng).unwrap()
}

#[test]
fn geometric_init_interpolates_samples() {
    let s = sphere_samples(1024, 3);
    let model = geometric_init(&s, DEFAULT_RHO, DEFAULT_BETA).unwrap();
    let m = s.len();
    assert_eq!(model.active_in_group(Group::Plus), m);
    assert_eq!(model.active_in_group(Group::Minus), m);
    for (j, (x, n)) in s.points.iter().zip(&s.normals).enumerate() {
        let (vp, ip) = group_max(&model, Group::Plus, x);
        let (vm, im) = group_max(&model, Group::Minus, x);
        // plus terms come first, minus terms follow in sample order
        assert_eq!(ip, j, "plus argmax at sample {j}");
        assert_eq!(im, m + j, "minus argmax at sample {j}");
        assert!((vp - vm).abs() < 1e-9, "f = {}", vp - vm);
        let g = geom::sub(&model.terms[ip].slope, &model.terms[im].slope);
        assert!(geom::dist(&g, n) < 1e-6);
    }
}

#[test]
fn geometric_init_single_sample_at_origin() {
    let s = OrientedSampleSet::new(3, vec![[0.0; 3]], vec![[0.0, 0.0, 1.0]], "origin").unwrap();
    let model = geometric_init(&s, 200.0, 75.0).unwrap();
    let (p, m) = (&model.terms[0], &model.terms[1]);
    assert_eq!((p.group, m.group), (Group::Plus, Group::Minus));
    assert_eq!(p.slope, [0.0, 0.0, 1.0]);
    assert_eq!(p.offset, 0.0);
    assert_eq!(m.slope, [0.0; 3]);
    assert_eq!(m.offset, 0.0);
    assert!(model.terms.iter().all(|t| t.log_weight == 0.0));
    assert_eq!((model.beta_plus, model.beta_minus), (75.0, 75.0));
    for z in [-0.3, 0.0, 0.7] {
        assert_eq!(trop(&model, &[0.2, -0.1, z]), z);
    }
}

#[test]
fn geometric_init_weight_norm_matches_slopes() {
    let s = sphere_samples(64, 1);
    let model = geometric_init(&s, DEFAULT_RHO, DEFAULT_BETA).unwrap();
    assert!(model.weight_norm_enabled());
    for t in &model.terms {
        let wn = t.weight_norm.unwrap();
        assert!((wn.g - geom::norm(&t.slope)).abs() < 1e-12);
        if wn.g > 0.0 {
            assert!(geom::dist(&wn.slope(), &t.slope) < 1e-12);
        }
    }
}

#[test]
fn geometric_init_rejects_bad_input() {
    let s = OrientedSampleSet {
        dim: 3,
        points: vec![[0.0; 3]],
        normals: vec![[0.0, 0.0, 2.0]],
        source: "x".into(),
    };
    assert!(matches!(geometric_init(&s, 200.0, 75.0), Err(Error::NonUnitNormal { index: 0, .. })));
    let empty = OrientedSampleSet {
        dim: 3,
        points: vec![],
        normals: vec![],
        source: "x".into(),
    };
    assert!(matches!(geometric_init(&empty, 200.0, 75.0), Err(Error::EmptyInput(_))));
    let one = sphere_samples(1, 0);
    assert!(matches!(geometric_init(&one, 0.0, 75.0), Err(Error::InvalidConfig(_))));
}

#[test]
fn normalized_sample_set_rescales_normals() {
    let s = OrientedSampleSet::normalized(2, vec![[0.0; 3]], vec![[3.0, 4.0, 0.0]], "x").unwrap();
    assert!(geom::dist(&s.normals[0], &[0.6, 0.8, 0.0]) < 1e-15);
    assert!(OrientedSampleSet::normalized(2, vec![[0.0; 3]], vec![[0.0; 3]], "x").is_err());
}

#[test]
fn kaiming_init_is_seeded_and_balanced() {
    let a = kaiming_init(3, 50, 75.0, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    let b = kaiming_init(3, 50, 75.0, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.active_in_group(Group::Plus), 50);
    assert_eq!(a.active_in_group(Group::Minus), 50);
    let two = kaiming_init(2, 10, 75.0, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    assert!(two.terms.iter().all(|t| t.slope[2] == 0.0));
}

/// Dense grid on [-1, 1]^2 avoiding the lattice lines of step `1/N`.
fn offset_grid(res: usize) -> impl Iterator<Item = Vec3> {
    let h = 2.0 / res as f64;
    (0..res).flat_map(move |i| (0..res).map(move |j| [-1.0 + (i as f64 + 0.37) * h, -1.0 + (j as f64 + 0.61) * h, 0.0]))
}

#[test]
fn grid_center_cell_is_unit_square() {
    let oracle = |x: &Vec3| x[0] == 0.0 && x[1] == 0.0;
    let model = digital_curve_grid(1, &oracle).unwrap();
    assert_eq!(model.len(), 9);
    for p in offset_grid(97) {
        let inside = p[0].abs() < 0.5 && p[1].abs() < 0.5;
        assert_eq!(trop(&model, &p) < 0.0, inside, "{p:?}");
    }
    // the square's four sides are zeros of f
    for t in [-0.45, -0.2, 0.0, 0.3, 0.49] {
        for p in [[0.5, t, 0.0], [-0.5, t, 0.0], [t, 0.5, 0.0], [t, -0.5, 0.0]] {
            assert!(trop(&model, &p).abs() < 1e-12, "{p:?}");
        }
    }
}

#[test]
fn grid_terms_own_their_cell_centers() {
    let n = 6;
    let model = digital_curve_grid(n, &ShapeOracle::Circle { r: 0.5 }).unwrap();
    let ni = n as i64;
    for (idx, (k, l)) in (-ni..=ni).flat_map(|k| (-ni..=ni).map(move |l| (k, l))).enumerate() {
        let x = [k as f64 / n as f64, l as f64 / n as f64, 0.0];
        let t = &model.terms[idx];
        assert_eq!(t.slope, [k as f64, l as f64, 0.0]);
        // no other term comes within a margin of 1/(2N) at the center
        let own = t.value(&x);
        for (j, u) in model.terms.iter().enumerate() {
            if j != idx {
                assert!(own - u.value(&x) >= 0.5 / n as f64 - 1e-12);
            }
        }
    }
}

#[test]
fn all_outside_constructions_are_positive() {
    let none = |_: &Vec3| false;
    let g = digital_curve_grid(4, &none).unwrap();
    let h = digital_curve_hex(4, &none).unwrap();
    for m in [&g, &h] {
        assert_eq!(m.active_in_group(Group::Minus), 0);
        for p in offset_grid(40) {
            assert!(trop(m, &p) > 0.0);
        }
    }
    let s = digital_surface_grid(2, &none, 1 << 20).unwrap();
    assert_eq!(s.active_in_group(Group::Minus), 0);
    assert!(trop(&s, &[0.1, -0.3, 0.7]) > 0.0);
}

fn point_segment_distance(p: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let ab = geom::sub(b, a);
    let l2 = geom::dot(&ab, &ab);
    let t = if l2 == 0.0 { 0.0 } else { (geom::dot(&geom::sub(p, a), &ab) / l2).clamp(0.0, 1.0) };
    geom::dist(p, &geom::lerp(a, b, t))
}

/// Hausdorff distance between the extracted curve and the circle of radius `r`.
fn curve_to_circle(model: &PatchworkModel, r: f64) -> f64 {
    let c = extract_tropical(model, &ExtractOptions::new(2)).unwrap();
    let segs = c.segments();
    assert!(!segs.is_empty());
    let mut worst: f64 = 0.0;
    for (a, b) in &segs {
        for t in 0..=16 {
            let p = geom::lerp(a, b, t as f64 / 16.0);
            worst = worst.max(((p[0] * p[0] + p[1] * p[1]).sqrt() - r).abs());
        }
    }
    for k in 0..2000 {
        let th = k as f64 * std::f64::consts::TAU / 2000.0;
        let q = [r * th.cos(), r * th.sin(), 0.0];
        let d = segs.iter().map(|(a, b)| point_segment_distance(&q, a, b)).fold(f64::INFINITY, f64::min);
        worst = worst.max(d);
    }
    worst
}

#[test]
fn grid_disk_error_within_cell_bound() {
    let disk = ShapeOracle::Circle { r: 0.5 };
    let mut last = f64::INFINITY;
    for n in [5usize, 10, 20] {
        let d = curve_to_circle(&digital_curve_grid(n, &disk).unwrap(), 0.5);
        let nf = n as f64;
        let bound = 2f64.sqrt() / (2.0 * nf) + 1.0 / (2.0 * nf);
        assert!(d <= bound, "N={n}: {d} > {bound}");
        assert!(d < last, "N={n}: {d} not below {last}");
        last = d;
    }
}

#[test]
fn hex_single_cell_is_hexagon_boundary() {
    let n = 4;
    let center = hex_cell_center(0, 1, n);
    let oracle = move |x: &Vec3| geom::dist(x, &center) < 1e-9;
    let model = digital_curve_hex(n, &oracle).unwrap();
    assert_eq!(model.active_in_group(Group::Minus), 1);
    // the interior is exactly the candidate hexagon of term (0, 1)
    let own = model.terms.iter().position(|t| t.group == Group::Minus).unwrap();
    for p in offset_grid(120) {
        let (_, win) = group_max(&model, Group::Plus, &p);
        let all_best = model
            .terms
            .iter()
            .map(|t| t.value(&p))
            .fold(f64::NEG_INFINITY, f64::max);
        let in_cell = model.terms[own].value(&p) >= all_best;
        assert_eq!(trop(&model, &p) < 0.0, in_cell, "{p:?} (plus argmax {win})");
    }
    let c = extract_tropical(&model, &ExtractOptions::new(2)).unwrap();
    assert_eq!(c.active_count(), 6);
}

#[test]
fn hex_cells_contain_their_centers() {
    let n = 5;
    let model = digital_curve_hex(n, &ShapeOracle::Circle { r: 0.5 }).unwrap();
    let ni = n as i64;
    let mut idx = 0;
    for k in -ni..=ni {
        for l in -ni..=ni {
            let x = hex_cell_center(k, l, n);
            let own = model.terms[idx].value(&x);
            let best = model.terms.iter().map(|t| t.value(&x)).fold(f64::NEG_INFINITY, f64::max);
            assert!(own >= best - 1e-12, "({k}, {l})");
            idx += 1;
        }
    }
}

#[test]
fn hex_disk_error_is_order_one_over_n() {
    let n = 20;
    let d = curve_to_circle(&digital_curve_hex(n, &ShapeOracle::Circle { r: 0.5 }).unwrap(), 0.5);
    assert!(d * n as f64 <= 2.0, "C = {}", d * n as f64);
}

#[test]
fn grid3_single_voxel_and_sphere_bound() {
    let n = 2;
    let model = digital_surface_grid(n, &|x: &Vec3| geom::norm(x) < 1e-9, 1 << 20).unwrap();
    let h = 0.5 / n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..5000 {
        let p: Vec3 = [0, 1, 2].map(|_| rng.gen_range(-1.0..1.0));
        let inside = p.iter().all(|v| v.abs() < h);
        let f = trop(&model, &p);
        if p.iter().any(|v| (v.abs() - h).abs() < 1e-9) {
            continue;
        }
        assert_eq!(f < 0.0, inside, "{p:?}");
    }

    let n = 10;
    let sphere = ShapeOracle::Sphere { r: 0.5 };
    let model = digital_surface_grid(n, &sphere, 1 << 20).unwrap();
    let c = extract_tropical(&model, &ExtractOptions::new(3)).unwrap();
    let pts = c.sample_surface(40_000, &mut rng);
    let mut worst = pts.iter().map(|p| (geom::norm(p) - 0.5).abs()).fold(0.0, f64::max);
    let on_sphere = sphere_samples(2000, 8);
    for q in &on_sphere.points {
        let q = geom::scale(q, 0.5);
        let d = pts.iter().map(|p| geom::dist(p, &q)).fold(f64::INFINITY, f64::min);
        worst = worst.max(d);
    }
    let bound = 2.0 * 3f64.sqrt() / (2.0 * n as f64);
    assert!(worst <= bound, "{worst} > {bound}");
}

#[test]
fn grid3_respects_memory_cap() {
    let r = digital_surface_grid(10, &|_: &Vec3| true, 1000);
    assert!(matches!(r, Err(Error::MemoryBudgetExceeded { requested: 9261, cap: 1000 })));
    assert!(digital_surface_grid(0, &|_: &Vec3| true, 1000).is_err());
    assert!(digital_curve_grid(0, &|_: &Vec3| true).is_err());
}

fn assert_negated(a: &PatchworkModel, b: &PatchworkModel, pts: impl Iterator<Item = Vec3>) {
    for p in pts {
        assert!((trop(a, &p) + trop(b, &p)).abs() < 1e-10, "{p:?}");
    }
}

#[test]
fn complementing_the_oracle_negates_f() {
    let disk = ShapeOracle::Circle { r: 0.6 };
    assert_negated(
        &digital_curve_grid(7, &disk).unwrap(),
        &digital_curve_grid(7, &Complement(disk.clone())).unwrap(),
        offset_grid(50),
    );
    assert_negated(
        &digital_curve_hex(7, &disk).unwrap(),
        &digital_curve_hex(7, &Complement(disk.clone())).unwrap(),
        offset_grid(50),
    );
    let torus = ShapeOracle::Torus { major: 0.5, minor: 0.2 };
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let pts: Vec<Vec3> = (0..500).map(|_| [0, 1, 2].map(|_| rng.gen_range(-1.0..1.0))).collect();
    assert_negated(
        &digital_surface_grid(4, &torus, 1 << 20).unwrap(),
        &digital_surface_grid(4, &Complement(torus.clone()), 1 << 20).unwrap(),
        pts.into_iter(),
    );
}

#[test]
fn oracle_names_parse() {
    for (spec, dim) in [("circle(0.5)", 2), ("square(1)", 2), ("sphere(0.8)", 3), ("cube(1.5)", 3), ("torus(0.6,0.2)", 3)] {
        let o = ShapeOracle::parse(spec).unwrap();
        assert_eq!(o.dim(), dim);
        assert_eq!(ShapeOracle::parse(&o.name()).unwrap().name(), o.name());
    }
    for bad in ["circle", "blob(1)", "torus(1)", "sphere(x)"] {
        assert!(matches!(ShapeOracle::parse(bad), Err(Error::UnknownShape(_))), "{bad}");
    }
    let sq = ShapeOracle::parse("square(1)").unwrap();
    assert!(sq.inside(&[0.49, -0.49, 0.0]));
    assert!(!sq.inside(&[0.51, 0.0, 0.0]));
    let t = ShapeOracle::parse("torus(0.6,0.2)").unwrap();
    assert!(t.inside(&[0.6, 0.0, 0.1]));
    assert!(!t.inside(&[0.0; 3]));
}

#[test]
fn mesh_oracle_uses_winding_number() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cube.obj");
    std::fs::write(&path, patchwork_core::io::obj_string(&patchwork_core::shapes::cube(0.5))).unwrap();
    let o = ShapeOracle::parse(&format!("mesh({})", path.display())).unwrap();
    assert!(o.inside(&[0.1, 0.2, -0.3]));
    assert!(!o.inside(&[0.6, 0.0, 0.0]));
    assert_eq!(o.dim(), 3);
}

proptest! {
    #[test]
    fn geometric_init_vanishes_at_samples(seed in any::<u64>(), m in 1usize..40) {
        let s = sphere_samples(m, seed);
        let model = geometric_init(&s, DEFAULT_RHO, DEFAULT_BETA).unwrap();
        for x in &s.points {
            prop_assert!(trop(&model, x).abs() < 1e-9);
        }
    }
}
