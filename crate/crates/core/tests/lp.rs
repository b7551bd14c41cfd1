use patchwork_core::extract::{chebyshev_center, Halfspace, LpStatus};
use patchwork_core::Error;
use proptest::prelude::*;

fn hs(n: [f64; 2], o: f64) -> Halfspace {
    Halfspace::new([n[0], n[1], 0.0], o)
}

/// Inscribed radius at `x`: distance to the nearest constraint plane.
fn depth(hs: &[Halfspace], x: &[f64; 3]) -> f64 {
    hs.iter()
        .map(|h| {
            let n = (h.normal[0].powi(2) + h.normal[1].powi(2) + h.normal[2].powi(2)).sqrt();
            -h.eval(x) / n
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn unit_square() {
    let h = [hs([1.0, 0.0], -1.0), hs([-1.0, 0.0], 0.0), hs([0.0, 1.0], -1.0), hs([0.0, -1.0], 0.0)];
    let r = chebyshev_center(&h, 2).unwrap();
    assert_eq!(r.status, LpStatus::Optimal);
    assert!((r.y - 0.5).abs() < 1e-12);
    assert!((r.x[0] - 0.5).abs() < 1e-12 && (r.x[1] - 0.5).abs() < 1e-12);
}

#[test]
fn right_triangle_incenter() {
    // legs 3 and 4: inradius (3 + 4 - 5) / 2 = 1 at (1, 1)
    let h = [hs([-1.0, 0.0], 0.0), hs([0.0, -1.0], 0.0), hs([4.0, 3.0], -12.0)];
    let r = chebyshev_center(&h, 2).unwrap();
    assert!((r.y - 1.0).abs() < 1e-10);
    assert!((r.x[0] - 1.0).abs() < 1e-10 && (r.x[1] - 1.0).abs() < 1e-10);
}

#[test]
fn rectangle_tie_breaks_to_smallest_x() {
    // 4 x 1 box: every center on y = 0.5 with x in [0.5, 3.5] is optimal
    let h = [hs([1.0, 0.0], -4.0), hs([-1.0, 0.0], 0.0), hs([0.0, 1.0], -1.0), hs([0.0, -1.0], 0.0)];
    let r = chebyshev_center(&h, 2).unwrap();
    assert!((r.y - 0.5).abs() < 1e-12);
    assert!((r.x[0] - 0.5).abs() < 1e-12, "{:?}", r.x);
}

#[test]
fn empty_polygon_has_negative_radius() {
    let h = [hs([1.0, 0.0], 1.0), hs([-1.0, 0.0], 1.0), hs([0.0, 1.0], -1.0), hs([0.0, -1.0], -1.0)];
    // x <= -1 and x >= 1
    let r = chebyshev_center(&h, 2).unwrap();
    assert!(r.y < 0.0);
    assert!((r.y + 1.0).abs() < 1e-10);
}

#[test]
fn wedge_is_unbounded() {
    let h = [hs([-1.0, 0.0], 0.0), hs([0.0, -1.0], 0.0)];
    let r = chebyshev_center(&h, 2).unwrap();
    assert_eq!(r.status, LpStatus::Unbounded);
}

#[test]
fn parallel_normals_are_rejected() {
    let h = [hs([1.0, 0.0], -1.0), hs([-1.0, 0.0], 0.0)];
    assert!(matches!(chebyshev_center(&h, 2), Err(Error::NumericalDegeneracy(_))));
}

#[test]
fn cube_3d() {
    let mut h = Vec::new();
    for k in 0..3 {
        let mut n = [0.0; 3];
        n[k] = 1.0;
        h.push(Halfspace::new(n, -2.0));
        n[k] = -1.0;
        h.push(Halfspace::new(n, 0.0));
    }
    let r = chebyshev_center(&h, 3).unwrap();
    assert!((r.y - 1.0).abs() < 1e-12);
    for k in 0..3 {
        assert!((r.x[k] - 1.0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The solver's radius is attained at its center and no grid point of
    /// the box does better.
    #[test]
    fn radius_beats_grid_search(
        raw in prop::collection::vec(
            (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..-0.05).prop_filter("normal too short", |&(a, b, _)| a.hypot(b) > 0.1),
            3..10,
        ),
    ) {
        // negative offsets keep the origin strictly inside, so the region has interior
        let mut h: Vec<Halfspace> = raw.iter().map(|&(a, b, o)| hs([a, b], o)).collect();
        // keep everything inside [-2, 2]^2
        h.extend([hs([1.0, 0.0], -2.0), hs([-1.0, 0.0], -2.0), hs([0.0, 1.0], -2.0), hs([0.0, -1.0], -2.0)]);
        let r = chebyshev_center(&h, 2).unwrap();
        prop_assert_eq!(r.status, LpStatus::Optimal);
        prop_assert!((depth(&h, &r.x) - r.y).abs() < 1e-8);
        let mut best = f64::NEG_INFINITY;
        let steps = 200;
        for i in 0..=steps {
            for j in 0..=steps {
                let x = [-2.0 + 4.0 * i as f64 / steps as f64, -2.0 + 4.0 * j as f64 / steps as f64, 0.0];
                best = best.max(depth(&h, &x));
            }
        }
        prop_assert!(best <= r.y + 1e-9);
        // grid resolution bounds how far below the optimum the search can land
        prop_assert!(r.y - best < 4.0 / steps as f64 * 1.5);
    }
}
