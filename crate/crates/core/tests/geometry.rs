use std::f64::consts::{PI, TAU};

use hyperperc_core::hypgeo::*;
use proptest::prelude::*;

const TOL: f64 = 1e-8;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL * a.abs().max(b.abs()).max(1.0)
}

fn point(max_rho: f64) -> impl Strategy<Value = HPoint> {
    (0.0..max_rho, 0.0..TAU).prop_map(|(r, t)| HPoint::new(r, t))
}

fn isometry() -> impl Strategy<Value = Isometry> {
    (point(3.0), 0.0..TAU, any::<bool>()).prop_map(|(m, a, flip)| {
        let g = Isometry::translation_to(m).compose(&Isometry::rotation(a));
        if flip {
            g.compose(&Isometry::conjugation())
        } else {
            g
        }
    })
}

/// Convex polygon: points at increasing angles on a circle.
fn convex_polygon() -> impl Strategy<Value = Vec<HPoint>> {
    (point(2.0), 0.05..2.5f64, prop::collection::vec(0.2..1.0f64, 3..9), 0.0..TAU).prop_map(|(c, r, gaps, start)| {
        let total: f64 = gaps.iter().sum();
        let mut angle = start;
        let mut out = Vec::new();
        let g = Isometry::translation_to(c);
        for gap in gaps {
            out.push(g.apply(HPoint::new(r, angle)));
            angle += TAU * gap / total;
        }
        out
    })
}

fn minkowski(a: [f64; 3], b: [f64; 3]) -> f64 {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn det3(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])
}

/// Triangle area from hyperboloid lifts:
/// `tan(A/2) = |det(a,b,c)| / (1 + cosh ab + cosh bc + cosh ca)`.
fn triangle_area(a: HPoint, b: HPoint, c: HPoint) -> f64 {
    let (x, y, z) = (a.to_hyperboloid(), b.to_hyperboloid(), c.to_hyperboloid());
    let den = 1.0 - minkowski(x, y) - minkowski(y, z) - minkowski(z, x);
    2.0 * det3(x, y, z).abs().atan2(den)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn distance_is_symmetric(a in point(6.0), b in point(6.0)) {
        prop_assert!(close(dist(a, b), dist(b, a)));
    }

    #[test]
    fn distance_is_isometry_invariant(a in point(4.0), b in point(4.0), g in isometry()) {
        prop_assert!(close(dist(g.apply(a), g.apply(b)), dist(a, b)));
    }

    #[test]
    fn triangle_inequality(a in point(6.0), b in point(6.0), c in point(6.0)) {
        prop_assert!(dist(a, c) <= dist(a, b) + dist(b, c) + TOL);
    }

    #[test]
    fn circumcenter_is_equidistant(a in point(4.0), b in point(4.0), c in point(4.0)) {
        if let Ok(Circumcenter::Center(m, r)) = circumcenter(a, b, c) {
            for x in [a, b, c] {
                prop_assert!(close(dist(m, x), r), "{} vs {}", dist(m, x), r);
            }
        }
    }

    #[test]
    fn circumcenter_moves_with_isometries(a in point(3.0), b in point(3.0), c in point(3.0), g in isometry()) {
        if let Ok(Circumcenter::Center(m, r)) = circumcenter(a, b, c) {
            if let Ok(Circumcenter::Center(gm, gr)) = circumcenter(g.apply(a), g.apply(b), g.apply(c)) {
                prop_assert!(close(r, gr));
                prop_assert!(dist(g.apply(m), gm) <= TOL * r.exp().max(1.0));
            }
        }
    }

    #[test]
    fn area_matches_triangle_subdivision(pts in convex_polygon()) {
        let poly = GeodesicPolygon::new(pts.clone()).unwrap();
        let area = polygon_area(&poly).unwrap();
        let fan: f64 = (1..pts.len() - 1).map(|i| triangle_area(pts[0], pts[i], pts[i + 1])).sum();
        prop_assert!(close(area, fan), "{area} vs {fan}");
        prop_assert!(area < (pts.len() - 2) as f64 * PI);
    }

    #[test]
    fn area_is_isometry_invariant(pts in convex_polygon(), g in isometry()) {
        let area = polygon_area(&GeodesicPolygon::new(pts.clone()).unwrap()).unwrap();
        let mut moved: Vec<HPoint> = pts.iter().map(|&x| g.apply(x)).collect();
        if !g.is_orientation_preserving() {
            moved.reverse();
        }
        let moved = polygon_area(&GeodesicPolygon::new(moved).unwrap()).unwrap();
        prop_assert!(close(area, moved), "{area} vs {moved}");
    }

    #[test]
    fn diagonal_split_is_additive(pts in convex_polygon(), k in 2usize..8) {
        let n = pts.len();
        let k = 2 + k % (n - 2).max(1);
        prop_assume!(k < n);
        let whole = polygon_area(&GeodesicPolygon::new(pts.clone()).unwrap()).unwrap();
        let left = GeodesicPolygon::new(pts[..=k].to_vec()).unwrap();
        let mut right = vec![pts[0]];
        right.extend_from_slice(&pts[k..]);
        let mut parts = polygon_area(&left).unwrap();
        if right.len() >= 3 {
            parts += polygon_area(&GeodesicPolygon::new(right).unwrap()).unwrap();
        }
        prop_assert!(close(whole, parts), "{whole} vs {parts}");
    }
}

#[test]
fn subdivision_oracle_on_known_triangle() {
    // ideal-ish equilateral triangles approach area π
    let big: Vec<HPoint> = (0..3).map(|k| HPoint::new(11.0, TAU * k as f64 / 3.0)).collect();
    assert!((triangle_area(big[0], big[1], big[2]) - PI).abs() < 1e-3);
    let area = polygon_area(&GeodesicPolygon::new(big).unwrap()).unwrap();
    assert!((area - PI).abs() < 1e-3);
}
