use std::collections::{HashMap, HashSet, VecDeque};
use std::f64::consts::PI;

use hyperperc_core::hypgeo::{HPoint, Isometry};
use hyperperc_core::tiling::{build_ball, dual_ball, graph_distance, TilingBall};

/// Points deduplicated by disk position.
struct PointIndex {
    buckets: HashMap<(i64, i64), Vec<usize>>,
    points: Vec<HPoint>,
}

impl PointIndex {
    const SCALE: f64 = 1e6;

    fn new() -> Self {
        PointIndex { buckets: HashMap::new(), points: Vec::new() }
    }

    fn key(p: HPoint) -> (i64, i64) {
        let z = p.to_disk();
        ((z.re * Self::SCALE).floor() as i64, (z.im * Self::SCALE).floor() as i64)
    }

    fn find(&self, p: HPoint) -> Option<usize> {
        let (kx, ky) = Self::key(p);
        let z = p.to_disk();
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = self.buckets.get(&(kx + dx, ky + dy)) {
                    for &i in ids {
                        if (self.points[i].to_disk() - z).norm() < 1e-9 {
                            return Some(i);
                        }
                    }
                }
            }
        }
        None
    }

    /// Index of `p`, and whether it was new.
    fn insert(&mut self, p: HPoint) -> (usize, bool) {
        if let Some(i) = self.find(p) {
            return (i, false);
        }
        self.points.push(p);
        let i = self.points.len() - 1;
        self.buckets.entry(Self::key(p)).or_default().push(i);
        (i, true)
    }
}

/// Faces and vertices per layer of the geometric `{p,q}` tiling, grown by
/// rotating faces about their vertices.
fn geometric_layers(p: u32, q: u32, layers: usize) -> (Vec<usize>, Vec<usize>) {
    let circumradius = ((PI / p as f64).tan().recip() * (PI / q as f64).tan().recip()).acosh();
    let base: Vec<HPoint> = (0..p).map(|k| HPoint::new(circumradius, 2.0 * PI * k as f64 / p as f64)).collect();
    let mut centers = PointIndex::new();
    let mut vertices = PointIndex::new();
    centers.insert(HPoint::ORIGIN);
    for &v in &base {
        vertices.insert(v);
    }
    let mut face_counts = vec![1];
    let mut vertex_counts = vec![p as usize];
    let mut frontier = vec![(HPoint::ORIGIN, base)];
    for _ in 1..layers {
        let mut next = Vec::new();
        let mut new_vertices = 0;
        for (c, face) in &frontier {
            for &v in face {
                let t = Isometry::translation_to(v);
                let g = t.compose(&Isometry::rotation(2.0 * PI / q as f64)).compose(&t.inverse());
                let mut center = *c;
                let mut pts = face.clone();
                for _ in 0..q {
                    center = g.apply(center);
                    pts = pts.iter().map(|&x| g.apply(x)).collect();
                    if centers.insert(center).1 {
                        for &x in &pts {
                            if vertices.insert(x).1 {
                                new_vertices += 1;
                            }
                        }
                        next.push((center, pts.clone()));
                    }
                }
            }
        }
        face_counts.push(next.len());
        vertex_counts.push(new_vertices);
        frontier = next;
    }
    (face_counts, vertex_counts)
}

fn histogram(values: &[u32], len: usize) -> Vec<usize> {
    let mut h = vec![0; len];
    for &v in values {
        h[v as usize] += 1;
    }
    h
}

#[test]
fn layer_counts_match_geometric_tiling() {
    for (p, q) in [(3, 7), (4, 5), (5, 4), (7, 3), (3, 8), (6, 4)] {
        let layers = 5;
        let b = build_ball(p, q, layers as u32).unwrap();
        let (faces, vertices) = geometric_layers(p, q, layers);
        assert_eq!(histogram(b.face_layer(), layers), faces, "faces of {{{p},{q}}}");
        assert_eq!(histogram(b.depth(), layers), vertices, "vertices of {{{p},{q}}}");
    }
}

#[test]
fn interior_degrees_and_face_sizes() {
    let b = build_ball(3, 7, 4).unwrap();
    let interior: Vec<usize> = (0..b.vertex_count()).filter(|&v| b.interior_mask()[v]).collect();
    assert!(!interior.is_empty());
    for &v in &interior {
        assert_eq!(b.graph().degree(v), 7);
    }
    // every vertex off the outer ring is interior
    for v in 0..b.vertex_count() {
        assert_eq!(b.interior_mask()[v], b.depth()[v] < 3);
    }
    assert!(b.faces().iter().all(|f| f.len() == 3));
}

#[test]
fn euler_formula_on_balls() {
    for (p, q, l) in [(3, 7, 6), (4, 5, 5), (7, 3, 7), (5, 5, 4)] {
        let b = build_ball(p, q, l).unwrap();
        let chi = b.vertex_count() as i64 - b.edge_count() as i64 + b.face_count() as i64;
        assert_eq!(chi, 1, "{{{p},{q}}} L={l}");
    }
}

#[test]
fn dual_of_37_is_73_like() {
    let b = build_ball(3, 7, 5).unwrap();
    let d = dual_ball(&b);
    let dual = &d.ball;
    assert_eq!((dual.p_gon(), dual.q_deg()), (7, 3));
    assert_eq!(dual.vertex_count(), b.face_count());
    let mut interior = 0;
    for f in 0..dual.vertex_count() {
        if dual.interior_mask()[f] {
            interior += 1;
            assert_eq!(dual.graph().degree(f), 3);
        }
        assert!(dual.graph().degree(f) <= 3);
    }
    assert!(interior > 0);
    assert!(dual.faces().iter().all(|f| f.len() == 7));
    let two_sided = (0..b.edge_count())
        .filter(|&e| matches!(b.edge_faces(e), (Some(_), Some(_))))
        .count();
    assert_eq!(dual.edge_count(), two_sided);
}

#[test]
fn dual_edge_bijection_is_an_involution() {
    let b = build_ball(3, 7, 5).unwrap();
    let d = dual_ball(&b);
    for (de, &e) in d.to_primal.iter().enumerate() {
        assert_eq!(d.to_dual[e as usize], Some(de as u32));
        // e† separates the two faces on the sides of e
        let (l, r) = b.edge_faces(e as usize);
        let (x, y) = d.ball.graph().edge(de);
        let mut ends = [l.unwrap(), r.unwrap()];
        ends.sort();
        assert_eq!([x, y], ends);
    }
    let dd = dual_ball(&d.ball);
    for (dde, &de) in dd.to_primal.iter().enumerate() {
        let e = d.to_primal[de as usize];
        let (x, y) = dd.ball.graph().edge(dde);
        let mut ends = [d.face_vertex[x as usize], d.face_vertex[y as usize]];
        ends.sort();
        assert_eq!(b.graph().edge(e as usize), (ends[0], ends[1]));
    }
    assert!(!dd.to_primal.is_empty());
}

fn bfs_oracle(b: &TilingBall, source: usize) -> Vec<Option<usize>> {
    let mut adj: Vec<HashSet<u32>> = vec![HashSet::new(); b.vertex_count()];
    for face in b.faces() {
        for i in 0..face.len() {
            let (u, v) = (face[i], face[(i + 1) % face.len()]);
            adj[u as usize].insert(v);
            adj[v as usize].insert(u);
        }
    }
    let mut dist = vec![None; b.vertex_count()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if dist[w as usize].is_none() {
                dist[w as usize] = Some(dist[v].unwrap() + 1);
                queue.push_back(w as usize);
            }
        }
    }
    dist
}

#[test]
fn distances_match_bfs_oracle() {
    let b = build_ball(3, 7, 5).unwrap();
    let oracle = bfs_oracle(&b, 0);
    for v in b.boundary_vertices() {
        assert_eq!(graph_distance(&b, 0, v).unwrap() as usize, oracle[v].unwrap());
    }
    for v in (0..b.vertex_count()).step_by(7) {
        assert_eq!(graph_distance(&b, 0, v).unwrap() as usize, oracle[v].unwrap());
    }
}

/// BFS code of the radius-`radius` ball around `root`, starting the rotation
/// at `first`. Neighbor lists are read counterclockwise from the edge each
/// vertex was reached by.
fn ball_code(b: &TilingBall, root: usize, first: u32, radius: u32) -> Vec<u32> {
    let dist = b.graph().bfs_distances(root);
    let mut label = vec![u32::MAX; b.vertex_count()];
    label[root] = 0;
    let mut next = 1;
    let mut code = Vec::new();
    let mut queue = VecDeque::from([(root, first)]);
    while let Some((v, entry)) = queue.pop_front() {
        if dist[v] >= radius {
            continue;
        }
        assert!(b.interior_mask()[v], "vertex {v} near {root} is on the boundary");
        let ring = b.rotation(v);
        let start = ring.iter().position(|&w| w == entry).unwrap();
        for i in 0..ring.len() {
            let w = ring[(start + i) % ring.len()] as usize;
            if label[w] == u32::MAX {
                label[w] = next;
                next += 1;
                queue.push_back((w, v as u32));
            }
            code.push(label[w]);
        }
        code.push(u32::MAX);
    }
    code
}

fn canonical_code(b: &TilingBall, root: usize, radius: u32) -> Vec<u32> {
    b.rotation(root).iter().map(|&w| ball_code(b, root, w, radius)).min().unwrap()
}

#[test]
fn small_balls_look_alike() {
    for (p, q) in [(3, 7), (4, 5), (7, 3)] {
        let b = build_ball(p, q, 6).unwrap();
        let reference = canonical_code(&b, 0, 2);
        let mut checked = 0;
        for v in 0..b.vertex_count() {
            if b.depth()[v] <= 2 {
                assert_eq!(canonical_code(&b, v, 2), reference, "{{{p},{q}}} vertex {v}");
                checked += 1;
            }
        }
        assert!(checked > 10);
    }
}

#[test]
fn boundary_to_volume_ratio_stays_positive() {
    let ratios: Vec<f64> = (2..=6)
        .map(|l| {
            let b = build_ball(3, 7, l).unwrap();
            b.boundary_vertices().len() as f64 / b.vertex_count() as f64
        })
        .collect();
    let floor = 0.5;
    assert!(ratios.iter().all(|&r| r > floor), "{ratios:?}");
    // the ratio settles instead of decaying
    assert!((ratios[4] - ratios[3]).abs() < 0.02, "{ratios:?}");
}
