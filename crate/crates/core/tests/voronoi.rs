use std::collections::{BTreeSet, VecDeque};
use std::f64::consts::TAU;

use hyperperc_core::graph::UnionFind;
use hyperperc_core::hypgeo::{ball_area, dist, polygon_area, HPoint};
use hyperperc_core::hypvoronoi::{delaunay, ColorFilter};
use hyperperc_core::pointprocess::{sample_poisson_ball, Color, ColoredPointSet};
use hyperperc_core::rng::Seed;
use num_complex::Complex64;

/// Brute-force hyperbolic Delaunay edges: a triple is a face iff the
/// Euclidean circle through its disk images lies in the unit disk and has
/// no other image strictly inside.
pub fn brute_force_edges(points: &[HPoint]) -> BTreeSet<(u32, u32)> {
    let z: Vec<Complex64> = points.iter().map(|p| p.to_disk()).collect();
    let n = z.len();
    let mut edges = BTreeSet::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let (a, b, c) = (z[i], z[j], z[k]);
                let d = 2.0 * (a.re * (b.im - c.im) + b.re * (c.im - a.im) + c.re * (a.im - b.im));
                if d.abs() < 1e-300 {
                    continue;
                }
                let ux = (a.norm_sqr() * (b.im - c.im) + b.norm_sqr() * (c.im - a.im) + c.norm_sqr() * (a.im - b.im)) / d;
                let uy = (a.norm_sqr() * (c.re - b.re) + b.norm_sqr() * (a.re - c.re) + c.norm_sqr() * (b.re - a.re)) / d;
                let u = Complex64::new(ux, uy);
                let r = (u - a).norm();
                if u.norm() + r >= 1.0 {
                    continue;
                }
                let empty = (0..n).all(|m| m == i || m == j || m == k || (z[m] - u).norm() > r);
                if empty {
                    edges.insert((i as u32, j as u32));
                    edges.insert((i as u32, k as u32));
                    edges.insert((j as u32, k as u32));
                }
            }
        }
    }
    edges
}

#[test]
fn delaunay_matches_brute_force_oracle() {
    for s in 0..50u64 {
        let mut pts = sample_poisson_ball(1.0, 2.3, Seed(1000 + s)).unwrap();
        pts.truncate(30);
        if pts.len() < 3 {
            continue;
        }
        let oracle = brute_force_edges(&pts);
        let colors = vec![Color::White; pts.len()];
        let set = ColoredPointSet::new(pts, colors, 1.0, 1.0, 2.3, s).unwrap();
        let v = delaunay(set).unwrap();
        let got: BTreeSet<(u32, u32)> = v.delaunay_edges().iter().copied().collect();
        assert_eq!(got, oracle, "sample {s}");
    }
}

#[test]
fn voronoi_vertices_have_empty_circumdisks() {
    let v = delaunay(ColoredPointSet::sample(1.0, 0.5, 7.0, 21).unwrap()).unwrap();
    let nuclei = v.nuclei();
    let mut worst = 0.0f64;
    for vv in v.voronoi_vertices() {
        let [a, b, c] = vv.nuclei.map(|i| nuclei[i as usize]);
        let da = dist(vv.point, a);
        worst = worst.max((da - dist(vv.point, b)).abs()).max((da - dist(vv.point, c)).abs());
        for (m, x) in nuclei.iter().enumerate() {
            if vv.nuclei.contains(&(m as u32)) {
                continue;
            }
            assert!(dist(vv.point, *x) > da - 1e-8);
        }
    }
    assert!(worst < 1e-8, "equidistance error {worst}");
}

#[test]
fn interior_cell_count_matches_intensity() {
    let expected = ball_area(5.0);
    let total: usize = (0..50u64)
        .map(|s| {
            let v = delaunay(ColoredPointSet::sample(1.0, 0.5, 7.0, 500 + s).unwrap()).unwrap();
            (0..v.len()).filter(|&i| v.interior_mask()[i] && v.nuclei()[i].rho() <= 5.0).count()
        })
        .sum();
    let mean = total as f64 / 50.0;
    assert!((mean - expected).abs() < 0.1 * expected, "{mean} vs {expected}");
}

#[test]
fn interior_cells_tile_the_window() {
    let expected = ball_area(5.0);
    let mut sum = 0.0;
    let reps = 10;
    for s in 0..reps {
        let v = delaunay(ColoredPointSet::sample(1.0, 0.5, 7.0, 900 + s).unwrap()).unwrap();
        for i in 0..v.len() {
            if v.nuclei()[i].rho() <= 5.0 {
                // a few cells near the window edge are cut by the sampling boundary
                let Ok(poly) = v.cell_polygon(i) else { continue };
                sum += polygon_area(poly).unwrap();
                assert!(poly.contains_convex(v.nuclei()[i]), "nucleus {i} outside its cell");
            }
        }
    }
    let mean = sum / reps as f64;
    assert!((mean - expected).abs() < 0.05 * expected, "{mean} vs {expected}");
}

#[test]
fn structural_invariants() {
    let v = delaunay(ColoredPointSet::sample(1.0, 0.5, 7.0, 3).unwrap()).unwrap();
    // the Delaunay graph is connected on the window; nuclei right at the
    // sampling boundary may have no bounded triangle at all
    let any = v.adjacency_graph(ColorFilter::Any);
    let mut uf = UnionFind::new(v.len());
    for &(a, b) in any.graph.edges() {
        uf.union(any.members[a as usize] as usize, any.members[b as usize] as usize);
    }
    let inner: Vec<usize> = (0..v.len()).filter(|&i| v.nuclei()[i].rho() <= 5.0).collect();
    let root = uf.find(inner[0]);
    assert!(inner.iter().all(|&i| uf.find(i) == root));
    // symmetric, irreflexive adjacency
    let g = v.graph();
    for a in 0..g.vertex_count() {
        for &(b, _) in g.neighbors(a) {
            assert_ne!(a, b as usize);
            assert!(g.neighbors(b as usize).iter().any(|&(x, _)| x as usize == a));
        }
    }
    // interior Voronoi vertices are incident to exactly three cells
    for (id, vv) in v.voronoi_vertices().iter().enumerate() {
        let cells: Vec<usize> = (0..v.len())
            .filter(|&i| v.cell_vertex_ids(i).is_some_and(|r| r.contains(&(id as u32))))
            .collect();
        if vv.nuclei.iter().all(|&i| v.interior_mask()[i as usize]) {
            assert_eq!(cells.len(), 3);
        }
    }
    assert_eq!(euler_defect(v.triangles()), 0);
}

/// `V' − E + F − (2C − B)` for a triangle complex, where `V'` counts
/// vertex corners (one per maximal fan chain), `C` counts edge-connected
/// components and `B` boundary cycles. Zero iff every component is a
/// planar surface with boundary.
fn euler_defect(triangles: &[[u32; 3]]) -> i64 {
    use std::collections::HashMap;
    let mut fan: HashMap<u32, HashMap<u32, u32>> = HashMap::new();
    let mut directed: BTreeSet<(u32, u32)> = BTreeSet::new();
    for t in triangles {
        for k in 0..3 {
            fan.entry(t[k]).or_default().insert(t[(k + 1) % 3], t[(k + 2) % 3]);
            directed.insert((t[k], t[(k + 1) % 3]));
        }
    }
    let mut corners = 0i64;
    for map in fan.values() {
        let targets: BTreeSet<u32> = map.values().copied().collect();
        let starts = map.keys().filter(|x| !targets.contains(x)).count() as i64;
        corners += if starts == 0 { 1 } else { starts };
    }
    let edges: BTreeSet<(u32, u32)> = directed.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    // boundary half-edges have the complex on their left only
    let boundary: Vec<(u32, u32)> = directed.iter().copied().filter(|&(a, b)| !directed.contains(&(b, a))).collect();
    let mut seen: BTreeSet<(u32, u32)> = BTreeSet::new();
    let mut cycles = 0i64;
    for &start in &boundary {
        if seen.contains(&start) {
            continue;
        }
        cycles += 1;
        let mut cur = start;
        loop {
            seen.insert(cur);
            let (a, b) = cur;
            let map = &fan[&b];
            let pred: HashMap<u32, u32> = map.iter().map(|(&x, &y)| (y, x)).collect();
            let mut x = a;
            while let Some(&w) = pred.get(&x) {
                x = w;
            }
            cur = (b, x);
            if cur == start {
                break;
            }
        }
    }
    let mut uf = UnionFind::new(triangles.len());
    let mut by_edge: HashMap<(u32, u32), usize> = HashMap::new();
    for (i, t) in triangles.iter().enumerate() {
        for k in 0..3 {
            let e = (t[k].min(t[(k + 1) % 3]), t[k].max(t[(k + 1) % 3]));
            if let Some(&j) = by_edge.get(&e) {
                uf.union(i, j);
            } else {
                by_edge.insert(e, i);
            }
        }
    }
    let components = uf.set_count() as i64;
    corners - edges.len() as i64 + triangles.len() as i64 - (2 * components - cycles)
}

/// Rasterizes the white region inside a guard ring and flood-fills it.
#[test]
fn white_components_match_raster_flood_fill() {
    for s in 0..6u64 {
        let seed = Seed(77 + s);
        // 10 random nuclei in the ball of radius 1.2 plus 14 black guards at radius 2.2
        let inner = 10;
        let mut pts: Vec<HPoint> = (0..inner)
            .map(|i| {
                let u = seed.uniform(2 * i);
                let w = seed.uniform(2 * i + 1);
                HPoint::new(2.0 * (u.sqrt() * 0.6f64.sinh()).asinh(), TAU * w)
            })
            .collect();
        pts.extend((0..14).map(|k| HPoint::new(2.2, TAU * (k as f64 + 0.5) / 14.0)));
        let mut colors: Vec<Color> = (0..inner)
            .map(|i| if seed.uniform(1000 + i) < 0.5 { Color::White } else { Color::Black })
            .collect();
        colors.extend(std::iter::repeat(Color::Black).take(14));
        let set = ColoredPointSet::new(pts.clone(), colors.clone(), 1.0, 0.5, 2.2, s).unwrap();
        let v = delaunay(set).unwrap();

        let raster_rho: f64 = 2.9;
        for i in 0..inner as usize {
            if colors[i] == Color::White {
                assert!(v.cell_max_rho(i) < raster_rho - 0.05, "white cell {i} leaves the raster region");
            }
        }

        let white = v.adjacency_graph(ColorFilter::White);
        let mut uf = UnionFind::new(pts.len());
        for &(a, b) in white.graph.edges() {
            uf.union(white.members[a as usize] as usize, white.members[b as usize] as usize);
        }

        let res = 900usize;
        let extent = (0.5 * raster_rho).tanh();
        let mut owner = vec![u32::MAX; res * res];
        for iy in 0..res {
            for ix in 0..res {
                let x = -extent + 2.0 * extent * (ix as f64 + 0.5) / res as f64;
                let y = -extent + 2.0 * extent * (iy as f64 + 0.5) / res as f64;
                let Some(q) = HPoint::from_disk(Complex64::new(x, y)) else { continue };
                if q.rho() > raster_rho {
                    continue;
                }
                let nearest = (0..pts.len())
                    .min_by(|&a, &b| dist(q, pts[a]).total_cmp(&dist(q, pts[b])))
                    .unwrap();
                if colors[nearest] == Color::White {
                    owner[iy * res + ix] = nearest as u32;
                }
            }
        }
        let mut comp = vec![usize::MAX; res * res];
        let mut raster_uf = UnionFind::new(pts.len());
        for start in 0..res * res {
            if owner[start] == u32::MAX || comp[start] != usize::MAX {
                continue;
            }
            comp[start] = start;
            let mut queue = VecDeque::from([start]);
            while let Some(c) = queue.pop_front() {
                raster_uf.union(owner[start] as usize, owner[c] as usize);
                let (cx, cy) = (c % res, c / res);
                let mut visit = |nx: usize, ny: usize| {
                    let nb = ny * res + nx;
                    if owner[nb] != u32::MAX && comp[nb] == usize::MAX {
                        comp[nb] = start;
                        queue.push_back(nb);
                    }
                };
                if cx > 0 {
                    visit(cx - 1, cy);
                }
                if cx + 1 < res {
                    visit(cx + 1, cy);
                }
                if cy > 0 {
                    visit(cx, cy - 1);
                }
                if cy + 1 < res {
                    visit(cx, cy + 1);
                }
            }
        }
        for a in 0..inner as usize {
            for b in 0..inner as usize {
                if colors[a] == Color::White && colors[b] == Color::White {
                    assert_eq!(
                        uf.find(a) == uf.find(b),
                        raster_uf.find(a) == raster_uf.find(b),
                        "sample {s}: cells {a}, {b}"
                    );
                }
            }
        }
    }
}

#[test]
fn cells_meeting_the_core_ball_match_sampling() {
    for s in 0..5u64 {
        let v = delaunay(ColoredPointSet::sample(1.0, 0.5, 4.5, 40 + s).unwrap()).unwrap();
        let exact = v.cells_meeting_ball(1.0);
        // nearest nucleus of a fine polar grid over the ball
        let mut hit = vec![false; v.len()];
        let near: Vec<usize> = (0..v.len()).filter(|&i| v.nuclei()[i].rho() < 4.0).collect();
        for i in 0..=150 {
            let rho = i as f64 / 150.0;
            for j in 0..540 {
                let y = HPoint::new(rho, TAU * j as f64 / 540.0);
                let nearest = near
                    .iter()
                    .copied()
                    .min_by(|&a, &b| dist(y, v.nuclei()[a]).total_cmp(&dist(y, v.nuclei()[b])))
                    .unwrap();
                hit[nearest] = true;
            }
        }
        for i in 0..v.len() {
            assert!(!hit[i] || exact[i], "sample {s}: cell {i} missed");
        }
        let extra = (0..v.len()).filter(|&i| exact[i] && !hit[i]).count();
        assert!(extra <= 1, "sample {s}: {extra} cells only graze the ball");
    }
}
