//! Hyperbolic Voronoi tessellations and Delaunay graphs.
//!
//! The hyperbolic Delaunay complex of a point set is the subcomplex of the
//! Euclidean Delaunay triangulation of its Poincaré images made of the
//! triangles whose circumdisk lies inside the open unit disk. Voronoi vertices
//! are the hyperbolic circumcenters of those triangles.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use spade::{DelaunayTriangulation, HasPosition, Point2, Triangulation};
use thiserror::Error;

use crate::graph::Graph;
use crate::hypgeo::{circumcenter, dist_to_segment, Circumcenter, GeodesicPolygon, HPoint};
use crate::pointprocess::{Color, ColoredPointSet};

/// Default gap between the sampling radius and the statistics window.
pub const DEFAULT_MARGIN: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VoronoiError {
    #[error("need at least 3 nuclei, got {0}")]
    TooFewPoints(usize),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("cell {0} is not interior")]
    NotInterior(usize),
    #[error("invalid window: {0}")]
    InvalidWindow(String),
}

/// Statistics window inside a sampling ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    r_sample: f64,
    r_window: f64,
}

impl Window {
    pub fn new(r_sample: f64, r_window: f64) -> Result<Self, VoronoiError> {
        if !(r_window > 0.0 && r_window < r_sample) {
            return Err(VoronoiError::InvalidWindow(format!(
                "need 0 < R_window < R_sample, got R_window={r_window}, R_sample={r_sample}"
            )));
        }
        Ok(Window { r_sample, r_window })
    }

    /// Window of radius `r_window` with the default margin.
    pub fn with_default_margin(r_window: f64) -> Result<Self, VoronoiError> {
        Window::new(r_window + DEFAULT_MARGIN, r_window)
    }

    pub fn r_sample(&self) -> f64 {
        self.r_sample
    }

    pub fn r_window(&self) -> f64 {
        self.r_window
    }

    pub fn margin(&self) -> f64 {
        self.r_sample - self.r_window
    }
}

/// A Voronoi vertex: the circumcenter of a hyperbolic Delaunay triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoronoiVertex {
    pub point: HPoint,
    /// Common distance to the three nuclei.
    pub radius: f64,
    /// Incident nuclei, counterclockwise.
    pub nuclei: [u32; 3],
}

impl VoronoiVertex {
    /// Number of Voronoi edges at this vertex; one per Delaunay edge of the
    /// dual triangle.
    pub fn degree(&self) -> usize {
        3
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorFilter {
    White,
    Black,
    Any,
}

impl ColorFilter {
    fn admits(self, c: Color) -> bool {
        match self {
            ColorFilter::White => c == Color::White,
            ColorFilter::Black => c == Color::Black,
            ColorFilter::Any => true,
        }
    }
}

/// Subgraph of the Delaunay graph on the nuclei admitted by a filter.
/// `graph` uses local indices; `members[local]` is the nucleus index.
#[derive(Debug, Clone)]
pub struct CellGraph {
    pub members: Vec<u32>,
    pub graph: Graph,
}

#[derive(Debug, Clone)]
pub struct VoronoiComplex {
    points: ColoredPointSet,
    triangles: Vec<[u32; 3]>,
    delaunay_edges: Vec<(u32, u32)>,
    voronoi_vertices: Vec<VoronoiVertex>,
    /// Counterclockwise Voronoi vertex ids around each nucleus, when the
    /// fan of kept triangles closes up.
    cell_vertices: Vec<Option<Vec<u32>>>,
    cells: Vec<Option<GeodesicPolygon>>,
    interior_mask: Vec<bool>,
    graph: Graph,
}

#[derive(Clone, Copy)]
struct Site {
    pos: Point2<f64>,
    index: u32,
}

impl HasPosition for Site {
    type Scalar = f64;
    fn position(&self) -> Point2<f64> {
        self.pos
    }
}

/// Euclidean circumdisk of a triangle is inside the open unit disk.
fn circumdisk_in_unit_disk(a: Complex64, b: Complex64, c: Complex64) -> bool {
    let d = 2.0 * (a.re * (b.im - c.im) + b.re * (c.im - a.im) + c.re * (a.im - b.im));
    if d == 0.0 {
        return false;
    }
    let (na, nb, nc) = (a.norm_sqr(), b.norm_sqr(), c.norm_sqr());
    let ux = (na * (b.im - c.im) + nb * (c.im - a.im) + nc * (a.im - b.im)) / d;
    let uy = (na * (c.re - b.re) + nb * (a.re - c.re) + nc * (b.re - a.re)) / d;
    let u = Complex64::new(ux, uy);
    u.norm() + (u - a).norm() < 1.0
}

/// Builds the hyperbolic Delaunay/Voronoi complex of a point set.
pub fn delaunay(points: ColoredPointSet) -> Result<VoronoiComplex, VoronoiError> {
    let n = points.len();
    if n < 3 {
        return Err(VoronoiError::TooFewPoints(n));
    }
    let disk: Vec<Complex64> = points.nuclei().iter().map(|x| x.to_disk()).collect();
    let sites: Vec<Site> = disk
        .iter()
        .enumerate()
        .map(|(i, z)| Site { pos: Point2::new(z.re, z.im), index: i as u32 })
        .collect();
    let tri: DelaunayTriangulation<Site> = DelaunayTriangulation::bulk_load(sites)
        .map_err(|e| VoronoiError::DegenerateInput(format!("{e:?}")))?;
    if tri.num_vertices() < n {
        return Err(VoronoiError::DegenerateInput("duplicate nuclei".into()));
    }

    let mut triangles = Vec::new();
    let mut voronoi_vertices = Vec::new();
    for face in tri.inner_faces() {
        let [a, b, c] = face.vertices().map(|v| v.data().index);
        if !circumdisk_in_unit_disk(disk[a as usize], disk[b as usize], disk[c as usize]) {
            continue;
        }
        let nuc = points.nuclei();
        match circumcenter(nuc[a as usize], nuc[b as usize], nuc[c as usize]) {
            Ok(Circumcenter::Center(point, radius)) => {
                triangles.push([a, b, c]);
                voronoi_vertices.push(VoronoiVertex { point, radius, nuclei: [a, b, c] });
            }
            // numerically on the fence between bounded and unbounded
            Ok(Circumcenter::Unbounded) => {}
            Err(e) => return Err(VoronoiError::DegenerateInput(e.to_string())),
        }
    }
    // canonical order independent of the triangulator's internal layout
    let mut order: Vec<usize> = (0..triangles.len()).collect();
    let canon = |t: &[u32; 3]| {
        let k = (0..3).min_by_key(|&k| t[k]).unwrap();
        [t[k], t[(k + 1) % 3], t[(k + 2) % 3]]
    };
    order.sort_by_key(|&i| canon(&triangles[i]));
    let triangles: Vec<[u32; 3]> = order.iter().map(|&i| canon(&triangles[i])).collect();
    let voronoi_vertices: Vec<VoronoiVertex> = order
        .iter()
        .zip(&triangles)
        .map(|(&i, t)| VoronoiVertex { nuclei: *t, ..voronoi_vertices[i] })
        .collect();

    let mut delaunay_edges: Vec<(u32, u32)> = triangles
        .iter()
        .flat_map(|t| (0..3).map(move |k| (t[k].min(t[(k + 1) % 3]), t[k].max(t[(k + 1) % 3]))))
        .collect();
    delaunay_edges.sort_unstable();
    delaunay_edges.dedup();

    // fan of kept triangles around each nucleus: for triangle (i, a, b)
    // counterclockwise, the next triangle around i starts with b
    let mut fans: Vec<Vec<(u32, u32, u32)>> = vec![Vec::new(); n];
    for (t, tri) in triangles.iter().enumerate() {
        for k in 0..3 {
            fans[tri[k] as usize].push((tri[(k + 1) % 3], tri[(k + 2) % 3], t as u32));
        }
    }
    let r_cut = points.radius() - 1.0;
    let mut cell_vertices = Vec::with_capacity(n);
    let mut cells = Vec::with_capacity(n);
    let mut interior_mask = Vec::with_capacity(n);
    for fan in &fans {
        let ring = close_fan(fan);
        let interior = ring
            .as_ref()
            .is_some_and(|r| r.iter().all(|&v| voronoi_vertices[v as usize].point.rho() <= r_cut));
        let cell = match (&ring, interior) {
            (Some(r), true) => {
                GeodesicPolygon::new(r.iter().map(|&v| voronoi_vertices[v as usize].point).collect()).ok()
            }
            _ => None,
        };
        interior_mask.push(interior && cell.is_some());
        cells.push(cell);
        cell_vertices.push(ring);
    }

    let graph = Graph::new(n, delaunay_edges.clone());
    Ok(VoronoiComplex {
        points,
        triangles,
        delaunay_edges,
        voronoi_vertices,
        cell_vertices,
        cells,
        interior_mask,
        graph,
    })
}

/// Orders a fan `(a, b, tri)` into a cycle; `None` if it does not close.
fn close_fan(fan: &[(u32, u32, u32)]) -> Option<Vec<u32>> {
    if fan.len() < 3 {
        return None;
    }
    let next: HashMap<u32, (u32, u32)> = fan.iter().map(|&(a, b, t)| (a, (b, t))).collect();
    if next.len() != fan.len() {
        return None;
    }
    let start = fan[0].0;
    let mut cur = start;
    let mut ring = Vec::with_capacity(fan.len());
    for _ in 0..fan.len() {
        let &(b, t) = next.get(&cur)?;
        ring.push(t);
        cur = b;
    }
    (cur == start).then_some(ring)
}

impl VoronoiComplex {
    pub fn points(&self) -> &ColoredPointSet {
        &self.points
    }

    pub fn nuclei(&self) -> &[HPoint] {
        self.points.nuclei()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Kept (hyperbolic) Delaunay triangles, counterclockwise.
    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    /// Sorted `(i, j)` pairs with `i < j`.
    pub fn delaunay_edges(&self) -> &[(u32, u32)] {
        &self.delaunay_edges
    }

    pub fn voronoi_vertices(&self) -> &[VoronoiVertex] {
        &self.voronoi_vertices
    }

    pub fn interior_mask(&self) -> &[bool] {
        &self.interior_mask
    }

    /// Delaunay graph over all nuclei; edge ids follow `delaunay_edges`.
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// Voronoi vertex ids around nucleus `i`, counterclockwise, if its fan of
    /// Delaunay triangles is complete.
    pub fn cell_vertex_ids(&self, i: usize) -> Option<&[u32]> {
        self.cell_vertices[i].as_deref()
    }

    /// Largest distance from the origin over the cell's vertices; infinite
    /// for cells whose fan is open. Cells are convex, so this bounds the cell.
    pub fn cell_max_rho(&self, i: usize) -> f64 {
        match &self.cell_vertices[i] {
            Some(ring) => ring
                .iter()
                .map(|&v| self.voronoi_vertices[v as usize].point.rho())
                .fold(0.0, f64::max),
            None => f64::INFINITY,
        }
    }

    /// Nucleus of the cell containing the origin.
    pub fn origin_cell(&self) -> usize {
        self.nuclei()
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.rho().total_cmp(&b.1.rho()))
            .map(|(i, _)| i)
            .expect("complex has at least 3 nuclei")
    }

    /// Cells meeting the closed ball of radius `r` about the origin.
    pub fn cells_meeting_ball(&self, r: f64) -> Vec<bool> {
        let o = self.origin_cell();
        let nuclei = self.nuclei();
        // a cell meeting the ball at y has dist(y, x) ≤ dist(y, x_o)
        let reach = 2.0 * r + nuclei[o].rho();
        let mut meets = vec![false; self.len()];
        meets[o] = true;
        for i in 0..self.len() {
            if i == o || nuclei[i].rho() > reach {
                continue;
            }
            meets[i] = match &self.cell_vertices[i] {
                Some(ring) => (0..ring.len()).any(|k| {
                    let a = self.voronoi_vertices[ring[k] as usize].point;
                    let b = self.voronoi_vertices[ring[(k + 1) % ring.len()] as usize].point;
                    dist_to_segment(HPoint::ORIGIN, a, b) <= r
                }),
                None => nuclei[i].rho() <= r,
            };
        }
        meets
    }

    pub fn cell_polygon(&self, i: usize) -> Result<&GeodesicPolygon, VoronoiError> {
        match (&self.cells[i], self.interior_mask[i]) {
            (Some(poly), true) => Ok(poly),
            _ => Err(VoronoiError::NotInterior(i)),
        }
    }

    /// Delaunay subgraph on the nuclei passing `filter`.
    pub fn adjacency_graph(&self, filter: ColorFilter) -> CellGraph {
        let colors = self.points.colors();
        let mut local = vec![u32::MAX; self.len()];
        let mut members = Vec::new();
        for (i, c) in colors.iter().enumerate() {
            if filter.admits(*c) {
                local[i] = members.len() as u32;
                members.push(i as u32);
            }
        }
        let edges = self
            .delaunay_edges
            .iter()
            .filter(|(a, b)| local[*a as usize] != u32::MAX && local[*b as usize] != u32::MAX)
            .map(|&(a, b)| (local[a as usize], local[b as usize]))
            .collect();
        let graph = Graph::new(members.len(), edges);
        CellGraph { members, graph }
    }

    /// Text form with `NUCLEI`, `EDGES`, and `VERTICES` sections.
    ///
    /// ```text
    /// #voronoi v1 lambda=<f> p=<f> R=<f> seed=<u64> nuclei=<n> edges=<m> vertices=<k>
    /// NUCLEI
    /// <rho> <theta> <W|B> <interior 0|1>
    /// EDGES
    /// <i> <j>
    /// VERTICES
    /// <rho> <theta> <radius> <a> <b> <c>
    /// ```
    pub fn to_text(&self) -> String {
        let p = &self.points;
        let mut out = String::new();
        writeln!(
            out,
            "#voronoi v1 lambda={} p={} R={} seed={} nuclei={} edges={} vertices={}",
            p.lambda(),
            p.p(),
            p.radius(),
            p.seed(),
            p.len(),
            self.delaunay_edges.len(),
            self.voronoi_vertices.len()
        )
        .unwrap();
        out.push_str("NUCLEI\n");
        for ((x, c), interior) in p.nuclei().iter().zip(p.colors()).zip(&self.interior_mask) {
            let sym = if *c == Color::White { 'W' } else { 'B' };
            writeln!(out, "{:.16e} {:.16e} {} {}", x.rho(), x.theta(), sym, u8::from(*interior)).unwrap();
        }
        out.push_str("EDGES\n");
        for (a, b) in &self.delaunay_edges {
            writeln!(out, "{a} {b}").unwrap();
        }
        out.push_str("VERTICES\n");
        for v in &self.voronoi_vertices {
            writeln!(
                out,
                "{:.16e} {:.16e} {:.16e} {} {} {}",
                v.point.rho(),
                v.point.theta(),
                v.radius,
                v.nuclei[0],
                v.nuclei[1],
                v.nuclei[2]
            )
            .unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypgeo::{dist, polygon_area};
    use std::f64::consts::TAU;

    fn set(points: Vec<HPoint>, radius: f64) -> ColoredPointSet {
        let colors = vec![Color::White; points.len()];
        ColoredPointSet::new(points, colors, 1.0, 1.0, radius, 0).unwrap()
    }

    #[test]
    fn symmetric_triple() {
        let pts = (0..3).map(|k| HPoint::new(1.0, TAU * k as f64 / 3.0)).collect();
        let v = delaunay(set(pts, 2.0)).unwrap();
        assert_eq!(v.triangles().len(), 1);
        assert_eq!(v.voronoi_vertices().len(), 1);
        assert!(v.voronoi_vertices()[0].point.rho() < 1e-12);
        assert_eq!(v.delaunay_edges(), &[(0, 1), (0, 2), (1, 2)]);
        for i in 0..3 {
            assert_eq!(v.cell_polygon(i), Err(VoronoiError::NotInterior(i)));
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            delaunay(set(vec![HPoint::ORIGIN, HPoint::new(1.0, 0.0)], 2.0)),
            Err(VoronoiError::TooFewPoints(2))
        ));
        let dup = vec![HPoint::new(1.0, 0.5), HPoint::new(1.0, 0.5), HPoint::new(0.5, 2.0), HPoint::new(0.7, 4.0)];
        assert!(matches!(delaunay(set(dup, 2.0)), Err(VoronoiError::DegenerateInput(_))));
        assert!(Window::new(5.0, 6.0).is_err());
        assert_eq!(Window::with_default_margin(5.0).unwrap().margin(), 2.0);
    }

    #[test]
    fn hexagonal_flower_has_one_closed_cell() {
        let mut pts = vec![HPoint::ORIGIN];
        pts.extend((0..6).map(|k| HPoint::new(1.0, TAU * k as f64 / 6.0)));
        let v = delaunay(set(pts, 4.0)).unwrap();
        assert!(v.interior_mask()[0]);
        let poly = v.cell_polygon(0).unwrap();
        assert_eq!(poly.len(), 6);
        assert!(poly.contains_convex(HPoint::ORIGIN));
        assert!(polygon_area(poly).unwrap() > 0.0);
        assert_eq!(v.origin_cell(), 0);
        for vv in v.voronoi_vertices() {
            let [a, b, c] = vv.nuclei.map(|i| v.nuclei()[i as usize]);
            assert!((dist(vv.point, a) - dist(vv.point, b)).abs() < 1e-10);
            assert!((dist(vv.point, a) - dist(vv.point, c)).abs() < 1e-10);
        }
    }

    #[test]
    fn color_filters() {
        let s = ColoredPointSet::sample(1.0, 1.0, 3.0, 4).unwrap();
        let v = delaunay(s).unwrap();
        let any = v.adjacency_graph(ColorFilter::Any);
        let white = v.adjacency_graph(ColorFilter::White);
        assert_eq!(any.members, white.members);
        assert_eq!(any.graph, white.graph);
        assert_eq!(v.adjacency_graph(ColorFilter::Black).members.len(), 0);
    }

    #[test]
    fn text_sections() {
        let v = delaunay(ColoredPointSet::sample(1.0, 0.5, 2.0, 8).unwrap()).unwrap();
        let text = v.to_text();
        assert!(text.starts_with("#voronoi v1 lambda=1 p=0.5 R=2 seed=8"));
        let lines: Vec<&str> = text.lines().collect();
        let at = |s: &str| lines.iter().position(|l| *l == s).unwrap();
        assert_eq!(at("EDGES") - at("NUCLEI") - 1, v.len());
        assert_eq!(at("VERTICES") - at("EDGES") - 1, v.delaunay_edges().len());
        assert_eq!(lines.len() - at("VERTICES") - 1, v.voronoi_vertices().len());
    }
}
