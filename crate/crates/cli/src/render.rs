//! SVG 1.1 rendering of tessellations, tilings and phase tables.
//!
//! Everything is drawn in the Poincaré disk; geodesics are circular arcs
//! orthogonal to the unit circle.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::fmt::Write;

use hyperperc_core::graph::Graph;
use hyperperc_core::hypgeo::{dist, HPoint, Isometry};
use hyperperc_core::hypvoronoi::VoronoiComplex;
use hyperperc_core::percolation::{label_clusters, Marks};
use hyperperc_core::pointprocess::{Color, ColoredPointSet};
use hyperperc_core::tiling::TilingBall;
use num_complex::Complex64;

use crate::phase::PhaseLabel;

const SIZE: f64 = 800.0;
const CENTER: f64 = 400.0;
const SCALE: f64 = 390.0;
const PALETTE: [&str; 10] =
    ["#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4", "#42d4f4", "#f032e6", "#9a6324", "#800000", "#469990"];

fn header(out: &mut String, width: f64, height: f64) {
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    );
}

fn screen(z: Complex64) -> (f64, f64) {
    (CENTER + SCALE * z.re, CENTER - SCALE * z.im)
}

fn fmt_pt(z: Complex64) -> String {
    let (x, y) = screen(z);
    format!("{x:.3},{y:.3}")
}

fn disk_boundary(out: &mut String) {
    let _ = writeln!(
        out,
        "<circle class=\"disk\" cx=\"{CENTER}\" cy=\"{CENTER}\" r=\"{SCALE}\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1.5\"/>"
    );
}

/// Path command drawing the geodesic from `a` to `b` (either may be ideal).
fn geodesic_to(a: Complex64, b: Complex64) -> String {
    let det = 4.0 * (a.re * b.im - a.im * b.re);
    let (ka, kb) = (a.norm_sqr() + 1.0, b.norm_sqr() + 1.0);
    if det.abs() > 1e-9 {
        let c = Complex64::new((ka * 2.0 * b.im - 2.0 * a.im * kb) / det, (2.0 * a.re * kb - 2.0 * b.re * ka) / det);
        let r = (c - a).norm();
        if r < 1e4 {
            let cross = (a - c).re * (b - c).im - (a - c).im * (b - c).re;
            let sweep = if cross > 0.0 { 0 } else { 1 };
            return format!(" A {:.3} {:.3} 0 0 {} {}", r * SCALE, r * SCALE, sweep, fmt_pt(b));
        }
    }
    format!(" L {}", fmt_pt(b))
}

/// Counterclockwise arc of the unit circle from `a` to `b`.
fn boundary_arc_to(a: Complex64, b: Complex64) -> String {
    let span = (b.arg() - a.arg()).rem_euclid(TAU);
    let large = if span > PI { 1 } else { 0 };
    format!(" A {SCALE} {SCALE} 0 {large} 0 {}", fmt_pt(b))
}

/// Ideal endpoint of the bisector of `x` and `y` on the side of line `xy`
/// away from `z`.
fn bisector_end(x: HPoint, y: HPoint, z: HPoint) -> Complex64 {
    let to_x = Isometry::translation_to(x);
    let h = to_x.inverse();
    let (y1, z1) = (h.apply(y), h.apply(z));
    let phi = y1.theta();
    let k = Isometry::translation_to(HPoint::new(0.5 * y1.rho(), phi));
    let side = (z1.to_disk() * Complex64::from_polar(1.0, -phi)).im;
    let dir = if side > 0.0 { phi - 0.5 * PI } else { phi + 0.5 * PI };
    let e = to_x.apply_disk(k.apply_disk(Complex64::from_polar(1.0, dir)));
    e / e.norm()
}

/// Boundary path of cell `i`, or `None` when its fan of Delaunay triangles
/// is empty or splits into several chains.
fn cell_path(v: &VoronoiComplex, fans: &[Vec<(u32, u32, u32)>], i: usize) -> Option<String> {
    let verts = v.voronoi_vertices();
    let pos = |t: u32| verts[t as usize].point.to_disk();
    if let Some(ring) = v.cell_vertex_ids(i) {
        let mut d = format!("M {}", fmt_pt(pos(ring[0])));
        for k in 0..ring.len() {
            d.push_str(&geodesic_to(pos(ring[k]), pos(ring[(k + 1) % ring.len()])));
        }
        d.push_str(" Z");
        return Some(d);
    }
    let fan = &fans[i];
    if fan.is_empty() {
        return None;
    }
    let next: HashMap<u32, (u32, u32)> = fan.iter().map(|&(a, b, t)| (a, (b, t))).collect();
    let starts: Vec<u32> = fan.iter().map(|e| e.0).filter(|a| !fan.iter().any(|e| e.1 == *a)).collect();
    if starts.len() != 1 {
        return None;
    }
    let nuclei = v.nuclei();
    let first = starts[0];
    let (mut cur, mut chain, mut last_a) = (first, Vec::new(), first);
    while let Some(&(b, t)) = next.get(&cur) {
        chain.push(t);
        last_a = cur;
        cur = b;
    }
    if chain.len() != fan.len() {
        return None;
    }
    let x = nuclei[i];
    let first_third = next[&first].0;
    let start = bisector_end(x, nuclei[first as usize], nuclei[first_third as usize]);
    let end = bisector_end(x, nuclei[cur as usize], nuclei[last_a as usize]);
    let mut d = format!("M {}", fmt_pt(start));
    let mut prev = start;
    for &t in &chain {
        d.push_str(&geodesic_to(prev, pos(t)));
        prev = pos(t);
    }
    d.push_str(&geodesic_to(prev, end));
    d.push_str(&boundary_arc_to(end, start));
    d.push_str(" Z");
    Some(d)
}

fn fans(v: &VoronoiComplex) -> Vec<Vec<(u32, u32, u32)>> {
    let mut fans = vec![Vec::new(); v.len()];
    for (t, tri) in v.triangles().iter().enumerate() {
        for k in 0..3 {
            fans[tri[k] as usize].push((tri[(k + 1) % 3], tri[(k + 2) % 3], t as u32));
        }
    }
    fans
}

/// Cluster stroke colors: boundary-reaching clusters of either color
/// inside the window get palette entries in order of first cell.
fn cluster_strokes(v: &VoronoiComplex, r_window: f64) -> Vec<Option<&'static str>> {
    let n = v.len();
    let active: Vec<bool> = v.nuclei().iter().map(|x| x.rho() <= r_window).collect();
    let shell: Vec<bool> = (0..n).map(|i| active[i] && v.cell_max_rho(i) > r_window).collect();
    let mut strokes = vec![None; n];
    let mut next = 0;
    for color in [Color::White, Color::Black] {
        let open: Vec<bool> = (0..n).map(|i| active[i] && v.points().colors()[i] == color).collect();
        let labels = label_clusters(v.graph(), Marks::Sites(&open));
        let reaching = labels.boundary_reaching(&shell);
        let mut slot = HashMap::new();
        for l in reaching {
            slot.insert(l, PALETTE[next % PALETTE.len()]);
            next += 1;
        }
        for i in 0..n {
            if let Some(l) = labels.label(i) {
                if let Some(&c) = slot.get(&l) {
                    strokes[i] = Some(c);
                }
            }
        }
    }
    strokes
}

/// Cells in white/black, window cells outlined by cluster. Point sets too
/// small for a tessellation draw only the disk and nuclei.
pub fn render_voronoi(set: &ColoredPointSet, complex: Option<&VoronoiComplex>, r_window: f64) -> String {
    let mut out = String::new();
    header(&mut out, SIZE, SIZE);
    let _ = writeln!(out, "<rect width=\"{SIZE}\" height=\"{SIZE}\" fill=\"#f4f4f4\"/>");
    if let Some(v) = complex {
        let fans = fans(v);
        let strokes = cluster_strokes(v, r_window);
        out.push_str("<g class=\"cells\">\n");
        for i in 0..v.len() {
            let Some(d) = cell_path(v, &fans, i) else { continue };
            let white = v.points().colors()[i] == Color::White;
            let fill = if white { "#ffffff" } else { "#303030" };
            let inside = v.nuclei()[i].rho() <= r_window;
            let (stroke, width) = match strokes[i] {
                Some(c) => (c, 1.2),
                None => ("#8c8c8c", 0.3),
            };
            let opacity = if inside { "1" } else { "0.6" };
            let _ = writeln!(
                out,
                "<path class=\"cell {}\" d=\"{d}\" fill=\"{fill}\" fill-opacity=\"{opacity}\" stroke=\"{stroke}\" stroke-width=\"{width}\"/>",
                if white { "white" } else { "black" }
            );
        }
        out.push_str("</g>\n");
    }
    out.push_str("<g class=\"nuclei\">\n");
    for (x, c) in set.nuclei().iter().zip(set.colors()) {
        let (px, py) = screen(x.to_disk());
        let r = (1.0 - x.disk_radius().powi(2)) * 2.0;
        if r < 0.05 {
            continue;
        }
        let fill = if *c == Color::White { "#1f77b4" } else { "#ff7f0e" };
        let _ = writeln!(out, "<circle cx=\"{px:.3}\" cy=\"{py:.3}\" r=\"{r:.3}\" fill=\"{fill}\"/>");
    }
    out.push_str("</g>\n");
    disk_boundary(&mut out);
    out.push_str("</svg>\n");
    out
}

/// Positions of the vertices of a tiling ball: the central face is a
/// regular polygon about the origin and every other vertex is placed from
/// a placed neighbor by the rotation system.
pub fn embed_tiling(b: &TilingBall) -> Vec<HPoint> {
    let (p, q) = (b.p_gon() as f64, b.q_deg() as f64);
    let rc = ((PI / p).tan().recip() * (PI / q).tan().recip()).acosh();
    let face0 = &b.faces()[0];
    let mut pos: Vec<Option<HPoint>> = vec![None; b.vertex_count()];
    for (k, &v) in face0.iter().enumerate() {
        pos[v as usize] = Some(HPoint::new(rc, TAU * k as f64 / p));
    }
    let edge = dist(HPoint::new(rc, 0.0), HPoint::new(rc, TAU / p));
    let step = TAU / q;
    let place = |pos: &[Option<HPoint>], v: usize, iu: usize, iw: usize, sign: f64| -> HPoint {
        let u = pos[b.rotation(v)[iu] as usize].unwrap();
        let to_v = Isometry::translation_to(pos[v].unwrap());
        let phi = to_v.inverse().apply(u).theta();
        to_v.apply(HPoint::new(edge, phi + sign * (iw as f64 - iu as f64) * step))
    };
    // orientation of the rotation system relative to the central face
    let v0 = face0[0] as usize;
    let rot0 = b.rotation(v0);
    let iu = rot0.iter().position(|&w| w == face0[1]).expect("face neighbor");
    let iw = rot0.iter().position(|&w| w == face0[face0.len() - 1]).expect("face neighbor");
    let target = pos[face0[face0.len() - 1] as usize].unwrap();
    let sign = if dist(place(&pos, v0, iu, iw, 1.0), target) < dist(place(&pos, v0, iu, iw, -1.0), target) {
        1.0
    } else {
        -1.0
    };
    let mut queue: std::collections::VecDeque<usize> = face0.iter().map(|&v| v as usize).collect();
    while let Some(v) = queue.pop_front() {
        let rot = b.rotation(v);
        let Some(iu) = rot.iter().position(|&w| pos[w as usize].is_some()) else { continue };
        for (iw, &w) in rot.iter().enumerate() {
            if pos[w as usize].is_none() {
                pos[w as usize] = Some(place(&pos, v, iu, iw, sign));
                queue.push_back(w as usize);
            }
        }
    }
    pos.into_iter().map(|x| x.unwrap_or(HPoint::ORIGIN)).collect()
}

/// Edges of a tiling ball as geodesic arcs; open edges are dark, and open
/// edges of boundary-reaching clusters meeting the core use palette colors.
pub fn render_tiling(b: &TilingBall, open: &[bool]) -> String {
    let pos = embed_tiling(b);
    let graph: &Graph = b.graph();
    let labels = label_clusters(graph, Marks::Bonds(open));
    let top = b.max_depth();
    let shell: Vec<bool> = b.depth().iter().map(|&d| d == top).collect();
    let reaching = labels.boundary_reaching(&shell);
    let slot: HashMap<u32, &str> =
        reaching.iter().enumerate().map(|(k, &l)| (l, PALETTE[k % PALETTE.len()])).collect();
    let mut out = String::new();
    header(&mut out, SIZE, SIZE);
    disk_boundary(&mut out);
    out.push_str("<g class=\"edges\">\n");
    for (e, &(u, v)) in graph.edges().iter().enumerate() {
        let (a, c) = (pos[u as usize].to_disk(), pos[v as usize].to_disk());
        let (stroke, width) = if open[e] {
            (labels.label(u as usize).and_then(|l| slot.get(&l).copied()).unwrap_or("#202020"), 1.4)
        } else {
            ("#c8c8c8", 0.5)
        };
        let _ = writeln!(
            out,
            "<path d=\"M {}{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{width}\"/>",
            fmt_pt(a),
            geodesic_to(a, c)
        );
    }
    out.push_str("</g>\n</svg>\n");
    out
}

fn label_color(l: PhaseLabel) -> &'static str {
    match l {
        PhaseLabel::WhiteUnique => "#f0f0f0",
        PhaseLabel::BlackUnique => "#303030",
        PhaseLabel::BothMany => "#d62728",
        PhaseLabel::SubcriticalAmbiguous => "#9ecae1",
    }
}

/// Heat grid of phase labels with `p` across and `λ` up.
pub fn render_phase(points: &[(f64, f64, PhaseLabel)]) -> String {
    let mut ps: Vec<f64> = points.iter().map(|x| x.0).collect();
    let mut ls: Vec<f64> = points.iter().map(|x| x.1).collect();
    for v in [&mut ps, &mut ls] {
        v.sort_by(f64::total_cmp);
        v.dedup();
    }
    let (w, h) = (SIZE, SIZE);
    let (left, bottom, top) = (60.0, 60.0, 20.0);
    let cw = (w - left - 20.0) / ps.len().max(1) as f64;
    let ch = (h - bottom - top - 40.0) / ls.len().max(1) as f64;
    let mut out = String::new();
    header(&mut out, w, h);
    out.push_str("<g class=\"phases\">\n");
    for &(p, l, label) in points {
        let i = ps.iter().position(|&x| x == p).unwrap_or(0);
        let j = ls.iter().position(|&x| x == l).unwrap_or(0);
        let x = left + i as f64 * cw;
        let y = h - bottom - (j + 1) as f64 * ch;
        let _ = writeln!(
            out,
            "<rect x=\"{x:.3}\" y=\"{y:.3}\" width=\"{cw:.3}\" height=\"{ch:.3}\" fill=\"{}\" stroke=\"#ffffff\" stroke-width=\"0.5\"><title>p={p} lambda={l} {}</title></rect>",
            label_color(label),
            label.as_str()
        );
    }
    out.push_str("</g>\n");
    let _ = writeln!(out, "<text x=\"{}\" y=\"{}\" font-size=\"14\" text-anchor=\"middle\">p</text>", left + 0.5 * (w - left), h - 20.0);
    let _ = writeln!(out, "<text x=\"15\" y=\"{}\" font-size=\"14\">lambda</text>", 0.5 * h);
    for (k, l) in [PhaseLabel::WhiteUnique, PhaseLabel::BlackUnique, PhaseLabel::BothMany, PhaseLabel::SubcriticalAmbiguous]
        .iter()
        .enumerate()
    {
        let x = left + k as f64 * 170.0;
        let _ = writeln!(
            out,
            "<rect x=\"{x}\" y=\"{top}\" width=\"12\" height=\"12\" fill=\"{}\" stroke=\"#000000\"/><text x=\"{}\" y=\"{}\" font-size=\"12\">{}</text>",
            label_color(*l),
            x + 16.0,
            top + 11.0,
            l.as_str()
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use hyperperc_core::hypgeo::dist;
    use hyperperc_core::tiling::build_ball;

    #[test]
    fn tiling_embedding_is_regular() {
        for (p, q) in [(3, 7), (4, 5), (7, 3)] {
            let b = build_ball(p, q, 4).unwrap();
            let pos = embed_tiling(&b);
            let rc = ((PI / p as f64).tan().recip() * (PI / q as f64).tan().recip()).acosh();
            let edge = dist(HPoint::new(rc, 0.0), HPoint::new(rc, TAU / p as f64));
            for &(u, v) in b.graph().edges() {
                let d = dist(pos[u as usize], pos[v as usize]);
                assert!((d - edge).abs() < 1e-6, "{{{p},{q}}} edge {u}-{v}: {d} vs {edge}");
            }
            for u in 0..pos.len() {
                for v in u + 1..pos.len() {
                    assert!(dist(pos[u], pos[v]) > 0.5 * edge);
                }
            }
        }
    }

    #[test]
    fn geodesic_through_center_is_a_line() {
        let a = Complex64::new(0.5, 0.0);
        let b = Complex64::new(-0.5, 0.0);
        assert!(geodesic_to(a, b).starts_with(" L"));
        assert!(geodesic_to(a, Complex64::new(0.0, 0.5)).starts_with(" A"));
    }

    #[test]
    fn bisector_endpoint_is_equidistant_direction() {
        let x = HPoint::new(1.0, 0.0);
        let y = HPoint::new(1.0, TAU / 3.0);
        let z = HPoint::new(1.0, 2.0 * TAU / 3.0);
        let e = bisector_end(x, y, z);
        assert!((e.norm() - 1.0).abs() < 1e-12);
        // away from z: direction π/3
        assert!((e.arg() - PI / 3.0).abs() < 1e-9, "{}", e.arg());
    }
}
