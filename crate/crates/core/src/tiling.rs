//! Finite balls of the regular `{p,q}` hyperbolic tiling graph.
//!
//! A ball is grown by layered face closing: starting from one `p`-gon, every
//! vertex of the current boundary cycle is completed to `q` incident faces,
//! which creates the next ring of vertices. Faces are stored
//! counterclockwise, and the rotation system is read off from them.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::Graph;

/// Default bound on the number of vertices of a generated ball.
pub const MAX_VERTICES: usize = 10_000_000;

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TilingError {
    #[error("{{{p},{q}}} is not hyperbolic: (p-2)(q-2) must exceed 4")]
    NotHyperbolic { p: u32, q: u32 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("ball would have {vertices} vertices, above the cap {cap}")]
    TooLarge { vertices: usize, cap: usize },
    #[error("vertices {0} and {1} are not connected")]
    Disconnected(usize, usize),
    #[error("malformed tiling: {0}")]
    Malformed(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A finite planar ball with faces, rotation system and layer structure.
///
/// The same type holds primal `{p,q}` balls and their duals. For a dual,
/// `p_gon` and `q_deg` are swapped and vertex depth is the layer of the
/// primal face.
#[derive(Debug, Clone, PartialEq)]
pub struct TilingBall {
    p_gon: u32,
    q_deg: u32,
    layers: u32,
    graph: Graph,
    rotation: Vec<Vec<u32>>,
    depth: Vec<u32>,
    faces: Vec<Vec<u32>>,
    face_layer: Vec<u32>,
    /// Face on the left of each edge as stored `(u, v)`, then on the right.
    edge_faces: Vec<[u32; 2]>,
    interior: Vec<bool>,
}

/// Dual of a ball: one vertex per face, one edge per edge with two faces,
/// one face per vertex whose rotation is complete.
#[derive(Debug, Clone, PartialEq)]
pub struct DualBall {
    pub ball: TilingBall,
    /// Dual edge id for each primal edge with two faces.
    pub to_dual: Vec<Option<u32>>,
    /// Primal edge id of each dual edge.
    pub to_primal: Vec<u32>,
    /// Primal vertex enclosed by each dual face.
    pub face_vertex: Vec<u32>,
}

pub fn check_hyperbolic(p: u32, q: u32) -> Result<(), TilingError> {
    if p < 3 || q < 3 || (p as u64 - 2) * (q as u64 - 2) <= 4 {
        return Err(TilingError::NotHyperbolic { p, q });
    }
    Ok(())
}

/// Builds the ball of `layers` face layers of the `{p,q}` tiling. Layer 1 is
/// a single face.
pub fn build_ball(p: u32, q: u32, layers: u32) -> Result<TilingBall, TilingError> {
    build_ball_capped(p, q, layers, MAX_VERTICES)
}

pub fn build_ball_capped(p: u32, q: u32, layers: u32, cap: usize) -> Result<TilingBall, TilingError> {
    check_hyperbolic(p, q)?;
    if layers == 0 {
        return Err(TilingError::InvalidParameter("need at least one layer".into()));
    }
    if p as usize > cap {
        return Err(TilingError::TooLarge { vertices: p as usize, cap });
    }
    let mut faces: Vec<Vec<u32>> = vec![(0..p).collect()];
    let mut face_layer = vec![0u32];
    let mut depth = vec![0u32; p as usize];
    let mut face_count = vec![1u32; p as usize];
    let mut boundary: Vec<u32> = (0..p).collect();

    for layer in 1..layers {
        let n = boundary.len();
        let spokes: Vec<i64> = boundary.iter().map(|&v| q as i64 - face_count[v as usize] as i64 - 1).collect();
        if spokes.iter().any(|&s| s < 0) {
            return Err(TilingError::Malformed("boundary vertex already complete".into()));
        }
        let start = spokes
            .iter()
            .position(|&s| s >= 1)
            .ok_or_else(|| TilingError::Malformed("no boundary vertex needs a new edge".into()))?;
        boundary.rotate_left(start);
        let spokes: Vec<i64> = boundary.iter().map(|&v| q as i64 - face_count[v as usize] as i64 - 1).collect();
        let owners: Vec<usize> = (0..n).flat_map(|i| std::iter::repeat_n(i, spokes[i] as usize)).collect();
        let k_total = owners.len();

        // gap k lies between spoke k and spoke k+1 and spans `span[k]` old edges
        let span: Vec<usize> = (0..k_total)
            .map(|k| if k + 1 < k_total { owners[k + 1] - owners[k] } else { n - owners[k] })
            .collect();
        let mut extra = Vec::with_capacity(k_total);
        for &m in &span {
            let t = p as i64 - m as i64 - 3;
            if t < -1 {
                return Err(TilingError::Malformed(format!("face would need {t} new vertices")));
            }
            extra.push(t);
        }
        let mut class = vec![0usize; k_total];
        for k in 1..k_total {
            class[k] = class[k - 1] + usize::from(extra[k - 1] != -1);
        }
        let wrap_alias = extra[k_total - 1] == -1;
        if wrap_alias && class[k_total - 1] == 0 {
            return Err(TilingError::Malformed("all spokes meet in one vertex".into()));
        }
        let classes = class[k_total - 1] + 1 - usize::from(wrap_alias);
        let added = classes + extra.iter().map(|&t| t.max(0) as usize).sum::<usize>();
        let total = depth.len() + added;
        if total > cap {
            return Err(TilingError::TooLarge { vertices: total, cap });
        }

        let mut class_id = vec![NONE; class[k_total - 1] + 1];
        let mut outer: Vec<Vec<u32>> = Vec::with_capacity(k_total);
        let mut next_boundary = Vec::with_capacity(added);
        let fresh = |depth: &mut Vec<u32>, face_count: &mut Vec<u32>| {
            depth.push(layer);
            face_count.push(0);
            (depth.len() - 1) as u32
        };
        for k in 0..k_total {
            if k == 0 || class[k] != class[k - 1] {
                if wrap_alias && class[k] == class[k_total - 1] {
                    class_id[class[k]] = class_id[0];
                } else {
                    let id = fresh(&mut depth, &mut face_count);
                    class_id[class[k]] = id;
                    next_boundary.push(id);
                }
            }
            let ids: Vec<u32> = (0..extra[k].max(0)).map(|_| fresh(&mut depth, &mut face_count)).collect();
            next_boundary.extend_from_slice(&ids);
            outer.push(ids);
        }

        for k in 0..k_total {
            let a = owners[k];
            let x = class_id[class[k]];
            let y = class_id[class[(k + 1) % k_total]];
            let mut face = Vec::with_capacity(p as usize);
            for j in (0..=span[k]).rev() {
                face.push(boundary[(a + j) % n]);
            }
            face.push(x);
            face.extend_from_slice(&outer[k]);
            if y != x {
                face.push(y);
            }
            debug_assert_eq!(face.len(), p as usize);
            for &v in &face {
                face_count[v as usize] += 1;
            }
            faces.push(face);
            face_layer.push(layer);
        }
        boundary = next_boundary;
    }
    TilingBall::from_faces(p, q, layers, depth, faces, face_layer, q)
}

/// Counterclockwise neighbor order around each vertex, from counterclockwise
/// faces. Open fans start at the neighbor with no predecessor.
fn rotation_from_faces(n: usize, faces: &[Vec<u32>]) -> Vec<(Vec<u32>, bool)> {
    let mut succ: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n];
    for face in faces {
        let k = face.len();
        for i in 0..k {
            let (u, v, w) = (face[(i + k - 1) % k], face[i], face[(i + 1) % k]);
            succ[v as usize].push((w, u));
        }
    }
    succ.into_iter()
        .map(|pairs| {
            let next: HashMap<u32, u32> = pairs.iter().copied().collect();
            let targets: std::collections::HashSet<u32> = pairs.iter().map(|&(_, u)| u).collect();
            let mut starts: Vec<u32> = pairs.iter().map(|&(w, _)| w).filter(|w| !targets.contains(w)).collect();
            let closed = starts.is_empty() && !pairs.is_empty();
            if closed {
                starts.push(pairs[0].0);
            }
            let mut ring = Vec::with_capacity(pairs.len() + 1);
            for s in starts {
                let mut x = s;
                loop {
                    ring.push(x);
                    match next.get(&x) {
                        Some(&y) if y != s => x = y,
                        _ => break,
                    }
                }
            }
            (ring, closed)
        })
        .collect()
}

impl TilingBall {
    /// Assembles a ball from counterclockwise faces. Vertices whose fan is
    /// closed with `full_degree` neighbors are interior.
    fn from_faces(
        p_gon: u32,
        q_deg: u32,
        layers: u32,
        depth: Vec<u32>,
        faces: Vec<Vec<u32>>,
        face_layer: Vec<u32>,
        full_degree: u32,
    ) -> Result<Self, TilingError> {
        let n = depth.len();
        let mut index: HashMap<(u32, u32), u32> = HashMap::new();
        let mut edges = Vec::new();
        let mut edge_faces: Vec<[u32; 2]> = Vec::new();
        for (f, face) in faces.iter().enumerate() {
            let k = face.len();
            for i in 0..k {
                let (u, v) = (face[i], face[(i + 1) % k]);
                if u as usize >= n || v as usize >= n || u == v {
                    return Err(TilingError::Malformed(format!("face {f} has a bad edge ({u}, {v})")));
                }
                let key = (u.min(v), u.max(v));
                let id = *index.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edge_faces.push([NONE, NONE]);
                    (edges.len() - 1) as u32
                });
                let side = usize::from(u > v);
                if edge_faces[id as usize][side] != NONE {
                    return Err(TilingError::Malformed(format!("edge ({u}, {v}) used twice in one direction")));
                }
                edge_faces[id as usize][side] = f as u32;
            }
        }
        let graph = Graph::new(n, edges);
        let fans = rotation_from_faces(n, &faces);
        let mut rotation = Vec::with_capacity(n);
        let mut interior = Vec::with_capacity(n);
        for (v, (ring, closed)) in fans.into_iter().enumerate() {
            if ring.len() != graph.degree(v) {
                return Err(TilingError::Malformed(format!("vertex {v} has a pinched fan")));
            }
            interior.push(closed && ring.len() == full_degree as usize);
            rotation.push(ring);
        }
        Ok(TilingBall { p_gon, q_deg, layers, graph, rotation, depth, faces, face_layer, edge_faces, interior })
    }

    pub fn p_gon(&self) -> u32 {
        self.p_gon
    }

    pub fn q_deg(&self) -> u32 {
        self.q_deg
    }

    pub fn layers(&self) -> u32 {
        self.layers
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn vertex_count(&self) -> usize {
        self.depth.len()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    /// Counterclockwise neighbors of `v`.
    pub fn rotation(&self, v: usize) -> &[u32] {
        &self.rotation[v]
    }

    /// Ring index of each vertex; ring 0 is the base face.
    pub fn depth(&self) -> &[u32] {
        &self.depth
    }

    pub fn max_depth(&self) -> u32 {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    pub fn faces(&self) -> &[Vec<u32>] {
        &self.faces
    }

    pub fn face_layer(&self) -> &[u32] {
        &self.face_layer
    }

    /// Faces on either side of edge `e`, if present.
    pub fn edge_faces(&self, e: usize) -> (Option<u32>, Option<u32>) {
        let [l, r] = self.edge_faces[e];
        ((l != NONE).then_some(l), (r != NONE).then_some(r))
    }

    pub fn interior_mask(&self) -> &[bool] {
        &self.interior
    }

    /// Vertices in the outermost ring.
    pub fn boundary_vertices(&self) -> Vec<usize> {
        let d = self.max_depth();
        (0..self.vertex_count()).filter(|&v| self.depth[v] == d).collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "#pq v1 p={} q={} L={}", self.p_gon, self.q_deg, self.layers).unwrap();
        writeln!(out, "VERTICES {}", self.vertex_count()).unwrap();
        for v in 0..self.vertex_count() {
            write!(out, "{} {} {}", v, self.depth[v], u8::from(self.interior[v])).unwrap();
            for &w in &self.rotation[v] {
                write!(out, " {w}").unwrap();
            }
            out.push('\n');
        }
        writeln!(out, "EDGES {}", self.edge_count()).unwrap();
        for (id, &(u, v)) in self.graph.edges().iter().enumerate() {
            writeln!(out, "{id} {u} {v}").unwrap();
        }
        writeln!(out, "FACES {}", self.face_count()).unwrap();
        for (f, face) in self.faces.iter().enumerate() {
            write!(out, "{} {}", f, self.face_layer[f]).unwrap();
            for &v in face {
                write!(out, " {v}").unwrap();
            }
            out.push('\n');
        }
        let dual: Vec<(usize, u32, u32)> = self
            .edge_faces
            .iter()
            .enumerate()
            .filter(|(_, f)| f[0] != NONE && f[1] != NONE)
            .map(|(e, f)| (e, f[0], f[1]))
            .collect();
        writeln!(out, "DUAL {}", dual.len()).unwrap();
        for (d, (e, a, b)) in dual.into_iter().enumerate() {
            writeln!(out, "{d} {e} {a} {b}").unwrap();
        }
        out
    }

    /// Parses [`TilingBall::to_text`] output. The ball is rebuilt from the
    /// VERTICES depths and the FACES section; EDGES and DUAL are checked
    /// against the rebuilt ball.
    pub fn from_text(text: &str) -> Result<Self, TilingError> {
        let err = |line: usize, msg: &str| TilingError::Parse { line, msg: msg.to_string() };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (_, header) = lines.next().ok_or_else(|| err(1, "empty input"))?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("#pq") || fields.next() != Some("v1") {
            return Err(err(1, "expected `#pq v1` header"));
        }
        let mut get = |key: &str| -> Result<u32, TilingError> {
            fields
                .next()
                .and_then(|f| f.strip_prefix(key))
                .and_then(|f| f.strip_prefix('='))
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| err(1, &format!("missing or bad `{key}`")))
        };
        let (p, q, layers) = (get("p")?, get("q")?, get("L")?);

        let section = |name: &str, lines: &mut dyn Iterator<Item = (usize, &str)>| {
            let (no, l) = lines.next().ok_or_else(|| err(0, &format!("missing {name} section")))?;
            let mut it = l.split_whitespace();
            if it.next() != Some(name) {
                return Err(err(no, &format!("expected {name}")));
            }
            let count: usize = it.next().and_then(|c| c.parse().ok()).ok_or_else(|| err(no, "bad count"))?;
            let mut rows = Vec::with_capacity(count);
            for _ in 0..count {
                let (no, l) = lines.next().ok_or_else(|| err(no, "truncated section"))?;
                let row: Vec<u32> = l
                    .split_whitespace()
                    .map(|x| x.parse().map_err(|_| err(no, "expected integers")))
                    .collect::<Result<_, _>>()?;
                if row.first() != Some(&(rows.len() as u32)) {
                    return Err(err(no, "rows must be numbered consecutively"));
                }
                rows.push((no, row));
            }
            Ok(rows)
        };
        let vertices = section("VERTICES", &mut lines)?;
        let edges = section("EDGES", &mut lines)?;
        let faces = section("FACES", &mut lines)?;
        let dual = section("DUAL", &mut lines)?;

        let mut depth = Vec::with_capacity(vertices.len());
        for (no, row) in &vertices {
            depth.push(*row.get(1).ok_or_else(|| err(*no, "missing depth"))?);
        }
        let mut face_list = Vec::with_capacity(faces.len());
        let mut face_layer = Vec::with_capacity(faces.len());
        for (no, row) in &faces {
            if row.len() < 5 {
                return Err(err(*no, "face needs a layer and at least 3 vertices"));
            }
            face_layer.push(row[1]);
            face_list.push(row[2..].to_vec());
        }
        let ball = TilingBall::from_faces(p, q, layers, depth, face_list, face_layer, q)?;
        if edges.len() != ball.edge_count()
            || edges.iter().any(|(_, r)| r.len() != 3 || ball.graph.edge(r[0] as usize) != (r[1], r[2]))
        {
            return Err(TilingError::Malformed("EDGES section disagrees with FACES".into()));
        }
        let expected = ball.edge_faces.iter().filter(|f| f[0] != NONE && f[1] != NONE).count();
        if dual.len() != expected {
            return Err(TilingError::Malformed("DUAL section disagrees with FACES".into()));
        }
        Ok(ball)
    }
}

/// Dual ball: faces become vertices, edges with two faces become dual edges,
/// and each interior vertex becomes a dual face.
pub fn dual_ball(b: &TilingBall) -> DualBall {
    let mut to_dual = vec![None; b.edge_count()];
    let mut to_primal = Vec::new();
    for (e, f) in b.edge_faces.iter().enumerate() {
        if f[0] != NONE && f[1] != NONE {
            to_dual[e] = Some(to_primal.len() as u32);
            to_primal.push(e as u32);
        }
    }
    let mut faces = Vec::new();
    let mut face_vertex = Vec::new();
    let mut face_layer = Vec::new();
    for v in 0..b.vertex_count() {
        if !b.interior[v] {
            continue;
        }
        // the face between consecutive neighbors w -> u of the rotation is
        // the one traversing (u, v, w)
        let ring = &b.rotation[v];
        let k = ring.len();
        let mut cycle = Vec::with_capacity(k);
        for i in 0..k {
            let w = ring[i];
            let e = edge_between(b, v as u32, w).expect("rotation lists neighbors");
            let (l, r) = (b.edge_faces[e][0], b.edge_faces[e][1]);
            // face on the left of v -> w
            cycle.push(if (v as u32) < w { l } else { r });
        }
        faces.push(cycle);
        face_vertex.push(v as u32);
        face_layer.push(b.depth[v]);
    }
    let depth = b.face_layer.clone();
    let ball = TilingBall::from_faces(b.q_deg, b.p_gon, b.layers, depth, faces, face_layer, b.p_gon)
        .expect("dual of a valid ball is valid");
    // dual edges come out of the dual faces in a different order; index
    // them by endpoints
    let mut by_pair: HashMap<(u32, u32), u32> = HashMap::new();
    for (id, &(a, c)) in ball.graph.edges().iter().enumerate() {
        by_pair.insert((a, c), id as u32);
    }
    let mut reorder_to_primal = vec![NONE; ball.edge_count()];
    let mut reorder_to_dual = vec![None; b.edge_count()];
    for &e in &to_primal {
        let [l, r] = b.edge_faces[e as usize];
        if let Some(&d) = by_pair.get(&(l.min(r), l.max(r))) {
            reorder_to_primal[d as usize] = e;
            reorder_to_dual[e as usize] = Some(d);
        }
    }
    debug_assert!(reorder_to_primal.iter().all(|&e| e != NONE));
    // dual edges outside every dual face are missing from `ball`; keep them
    // by rebuilding with all of them
    let missing: Vec<u32> = to_primal.iter().copied().filter(|&e| reorder_to_dual[e as usize].is_none()).collect();
    let ball = if missing.is_empty() {
        ball
    } else {
        let mut edges = ball.graph.edges().to_vec();
        for &e in &missing {
            let [l, r] = b.edge_faces[e as usize];
            reorder_to_dual[e as usize] = Some(edges.len() as u32);
            reorder_to_primal.push(e);
            edges.push((l.min(r), l.max(r)));
        }
        let n = ball.vertex_count();
        let mut edge_faces = ball.edge_faces.clone();
        edge_faces.resize(edges.len(), [NONE, NONE]);
        let mut rotation = ball.rotation.clone();
        for &(a, c) in &edges[ball.edge_count()..] {
            rotation[a as usize].push(c);
            rotation[c as usize].push(a);
        }
        TilingBall { graph: Graph::new(n, edges), rotation, edge_faces, ..ball }
    };
    DualBall { ball, to_dual: reorder_to_dual, to_primal: reorder_to_primal, face_vertex }
}

fn edge_between(b: &TilingBall, u: u32, w: u32) -> Option<usize> {
    b.graph.neighbors(u as usize).iter().find(|&&(x, _)| x == w).map(|&(_, e)| e as usize)
}

/// BFS distance between two vertices.
pub fn graph_distance(b: &TilingBall, u: usize, v: usize) -> Result<u32, TilingError> {
    let d = b.graph.bfs_distances(u)[v];
    if d == u32::MAX {
        Err(TilingError::Disconnected(u, v))
    } else {
        Ok(d)
    }
}
