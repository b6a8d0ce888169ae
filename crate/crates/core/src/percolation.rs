//! Bernoulli percolation on tiling balls and color percolation on Voronoi
//! tessellations.
//!
//! Every bond, site or cell carries a uniform mark `U`; a primal element is
//! open at parameter `p` iff `U < p`, and the complementary side (the dual
//! bond or the black cell) is open iff `U ≥ p`. Sharing marks across `p`
//! is the monotone coupling.
//!
//! Finite-volume proxies: the *core* is a small ball about the center, the
//! *shell* is the outermost layer, and a cluster is boundary-reaching when it
//! contains a shell site. `k` counts boundary-reaching clusters that meet
//! the core.

use std::collections::VecDeque;

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{Graph, UnionFind};
use crate::hypgeo::{dist, HPoint};
use crate::hypvoronoi::{delaunay, VoronoiComplex, VoronoiError, DEFAULT_MARGIN};
use crate::pointprocess::{color_marks, ColoredPointSet, PointProcessError};
use crate::rng::{tags, Seed};
use crate::stats::{self, wilson, LinearFit, Z95};
use crate::tiling::{build_ball, dual_ball, DualBall, TilingBall, TilingError};

const NONE: u32 = u32::MAX;

/// Combinatorial radius of the core on graphs.
pub const GRAPH_CORE_RADIUS: u32 = 2;
/// Hyperbolic radius of the core for Voronoi percolation.
pub const VORONOI_CORE_RADIUS: f64 = 1.0;
/// Bootstrap resamples behind crossing confidence intervals.
pub const BOOTSTRAP_ROUNDS: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PercolationError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no crossing inside the grid [{lo}, {hi}]")]
    NoCrossing { lo: f64, hi: f64 },
    #[error("too few positive points for a fit ({0})")]
    InsufficientData(usize),
    #[error(transparent)]
    Tiling(#[from] TilingError),
    #[error(transparent)]
    Voronoi(#[from] VoronoiError),
    #[error(transparent)]
    PointProcess(#[from] PointProcessError),
}

fn check_probability(p: f64) -> Result<(), PercolationError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(PercolationError::InvalidParameter(format!("p must lie in [0, 1], got {p}")));
    }
    Ok(())
}

/// Open/closed state of every edge of a ball.
#[derive(Debug, Clone, PartialEq)]
pub struct BondConfig {
    open_edges: Vec<bool>,
    p: f64,
    seed: u64,
}

impl BondConfig {
    pub fn open_edges(&self) -> &[bool] {
        &self.open_edges
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn open_count(&self) -> usize {
        self.open_edges.iter().filter(|&&o| o).count()
    }
}

/// Open/closed state of every vertex of a ball.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteConfig {
    open_sites: Vec<bool>,
    p: f64,
    seed: u64,
}

impl SiteConfig {
    pub fn open_sites(&self) -> &[bool] {
        &self.open_sites
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Bernoulli(`p`) bond percolation; edge `e` is open iff `seed.uniform(e) < p`.
pub fn bernoulli_bond(b: &TilingBall, p: f64, seed: Seed) -> BondConfig {
    let open_edges = (0..b.edge_count() as u64).map(|e| seed.uniform(e) < p).collect();
    BondConfig { open_edges, p, seed: seed.0 }
}

/// Bernoulli(`p`) site percolation; vertex `v` is open iff `seed.uniform(v) < p`.
pub fn bernoulli_site(b: &TilingBall, p: f64, seed: Seed) -> SiteConfig {
    let open_sites = (0..b.vertex_count() as u64).map(|v| seed.uniform(v) < p).collect();
    SiteConfig { open_sites, p, seed: seed.0 }
}

/// Dual configuration: a dual edge is open iff its primal edge is closed.
pub fn dual_config(c: &BondConfig, d: &DualBall) -> BondConfig {
    let open_edges = d.to_primal.iter().map(|&e| !c.open_edges[e as usize]).collect();
    BondConfig { open_edges, p: 1.0 - c.p, seed: c.seed }
}

/// What is open in a labeling: edges (bond percolation) or vertices (site
/// percolation, where an edge is open iff both ends are).
#[derive(Debug, Clone, Copy)]
pub enum Marks<'a> {
    Bonds(&'a [bool]),
    Sites(&'a [bool]),
}

/// Connected components of the open subgraph. Labels are numbered in order
/// of their smallest vertex; closed sites carry no label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterLabeling {
    labels: Vec<u32>,
    sizes: Vec<u32>,
}

/// Finite-volume phase observables of one configuration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Observation {
    /// Some core site is connected to the shell.
    pub reach: bool,
    /// Distinct boundary-reaching clusters meeting the core.
    pub k: u32,
    /// Shell sites connected to the core.
    pub shell_hits: u32,
}

impl Observation {
    pub fn unique(&self) -> bool {
        self.k == 1
    }
}

pub fn label_clusters(graph: &Graph, marks: Marks) -> ClusterLabeling {
    let n = graph.vertex_count();
    let mut uf = UnionFind::new(n);
    match marks {
        Marks::Bonds(open) => {
            assert_eq!(open.len(), graph.edge_count());
            for (e, &(u, v)) in graph.edges().iter().enumerate() {
                if open[e] {
                    uf.union(u as usize, v as usize);
                }
            }
        }
        Marks::Sites(open) => {
            assert_eq!(open.len(), n);
            for &(u, v) in graph.edges() {
                if open[u as usize] && open[v as usize] {
                    uf.union(u as usize, v as usize);
                }
            }
        }
    }
    let mut root_label = vec![NONE; n];
    let mut labels = vec![NONE; n];
    let mut sizes = Vec::new();
    for v in 0..n {
        if let Marks::Sites(open) = marks {
            if !open[v] {
                continue;
            }
        }
        let r = uf.find(v);
        if root_label[r] == NONE {
            root_label[r] = sizes.len() as u32;
            sizes.push(0);
        }
        labels[v] = root_label[r];
        sizes[root_label[r] as usize] += 1;
    }
    ClusterLabeling { labels, sizes }
}

impl ClusterLabeling {
    pub fn label(&self, v: usize) -> Option<u32> {
        (self.labels[v] != NONE).then_some(self.labels[v])
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn sizes(&self) -> &[u32] {
        &self.sizes
    }

    pub fn cluster_count(&self) -> usize {
        self.sizes.len()
    }

    /// Labels of clusters containing a shell site, ascending.
    pub fn boundary_reaching(&self, shell: &[bool]) -> Vec<u32> {
        let mut hit = vec![false; self.sizes.len()];
        for (v, &l) in self.labels.iter().enumerate() {
            if l != NONE && shell[v] {
                hit[l as usize] = true;
            }
        }
        (0..self.sizes.len() as u32).filter(|&l| hit[l as usize]).collect()
    }

    /// Boundary-reaching clusters that meet the core.
    pub fn k_proxy(&self, core: &[bool], shell: &[bool]) -> usize {
        self.observe(core, shell).k as usize
    }

    pub fn observe(&self, core: &[bool], shell: &[bool]) -> Observation {
        let m = self.sizes.len();
        let mut in_core = vec![false; m];
        let mut shell_count = vec![0u32; m];
        for (v, &l) in self.labels.iter().enumerate() {
            if l == NONE {
                continue;
            }
            in_core[l as usize] |= core[v];
            shell_count[l as usize] += u32::from(shell[v]);
        }
        let mut obs = Observation::default();
        for l in 0..m {
            if in_core[l] {
                obs.shell_hits += shell_count[l];
                obs.k += u32::from(shell_count[l] > 0);
            }
        }
        obs.reach = obs.k > 0;
        obs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Element {
    Bond,
    Site,
}

/// One side of a percolation model on one finite window: the host graph,
/// which elements carry marks, and the core/shell masks.
#[derive(Debug, Clone)]
pub struct Lattice<'a> {
    pub graph: &'a Graph,
    pub element: Element,
    /// Mark counter of each element; the element index when absent.
    pub mark_index: Option<Vec<u32>>,
    /// Open iff `U < p` when true, iff `U ≥ p` otherwise.
    pub open_below: bool,
    /// Sites inside the window; all when absent.
    pub active: Option<Vec<bool>>,
    pub core: Vec<bool>,
    pub shell: Vec<bool>,
}

fn core_by_radius(graph: &Graph, center: usize, radius: u32) -> Vec<bool> {
    graph.bfs_distances(center).iter().map(|&d| d <= radius).collect()
}

impl<'a> Lattice<'a> {
    /// Bond percolation on a ball: core is the combinatorial ball of radius 2
    /// about vertex 0, shell the outermost ring.
    pub fn primal(b: &'a TilingBall) -> Self {
        let top = b.max_depth();
        Lattice {
            graph: b.graph(),
            element: Element::Bond,
            mark_index: None,
            open_below: true,
            active: None,
            core: core_by_radius(b.graph(), 0, GRAPH_CORE_RADIUS),
            shell: b.depth().iter().map(|&d| d == top).collect(),
        }
    }

    /// Dual bonds driven by the primal marks: `e†` is open iff `e` is closed.
    pub fn dual(d: &'a DualBall) -> Self {
        let b = &d.ball;
        let top = b.max_depth();
        Lattice {
            graph: b.graph(),
            element: Element::Bond,
            mark_index: Some(d.to_primal.clone()),
            open_below: false,
            active: None,
            core: core_by_radius(b.graph(), 0, GRAPH_CORE_RADIUS),
            shell: b.depth().iter().map(|&d| d == top).collect(),
        }
    }

    /// White (`white = true`) or black cells of a tessellation, restricted
    /// to nuclei within `r_window`. Core cells meet the ball of radius
    /// `r_core`; shell cells reach beyond `r_window`.
    pub fn voronoi(v: &'a VoronoiComplex, r_window: f64, r_core: f64, white: bool) -> Self {
        let active: Vec<bool> = v.nuclei().iter().map(|x| x.rho() <= r_window).collect();
        let meets = v.cells_meeting_ball(r_core);
        let core = (0..v.len()).map(|i| active[i] && meets[i]).collect();
        let shell = (0..v.len()).map(|i| active[i] && v.cell_max_rho(i) > r_window).collect();
        Lattice {
            graph: v.graph(),
            element: Element::Site,
            mark_index: None,
            open_below: white,
            active: Some(active),
            core,
            shell,
        }
    }

    fn element_count(&self) -> usize {
        match self.element {
            Element::Bond => self.graph.edge_count(),
            Element::Site => self.graph.vertex_count(),
        }
    }

    #[inline]
    fn mark(&self, marks: &[f64], i: usize) -> f64 {
        match &self.mark_index {
            Some(idx) => marks[idx[i] as usize],
            None => marks[i],
        }
    }

    #[inline]
    fn is_open(&self, u: f64, p: f64) -> bool {
        if self.open_below {
            u < p
        } else {
            u >= p
        }
    }

    fn is_active(&self, v: usize) -> bool {
        self.active.as_ref().is_none_or(|a| a[v])
    }

    /// Open elements at `p` for the given marks.
    pub fn open_set(&self, marks: &[f64], p: f64) -> Vec<bool> {
        (0..self.element_count())
            .map(|i| {
                let ok = self.is_open(self.mark(marks, i), p);
                match self.element {
                    Element::Site => ok && self.is_active(i),
                    Element::Bond => ok,
                }
            })
            .collect()
    }

    pub fn label(&self, marks: &[f64], p: f64) -> ClusterLabeling {
        let open = self.open_set(marks, p);
        match self.element {
            Element::Bond => label_clusters(self.graph, Marks::Bonds(&open)),
            Element::Site => label_clusters(self.graph, Marks::Sites(&open)),
        }
    }

    pub fn observe(&self, marks: &[f64], p: f64) -> Observation {
        self.label(marks, p).observe(&self.core, &self.shell)
    }

    /// Observations at every grid point (ascending grid), adding elements
    /// to one union-find in the order they open.
    pub fn sweep(&self, marks: &[f64], grid: &[f64]) -> Vec<Observation> {
        let g = grid.len();
        let n = self.graph.vertex_count();
        // stage[i]: first grid index at which element i is open
        let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); g];
        for i in 0..self.element_count() {
            if self.element == Element::Site && !self.is_active(i) {
                continue;
            }
            let u = self.mark(marks, i);
            let stage = if self.open_below {
                grid.partition_point(|&p| p <= u)
            } else {
                // open iff u ≥ p; walked from the top of the grid
                g - grid.partition_point(|&p| p <= u)
            };
            if stage < g {
                buckets[stage].push(i as u32);
            }
        }
        let mut state = SweepState::new(n, &self.core, &self.shell, self.element == Element::Bond);
        let mut present = vec![self.element == Element::Bond; n];
        let mut out = vec![Observation::default(); g];
        for (stage, bucket) in buckets.iter().enumerate() {
            for &i in bucket {
                match self.element {
                    Element::Bond => {
                        let (u, v) = self.graph.edge(i as usize);
                        state.union(u as usize, v as usize);
                    }
                    Element::Site => {
                        let v = i as usize;
                        present[v] = true;
                        state.add_site(v);
                        for &(w, _) in self.graph.neighbors(v) {
                            if present[w as usize] {
                                state.union(v, w as usize);
                            }
                        }
                    }
                }
            }
            let j = if self.open_below { stage } else { g - 1 - stage };
            out[j] = state.observation();
        }
        out
    }
}

/// Union-find carrying per-cluster core and shell counts.
struct SweepState<'m> {
    uf: UnionFind,
    core_count: Vec<u32>,
    shell_count: Vec<u32>,
    core: &'m [bool],
    shell: &'m [bool],
    k: u32,
    hits: u32,
}

impl<'m> SweepState<'m> {
    fn new(n: usize, core: &'m [bool], shell: &'m [bool], all_present: bool) -> Self {
        let mut s = SweepState {
            uf: UnionFind::new(n),
            core_count: vec![0; n],
            shell_count: vec![0; n],
            core,
            shell,
            k: 0,
            hits: 0,
        };
        if all_present {
            for v in 0..n {
                s.add_site(v);
            }
        }
        s
    }

    fn contribution(&self, r: usize) -> (u32, u32) {
        if self.core_count[r] > 0 {
            (u32::from(self.shell_count[r] > 0), self.shell_count[r])
        } else {
            (0, 0)
        }
    }

    fn add_site(&mut self, v: usize) {
        self.core_count[v] = u32::from(self.core[v]);
        self.shell_count[v] = u32::from(self.shell[v]);
        let (k, h) = self.contribution(v);
        self.k += k;
        self.hits += h;
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.uf.find(a), self.uf.find(b));
        if ra == rb {
            return;
        }
        let (ka, ha) = self.contribution(ra);
        let (kb, hb) = self.contribution(rb);
        self.uf.union(ra, rb);
        let r = self.uf.find(ra);
        let other = if r == ra { rb } else { ra };
        self.core_count[r] += self.core_count[other];
        self.shell_count[r] += self.shell_count[other];
        let (k, h) = self.contribution(r);
        self.k = self.k + k - ka - kb;
        self.hits = self.hits + h - ha - hb;
    }

    fn observation(&self) -> Observation {
        Observation { reach: self.k > 0, k: self.k, shell_hits: self.hits }
    }
}

/// `(k, k†)` for a graph or `(k_white, k_black)` for a tessellation.
pub fn phase_signature(primary: &Lattice, secondary: &Lattice, marks: &[f64], p: f64) -> (u32, u32) {
    (primary.observe(marks, p).k, secondary.observe(marks, p).k)
}

/// Percolation model family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    /// Bond percolation on `{p_gon, q_deg}` balls; the secondary side is the
    /// dual configuration.
    Graph { p_gon: u32, q_deg: u32 },
    /// White/black cells of the tessellation of an intensity-`lambda`
    /// Poisson process.
    Voronoi { lambda: f64 },
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Graph { .. } => "graph-bond",
            Model::Voronoi { .. } => "voronoi",
        }
    }
}

/// A Monte Carlo experiment over a ladder of window sizes and a `p` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub model: Model,
    /// Layer counts `L` for graphs, window radii `R_window` for tessellations.
    pub sizes: Vec<f64>,
    /// Ascending `p` values.
    pub grid: Vec<f64>,
    pub replicas: usize,
    pub seed: u64,
    /// Core radius for tessellations.
    pub r_core: f64,
    /// `R_sample − max R_window` for tessellations.
    pub margin: f64,
}

impl Design {
    pub fn new(model: Model, sizes: Vec<f64>, grid: Vec<f64>, replicas: usize, seed: u64) -> Self {
        Design { model, sizes, grid, replicas, seed, r_core: VORONOI_CORE_RADIUS, margin: DEFAULT_MARGIN }
    }

    fn validate(&self) -> Result<(), PercolationError> {
        if self.sizes.is_empty() || self.grid.is_empty() || self.replicas == 0 {
            return Err(PercolationError::InvalidParameter("sizes, grid and replicas must be nonempty".into()));
        }
        for &p in &self.grid {
            check_probability(p)?;
        }
        if self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(PercolationError::InvalidParameter("p grid must be strictly increasing".into()));
        }
        match self.model {
            Model::Graph { .. } => {
                if self.sizes.iter().any(|&l| l < 1.0 || l.fract() != 0.0) {
                    return Err(PercolationError::InvalidParameter("layer counts must be positive integers".into()));
                }
            }
            Model::Voronoi { lambda } => {
                if !(lambda > 0.0) {
                    return Err(PercolationError::InvalidParameter(format!("lambda must be positive, got {lambda}")));
                }
                if self.sizes.iter().any(|&r| r <= self.r_core) {
                    return Err(PercolationError::InvalidParameter("windows must exceed the core radius".into()));
                }
            }
        }
        Ok(())
    }

    pub fn r_sample(&self) -> f64 {
        self.sizes.iter().copied().fold(0.0, f64::max) + self.margin
    }
}

/// Observations of one replica, indexed `[size][grid point]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicaData {
    pub primary: Vec<Vec<Observation>>,
    pub secondary: Vec<Vec<Observation>>,
}

struct GraphHost {
    ball: TilingBall,
    dual: DualBall,
}

/// Runs every replica of a design. Replica `i` uses its own stream, and
/// results come back in replica order whatever the thread count.
pub fn simulate(design: &Design) -> Result<Vec<ReplicaData>, PercolationError> {
    design.validate()?;
    let master = Seed(design.seed);
    match design.model {
        Model::Graph { p_gon, q_deg } => {
            let hosts: Vec<GraphHost> = design
                .sizes
                .iter()
                .map(|&l| {
                    let ball = build_ball(p_gon, q_deg, l as u32)?;
                    let dual = dual_ball(&ball);
                    Ok(GraphHost { ball, dual })
                })
                .collect::<Result<_, TilingError>>()?;
            let lattices: Vec<(Lattice, Lattice)> =
                hosts.iter().map(|h| (Lattice::primal(&h.ball), Lattice::dual(&h.dual))).collect();
            let max_edges = hosts.iter().map(|h| h.ball.edge_count()).max().unwrap_or(0);
            Ok((0..design.replicas)
                .into_par_iter()
                .map(|i| {
                    let seed = master.replica(tags::BONDS, i as u64);
                    let marks: Vec<f64> = (0..max_edges as u64).map(|e| seed.uniform(e)).collect();
                    let (primary, secondary) = lattices
                        .iter()
                        .map(|(a, b)| (a.sweep(&marks, &design.grid), b.sweep(&marks, &design.grid)))
                        .unzip();
                    ReplicaData { primary, secondary }
                })
                .collect())
        }
        Model::Voronoi { lambda } => (0..design.replicas)
            .into_par_iter()
            .map(|i| {
                let (v, marks) = voronoi_replica(lambda, design.r_sample(), master, i as u64)?;
                let (primary, secondary) = design
                    .sizes
                    .iter()
                    .map(|&r| {
                        let white = Lattice::voronoi(&v, r, design.r_core, true);
                        let black = Lattice::voronoi(&v, r, design.r_core, false);
                        (white.sweep(&marks, &design.grid), black.sweep(&marks, &design.grid))
                    })
                    .unzip();
                Ok(ReplicaData { primary, secondary })
            })
            .collect(),
    }
}

/// Sample seed of replica `i` of a tessellation experiment.
pub fn voronoi_replica_seed(master: Seed, i: u64) -> u64 {
    master.replica(tags::REPLICA, i).0
}

/// The tessellation and color marks of replica `i`; nucleus `j` is white at
/// `p` iff `marks[j] < p`, matching [`ColoredPointSet::sample`].
pub fn voronoi_replica(
    lambda: f64,
    r_sample: f64,
    master: Seed,
    i: u64,
) -> Result<(VoronoiComplex, Vec<f64>), PercolationError> {
    let seed = voronoi_replica_seed(master, i);
    let set = ColoredPointSet::sample(lambda, 0.5, r_sample, seed)?;
    let marks = color_marks(set.len(), Seed(seed).split(tags::COLORS));
    Ok((delaunay(set)?, marks))
}

/// One `(size, p)` row of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub size: f64,
    pub p: f64,
    pub theta: f64,
    pub theta_lo: f64,
    pub theta_hi: f64,
    /// Mean `k` of the primary side (primal bonds or white cells).
    pub kw: f64,
    /// Mean `k` of the secondary side (dual bonds or black cells).
    pub kb: f64,
    pub unique_freq: f64,
    pub theta_b: f64,
    pub unique_freq_b: f64,
    pub hits: f64,
    pub hits_b: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub design: Design,
    pub points: Vec<SweepPoint>,
}

pub const SWEEP_CSV_HEADER: &str = "model,p,lambda,pgon,qdeg,R,replicas,theta,theta_lo,theta_hi,kw,kb,unique_freq,seed";

pub fn summarize(design: &Design, data: &[ReplicaData]) -> SweepResult {
    let n = data.len();
    let mut points = Vec::with_capacity(design.sizes.len() * design.grid.len());
    for (s, &size) in design.sizes.iter().enumerate() {
        for (j, &p) in design.grid.iter().enumerate() {
            let prim = data.iter().map(|r| r.primary[s][j]);
            let sec = data.iter().map(|r| r.secondary[s][j]);
            let reach = prim.clone().filter(|o| o.reach).count();
            let (theta_lo, theta_hi) = wilson(reach, n, Z95);
            let mean = |it: &mut dyn Iterator<Item = f64>| it.sum::<f64>() / n as f64;
            points.push(SweepPoint {
                size,
                p,
                theta: reach as f64 / n as f64,
                theta_lo,
                theta_hi,
                kw: mean(&mut prim.clone().map(|o| o.k as f64)),
                kb: mean(&mut sec.clone().map(|o| o.k as f64)),
                unique_freq: mean(&mut prim.clone().map(|o| f64::from(u8::from(o.unique())))),
                theta_b: mean(&mut sec.clone().map(|o| f64::from(u8::from(o.reach)))),
                unique_freq_b: mean(&mut sec.clone().map(|o| f64::from(u8::from(o.unique())))),
                hits: mean(&mut prim.map(|o| o.shell_hits as f64)),
                hits_b: mean(&mut sec.map(|o| o.shell_hits as f64)),
            });
        }
    }
    SweepResult { design: design.clone(), points }
}

impl SweepResult {
    pub fn point(&self, size_index: usize, grid_index: usize) -> &SweepPoint {
        &self.points[size_index * self.design.grid.len() + grid_index]
    }

    pub fn to_csv(&self) -> String {
        let d = &self.design;
        let (lambda, pgon, qdeg) = match d.model {
            Model::Graph { p_gon, q_deg } => (String::new(), p_gon.to_string(), q_deg.to_string()),
            Model::Voronoi { lambda } => (lambda.to_string(), String::new(), String::new()),
        };
        let mut out = String::from(SWEEP_CSV_HEADER);
        out.push('\n');
        for pt in &self.points {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{}\n",
                d.model.name(),
                pt.p,
                lambda,
                pgon,
                qdeg,
                pt.size,
                d.replicas,
                pt.theta,
                pt.theta_lo,
                pt.theta_hi,
                pt.kw,
                pt.kb,
                pt.unique_freq,
                d.seed
            ));
        }
        out
    }
}

/// Frequency with a 95% Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frequency {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Frequency that the core cluster reaches the shell of one window.
pub fn reach_probability(
    model: Model,
    r_core: f64,
    size: f64,
    p: f64,
    replicas: usize,
    seed: u64,
) -> Result<Frequency, PercolationError> {
    let mut design = Design::new(model, vec![size], vec![p], replicas, seed);
    design.r_core = r_core;
    let data = simulate(&design)?;
    let hits = data.iter().filter(|r| r.primary[0][0].reach).count();
    let (lo, hi) = wilson(hits, replicas, Z95);
    Ok(Frequency { value: hits as f64 / replicas as f64, lo, hi })
}

/// Critical-point estimate with a bootstrap interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    /// Crossing of each successive pair of sizes.
    pub crossings: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    /// The observable grows with `p` (primal bonds, white cells).
    Rising,
    /// The observable shrinks with `p` (dual bonds, black cells).
    Falling,
}

/// Mean shell hits per size and grid point over the given replicas.
fn hit_curves(data: &[ReplicaData], idx: &[usize], secondary: bool, sizes: usize, g: usize) -> Vec<Vec<f64>> {
    let mut curves = vec![vec![0.0; g]; sizes];
    for &r in idx {
        let obs = if secondary { &data[r].secondary } else { &data[r].primary };
        for s in 0..sizes {
            for j in 0..g {
                curves[s][j] += obs[s][j].shell_hits as f64;
            }
        }
    }
    let n = idx.len() as f64;
    curves.iter_mut().flatten().for_each(|x| *x /= n);
    curves
}

/// Where `big − small` changes sign, found from the supercritical end of
/// the grid and linearly interpolated.
fn crossing(grid: &[f64], small: &[f64], big: &[f64], dir: Direction) -> Option<f64> {
    let d: Vec<f64> = big.iter().zip(small).map(|(b, s)| b - s).collect();
    let g = grid.len();
    match dir {
        Direction::Rising => {
            let j = (0..g).rev().find(|&j| d[j] < 0.0)?;
            if j + 1 == g {
                return None;
            }
            Some(grid[j] + (grid[j + 1] - grid[j]) * (-d[j]) / (d[j + 1] - d[j]))
        }
        Direction::Falling => {
            let j = (0..g).find(|&j| d[j] < 0.0)?;
            if j == 0 {
                return None;
            }
            Some(grid[j - 1] + (grid[j] - grid[j - 1]) * d[j - 1] / (d[j - 1] - d[j]))
        }
    }
}

fn median_crossing(grid: &[f64], curves: &[Vec<f64>], dir: Direction) -> Option<(f64, Vec<f64>)> {
    let xs: Vec<f64> = curves.windows(2).map(|w| crossing(grid, &w[0], &w[1], dir)).collect::<Option<_>>()?;
    Some((stats::median(&xs), xs))
}

fn crossing_estimate(design: &Design, data: &[ReplicaData], secondary: bool) -> Result<Estimate, PercolationError> {
    if design.sizes.len() < 3 {
        return Err(PercolationError::InvalidParameter("a ladder needs at least 3 sizes".into()));
    }
    let dir = if secondary { Direction::Falling } else { Direction::Rising };
    let (sizes, g) = (design.sizes.len(), design.grid.len());
    let no_crossing = || PercolationError::NoCrossing { lo: design.grid[0], hi: design.grid[g - 1] };
    let all: Vec<usize> = (0..data.len()).collect();
    let (value, crossings) =
        median_crossing(&design.grid, &hit_curves(data, &all, secondary, sizes, g), dir).ok_or_else(no_crossing)?;
    let mut rng = Seed(design.seed).split(tags::BOOTSTRAP).rng();
    let mut boots = Vec::with_capacity(BOOTSTRAP_ROUNDS);
    let mut idx = vec![0usize; data.len()];
    for _ in 0..BOOTSTRAP_ROUNDS {
        idx.iter_mut().for_each(|i| *i = rng.random_range(0..data.len()));
        let curves = hit_curves(data, &idx, secondary, sizes, g);
        if let Some((x, _)) = median_crossing(&design.grid, &curves, dir) {
            boots.push(x);
        }
    }
    // resamples without a crossing fall outside the grid; count them at
    // the grid edge they ran off
    let missing = BOOTSTRAP_ROUNDS - boots.len();
    boots.extend(std::iter::repeat_n(design.grid[if secondary { 0 } else { g - 1 }], missing));
    boots.sort_by(f64::total_cmp);
    let lo = stats::percentile(&boots, 0.025).min(value);
    let hi = stats::percentile(&boots, 0.975).max(value);
    Ok(Estimate { value, lo, hi, crossings })
}

/// Critical point of the primary side from crossings of the expected number
/// of shell sites joined to the core, over successive window sizes.
pub fn estimate_pc(design: &Design, data: &[ReplicaData]) -> Result<Estimate, PercolationError> {
    crossing_estimate(design, data, false)
}

/// Uniqueness threshold with its supporting quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct PuEstimate {
    pub pu: Estimate,
    /// Critical point of the dual ball (graphs) or of black cells
    /// (tessellations), `1 − p̂_u`.
    pub pc_dual: Estimate,
    /// Mean uniqueness frequency of the largest window below and above
    /// `p̂_u`.
    pub unique_below: f64,
    pub unique_above: f64,
}

/// Graphs: `p̂_u` is where the dual configuration stops percolating,
/// i.e. `1 − p̂_c` of the dual ball. Tessellations: `1 − p̂_c` by color
/// symmetry.
pub fn estimate_pu(design: &Design, data: &[ReplicaData]) -> Result<PuEstimate, PercolationError> {
    let pu = match design.model {
        Model::Graph { .. } => crossing_estimate(design, data, true)?,
        Model::Voronoi { .. } => {
            let pc = estimate_pc(design, data)?;
            Estimate {
                value: 1.0 - pc.value,
                lo: 1.0 - pc.hi,
                hi: 1.0 - pc.lo,
                crossings: pc.crossings.iter().map(|x| 1.0 - x).collect(),
            }
        }
    };
    let pc_dual = Estimate {
        value: 1.0 - pu.value,
        lo: 1.0 - pu.hi,
        hi: 1.0 - pu.lo,
        crossings: pu.crossings.iter().map(|x| 1.0 - x).collect(),
    };
    let summary = summarize(design, data);
    let last = design.sizes.len() - 1;
    let (mut below, mut above) = (Vec::new(), Vec::new());
    for (j, &p) in design.grid.iter().enumerate() {
        let u = summary.point(last, j).unique_freq;
        if p < pu.value {
            below.push(u);
        } else {
            above.push(u);
        }
    }
    let avg = |v: &[f64]| if v.is_empty() { f64::NAN } else { v.iter().sum::<f64>() / v.len() as f64 };
    Ok(PuEstimate { unique_below: avg(&below), unique_above: avg(&above), pu, pc_dual })
}

/// Two-point function estimates and their exponential fit.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub distances: Vec<f64>,
    pub tau: Vec<f64>,
    /// Fitted `log τ̂ = d·log a + b` over `d > 0` with `τ̂ > 0`.
    pub fit: LinearFit,
    /// `a = exp(slope)`.
    pub rate: f64,
}

fn fit_decay(distances: Vec<f64>, tau: Vec<f64>) -> Result<DecayFit, PercolationError> {
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        distances.iter().zip(&tau).filter(|(d, t)| **d > 0.0 && **t > 0.0).map(|(d, t)| (*d, t.ln())).unzip();
    let fit = stats::linear_fit(&xs, &ys).ok_or(PercolationError::InsufficientData(xs.len()))?;
    Ok(DecayFit { distances, tau, rate: fit.slope.exp(), fit })
}

/// Bond percolation on `{p_gon, q_deg}`: `τ̂(d)` is the mean fraction of the
/// sphere of radius `d` about a vertex that lies in its open cluster, for
/// `d = 0..=max_distance`.
pub fn connectivity_decay(
    p_gon: u32,
    q_deg: u32,
    p: f64,
    max_distance: u32,
    replicas: usize,
    seed: u64,
) -> Result<DecayFit, PercolationError> {
    check_probability(p)?;
    if replicas == 0 {
        return Err(PercolationError::InvalidParameter("need at least one replica".into()));
    }
    // rings up to max_distance + 1 are complete
    let ball = build_ball(p_gon, q_deg, max_distance + 3)?;
    let graph = ball.graph();
    let center = 0;
    let dist = graph.bfs_distances(center);
    let dmax = max_distance as usize;
    let mut sphere = vec![0u64; dmax + 1];
    for &d in &dist {
        if (d as usize) <= dmax {
            sphere[d as usize] += 1;
        }
    }
    let master = Seed(seed);
    let counts: Vec<Vec<u64>> = (0..replicas)
        .into_par_iter()
        .map_init(
            || (vec![false; graph.vertex_count()], Vec::new(), VecDeque::new()),
            |(seen, touched, queue), i| {
                let s = master.replica(tags::BONDS, i as u64);
                let mut hits = vec![0u64; dmax + 1];
                seen[center] = true;
                touched.push(center);
                queue.push_back(center);
                while let Some(v) = queue.pop_front() {
                    if (dist[v] as usize) <= dmax {
                        hits[dist[v] as usize] += 1;
                    }
                    for &(w, e) in graph.neighbors(v) {
                        if !seen[w as usize] && s.uniform(e as u64) < p {
                            seen[w as usize] = true;
                            touched.push(w as usize);
                            queue.push_back(w as usize);
                        }
                    }
                }
                for v in touched.drain(..) {
                    seen[v] = false;
                }
                hits
            },
        )
        .collect();
    let mut tau = vec![0.0; dmax + 1];
    for hits in &counts {
        for d in 0..=dmax {
            tau[d] += hits[d] as f64 / sphere[d] as f64;
        }
    }
    tau.iter_mut().for_each(|t| *t /= replicas as f64);
    fit_decay((0..=dmax).map(|d| d as f64).collect(), tau)
}

/// Voronoi analog: `τ̂(d)` is the frequency that the cell of the origin
/// and the cell of a point at distance `d` (uniform direction) are white
/// and in one white cluster.
pub fn voronoi_connectivity_decay(
    lambda: f64,
    p: f64,
    distances: &[f64],
    replicas: usize,
    seed: u64,
) -> Result<DecayFit, PercolationError> {
    check_probability(p)?;
    let r_sample = distances.iter().copied().fold(0.0, f64::max) + DEFAULT_MARGIN;
    let master = Seed(seed);
    let hits: Vec<Vec<bool>> = (0..replicas)
        .into_par_iter()
        .map(|i| {
            let (v, marks) = voronoi_replica(lambda, r_sample, master, i as u64)?;
            let white: Vec<bool> = marks.iter().map(|&u| u < p).collect();
            let labels = label_clusters(v.graph(), Marks::Sites(&white));
            let o = v.origin_cell();
            let dirs = Seed(voronoi_replica_seed(master, i as u64)).split(tags::ISOMETRY);
            Ok(distances
                .iter()
                .enumerate()
                .map(|(k, &d)| {
                    let y = HPoint::new(d, std::f64::consts::TAU * dirs.uniform(k as u64));
                    let c = nearest_nucleus(&v, y);
                    labels.label(o).is_some() && labels.label(o) == labels.label(c)
                })
                .collect())
        })
        .collect::<Result<_, PercolationError>>()?;
    let tau = (0..distances.len())
        .map(|k| hits.iter().filter(|h| h[k]).count() as f64 / replicas as f64)
        .collect();
    fit_decay(distances.to_vec(), tau)
}

fn nearest_nucleus(v: &VoronoiComplex, y: HPoint) -> usize {
    (0..v.len())
        .min_by(|&a, &b| dist(y, v.nuclei()[a]).total_cmp(&dist(y, v.nuclei()[b])))
        .expect("nonempty complex")
}
