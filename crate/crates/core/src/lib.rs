//! Percolation on hyperbolic {p,q} tilings and Poisson-Voronoi tessellations.

pub mod densities;
pub mod graph;
pub mod hypgeo;
pub mod hypvoronoi;
pub mod percolation;
pub mod pointprocess;
pub mod rng;
pub mod stats;
pub mod tiling;

pub use densities::{run_densities, DensityEstimate};
pub use graph::{Graph, UnionFind};
pub use hypgeo::{dist, GeodesicPolygon, HPoint, Isometry};
pub use hypvoronoi::{delaunay, VoronoiComplex, Window};
pub use percolation::{Design, Lattice, Model, Observation, SweepResult};
pub use pointprocess::{Color, ColoredPointSet};
pub use rng::Seed;
pub use tiling::{build_ball, dual_ball, DualBall, TilingBall};
