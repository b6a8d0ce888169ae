//! Vertex, edge and face densities of Poisson–Voronoi tessellations.

use std::f64::consts::PI;

use rayon::prelude::*;
use thiserror::Error;

use crate::hypgeo::{ball_area, polygon_area};
use crate::hypvoronoi::{delaunay, VoronoiComplex, VoronoiError, Window};
use crate::pointprocess::{ColoredPointSet, PointProcessError};
use crate::rng::{tags, Seed};
use crate::stats::mean_se;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DensityError {
    #[error("the cell of the origin is not interior")]
    OriginNotInterior,
    #[error("no replica produced an estimate ({0} discarded)")]
    NoReplicas(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Voronoi(#[from] VoronoiError),
    #[error(transparent)]
    PointProcess(#[from] PointProcessError),
}

/// Window counts of a single tessellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicaDensities {
    pub vertices: usize,
    pub degree_sum: usize,
    pub nuclei: usize,
    pub window_area: f64,
    pub origin_cell_area: f64,
}

impl ReplicaDensities {
    pub fn d_v(&self) -> f64 {
        self.vertices as f64 / self.window_area
    }

    pub fn d_e(&self) -> f64 {
        self.degree_sum as f64 / (2.0 * self.window_area)
    }

    pub fn d_f_count(&self) -> f64 {
        self.nuclei as f64 / self.window_area
    }

    pub fn euler(&self) -> f64 {
        2.0 * PI * (self.d_f_count() - self.d_e() + self.d_v())
    }
}

/// Pooled estimates over replicas, each a mean with its standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate {
    pub d_v: f64,
    pub d_v_se: f64,
    pub d_e: f64,
    pub d_e_se: f64,
    pub d_f_count: f64,
    pub d_f_count_se: f64,
    pub d_f_inverse_area: f64,
    pub d_f_inverse_area_se: f64,
    pub origin_areas: Vec<f64>,
    pub euler: f64,
    pub euler_se: f64,
    pub window: Window,
    pub replicas: usize,
    /// Replicas dropped because the origin cell was not interior.
    pub discarded: usize,
}

/// Counts of one complex in the window: Voronoi vertices and nuclei by
/// position, and the area of the origin cell.
pub fn estimate_densities(v: &VoronoiComplex, window: Window) -> Result<ReplicaDensities, DensityError> {
    let r = window.r_window();
    let inside = v.voronoi_vertices().iter().filter(|w| w.point.rho() <= r);
    let (vertices, degree_sum) = inside.fold((0, 0), |(n, d), w| (n + 1, d + w.degree()));
    let nuclei = v.nuclei().iter().filter(|x| x.rho() <= r).count();
    let origin = v.cell_polygon(v.origin_cell()).map_err(|_| DensityError::OriginNotInterior)?;
    let origin_cell_area = polygon_area(origin).map_err(|_| DensityError::OriginNotInterior)?;
    Ok(ReplicaDensities { vertices, degree_sum, nuclei, window_area: ball_area(r), origin_cell_area })
}

impl DensityEstimate {
    pub fn pool(samples: &[ReplicaDensities], window: Window, discarded: usize) -> Result<Self, DensityError> {
        if samples.is_empty() {
            return Err(DensityError::NoReplicas(discarded));
        }
        let stat = |f: &dyn Fn(&ReplicaDensities) -> f64| mean_se(&samples.iter().map(f).collect::<Vec<_>>());
        let (d_v, d_v_se) = stat(&|s| s.d_v());
        let (d_e, d_e_se) = stat(&|s| s.d_e());
        let (d_f_count, d_f_count_se) = stat(&|s| s.d_f_count());
        let (d_f_inverse_area, d_f_inverse_area_se) = stat(&|s| s.origin_cell_area.recip());
        let (euler, euler_se) = stat(&|s| s.euler());
        Ok(DensityEstimate {
            d_v,
            d_v_se,
            d_e,
            d_e_se,
            d_f_count,
            d_f_count_se,
            d_f_inverse_area,
            d_f_inverse_area_se,
            origin_areas: samples.iter().map(|s| s.origin_cell_area).collect(),
            euler,
            euler_se,
            window,
            replicas: samples.len(),
            discarded,
        })
    }

    /// Whether the two face-density estimators agree within `sigmas`
    /// combined standard errors.
    pub fn face_estimators_agree(&self, sigmas: f64) -> bool {
        let se = self.d_f_count_se.hypot(self.d_f_inverse_area_se);
        (self.d_f_count - self.d_f_inverse_area).abs() <= sigmas * se
    }
}

/// `2π(D_F − D_E + D_V)` with its standard error, from per-replica values.
pub fn euler_check(d: &DensityEstimate) -> (f64, f64) {
    (d.euler, d.euler_se)
}

/// The identity evaluated on given densities.
pub fn euler_combination(d_f: f64, d_e: f64, d_v: f64) -> f64 {
    2.0 * PI * (d_f - d_e + d_v)
}

/// Independent replicas at intensity `lambda`. Replica `i` samples with
/// seed `Seed(seed).replica(REPLICA, i)`.
pub fn run_densities(lambda: f64, window: Window, replicas: usize, seed: u64) -> Result<DensityEstimate, DensityError> {
    if replicas == 0 {
        return Err(DensityError::InvalidParameter("need at least one replica".into()));
    }
    let master = Seed(seed);
    let results: Vec<Result<ReplicaDensities, DensityError>> = (0..replicas as u64)
        .into_par_iter()
        .map(|i| {
            let s = master.replica(tags::REPLICA, i).0;
            let set = ColoredPointSet::sample(lambda, 0.5, window.r_sample(), s)?;
            estimate_densities(&delaunay(set)?, window)
        })
        .collect();
    let mut samples = Vec::with_capacity(replicas);
    let mut discarded = 0;
    for r in results {
        match r {
            Ok(s) => samples.push(s),
            Err(DensityError::OriginNotInterior) => discarded += 1,
            Err(e) => return Err(e),
        }
    }
    DensityEstimate::pool(&samples, window, discarded)
}

pub const DENSITY_CSV_HEADER: &str = "lambda,R,Rw,replicas,DV,DV_se,DE,DF_count,DF_inv,euler,euler_se,seed";

pub fn density_csv_row(lambda: f64, d: &DensityEstimate, seed: u64) -> String {
    format!(
        "{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{}",
        lambda,
        d.window.r_sample(),
        d.window.r_window(),
        d.replicas,
        d.d_v,
        d.d_v_se,
        d.d_e,
        d.d_f_count,
        d.d_f_inverse_area,
        d.euler,
        d.euler_se,
        seed
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_identities_give_minus_one() {
        for lambda in [0.3, 1.0, 4.0] {
            let d_f = lambda;
            let d_v = 2.0 * lambda + 1.0 / PI;
            let d_e = 3.0 * lambda + 3.0 / (2.0 * PI);
            assert!((euler_combination(d_f, d_e, d_v) + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn edges_are_one_and_a_half_vertices() {
        let set = ColoredPointSet::sample(1.0, 0.5, 5.0, 4).unwrap();
        let v = delaunay(set).unwrap();
        let d = estimate_densities(&v, Window::new(5.0, 3.0).unwrap()).unwrap();
        assert_eq!(2 * d.degree_sum, 3 * 2 * d.vertices);
        assert_eq!(d.d_e(), 1.5 * d.d_v());
    }
}
