//! Hyperbolic plane primitives.
//!
//! Points are stored in hyperbolic polar form `(rho, theta)` about a fixed
//! origin. Poincaré disk coordinates and hyperboloid (Minkowski) coordinates
//! are derived on demand.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use thiserror::Error;

/// Default working radius. Beyond this, disk coordinates lose too many digits.
pub const DEFAULT_RADIUS_CAP: f64 = 12.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("degenerate configuration: {0}")]
    Degenerate(&'static str),
}

/// A point of the hyperbolic plane in polar form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HPoint {
    rho: f64,
    theta: f64,
}

impl HPoint {
    pub const ORIGIN: HPoint = HPoint { rho: 0.0, theta: 0.0 };

    /// Builds a point from polar data, normalizing a negative radius and
    /// wrapping the angle into `[0, 2π)`.
    pub fn new(rho: f64, theta: f64) -> Self {
        let (rho, theta) = if rho < 0.0 { (-rho, theta + PI) } else { (rho, theta) };
        let theta = if rho == 0.0 { 0.0 } else { wrap_angle(theta) };
        HPoint { rho, theta }
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Euclidean radius of the Poincaré image, `tanh(rho / 2)`.
    pub fn disk_radius(&self) -> f64 {
        (0.5 * self.rho).tanh()
    }

    pub fn to_disk(&self) -> Complex64 {
        Complex64::from_polar(self.disk_radius(), self.theta)
    }

    /// Inverse of [`HPoint::to_disk`]. Returns `None` outside the open unit disk.
    pub fn from_disk(z: Complex64) -> Option<Self> {
        let r = z.norm();
        if !(r < 1.0) {
            return None;
        }
        Some(HPoint::new(2.0 * r.atanh(), z.arg()))
    }

    /// Hyperboloid lift `(cosh ρ, sinh ρ cos θ, sinh ρ sin θ)`.
    pub fn to_hyperboloid(&self) -> [f64; 3] {
        let s = self.rho.sinh();
        [self.rho.cosh(), s * self.theta.cos(), s * self.theta.sin()]
    }

    /// Projects a future-timelike vector of the hyperboloid model back to a point.
    fn from_hyperboloid(x: [f64; 3]) -> Self {
        let s = x[1].hypot(x[2]);
        HPoint::new(s.asinh(), x[2].atan2(x[1]))
    }
}

fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Hyperbolic distance.
///
/// Uses the half-angle form of the law of cosines,
/// `sinh²(d/2) = sinh²((ρ₁−ρ₂)/2) + sinh ρ₁ sinh ρ₂ sin²(Δθ/2)`,
/// which stays accurate for nearby points.
pub fn dist(a: HPoint, b: HPoint) -> f64 {
    let dr = (0.5 * (a.rho - b.rho)).sinh();
    let ds = (0.5 * (a.theta - b.theta)).sin();
    let h = dr * dr + a.rho.sinh() * b.rho.sinh() * ds * ds;
    2.0 * h.max(0.0).sqrt().asinh()
}

/// Area of a hyperbolic disk of radius `r`.
pub fn ball_area(r: f64) -> f64 {
    // 2π(cosh r − 1) = 4π sinh²(r/2), cancellation-free near 0
    let s = (0.5 * r).sinh();
    4.0 * PI * s * s
}

fn minkowski(a: [f64; 3], b: [f64; 3]) -> f64 {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Result of a circumcenter query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Circumcenter {
    /// The equidistant point and the common distance.
    Center(HPoint, f64),
    /// No hyperbolic circle passes through the three points (the locus is a
    /// horocycle or hypercycle).
    Unbounded,
}

/// Hyperbolic circumcenter of three points.
///
/// Lifts the points to the hyperboloid; the center is the timelike normal of
/// the affine plane through the lifts.
pub fn circumcenter(a: HPoint, b: HPoint, c: HPoint) -> Result<Circumcenter, GeometryError> {
    let pa = a.to_hyperboloid();
    let pb = b.to_hyperboloid();
    let pc = c.to_hyperboloid();
    let u = [pb[0] - pa[0], pb[1] - pa[1], pb[2] - pa[2]];
    let v = [pc[0] - pa[0], pc[1] - pa[1], pc[2] - pa[2]];
    // Euclidean cross product with the time component sign-flipped is
    // Minkowski-orthogonal to both u and v.
    let n = [
        -(u[1] * v[2] - u[2] * v[1]),
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    let scale = norm3(u) * norm3(v);
    let nn = norm3(n);
    if scale == 0.0 || nn <= 1e-14 * scale {
        return Err(GeometryError::Degenerate("coincident points"));
    }
    // all three lifts on a plane through the apex: points on one geodesic
    let offset = minkowski(n, pa);
    if offset.abs() <= 1e-12 * nn * norm3(pa) {
        return Err(GeometryError::Degenerate("points on one geodesic"));
    }
    let q = minkowski(n, n);
    if q >= 0.0 {
        return Ok(Circumcenter::Unbounded);
    }
    let k = (-q).sqrt();
    let sign = if n[0] < 0.0 { -1.0 } else { 1.0 };
    let m = [sign * n[0] / k, sign * n[1] / k, sign * n[2] / k];
    let center = HPoint::from_hyperboloid(m);
    let r = dist(center, a);
    Ok(Circumcenter::Center(center, r))
}

fn norm3(x: [f64; 3]) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

/// An isometry of the hyperbolic plane acting on the Poincaré disk as
/// `z ↦ (a w + b) / (conj(b) w + conj(a))`, where `w = z` for
/// orientation-preserving maps and `w = conj(z)` otherwise.
/// The coefficients satisfy `|a|² − |b|² = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Isometry {
    a: Complex64,
    b: Complex64,
    reversing: bool,
}

impl Isometry {
    pub const IDENTITY: Isometry = Isometry {
        a: Complex64::new(1.0, 0.0),
        b: Complex64::new(0.0, 0.0),
        reversing: false,
    };

    /// Builds an isometry from Möbius coefficients, rescaling so that
    /// `|a|² − |b|² = 1`. Returns `None` if the coefficients do not describe a
    /// disk automorphism.
    pub fn from_coefficients(a: Complex64, b: Complex64, reversing: bool) -> Option<Self> {
        let det = a.norm_sqr() - b.norm_sqr();
        if !(det > 0.0) {
            return None;
        }
        let s = det.sqrt();
        Some(Isometry { a: a / s, b: b / s, reversing })
    }

    /// Rotation about the origin by `angle`.
    pub fn rotation(angle: f64) -> Self {
        Isometry {
            a: Complex64::from_polar(1.0, 0.5 * angle),
            b: Complex64::new(0.0, 0.0),
            reversing: false,
        }
    }

    /// The hyperbolic translation along the geodesic through the origin that
    /// carries the origin to `m`.
    pub fn translation_to(m: HPoint) -> Self {
        Isometry {
            a: Complex64::new((0.5 * m.rho).cosh(), 0.0),
            b: Complex64::from_polar((0.5 * m.rho).sinh(), m.theta),
            reversing: false,
        }
    }

    /// Reflection in the real axis of the disk.
    pub fn conjugation() -> Self {
        Isometry { reversing: true, ..Isometry::IDENTITY }
    }

    /// Reflection in the geodesic through two distinct points.
    pub fn reflection_through(p: HPoint, q: HPoint) -> Self {
        let to_origin = Isometry::translation_to(p).inverse();
        let q0 = to_origin.apply(q);
        let align = Isometry::rotation(q0.theta);
        // rotate the geodesic onto the real axis, mirror, undo
        align
            .compose(&Isometry::conjugation())
            .compose(&align.inverse())
            .conjugate_by(&to_origin)
    }

    pub fn is_orientation_preserving(&self) -> bool {
        !self.reversing
    }

    fn act(&self, z: Complex64) -> Complex64 {
        let w = if self.reversing { z.conj() } else { z };
        (self.a * w + self.b) / (self.b.conj() * w + self.a.conj())
    }

    /// Applies the isometry, renormalizing to polar form.
    pub fn apply(&self, p: HPoint) -> HPoint {
        let z = p.to_disk();
        let w = if self.reversing { z.conj() } else { z };
        let den = self.b.conj() * w + self.a.conj();
        let image = (self.a * w + self.b) / den;
        let r = image.norm();
        let rho = if r < 0.5 {
            2.0 * r.atanh()
        } else {
            // 1 − |image|² = (1 − |z|²) / |den|² = sech²(ρ/2) / |den|²,
            // which avoids forming 1 − r near the ideal boundary.
            let c = (0.5 * p.rho).cosh();
            (2.0 * den.norm_sqr() * c * c - 1.0).max(1.0).acosh()
        };
        HPoint::new(rho, image.arg())
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        // With J(z) = conj(z), J ∘ M_{a,b} = M_{conj a, conj b} ∘ J.
        let (oa, ob) = if self.reversing {
            (other.a.conj(), other.b.conj())
        } else {
            (other.a, other.b)
        };
        let a = self.a * oa + self.b * ob.conj();
        let b = self.a * ob + self.b * oa.conj();
        Isometry { a, b, reversing: self.reversing != other.reversing }
    }

    pub fn inverse(&self) -> Isometry {
        let plain = Isometry { a: self.a.conj(), b: -self.b, reversing: false };
        if self.reversing {
            // (M ∘ J)⁻¹ = J ∘ M⁻¹
            Isometry::conjugation().compose(&plain)
        } else {
            plain
        }
    }

    /// `g⁻¹ ∘ self ∘ g`.
    pub fn conjugate_by(&self, g: &Isometry) -> Isometry {
        g.inverse().compose(self).compose(g)
    }

    /// Image of a disk coordinate. Exposed for rendering.
    pub fn apply_disk(&self, z: Complex64) -> Complex64 {
        self.act(z)
    }
}

/// A closed geodesic polygon, vertices in counterclockwise order.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicPolygon {
    vertices: Vec<HPoint>,
}

impl GeodesicPolygon {
    pub fn new(vertices: Vec<HPoint>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::Degenerate("polygon needs at least 3 vertices"));
        }
        Ok(GeodesicPolygon { vertices })
    }

    pub fn vertices(&self) -> &[HPoint] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Interior angles at each vertex.
    pub fn interior_angles(&self) -> Vec<f64> {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let prev = self.vertices[(i + n - 1) % n];
                let next = self.vertices[(i + 1) % n];
                vertex_angle(prev, self.vertices[i], next)
            })
            .collect()
    }

    /// Whether `x` lies in the interior (tested via the turning of edge
    /// directions seen from `x`, valid for convex polygons).
    pub fn contains_convex(&self, x: HPoint) -> bool {
        let to_origin = Isometry::translation_to(x).inverse();
        let img: Vec<Complex64> = self.vertices.iter().map(|v| to_origin.apply(*v).to_disk()).collect();
        let n = img.len();
        (0..n).all(|i| origin_left_of(img[i], img[(i + 1) % n]))
    }
}

/// Whether the origin lies strictly left of the geodesic from `a` to `b`.
/// The Minkowski triple product of the lifts with the apex has the sign of
/// the Euclidean cross product of the disk images.
fn origin_left_of(a: Complex64, b: Complex64) -> bool {
    a.re * b.im - a.im * b.re > 0.0
}

/// Interior angle at `v` of the polygon corner `prev → v → next`, measured
/// counterclockwise from the tangent toward `next` to the tangent toward `prev`.
pub fn vertex_angle(prev: HPoint, v: HPoint, next: HPoint) -> f64 {
    let to_origin = Isometry::translation_to(v).inverse();
    let a = to_origin.apply(next).theta();
    let b = to_origin.apply(prev).theta();
    let ang = (b - a).rem_euclid(TAU);
    if ang >= TAU {
        0.0
    } else {
        ang
    }
}

/// Distance from `x` to the geodesic segment `[a, b]`.
pub fn dist_to_segment(x: HPoint, a: HPoint, b: HPoint) -> f64 {
    let g = Isometry::translation_to(a).inverse();
    let (b, x) = (g.apply(b), g.apply(x));
    // a is now the origin and the segment is radial; the closest point of
    // the full ray solves tanh t = tanh ρ cos Δθ
    let c = (x.theta() - b.theta()).cos();
    let t = if c <= 0.0 { 0.0 } else { (x.rho().tanh() * c).atanh().min(b.rho()) };
    dist(x, HPoint::new(t, b.theta()))
}

/// Area of a geodesic polygon by angle defect: `Σ(π − αᵢ) − 2π`.
pub fn polygon_area(poly: &GeodesicPolygon) -> Result<f64, GeometryError> {
    let n = poly.len() as f64;
    let angle_sum: f64 = poly.interior_angles().iter().sum();
    let area = (n - 2.0) * PI - angle_sum;
    if !(area > 0.0) {
        return Err(GeometryError::Degenerate("angle sum at or above the Euclidean value"));
    }
    Ok(area)
}
