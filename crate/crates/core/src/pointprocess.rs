//! Poisson point processes on hyperbolic balls with Bernoulli coloring.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

use crate::hypgeo::{ball_area, HPoint, DEFAULT_RADIUS_CAP};
use crate::rng::{tags, Seed};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PointProcessError {
    #[error("sampling radius {radius} exceeds the working radius cap {cap}")]
    CapExceeded { radius: f64, cap: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Color {
    White,
    Black,
}

impl Color {
    fn symbol(self) -> char {
        match self {
            Color::White => 'W',
            Color::Black => 'B',
        }
    }
}

/// A Poisson sample on the ball of radius `radius` together with its
/// Bernoulli coloring.
#[derive(Debug, Clone, PartialEq)]
pub struct ColoredPointSet {
    nuclei: Vec<HPoint>,
    colors: Vec<Color>,
    lambda: f64,
    p: f64,
    radius: f64,
    seed: u64,
}

impl ColoredPointSet {
    pub fn new(
        nuclei: Vec<HPoint>,
        colors: Vec<Color>,
        lambda: f64,
        p: f64,
        radius: f64,
        seed: u64,
    ) -> Result<Self, PointProcessError> {
        if !(lambda > 0.0) {
            return Err(PointProcessError::InvalidParameter(format!("lambda must be positive, got {lambda}")));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(PointProcessError::InvalidParameter(format!("p must lie in [0, 1], got {p}")));
        }
        if nuclei.len() != colors.len() {
            return Err(PointProcessError::InvalidParameter("one color per nucleus".into()));
        }
        if let Some(x) = nuclei.iter().find(|x| x.rho() > radius) {
            return Err(PointProcessError::InvalidParameter(format!(
                "nucleus at rho {} outside sampling radius {radius}",
                x.rho()
            )));
        }
        Ok(ColoredPointSet { nuclei, colors, lambda, p, radius, seed })
    }

    /// Samples intensity-`lambda` points on the ball of radius `radius` and
    /// colors them white with probability `p`. Points and colors come from
    /// independent sub-streams of `seed`.
    pub fn sample(lambda: f64, p: f64, radius: f64, seed: u64) -> Result<Self, PointProcessError> {
        let root = Seed(seed);
        let nuclei = sample_poisson_ball(lambda, radius, root.split(tags::POINTS))?;
        let marks = color_marks(nuclei.len(), root.split(tags::COLORS));
        let colors = marks_to_colors(&marks, p);
        ColoredPointSet::new(nuclei, colors, lambda, p, radius, seed)
    }

    pub fn nuclei(&self) -> &[HPoint] {
        &self.nuclei
    }

    pub fn colors(&self) -> &[Color] {
        &self.colors
    }

    pub fn len(&self) -> usize {
        self.nuclei.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nuclei.is_empty()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Intensity of the white points, `pλ`.
    pub fn lambda_white(&self) -> f64 {
        self.p * self.lambda
    }

    /// Intensity of the black points, `(1 − p)λ`.
    pub fn lambda_black(&self) -> f64 {
        (1.0 - self.p) * self.lambda
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn white_count(&self) -> usize {
        self.colors.iter().filter(|c| **c == Color::White).count()
    }

    /// Line-oriented text form: a `#hpp v1` header, then one
    /// `rho theta color` line per nucleus with 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(48 * (self.nuclei.len() + 1));
        writeln!(
            out,
            "#hpp v1 lambda={} p={} R={} seed={}",
            self.lambda, self.p, self.radius, self.seed
        )
        .unwrap();
        for (x, c) in self.nuclei.iter().zip(&self.colors) {
            writeln!(out, "{:.16e} {:.16e} {}", x.rho(), x.theta(), c.symbol()).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, PointProcessError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or(PointProcessError::Parse { line: 1, msg: "empty input".into() })?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("#hpp") || fields.next() != Some("v1") {
            return Err(PointProcessError::Parse { line: 1, msg: "expected `#hpp v1` header".into() });
        }
        let mut lambda = None;
        let mut p = None;
        let mut radius = None;
        let mut seed = None;
        for kv in fields {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| PointProcessError::Parse { line: 1, msg: format!("bad header field `{kv}`") })?;
            let bad = |_| PointProcessError::Parse { line: 1, msg: format!("bad value for `{k}`") };
            match k {
                "lambda" => lambda = Some(v.parse::<f64>().map_err(bad)?),
                "p" => p = Some(v.parse::<f64>().map_err(bad)?),
                "R" => radius = Some(v.parse::<f64>().map_err(bad)?),
                "seed" => {
                    seed = Some(v.parse::<u64>().map_err(|_| PointProcessError::Parse {
                        line: 1,
                        msg: "bad value for `seed`".into(),
                    })?)
                }
                _ => return Err(PointProcessError::Parse { line: 1, msg: format!("unknown header key `{k}`") }),
            }
        }
        let missing = |k: &str| PointProcessError::Parse { line: 1, msg: format!("missing `{k}`") };
        let (lambda, p, radius, seed) = (
            lambda.ok_or_else(|| missing("lambda"))?,
            p.ok_or_else(|| missing("p"))?,
            radius.ok_or_else(|| missing("R"))?,
            seed.ok_or_else(|| missing("seed"))?,
        );
        let mut nuclei = Vec::new();
        let mut colors = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let err = |msg: &str| PointProcessError::Parse { line: i + 1, msg: msg.into() };
            let mut it = line.split_whitespace();
            let rho: f64 = it.next().ok_or_else(|| err("missing rho"))?.parse().map_err(|_| err("bad rho"))?;
            let theta: f64 = it.next().ok_or_else(|| err("missing theta"))?.parse().map_err(|_| err("bad theta"))?;
            let color = match it.next() {
                Some("W") => Color::White,
                Some("B") => Color::Black,
                _ => return Err(err("color must be W or B")),
            };
            if it.next().is_some() {
                return Err(err("trailing fields"));
            }
            nuclei.push(HPoint::new(rho, theta));
            colors.push(color);
        }
        ColoredPointSet::new(nuclei, colors, lambda, p, radius, seed)
    }
}

/// Poisson process of intensity `lambda` (per unit hyperbolic area) on the
/// ball of radius `radius` about the origin.
///
/// The count is Poisson with mean `lambda · ball_area(radius)`; radii follow
/// `F(ρ) = (cosh ρ − 1)/(cosh R − 1)` by inversion and angles are uniform.
pub fn sample_poisson_ball(lambda: f64, radius: f64, seed: Seed) -> Result<Vec<HPoint>, PointProcessError> {
    if !(lambda > 0.0) {
        return Err(PointProcessError::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    if !(radius >= 0.0) {
        return Err(PointProcessError::InvalidParameter(format!("radius must be nonnegative, got {radius}")));
    }
    if radius > DEFAULT_RADIUS_CAP {
        return Err(PointProcessError::CapExceeded { radius, cap: DEFAULT_RADIUS_CAP });
    }
    let mean = lambda * ball_area(radius);
    let mut rng = seed.rng();
    let count = if mean > 0.0 {
        Poisson::new(mean)
            .map_err(|e| PointProcessError::InvalidParameter(e.to_string()))?
            .sample(&mut rng) as usize
    } else {
        0
    };
    let half = (0.5 * radius).sinh();
    let points = (0..count)
        .map(|_| {
            let u: f64 = rng.random();
            let v: f64 = rng.random();
            // sinh²(ρ/2) = U sinh²(R/2) is F(ρ) = U without cancellation
            let rho = 2.0 * (u.sqrt() * half).asinh();
            HPoint::new(rho.min(radius), std::f64::consts::TAU * v)
        })
        .collect();
    Ok(points)
}

/// The uniform marks behind [`color`]: nucleus `i` is white iff `marks[i] < p`.
/// Sharing marks across `p` gives the standard monotone coupling.
pub fn color_marks(n: usize, seed: Seed) -> Vec<f64> {
    (0..n as u64).map(|i| seed.uniform(i)).collect()
}

pub fn marks_to_colors(marks: &[f64], p: f64) -> Vec<Color> {
    marks.iter().map(|&u| if u < p { Color::White } else { Color::Black }).collect()
}

/// Independent Bernoulli(`p`) white marks. `lambda` and `radius` are
/// recorded as given.
pub fn color(
    points: Vec<HPoint>,
    p: f64,
    lambda: f64,
    radius: f64,
    seed: u64,
) -> Result<ColoredPointSet, PointProcessError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(PointProcessError::InvalidParameter(format!("p must lie in [0, 1], got {p}")));
    }
    let colors = marks_to_colors(&color_marks(points.len(), Seed(seed)), p);
    ColoredPointSet::new(points, colors, lambda, p, radius, seed)
}
