//! Cubes in the uniform norm, the hyperbolic cube metrics `ρ` and `ρ_ω`,
//! and the Poincaré upper half-space distance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modulus::Modulus;

/// A point of `R^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn origin(n: usize) -> Self {
        Point(vec![0.0; n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    /// `max_i |x_i|`
    pub fn uniform_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    /// `‖self − other‖` in the uniform norm.
    pub fn dist(&self, other: &Point) -> f64 {
        self.0.iter().zip(&other.0).fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }

    pub fn midpoint(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| 0.5 * (a + b)).collect())
    }

    pub fn lerp(&self, other: &Point, s: f64) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a + s * (b - a)).collect())
    }

    pub fn translate(&self, shift: &[f64]) -> Point {
        Point(self.0.iter().zip(shift).map(|(a, b)| a + b).collect())
    }
}

impl From<Vec<f64>> for Point {
    fn from(coords: Vec<f64>) -> Self {
        Point(coords)
    }
}

/// `max_i |x_i|`
pub fn uniform_norm(x: &Point) -> f64 {
    x.uniform_norm()
}

/// The closed cube `Q(x, r) = {y : ‖y − x‖ ≤ r}` with `r > 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CubeRepr", into = "CubeRepr")]
pub struct Cube {
    center: Point,
    radius: f64,
}

#[derive(Serialize, Deserialize)]
struct CubeRepr {
    x: Vec<f64>,
    r: f64,
}

impl TryFrom<CubeRepr> for Cube {
    type Error = Error;
    fn try_from(repr: CubeRepr) -> Result<Self> {
        Cube::new(Point(repr.x), repr.r)
    }
}

impl From<Cube> for CubeRepr {
    fn from(cube: Cube) -> Self {
        CubeRepr { x: cube.center.0, r: cube.radius }
    }
}

impl Cube {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidCube(format!("radius {radius} must be positive and finite")));
        }
        if center.dim() == 0 {
            return Err(Error::InvalidCube("center must have at least one coordinate".into()));
        }
        if center.0.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidCube("center coordinates must be finite".into()));
        }
        Ok(Cube { center, radius })
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn contains(&self, y: &Point) -> bool {
        self.center.dist(y) <= self.radius
    }

    /// `λQ = Q(x_Q, λ r_Q)`
    pub fn dilate(&self, factor: f64) -> Result<Cube> {
        Cube::new(self.center.clone(), self.radius * factor)
    }

    /// The identification `Q(x, r) ↔ (x, r)` with the upper half-space.
    pub fn to_half_space(&self) -> HalfSpacePoint {
        HalfSpacePoint { base: self.center.clone(), height: self.radius }
    }
}

/// Quantities shared by every cube-pair formula: `(min r, max r, ‖x1 − x2‖)`.
pub(crate) fn pair_scales(q1: &Cube, q2: &Cube) -> (f64, f64, f64) {
    let (r1, r2) = (q1.radius, q2.radius);
    (r1.min(r2), r1.max(r2), q1.center.dist(&q2.center))
}

fn same_dim(q1: &Cube, q2: &Cube) -> Result<()> {
    if q1.dim() != q2.dim() {
        return Err(Error::DimensionMismatch { expected: q1.dim(), found: q2.dim() });
    }
    Ok(())
}

/// `ρ(Q1, Q2) = ln(1 + (max{r1, r2} + ‖x1 − x2‖) / min{r1, r2})`, and 0
/// exactly when the cubes coincide.
pub fn rho(q1: &Cube, q2: &Cube) -> Result<f64> {
    same_dim(q1, q2)?;
    if q1 == q2 {
        return Ok(0.0);
    }
    let (lo, hi, d) = pair_scales(q1, q2);
    Ok(((hi + d) / lo).ln_1p())
}

/// `ρ_ω(Q1, Q2) = ∫_{min r}^{r1 + r2 + ‖x1 − x2‖} ω(s)/s^m ds`, 0 when the
/// cubes coincide.
pub fn rho_omega(modulus: &Modulus, q1: &Cube, q2: &Cube) -> Result<f64> {
    same_dim(q1, q2)?;
    Ok(rho_omega_unchecked(modulus, q1, q2))
}

pub(crate) fn rho_omega_unchecked(modulus: &Modulus, q1: &Cube, q2: &Cube) -> f64 {
    if q1 == q2 {
        return 0.0;
    }
    let (lo, hi, d) = pair_scales(q1, q2);
    modulus.core_span(lo, hi + d)
}

/// A point `(x, r)` of the upper half-space `R^n × (0, ∞)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfSpacePoint {
    pub base: Point,
    pub height: f64,
}

impl HalfSpacePoint {
    pub fn new(base: Point, height: f64) -> Result<Self> {
        if !(height > 0.0 && height.is_finite()) {
            return Err(Error::Domain(format!("height {height} must be positive")));
        }
        Ok(HalfSpacePoint { base, height })
    }

    pub fn to_cube(&self) -> Result<Cube> {
        Cube::new(self.base.clone(), self.height)
    }
}

/// Poincaré distance `ln((‖z1 − z̄2‖ + ‖z1 − z2‖)/(‖z1 − z̄2‖ − ‖z1 − z2‖))`
/// where `z̄` negates the height and norms are Euclidean.
///
/// Evaluated as `ln1p(B(A + B) / (2 r1 r2))` with `A² − B² = 4 r1 r2`,
/// which is exact algebra and avoids the cancellation in `A − B`.
pub fn poincare(z1: &HalfSpacePoint, z2: &HalfSpacePoint) -> Result<f64> {
    if z1.base.dim() != z2.base.dim() {
        return Err(Error::DimensionMismatch { expected: z1.base.dim(), found: z2.base.dim() });
    }
    if z1 == z2 {
        return Ok(0.0);
    }
    let horizontal: f64 = z1.base.0.iter().zip(&z2.base.0).map(|(a, b)| (a - b) * (a - b)).sum();
    let (r1, r2) = (z1.height, z2.height);
    let b = (horizontal + (r1 - r2) * (r1 - r2)).sqrt();
    let a = (horizontal + (r1 + r2) * (r1 + r2)).sqrt();
    Ok((b * (a + b) / (2.0 * r1 * r2)).ln_1p())
}

/// The cube metric transported to the half-space through `(x, r) ↔ Q(x, r)`.
pub fn varrho(z1: &HalfSpacePoint, z2: &HalfSpacePoint) -> Result<f64> {
    rho(&z1.to_cube()?, &z2.to_cube()?)
}

/// `ϱ(z1, z2) / (1 + ρ_H(z1, z2))` for distinct points.
pub fn equivalence_ratio(z1: &HalfSpacePoint, z2: &HalfSpacePoint) -> Result<f64> {
    if z1 == z2 {
        return Err(Error::Domain("equivalence ratio needs distinct points".into()));
    }
    Ok(varrho(z1, z2)? / (1.0 + poincare(z1, z2)?))
}

/// `{Q(x, r) : x ∈ S, r ∈ radii}` without duplicates, ordered by point and
/// then by radius as given.
pub fn cube_family(points: &[Point], radii: &[f64]) -> Result<Vec<Cube>> {
    if points.is_empty() {
        return Err(Error::Empty("cube family needs at least one point".into()));
    }
    if radii.is_empty() {
        return Err(Error::Empty("cube family needs at least one radius".into()));
    }
    let n = points[0].dim();
    let mut cubes: Vec<Cube> = Vec::with_capacity(points.len() * radii.len());
    for x in points {
        if x.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: x.dim() });
        }
        for &r in radii {
            let q = Cube::new(x.clone(), r)?;
            if !cubes.contains(&q) {
                cubes.push(q);
            }
        }
    }
    Ok(cubes)
}

/// Uniform-norm diameter of a point set.
pub fn diameter(points: &[Point]) -> f64 {
    let mut diam: f64 = 0.0;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            diam = diam.max(a.dist(b));
        }
    }
    diam
}

/// Dyadic radii `diam(S) · 2^{−j}`, `j = 0..=levels` (unit scale for a
/// single point).
pub fn dyadic_radii(points: &[Point], levels: u32) -> Vec<f64> {
    let diam = diameter(points);
    let scale = if diam > 0.0 { diam } else { 1.0 };
    (0..=levels).map(|j| scale * 0.5f64.powi(j as i32)).collect()
}
