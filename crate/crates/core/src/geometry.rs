//! Points, balls and scenes, plus the reductions from "a line through x meets
//! a ball" to angular sets: bands on the direction sphere, caps on S², and arcs
//! on the tangent circle of S².

use std::f64::consts::FRAC_PI_2;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::circle_cover::{Arc, Period};
use crate::error::{Error, Result};

/// Default absolute tolerance. Scenes are assumed to have coordinates of
/// magnitude at most 1e2.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A point or direction in R^n with finite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct VectorN(Vec<f64>);

impl TryFrom<Vec<f64>> for VectorN {
    type Error = Error;
    fn try_from(coords: Vec<f64>) -> Result<Self> {
        VectorN::new(coords)
    }
}

impl From<VectorN> for Vec<f64> {
    fn from(v: VectorN) -> Self {
        v.0
    }
}

impl From<Vector3<f64>> for VectorN {
    fn from(v: Vector3<f64>) -> Self {
        VectorN(vec![v.x, v.y, v.z])
    }
}

impl VectorN {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(VectorN(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        VectorN(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, other: &VectorN) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn sub(&self, other: &VectorN) -> VectorN {
        VectorN(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &VectorN) -> VectorN {
        VectorN(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, s: f64) -> VectorN {
        VectorN(self.0.iter().map(|a| a * s).collect())
    }

    pub fn distance(&self, other: &VectorN) -> f64 {
        self.sub(other).norm()
    }

    /// Unit vector in the same direction, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<VectorN> {
        let n = self.norm();
        (n > 0.0).then(|| self.scale(1.0 / n))
    }

    pub fn to_vec3(&self) -> Option<Vector3<f64>> {
        (self.dim() == 3).then(|| Vector3::new(self.0[0], self.0[1], self.0[2]))
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() == dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: dim,
                got: self.dim(),
            })
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Open,
    Closed,
}

impl Topology {
    pub fn is_closed(self) -> bool {
        self == Topology::Closed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBall")]
pub struct Ball {
    pub center: VectorN,
    pub radius: f64,
    pub topology: Topology,
}

#[derive(Deserialize)]
struct RawBall {
    center: VectorN,
    radius: f64,
    #[serde(default = "default_topology")]
    topology: Topology,
}

fn default_topology() -> Topology {
    Topology::Closed
}

impl TryFrom<RawBall> for Ball {
    type Error = Error;
    fn try_from(raw: RawBall) -> Result<Self> {
        Ball::new(raw.center, raw.radius, raw.topology)
    }
}

impl Ball {
    pub fn new(center: VectorN, radius: f64, topology: Topology) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidBall(format!(
                "radius must be positive, got {radius}"
            )));
        }
        Ok(Ball {
            center,
            radius,
            topology,
        })
    }

    pub fn closed(center: Vec<f64>, radius: f64) -> Result<Self> {
        Ball::new(VectorN::new(center)?, radius, Topology::Closed)
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn with_topology(&self, topology: Topology) -> Ball {
        Ball {
            topology,
            ..self.clone()
        }
    }

    /// Signed clearance between the ball surface and the line `x + t·d`
    /// (`d` unit): positive when the line misses the closed ball.
    pub fn line_clearance(&self, x: &VectorN, d: &VectorN) -> f64 {
        let v = self.center.sub(x);
        let along = v.dot(d);
        let perp2 = (v.dot(&v) - along * along).max(0.0);
        perp2.sqrt() - self.radius
    }
}

/// A dimension-tagged family of balls. Disjointness is checked on demand,
/// not enforced at construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScene")]
pub struct Scene {
    pub dim: usize,
    #[serde(default)]
    pub label: String,
    pub balls: Vec<Ball>,
}

#[derive(Deserialize)]
struct RawScene {
    dim: usize,
    #[serde(default)]
    label: String,
    balls: Vec<Ball>,
}

impl TryFrom<RawScene> for Scene {
    type Error = Error;
    fn try_from(raw: RawScene) -> Result<Self> {
        Scene::new(raw.dim, raw.balls, raw.label)
    }
}

impl Scene {
    pub fn new(dim: usize, balls: Vec<Ball>, label: impl Into<String>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidScene("dimension must be positive".into()));
        }
        for (i, b) in balls.iter().enumerate() {
            if b.dim() != dim {
                return Err(Error::InvalidScene(format!(
                    "ball {i} has {} coordinates, scene dimension is {dim}",
                    b.dim()
                )));
            }
        }
        Ok(Scene {
            dim,
            label: label.into(),
            balls,
        })
    }

    /// Pairs `(i, j)` whose open balls overlap by more than `tol`.
    pub fn overlapping_pairs(&self, tol: f64) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.balls.len() {
            for j in i + 1..self.balls.len() {
                let (a, b) = (&self.balls[i], &self.balls[j]);
                if a.center.distance(&b.center) < a.radius + b.radius - tol {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn with_topology(&self, topology: Topology) -> Scene {
        Scene {
            dim: self.dim,
            label: self.label.clone(),
            balls: self
                .balls
                .iter()
                .map(|b| b.with_topology(topology))
                .collect(),
        }
    }

    /// Smallest clearance of the line `x + t·d` over all balls.
    pub fn line_clearance(&self, x: &VectorN, d: &VectorN) -> f64 {
        self.balls
            .iter()
            .map(|b| b.line_clearance(x, d))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Directions `d` for which the line `x + t·d` meets a ball: the antipodal
/// cap pair `|d·axis| ≥ cos(half_angle)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub axis: VectorN,
    pub half_angle: f64,
    /// `x` lies on the ball's sphere (half_angle is then π/2).
    pub boundary: bool,
}

impl Band {
    /// Slack `cos α − |d·u|`; positive iff the line misses the closed ball.
    pub fn slack(&self, d: &[f64]) -> f64 {
        self.half_angle.cos() - dot(self.axis.coords(), d).abs()
    }
}

pub fn ball_band(x: &VectorN, ball: &Ball, tol: f64) -> Result<Band> {
    x.check_dim(ball.dim())?;
    let v = ball.center.sub(x);
    let dist = v.norm();
    if dist < ball.radius - tol {
        return Err(Error::PointInsideBall {
            index: 0,
            depth: ball.radius - dist,
        });
    }
    let axis = v.scale(1.0 / dist);
    if (dist - ball.radius).abs() <= tol {
        return Ok(Band {
            axis,
            half_angle: FRAC_PI_2,
            boundary: true,
        });
    }
    Ok(Band {
        axis,
        half_angle: (ball.radius / dist).asin(),
        boundary: false,
    })
}

/// Spherical cap `{p ∈ S² : p·axis ≥ cos angular_radius}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cap {
    pub axis: Vector3<f64>,
    pub angular_radius: f64,
    pub topology: Topology,
}

impl Cap {
    pub fn new(axis: Vector3<f64>, angular_radius: f64, topology: Topology) -> Result<Self> {
        let n = axis.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::DegenerateAxis);
        }
        Ok(Cap {
            axis: axis / n,
            angular_radius: angular_radius.clamp(0.0, std::f64::consts::PI),
            topology,
        })
    }

    pub fn closed(axis: Vector3<f64>, angular_radius: f64) -> Result<Self> {
        Cap::new(axis, angular_radius, Topology::Closed)
    }

    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        p.dot(&self.axis) >= self.angular_radius.cos()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SphereSection {
    Empty,
    Cap(Cap),
    FullSphere,
}

/// Intersection of a ball with the unit sphere centered at the origin.
pub fn ball_sphere_cap(ball: &Ball) -> Result<SphereSection> {
    let c = ball.center.to_vec3().ok_or(Error::DimensionMismatch {
        expected: 3,
        got: ball.dim(),
    })?;
    let r = ball.radius;
    let closed = ball.topology.is_closed();
    let cn = c.norm();
    if cn == 0.0 {
        let full = if closed { r >= 1.0 } else { r > 1.0 };
        return Ok(if full {
            SphereSection::FullSphere
        } else {
            SphereSection::Empty
        });
    }
    let k = (cn * cn + 1.0 - r * r) / (2.0 * cn);
    if k >= 1.0 {
        return Ok(SphereSection::Empty);
    }
    if k < -1.0 || (closed && k == -1.0) {
        return Ok(SphereSection::FullSphere);
    }
    Ok(SphereSection::Cap(Cap::new(c, k.acos(), ball.topology)?))
}

/// Deterministic orthonormal basis `(e1, e2)` of the plane orthogonal to the
/// unit vector `n`: `e1 = normalize(axis × n)` with the coordinate axis least
/// aligned with `n` (first index on ties), `e2 = n × e1`.
pub fn tangent_basis(n: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let mut k = 0;
    for i in 1..3 {
        if n[i].abs() < n[k].abs() {
            k = i;
        }
    }
    let axis = Vector3::ith(k, 1.0);
    let e1 = axis.cross(n).normalize();
    let e2 = n.cross(&e1);
    (e1, e2)
}

/// Arc (period π) of in-plane angles of lines tangent to S² at `x` that meet
/// the ball; `None` when no tangent line meets it. Angles are measured in the
/// [`tangent_basis`] of `x`.
///
/// When `x` lies on the ball's sphere, a closed ball is met by every tangent
/// line. An open ball is treated the same way unless its sphere is itself
/// tangent to S² at `x`: the single missed direction is below any tolerance.
pub fn tangent_arcs(x: &Vector3<f64>, ball: &Ball, tol: f64) -> Result<Option<Arc>> {
    let c = ball.center.to_vec3().ok_or(Error::DimensionMismatch {
        expected: 3,
        got: ball.dim(),
    })?;
    let norm = x.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NotOnSphere { norm });
    }
    let v = c - x;
    let dist = v.norm();
    let r = ball.radius;
    if dist < r - tol {
        return Err(Error::PointInsideBall {
            index: 0,
            depth: r - dist,
        });
    }
    let v_t = v - x * v.dot(x);
    let vt_norm = v_t.norm();
    let on_boundary = (dist - r).abs() <= tol;
    if vt_norm <= tol {
        let full = on_boundary && ball.topology.is_closed();
        return Ok(full.then(|| Arc::new(0.0, FRAC_PI_2, Period::Pi)));
    }
    let (e1, e2) = tangent_basis(x);
    let theta0 = v_t.dot(&e2).atan2(v_t.dot(&e1));
    if on_boundary {
        return Ok(Some(Arc::new(theta0, FRAC_PI_2, Period::Pi)));
    }
    let lambda = (dist * dist - r * r).sqrt() / vt_norm;
    if lambda > 1.0 {
        return Ok(None);
    }
    Ok(Some(Arc::new(theta0, lambda.acos(), Period::Pi)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairRelation {
    Disjoint,
    Tangent,
    Overlapping,
}

pub fn pair_relation(a: &Ball, b: &Ball, tol: f64) -> Result<PairRelation> {
    a.center.check_dim(b.dim())?;
    let diff = a.center.distance(&b.center) - (a.radius + b.radius);
    Ok(if diff.abs() <= tol {
        PairRelation::Tangent
    } else if diff < 0.0 {
        PairRelation::Overlapping
    } else {
        PairRelation::Disjoint
    })
}
