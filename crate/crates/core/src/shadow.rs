//! Shadow decisions: does every line through a point (or every line tangent
//! to S² at a point) meet one of the balls? Also the search for m-planes
//! through a point that avoid every ball.

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ascent::{self, AscentParams, Constraint};
use crate::circle_cover::{cover_circle, Arc, ArcSet, CircleVerdict, Period};
use crate::error::{Error, Result};
use crate::geometry::{ball_band, dot, tangent_arcs, tangent_basis, Band, Cap, Scene, VectorN};
use crate::rng::{seeded, unit_vector};
use crate::sphere_cover::{cover_sphere, CapSet, SphereVerdict, DEFAULT_FALSIFIER_GRID};

pub const DEFAULT_RESTARTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShadowStatus {
    Shadowed,
    NotShadowed,
    /// Tangency-degenerate instance; no certified answer either way.
    Indeterminate,
    /// The heuristic search found no escaping line. Not a proof.
    PossiblyShadowed,
}

impl ShadowStatus {
    /// Same spelling as the serialized form.
    pub fn as_str(self) -> &'static str {
        match self {
            ShadowStatus::Shadowed => "shadowed",
            ShadowStatus::NotShadowed => "not-shadowed",
            ShadowStatus::Indeterminate => "indeterminate",
            ShadowStatus::PossiblyShadowed => "possibly-shadowed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessLine {
    pub point: VectorN,
    pub direction: VectorN,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShadowVerdict {
    pub status: ShadowStatus,
    /// Shadowed because the point lies on a closed ball.
    pub trivial: bool,
    pub witness: Option<WitnessLine>,
    /// `min_i(cos α_i − |d·u_i|)` at the witness (or the best candidate found).
    pub margin: Option<f64>,
    /// Largest uncovered gap on the direction circle, for circle-based decisions.
    pub largest_gap: Option<f64>,
    pub bands: Vec<Band>,
    /// Balls whose sphere passes through the point.
    pub boundary_balls: Vec<usize>,
}

impl ShadowVerdict {
    pub fn is_shadowed(&self) -> bool {
        self.status == ShadowStatus::Shadowed
    }

    pub fn is_not_shadowed(&self) -> bool {
        self.status == ShadowStatus::NotShadowed
    }

    fn new(status: ShadowStatus, bands: Vec<Band>) -> Self {
        let boundary_balls = bands
            .iter()
            .enumerate()
            .filter(|(_, b)| b.boundary)
            .map(|(i, _)| i)
            .collect();
        ShadowVerdict {
            status,
            trivial: false,
            witness: None,
            margin: None,
            largest_gap: None,
            bands,
            boundary_balls,
        }
    }
}

fn bands_at(scene: &Scene, x: &VectorN, tol: f64) -> Result<Vec<Band>> {
    if x.dim() != scene.dim {
        return Err(Error::DimensionMismatch {
            expected: scene.dim,
            got: x.dim(),
        });
    }
    scene
        .balls
        .iter()
        .enumerate()
        .map(|(i, b)| ball_band(x, b, tol).map_err(|e| e.at_ball(i)))
        .collect()
}

fn touches_closed(scene: &Scene, bands: &[Band]) -> bool {
    bands
        .iter()
        .zip(&scene.balls)
        .any(|(band, ball)| band.boundary && ball.topology.is_closed())
}

fn trivial_shadow(bands: Vec<Band>) -> ShadowVerdict {
    ShadowVerdict {
        trivial: true,
        ..ShadowVerdict::new(ShadowStatus::Shadowed, bands)
    }
}

/// Margin over the bands of balls not touching the point.
fn interior_margin(bands: &[Band], d: &[f64]) -> f64 {
    let m = bands
        .iter()
        .filter(|b| !b.boundary)
        .map(|b| b.slack(d))
        .fold(f64::INFINITY, f64::min);
    if m.is_finite() {
        m
    } else {
        1.0
    }
}

fn certify(mut verdict: ShadowVerdict, x: &VectorN, d: Vec<f64>, tol: f64) -> ShadowVerdict {
    let m = interior_margin(&verdict.bands, &d);
    verdict.margin = Some(m);
    verdict.status = if m > tol {
        ShadowStatus::NotShadowed
    } else {
        ShadowStatus::Indeterminate
    };
    verdict.witness = Some(WitnessLine {
        point: x.clone(),
        direction: VectorN::new(d).expect("finite direction"),
    });
    verdict
}

/// Arcs (period π) of a great circle `d(θ) = e1 cos θ + e2 sin θ` met by the
/// non-boundary bands.
fn great_circle_arcs(bands: &[Band], e1: &[f64], e2: &[f64]) -> ArcSet {
    let mut set = ArcSet::empty(Period::Pi);
    for band in bands.iter().filter(|b| !b.boundary) {
        let (p1, p2) = (dot(band.axis.coords(), e1), dot(band.axis.coords(), e2));
        let r = p1.hypot(p2);
        let c = band.half_angle.cos();
        if r >= c && r > 0.0 {
            set.push(Arc::new(p2.atan2(p1), (c / r).min(1.0).acos(), Period::Pi))
                .expect("same period");
        }
    }
    set
}

/// Point on the sphere of open balls only: admissible directions are tangent
/// to every touching ball.
fn restricted_shadow(verdict: ShadowVerdict, x: &VectorN, tol: f64) -> ShadowVerdict {
    let axes: Vec<VectorN> = verdict
        .boundary_balls
        .iter()
        .map(|&i| verdict.bands[i].axis.clone())
        .collect();
    let dim = x.dim();
    let single_direction = |d: Vec<f64>, verdict: ShadowVerdict| {
        if axes.iter().all(|u| dot(u.coords(), &d).abs() <= tol)
            && interior_margin(&verdict.bands, &d) >= -tol
        {
            certify(verdict, x, d, tol)
        } else {
            ShadowVerdict {
                status: ShadowStatus::Shadowed,
                ..verdict
            }
        }
    };
    if dim == 2 {
        let u = axes[0].coords();
        return single_direction(vec![-u[1], u[0]], verdict);
    }
    let u0 = axes[0].to_vec3().expect("3-d");
    for u in &axes[1..] {
        let u = u.to_vec3().expect("3-d");
        let cross = u0.cross(&u);
        if cross.norm() > 1e-9 {
            return single_direction(cross.normalize().as_slice().to_vec(), verdict);
        }
    }
    let (e1, e2) = tangent_basis(&u0);
    let set = great_circle_arcs(&verdict.bands, e1.as_slice(), e2.as_slice());
    let cov = cover_circle(&set, tol);
    let mut verdict = ShadowVerdict {
        largest_gap: Some(cov.largest_gap),
        ..verdict
    };
    match (cov.verdict, cov.witness) {
        (CircleVerdict::Uncovered, Some(t)) => {
            let d = e1 * t.cos() + e2 * t.sin();
            certify(verdict, x, d.as_slice().to_vec(), tol)
        }
        _ => {
            verdict.status = ShadowStatus::Shadowed;
            verdict
        }
    }
}

/// Exact point-shadow decision in dimension 2 or 3.
pub fn point_shadow(scene: &Scene, x: &VectorN, tol: f64) -> Result<ShadowVerdict> {
    if !(2..=3).contains(&scene.dim) {
        return Err(Error::DimensionUnsupported(scene.dim));
    }
    let bands = bands_at(scene, x, tol)?;
    if touches_closed(scene, &bands) {
        return Ok(trivial_shadow(bands));
    }
    let verdict = ShadowVerdict::new(ShadowStatus::Shadowed, bands);
    if !verdict.boundary_balls.is_empty() {
        return Ok(restricted_shadow(verdict, x, tol));
    }
    if scene.dim == 2 {
        let arcs: Vec<Arc> = verdict
            .bands
            .iter()
            .map(|b| {
                Arc::new(
                    b.axis.coords()[1].atan2(b.axis.coords()[0]),
                    b.half_angle,
                    Period::Pi,
                )
            })
            .collect();
        let cov = cover_circle(&ArcSet::new(Period::Pi, arcs)?, tol);
        let verdict = ShadowVerdict {
            largest_gap: Some(cov.largest_gap),
            ..verdict
        };
        return Ok(match cov.witness {
            Some(t) => certify(verdict, x, vec![t.cos(), t.sin()], tol),
            None => verdict,
        });
    }
    let caps = CapSet::new(
        verdict
            .bands
            .iter()
            .zip(&scene.balls)
            .flat_map(|(band, ball)| {
                let u = band.axis.to_vec3().expect("3-d");
                [
                    Cap::new(u, band.half_angle, ball.topology).expect("unit axis"),
                    Cap::new(-u, band.half_angle, ball.topology).expect("unit axis"),
                ]
            }),
    );
    let cov = cover_sphere(&caps, tol, DEFAULT_FALSIFIER_GRID);
    Ok(match (cov.verdict, cov.witness) {
        (SphereVerdict::Uncovered, Some(w)) => certify(verdict, x, w.as_slice().to_vec(), tol),
        (SphereVerdict::Covered, _) => ShadowVerdict {
            margin: Some(cov.margin),
            ..verdict
        },
        _ => ShadowVerdict {
            status: ShadowStatus::Indeterminate,
            margin: Some(cov.margin),
            ..verdict
        },
    })
}

/// Do the lines tangent to the unit sphere at `x` all meet some ball?
pub fn tangent_shadow(scene: &Scene, x: &VectorN, tol: f64) -> Result<ShadowVerdict> {
    if scene.dim != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: scene.dim,
        });
    }
    let x3 = x.to_vec3().ok_or(Error::DimensionMismatch {
        expected: 3,
        got: x.dim(),
    })?;
    let norm = x3.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::NotOnSphere { norm });
    }
    let bands = bands_at(scene, x, tol)?;
    if touches_closed(scene, &bands) {
        return Ok(trivial_shadow(bands));
    }
    let mut set = ArcSet::empty(Period::Pi);
    for (i, ball) in scene.balls.iter().enumerate() {
        if let Some(arc) = tangent_arcs(&x3, ball, tol).map_err(|e| e.at_ball(i))? {
            set.push(arc)?;
        }
    }
    let cov = cover_circle(&set, tol);
    let verdict = ShadowVerdict {
        largest_gap: Some(cov.largest_gap),
        ..ShadowVerdict::new(ShadowStatus::Shadowed, bands)
    };
    Ok(match cov.witness {
        Some(t) => {
            let (e1, e2) = tangent_basis(&x3);
            let d: Vector3<f64> = e1 * t.cos() + e2 * t.sin();
            certify(verdict, x, d.as_slice().to_vec(), tol)
        }
        None => verdict,
    })
}

/// Larger margin first, then the lexicographically smaller vector.
fn better(a: &(Vec<f64>, f64), b: &(Vec<f64>, f64)) -> bool {
    match a.1.total_cmp(&b.1) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => {
            a.0.iter()
                .zip(&b.0)
                .find(|(x, y)| x != y)
                .is_some_and(|(x, y)| x < y)
        }
    }
}

/// Multi-start ascent for an escaping line in any dimension. Only a
/// not-shadowed verdict is certified; otherwise the answer is
/// [`ShadowStatus::PossiblyShadowed`].
pub fn heuristic_shadow(
    scene: &Scene,
    x: &VectorN,
    restarts: usize,
    seed: u64,
) -> Result<ShadowVerdict> {
    let tol = crate::DEFAULT_TOL;
    if scene.dim == 2 {
        return point_shadow(scene, x, tol);
    }
    if scene.dim < 2 {
        return Err(Error::DimensionUnsupported(scene.dim));
    }
    let bands = bands_at(scene, x, tol)?;
    if touches_closed(scene, &bands) {
        return Ok(trivial_shadow(bands));
    }
    let constraints: Vec<Constraint> = bands
        .iter()
        .map(|b| Constraint {
            axis: b.axis.coords().to_vec(),
            limit: b.half_angle.cos(),
            symmetric: true,
        })
        .collect();
    let mut rng = seeded(seed);
    let starts: Vec<Vec<f64>> = (0..restarts.max(1))
        .map(|_| unit_vector(&mut rng, scene.dim))
        .collect();
    let best = starts
        .into_par_iter()
        .map(|s| ascent::maximize(&constraints, s, AscentParams::DEFAULT))
        .collect::<Vec<_>>()
        .into_iter()
        .reduce(|a, b| if better(&b, &a) { b } else { a })
        .expect("at least one restart");
    // Touching open balls stay in the margin with limit 0, so they block
    // certification here; the exact path handles them in dimensions 2 and 3.
    let mut verdict = ShadowVerdict::new(ShadowStatus::PossiblyShadowed, bands);
    verdict.margin = Some(best.1);
    if best.1 > tol {
        verdict.status = ShadowStatus::NotShadowed;
        verdict.witness = Some(WitnessLine {
            point: x.clone(),
            direction: VectorN::new(best.0)?,
        });
    }
    Ok(verdict)
}

/// Smallest line–ball clearance of a witness over all balls. Open balls whose
/// sphere passes through the base point are skipped when the line is tangent
/// to them there; a non-tangent line through such a point enters the ball and
/// yields a negative clearance.
pub fn witness_clearance(scene: &Scene, line: &WitnessLine, tol: f64) -> f64 {
    let mut worst = f64::INFINITY;
    for ball in &scene.balls {
        let v = ball.center.sub(&line.point);
        let touching = (v.norm() - ball.radius).abs() <= tol;
        if touching && !ball.topology.is_closed() {
            let along = v.dot(&line.direction) / v.norm();
            if along.abs() > 1e-9 {
                worst = worst.min(-along.abs());
            }
            continue;
        }
        worst = worst.min(ball.line_clearance(&line.point, &line.direction));
    }
    worst
}

/// An affine m-plane through `base` spanned by an orthonormal `basis`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneFrame {
    pub base: VectorN,
    pub basis: Vec<VectorN>,
}

impl PlaneFrame {
    pub fn new(base: VectorN, basis: Vec<VectorN>) -> Result<Self> {
        for (i, a) in basis.iter().enumerate() {
            if a.dim() != base.dim() {
                return Err(Error::DimensionMismatch {
                    expected: base.dim(),
                    got: a.dim(),
                });
            }
            for (j, b) in basis.iter().enumerate().skip(i) {
                let want = if i == j { 1.0 } else { 0.0 };
                if (a.dot(b) - want).abs() > 1e-9 {
                    return Err(Error::NotOrthonormal(format!(
                        "<e{i}, e{j}> = {}",
                        a.dot(b)
                    )));
                }
            }
        }
        Ok(PlaneFrame { base, basis })
    }

    /// The 2-plane through `point` orthogonal to `normal` (dimension 3), with
    /// the deterministic tangent basis of the normal.
    pub fn from_normal(point: VectorN, normal: &VectorN) -> Result<Self> {
        let n = normal.to_vec3().ok_or(Error::DimensionMismatch {
            expected: 3,
            got: normal.dim(),
        })?;
        if point.dim() != 3 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                got: point.dim(),
            });
        }
        let n = n.try_normalize(0.0).ok_or(Error::DegenerateAxis)?;
        let (e1, e2) = tangent_basis(&n);
        PlaneFrame::new(point, vec![e1.into(), e2.into()])
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Coordinates of the orthogonal projection of `p` in the frame basis.
    pub fn project(&self, p: &VectorN) -> Vec<f64> {
        let v = p.sub(&self.base);
        self.basis.iter().map(|e| e.dot(&v)).collect()
    }

    pub fn distance_to(&self, p: &VectorN) -> f64 {
        let v = p.sub(&self.base);
        let proj: f64 = self.basis.iter().map(|e| e.dot(&v).powi(2)).sum();
        (v.dot(&v) - proj).max(0.0).sqrt()
    }

    /// Smallest `distance(center, plane) − radius` over the scene.
    pub fn clearance(&self, scene: &Scene) -> f64 {
        scene
            .balls
            .iter()
            .map(|b| self.distance_to(&b.center) - b.radius)
            .fold(f64::INFINITY, f64::min)
    }
}

fn gram_schmidt(mut cols: Vec<Vec<f64>>) -> Option<Vec<Vec<f64>>> {
    for k in 0..cols.len() {
        for j in 0..k {
            let p = dot(&cols[k], &cols[j]);
            let (head, tail) = cols.split_at_mut(k);
            tail[0]
                .iter_mut()
                .zip(&head[j])
                .for_each(|(a, b)| *a -= p * b);
        }
        let n = dot(&cols[k], &cols[k]).sqrt();
        if n < 1e-12 {
            return None;
        }
        cols[k].iter_mut().for_each(|a| *a /= n);
    }
    Some(cols)
}

/// Squared distance from each center to the linear plane minus r².
fn frame_slacks(frame: &[Vec<f64>], offsets: &[(Vec<f64>, f64)]) -> Vec<f64> {
    offsets
        .iter()
        .map(|(v, r)| dot(v, v) - frame.iter().map(|w| dot(w, v).powi(2)).sum::<f64>() - r * r)
        .collect()
}

fn frame_ascent(
    offsets: &[(Vec<f64>, f64)],
    start: Vec<Vec<f64>>,
    params: AscentParams,
) -> (Vec<Vec<f64>>, f64) {
    let objective = |w: &[Vec<f64>]| {
        frame_slacks(w, offsets)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    };
    let mut w = start;
    let mut best = objective(&w);
    let mut step = params.initial_step;
    let mut iters = 0;
    // Ascent direction of slack i: −2 (w_k·v_i) v_i per column.
    let grad = |w: &[Vec<f64>], v: &[f64]| -> Vec<Vec<f64>> {
        w.iter()
            .map(|col| {
                let p = dot(col, v);
                v.iter().map(|vi| -2.0 * p * vi).collect()
            })
            .collect()
    };
    let fro = |g: &[Vec<f64>]| g.iter().map(|c| dot(c, c)).sum::<f64>().sqrt();
    while step >= params.min_step && iters < params.max_iters {
        iters += 1;
        let slacks = frame_slacks(&w, offsets);
        let active = (0..slacks.len())
            .min_by(|&a, &b| slacks[a].total_cmp(&slacks[b]))
            .expect("non-empty");
        let mut candidates = vec![grad(&w, &offsets[active].0)];
        let mut combined: Vec<Vec<f64>> = w.iter().map(|c| vec![0.0; c.len()]).collect();
        let mut near = 0;
        for (i, &s) in slacks.iter().enumerate() {
            if s <= best + step {
                let g = grad(&w, &offsets[i].0);
                let n = fro(&g);
                if n > 1e-300 {
                    for (acc, col) in combined.iter_mut().zip(&g) {
                        acc.iter_mut().zip(col).for_each(|(a, b)| *a += b / n);
                    }
                    near += 1;
                }
            }
        }
        if near > 1 {
            candidates.push(combined);
        }
        let mut improved = false;
        for g in candidates {
            let n = fro(&g);
            if !(n > 1e-300) {
                continue;
            }
            let moved: Vec<Vec<f64>> = w
                .iter()
                .zip(&g)
                .map(|(c, gc)| c.iter().zip(gc).map(|(a, b)| a + step * b / n).collect())
                .collect();
            if let Some(next) = gram_schmidt(moved) {
                let m = objective(&next);
                if m > best {
                    w = next;
                    best = m;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (w, best)
}

/// Searches for an m-plane through `x` missing every ball. `None` is
/// heuristic for `m ≥ 2` or dimension above 3, not a proof of nonexistence.
pub fn find_avoiding_plane(
    scene: &Scene,
    x: &VectorN,
    m: usize,
    restarts: usize,
    seed: u64,
) -> Result<Option<PlaneFrame>> {
    let tol = crate::DEFAULT_TOL;
    let n = scene.dim;
    if m < 1 || m >= n {
        return Err(Error::BadDimension { dim: n, m });
    }
    let bands = bands_at(scene, x, tol)?;
    let verify = |frame: PlaneFrame| -> Option<PlaneFrame> {
        let ok = scene.balls.iter().all(|b| {
            let dist = frame.distance_to(&b.center);
            dist > b.radius + tol
                || (!b.topology.is_closed() && (dist - b.radius).abs() <= tol && m == 1)
        });
        ok.then_some(frame)
    };
    if m == 1 && n <= 3 {
        let verdict = point_shadow(scene, x, tol)?;
        return Ok(match (verdict.status, verdict.witness) {
            (ShadowStatus::NotShadowed, Some(line)) => {
                verify(PlaneFrame::new(x.clone(), vec![line.direction])?)
            }
            _ => None,
        });
    }
    if bands.iter().any(|b| b.boundary) {
        return Ok(None);
    }
    let offsets: Vec<(Vec<f64>, f64)> = scene
        .balls
        .iter()
        .map(|b| (b.center.sub(x).coords().to_vec(), b.radius))
        .collect();
    let mut rng = seeded(seed);
    let starts: Vec<Vec<Vec<f64>>> = (0..restarts.max(1))
        .map(|_| loop {
            let cols: Vec<Vec<f64>> = (0..m).map(|_| unit_vector(&mut rng, n)).collect();
            if let Some(frame) = gram_schmidt(cols) {
                break frame;
            }
        })
        .collect();
    let results: Vec<(Vec<Vec<f64>>, f64)> = if offsets.is_empty() {
        starts.into_iter().map(|s| (s, f64::INFINITY)).collect()
    } else {
        starts
            .into_par_iter()
            .map(|s| frame_ascent(&offsets, s, AscentParams::DEFAULT))
            .collect()
    };
    let best = results
        .into_iter()
        .map(|(w, f)| (w.concat(), f, w))
        .reduce(|a, b| {
            if better(&(b.0.clone(), b.1), &(a.0.clone(), a.1)) {
                b
            } else {
                a
            }
        })
        .expect("at least one restart");
    if !(best.1 > 0.0) {
        return Ok(None);
    }
    let basis = best
        .2
        .into_iter()
        .map(VectorN::new)
        .collect::<Result<Vec<_>>>()?;
    Ok(verify(PlaneFrame::new(x.clone(), basis)?))
}
