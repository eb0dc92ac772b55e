//! Does a finite union of spherical caps cover S²?
//!
//! The decision runs in three stages:
//!
//! 1. trivial cases (a full cap, no caps at all);
//! 2. a falsifier that evaluates the margin `μ(d) = min_i(cos β_i − d·a_i)` on
//!    a Fibonacci grid and polishes the best point by ascent; `μ > tol` is a
//!    self-certifying uncovered witness;
//! 3. an arrangement test: if the union misses an open region, the region's
//!    boundary contains an arc of some cap's boundary circle lying outside all
//!    other caps. Every boundary circle is therefore checked for coverage by
//!    the other closed caps with [`cover_circle`]. Uncovered boundary arcs are
//!    turned into probes just outside the circle and re-certified.

use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::Rng;
use rand_distr::UnitSphere;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ascent::{self, AscentParams, Constraint};
use crate::circle_cover::{cover_circle, gaps, Arc, ArcSet, CircleVerdict, Period};
use crate::geometry::{tangent_basis, Cap};
use crate::rng::seeded;

pub const DEFAULT_FALSIFIER_GRID: usize = 20_000;
const POLISH_STEPS: usize = 200;

/// Caps with positive angular radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapSet {
    caps: Vec<Cap>,
}

impl CapSet {
    pub fn new(caps: impl IntoIterator<Item = Cap>) -> Self {
        CapSet {
            caps: caps
                .into_iter()
                .filter(|c| c.angular_radius > 0.0)
                .collect(),
        }
    }

    pub fn caps(&self) -> &[Cap] {
        &self.caps
    }

    pub fn len(&self) -> usize {
        self.caps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.caps.is_empty()
    }

    fn constraints(&self) -> Vec<Constraint> {
        self.caps
            .iter()
            .map(|c| Constraint {
                axis: c.axis.as_slice().to_vec(),
                limit: c.angular_radius.cos(),
                symmetric: false,
            })
            .collect()
    }
}

/// Empty cap sets have margin 2, the supremum of any single cap constraint.
pub const EMPTY_MARGIN: f64 = 2.0;

/// `μ(d) = min_i(cos β_i − d·a_i)`; positive iff `d` is outside every closed cap.
pub fn margin(d: &Vector3<f64>, caps: &CapSet) -> f64 {
    if caps.is_empty() {
        return EMPTY_MARGIN;
    }
    caps.caps
        .iter()
        .map(|c| c.angular_radius.cos() - d.dot(&c.axis))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SphereVerdict {
    Covered,
    Uncovered,
    Indeterminate,
}

/// Uncovered parameter intervals on one cap's boundary circle
/// `d(t) = cos β·a + sin β·(e1 cos t + e2 sin t)`, `(e1, e2)` the tangent basis
/// of the axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryArcs {
    pub cap: usize,
    /// `(start, length)` pairs in radians of `t`.
    pub uncovered: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereCoverage {
    pub verdict: SphereVerdict,
    pub witness: Option<Vector3<f64>>,
    /// Margin at the witness, or the best margin found when covered or
    /// indeterminate.
    pub margin: f64,
    pub boundary_report: Vec<BoundaryArcs>,
}

/// Stage-2 outcome: the best grid point after polishing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Falsification {
    pub point: Vector3<f64>,
    pub margin: f64,
}

/// Deterministic near-uniform point set on S² (golden-angle spiral).
pub fn fibonacci_sphere(n: usize) -> Vec<Vector3<f64>> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            Vector3::new(rho * phi.cos(), rho * phi.sin(), z)
        })
        .collect()
}

fn polish(constraints: &[Constraint], start: Vector3<f64>) -> (Vector3<f64>, f64) {
    let params = AscentParams {
        max_iters: POLISH_STEPS,
        ..AscentParams::DEFAULT
    };
    let (d, m) = ascent::maximize(constraints, start.as_slice().to_vec(), params);
    (Vector3::from_vec(d), m)
}

/// Stage 2: best grid point (ties to the lowest index), polished.
pub fn falsify(caps: &CapSet, grid: usize) -> Falsification {
    if caps.is_empty() {
        return Falsification {
            point: Vector3::z(),
            margin: EMPTY_MARGIN,
        };
    }
    let points = fibonacci_sphere(grid.max(1));
    let (best_idx, _) = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| (i, margin(p, caps)))
        .reduce(
            || (usize::MAX, f64::NEG_INFINITY),
            |a, b| {
                if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                    b
                } else {
                    a
                }
            },
        );
    let (point, margin) = polish(&caps.constraints(), points[best_idx]);
    Falsification { point, margin }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arrangement {
    pub verdict: SphereVerdict,
    pub witness: Option<Vector3<f64>>,
    pub margin: f64,
    pub boundary_report: Vec<BoundaryArcs>,
}

/// What cap `j` covers of the boundary circle of cap `i`. `SkipCircle` marks
/// circle `i` as a duplicate of an earlier cap's circle.
enum Contribution {
    Nothing,
    Full,
    Arc(Arc),
    SkipCircle,
}

fn contribution(
    caps: &[Cap],
    i: usize,
    j: usize,
    e1: &Vector3<f64>,
    e2: &Vector3<f64>,
    tol: f64,
) -> Contribution {
    let (ci, cj) = (&caps[i], &caps[j]);
    let (sin_i, cos_i) = ci.angular_radius.sin_cos();
    let cos_j = cj.angular_radius.cos();
    let a = cos_i * ci.axis.dot(&cj.axis);
    let (p1, p2) = (e1.dot(&cj.axis), e2.dot(&cj.axis));
    let r = sin_i * p1.hypot(p2);
    if r <= tol {
        if a > cos_j + tol {
            return Contribution::Full;
        }
        if a < cos_j - tol {
            return Contribution::Nothing;
        }
        // Coincident boundary circles.
        if ci.axis.dot(&cj.axis) < 0.0 {
            // Complementary caps sharing a boundary cover it if either is closed.
            return if ci.topology.is_closed() || cj.topology.is_closed() {
                Contribution::Full
            } else {
                Contribution::Nothing
            };
        }
        return if j < i {
            Contribution::SkipCircle
        } else {
            Contribution::Nothing
        };
    }
    let k = (cos_j - a) / r;
    if k <= -1.0 {
        Contribution::Full
    } else if k > 1.0 {
        Contribution::Nothing
    } else {
        Contribution::Arc(Arc::new(p2.atan2(p1), k.acos(), Period::TwoPi))
    }
}

fn circle_point(
    cap: &Cap,
    e1: &Vector3<f64>,
    e2: &Vector3<f64>,
    angle: f64,
    t: f64,
) -> Vector3<f64> {
    let (s, c) = angle.sin_cos();
    cap.axis * c + (e1 * t.cos() + e2 * t.sin()) * s
}

/// Stage 3 on its own.
/// Uncovered arcs of one boundary circle and its best probe point.
type CircleProbe = (BoundaryArcs, Option<(Vector3<f64>, f64)>);

pub fn arrangement(caps: &CapSet, tol: f64) -> Arrangement {
    let list = caps.caps();
    if list.iter().any(|c| c.angular_radius >= PI) {
        return Arrangement {
            verdict: SphereVerdict::Covered,
            witness: None,
            margin: margin(&Vector3::z(), caps),
            boundary_report: Vec::new(),
        };
    }
    if list.is_empty() {
        return Arrangement {
            verdict: SphereVerdict::Uncovered,
            witness: Some(Vector3::z()),
            margin: EMPTY_MARGIN,
            boundary_report: Vec::new(),
        };
    }
    let constraints = caps.constraints();
    let per_circle: Vec<CircleProbe> = (0..list.len())
        .into_par_iter()
        .filter_map(|i| {
            let (e1, e2) = tangent_basis(&list[i].axis);
            let mut set = ArcSet::empty(Period::TwoPi);
            for j in 0..list.len() {
                if j == i {
                    continue;
                }
                match contribution(list, i, j, &e1, &e2, tol) {
                    Contribution::Nothing => {}
                    Contribution::Full => return None,
                    Contribution::SkipCircle => return None,
                    Contribution::Arc(arc) => set.push(arc).expect("same period"),
                }
            }
            if cover_circle(&set, tol).verdict == CircleVerdict::Covered {
                return None;
            }
            let open: Vec<(f64, f64)> = gaps(&set)
                .into_iter()
                .filter(|g| g.length > tol)
                .map(|g| (g.start, g.length))
                .collect();
            let eps = 10.0 * tol;
            let mut best: Option<(Vector3<f64>, f64)> = None;
            let outward = list[i].angular_radius + eps;
            if outward < PI {
                for &(start, len) in &open {
                    let t = start + len / 2.0;
                    let q = circle_point(&list[i], &e1, &e2, outward, t);
                    let mut cand = (q, margin(&q, caps));
                    if cand.1 <= tol {
                        cand = polish(&constraints, q);
                    }
                    if best.is_none_or(|b| cand.1 > b.1) {
                        best = Some(cand);
                    }
                }
            }
            Some((
                BoundaryArcs {
                    cap: i,
                    uncovered: open,
                },
                best,
            ))
        })
        .collect();

    if per_circle.is_empty() {
        return Arrangement {
            verdict: SphereVerdict::Covered,
            witness: None,
            margin: f64::NEG_INFINITY,
            boundary_report: Vec::new(),
        };
    }
    let mut best: Option<(Vector3<f64>, f64)> = None;
    for (_, cand) in &per_circle {
        if let Some(c) = cand {
            if best.is_none_or(|b| c.1 > b.1) {
                best = Some(*c);
            }
        }
    }
    let report = per_circle.into_iter().map(|(b, _)| b).collect();
    match best {
        Some((q, m)) if m > tol => Arrangement {
            verdict: SphereVerdict::Uncovered,
            witness: Some(q),
            margin: m,
            boundary_report: report,
        },
        other => Arrangement {
            verdict: SphereVerdict::Indeterminate,
            witness: None,
            margin: other.map_or(f64::NEG_INFINITY, |b| b.1),
            boundary_report: report,
        },
    }
}

/// Full three-stage decision.
pub fn cover_sphere(caps: &CapSet, tol: f64, falsifier_grid: usize) -> SphereCoverage {
    if caps.caps().iter().any(|c| c.angular_radius >= PI) {
        return SphereCoverage {
            verdict: SphereVerdict::Covered,
            witness: None,
            margin: margin(&Vector3::z(), caps),
            boundary_report: Vec::new(),
        };
    }
    if caps.is_empty() {
        return SphereCoverage {
            verdict: SphereVerdict::Uncovered,
            witness: Some(Vector3::z()),
            margin: EMPTY_MARGIN,
            boundary_report: Vec::new(),
        };
    }
    let falsified = falsify(caps, falsifier_grid);
    let arr = arrangement(caps, tol);
    if falsified.margin > tol {
        return SphereCoverage {
            verdict: SphereVerdict::Uncovered,
            witness: Some(falsified.point),
            margin: falsified.margin,
            boundary_report: arr.boundary_report,
        };
    }
    let margin = match arr.verdict {
        SphereVerdict::Uncovered => arr.margin,
        _ => falsified.margin.max(arr.margin),
    };
    SphereCoverage {
        verdict: arr.verdict,
        witness: arr.witness,
        margin,
        boundary_report: arr.boundary_report,
    }
}

/// Monte-Carlo estimate (steradians) of the region outside every closed cap,
/// with its standard error.
pub fn uncovered_area_estimate(caps: &CapSet, samples: usize, seed: u64) -> (f64, f64) {
    let samples = samples.max(1);
    let mut rng = seeded(seed);
    let mut hits = 0usize;
    for _ in 0..samples {
        let p: [f64; 3] = rng.sample(UnitSphere);
        if margin(&Vector3::from(p), caps) > 0.0 {
            hits += 1;
        }
    }
    let frac = hits as f64 / samples as f64;
    let area = 4.0 * PI;
    (
        area * frac,
        area * (frac * (1.0 - frac) / samples as f64).sqrt(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::{Rotation3, Unit};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_6};

    use crate::rng::{seeded, unit_vector};

    const TOL: f64 = 1e-9;

    fn cap(a: [f64; 3], beta: f64) -> Cap {
        Cap::closed(Vector3::from(a), beta).unwrap()
    }

    fn random_caps(rng: &mut impl Rng) -> CapSet {
        let n = rng.random_range(3..=20);
        CapSet::new((0..n).map(|_| {
            Cap::closed(
                Vector3::from_vec(unit_vector(rng, 3)),
                rng.random_range(0.1..1.5),
            )
            .unwrap()
        }))
    }

    #[test]
    fn margin_of_single_cap() {
        let caps = CapSet::new([cap([0.0, 0.0, 1.0], FRAC_PI_6)]);
        assert_abs_diff_eq!(
            margin(&Vector3::x(), &caps),
            FRAC_PI_6.cos(),
            epsilon = 1e-15
        );
        assert!(margin(&Vector3::z(), &caps) < 0.0);
    }

    #[test]
    fn empty_caps_dropped() {
        let caps = CapSet::new([cap([0.0, 0.0, 1.0], 0.0), cap([1.0, 0.0, 0.0], 0.2)]);
        assert_eq!(caps.len(), 1);
    }

    #[test]
    fn trivial_stages() {
        let empty = CapSet::new([]);
        let cov = cover_sphere(&empty, TOL, 100);
        assert_eq!(cov.verdict, SphereVerdict::Uncovered);
        assert_eq!(cov.witness, Some(Vector3::z()));
        let full = CapSet::new([cap([1.0, 0.0, 0.0], PI)]);
        assert_eq!(
            cover_sphere(&full, TOL, 100).verdict,
            SphereVerdict::Covered
        );
    }

    #[test]
    fn band_pair_leaves_equator() {
        let caps = CapSet::new([
            cap([0.0, 0.0, 1.0], FRAC_PI_6),
            cap([0.0, 0.0, -1.0], FRAC_PI_6),
        ]);
        let cov = cover_sphere(&caps, TOL, DEFAULT_FALSIFIER_GRID);
        assert_eq!(cov.verdict, SphereVerdict::Uncovered);
        let w = cov.witness.unwrap();
        assert!(w.z.abs() < 1e-6);
        assert_abs_diff_eq!(cov.margin, FRAC_PI_6.cos(), epsilon = 1e-9);
    }

    #[test]
    fn overlapping_hemispheres_cover() {
        let caps = CapSet::new([
            cap([0.0, 0.0, 1.0], FRAC_PI_2 + 0.01),
            cap([0.0, 0.0, -1.0], FRAC_PI_2 + 0.01),
        ]);
        let cov = cover_sphere(&caps, TOL, DEFAULT_FALSIFIER_GRID);
        assert_eq!(cov.verdict, SphereVerdict::Covered);
        assert!(cov.boundary_report.is_empty());
    }

    #[test]
    fn complementary_hemispheres_cover_by_shared_boundary() {
        let caps = CapSet::new([
            cap([0.0, 0.0, 1.0], FRAC_PI_2),
            cap([0.0, 0.0, -1.0], FRAC_PI_2),
        ]);
        assert_eq!(arrangement(&caps, TOL).verdict, SphereVerdict::Covered);
        assert_eq!(
            cover_sphere(&caps, TOL, 1000).verdict,
            SphereVerdict::Covered
        );
    }

    #[test]
    fn duplicate_caps_are_not_mutual_covers() {
        let caps = CapSet::new([cap([0.0, 0.0, 1.0], 0.5), cap([0.0, 0.0, 1.0], 0.5)]);
        let arr = arrangement(&caps, TOL);
        assert_eq!(arr.verdict, SphereVerdict::Uncovered);
        assert!(margin(&arr.witness.unwrap(), &caps) > TOL);
    }

    #[test]
    fn octahedral_caps_cover_when_large_enough() {
        // Six caps on ±axes; each octant corner (1,1,1)/√3 is at angle
        // arccos(1/√3) ≈ 0.9553 from the nearest axis.
        let axes = [
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
        ];
        let corner = (1.0f64 / 3f64.sqrt()).acos();
        let big = CapSet::new(axes.iter().map(|&a| cap(a, corner + 1e-3)));
        assert_eq!(
            cover_sphere(&big, TOL, DEFAULT_FALSIFIER_GRID).verdict,
            SphereVerdict::Covered
        );
        let small = CapSet::new(axes.iter().map(|&a| cap(a, corner - 1e-3)));
        let cov = cover_sphere(&small, TOL, DEFAULT_FALSIFIER_GRID);
        assert_eq!(cov.verdict, SphereVerdict::Uncovered);
        let arr = arrangement(&small, TOL);
        assert_eq!(arr.verdict, SphereVerdict::Uncovered);
        assert!(margin(&arr.witness.unwrap(), &small) > TOL);
    }

    #[test]
    fn fibonacci_points_are_unit_and_spread() {
        let pts = fibonacci_sphere(1000);
        assert!(pts.iter().all(|p| (p.norm() - 1.0).abs() < 1e-12));
        let mean: Vector3<f64> = pts.iter().sum::<Vector3<f64>>() / 1000.0;
        assert!(mean.norm() < 1e-2);
    }

    #[test]
    fn area_estimate_cases() {
        let (a, _) = uncovered_area_estimate(&CapSet::new([]), 1000, 1);
        assert_abs_diff_eq!(a, 4.0 * PI, epsilon = 1e-12);
        let hemi = CapSet::new([cap([0.0, 0.0, 1.0], FRAC_PI_2)]);
        let (a, se) = uncovered_area_estimate(&hemi, 100_000, 7);
        assert!((a - 2.0 * PI).abs() < 3.0 * se.max(1e-3), "{a} ± {se}");
        assert_eq!(
            uncovered_area_estimate(&hemi, 1000, 9),
            uncovered_area_estimate(&hemi, 1000, 9)
        );
    }

    #[test]
    fn falsifier_and_arrangement_never_contradict() {
        let mut rng = seeded(77);
        let mut indeterminate = 0;
        for _ in 0..200 {
            let caps = random_caps(&mut rng);
            let f = falsify(&caps, DEFAULT_FALSIFIER_GRID);
            let arr = arrangement(&caps, TOL);
            if f.margin > TOL {
                assert_ne!(arr.verdict, SphereVerdict::Covered);
            }
            match arr.verdict {
                SphereVerdict::Uncovered => assert!(margin(&arr.witness.unwrap(), &caps) > TOL),
                SphereVerdict::Indeterminate => indeterminate += 1,
                SphereVerdict::Covered => {}
            }
        }
        assert!(indeterminate <= 2, "indeterminate {indeterminate}");
    }

    #[test]
    fn enlarging_caps_never_uncovers() {
        let mut rng = seeded(4);
        for _ in 0..50 {
            let caps = random_caps(&mut rng);
            let cov = cover_sphere(&caps, TOL, 5000);
            if cov.verdict != SphereVerdict::Covered {
                continue;
            }
            let k = rng.random_range(0..caps.len());
            let grown = CapSet::new(caps.caps().iter().enumerate().map(|(i, c)| {
                let delta = if i == k { 0.05 } else { 0.0 };
                Cap::closed(c.axis, c.angular_radius + delta).unwrap()
            }));
            assert_eq!(
                cover_sphere(&grown, TOL, 5000).verdict,
                SphereVerdict::Covered
            );
        }
    }

    #[test]
    fn rotation_preserves_verdict() {
        let mut rng = seeded(12);
        for _ in 0..100 {
            let caps = random_caps(&mut rng);
            let axis = Unit::new_normalize(Vector3::from_vec(unit_vector(&mut rng, 3)));
            let rot = Rotation3::from_axis_angle(&axis, rng.random_range(0.0..2.0 * PI));
            let rotated = CapSet::new(
                caps.caps()
                    .iter()
                    .map(|c| Cap::closed(rot * c.axis, c.angular_radius).unwrap()),
            );
            let a = cover_sphere(&caps, TOL, 5000);
            let b = cover_sphere(&rotated, TOL, 5000);
            if a.verdict == SphereVerdict::Indeterminate
                || b.verdict == SphereVerdict::Indeterminate
            {
                continue;
            }
            assert_eq!(a.verdict, b.verdict);
            if let Some(w) = b.witness {
                assert!(margin(&(rot.inverse() * w), &caps) > 0.0);
            }
        }
    }
}
