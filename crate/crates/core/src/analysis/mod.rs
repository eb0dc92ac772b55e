//! Falsification harnesses: each runs a seeded batch of shadow decisions and
//! reports every counterexample with enough data to replay it.

mod example2;
mod slice;

pub use example2::{analyze_example2, cube14_caps, Example2Report, TangentSample};
pub use slice::slice_connectivity;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constructions::{
    boundary_sample, build_lemma, random_disjoint_balls, random_equal_balls, random_exterior_point,
};
use crate::error::{Error, Result};
use crate::geometry::{Scene, Topology, VectorN, DEFAULT_TOL};
use crate::rng::{derive_seed, seeded};
use crate::shadow::{
    heuristic_shadow, point_shadow, witness_clearance, ShadowStatus, WitnessLine, DEFAULT_RESTARTS,
};

/// Witness lines must clear every ball by more than this.
pub const CERTIFICATION_MARGIN: f64 = 1e-9;

const BOUNDARY_POINTS_PER_TRIAL: usize = 20;
const LEMMA_CIRCUMCIRCLE_SAMPLES: usize = 360;
const EXTERIOR_BOX: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportStatus {
    Pass,
    Fail,
    IndeterminateOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub trial: usize,
    pub seed: u64,
    pub scene: Scene,
    pub point: VectorN,
    pub verdict: ShadowStatus,
    pub witness: Option<WitnessLine>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub name: String,
    pub trials: usize,
    pub passes: usize,
    pub indeterminates: usize,
    pub failures: Vec<FailureRecord>,
    pub status: ReportStatus,
    pub points_checked: usize,
    /// Smallest witness clearance among not-shadowed verdicts, when any.
    pub min_witness_clearance: Option<f64>,
    pub summary: BTreeMap<String, f64>,
}

/// Result of one trial. A trial may check several points; it passes only if
/// all of them pass.
#[derive(Debug, Clone, PartialEq)]
pub enum TrialOutcome {
    Pass {
        points: usize,
        min_clearance: Option<f64>,
    },
    Indeterminate {
        points: usize,
    },
    Fail {
        points: usize,
        record: Box<FailureRecord>,
    },
}

impl PropertyReport {
    fn from_outcomes(name: &str, outcomes: Vec<TrialOutcome>) -> Self {
        let mut report = PropertyReport {
            name: name.to_string(),
            trials: outcomes.len(),
            passes: 0,
            indeterminates: 0,
            failures: Vec::new(),
            status: ReportStatus::Pass,
            points_checked: 0,
            min_witness_clearance: None,
            summary: BTreeMap::new(),
        };
        for outcome in outcomes {
            match outcome {
                TrialOutcome::Pass {
                    points,
                    min_clearance,
                } => {
                    report.passes += 1;
                    report.points_checked += points;
                    if let Some(c) = min_clearance {
                        report.min_witness_clearance =
                            Some(report.min_witness_clearance.map_or(c, |m: f64| m.min(c)));
                    }
                }
                TrialOutcome::Indeterminate { points } => {
                    report.indeterminates += 1;
                    report.points_checked += points;
                }
                TrialOutcome::Fail { points, record } => {
                    report.points_checked += points;
                    report.failures.push(*record);
                }
            }
        }
        report.status = if !report.failures.is_empty() {
            ReportStatus::Fail
        } else if report.indeterminates > 0 {
            ReportStatus::IndeterminateOnly
        } else {
            ReportStatus::Pass
        };
        report
    }
}

struct Ctx<'a> {
    trial: usize,
    seed: u64,
    scene: &'a Scene,
}

impl Ctx<'_> {
    fn fail(
        &self,
        points: usize,
        point: &VectorN,
        verdict: ShadowStatus,
        witness: Option<WitnessLine>,
        reason: impl Into<String>,
    ) -> TrialOutcome {
        TrialOutcome::Fail {
            points,
            record: Box::new(FailureRecord {
                trial: self.trial,
                seed: self.seed,
                scene: self.scene.clone(),
                point: point.clone(),
                verdict,
                witness,
                reason: reason.into(),
            }),
        }
    }
}

/// Checks that every point admits a certified escaping line.
fn expect_not_shadowed(ctx: &Ctx, points: &[VectorN], heuristic: bool) -> TrialOutcome {
    let mut min_clearance: Option<f64> = None;
    let mut indeterminate = false;
    for (k, p) in points.iter().enumerate() {
        let verdict = if heuristic {
            heuristic_shadow(
                ctx.scene,
                p,
                DEFAULT_RESTARTS,
                derive_seed(ctx.seed, k as u64),
            )
        } else {
            point_shadow(ctx.scene, p, DEFAULT_TOL)
        };
        let verdict = match verdict {
            Ok(v) => v,
            Err(e) => return ctx.fail(k + 1, p, ShadowStatus::Indeterminate, None, e.to_string()),
        };
        match verdict.status {
            ShadowStatus::NotShadowed => {
                let line = verdict
                    .witness
                    .expect("not-shadowed verdicts carry a witness");
                let clearance = witness_clearance(ctx.scene, &line, DEFAULT_TOL);
                if !(clearance > CERTIFICATION_MARGIN) {
                    return ctx.fail(
                        k + 1,
                        p,
                        verdict.status,
                        Some(line),
                        format!(
                            "witness clearance {clearance:e} not above {CERTIFICATION_MARGIN:e}"
                        ),
                    );
                }
                min_clearance = Some(min_clearance.map_or(clearance, |m| m.min(clearance)));
            }
            ShadowStatus::Indeterminate | ShadowStatus::PossiblyShadowed => indeterminate = true,
            ShadowStatus::Shadowed => {
                return ctx.fail(
                    k + 1,
                    p,
                    verdict.status,
                    None,
                    "every line through the point meets a ball",
                )
            }
        }
    }
    if indeterminate {
        TrialOutcome::Indeterminate {
            points: points.len(),
        }
    } else {
        TrialOutcome::Pass {
            points: points.len(),
            min_clearance,
        }
    }
}

/// Boundary points of the union of `scene`'s balls (spread evenly over the
/// balls), each of which must admit a line missing every open ball.
pub fn boundary_trial(
    scene: &Scene,
    samples: usize,
    trial: usize,
    seed: u64,
) -> Result<TrialOutcome> {
    let open = scene.with_topology(Topology::Open);
    let per_ball = samples.div_ceil(scene.balls.len().max(1));
    let mut points = Vec::with_capacity(samples);
    for b in 0..scene.balls.len() {
        points.extend(boundary_sample(
            scene,
            b,
            per_ball,
            derive_seed(seed, b as u64),
        )?);
    }
    points.truncate(samples);
    Ok(expect_not_shadowed(
        &Ctx {
            trial,
            seed,
            scene: &open,
        },
        &points,
        false,
    ))
}

/// A single exterior point that must admit a certified escaping line.
pub fn not_shadowed_trial(scene: &Scene, point: &VectorN, trial: usize, seed: u64) -> TrialOutcome {
    let heuristic = scene.dim > 3;
    expect_not_shadowed(
        &Ctx { trial, seed, scene },
        std::slice::from_ref(point),
        heuristic,
    )
}

fn run_trials(
    trials: usize,
    seed: u64,
    f: impl Fn(usize, u64) -> Result<TrialOutcome> + Sync,
) -> Result<Vec<TrialOutcome>> {
    (0..trials)
        .into_par_iter()
        .map(|t| f(t, derive_seed(seed, t as u64)))
        .collect()
}

/// Three equal disjoint open balls in R³: every boundary point of the union
/// admits a line through it missing all of them.
pub fn check_theorem3(trials: usize, seed: u64) -> Result<PropertyReport> {
    let outcomes = run_trials(trials, seed, |t, s| {
        let scene = random_equal_balls(3, 3, 1.0, s)?;
        boundary_trial(&scene, BOUNDARY_POINTS_PER_TRIAL, t, s)
    })?;
    Ok(PropertyReport::from_outcomes("theorem3", outcomes))
}

/// Three equal disjoint balls in R³: every exterior point admits a line
/// through it missing all of them.
pub fn check_theorem4(trials: usize, seed: u64) -> Result<PropertyReport> {
    let outcomes = run_trials(trials, seed, |t, s| {
        let scene = random_equal_balls(3, 3, 1.0, s)?;
        let point = random_exterior_point(&scene, EXTERIOR_BOX, &mut seeded(derive_seed(s, 1)));
        Ok(not_shadowed_trial(&scene, &point, t, s))
    })?;
    Ok(PropertyReport::from_outcomes("theorem4", outcomes))
}

/// `k < dim` disjoint balls of arbitrary radii never shadow an exterior point.
pub fn check_lower_bound(k: usize, dim: usize, trials: usize, seed: u64) -> Result<PropertyReport> {
    if k == 0 || k >= dim {
        return Err(Error::Precondition(format!(
            "lower-bound check needs 1 ≤ k < dim, got k={k}, dim={dim}"
        )));
    }
    let outcomes = run_trials(trials, seed, |t, s| {
        let scene = random_disjoint_balls(dim, k, 0.2..2.0, s)?;
        let point = random_exterior_point(&scene, EXTERIOR_BOX, &mut seeded(derive_seed(s, 1)));
        Ok(not_shadowed_trial(&scene, &point, t, s))
    })?;
    let mut report = PropertyReport::from_outcomes("lower-bound", outcomes);
    report.summary.insert("k".into(), k as f64);
    report.summary.insert("dim".into(), dim as f64);
    Ok(report)
}

/// Every grid point of the three-disc hull lying at least `eps` outside the
/// discs is shadowed; and the circumcircle lies in the hull.
pub fn verify_lemma(side: f64, grid_step: f64, eps: f64) -> Result<PropertyReport> {
    if !(grid_step > 0.0 && eps > 0.0) {
        return Err(Error::Precondition(
            "grid_step and eps must be positive".into(),
        ));
    }
    let cfg = build_lemma(side)?;
    let rho = cfg.disc_radius;
    let h = side * 3f64.sqrt() / 2.0;
    let (x0, y0) = (-rho, -rho);
    let nx = ((side + 2.0 * rho) / grid_step).floor() as i64;
    let ny = ((h + 2.0 * rho) / grid_step).floor() as i64;
    // Integer lattice aligned with the origin, so halving the step refines it.
    let (i0, j0) = (
        (x0 / grid_step).floor() as i64,
        (y0 / grid_step).floor() as i64,
    );
    let points: Vec<VectorN> = (j0..=j0 + ny + 1)
        .flat_map(|j| (i0..=i0 + nx + 1).map(move |i| (i, j)))
        .filter_map(|(i, j)| {
            let p = VectorN::new(vec![i as f64 * grid_step, j as f64 * grid_step]).ok()?;
            let outside = cfg.vertices.iter().all(|v| p.distance(v) >= rho + eps);
            (outside && cfg.in_hull(&p)).then_some(p)
        })
        .collect();

    let scene = &cfg.scene;
    let mut outcomes: Vec<TrialOutcome> = points
        .par_iter()
        .enumerate()
        .map(|(t, p)| {
            let ctx = Ctx {
                trial: t,
                seed: 0,
                scene,
            };
            match point_shadow(scene, p, DEFAULT_TOL) {
                Ok(v) => match v.status {
                    ShadowStatus::Shadowed => TrialOutcome::Pass {
                        points: 1,
                        min_clearance: None,
                    },
                    ShadowStatus::Indeterminate | ShadowStatus::PossiblyShadowed => {
                        TrialOutcome::Indeterminate { points: 1 }
                    }
                    ShadowStatus::NotShadowed => ctx.fail(
                        1,
                        p,
                        v.status,
                        v.witness,
                        "found a line missing all three discs",
                    ),
                },
                Err(e) => ctx.fail(1, p, ShadowStatus::Indeterminate, None, e.to_string()),
            }
        })
        .collect();

    let center = cfg.centroid();
    let radius = cfg.circumradius();
    let mut worst: f64 = 0.0;
    for k in 0..LEMMA_CIRCUMCIRCLE_SAMPLES {
        let t = k as f64 * 2.0 * std::f64::consts::PI / LEMMA_CIRCUMCIRCLE_SAMPLES as f64;
        let p = center.add(&VectorN::new(vec![radius * t.cos(), radius * t.sin()])?);
        let d = cfg.distance_to_triangle(&p);
        worst = worst.max(d);
        let ctx = Ctx {
            trial: points.len() + k,
            seed: 0,
            scene,
        };
        outcomes.push(if d <= rho {
            TrialOutcome::Pass {
                points: 1,
                min_clearance: None,
            }
        } else {
            ctx.fail(
                1,
                &p,
                ShadowStatus::Indeterminate,
                None,
                format!("circumcircle point at distance {d} from the triangle"),
            )
        });
    }

    let mut report = PropertyReport::from_outcomes("lemma", outcomes);
    report.summary.insert("side".into(), side);
    report.summary.insert("grid_step".into(), grid_step);
    report.summary.insert("disc_radius".into(), rho);
    report
        .summary
        .insert("grid_points".into(), points.len() as f64);
    report.summary.insert(
        "circumcircle_samples".into(),
        LEMMA_CIRCUMCIRCLE_SAMPLES as f64,
    );
    report
        .summary
        .insert("circumcircle_max_triangle_distance".into(), worst);
    Ok(report)
}
