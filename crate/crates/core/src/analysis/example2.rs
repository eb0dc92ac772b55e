use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constructions::{
    build_cube14, tangency_summary, Cube14Config, TangencySummary, CUBE14_VERTEX_BALLS, EXACT_TOL,
};
use crate::error::{Error, Result};
use crate::geometry::{ball_sphere_cap, SphereSection, VectorN, DEFAULT_TOL};
use crate::shadow::{tangent_shadow, ShadowStatus};
use crate::sphere_cover::{
    cover_sphere, fibonacci_sphere, uncovered_area_estimate, CapSet, SphereCoverage,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentSample {
    pub point: [f64; 3],
    pub verdict: ShadowStatus,
    pub largest_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example2Report {
    pub vertex_radius: f64,
    pub face_radius: f64,
    pub tangency: TangencySummary,
    pub sphere_coverage: SphereCoverage,
    pub uncovered_area: f64,
    pub uncovered_area_stderr: f64,
    pub area_samples: usize,
    pub falsifier_grid: usize,
    pub tangent_grid_size: usize,
    /// Grid points lying outside every closed ball.
    pub tangent_points_evaluated: usize,
    /// Per-point tangent-shadow results; emitted as CSV, not JSON.
    #[serde(skip)]
    pub tangent_grid: Vec<TangentSample>,
    /// Points of S² outside every closed ball where some tangent line escapes.
    pub failure_points: Vec<[f64; 3]>,
}

impl Example2Report {
    /// CSV with columns `px,py,pz,verdict,gap`.
    pub fn tangent_csv(&self) -> String {
        let mut out = String::from("px,py,pz,verdict,gap\n");
        for s in &self.tangent_grid {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                s.point[0],
                s.point[1],
                s.point[2],
                s.verdict.as_str(),
                s.largest_gap
            );
        }
        out
    }
}

/// Caps cut from the unit sphere by the 14 closed balls.
pub fn cube14_caps(cfg: &Cube14Config) -> Result<CapSet> {
    let mut caps = Vec::new();
    for ball in &cfg.scene.balls {
        match ball_sphere_cap(ball)? {
            SphereSection::Cap(c) => caps.push(c),
            other => {
                return Err(Error::InvariantViolation(format!(
                    "expected a proper cap, got {other:?}"
                )))
            }
        }
    }
    Ok(CapSet::new(caps))
}

pub fn analyze_example2(
    tangent_grid: usize,
    area_samples: usize,
    falsifier_grid: usize,
    seed: u64,
) -> Result<Example2Report> {
    if tangent_grid < 100 {
        return Err(Error::Precondition(format!(
            "tangent grid must have at least 100 points, got {tangent_grid}"
        )));
    }
    if area_samples == 0 || falsifier_grid == 0 {
        return Err(Error::Precondition(
            "area samples and falsifier grid must be positive".into(),
        ));
    }
    let cfg = build_cube14()?;
    let tangency = tangency_summary(&cfg.scene, CUBE14_VERTEX_BALLS, EXACT_TOL)?;
    let caps = cube14_caps(&cfg)?;
    let sphere_coverage = cover_sphere(&caps, DEFAULT_TOL, falsifier_grid);
    let (uncovered_area, uncovered_area_stderr) =
        uncovered_area_estimate(&caps, area_samples, seed);

    let scene = &cfg.scene;
    let samples: Vec<TangentSample> = fibonacci_sphere(tangent_grid)
        .into_par_iter()
        .filter_map(|p| {
            let x = VectorN::from(p);
            let outside = scene
                .balls
                .iter()
                .all(|b| x.distance(&b.center) > b.radius + DEFAULT_TOL);
            if !outside {
                return None;
            }
            let v = tangent_shadow(scene, &x, DEFAULT_TOL).ok()?;
            Some(TangentSample {
                point: [p.x, p.y, p.z],
                verdict: v.status,
                largest_gap: v.largest_gap.unwrap_or(0.0),
            })
        })
        .collect();
    let failure_points = samples
        .iter()
        .filter(|s| s.verdict == ShadowStatus::NotShadowed && s.largest_gap > DEFAULT_TOL)
        .map(|s| s.point)
        .collect();

    Ok(Example2Report {
        vertex_radius: cfg.vertex_radius,
        face_radius: cfg.face_radius,
        tangency,
        sphere_coverage,
        uncovered_area,
        uncovered_area_stderr,
        area_samples,
        falsifier_grid,
        tangent_grid_size: tangent_grid,
        tangent_points_evaluated: samples.len(),
        tangent_grid: samples,
        failure_points,
    })
}
