use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::geometry::Scene;
use crate::shadow::PlaneFrame;

/// Number of connected components of `plane \ ⋃ balls`, estimated on a
/// `resolution × resolution` raster of the window `[−w, w]²` (plane
/// coordinates around the frame base). Components touching the window edge
/// are merged into the single unbounded component.
pub fn slice_connectivity(
    scene: &Scene,
    plane: &PlaneFrame,
    window: f64,
    resolution: usize,
) -> Result<usize> {
    if scene.dim != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: scene.dim,
        });
    }
    if plane.dim() != 2 || plane.base.dim() != 3 {
        return Err(Error::BadDimension {
            dim: 3,
            m: plane.dim(),
        });
    }
    if resolution < 32 {
        return Err(Error::Precondition(format!(
            "resolution must be at least 32, got {resolution}"
        )));
    }
    if !(window > 0.0) {
        return Err(Error::Precondition("window must be positive".into()));
    }

    let discs: Vec<([f64; 2], f64)> = scene
        .balls
        .iter()
        .filter_map(|b| {
            let h = plane.distance_to(&b.center);
            (h < b.radius).then(|| {
                let uv = plane.project(&b.center);
                ([uv[0], uv[1]], (b.radius * b.radius - h * h).sqrt())
            })
        })
        .collect();

    let n = resolution;
    let cell = 2.0 * window / n as f64;
    let blocked: Vec<bool> = (0..n * n)
        .map(|idx| {
            let (i, j) = (idx % n, idx / n);
            let u = -window + (i as f64 + 0.5) * cell;
            let v = -window + (j as f64 + 0.5) * cell;
            discs
                .iter()
                .any(|(c, r)| (u - c[0]).powi(2) + (v - c[1]).powi(2) <= r * r)
        })
        .collect();

    let mut seen = vec![false; n * n];
    let mut bounded = 0;
    let mut queue = VecDeque::new();
    for start in 0..n * n {
        if blocked[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut touches_edge = false;
        while let Some(idx) = queue.pop_front() {
            let (i, j) = (idx % n, idx / n);
            if i == 0 || j == 0 || i == n - 1 || j == n - 1 {
                touches_edge = true;
            }
            let neighbours = [
                (i > 0).then(|| idx - 1),
                (i + 1 < n).then(|| idx + 1),
                (j > 0).then(|| idx - n),
                (j + 1 < n).then(|| idx + n),
            ];
            for next in neighbours.into_iter().flatten() {
                if !blocked[next] && !seen[next] {
                    seen[next] = true;
                    queue.push_back(next);
                }
            }
        }
        if !touches_edge {
            bounded += 1;
        }
    }
    Ok(bounded + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Ball, VectorN};

    fn xy_plane() -> PlaneFrame {
        PlaneFrame::from_normal(
            VectorN::zeros(3),
            &VectorN::new(vec![0.0, 0.0, 1.0]).unwrap(),
        )
        .unwrap()
    }

    fn scene(balls: &[([f64; 3], f64)]) -> Scene {
        Scene::new(
            3,
            balls
                .iter()
                .map(|(c, r)| Ball::closed(c.to_vec(), *r).unwrap())
                .collect(),
            "",
        )
        .unwrap()
    }

    #[test]
    fn empty_scene_has_one_component() {
        assert_eq!(
            slice_connectivity(&scene(&[]), &xy_plane(), 5.0, 64).unwrap(),
            1
        );
    }

    #[test]
    fn one_disc_leaves_complement_connected() {
        assert_eq!(
            slice_connectivity(&scene(&[([0.0, 0.0, 0.0], 1.0)]), &xy_plane(), 5.0, 64).unwrap(),
            1
        );
    }

    #[test]
    fn nearly_touching_collinear_discs_keep_gaps() {
        let s = scene(&[
            ([-2.1, 0.0, 0.0], 1.0),
            ([0.0, 0.0, 0.0], 1.0),
            ([2.1, 0.0, 0.0], 1.0),
        ]);
        for res in [256, 512] {
            assert_eq!(slice_connectivity(&s, &xy_plane(), 4.0, res).unwrap(), 1);
        }
    }

    #[test]
    fn ring_of_discs_encloses_a_hole() {
        let balls: Vec<([f64; 3], f64)> = (0..12)
            .map(|k| {
                let t = k as f64 * std::f64::consts::PI / 6.0;
                ([2.0 * t.cos(), 2.0 * t.sin(), 0.1], 0.7)
            })
            .collect();
        let s = scene(&balls);
        assert_eq!(slice_connectivity(&s, &xy_plane(), 4.0, 128).unwrap(), 2);
        assert_eq!(slice_connectivity(&s, &xy_plane(), 4.0, 256).unwrap(), 2);
    }

    #[test]
    fn rejects_low_resolution() {
        assert!(slice_connectivity(&scene(&[]), &xy_plane(), 5.0, 16).is_err());
    }
}
