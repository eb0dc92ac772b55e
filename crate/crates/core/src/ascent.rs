//! Projected max-min ascent on the unit sphere S^{n-1}.
//!
//! Maximizes `μ(d) = min_i (limit_i − s_i(d·a_i))` where `s_i` is the identity
//! for one-sided constraints (caps) and `|·|` for symmetric ones (bands).

use crate::geometry::dot;

#[derive(Debug, Clone)]
pub(crate) struct Constraint {
    pub axis: Vec<f64>,
    pub limit: f64,
    pub symmetric: bool,
}

impl Constraint {
    fn slack(&self, d: &[f64]) -> f64 {
        let p = dot(&self.axis, d);
        self.limit - if self.symmetric { p.abs() } else { p }
    }

    /// Ascent direction of the slack, projected onto the tangent space at `d`.
    fn gradient(&self, d: &[f64]) -> Vec<f64> {
        let p = dot(&self.axis, d);
        let sign = if self.symmetric && p < 0.0 { 1.0 } else { -1.0 };
        self.axis
            .iter()
            .zip(d)
            .map(|(a, x)| sign * (a - p * x))
            .collect()
    }
}

pub(crate) fn margin(constraints: &[Constraint], d: &[f64]) -> f64 {
    constraints
        .iter()
        .map(|c| c.slack(d))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct AscentParams {
    pub initial_step: f64,
    pub min_step: f64,
    pub max_iters: usize,
}

impl AscentParams {
    pub const DEFAULT: AscentParams = AscentParams {
        initial_step: 0.1,
        min_step: 1e-12,
        max_iters: 10_000,
    };
}

fn retract(d: &[f64], dir: &[f64], step: f64) -> Option<Vec<f64>> {
    let n = dot(dir, dir).sqrt();
    if !(n > 1e-300) {
        return None;
    }
    let moved: Vec<f64> = d.iter().zip(dir).map(|(x, g)| x + step * g / n).collect();
    let m = dot(&moved, &moved).sqrt();
    Some(moved.into_iter().map(|x| x / m).collect())
}

/// Runs the ascent from `start` (unit vector). Returns the final direction and
/// its margin; the margin never decreases.
pub(crate) fn maximize(
    constraints: &[Constraint],
    start: Vec<f64>,
    params: AscentParams,
) -> (Vec<f64>, f64) {
    let mut d = start;
    let mut best = margin(constraints, &d);
    if constraints.is_empty() {
        return (d, best);
    }
    let mut step = params.initial_step;
    let mut iters = 0;
    while step >= params.min_step && iters < params.max_iters {
        iters += 1;
        let slacks: Vec<f64> = constraints.iter().map(|c| c.slack(&d)).collect();
        let active = (0..constraints.len())
            .min_by(|&a, &b| slacks[a].total_cmp(&slacks[b]))
            .expect("non-empty");
        let mut candidates = vec![constraints[active].gradient(&d)];
        // Near-active constraints pull together at a kink.
        let mut combined = vec![0.0; d.len()];
        let mut near = 0;
        for (c, &s) in constraints.iter().zip(&slacks) {
            if s <= best + step {
                let g = c.gradient(&d);
                let n = dot(&g, &g).sqrt();
                if n > 1e-300 {
                    combined
                        .iter_mut()
                        .zip(&g)
                        .for_each(|(acc, gi)| *acc += gi / n);
                    near += 1;
                }
            }
        }
        if near > 1 {
            candidates.push(combined);
        }
        let mut improved = false;
        for dir in candidates {
            if let Some(next) = retract(&d, &dir, step) {
                let m = margin(constraints, &next);
                if m > best {
                    d = next;
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
    (d, best)
}
