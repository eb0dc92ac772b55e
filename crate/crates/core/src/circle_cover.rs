//! Coverage of a circle (period π or 2π) by a finite union of closed arcs.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Period {
    /// Line directions in a plane: θ and θ + π are the same line.
    Pi,
    TwoPi,
}

impl Period {
    pub fn length(self) -> f64 {
        match self {
            Period::Pi => PI,
            Period::TwoPi => 2.0 * PI,
        }
    }

    /// Reduces an angle into `[0, P)`.
    pub fn wrap(self, theta: f64) -> f64 {
        let p = self.length();
        let t = theta.rem_euclid(p);
        if t >= p {
            0.0
        } else {
            t
        }
    }
}

/// Closed arc `[center − half_width, center + half_width]` modulo the period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub center: f64,
    pub half_width: f64,
    pub period: Period,
}

impl Arc {
    pub fn new(center: f64, half_width: f64, period: Period) -> Arc {
        assert!(
            center.is_finite() && half_width.is_finite() && half_width >= 0.0,
            "arc needs finite center and non-negative half-width"
        );
        let half_width = half_width.min(period.length() / 2.0);
        Arc {
            center: period.wrap(center),
            half_width,
            period,
        }
    }

    pub fn is_full(&self) -> bool {
        2.0 * self.half_width >= self.period.length()
    }

    /// Angular distance from `theta` to the arc center, in `[0, P/2]`.
    pub fn offset(&self, theta: f64) -> f64 {
        let p = self.period.length();
        let d = (theta - self.center).rem_euclid(p);
        d.min(p - d)
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.is_full() || self.offset(theta) <= self.half_width
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcSet {
    period: Period,
    arcs: Vec<Arc>,
}

impl ArcSet {
    pub fn new(period: Period, arcs: Vec<Arc>) -> Result<Self> {
        if arcs.iter().any(|a| a.period != period) {
            return Err(Error::MixedPeriods);
        }
        Ok(ArcSet { period, arcs })
    }

    pub fn empty(period: Period) -> Self {
        ArcSet {
            period,
            arcs: Vec::new(),
        }
    }

    pub fn push(&mut self, arc: Arc) -> Result<()> {
        if arc.period != self.period {
            return Err(Error::MixedPeriods);
        }
        self.arcs.push(arc);
        Ok(())
    }

    pub fn period(&self) -> Period {
        self.period
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.arcs.iter().any(|a| a.contains(theta))
    }
}

/// A maximal uncovered interval `(start, start + length)` modulo the period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    pub start: f64,
    pub length: f64,
}

impl Gap {
    pub fn midpoint(&self, period: Period) -> f64 {
        period.wrap(self.start + self.length / 2.0)
    }
}

/// All maximal gaps of positive length in the complement of the union.
pub fn gaps(set: &ArcSet) -> Vec<Gap> {
    let p = set.period.length();
    if set.arcs.iter().any(Arc::is_full) {
        return Vec::new();
    }
    if set.arcs.is_empty() {
        return vec![Gap {
            start: 0.0,
            length: p,
        }];
    }
    let mut intervals: Vec<(f64, f64)> = Vec::with_capacity(set.arcs.len() * 2);
    for arc in &set.arcs {
        let lo = arc.center - arc.half_width;
        let hi = arc.center + arc.half_width;
        if lo < 0.0 {
            intervals.push((lo + p, p));
            intervals.push((0.0, hi));
        } else if hi > p {
            intervals.push((lo, p));
            intervals.push((0.0, hi - p));
        } else {
            intervals.push((lo, hi));
        }
    }
    intervals.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let mut out = Vec::new();
    let first_start = intervals[0].0;
    let mut reach = intervals[0].1;
    for &(lo, hi) in &intervals[1..] {
        if lo > reach {
            out.push(Gap {
                start: reach,
                length: lo - reach,
            });
        }
        reach = reach.max(hi);
    }
    let wrap = first_start + p - reach;
    if wrap > 0.0 {
        out.push(Gap {
            start: reach,
            length: wrap,
        });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CircleVerdict {
    Covered,
    Uncovered,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleCoverage {
    pub verdict: CircleVerdict,
    /// Midpoint of the largest gap; present iff uncovered.
    pub witness: Option<f64>,
    /// Length of the largest gap (0 when none exists, possibly below `tol`
    /// when covered).
    pub largest_gap: f64,
}

/// Decides whether the arcs cover the whole circle. Gaps no longer than `tol`
/// are fused.
const TIE_EPS: f64 = 1e-12;

pub fn cover_circle(set: &ArcSet, tol: f64) -> CircleCoverage {
    if set.arcs.is_empty() {
        return CircleCoverage {
            verdict: CircleVerdict::Uncovered,
            witness: Some(0.0),
            largest_gap: set.period.length(),
        };
    }
    let gaps = gaps(set);
    // First maximal gap wins ties; lengths equal up to rounding count as tied.
    let largest = gaps.iter().fold(None::<&Gap>, |best, g| match best {
        Some(b) if b.length >= g.length - TIE_EPS => Some(b),
        _ => Some(g),
    });
    match largest {
        Some(g) if g.length > tol => CircleCoverage {
            verdict: CircleVerdict::Uncovered,
            witness: Some(g.midpoint(set.period)),
            largest_gap: g.length,
        },
        other => CircleCoverage {
            verdict: CircleVerdict::Covered,
            witness: None,
            largest_gap: other.map_or(0.0, |g| g.length),
        },
    }
}

/// Total length (radians) of the complement of the union.
pub fn uncovered_measure(set: &ArcSet) -> f64 {
    gaps(set).iter().map(|g| g.length).sum()
}
