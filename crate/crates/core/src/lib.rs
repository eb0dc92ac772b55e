//! Decision procedures for the shadow problem on families of disjoint balls:
//! does every line through a point meet one of the balls?
//!
//! The engine reduces line–ball incidence to angular coverage problems:
//!
//! - in the plane, to arcs on the circle of line directions ([`circle_cover`]);
//! - in space, to antipodal cap pairs on the direction sphere ([`sphere_cover`]);
//! - for lines tangent to S², to arcs on the tangent circle.
//!
//! Every "not shadowed" answer carries a witness line that can be checked
//! independently against the balls. [`analysis`] runs seeded falsification
//! batches over the classical configurations built in [`constructions`].

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
mod ascent;
pub mod circle_cover;
pub mod constructions;
pub mod error;
pub mod geometry;
pub mod rng;
pub mod shadow;
pub mod sphere_cover;

pub use circle_cover::{
    cover_circle, uncovered_measure, Arc, ArcSet, CircleCoverage, CircleVerdict, Period,
};
pub use error::{Error, Result};
pub use geometry::{
    ball_band, ball_sphere_cap, pair_relation, tangent_arcs, tangent_basis, Ball, Band, Cap,
    PairRelation, Scene, SphereSection, Topology, VectorN, DEFAULT_TOL,
};
pub use shadow::{
    find_avoiding_plane, heuristic_shadow, point_shadow, tangent_shadow, witness_clearance,
    PlaneFrame, ShadowStatus, ShadowVerdict, WitnessLine,
};
pub use sphere_cover::{
    cover_sphere, margin, uncovered_area_estimate, CapSet, SphereCoverage, SphereVerdict,
};
