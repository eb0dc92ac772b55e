//! Deterministic builders for the fixed configurations (the equilateral
//! three-disc triangle and the 14-ball cube arrangement) and seeded random
//! scene generators.

use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{pair_relation, Ball, PairRelation, Scene, Topology, VectorN, DEFAULT_TOL};
use crate::rng::{seeded, unit_vector};

/// Tangency identities of the fixed constructions hold exactly in real
/// arithmetic; this tolerance only absorbs rounding.
pub const EXACT_TOL: f64 = 1e-12;

const MAX_REJECTIONS: usize = 100_000;
const GENERATOR_BOX: f64 = 5.0;
const SEPARATION_SLACK: f64 = 0.01;

/// Equilateral triangle with side `s`, A at the origin and AB on the x-axis,
/// and closed discs of radius `s√3/4` (half the altitude) at the vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaConfig {
    pub side: f64,
    pub vertices: [VectorN; 3],
    pub disc_radius: f64,
    pub scene: Scene,
}

impl LemmaConfig {
    pub fn circumradius(&self) -> f64 {
        self.side / 3f64.sqrt()
    }

    pub fn centroid(&self) -> VectorN {
        let sum = self.vertices[0]
            .add(&self.vertices[1])
            .add(&self.vertices[2]);
        sum.scale(1.0 / 3.0)
    }

    /// Euclidean distance from `p` to the closed triangle (0 inside).
    pub fn distance_to_triangle(&self, p: &VectorN) -> f64 {
        let [a, b, c] = &self.vertices;
        let cross = |o: &VectorN, u: &VectorN, w: &VectorN| {
            let (ou, ow) = (u.sub(o), w.sub(o));
            ou.coords()[0] * ow.coords()[1] - ou.coords()[1] * ow.coords()[0]
        };
        // Counter-clockwise vertex order.
        if cross(a, b, p) >= 0.0 && cross(b, c, p) >= 0.0 && cross(c, a, p) >= 0.0 {
            return 0.0;
        }
        [(a, b), (b, c), (c, a)]
            .iter()
            .map(|(u, w)| segment_distance(p, u, w))
            .fold(f64::INFINITY, f64::min)
    }

    /// Inside the convex hull of the three discs (triangle ⊕ disc of radius ρ).
    pub fn in_hull(&self, p: &VectorN) -> bool {
        self.distance_to_triangle(p) <= self.disc_radius
    }
}

fn segment_distance(p: &VectorN, a: &VectorN, b: &VectorN) -> f64 {
    let ab = b.sub(a);
    let t = (p.sub(a).dot(&ab) / ab.dot(&ab)).clamp(0.0, 1.0);
    p.distance(&a.add(&ab.scale(t)))
}

pub fn build_lemma(side: f64) -> Result<LemmaConfig> {
    if !(side.is_finite() && side > 0.0) {
        return Err(Error::Precondition(format!(
            "side must be positive, got {side}"
        )));
    }
    let h = side * 3f64.sqrt() / 2.0;
    let vertices = [
        VectorN::new(vec![0.0, 0.0])?,
        VectorN::new(vec![side, 0.0])?,
        VectorN::new(vec![side / 2.0, h])?,
    ];
    let rho = h / 2.0;
    let balls = vertices
        .iter()
        .map(|v| Ball::new(v.clone(), rho, Topology::Closed))
        .collect::<Result<Vec<_>>>()?;
    let scene = Scene::new(2, balls, format!("lemma triangle side {side}"))?;
    Ok(LemmaConfig {
        side,
        vertices,
        disc_radius: rho,
        scene,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cube14Config {
    /// Balls 0..8 sit at the cube vertices, 8..14 at the face directions.
    pub scene: Scene,
    pub vertex_radius: f64,
    pub face_radius: f64,
}

pub const CUBE14_VERTEX_BALLS: usize = 8;

/// Pairwise relation counts, split by ball kind (vertex or face).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TangencySummary {
    pub vertex_vertex_tangent: usize,
    pub vertex_face_tangent: usize,
    pub face_face_tangent: usize,
    pub overlapping: usize,
    pub disjoint: usize,
    /// Number of tangent neighbours of each ball.
    pub tangent_degree: Vec<usize>,
}

/// Classifies all pairs; balls with index below `vertex_balls` count as
/// vertex balls.
pub fn tangency_summary(scene: &Scene, vertex_balls: usize, tol: f64) -> Result<TangencySummary> {
    let n = scene.balls.len();
    let mut out = TangencySummary {
        tangent_degree: vec![0; n],
        ..Default::default()
    };
    for i in 0..n {
        for j in i + 1..n {
            match pair_relation(&scene.balls[i], &scene.balls[j], tol)? {
                PairRelation::Disjoint => out.disjoint += 1,
                PairRelation::Overlapping => out.overlapping += 1,
                PairRelation::Tangent => {
                    out.tangent_degree[i] += 1;
                    out.tangent_degree[j] += 1;
                    match (i < vertex_balls, j < vertex_balls) {
                        (true, true) => out.vertex_vertex_tangent += 1,
                        (false, false) => out.face_face_tangent += 1,
                        _ => out.vertex_face_tangent += 1,
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Eight balls of radius `1/√3` at the vertices of the cube inscribed in the
/// unit sphere, plus six balls of radius `√(2 − 2/√3) − 1/√3` where the face
/// normals pierce the sphere.
pub fn build_cube14() -> Result<Cube14Config> {
    let s = 1.0 / 3f64.sqrt();
    let vertex_radius = s;
    let face_radius = (2.0 - 2.0 * s).sqrt() - s;
    let mut balls = Vec::with_capacity(14);
    for &x in &[1.0, -1.0] {
        for &y in &[1.0, -1.0] {
            for &z in &[1.0, -1.0] {
                balls.push(Ball::closed(vec![x * s, y * s, z * s], vertex_radius)?);
            }
        }
    }
    for axis in 0..3 {
        for &sign in &[1.0, -1.0] {
            let mut c = vec![0.0; 3];
            c[axis] = sign;
            balls.push(Ball::closed(c, face_radius)?);
        }
    }
    let scene = Scene::new(3, balls, "cube14")?;

    let t = tangency_summary(&scene, CUBE14_VERTEX_BALLS, EXACT_TOL)?;
    let degrees_ok = t.tangent_degree[..CUBE14_VERTEX_BALLS]
        .iter()
        .all(|&d| d == 6)
        && t.tangent_degree[CUBE14_VERTEX_BALLS..]
            .iter()
            .all(|&d| d == 4);
    if t.vertex_vertex_tangent != 12
        || t.vertex_face_tangent != 24
        || t.face_face_tangent != 0
        || t.overlapping != 0
        || !degrees_ok
    {
        return Err(Error::InvariantViolation(format!(
            "unexpected tangency structure: {t:?}"
        )));
    }
    Ok(Cube14Config {
        scene,
        vertex_radius,
        face_radius,
    })
}

/// `k` balls of equal radius with centers in `[−5, 5]^dim`, pairwise center
/// distance at least `2·radius + 0.01`.
pub fn random_equal_balls(dim: usize, k: usize, radius: f64, seed: u64) -> Result<Scene> {
    random_balls(
        dim,
        k,
        || radius,
        seed,
        format!("random equal balls dim {dim} k {k} r {radius} seed {seed}"),
    )
}

/// Like [`random_equal_balls`] but with radii drawn uniformly from `radii`.
pub fn random_disjoint_balls(dim: usize, k: usize, radii: Range<f64>, seed: u64) -> Result<Scene> {
    let mut radius_rng = seeded(crate::rng::derive_seed(seed, 0x5ad));
    let (lo, hi) = (radii.start, radii.end);
    random_balls(
        dim,
        k,
        move || radius_rng.random_range(lo..hi),
        seed,
        format!("random disjoint balls dim {dim} k {k} seed {seed}"),
    )
}

fn random_balls(
    dim: usize,
    k: usize,
    mut radius: impl FnMut() -> f64,
    seed: u64,
    label: String,
) -> Result<Scene> {
    if dim == 0 || k == 0 {
        return Err(Error::Precondition("need dim ≥ 1 and k ≥ 1".into()));
    }
    let mut rng = seeded(seed);
    let mut balls: Vec<Ball> = Vec::with_capacity(k);
    let mut rejections = 0;
    while balls.len() < k {
        let r = radius();
        if !(r > 0.0) {
            return Err(Error::Precondition(format!(
                "radius must be positive, got {r}"
            )));
        }
        let c: Vec<f64> = (0..dim)
            .map(|_| rng.random_range(-GENERATOR_BOX..GENERATOR_BOX))
            .collect();
        let cand = Ball::closed(c, r)?;
        if balls
            .iter()
            .all(|b| b.center.distance(&cand.center) >= b.radius + r + SEPARATION_SLACK)
        {
            balls.push(cand);
        } else {
            rejections += 1;
            if rejections >= MAX_REJECTIONS {
                return Err(Error::GenerationFailed { rejections });
            }
        }
    }
    Scene::new(dim, balls, label)
}

/// Uniform point in `[−half_width, half_width]^dim` at least 1e-6 outside
/// every closed ball.
pub fn random_exterior_point(scene: &Scene, half_width: f64, rng: &mut impl Rng) -> VectorN {
    loop {
        let p: Vec<f64> = (0..scene.dim)
            .map(|_| rng.random_range(-half_width..half_width))
            .collect();
        let p = VectorN::new(p).expect("finite");
        if scene
            .balls
            .iter()
            .all(|b| p.distance(&b.center) > b.radius + 1e-6)
        {
            return p;
        }
    }
}

/// Uniform samples on the sphere of ball `ball_index`, keeping only those
/// outside every other closed ball (points of the union's boundary). May
/// return fewer than `count` points.
pub fn boundary_sample(
    scene: &Scene,
    ball_index: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<VectorN>> {
    let ball = scene.balls.get(ball_index).ok_or(Error::BallIndex {
        index: ball_index,
        len: scene.balls.len(),
    })?;
    let mut rng = seeded(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let u = VectorN::new(unit_vector(&mut rng, scene.dim))?;
        let p = ball.center.add(&u.scale(ball.radius));
        let outside = scene
            .balls
            .iter()
            .enumerate()
            .all(|(j, b)| j == ball_index || p.distance(&b.center) > b.radius + DEFAULT_TOL);
        if outside {
            out.push(p);
        }
    }
    Ok(out)
}
