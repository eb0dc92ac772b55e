//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};
use serde_json::Value;

use shadow_core::analysis::{
    analyze_example2, check_lower_bound, check_theorem3, check_theorem4, cube14_caps,
    PropertyReport, ReportStatus,
};
use shadow_core::constructions::{build_cube14, tangency_summary, CUBE14_VERTEX_BALLS, EXACT_TOL};
use shadow_core::sphere_cover::{arrangement, falsify, DEFAULT_FALSIFIER_GRID};
use shadow_core::{
    cover_circle, cover_sphere, margin, tangent_shadow, witness_clearance, Arc, ArcSet, Cap,
    CapSet, CircleVerdict, Period, SphereVerdict, VectorN, DEFAULT_TOL,
};

const WITNESS_MARGIN: f64 = 1e-9;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

type Criterion = (&'static str, fn() -> Outcome);

struct CliRun {
    code: i32,
    stdout: Vec<u8>,
    elapsed: Duration,
}

fn shadowkit(args: &[&str], threads: Option<&str>) -> CliRun {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_shadowkit"));
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("SHADOW_ORACLE_THREADS", t);
    }
    let start = Instant::now();
    let out = cmd.output().expect("binary runs");
    CliRun {
        code: out.status.code().unwrap_or(-1),
        stdout: out.stdout,
        elapsed: start.elapsed(),
    }
}

fn cube14_constants() -> Outcome {
    let start = Instant::now();
    let cfg = build_cube14().expect("cube14 builds");
    let r = 1.0 / 3f64.sqrt();
    let r1 = (2.0 - 2.0 / 3f64.sqrt()).sqrt() - 1.0 / 3f64.sqrt();
    let t = tangency_summary(&cfg.scene, CUBE14_VERTEX_BALLS, EXACT_TOL).expect("summary");
    let elapsed = start.elapsed();
    let dr = (cfg.vertex_radius - r).abs();
    let dr1 = (cfg.face_radius - r1).abs();
    let pass = dr <= 1e-12
        && dr1 <= 1e-12
        && t.vertex_vertex_tangent == 12
        && t.vertex_face_tangent == 24
        && t.overlapping == 0
        && elapsed < Duration::from_secs(1);
    outcome(
        pass,
        format!(
            "r={:.15} (err {dr:.1e}), r1={:.15} (err {dr1:.1e}), vv={}, vf={}, overlaps={}, {:.3}s",
            cfg.vertex_radius,
            cfg.face_radius,
            t.vertex_vertex_tangent,
            t.vertex_face_tangent,
            t.overlapping,
            elapsed.as_secs_f64()
        ),
    )
}

fn lemma_grid() -> Outcome {
    let run = shadowkit(
        &["verify", "lemma", "--side", "1", "--grid-step", "0.01"],
        Some("1"),
    );
    let v: Value = serde_json::from_slice(&run.stdout).expect("json payload");
    let r = &v["result"];
    let failures = r["failures"].as_array().map_or(usize::MAX, Vec::len);
    let rho = r["summary"]["disc_radius"].as_f64().unwrap_or(0.0);
    let circ = r["summary"]["circumcircle_max_triangle_distance"]
        .as_f64()
        .unwrap_or(f64::INFINITY);
    let pass = run.code == 0
        && v["status"] == "holds"
        && failures == 0
        && r["indeterminates"] == 0
        && circ <= rho
        && run.elapsed < Duration::from_secs(30);
    outcome(
        pass,
        format!(
            "exit {}, {} grid points shadowed, {failures} failures, circumcircle distance {circ:.6} <= rho {rho:.6}, {:.2}s on 1 thread",
            run.code,
            r["summary"]["grid_points"],
            run.elapsed.as_secs_f64()
        ),
    )
}

fn suite_ok(r: &PropertyReport, trials: usize) -> bool {
    r.status == ReportStatus::Pass
        && r.trials == trials
        && r.passes == trials
        && r.failures.is_empty()
        && r.min_witness_clearance.is_some_and(|c| c > WITNESS_MARGIN)
}

fn suites() -> Outcome {
    const TRIALS: usize = 500;
    let start = Instant::now();
    let reports = [
        check_theorem4(TRIALS, 20_240_101).expect("theorem4 runs"),
        check_theorem3(TRIALS, 20_240_102).expect("theorem3 runs"),
        check_lower_bound(2, 3, TRIALS, 20_240_103).expect("lower bound runs"),
        check_lower_bound(3, 4, TRIALS, 20_240_104).expect("lower bound runs"),
    ];
    let elapsed = start.elapsed();
    let pass = reports.iter().all(|r| suite_ok(r, TRIALS)) && elapsed < Duration::from_secs(120);
    let parts: Vec<String> = reports
        .iter()
        .map(|r| {
            format!(
                "{}{}: {}/{} pass, {} fail, min clearance {:.3e}",
                r.name,
                r.summary
                    .get("dim")
                    .map_or(String::new(), |d| format!("(k={},n={})", r.summary["k"], d)),
                r.passes,
                r.trials,
                r.failures.len(),
                r.min_witness_clearance.unwrap_or(f64::NAN)
            )
        })
        .collect();
    outcome(
        pass,
        format!("{}; {:.2}s", parts.join("; "), elapsed.as_secs_f64()),
    )
}

fn random_arcset(rng: &mut ChaCha8Rng) -> ArcSet {
    let period = if rng.random_bool(0.5) {
        Period::Pi
    } else {
        Period::TwoPi
    };
    let p = period.length();
    let n = rng.random_range(1..=12);
    let arcs = (0..n)
        .map(|_| {
            Arc::new(
                rng.random_range(0.0..p),
                rng.random_range(0.0..p / 3.0),
                period,
            )
        })
        .collect();
    ArcSet::new(period, arcs).expect("single period")
}

fn oracle_equivalence() -> Outcome {
    const SETS: usize = 1000;
    const SAMPLES: usize = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let mut circle_disagreements = 0;
    let mut uncovered_sets = 0;
    for _ in 0..SETS {
        let set = random_arcset(&mut rng);
        let p = set.period().length();
        let phase = rng.random_range(0.0..p / SAMPLES as f64);
        let oracle_miss =
            (0..SAMPLES).any(|k| !set.contains(phase + k as f64 * p / SAMPLES as f64));
        let cov = cover_circle(&set, DEFAULT_TOL);
        // Gaps narrower than the sample spacing are inside the tolerance band.
        let band = 2.0 * p / SAMPLES as f64 + DEFAULT_TOL;
        let engine_miss = cov.verdict == CircleVerdict::Uncovered;
        uncovered_sets += usize::from(engine_miss);
        let witness_ok = cov.witness.is_none_or(|w| !engine_miss || !set.contains(w));
        if (engine_miss != oracle_miss && cov.largest_gap > band) || !witness_ok {
            circle_disagreements += 1;
        }
    }

    let mut contradictions = 0;
    let mut indeterminate = 0;
    let mut covered = 0;
    for _ in 0..SETS {
        let n = rng.random_range(3..=20);
        let caps = CapSet::new((0..n).map(|_| {
            let a: [f64; 3] = UnitSphere.sample(&mut rng);
            Cap::closed(nalgebra::Vector3::from(a), rng.random_range(0.1..1.5)).expect("valid cap")
        }));
        let stage2 = falsify(&caps, DEFAULT_FALSIFIER_GRID);
        let stage3 = arrangement(&caps, DEFAULT_TOL);
        match stage3.verdict {
            SphereVerdict::Indeterminate => indeterminate += 1,
            SphereVerdict::Covered => {
                covered += 1;
                if stage2.margin > DEFAULT_TOL {
                    contradictions += 1;
                }
            }
            SphereVerdict::Uncovered => {
                if stage3
                    .witness
                    .is_none_or(|w| margin(&w, &caps) <= DEFAULT_TOL)
                {
                    contradictions += 1;
                }
            }
        }
    }
    let rate = indeterminate as f64 / SETS as f64;
    let pass = circle_disagreements == 0 && contradictions == 0 && rate < 0.01;
    outcome(
        pass,
        format!(
            "circle: {circle_disagreements} disagreements over {SETS} sets ({uncovered_sets} uncovered); sphere: {contradictions} contradictions, {covered} covered, indeterminate rate {:.1}%",
            rate * 100.0
        ),
    )
}

fn example2() -> Outcome {
    let start = Instant::now();
    let report =
        analyze_example2(20_000, 1_000_000, DEFAULT_FALSIFIER_GRID, 7).expect("analysis runs");
    let cfg = build_cube14().expect("cube14");
    let scene = &cfg.scene;

    // Tangent-shadow failures, re-checked against the balls directly.
    let mut certified = 0;
    let mut bogus = 0;
    for p in &report.failure_points {
        let x = VectorN::new(p.to_vec()).expect("finite");
        let v = tangent_shadow(scene, &x, DEFAULT_TOL).expect("tangent shadow");
        let Some(line) = v.witness else {
            bogus += 1;
            continue;
        };
        let tangent = line.direction.dot(&x).abs() < 1e-12;
        let clearance = witness_clearance(scene, &line, DEFAULT_TOL);
        if tangent && clearance > WITNESS_MARGIN {
            certified += 1;
        } else if !tangent || clearance < -WITNESS_MARGIN {
            bogus += 1;
        }
    }

    // Sphere coverage: witness must lie outside every closed ball.
    let sc = &report.sphere_coverage;
    let certificate = match (sc.verdict, sc.witness) {
        (SphereVerdict::Uncovered, Some(w)) => {
            let w = VectorN::from(w);
            let gap = scene
                .balls
                .iter()
                .map(|b| w.distance(&b.center) - b.radius)
                .fold(f64::INFINITY, f64::min);
            gap > WITNESS_MARGIN && (w.norm() - 1.0).abs() < 1e-12
        }
        (SphereVerdict::Covered, None) => sc.boundary_report.iter().all(|b| b.uncovered.is_empty()),
        _ => false,
    };
    let caps = cube14_caps(&cfg).expect("caps");
    let doubled = cover_sphere(&caps, DEFAULT_TOL, 2 * DEFAULT_FALSIFIER_GRID);
    let redo =
        analyze_example2(20_000, 1_000_000, 2 * DEFAULT_FALSIFIER_GRID, 7).expect("analysis runs");

    // Independent area oracle: 10⁶ uniform points tested against the balls.
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    const SAMPLES: usize = 1_000_000;
    let outside = (0..SAMPLES)
        .filter(|_| {
            let p: [f64; 3] = UnitSphere.sample(&mut rng);
            scene.balls.iter().all(|b| {
                let c = b.center.coords();
                (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2) + (p[2] - c[2]).powi(2)
                    > b.radius * b.radius
            })
        })
        .count();
    let oracle_area = 4.0 * PI * outside as f64 / SAMPLES as f64;
    let oracle_agrees = (sc.verdict == SphereVerdict::Uncovered) == (outside > 0)
        && (oracle_area - report.uncovered_area).abs()
            < 5.0 * report.uncovered_area_stderr.max(1e-3);
    let elapsed = start.elapsed();

    let pass = certified >= 1
        && bogus == 0
        && certificate
        && doubled.verdict == sc.verdict
        && redo.sphere_coverage.verdict == sc.verdict
        && oracle_agrees
        && elapsed < Duration::from_secs(120);
    outcome(
        pass,
        format!(
            "{} tangent-shadow failures ({certified} certified, {bogus} invalid) among {} uncovered grid points; sphere {:?} (certificate {}), \
             grid x2 {:?}, uncovered area {:.4} vs oracle {:.4} sr; {:.2}s",
            report.failure_points.len(),
            report.tangent_points_evaluated,
            sc.verdict,
            if certificate { "ok" } else { "INVALID" },
            doubled.verdict,
            report.uncovered_area,
            oracle_area,
            elapsed.as_secs_f64()
        ),
    )
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("shadowkit-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let csv_a = dir.join("a.csv");
    let csv_b = dir.join("b.csv");
    let commands: Vec<Vec<String>> = [
        "scene gen random --dim 3 --k 5 --radius 0.7 --seed 11",
        "verify theorem4 --trials 60 --seed 5",
        "verify theorem3 --trials 30 --seed 5",
        "verify lower-bound --k 3 --dim 5 --trials 30 --seed 5",
        "analyze example2 --tangent-grid 4000 --area-samples 100000 --seed 3",
    ]
    .iter()
    .map(|c| c.split(' ').map(String::from).collect())
    .collect();
    let mut mismatches = Vec::new();
    for cmd in &commands {
        let args: Vec<&str> = cmd.iter().map(String::as_str).collect();
        let a = shadowkit(&args, Some("1"));
        let b = shadowkit(&args, None);
        let c = shadowkit(&args, Some("3"));
        if a.code != 0 || a.stdout != b.stdout || a.stdout != c.stdout || a.code != b.code {
            mismatches.push(args.join(" "));
        }
    }
    let a = shadowkit(
        &[
            "analyze",
            "example2",
            "--tangent-grid",
            "4000",
            "--area-samples",
            "1000",
            "--csv",
            csv_a.to_str().unwrap(),
        ],
        Some("1"),
    );
    let b = shadowkit(
        &[
            "analyze",
            "example2",
            "--tangent-grid",
            "4000",
            "--area-samples",
            "1000",
            "--csv",
            csv_b.to_str().unwrap(),
        ],
        None,
    );
    let csv_same =
        a.code == 0 && b.code == 0 && std::fs::read(&csv_a).ok() == std::fs::read(&csv_b).ok();
    let _ = std::fs::remove_dir_all(&dir);
    if !csv_same {
        mismatches.push("analyze example2 --csv".into());
    }
    let pass = mismatches.is_empty();
    outcome(
        pass,
        format!(
            "{} commands re-run at 1, default and 3 threads; mismatches: {:?}",
            commands.len() + 1,
            mismatches
        ),
    )
}

fn main() {
    // libtest-style flags (e.g. from `cargo test -- --nocapture`) are ignored.
    let criteria: [Criterion; 6] = [
        ("cube14 constants and tangencies", cube14_constants),
        ("three-disc grid check", lemma_grid),
        ("seeded verification suites", suites),
        ("oracle equivalence", oracle_equivalence),
        ("cube14 tangent-shadow failure", example2),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        failed += usize::from(!o.pass);
        println!(
            "acceptance {} {:<32} {}  {}",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
