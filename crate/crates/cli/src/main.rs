//! `shadowkit`: command-line front end for the shadow engine.
//!
//! Every command prints one JSON document on stdout and exits with
//! 0 (holds / answered), 1 (falsified), 2 (indeterminate) or 3 (input error).

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use shadow_core::analysis::{self, PropertyReport, ReportStatus};
use shadow_core::constructions::{build_cube14, build_lemma, random_equal_balls};
use shadow_core::shadow::DEFAULT_RESTARTS;
use shadow_core::sphere_cover::{SphereVerdict, DEFAULT_FALSIFIER_GRID};
use shadow_core::{
    find_avoiding_plane, point_shadow, tangent_shadow, PlaneFrame, Scene, ShadowStatus, VectorN,
    DEFAULT_TOL,
};

const THREADS_ENV: &str = "SHADOW_ORACLE_THREADS";

#[derive(Parser)]
#[command(
    name = "shadowkit",
    version,
    about = "Decide whether every line through a point meets a family of balls"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Point-shadow queries.
    #[command(subcommand)]
    Shadow(ShadowCmd),
    /// Search for an m-plane through a point missing every ball.
    #[command(subcommand)]
    Plane(PlaneCmd),
    /// Scene generation.
    #[command(subcommand)]
    Scene(SceneCmd),
    /// Seeded verification batches.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Reproduce a worked configuration.
    #[command(subcommand)]
    Analyze(AnalyzeCmd),
    /// Count components of a planar slice of the complement of the balls.
    Slice(SliceArgs),
}

#[derive(Subcommand)]
enum ShadowCmd {
    /// Does every line through the point meet a ball?
    Check {
        #[arg(long)]
        scene: String,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_point)]
        point: Coords,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Same question restricted to lines tangent to the unit sphere.
    Tangent {
        #[arg(long)]
        scene: String,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_point)]
        point: Coords,
    },
}

#[derive(Subcommand)]
enum PlaneCmd {
    Find {
        #[arg(long)]
        scene: String,
        #[arg(long, allow_hyphen_values = true, value_parser = parse_point)]
        point: Coords,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = DEFAULT_RESTARTS)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum SceneCmd {
    #[command(subcommand)]
    Gen(GenCmd),
}

#[derive(Subcommand)]
enum GenCmd {
    /// Three discs of radius side·√3/4 at the vertices of an equilateral triangle.
    Lemma {
        #[arg(long, default_value_t = 1.0)]
        side: f64,
    },
    /// Balls at the 8 vertices and 6 face centres of the cube inscribed in S².
    Cube14,
    /// Equal disjoint balls placed uniformly in a box.
    Random {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct TrialArgs {
    #[arg(long, default_value_t = 500)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Grid check that the three-disc configuration shadows its hull.
    Lemma {
        #[arg(long, default_value_t = 1.0)]
        side: f64,
        #[arg(long, default_value_t = 0.01)]
        grid_step: f64,
        /// Grid points closer than this to a disc are skipped.
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
    },
    /// Boundary points of three equal open balls are never shadowed.
    Theorem3(TrialArgs),
    /// Exterior points of three equal balls are never shadowed.
    Theorem4(TrialArgs),
    /// Fewer than `dim` balls never shadow an exterior point.
    LowerBound {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        dim: usize,
        #[command(flatten)]
        trials: TrialArgs,
    },
}

#[derive(Subcommand)]
enum AnalyzeCmd {
    Example2 {
        #[arg(long, default_value_t = 20_000)]
        tangent_grid: usize,
        #[arg(long, default_value_t = 1_000_000)]
        area_samples: usize,
        #[arg(long, default_value_t = DEFAULT_FALSIFIER_GRID)]
        falsifier_grid: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write per-point tangent verdicts here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SliceArgs {
    #[arg(long)]
    scene: String,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_point)]
    plane_point: Coords,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_point)]
    plane_normal: Coords,
    #[arg(long)]
    window: f64,
    #[arg(long, default_value_t = 512)]
    resolution: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Status {
    Holds,
    Answered,
    Falsified,
    Indeterminate,
    InputError,
}

impl Status {
    fn exit_code(self) -> u8 {
        match self {
            Status::Holds | Status::Answered => 0,
            Status::Falsified => 1,
            Status::Indeterminate => 2,
            Status::InputError => 3,
        }
    }
}

enum Output {
    Report {
        command: &'static str,
        status: Status,
        result: Value,
    },
    /// Bare scene document, so it can be piped straight back in.
    Scene(Scene),
}

struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, InputError>;

/// Comma-separated coordinates, e.g. `0.5,-1,2`.
#[derive(Debug, Clone)]
struct Coords(Vec<f64>);

fn parse_point(s: &str) -> std::result::Result<Coords, String> {
    s.split(',')
        .map(|t| {
            let v: f64 = t
                .trim()
                .parse()
                .map_err(|_| format!("bad coordinate {t:?}"))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("non-finite coordinate {t:?}"))
            }
        })
        .collect::<std::result::Result<_, _>>()
        .map(Coords)
}

fn read_source(path: &str) -> CliResult<String> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| InputError(format!("stdin: {e}")))?;
        Ok(buf)
    } else {
        std::fs::read_to_string(path).map_err(|e| InputError(format!("{path}: {e}")))
    }
}

fn load_scene(path: &str) -> CliResult<Scene> {
    let text = read_source(path)?;
    let scene: Scene =
        serde_json::from_str(&text).map_err(|e| InputError(format!("{path}: {e}")))?;
    for (i, j) in scene.overlapping_pairs(DEFAULT_TOL) {
        eprintln!("warning: balls {i} and {j} are not disjoint");
    }
    Ok(scene)
}

fn point_for(scene: &Scene, Coords(coords): Coords) -> CliResult<VectorN> {
    if coords.len() != scene.dim {
        return Err(InputError(format!(
            "point has {} coordinates, scene dimension is {}",
            coords.len(),
            scene.dim
        )));
    }
    Ok(VectorN::new(coords)?)
}

fn verdict_status(status: ShadowStatus) -> Status {
    match status {
        ShadowStatus::Shadowed | ShadowStatus::NotShadowed => Status::Answered,
        ShadowStatus::Indeterminate | ShadowStatus::PossiblyShadowed => Status::Indeterminate,
    }
}

fn report_status(report: &PropertyReport) -> Status {
    match report.status {
        ReportStatus::Pass => Status::Holds,
        ReportStatus::Fail => Status::Falsified,
        ReportStatus::IndeterminateOnly => Status::Indeterminate,
    }
}

fn to_value<T: Serialize>(v: &T) -> CliResult<Value> {
    Ok(serde_json::to_value(v)?)
}

fn property(command: &'static str, report: PropertyReport) -> CliResult<Output> {
    Ok(Output::Report {
        command,
        status: report_status(&report),
        result: to_value(&report)?,
    })
}

fn run(cli: Cli) -> CliResult<Output> {
    match cli.command {
        Command::Shadow(ShadowCmd::Check { scene, point, tol }) => {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(InputError(format!("tolerance must be positive, got {tol}")));
            }
            let scene = load_scene(&scene)?;
            let x = point_for(&scene, point)?;
            let verdict = point_shadow(&scene, &x, tol)?;
            Ok(Output::Report {
                command: "shadow check",
                status: verdict_status(verdict.status),
                result: to_value(&verdict)?,
            })
        }
        Command::Shadow(ShadowCmd::Tangent { scene, point }) => {
            let scene = load_scene(&scene)?;
            let x = point_for(&scene, point)?;
            let x = x
                .normalized()
                .ok_or_else(|| InputError("point must be nonzero".into()))?;
            let verdict = tangent_shadow(&scene, &x, DEFAULT_TOL)?;
            let mut result = to_value(&verdict)?;
            result["point"] = to_value(&x)?;
            Ok(Output::Report {
                command: "shadow tangent",
                status: verdict_status(verdict.status),
                result,
            })
        }
        Command::Plane(PlaneCmd::Find {
            scene,
            point,
            m,
            restarts,
            seed,
        }) => {
            let scene = load_scene(&scene)?;
            let x = point_for(&scene, point)?;
            if restarts == 0 {
                return Err(InputError("restarts must be positive".into()));
            }
            let found = find_avoiding_plane(&scene, &x, m, restarts, seed)?;
            let (status, result) = match found {
                Some(frame) => {
                    let clearance = frame.clearance(&scene);
                    (
                        Status::Answered,
                        json!({ "found": true, "plane": to_value(&frame)?, "clearance": clearance }),
                    )
                }
                None => (
                    Status::Indeterminate,
                    json!({ "found": false, "plane": null, "clearance": null }),
                ),
            };
            Ok(Output::Report {
                command: "plane find",
                status,
                result,
            })
        }
        Command::Scene(SceneCmd::Gen(g)) => Ok(Output::Scene(match g {
            GenCmd::Lemma { side } => build_lemma(side)?.scene,
            GenCmd::Cube14 => build_cube14()?.scene,
            GenCmd::Random {
                dim,
                k,
                radius,
                seed,
            } => random_equal_balls(dim, k, radius, seed)?,
        })),
        Command::Verify(v) => match v {
            VerifyCmd::Lemma {
                side,
                grid_step,
                eps,
            } => property(
                "verify lemma",
                analysis::verify_lemma(side, grid_step, eps)?,
            ),
            VerifyCmd::Theorem3(t) => property(
                "verify theorem3",
                analysis::check_theorem3(t.trials, t.seed)?,
            ),
            VerifyCmd::Theorem4(t) => property(
                "verify theorem4",
                analysis::check_theorem4(t.trials, t.seed)?,
            ),
            VerifyCmd::LowerBound { k, dim, trials } => property(
                "verify lower-bound",
                analysis::check_lower_bound(k, dim, trials.trials, trials.seed)?,
            ),
        },
        Command::Analyze(AnalyzeCmd::Example2 {
            tangent_grid,
            area_samples,
            falsifier_grid,
            seed,
            csv,
        }) => {
            let report =
                analysis::analyze_example2(tangent_grid, area_samples, falsifier_grid, seed)?;
            if let Some(path) = csv {
                std::fs::write(&path, report.tangent_csv())
                    .map_err(|e| InputError(format!("{}: {e}", path.display())))?;
            }
            let status = match report.sphere_coverage.verdict {
                SphereVerdict::Indeterminate => Status::Indeterminate,
                _ => Status::Answered,
            };
            Ok(Output::Report {
                command: "analyze example2",
                status,
                result: to_value(&report)?,
            })
        }
        Command::Slice(a) => {
            let scene = load_scene(&a.scene)?;
            let base = point_for(&scene, a.plane_point)?;
            let normal = point_for(&scene, a.plane_normal)?;
            let frame = PlaneFrame::from_normal(base, &normal)?;
            let components = analysis::slice_connectivity(&scene, &frame, a.window, a.resolution)?;
            let result = json!({ "components": components, "plane": to_value(&frame)?, "window": a.window, "resolution": a.resolution });
            Ok(Output::Report {
                command: "slice",
                status: Status::Answered,
                result,
            })
        }
    }
}

fn emit(value: &impl Serialize) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("payload serializes")
    );
}

fn input_error(message: &str) -> ExitCode {
    let line = message.lines().next().unwrap_or("invalid input");
    eprintln!("error: {}", line.trim_start_matches("error: "));
    emit(&json!({ "status": Status::InputError, "error": line.trim_start_matches("error: ") }));
    ExitCode::from(Status::InputError.exit_code())
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        InputError(format!(
            "{THREADS_ENV} must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    ExitCode::SUCCESS
                }
                _ => input_error(&e.to_string()),
            };
        }
    };
    if let Err(InputError(msg)) = configure_threads() {
        return input_error(&msg);
    }
    match run(cli) {
        Ok(Output::Scene(scene)) => {
            emit(&scene);
            ExitCode::SUCCESS
        }
        Ok(Output::Report {
            command,
            status,
            result,
        }) => {
            emit(&json!({ "command": command, "status": status, "result": result }));
            ExitCode::from(status.exit_code())
        }
        Err(InputError(msg)) => input_error(&msg),
    }
}
