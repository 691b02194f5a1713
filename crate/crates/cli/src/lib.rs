//! Headless entry points: single shots, transitions, the tracker-noise
//! experiment, trajectory validation and the hover experiment.

pub mod error;
pub mod manifest;

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use cinequad_core::dynamics;
use cinequad_core::par::Exec;
use cinequad_core::scene::{project, SubjectState};
use cinequad_core::shotgen::FramingTarget;
use cinequad_core::simkit::experiment::{run_fig9_experiment, run_hover_experiment, Fig9Config};
use cinequad_core::simkit::{TrackerKind, TrackerModel};
use cinequad_core::transition::blend::DISTANCE_TOLERANCE;
use cinequad_core::transition::{check_continuity, plan_transition_poses, Trajectory};
use cinequad_core::{place_shot, CameraPose, EngineConfig, Scene, ScreenPoint, ShotSpec, ShotType, SubjectId, Vec3};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult, EXIT_INPUT, EXIT_OK};
use crate::manifest::{Manifest, Outputs};

pub const ENV_SEED: &str = "SIM_SEED";

#[derive(Debug, Parser)]
#[command(name = "cinequad", version, about = "Plan two-subject camera shots and safe quadrotor transitions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scene JSON file.
    #[arg(long)]
    pub scene: Option<PathBuf>,
    /// Planner configuration JSON file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory for output files and the run manifest.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Place one static shot.
    Shot {
        #[command(flatten)]
        common: Common,
        /// Shot spec: JSON file, inline JSON, or `type[:A|B]`.
        #[arg(long)]
        shot: String,
    },
    /// Plan a transition between two shots or poses.
    Transition {
        #[command(flatten)]
        common: Common,
        /// Start: shot spec or camera pose (JSON file, inline JSON, or `type[:A|B]`).
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
    },
    /// Plan shots from tracker estimates and score them against the truth.
    Fig9 {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_tracker)]
        tracker: TrackerKind,
        /// Falls back to SIM_SEED, then 0.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check a trajectory file against the dynamic limits and the scene.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Trajectory as CSV or JSON.
        #[arg(long)]
        trajectory: PathBuf,
    },
    /// Hold a hover point with tracker noise in the feedback loop.
    Hover {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_tracker)]
        tracker: TrackerKind,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn parse_tracker(s: &str) -> Result<TrackerKind, String> {
    s.parse().map_err(|e: cinequad_core::Error| e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HoverConfig {
    pub duration: f64,
    pub dt: f64,
}

impl Default for HoverConfig {
    fn default() -> Self {
        HoverConfig { duration: 300.0, dt: 0.02 }
    }
}

/// Contents of `--config`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    pub engine: EngineConfig,
    pub fig9: Fig9Config,
    pub hover: HoverConfig,
}

impl CliConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        let cfg: CliConfig = serde_json::from_str(text).map_err(|e| CliError::Input(format!("config schema: {e}")))?;
        cfg.engine.limits().validate()?;
        Ok(cfg)
    }

    /// Same settings with every default spelled out.
    pub fn resolved(&self) -> CliConfig {
        CliConfig {
            engine: EngineConfig {
                limits: Some(self.engine.limits()),
                transition: self.engine.transition_config(),
                ..self.engine.clone()
            },
            ..self.clone()
        }
    }
}

pub enum Endpoint {
    Shot(ShotSpec),
    Pose(CameraPose),
}

fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Inline JSON, a file, or the `type[:A|B]` shorthand. Returns the text
/// and the file it came from.
fn resolve_arg(value: &str) -> CliResult<(String, Option<PathBuf>)> {
    let trimmed = value.trim();
    if trimmed.starts_with('{') {
        return Ok((trimmed.to_string(), None));
    }
    let path = Path::new(trimmed);
    if path.is_file() {
        return Ok((read_file(path)?, Some(path.to_path_buf())));
    }
    let (name, subject) = match trimmed.split_once(':') {
        Some((n, s)) => (n, Some(s)),
        None => (trimmed, None),
    };
    let shot_type: ShotType = serde_json::from_value(Value::String(name.to_string()))
        .map_err(|_| CliError::Input(format!("`{value}` is neither a file, JSON, nor a shot type")))?;
    let subject = match subject {
        None | Some("A") | Some("a") => SubjectId::A,
        Some("B") | Some("b") => SubjectId::B,
        Some(other) => return Err(CliError::Input(format!("unknown subject `{other}` (expected A or B)"))),
    };
    let spec = ShotSpec::new(shot_type, subject);
    Ok((serde_json::to_string(&spec).expect("spec serializes"), None))
}

fn parse_endpoint(text: &str) -> CliResult<Endpoint> {
    let value: Value = serde_json::from_str(text).map_err(|e| CliError::Input(format!("endpoint: {e}")))?;
    if value.get("look_from").is_some() {
        let pose: CameraPose = serde_json::from_value(value).map_err(|e| CliError::Input(format!("pose schema: {e}")))?;
        Ok(Endpoint::Pose(CameraPose::new(pose.look_from, pose.look_at, pose.fov)?))
    } else {
        Ok(Endpoint::Shot(ShotSpec::from_json(text)?))
    }
}

struct Context {
    manifest: Manifest,
    outputs: Outputs,
    config: CliConfig,
}

impl Context {
    fn new(command: &str, common: &Common) -> CliResult<Context> {
        let mut manifest = Manifest::start(command);
        let config = match &common.config {
            Some(p) => {
                let text = read_file(p)?;
                manifest.add_input("config", p, &text);
                CliConfig::from_json(&text)?
            }
            None => CliConfig::default(),
        };
        Ok(Context {
            manifest,
            outputs: Outputs::new(common.out_dir.clone())?,
            config,
        })
    }

    fn scene(&mut self, common: &Common) -> CliResult<Scene> {
        let path = common.scene.as_ref().ok_or_else(|| CliError::Input("--scene is required".into()))?;
        let text = read_file(path)?;
        self.manifest.add_input("scene", path, &text);
        let mut scene = Scene::from_json(&text)?;
        // every shot of a run stays on the same side of the line of action
        scene.line_of_action();
        Ok(scene)
    }

    fn endpoint(&mut self, name: &str, value: &str) -> CliResult<Endpoint> {
        let (text, path) = resolve_arg(value)?;
        match path {
            Some(p) => self.manifest.add_input(name, &p, &text),
            None => self.manifest.add_inline_input(name, &text),
        }
        parse_endpoint(&text)
    }

    fn finish(mut self, params: Value, stdout: &Value) -> CliResult<()> {
        self.manifest.set_config(&self.config.resolved(), params);
        self.outputs.finish(self.manifest)?;
        // a closed pipe on stdout is not an error of the run
        let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(stdout).expect("json"));
        Ok(())
    }
}

fn seed_or_env(seed: Option<u64>) -> CliResult<u64> {
    match seed {
        Some(s) => Ok(s),
        None => match std::env::var(ENV_SEED) {
            Ok(v) => v.trim().parse().map_err(|_| CliError::Input(format!("{ENV_SEED}: cannot parse `{v}`"))),
            Err(_) => Ok(0),
        },
    }
}

fn place(scene: &Scene, endpoint: Endpoint, cfg: &EngineConfig) -> CliResult<CameraPose> {
    match endpoint {
        Endpoint::Pose(p) => Ok(p),
        Endpoint::Shot(spec) => Ok(place_shot(scene, &spec, &cfg.shot)?.pose),
    }
}

fn target_point(scene: &Scene, target: FramingTarget) -> Vec3 {
    let [a, b] = &scene.subjects;
    match target {
        FramingTarget::A => a.position,
        FramingTarget::B => b.position,
        FramingTarget::Midpoint => (a.position + b.position) / 2.0,
    }
}

fn cmd_shot(common: &Common, shot: &str) -> CliResult<()> {
    let mut ctx = Context::new("shot", common)?;
    let scene = ctx.scene(common)?;
    let spec = match ctx.endpoint("shot", shot)? {
        Endpoint::Shot(s) => s,
        Endpoint::Pose(_) => return Err(CliError::Input("--shot takes a shot spec, not a pose".into())),
    };
    let framed = place_shot(&scene, &spec, &ctx.config.engine.shot)?;
    let aspect = scene.aspect_ratio;
    let points: Vec<Value> = framed
        .target_screen_points
        .iter()
        .map(|tp| {
            let actual: Option<ScreenPoint> = project(&framed.pose, &target_point(&scene, tp.target), aspect).ok();
            json!({
                "target": tp.target,
                "declared": tp.screen,
                "actual": actual,
                "error_widths": actual.map(|a| a.distance_in_widths(&tp.screen, aspect)),
            })
        })
        .collect();
    let report = json!({
        "shot": framed,
        "pushed_out": framed.pushed_out(),
        "fov_ratio": framed.fov_ratio(scene.fov_max),
        "screen_points": points,
        "clearance": scene.clearance(&framed.pose.look_from),
    });
    ctx.outputs.write("shot.json", &pretty(&report))?;
    ctx.finish(json!({}), &report)
}

fn cmd_transition(common: &Common, from: &str, to: &str) -> CliResult<()> {
    let mut ctx = Context::new("transition", common)?;
    let scene = ctx.scene(common)?;
    let from = ctx.endpoint("from", from)?;
    let to = ctx.endpoint("to", to)?;
    let engine = ctx.config.engine.clone();
    let from = place(&scene, from, &engine)?;
    let to = place(&scene, to, &engine)?;
    let planned = plan_transition_poses(&from, &to, &scene, &engine.transition_config())?;
    let dump = planned.plan.summary();
    let traj = &planned.trajectory;
    let min_clearance = traj.samples.iter().map(|s| scene.clearance(&s.look_from)).fold(f64::INFINITY, f64::min);
    let continuity = check_continuity(&planned, 20);
    let feasibility = json!({
        "feasible": planned.feasibility.feasible,
        "violations": planned.feasibility.violations,
        "peaks": planned.feasibility.peaks,
        "stretch_factor": planned.stretch_factor,
        "nominal_duration": planned.nominal_duration,
        "duration": planned.duration(),
        "dense_clearance": planned.dense_clearance,
        "min_clearance": min_clearance,
        "refinements": planned.refinements,
        "continuity": continuity,
    });
    ctx.outputs.write("trajectory.csv", &traj.to_csv())?;
    ctx.outputs.write("trajectory.json", &traj.to_json())?;
    ctx.outputs.write("blend.json", &pretty(&serde_json::to_value(&dump).expect("json")))?;
    ctx.outputs.write("blend.csv", &blend_csv(&dump))?;
    ctx.outputs.write("feasibility.json", &pretty(&feasibility))?;
    ctx.manifest.solve_time_ms = Some(dump.solve_time_ms);
    let summary = json!({
        "duration": planned.duration(),
        "nominal_duration": planned.nominal_duration,
        "stretch_factor": planned.stretch_factor,
        "samples": traj.samples.len(),
        "solve_time_ms": dump.solve_time_ms,
        "converged": dump.converged,
        "objective_value": dump.objective_value,
        "feasible": planned.feasibility.feasible,
        "dense_clearance": planned.dense_clearance,
        "min_clearance": min_clearance,
        "continuous": continuity.continuous,
    });
    ctx.finish(json!({}), &summary)
}

/// One row per blend sample: the state and the distances to both subjects.
pub fn blend_csv(dump: &cinequad_core::transition::plan::BlendDump) -> String {
    let mut out = String::from("k,u,w,dw,d2w,d3w,d4w,dist_a,dist_b\n");
    for (k, (w, d)) in dump.w.iter().zip(&dump.distances).enumerate() {
        let u = k as f64 / dump.n as f64;
        out.push_str(&format!("{k},{u},{},{},{},{},{},{},{}\n", w[0], w[1], w[2], w[3], w[4], d[0], d[1]));
    }
    out
}

fn cmd_fig9(common: &Common, tracker: TrackerKind, seed: Option<u64>) -> CliResult<()> {
    let mut ctx = Context::new("fig9", common)?;
    let scene = ctx.scene(common)?;
    let seed = seed_or_env(seed)?;
    ctx.manifest.seed = Some(seed);
    let model = TrackerModel::of_kind(tracker);
    let result = run_fig9_experiment(&scene, &model, &ctx.config.fig9, seed, Exec::default())?;
    ctx.outputs.write("fig9.csv", &result.to_csv())?;
    let summary = serde_json::to_value(&result.summary).expect("json");
    ctx.outputs.write("fig9_summary.json", &pretty(&summary))?;
    ctx.finish(json!({ "tracker": model }), &summary)
}

fn cmd_validate(common: &Common, trajectory: &Path) -> CliResult<()> {
    let mut ctx = Context::new("validate", common)?;
    let scene = match &common.scene {
        Some(_) => Some(ctx.scene(common)?),
        None => None,
    };
    let text = read_file(trajectory)?;
    ctx.manifest.add_input("trajectory", trajectory, &text);
    let traj = if trajectory.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        Trajectory::from_csv(&text)?
    } else {
        Trajectory::from_json(&text)?
    };
    let limits = ctx.config.engine.limits();
    let report = dynamics::check(&traj, &limits)?;
    let min_clearance = scene
        .as_ref()
        .map(|s| traj.samples.iter().map(|p| s.clearance(&p.look_from)).fold(f64::INFINITY, f64::min));
    let safe = min_clearance.is_none_or(|c| c >= -DISTANCE_TOLERANCE);
    let out = json!({
        "feasible": report.feasible,
        "safe": safe,
        "violations": report.violations,
        "peaks": report.peaks,
        "duration": traj.duration,
        "samples": traj.samples.len(),
        "min_clearance": min_clearance,
    });
    ctx.outputs.write("validation.json", &pretty(&out))?;
    let ok = report.feasible && safe;
    ctx.finish(json!({}), &out)?;
    if ok {
        Ok(())
    } else {
        Err(CliError::Rejected(if safe {
            format!("trajectory violates dynamic limits at {} samples", report.violations.len())
        } else {
            format!("trajectory enters a safety sphere (clearance {:.4} m)", min_clearance.unwrap_or(0.0))
        }))
    }
}

fn default_subjects() -> [SubjectState; 2] {
    [
        SubjectState::new(Vec3::new(0.0, 0.0, 1.7), Vec3::new(1.0, 0.0, 0.0), 1.8, 1.0).expect("valid subject"),
        SubjectState::new(Vec3::new(4.0, 0.0, 1.7), Vec3::new(-1.0, 0.0, 0.0), 1.8, 1.0).expect("valid subject"),
    ]
}

fn cmd_hover(common: &Common, tracker: TrackerKind, seed: Option<u64>) -> CliResult<()> {
    let mut ctx = Context::new("hover", common)?;
    let subjects = match &common.scene {
        Some(_) => ctx.scene(common)?.subjects,
        None => default_subjects(),
    };
    let seed = seed_or_env(seed)?;
    ctx.manifest.seed = Some(seed);
    let model = TrackerModel::of_kind(tracker);
    let hover = &ctx.config.hover;
    if !(hover.dt > 0.0 && hover.dt <= 0.1 && hover.duration > 0.0) {
        return Err(CliError::Input("hover needs 0 < dt ≤ 0.1 and a positive duration".into()));
    }
    let r = run_hover_experiment(&model, hover.duration, hover.dt, seed, &ctx.config.engine.limits(), &ctx.config.engine.follower, subjects);
    let out = json!({ "tracker": model, "seed": seed, "result": r });
    ctx.outputs.write("hover.json", &pretty(&out))?;
    ctx.finish(json!({ "tracker": model }), &out)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Shot { common, shot } => cmd_shot(common, shot),
        Command::Transition { common, from, to } => cmd_transition(common, from, to),
        Command::Fig9 { common, tracker, seed } => cmd_fig9(common, *tracker, *seed),
        Command::Validate { common, trajectory } => cmd_validate(common, trajectory),
        Command::Hover { common, tracker, seed } => cmd_hover(common, *tracker, *seed),
    }
}

/// Parse arguments, run, and return the process exit code. Errors go to
/// stderr as one JSON object.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            let err = CliError::Input(e.render().to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return EXIT_INPUT;
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}
