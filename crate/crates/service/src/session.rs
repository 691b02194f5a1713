//! One directing session: a simulated quadrotor holding a shot until the next
//! command, then flying the planned transition.

use cinequad_core::scene::{project, SceneFile};
use cinequad_core::simkit::follower::{self, Setpoint, SimState};
use cinequad_core::simkit::Tracker;
use cinequad_core::transition::{plan_transition_poses, PlannedTransition, Trajectory};
use cinequad_core::{place_shot, CameraPose, FramedShot, Scene, ShotSpec, Side, Vec3};
use serde::{Deserialize, Serialize};

use crate::config::SessionConfig;
use crate::error::SessionError;
use crate::telemetry::{PathPreview, SubjectTelemetry, Telemetry, TransitionProgress};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionState {
    Idle,
    Transitioning,
}

/// Reply to an accepted shot command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionSummary {
    pub transition: u64,
    pub duration: f64,
    pub nominal_duration: f64,
    pub stretch_factor: f64,
    pub crop_warning: bool,
    pub solve_time_ms: f64,
    pub converged: bool,
    pub shot: FramedShot,
}

/// Everything a planner run needs, detached from the session so planning can
/// happen without holding it.
#[derive(Debug, Clone)]
pub struct PlanJob {
    pub scene: Scene,
    pub from: CameraPose,
    pub spec: ShotSpec,
    pub config: SessionConfig,
}

pub type PlanOutcome = cinequad_core::Result<(FramedShot, PlannedTransition)>;

impl PlanJob {
    pub fn run(&self) -> PlanOutcome {
        let engine = &self.config.engine;
        let shot = place_shot(&self.scene, &self.spec, &engine.shot)?;
        let planned = plan_transition_poses(&self.from, &shot.pose, &self.scene, &engine.transition_config())?;
        Ok((shot, planned))
    }
}

#[derive(Debug, Clone)]
struct Active {
    index: u64,
    start_time: f64,
    target: FramedShot,
    planned: PlannedTransition,
    announced: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSnapshot {
    pub id: String,
    pub state: SessionState,
    pub line_of_action_side: Side,
    pub scene: SceneFile,
    pub current_shot: FramedShot,
    pub transitions_started: u64,
    pub latest: Option<Telemetry>,
}

#[derive(Debug, Clone)]
pub struct Session {
    id: String,
    scene: Scene,
    config: SessionConfig,
    sim: SimState,
    current_shot: FramedShot,
    fov: f64,
    active: Option<Active>,
    pending: bool,
    last_trajectory: Option<Trajectory>,
    trackers: Option<[Tracker; 2]>,
    seq: u64,
    transitions: u64,
    latest: Option<Telemetry>,
}

impl Session {
    /// The line-of-action side is fixed here for the session's lifetime.
    pub fn new(id: String, mut scene: Scene, config: SessionConfig) -> Result<Session, SessionError> {
        config.validate()?;
        scene.validate()?;
        scene.line_of_action();
        let planning = scene.with_margin(config.planning_margin);
        let shot = place_shot(&planning, &config.initial_shot, &config.engine.shot)?;
        let sim = SimState::at_rest(shot.pose.look_from, shot.pose.look_at, scene.subjects, config.seed);
        let trackers = config
            .perception
            .map(|m| [Tracker::new(m, config.seed, 0), Tracker::new(m, config.seed, 1)]);
        Ok(Session {
            id,
            fov: shot.pose.fov,
            scene,
            config,
            sim,
            current_shot: shot,
            active: None,
            pending: false,
            last_trajectory: None,
            trackers,
            seq: 0,
            transitions: 0,
            latest: None,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn state(&self) -> SessionState {
        if self.active.is_some() { SessionState::Transitioning } else { SessionState::Idle }
    }

    /// Accepting a command means neither a transition nor a plan is under way.
    pub fn is_busy(&self) -> bool {
        self.active.is_some() || self.pending
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn sim(&self) -> &SimState {
        &self.sim
    }

    pub fn current_shot(&self) -> &FramedShot {
        &self.current_shot
    }

    pub fn last_trajectory(&self) -> Option<&Trajectory> {
        self.last_trajectory.as_ref()
    }

    pub fn tick_dt(&self) -> f64 {
        1.0 / self.config.tick_rate
    }

    /// Scene the planner sees: estimated subjects, safety radii grown by the
    /// planning margin, side kept from the session.
    pub fn planning_scene(&self) -> Scene {
        let mut scene = self.scene.with_margin(self.config.planning_margin);
        if let Some(trackers) = &self.trackers {
            for (s, t) in scene.subjects.iter_mut().zip(trackers) {
                s.position = t.measure(&s.position);
            }
        }
        scene
    }

    /// Where the shot would put the camera, without committing to it.
    pub fn preview(&self, spec: &ShotSpec) -> Result<FramedShot, SessionError> {
        Ok(place_shot(&self.planning_scene(), spec, &self.config.engine.shot)?)
    }

    pub fn begin_command(&mut self, spec: ShotSpec) -> Result<PlanJob, SessionError> {
        if self.is_busy() {
            return Err(SessionError::Busy);
        }
        spec.validate()?;
        self.pending = true;
        Ok(PlanJob {
            scene: self.planning_scene(),
            from: self.current_shot.pose,
            spec,
            config: self.config.clone(),
        })
    }

    pub fn finish_command(&mut self, outcome: PlanOutcome) -> Result<TransitionSummary, SessionError> {
        self.pending = false;
        let (shot, planned) = outcome?;
        self.transitions += 1;
        let summary = TransitionSummary {
            transition: self.transitions,
            duration: planned.duration(),
            nominal_duration: planned.nominal_duration,
            stretch_factor: planned.stretch_factor,
            crop_warning: shot.crop_warning,
            solve_time_ms: planned.plan.solution.solve_time,
            converged: planned.plan.solution.converged,
            shot: shot.clone(),
        };
        self.last_trajectory = Some(planned.trajectory.clone());
        self.active = Some(Active {
            index: self.transitions,
            start_time: self.sim.time,
            target: shot,
            planned,
            announced: false,
        });
        Ok(summary)
    }

    /// Plan and start a transition in one call.
    pub fn command_shot(&mut self, spec: ShotSpec) -> Result<TransitionSummary, SessionError> {
        let job = self.begin_command(spec)?;
        let outcome = job.run();
        self.finish_command(outcome)
    }

    fn transition_setpoint(active: &Active, elapsed: f64) -> (Setpoint, f64) {
        let plan = &active.planned.plan;
        let duration = active.planned.duration();
        let eval = |t: f64| plan.at((t / duration).clamp(0.0, 1.0));
        let (from, at, fov) = eval(elapsed);
        let h = 1e-3;
        let (prev, next) = (eval(elapsed - h).0, eval(elapsed + h).0);
        let velocity = (next - prev) / (2.0 * h);
        let acceleration = (next - from * 2.0 + prev) / (h * h);
        (
            Setpoint {
                look_from: from,
                look_at: at,
                velocity: Some(velocity),
                acceleration: Some(acceleration),
            },
            fov,
        )
    }

    /// Advance the simulation by one tick and report the new state.
    pub fn tick(&mut self) -> Telemetry {
        let dt = self.tick_dt();
        let now = self.sim.time + dt;
        let mut transition_end = false;
        let mut progress = None;
        let mut planned_path = None;
        let setpoint = match &mut self.active {
            Some(active) if now - active.start_time < active.planned.duration() => {
                let elapsed = now - active.start_time;
                let (sp, fov) = Self::transition_setpoint(active, elapsed);
                self.fov = fov;
                if !active.announced {
                    active.announced = true;
                    planned_path = Some(PathPreview::of(&active.planned.trajectory, 101));
                }
                progress = Some(TransitionProgress {
                    index: active.index,
                    elapsed,
                    duration: active.planned.duration(),
                    target: active.target.pose,
                });
                sp
            }
            Some(_) => {
                let active = self.active.take().expect("checked above");
                transition_end = true;
                progress = Some(TransitionProgress {
                    index: active.index,
                    elapsed: now - active.start_time,
                    duration: active.planned.duration(),
                    target: active.target.pose,
                });
                self.current_shot = active.target;
                self.fov = self.current_shot.pose.fov;
                Setpoint::hold(self.current_shot.pose.look_from, self.current_shot.pose.look_at)
            }
            None => Setpoint::hold(self.current_shot.pose.look_from, self.current_shot.pose.look_at),
        };
        let limits = self.config.engine.limits();
        self.sim = follower::step(&self.sim, &setpoint, dt, &limits, &self.config.engine.follower);
        if let Some(trackers) = &mut self.trackers {
            for t in trackers {
                t.advance(dt);
            }
        }
        self.seq += 1;
        let telemetry = self.telemetry(&setpoint, progress, transition_end, planned_path);
        self.latest = Some(telemetry.clone());
        telemetry
    }

    /// Camera as seen from the vehicle: its position, the gimbal's direction.
    fn camera(&self, setpoint: &Setpoint) -> CameraPose {
        let range = (setpoint.look_at - self.sim.quad_position).norm().max(1.0);
        let look_at = self.sim.quad_position + self.sim.gimbal.direction() * range;
        CameraPose {
            look_from: self.sim.quad_position,
            look_at,
            fov: self.fov,
        }
    }

    fn telemetry(
        &self,
        setpoint: &Setpoint,
        transition: Option<TransitionProgress>,
        transition_end: bool,
        planned_path: Option<PathPreview>,
    ) -> Telemetry {
        let camera = self.camera(setpoint);
        let aspect = self.scene.aspect_ratio;
        let subjects = self.scene.subjects.map(|s| {
            let distance = (self.sim.quad_position - s.position).norm();
            SubjectTelemetry {
                position: s.position,
                gaze: s.gaze,
                height: s.height,
                safety_radius: s.safety_radius,
                distance,
                clearance: distance - s.safety_radius,
                screen: project(&camera, &s.position, aspect).ok(),
            }
        });
        Telemetry {
            seq: self.seq,
            t: self.sim.time,
            state: self.state(),
            camera,
            aspect_ratio: aspect,
            quad_velocity: self.sim.quad_velocity,
            gimbal: self.sim.gimbal,
            setpoint: setpoint.look_from,
            tracking_error: (self.sim.quad_position - setpoint.look_from).norm(),
            line_of_action_side: self.scene.line_of_action_side,
            subjects,
            transition,
            transition_end,
            planned_path,
        }
    }

    pub fn snapshot(&self) -> SessionSnapshot {
        SessionSnapshot {
            id: self.id.clone(),
            state: self.state(),
            line_of_action_side: self.scene.line_of_action_side,
            scene: self.scene.to_file(),
            current_shot: self.current_shot.clone(),
            transitions_started: self.transitions,
            latest: self.latest.clone(),
        }
    }
}

impl PathPreview {
    pub fn of(traj: &Trajectory, count: usize) -> PathPreview {
        let count = count.max(2);
        let points: Vec<Vec3> = (0..count)
            .map(|i| traj.sample_at(traj.duration * i as f64 / (count - 1) as f64).look_from)
            .collect();
        PathPreview {
            duration: traj.duration,
            look_from: points,
        }
    }
}
