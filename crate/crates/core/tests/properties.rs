mod common;

use cinequad_core::dynamics::{self, QuadrotorLimits};
use cinequad_core::scene::{project, unproject, CameraPose, ScreenPoint, Side};
use cinequad_core::shotgen::{place_shot, projected_head_height, ShotConfig};
use cinequad_core::simkit::{step, FollowerGains, Setpoint, SimState};
use cinequad_core::transition::blend::integrate;
use cinequad_core::transition::{plan_transition, TransitionConfig};
use cinequad_core::Vec3;
use proptest::prelude::*;
use rand::Rng;

fn random_pose(rng: &mut impl Rng) -> CameraPose {
    let from = Vec3::new(rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0), rng.random_range(0.5..30.0));
    let yaw: f64 = rng.random_range(-180.0f64..180.0).to_radians();
    let pitch: f64 = rng.random_range(-80.0f64..80.0).to_radians();
    let dir = Vec3::new(pitch.cos() * yaw.cos(), pitch.cos() * yaw.sin(), pitch.sin());
    CameraPose::new(from, from + dir * rng.random_range(1.0..20.0), rng.random_range(10.0..90.0)).unwrap()
}

proptest! {
    #[test]
    fn unproject_then_project_is_identity(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let pose = random_pose(&mut rng);
        let aspect = rng.random_range(1.0..2.5);
        let s = ScreenPoint::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
        let depth = rng.random_range(0.5..50.0);
        let p = unproject(&pose, &s, depth, aspect).unwrap();
        let back = project(&pose, &p, aspect).unwrap();
        prop_assert!((back.x - s.x).abs() < 1e-9 && (back.y - s.y).abs() < 1e-9);
    }

    #[test]
    fn projection_is_constant_along_view_rays(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let pose = random_pose(&mut rng);
        let p = unproject(&pose, &ScreenPoint::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)), 3.0, 1.5).unwrap();
        let a = project(&pose, &p, 1.5).unwrap();
        let k = rng.random_range(0.1..10.0);
        let q = pose.look_from + (p - pose.look_from) * k;
        let b = project(&pose, &q, 1.5).unwrap();
        prop_assert!((a.x - b.x).abs() < 1e-9 && (a.y - b.y).abs() < 1e-9);
    }

    #[test]
    fn side_normal_is_horizontal_unit_and_persists(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let mut scene = common::random_scene(&mut rng, (1.0, 5.0));
        let line = scene.line_of_action();
        prop_assert!(line.side != Side::Unset);
        prop_assert!(line.side_normal.z.abs() < 1e-12);
        prop_assert!((line.side_normal.norm() - 1.0).abs() < 1e-12);
        prop_assert!(line.side_normal.dot(&line.direction).abs() < 1e-12);
        // flipping both gazes would pick the other side, but the side is fixed now
        for s in &mut scene.subjects {
            s.gaze = -s.gaze;
        }
        let again = scene.line_of_action();
        prop_assert_eq!(again.side, line.side);
        prop_assert_eq!(again.side_normal, line.side_normal);
    }

    #[test]
    fn placed_shots_are_safe_and_framed(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let scene = common::random_scene(&mut rng, (1.0, 5.0));
        let spec = common::random_spec(&mut rng);
        let cfg = ShotConfig::default();
        let shot = place_shot(&scene, &spec, &cfg).unwrap();
        prop_assert!(scene.clearance(&shot.pose.look_from) >= -1e-9);
        prop_assert!(shot.pose.fov <= scene.fov_max + 1e-12);
        prop_assert_eq!(&place_shot(&scene, &spec, &cfg).unwrap(), &shot);
        for tp in &shot.target_screen_points {
            let actual = project(&shot.pose, &tp.world, scene.aspect_ratio).unwrap();
            if shot.pushed_out() {
                // retreating along the view axis keeps the target on its ray
                prop_assert!(actual.distance_in_widths(&tp.screen, scene.aspect_ratio) < 1e-6);
            } else {
                prop_assert!(actual.distance_in_widths(&tp.screen, scene.aspect_ratio) < 0.01);
            }
        }
    }

    #[test]
    fn push_out_preserves_head_size(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let scene = common::random_scene(&mut rng, (3.0, 5.0));
        let spec = common::random_spec(&mut rng);
        let shot = place_shot(&scene, &spec, &ShotConfig::default()).unwrap();
        prop_assume!(shot.pushed_out());
        let forward = (shot.pose.look_at - shot.pose.look_from).normalize();
        let ideal = CameraPose {
            look_from: shot.pose.look_from + forward * (shot.safe_distance - shot.ideal_distance),
            fov: shot.uncropped_fov,
            ..shot.pose
        };
        let tp = shot.target_screen_points[0];
        let head = scene.subject(spec.primary_subject).head_height();
        let before = projected_head_height(&ideal, &tp.world, head, scene.aspect_ratio).unwrap();
        let after = projected_head_height(&shot.pose, &tp.world, head, scene.aspect_ratio).unwrap();
        prop_assert!((after / before - 1.0).abs() < 0.01, "{before} vs {after}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn blend_solution_obeys_its_constraints(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let scene = common::random_scene(&mut rng, (1.0, 5.0));
        let cfg = ShotConfig::default();
        let a = place_shot(&scene, &common::random_spec(&mut rng), &cfg).unwrap();
        let b = place_shot(&scene, &common::random_spec(&mut rng), &cfg).unwrap();
        let planned = plan_transition(&a, &b, &scene, &TransitionConfig::default()).unwrap();
        let problem = &planned.plan.problem;
        let sol = &planned.plan.solution;
        let replay = integrate(&sol.w[0], &sol.v, problem.du);
        for (x, y) in replay.iter().zip(&sol.w) {
            for j in 0..5 {
                prop_assert!((x[j] - y[j]).abs() < 1e-9 * (1.0 + y[j].abs()), "{x:?} vs {y:?}");
            }
        }
        for &v in &sol.v {
            prop_assert!(problem.v_min - 1e-9 <= v && v <= problem.v_max + 1e-9);
        }
        // each blended point lies on the segment between the two basis samples
        for w in sol.weights() {
            prop_assert!((-1e-9..=1.0 + 1e-9).contains(&w));
        }
        prop_assert!(problem.min_clearance(&sol.w) >= -1e-6);
        prop_assert!(planned.dense_clearance >= -0.01);
        prop_assert!(planned.feasibility.feasible);
    }

    #[test]
    fn stretching_rescales_time_only(seed in any::<u64>(), factor in 1.0f64..5.0) {
        let mut rng = common::rng(seed);
        let scene = common::random_scene(&mut rng, (1.0, 5.0));
        let cfg = ShotConfig::default();
        let a = place_shot(&scene, &common::random_spec(&mut rng), &cfg).unwrap();
        let b = place_shot(&scene, &common::random_spec(&mut rng), &cfg).unwrap();
        prop_assume!((a.pose.look_from - b.pose.look_from).norm() > 0.5);
        let planned = plan_transition(&a, &b, &scene, &TransitionConfig::default()).unwrap();
        let traj = &planned.trajectory;
        let slow = traj.stretched(factor);
        prop_assert!(slow.duration > traj.duration);
        prop_assert!(traj.stretched(factor * 1.1).duration > slow.duration);
        for (x, y) in traj.samples.iter().zip(&slow.samples) {
            prop_assert_eq!(x.look_from, y.look_from);
            prop_assert_eq!(x.look_at, y.look_at);
            prop_assert_eq!(x.fov, y.fov);
        }
        let limits = QuadrotorLimits::default();
        let fast = dynamics::check(traj, &limits).unwrap().peaks;
        let slowed = dynamics::check(&slow, &limits).unwrap().peaks;
        prop_assert!((slowed.speed * factor / fast.speed - 1.0).abs() < 0.02);
        prop_assert!((slowed.accel * factor * factor / fast.accel - 1.0).abs() < 0.02);
    }

    #[test]
    fn simulation_is_deterministic(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let scene = common::random_scene(&mut rng, (1.0, 5.0));
        let start = Vec3::new(rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0), 3.0);
        let setpoints: Vec<Setpoint> = (0..200)
            .map(|i| {
                let f = i as f64 / 200.0;
                Setpoint::hold(start + Vec3::new(5.0 * f, -3.0 * f, f), scene.subjects[0].position)
            })
            .collect();
        let run = || {
            let mut s = SimState::at_rest(start, scene.subjects[0].position, scene.subjects, seed);
            let mut out = Vec::new();
            for sp in &setpoints {
                s = step(&s, sp, 0.02, &QuadrotorLimits::default(), &FollowerGains::default());
                out.push(s.clone());
            }
            out
        };
        prop_assert_eq!(run(), run());
    }
}
