//! Checks against values computed independently of the library.

mod common;

use approx::assert_relative_eq;
use cinequad_core::dynamics::{self, LimitQuantity, QuadrotorLimits, StretchConfig, GRAVITY};
use cinequad_core::par::Exec;
use cinequad_core::scene::{project, vertical_fov, CameraPose, Scene, SubjectState};
use cinequad_core::shotgen::{distance_for_class, DistanceClass};
use cinequad_core::simkit::tracker::calibrate;
use cinequad_core::simkit::TrackerModel;
use cinequad_core::transition::blend::blend_point;
use cinequad_core::transition::{build_basis_paths, Easing, Trajectory, TrajectorySample};
use cinequad_core::{Error, Vec3};
use rand::Rng;

fn down_x(fov: f64) -> CameraPose {
    CameraPose::new(Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0), fov).unwrap()
}

/// Screen coordinates of `p` for a camera at the origin facing +x, from angles
/// against the frustum planes.
fn frustum_oracle(p: &Vec3, fov_deg: f64, aspect: f64) -> (f64, f64) {
    let half_h = (fov_deg.to_radians() / 2.0).tan();
    let half_v = half_h / aspect;
    let azimuth = (-p.y).atan2(p.x); // screen right is −y
    let elevation = p.z.atan2(p.x);
    (0.5 + 0.5 * azimuth.tan() / half_h, 0.5 + 0.5 * elevation.tan() / half_v)
}

#[test]
fn projection_matches_frustum_geometry() {
    let aspect = 16.0 / 9.0;
    let s = project(&down_x(90.0), &Vec3::new(1.0, 0.0, 9.0 / 16.0), aspect).unwrap();
    assert_relative_eq!(s.x, 0.5, epsilon = 1e-12);
    assert_relative_eq!(s.y, 1.0, epsilon = 1e-12);
    let s = project(&down_x(90.0), &Vec3::new(1.0, 1.0, 0.0), 1.0).unwrap();
    assert_relative_eq!(s.x, 0.0, epsilon = 1e-12);
    assert_relative_eq!(s.y, 0.5, epsilon = 1e-12);

    let mut rng = common::rng(11);
    for _ in 0..200 {
        let p = Vec3::new(rng.random_range(0.5..20.0), rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let fov = rng.random_range(10.0..120.0);
        let s = project(&down_x(fov), &p, aspect).unwrap();
        let (x, y) = frustum_oracle(&p, fov, aspect);
        assert_relative_eq!(s.x, x, epsilon = 1e-9);
        assert_relative_eq!(s.y, y, epsilon = 1e-9);
    }
}

#[test]
fn long_shot_distance_matches_stacked_heads() {
    // vertical fov 90° at aspect 1
    assert_relative_eq!(vertical_fov(90.0, 1.0), 90.0, epsilon = 1e-12);
    let d = distance_for_class(DistanceClass::Long, 0.25, 90.0, 1.0);
    assert_relative_eq!(d, 1.40625, epsilon = 1e-12);
    // the eye sits on the upper third; 7.5 heads below it span 2/3 of the frame
    let eye_offset = (2.0 / 3.0 - 0.5) * 2.0 * d;
    let pose = CameraPose::new(Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0), 90.0).unwrap();
    let eye = project(&pose, &Vec3::new(d, 0.0, eye_offset), 1.0).unwrap();
    let feet = project(&pose, &Vec3::new(d, 0.0, eye_offset - 7.5 * 0.25), 1.0).unwrap();
    assert_relative_eq!(eye.y, 2.0 / 3.0, epsilon = 1e-12);
    assert_relative_eq!(eye.y - feet.y, 2.0 / 3.0, epsilon = 1e-12);
    let close = distance_for_class(DistanceClass::Close, 0.25, 90.0, 1.0);
    assert_relative_eq!(close / d, 1.0 / 3.0, epsilon = 1e-12);
}

#[test]
fn side_normal_maximizes_gaze_component() {
    let mut rng = common::rng(5);
    for _ in 0..200 {
        let scene = common::random_scene(&mut rng, (1.0, 2.0));
        let [a, b] = &scene.subjects;
        let d = b.position - a.position;
        let left = Vec3::new(-d.y, d.x, 0.0).normalize();
        let g = a.gaze + b.gaze;
        let expected = if g.dot(&left) >= g.dot(&-left) { left } else { -left };
        let got = scene.line_of_action_preview().side_normal;
        assert!((got - expected).norm() < 1e-12);
    }
    // facing each other, both looking slightly toward +y
    let scene = common::facing_pair(1.0);
    let mut flipped = scene.clone();
    for s in &mut flipped.subjects {
        s.gaze.y = -s.gaze.y;
    }
    assert!(flipped.line_of_action_preview().side_normal.y > 0.99);
    assert!(scene.line_of_action_preview().side_normal.y < -0.99);
}

#[test]
fn distances_match_direct_norms() {
    let scene = common::facing_pair(1.0);
    assert_eq!(scene.distance_to_subjects(&scene.subjects[0].position), (0.0, 4.0));
    assert_eq!(scene.distance_to_subjects(&Vec3::new(2.0, 0.0, 1.6)), (2.0, 2.0));
    let mut rng = common::rng(2);
    for _ in 0..100 {
        let p = Vec3::new(rng.random_range(-9.0..9.0), rng.random_range(-9.0..9.0), rng.random_range(0.0..9.0));
        let manual = |q: Vec3| ((p.x - q.x).powi(2) + (p.y - q.y).powi(2) + (p.z - q.z).powi(2)).sqrt();
        let (da, db) = scene.distance_to_subjects(&p);
        assert_relative_eq!(da, manual(scene.subjects[0].position), epsilon = 1e-12);
        assert_relative_eq!(db, manual(scene.subjects[1].position), epsilon = 1e-12);
    }
}

#[test]
fn easing_matches_symbolic_derivatives() {
    let c = [126.0, -420.0, 540.0, -315.0, 70.0]; // x^5 .. x^9
    let poly = |x: f64, m: usize| {
        (0..5)
            .map(|i| {
                let p = 5 + i;
                if m > p {
                    return 0.0;
                }
                let falling: f64 = (0..m).map(|j| (p - j) as f64).product();
                c[i] * falling * x.powi((p - m) as i32)
            })
            .sum::<f64>()
    };
    let e = Easing::Smoothstep9;
    assert_eq!(e.eval(0.5), 0.5);
    for k in 0..=100 {
        let x = k as f64 / 100.0;
        for m in 0..=4 {
            assert_relative_eq!(e.derivative(x, m), poly(x, m), epsilon = 1e-9, max_relative = 1e-9);
        }
    }
    for m in 1..=4 {
        assert!(poly(0.0, m).abs() < 1e-12 && poly(1.0, m).abs() < 1e-9);
    }
}

#[test]
fn blend_extremes_reproduce_basis_paths() {
    let scene = common::facing_pair(1.0);
    let c0 = Vec3::new(2.0, -4.0, 2.0);
    let c1 = Vec3::new(-1.0, -3.0, 2.5);
    let (a, b) = build_basis_paths(&c0, &c1, &scene).unwrap();
    for k in 0..=20 {
        let u = k as f64 / 20.0;
        let (sa, sb) = (a.eval(u), b.eval(u));
        assert_eq!(blend_point(&sa, &sb, 1.0), sa);
        assert_eq!(blend_point(&sa, &sb, 0.0), sb);
    }
    for w in [0.0, 0.3, 0.5, 1.0] {
        assert!((blend_point(&a.eval(0.0), &b.eval(0.0), w) - c0).norm() < 1e-12);
        assert!((blend_point(&a.eval(1.0), &b.eval(1.0), w) - c1).norm() < 1e-12);
    }
}

fn timed(n: usize, duration: f64, f: impl Fn(f64) -> (Vec3, Vec3)) -> Trajectory {
    let samples = (0..n)
        .map(|i| {
            let t = duration * i as f64 / (n - 1) as f64;
            let (look_from, look_at) = f(t);
            TrajectorySample {
                t,
                look_from,
                look_at,
                fov: 50.0,
            }
        })
        .collect();
    Trajectory {
        duration,
        samples,
        easing: Easing::default(),
    }
}

#[test]
fn hover_needs_weight_thrust() {
    let lim = QuadrotorLimits::default();
    let pose = CameraPose::new(Vec3::new(0.0, 0.0, 3.0), Vec3::new(5.0, 0.0, 1.6), 50.0).unwrap();
    let r = dynamics::check(&Trajectory::constant(&pose, 5.0, 101), &lim).unwrap();
    assert!(r.feasible);
    assert_relative_eq!(r.peaks.thrust_max, lim.mass * GRAVITY, epsilon = 1e-9);
    assert_relative_eq!(r.peaks.thrust_min, lim.mass * GRAVITY, epsilon = 1e-9);
}

#[test]
fn circular_motion_reports_centripetal_acceleration() {
    let (r, v) = (6.0, 4.0);
    let omega = v / r;
    let traj = timed(2001, 10.0, |t| {
        let p = Vec3::new(r * (omega * t).cos(), r * (omega * t).sin(), 5.0);
        (p, Vec3::new(0.0, 0.0, 0.0))
    });
    let peaks = dynamics::check(&traj, &QuadrotorLimits::default()).unwrap().peaks;
    assert!((peaks.accel / (v * v / r) - 1.0).abs() < 0.02, "{}", peaks.accel);
    assert!((peaks.speed / v - 1.0).abs() < 0.02);
}

#[test]
fn speed_violation_of_one_and_a_half_is_stretched_within_one_step() {
    let lim = QuadrotorLimits::default();
    let speed = 1.5 * lim.v_max;
    let duration = 4.0;
    let traj = timed(201, duration, |t| {
        let p = Vec3::new(speed * t, -10.0, 4.0);
        (p, p + Vec3::new(0.0, 10.0, -2.0))
    });
    let report = dynamics::check(&traj, &lim).unwrap();
    assert!(!report.feasible);
    // every interior sample is flagged
    let flagged = report.violations.iter().filter(|v| v.quantity == LimitQuantity::Speed).count();
    assert!(flagged >= 199);
    let out = dynamics::time_stretch(&traj, &lim, &StretchConfig::default()).unwrap();
    let ratio = out.trajectory.duration / duration;
    assert!((1.5..=1.65).contains(&ratio), "{ratio}");
    assert!(out.report.feasible);
    assert!(out.report.peaks.speed <= lim.v_max);
}

#[test]
fn pitch_violation_cannot_be_stretched() {
    let lim = QuadrotorLimits {
        gimbal_pitch_range: [-90.0, 0.0],
        ..QuadrotorLimits::default()
    };
    let traj = timed(101, 20.0, |t| (Vec3::new(t * 0.1, 0.0, 1.0), Vec3::new(t * 0.1 + 5.0, 0.0, 3.0)));
    match dynamics::time_stretch(&traj, &lim, &StretchConfig::default()) {
        Err(Error::Unstretchable { quantity, .. }) => assert_eq!(quantity, LimitQuantity::GimbalPitch),
        other => panic!("{other:?}"),
    }
}

#[test]
fn tracker_statistics_follow_the_configured_gaussians() {
    // CEP95 of a 2-D isotropic Gaussian is σ·√(−2 ln 0.05), the Rayleigh quantile
    for model in [TrackerModel::rtk(), TrackerModel::conventional()] {
        let sigma = model.horizontal_cep95 / 2.447_746_830_680_816;
        assert_relative_eq!(model.horizontal_sigma(), sigma, max_relative = 1e-9);
        let c = calibrate(&model, 100_000, 5, 17, Exec::default());
        assert!((c.horizontal_cep95 / model.horizontal_cep95 - 1.0).abs() < 0.05, "{c:?}");
        assert!((c.altitude_std / model.altitude_sigma - 1.0).abs() < 0.05, "{c:?}");
    }
}

#[test]
fn tight_swing_keeps_both_spheres_clear() {
    // the straight average of the two bases cuts through A's sphere
    let scene = Scene::new(
        SubjectState::new(Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, -1.0, 0.0), 1.8, 1.0).unwrap(),
        SubjectState::new(Vec3::new(3.3, 0.0, 0.0), Vec3::new(0.0, -1.0, 0.0), 1.8, 1.0).unwrap(),
        50.0,
        16.0 / 9.0,
    )
    .unwrap();
    let c0 = Vec3::new(1.3, 1.15, 0.0);
    let c1 = Vec3::new(1.3, -1.15, 0.0);
    let (a, b) = build_basis_paths(&c0, &c1, &scene).unwrap();
    let half_clips = (0..=50).any(|k| {
        let u = k as f64 / 50.0;
        scene.clearance(&blend_point(&a.eval(u), &b.eval(u), 0.5)) < 0.0
    });
    assert!(half_clips);
    let from = CameraPose::new(c0, Vec3::new(2.0, 0.0, 0.0), 50.0).unwrap();
    let to = CameraPose::new(c1, Vec3::new(2.0, 0.0, 0.0), 50.0).unwrap();
    let plan = cinequad_core::transition::plan_path(&from, &to, &scene, &Default::default()).unwrap();
    assert!(plan.problem.min_clearance(&plan.solution.w) >= -1e-6);
    let w = plan.solution.weights();
    assert!(w.iter().any(|&x| x > 0.5 + 1e-3), "weight should lean toward basis A");
}
