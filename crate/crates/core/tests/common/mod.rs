#![allow(dead_code)]

use cinequad_core::scene::{Scene, SubjectState, DEFAULT_ASPECT_RATIO};
use cinequad_core::shotgen::{ShotSpec, ShotType};
use cinequad_core::{SubjectId, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Two standing subjects in a 30 m square with random gazes and radii.
pub fn random_scene(rng: &mut ChaCha8Rng, radius: (f64, f64)) -> Scene {
    loop {
        let subject = |rng: &mut ChaCha8Rng| {
            let p = Vec3::new(rng.random_range(-15.0..15.0), rng.random_range(-15.0..15.0), rng.random_range(1.2..1.9));
            let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            SubjectState::new(
                p,
                Vec3::new(a.cos(), a.sin(), 0.0),
                rng.random_range(1.5..2.0),
                rng.random_range(radius.0..radius.1),
            )
            .unwrap()
        };
        let a = subject(rng);
        let b = subject(rng);
        if let Ok(scene) = Scene::new(a, b, 50.0, DEFAULT_ASPECT_RATIO) {
            return scene;
        }
    }
}

pub fn random_spec(rng: &mut ChaCha8Rng) -> ShotSpec {
    let t = ShotType::ALL[rng.random_range(0..ShotType::ALL.len())];
    ShotSpec::new(t, if rng.random_bool(0.5) { SubjectId::A } else { SubjectId::B })
}

/// Subjects 4 m apart facing each other, radius `r`.
pub fn facing_pair(r: f64) -> Scene {
    Scene::new(
        SubjectState::new(Vec3::new(0.0, 0.0, 1.6), Vec3::new(1.0, -0.3, 0.0), 1.8, r).unwrap(),
        SubjectState::new(Vec3::new(4.0, 0.0, 1.6), Vec3::new(-1.0, -0.3, 0.0), 1.8, r).unwrap(),
        50.0,
        DEFAULT_ASPECT_RATIO,
    )
    .unwrap()
}
