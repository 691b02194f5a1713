#![allow(dead_code)]

use cinequad_core::{Scene, ShotSpec, ShotType, SubjectId};
use cinequad_service::{Session, SessionConfig, Telemetry};

pub fn fixture(name: &str) -> String {
    let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn scene(name: &str) -> Scene {
    Scene::from_json(&fixture(name)).unwrap()
}

pub fn session_with(initial: ShotSpec) -> Session {
    let cfg = SessionConfig {
        initial_shot: initial,
        ..SessionConfig::default()
    };
    Session::new("test".into(), scene("sample_scene.json"), cfg).unwrap()
}

pub fn external_a() -> ShotSpec {
    ShotSpec::new(ShotType::External, SubjectId::A)
}

/// Tick until the session is idle again, at most `limit` ticks.
pub fn run_to_idle(session: &mut Session, limit: usize) -> Vec<Telemetry> {
    let mut out = Vec::new();
    for _ in 0..limit {
        let t = session.tick();
        let done = t.transition_end;
        out.push(t);
        if done {
            break;
        }
    }
    out
}
