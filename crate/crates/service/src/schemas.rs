//! JSON Schemas for every payload the service and the CLI exchange.

pub const ALL: &[(&str, &str)] = &[
    ("blend", include_str!("../../../schemas/blend.json")),
    ("error", include_str!("../../../schemas/error.json")),
    ("feasibility", include_str!("../../../schemas/feasibility.json")),
    ("fig9_summary", include_str!("../../../schemas/fig9_summary.json")),
    ("framed_shot", include_str!("../../../schemas/framed_shot.json")),
    ("manifest", include_str!("../../../schemas/manifest.json")),
    ("scene", include_str!("../../../schemas/scene.json")),
    ("session_snapshot", include_str!("../../../schemas/session_snapshot.json")),
    ("shot_spec", include_str!("../../../schemas/shot_spec.json")),
    ("telemetry", include_str!("../../../schemas/telemetry.json")),
    ("trajectory", include_str!("../../../schemas/trajectory.json")),
    ("transition_summary", include_str!("../../../schemas/transition_summary.json")),
];

pub fn get(name: &str) -> Option<&'static str> {
    ALL.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}
