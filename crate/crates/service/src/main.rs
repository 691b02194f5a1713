use std::path::PathBuf;

use cinequad_service::{router, AppState, ServiceConfig};

#[tokio::main]
async fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let path = std::env::args().nth(1).or_else(|| std::env::var("CINEQUAD_CONFIG").ok()).map(PathBuf::from);
    let config = match ServiceConfig::load(path.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}", serde_json::json!({ "error": "invalid_config", "message": e.to_string() }));
            std::process::exit(2);
        }
    };
    let listener = match tokio::net::TcpListener::bind(&config.bind).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("{}", serde_json::json!({ "error": "bind", "message": format!("{}: {e}", config.bind) }));
            std::process::exit(2);
        }
    };
    log::info!("listening on {}", config.bind);
    let app = router(AppState::new(config));
    if let Err(e) = axum::serve(listener, app).await {
        log::error!("server stopped: {e}");
        std::process::exit(4);
    }
}
