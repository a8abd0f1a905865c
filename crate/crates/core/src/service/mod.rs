//! HTTP JSON service over one live snapshot.
//!
//! Every handler loads the current snapshot exactly once and answers from
//! it, so a response never mixes two dataset versions. Reload parses and
//! validates a bundle off to the side and publishes it with a single
//! atomic swap; a failed reload leaves the live snapshot untouched.

mod routes;

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use arc_swap::ArcSwap;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::{Json, Router};
use serde::Serialize;
use tokio::net::TcpListener;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;

use crate::error::Error;
use crate::model::DatasetSnapshot;

pub use routes::router;

/// Shared state: the live snapshot plus the bundle it came from.
pub struct ServiceState {
    current: ArcSwap<DatasetSnapshot>,
    source: Mutex<Option<PathBuf>>,
    reload_lock: tokio::sync::Mutex<()>,
}

impl ServiceState {
    pub fn new(snapshot: DatasetSnapshot, source: Option<PathBuf>) -> Arc<Self> {
        Arc::new(Self { current: ArcSwap::from_pointee(snapshot), source: Mutex::new(source), reload_lock: tokio::sync::Mutex::new(()) })
    }

    pub fn load(bundle: impl AsRef<Path>) -> crate::Result<Arc<Self>> {
        let path = bundle.as_ref().to_path_buf();
        let snapshot = crate::load_bundle(&path)?;
        Ok(Self::new(snapshot, Some(path)))
    }

    pub fn snapshot(&self) -> Arc<DatasetSnapshot> {
        self.current.load_full()
    }

    /// Loads `path` (or the current source when `None`) and swaps it in.
    /// Concurrent reloads run one after another. Returns the new snapshot.
    pub async fn reload(&self, path: Option<PathBuf>) -> crate::Result<Arc<DatasetSnapshot>> {
        let _guard = self.reload_lock.lock().await;
        let path = match path.or_else(|| self.source.lock().unwrap().clone()) {
            Some(p) => p,
            None => return Err(Error::InvalidArgument("no bundle path given and the service has no source bundle".into())),
        };
        let load_path = path.clone();
        let snapshot = tokio::task::spawn_blocking(move || crate::load_bundle(load_path))
            .await
            .map_err(|e| Error::InvalidArgument(format!("reload task failed: {e}")))??;
        let snapshot = Arc::new(snapshot);
        self.current.store(snapshot.clone());
        *self.source.lock().unwrap() = Some(path);
        Ok(snapshot)
    }
}

/// Error body: `{"error": {"code": ..., "message": ...}}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn bad_request(message: impl Into<String>) -> Self {
        Self { status: StatusCode::BAD_REQUEST, code: "bad_request", message: message.into() }
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self { status: StatusCode::NOT_FOUND, code: "not_found", message: message.into() }
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        let (status, code) = match &e {
            Error::UnknownSite(_) => (StatusCode::NOT_FOUND, "unknown_site"),
            Error::UnknownFactor(_) => (StatusCode::NOT_FOUND, "unknown_factor"),
            Error::UnknownLevel(_) => (StatusCode::NOT_FOUND, "unknown_level"),
            Error::InvalidTime(_) => (StatusCode::BAD_REQUEST, "bad_time"),
            Error::InvalidPredicate(_) => (StatusCode::BAD_REQUEST, "bad_predicate"),
            Error::InvalidCriteria(_) => (StatusCode::BAD_REQUEST, "bad_criteria"),
            Error::InvertedRange { .. } => (StatusCode::BAD_REQUEST, "inverted_range"),
            Error::ChildlessParent(_) => (StatusCode::UNPROCESSABLE_ENTITY, "childless_parent"),
            Error::InvalidArgument(_) => (StatusCode::BAD_REQUEST, "bad_request"),
            Error::Io { .. } => (StatusCode::UNPROCESSABLE_ENTITY, "bundle_unreadable"),
            Error::Parse { .. } | Error::Geometry { .. } | Error::UnsupportedVersion(_) => {
                (StatusCode::UNPROCESSABLE_ENTITY, "bundle_malformed")
            }
            Error::Validation(_) => (StatusCode::UNPROCESSABLE_ENTITY, "bundle_invalid"),
        };
        Self { status, code, message: e.to_string() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        #[derive(Serialize)]
        struct Body<'a> {
            error: &'a ApiError,
        }
        (self.status, Json(Body { error: &self })).into_response()
    }
}

/// A running server. Dropping the handle does not stop it; call
/// [`ServiceHandle::shutdown`].
pub struct ServiceHandle {
    pub addr: SocketAddr,
    pub state: Arc<ServiceState>,
    stop: Option<oneshot::Sender<()>>,
    task: JoinHandle<std::io::Result<()>>,
}

impl ServiceHandle {
    pub async fn shutdown(mut self) -> std::io::Result<()> {
        if let Some(stop) = self.stop.take() {
            let _ = stop.send(());
        }
        self.task.await.map_err(std::io::Error::other)?
    }

    /// Runs until the server stops on its own.
    pub async fn wait(self) -> std::io::Result<()> {
        let _keep_open = self.stop;
        self.task.await.map_err(std::io::Error::other)?
    }
}

/// Binds `bind` and serves `state` in the background.
pub async fn serve(state: Arc<ServiceState>, bind: &str) -> std::io::Result<ServiceHandle> {
    let listener = TcpListener::bind(bind).await?;
    let addr = listener.local_addr()?;
    let app: Router = router(state.clone());
    let (stop, stopped) = oneshot::channel::<()>();
    let task = tokio::spawn(async move {
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = stopped.await;
            })
            .await
    });
    Ok(ServiceHandle { addr, state, stop: Some(stop), task })
}
