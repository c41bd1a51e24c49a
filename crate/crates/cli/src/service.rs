//! Stateless JSON-over-HTTP service.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tower_http::services::{ServeDir, ServeFile};

use scalefree::atlas::{compute_atlas, Window};
use scalefree::chain::DEFAULT_TEST_POINTS;
use scalefree::design::DesignProblem;
use scalefree::platoon::{simulate_with, PlatoonConfig, SimulationOptions};
use scalefree::ratfun::RationalFunction;
use scalefree::serde_ext::fmt_real;
use scalefree::{ErrorKind, VERSION};

use crate::output::{self, AtlasResponse, CurveResponse, SimulationResponse, StripResponse};

pub const DEFAULT_CELL_CAP: usize = 1_000_000;
pub const VERSION_HEADER: &str = "x-scalefree-version";

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub static_dir: Option<PathBuf>,
    /// Largest `nx * ny` accepted by `/api/atlas`.
    pub cell_cap: usize,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            static_dir: None,
            cell_cap: DEFAULT_CELL_CAP,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtlasRequest {
    #[serde(default = "default_re")]
    pub re_range: [f64; 2],
    #[serde(default = "default_im")]
    pub im_range: [f64; 2],
    #[serde(default = "default_res")]
    pub nx: usize,
    #[serde(default = "default_res")]
    pub ny: usize,
    #[serde(default = "default_n_iter")]
    pub n_iter: usize,
}

fn default_re() -> [f64; 2] {
    Window::default().re_range
}

fn default_im() -> [f64; 2] {
    Window::default().im_range
}

fn default_res() -> usize {
    400
}

fn default_n_iter() -> usize {
    1_000_000
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StripRequest {
    pub h: RationalFunction,
    #[serde(default = "default_test_points")]
    pub test_points: usize,
}

fn default_test_points() -> usize {
    DEFAULT_TEST_POINTS
}

#[derive(Debug, Default, Deserialize)]
pub struct SimulateQuery {
    #[serde(default)]
    pub raw: bool,
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    kind: &'static str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    details: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    id: Option<String>,
}

#[derive(Debug, Serialize)]
struct ErrorResponse {
    version: &'static str,
    error: ErrorBody,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn malformed(message: String, path: String) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            body: ErrorBody {
                kind: "malformed",
                message,
                details: Some(serde_json::json!({ "path": path })),
                id: None,
            },
        }
    }

    fn unprocessable(message: String) -> Self {
        ApiError {
            status: StatusCode::UNPROCESSABLE_ENTITY,
            body: ErrorBody {
                kind: "validation",
                message,
                details: None,
                id: None,
            },
        }
    }
}

impl From<scalefree::Error> for ApiError {
    fn from(e: scalefree::Error) -> Self {
        let message = e.to_string();
        match e.kind() {
            ErrorKind::Validation => ApiError::unprocessable(message),
            ErrorKind::Domain => ApiError {
                status: StatusCode::UNPROCESSABLE_ENTITY,
                body: ErrorBody {
                    kind: "domain",
                    message,
                    details: domain_details(&e),
                    id: None,
                },
            },
            ErrorKind::Numeric => {
                let id = uuid::Uuid::new_v4().to_string();
                log::error!("numeric failure {id}: {message}");
                ApiError {
                    status: StatusCode::INTERNAL_SERVER_ERROR,
                    body: ErrorBody {
                        kind: "numeric",
                        message,
                        details: None,
                        id: Some(id),
                    },
                }
            }
        }
    }
}

fn real(v: f64) -> serde_json::Value {
    if v.is_finite() {
        serde_json::json!(v)
    } else {
        serde_json::json!(fmt_real(v))
    }
}

/// The offending data of a domain error, in the same encoding as the
/// response bodies (`"inf"` for infinite frequencies).
fn domain_details(e: &scalefree::Error) -> Option<serde_json::Value> {
    use scalefree::Error::*;
    Some(match e {
        CriticalStrip { re, im } => serde_json::json!({ "value": [real(*re), real(*im)] }),
        ImaginaryAxisPole { re, im } => serde_json::json!({ "pole": [real(*re), real(*im)] }),
        StripViolation { omegas } => {
            serde_json::json!({ "omegas": omegas.iter().map(|w| real(*w)).collect::<Vec<_>>() })
        }
        StripEncircled { values } => {
            serde_json::json!({ "values": values.iter().map(|c| real(*c)).collect::<Vec<_>>() })
        }
        _ => return None,
    })
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        json_response(
            self.status,
            &ErrorResponse {
                version: VERSION,
                error: self.body,
            },
        )
    }
}

fn json_response<T: Serialize>(status: StatusCode, body: &T) -> Response {
    match serde_json::to_vec(body) {
        Ok(bytes) => (status, [(header::CONTENT_TYPE, "application/json")], bytes).into_response(),
        Err(e) => {
            let id = uuid::Uuid::new_v4().to_string();
            log::error!("serialisation failure {id}: {e}");
            (
                StatusCode::INTERNAL_SERVER_ERROR,
                format!("serialisation failure {id}"),
            )
                .into_response()
        }
    }
}

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    let de = &mut serde_json::Deserializer::from_slice(body);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ApiError::malformed(e.into_inner().to_string(), path)
    })
}

async fn blocking<T, F>(f: F) -> Result<T, ApiError>
where
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f).await.unwrap_or_else(|e| {
        let id = uuid::Uuid::new_v4().to_string();
        log::error!("worker failure {id}: {e}");
        Err(ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            body: ErrorBody {
                kind: "numeric",
                message: "worker task failed".into(),
                details: None,
                id: Some(id),
            },
        })
    })
}

async fn bound_curve(body: Bytes) -> Result<Response, ApiError> {
    let problem: DesignProblem = parse(&body)?;
    blocking(move || {
        let curve = output::design_check(&problem)?;
        Ok(json_response(StatusCode::OK, &CurveResponse::new(&curve)))
    })
    .await
}

async fn atlas(
    State(config): State<Arc<ServiceConfig>>,
    body: Bytes,
) -> Result<Response, ApiError> {
    let req: AtlasRequest = parse(&body)?;
    let cells = req.nx.saturating_mul(req.ny);
    if cells > config.cell_cap {
        return Err(ApiError::unprocessable(format!(
            "atlas of {} x {} = {cells} cells exceeds the cap of {}",
            req.nx, req.ny, config.cell_cap
        )));
    }
    blocking(move || {
        let window = Window {
            re_range: req.re_range,
            im_range: req.im_range,
        };
        let grid = compute_atlas(&window, req.nx, req.ny, req.n_iter)?;
        Ok(json_response(
            StatusCode::OK,
            &AtlasResponse {
                version: VERSION,
                grid: &grid,
            },
        ))
    })
    .await
}

async fn simulate(Query(query): Query<SimulateQuery>, body: Bytes) -> Result<Response, ApiError> {
    let config: PlatoonConfig = parse(&body)?;
    let raw = query.raw;
    blocking(move || {
        let result = simulate_with(&config, SimulationOptions { raw })?;
        Ok(json_response(
            StatusCode::OK,
            &SimulationResponse {
                version: VERSION,
                result: &result,
            },
        ))
    })
    .await
}

async fn strip_check(body: Bytes) -> Result<Response, ApiError> {
    let req: StripRequest = parse(&body)?;
    blocking(move || {
        let report = output::strip_check(&req.h, req.test_points)?;
        Ok(json_response(
            StatusCode::OK,
            &StripResponse {
                version: VERSION,
                ok: report.ok,
                report: &report,
            },
        ))
    })
    .await
}

const INDEX: &str = "<!doctype html>
<html><head><meta charset=\"utf-8\"><title>scalefree</title></head>
<body>
<h1>scalefree service</h1>
<p>POST JSON to <code>/api/bound-curve</code>, <code>/api/atlas</code>, <code>/api/simulate</code> or <code>/api/strip-check</code>.</p>
</body></html>
";

async fn index() -> Html<&'static str> {
    Html(INDEX)
}

async fn stamp_version(req: axum::extract::Request, next: axum::middleware::Next) -> Response {
    let mut res = next.run(req).await;
    res.headers_mut()
        .insert(VERSION_HEADER, HeaderValue::from_static(VERSION));
    res
}

pub fn router(config: ServiceConfig) -> Router {
    let static_dir = config.static_dir.clone();
    let api = Router::new()
        .route("/api/bound-curve", post(bound_curve))
        .route("/api/atlas", post(atlas))
        .route("/api/simulate", post(simulate))
        .route("/api/strip-check", post(strip_check))
        .with_state(Arc::new(config));
    let app = match static_dir {
        Some(dir) => {
            let index = dir.join("index.html");
            api.fallback_service(ServeDir::new(dir).fallback(ServeFile::new(index)))
        }
        None => api.route("/", get(index)),
    };
    app.layer(axum::middleware::from_fn(stamp_version))
}

pub async fn serve(bind: &str, port: u16, config: ServiceConfig) -> anyhow::Result<()> {
    let addr: SocketAddr = format!("{bind}:{port}").parse()?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(config))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
