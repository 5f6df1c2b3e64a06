//! Stateless HTTP API over the compiler, simulator and gadget verifier.
//!
//! | route                | body                         | reply                    |
//! |----------------------|------------------------------|--------------------------|
//! | `POST /api/compile`  | formula text, `?k=` optional | level document           |
//! | `POST /api/simulate` | [`SimulateRequest`]          | [`TraceDocument`]        |
//! | `POST /api/verify`   | [`VerifyRequest`]            | verification report      |
//! | `GET /api/gadgets`   |                              | catalog with ports       |
//!
//! Everything else is served from the static directory.

use std::net::SocketAddr;
use std::path::PathBuf;

use axum::body::Bytes;
use axum::extract::Query;
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::services::ServeDir;

use trainyard::engine::{simulate, RailEntry, SimError, DEFAULT_STEP_CAP};
use trainyard::gadgets::{contract, designs, stamp, GadgetKind, GadgetStamp, VerifyMode, DEFAULT_EXHAUSTIVE_BOUND};
use trainyard::io::{
    layout_from_entries, parse_formula_bytes, serialize_level, DocumentError, LevelDocument, LoadedLevel,
    TraceDocument,
};
use trainyard::reduction::{compile, MmsInstance};

/// Largest step cap a request may ask for.
pub const MAX_CAP: u64 = 100_000;
/// Largest sample count a verify request may ask for.
pub const MAX_SAMPLES: u64 = 200_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateRequest {
    pub level: LevelDocument,
    /// Overrides the layout embedded in the level.
    #[serde(default)]
    pub layout: Option<Vec<RailEntry>>,
    #[serde(default)]
    pub cap: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyRequest {
    pub kind: String,
    pub mode: VerifyMode,
}

#[derive(Debug, Deserialize)]
pub struct CompileQuery {
    pub k: Option<u32>,
}

struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, error: &str, message: impl ToString) -> Self {
        Self {
            status,
            body: json!({ "error": error, "message": message.to_string() }),
        }
    }

    fn with(mut self, key: &str, v: Value) -> Self {
        self.body[key] = v;
        self
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, axum::Json(self.body)).into_response()
    }
}

fn json_text(text: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], text).into_response()
}

fn json_value<T: Serialize>(v: &T) -> Response {
    json_text(serde_json::to_string(v).expect("responses serialize"))
}

fn document_error(e: DocumentError) -> ApiError {
    let cells = |pos: Vec<Value>| json!(pos);
    match e {
        DocumentError::Placement(errors) => {
            let list: Vec<Value> = errors.iter().map(|p| json!(p)).collect();
            ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_layout", format!("{} misplaced rail(s)", list.len()))
                .with("cells", cells(list))
        }
        DocumentError::RailOverlap(pos) | DocumentError::BadPiece(pos) => {
            let msg = e.to_string();
            ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_layout", msg)
                .with("cells", cells(vec![json!({ "kind": "invalid_piece", "pos": pos })]))
        }
        DocumentError::Json { line, column, .. } => ApiError::new(StatusCode::BAD_REQUEST, "malformed_json", &e)
            .with("line", json!(line))
            .with("column", json!(column)),
        other => ApiError::new(StatusCode::BAD_REQUEST, "invalid_level", other),
    }
}

async fn compile_handler(Query(q): Query<CompileQuery>, body: Bytes) -> Result<Response, ApiError> {
    let inst = parse_formula_bytes(&body).map_err(|e| {
        ApiError::new(StatusCode::BAD_REQUEST, e.kind.name(), &e)
            .with("line", json!(e.line))
            .with("column", json!(e.column))
    })?;
    let inst = match q.k {
        Some(k) => MmsInstance::new(inst.formula, k).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_k", e))?,
        None => inst,
    };
    let text = tokio::task::spawn_blocking(move || {
        compile(&inst).map(|plan| serialize_level(&LoadedLevel::from_plan(&plan, None)))
    })
    .await
    .expect("compile task")
    .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "compile_error", e))?;
    Ok(json_text(text))
}

async fn simulate_handler(body: Bytes) -> Result<Response, ApiError> {
    let req: SimulateRequest = serde_json::from_slice(&body).map_err(|e| {
        ApiError::new(StatusCode::BAD_REQUEST, "malformed_json", &e)
            .with("line", json!(e.line()))
            .with("column", json!(e.column()))
    })?;
    let cap = req.cap.unwrap_or(DEFAULT_STEP_CAP);
    if cap > MAX_CAP {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "cap_too_large", format!("cap is limited to {MAX_CAP}")));
    }
    let loaded = req.level.validate().map_err(document_error)?;
    let layout = match req.layout {
        Some(entries) => layout_from_entries(&loaded.level, &entries).map_err(document_error)?,
        None => loaded.layout.clone().unwrap_or_default(),
    };
    let doc = tokio::task::spawn_blocking(move || {
        simulate(&loaded.level, &layout, cap).map(|r| TraceDocument::from_result(&r))
    })
    .await
    .expect("simulate task")
    .map_err(|e| match e {
        SimError::InvalidLayout(v) => document_error(DocumentError::Placement(v)),
    })?;
    Ok(json_value(&doc))
}

async fn verify_handler(body: Bytes) -> Result<Response, ApiError> {
    let req: VerifyRequest = serde_json::from_slice(&body).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "malformed_json", e))?;
    let kind = GadgetKind::parse(&req.kind)
        .ok_or_else(|| ApiError::new(StatusCode::BAD_REQUEST, "unknown_gadget", format!("unknown gadget `{}`", req.kind)))?;
    match req.mode {
        VerifyMode::Sampled { samples, .. } if samples > MAX_SAMPLES => {
            return Err(ApiError::new(StatusCode::BAD_REQUEST, "too_many_samples", format!("samples are limited to {MAX_SAMPLES}")));
        }
        VerifyMode::Exhaustive { bound } if bound > DEFAULT_EXHAUSTIVE_BOUND => {
            return Err(ApiError::new(
                StatusCode::BAD_REQUEST,
                "bound_too_large",
                format!("exhaustive bound is limited to {DEFAULT_EXHAUSTIVE_BOUND}"),
            ));
        }
        _ => {}
    }
    let report = tokio::task::spawn_blocking(move || trainyard::gadgets::verify(kind, req.mode))
        .await
        .expect("verify task")
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "verify_error", e))?;
    Ok(json_value(&report))
}

#[derive(Serialize)]
struct CatalogEntry {
    name: String,
    kind: GadgetKind,
    ascii: String,
    stamp: GadgetStamp,
    designs: Vec<&'static str>,
    contract: trainyard::gadgets::Contract,
}

pub fn catalog_json() -> Value {
    let entries: Vec<CatalogEntry> = GadgetKind::catalog()
        .into_iter()
        .map(|kind| {
            let s = stamp(kind).expect("catalog stamps build");
            CatalogEntry {
                name: kind.name(),
                kind,
                ascii: s.ascii(),
                designs: designs(kind).iter().map(|d| d.name).collect(),
                contract: contract(kind),
                stamp: s,
            }
        })
        .collect();
    json!(entries)
}

async fn gadgets_handler() -> Response {
    json_value(&catalog_json())
}

const PLACEHOLDER: &str = "<!doctype html><title>trainyard</title>\
<p>The player is not built. API: <code>POST /api/compile</code>, <code>POST /api/simulate</code>, \
<code>POST /api/verify</code>, <code>GET /api/gadgets</code>.</p>";

/// The API routes, with static files from `static_dir` when it exists.
pub fn router(static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/compile", post(compile_handler))
        .route("/api/simulate", post(simulate_handler))
        .route("/api/verify", post(verify_handler))
        .route("/api/gadgets", get(gadgets_handler));
    match static_dir.filter(|d| d.is_dir()) {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.route("/", get(|| async { Html(PLACEHOLDER) })),
    }
}

pub async fn serve(port: u16, static_dir: PathBuf) -> std::io::Result<()> {
    let addr = SocketAddr::from(([0, 0, 0, 0], port));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{addr}");
    axum::serve(listener, router(Some(static_dir))).await
}
