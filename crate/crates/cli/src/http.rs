//! HTTP/JSON facade over a [`Workspace`].
//!
//! Every mutation takes the client's last `revision` and answers with the
//! new revision plus fresh geometry. Errors are `{error, message}` objects:
//! 400 for malformed requests, 404 for unknown documents, 409 for stale
//! revisions and 422 for domain errors (with the error code).

use std::sync::{Arc, RwLock};

use axum::extract::rejection::JsonRejection;
use axum::extract::{FromRequest, Path, Query, Request, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tkd_core::units::parse_quantity;
use tkd_core::{
    gather_constraints, query, render_svg, render_text, save_module, CellPath, CellValue,
    ConstraintSet, ItemBuffer, ItemRef, PropertySet, TableModule,
};

use crate::workspace::{DocumentSource, Geometry, Op, RowRange, Workspace, WorkspaceError};

pub type Shared = Arc<RwLock<Workspace>>;

pub struct ApiError(WorkspaceError);

impl From<WorkspaceError> for ApiError {
    fn from(e: WorkspaceError) -> Self {
        ApiError(e)
    }
}

impl From<tkd_core::Error> for ApiError {
    fn from(e: tkd_core::Error) -> Self {
        ApiError(WorkspaceError::Domain(e))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let (status, code) = match &self.0 {
            WorkspaceError::BadRequest(_) => (StatusCode::BAD_REQUEST, "bad-request"),
            WorkspaceError::UnknownDocument(_) => (StatusCode::NOT_FOUND, "unknown-document"),
            WorkspaceError::StaleRevision { .. } => (StatusCode::CONFLICT, "stale-revision"),
            WorkspaceError::Domain(e) => (StatusCode::UNPROCESSABLE_ENTITY, e.code()),
        };
        let mut body = json!({ "error": code, "message": self.0.to_string() });
        match &self.0 {
            WorkspaceError::Domain(e) => {
                if let Some(p) = e.position() {
                    body["position"] = json!({ "line": p.line, "column": p.column });
                }
            }
            WorkspaceError::StaleRevision { current, .. } => body["revision"] = json!(current),
            _ => {}
        }
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// JSON request body; malformed bodies are answered with 400.
pub struct Body<T>(pub T);

impl<S, T> FromRequest<S> for Body<T>
where
    Json<T>: FromRequest<S, Rejection = JsonRejection>,
    S: Send + Sync,
{
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(v)) => Ok(Body(v)),
            Err(e) => Err(WorkspaceError::BadRequest(e.body_text()).into()),
        }
    }
}

pub fn router(workspace: Workspace) -> Router {
    router_with(Arc::new(RwLock::new(workspace)))
}

pub fn router_with(state: Shared) -> Router {
    Router::new()
        .route("/doc", post(create_doc))
        .route("/doc/{id}", get(get_doc))
        .route("/doc/{id}/cell", post(set_cell))
        .route("/doc/{id}/insert-at-point", post(insert_at_point))
        .route("/doc/{id}/op", post(apply_op))
        .route("/doc/{id}/render", get(render))
        .route("/doc/{id}/save", get(save))
        .route("/doc/{id}/paste-buffer", post(paste_buffer))
        .route("/doc/{id}/copy-buffer", post(copy_buffer))
        .route("/buffer", get(get_buffer).put(put_buffer))
        .route("/catalogs/query", get(catalog_query))
        .with_state(state)
}

fn read(state: &Shared) -> std::sync::RwLockReadGuard<'_, Workspace> {
    state.read().unwrap_or_else(|p| p.into_inner())
}

fn write(state: &Shared) -> std::sync::RwLockWriteGuard<'_, Workspace> {
    state.write().unwrap_or_else(|p| p.into_inner())
}

#[derive(Serialize)]
struct DocView<'a> {
    id: &'a str,
    revision: u64,
    module: &'a TableModule,
    geometry: Geometry,
}

#[derive(Serialize)]
struct Mutation {
    revision: u64,
    result: Value,
    geometry: Geometry,
}

async fn create_doc(
    State(state): State<Shared>,
    Body(source): Body<DocumentSource>,
) -> ApiResult<Response> {
    let mut ws = write(&state);
    let id = ws.load(&source)?;
    let doc = ws.get(&id)?;
    let view = DocView {
        id: &id,
        revision: doc.revision,
        module: &doc.module,
        geometry: Geometry::of(&doc.module, &ws.metrics),
    };
    Ok((StatusCode::CREATED, Json(view)).into_response())
}

async fn get_doc(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<Response> {
    let ws = read(&state);
    let doc = ws.get(&id)?;
    let view = DocView {
        id: &id,
        revision: doc.revision,
        module: &doc.module,
        geometry: Geometry::of(&doc.module, &ws.metrics),
    };
    Ok(Json(view).into_response())
}

fn mutate(state: &Shared, id: &str, revision: u64, op: &Op) -> ApiResult<Json<Mutation>> {
    let mut ws = write(state);
    let (revision, result) = ws.apply(id, revision, op)?;
    let geometry = Geometry::of(&ws.get(id)?.module, &ws.metrics);
    Ok(Json(Mutation {
        revision,
        result,
        geometry,
    }))
}

#[derive(Deserialize)]
struct CellRequest {
    revision: u64,
    path: CellPath,
    value: CellValue,
}

async fn set_cell(
    State(state): State<Shared>,
    Path(id): Path<String>,
    Body(req): Body<CellRequest>,
) -> ApiResult<Json<Mutation>> {
    let op = Op::SetCell {
        path: req.path,
        value: req.value,
    };
    mutate(&state, &id, req.revision, &op)
}

#[derive(Deserialize)]
struct PointRequest {
    revision: u64,
    x: f64,
    y: f64,
}

async fn insert_at_point(
    State(state): State<Shared>,
    Path(id): Path<String>,
    Body(req): Body<PointRequest>,
) -> ApiResult<Json<Mutation>> {
    mutate(
        &state,
        &id,
        req.revision,
        &Op::InsertAtPoint { x: req.x, y: req.y },
    )
}

#[derive(Deserialize)]
struct OpRequest {
    revision: u64,
    #[serde(flatten)]
    op: Op,
}

async fn apply_op(
    State(state): State<Shared>,
    Path(id): Path<String>,
    Body(req): Body<OpRequest>,
) -> ApiResult<Json<Mutation>> {
    mutate(&state, &id, req.revision, &req.op)
}

#[derive(Deserialize)]
struct PasteRequest {
    revision: u64,
    at: usize,
}

async fn paste_buffer(
    State(state): State<Shared>,
    Path(id): Path<String>,
    Body(req): Body<PasteRequest>,
) -> ApiResult<Json<Mutation>> {
    mutate(&state, &id, req.revision, &Op::PasteBuffer { at: req.at })
}

async fn copy_buffer(
    State(state): State<Shared>,
    Path(id): Path<String>,
    Body(rows): Body<RowRange>,
) -> ApiResult<Json<ItemBuffer>> {
    let mut ws = write(&state);
    Ok(Json(ws.copy_buffer(&id, rows)?.clone()))
}

async fn get_buffer(State(state): State<Shared>) -> Json<ItemBuffer> {
    Json(read(&state).buffer.clone())
}

async fn put_buffer(
    State(state): State<Shared>,
    Body(buffer): Body<ItemBuffer>,
) -> ApiResult<StatusCode> {
    for row in &buffer.rows {
        for value in row.values() {
            value.check()?;
        }
    }
    write(&state).buffer = buffer;
    Ok(StatusCode::NO_CONTENT)
}

#[derive(Deserialize)]
struct RenderQuery {
    fmt: Option<String>,
}

async fn render(
    State(state): State<Shared>,
    Path(id): Path<String>,
    Query(q): Query<RenderQuery>,
) -> ApiResult<Response> {
    let ws = read(&state);
    let module = &ws.get(&id)?.module;
    let (body, mime) = match q.fmt.as_deref().unwrap_or("svg") {
        "svg" => (render_svg(module, &ws.metrics), "image/svg+xml"),
        "text" => (
            render_text(module, &ws.metrics),
            "text/plain; charset=utf-8",
        ),
        other => {
            return Err(WorkspaceError::BadRequest(format!("unknown format {other:?}")).into())
        }
    };
    Ok(([(header::CONTENT_TYPE, mime)], body).into_response())
}

async fn save(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<Response> {
    let ws = read(&state);
    let text = save_module(&ws.get(&id)?.module);
    Ok(([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], text).into_response())
}

#[derive(Deserialize)]
struct CatalogQuery {
    class: Option<String>,
    p: Option<String>,
    t: Option<String>,
    dn: Option<u32>,
    doc: Option<String>,
    subject: Option<String>,
}

#[derive(Serialize)]
struct CatalogHit {
    item: ItemRef,
    catalog: String,
    description: String,
    properties: PropertySet,
}

/// Explicit `p`/`t`/`dn` override what the subject's row supplies.
async fn catalog_query(
    State(state): State<Shared>,
    Query(q): Query<CatalogQuery>,
) -> ApiResult<Json<Value>> {
    let ws = read(&state);
    let mut constraints = ConstraintSet::default();
    let mut class = q.class.clone();
    if let Some(subject) = &q.subject {
        let doc = q
            .doc
            .as_deref()
            .ok_or_else(|| WorkspaceError::BadRequest("subject needs doc".into()))?;
        let module = &ws.get(doc)?.module;
        let path: CellPath = subject.parse()?;
        constraints = gather_constraints(module, &path)?;
        if class.is_none() {
            class = module.leaf_at(&path)?.0.object_class.clone();
        }
    }
    if let Some(p) = &q.p {
        constraints.pressure = Some(parse_quantity(p)?);
    }
    if let Some(t) = &q.t {
        constraints.temperature = Some(parse_quantity(t)?);
    }
    if q.dn.is_some() {
        constraints.dn = q.dn;
    }
    let class = class.ok_or_else(|| WorkspaceError::BadRequest("no object class given".into()))?;
    let mut hits = Vec::new();
    for r in query(&ws.catalogs, &class, &constraints)? {
        let (entry, item) = ws.catalogs.get(r).expect("query returns valid refs");
        hits.push(CatalogHit {
            item: r,
            catalog: entry.name.clone(),
            description: tkd_core::catalog::describe_item(&entry.catalog, item),
            properties: tkd_core::apply_rules(&entry.rules, &entry.catalog, item)?,
        });
    }
    Ok(Json(
        json!({ "class": class, "constraints": constraints, "items": hits }),
    ))
}
