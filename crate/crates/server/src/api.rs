//! HTTP routes over a [`SessionStore`].
//!
//! Every mutating route maps onto one session [`Command`]; the store
//! serializes commands per session and persists each resulting log entry
//! before the response is sent. Core calls may block on backends, so they
//! run on the blocking pool.

use std::sync::Arc;

use agora_core::ids::{ImageId, Token};
use agora_core::model::{Category, Mode, RankingRecord, SurveyResponse};
use agora_core::session::{Command, Session, SessionStore, Studio};
use agora_core::Error;
use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value};

pub const TOPICS: &str = include_str!("../../../fixtures/topics.json");

#[derive(Clone)]
pub struct AppState {
    pub studio: Arc<Studio>,
    pub store: Arc<SessionStore>,
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(|| async { "ok" }))
        .route("/topics", get(topics))
        .route("/images/{hash}", get(image))
        .route("/sessions", post(create))
        .route("/sessions/import", post(import))
        .route("/sessions/{id}", get(session))
        .route("/sessions/{id}/export", get(export))
        .route("/sessions/{id}/stage/{mode}/run", post(run_stage))
        .route("/sessions/{id}/interpretations/{iid}/expand", post(expand))
        .route("/sessions/{id}/interpretations/{iid}/accept", post(accept))
        .route("/sessions/{id}/suggestions/{sid}/select", post(select))
        .route("/sessions/{id}/workspace/open", post(open_workspace))
        .route("/sessions/{id}/workspace/generate", post(generate))
        .route("/sessions/{id}/collage/init", post(collage_init))
        .route("/sessions/{id}/collage/replace", post(collage_replace))
        .route("/sessions/{id}/design-statement", post(design_statement))
        .route("/sessions/{id}/survey", post(survey))
        .route("/sessions/{id}/rankings", post(rankings))
        .fallback(fallback)
        .with_state(state)
}

/// An error body: `{"error": {"code", "message", ...details}}`.
pub struct ApiError(pub Error);

pub fn status_of(e: &Error) -> StatusCode {
    match e {
        Error::InvalidRequest(_) => StatusCode::BAD_REQUEST,
        Error::InvalidInput(_) => StatusCode::UNPROCESSABLE_ENTITY,
        Error::NotFound(_) | Error::PageMissing(_) => StatusCode::NOT_FOUND,
        Error::StageViolation(_) | Error::NotExpanded(_) | Error::CollageNotInitialized | Error::GateNotElapsed { .. } => {
            StatusCode::CONFLICT
        }
        Error::GatewayUnavailable(_)
        | Error::FixtureMissing { .. }
        | Error::StructuredParse(_)
        | Error::EmptyResult(_)
        | Error::MalformedStats(_)
        | Error::GenerationShortfall { .. }
        | Error::InterpretationFailed(_)
        | Error::PartialRewrite { .. } => StatusCode::BAD_GATEWAY,
        Error::Storage(_) => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let e = self.0;
        let mut body = json!({"code": e.code(), "message": e.to_string()});
        match &e {
            Error::GateNotElapsed { elapsed_ms, required_ms } => {
                body["elapsed_ms"] = json!(elapsed_ms);
                body["required_ms"] = json!(required_ms);
            }
            Error::GenerationShortfall { wanted, got } => {
                body["wanted"] = json!(wanted);
                body["got"] = json!(got);
            }
            Error::PartialRewrite { succeeded } => body["succeeded"] = json!(succeeded),
            _ => {}
        }
        let status = status_of(&e);
        if status.is_server_error() {
            log::error!("{}: {e}", e.code());
        }
        (status, Json(json!({ "error": body }))).into_response()
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        ApiError(e)
    }
}

type ApiResult<T> = Result<T, ApiError>;

async fn blocking<T, F>(f: F) -> ApiResult<T>
where
    F: FnOnce() -> Result<T, Error> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError(Error::Storage(format!("worker failed: {e}"))))?
        .map_err(ApiError)
}

/// Runs one command and answers with the new entry's sequence number, the
/// participant view of the session, and `extra(session)` merged in.
async fn command(
    st: AppState,
    id: String,
    cmd: Command,
    extra: impl FnOnce(&Session) -> Value + Send + 'static,
) -> ApiResult<Json<Value>> {
    blocking(move || {
        let entry = st.store.execute(&st.studio, &id, cmd)?;
        st.store.read(&id, |s| {
            let mut body = json!({
                "seq": entry.map(|e| e.seq),
                "session": s.view(),
            });
            if let (Value::Object(b), Value::Object(x)) = (&mut body, extra(s)) {
                b.extend(x);
            }
            body
        })
    })
    .await
    .map(Json)
}

fn no_extra(_: &Session) -> Value {
    json!({})
}

/// Body-less or body-optional routes accept an empty request.
fn parse_or_default<T: for<'de> Deserialize<'de> + Default>(body: &Bytes) -> ApiResult<T> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(T::default());
    }
    parse(body)
}

fn parse<T: for<'de> Deserialize<'de>>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError(Error::InvalidRequest(format!("bad request body: {e}"))))
}

async fn topics() -> impl IntoResponse {
    ([(header::CONTENT_TYPE, "application/json")], TOPICS)
}

async fn image(State(st): State<AppState>, Path(hash): Path<String>) -> ApiResult<Response> {
    let hash = hash.strip_suffix(".png").unwrap_or(&hash).to_string();
    if !ImageId::is_well_formed(&hash) {
        return Err(ApiError(Error::InvalidRequest(format!("{hash:?} is not an image hash"))));
    }
    let bytes = st
        .studio
        .gateways
        .store
        .get(&ImageId(hash.clone()))
        .ok_or_else(|| ApiError(Error::NotFound(format!("image {hash}"))))?;
    Ok((
        [
            (header::CONTENT_TYPE, "image/png"),
            (header::CACHE_CONTROL, "public, max-age=31536000, immutable"),
        ],
        bytes,
    )
        .into_response())
}

#[derive(Deserialize)]
struct CreateBody {
    prompt: String,
    #[serde(default)]
    category: Option<Category>,
    #[serde(default)]
    mode_order: Option<Vec<Mode>>,
    #[serde(default)]
    seed: Option<u64>,
}

async fn create(State(st): State<AppState>, body: Bytes) -> ApiResult<(StatusCode, Json<Value>)> {
    let b: CreateBody = parse(&body)?;
    let view = blocking(move || {
        let s = st.store.create(
            &st.studio,
            &b.prompt,
            b.category.unwrap_or(Category::Custom),
            b.mode_order,
            b.seed,
        )?;
        Ok(s.view())
    })
    .await?;
    Ok((StatusCode::CREATED, Json(json!({ "session": view }))))
}

async fn import(State(st): State<AppState>, body: String) -> ApiResult<(StatusCode, Json<Value>)> {
    let view = blocking(move || {
        let s = Session::import(&body)?;
        let view = s.view();
        st.store.insert(s)?;
        Ok(view)
    })
    .await?;
    Ok((StatusCode::CREATED, Json(json!({ "session": view }))))
}

async fn session(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    blocking(move || st.store.read(&id, |s| json!({ "session": s.view() })))
        .await
        .map(Json)
}

async fn export(State(st): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    let doc = blocking(move || st.store.read(&id, Session::export)?).await?;
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], doc).into_response())
}

#[derive(Deserialize, Default)]
struct RunBody {
    #[serde(default)]
    prompt: Option<String>,
}

async fn run_stage(
    State(st): State<AppState>,
    Path((id, mode)): Path<(String, String)>,
    body: Bytes,
) -> ApiResult<Json<Value>> {
    let mode: Mode = mode.parse()?;
    let b: RunBody = parse_or_default(&body)?;
    command(st, id, Command::RunStage { mode, prompt: b.prompt }, |s| {
        json!({ "run": s.view().runs.pop() })
    })
    .await
}

async fn expand(State(st): State<AppState>, Path((id, iid)): Path<(String, String)>) -> ApiResult<Json<Value>> {
    let token = Token(iid);
    let t = token.clone();
    command(st, id, Command::Expand { interpretation_id: token }, move |s| {
        json!({ "expansion": s.expansion(&t).ok() })
    })
    .await
}

async fn accept(State(st): State<AppState>, Path((id, iid)): Path<(String, String)>) -> ApiResult<Json<Value>> {
    command(st, id, Command::Accept { interpretation_id: Token(iid) }, |s| {
        json!({ "workspace": s.active_workspace() })
    })
    .await
}

async fn select(State(st): State<AppState>, Path((id, sid)): Path<(String, String)>) -> ApiResult<Json<Value>> {
    command(st, id, Command::SelectSuggestion { suggestion_id: Token(sid) }, |s| {
        json!({ "workspace": s.active_workspace() })
    })
    .await
}

#[derive(Deserialize)]
struct TextBody {
    text: String,
}

async fn open_workspace(State(st): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<Value>> {
    let b: TextBody = parse(&body)?;
    command(st, id, Command::OpenWorkspace { text: b.text }, |s| {
        json!({ "workspace": s.active_workspace() })
    })
    .await
}

async fn generate(State(st): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<Value>> {
    let b: TextBody = parse(&body)?;
    command(st, id, Command::WorkspaceGenerate { text: b.text }, |s| {
        json!({ "workspace": s.active_workspace() })
    })
    .await
}

#[derive(Deserialize)]
struct InitBody {
    images: Vec<ImageId>,
}

async fn collage_init(State(st): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<Value>> {
    let b: InitBody = parse(&body)?;
    command(st, id, Command::InitCollage { images: b.images }, no_extra).await
}

#[derive(Deserialize)]
struct ReplaceBody {
    slot: usize,
    image: ImageId,
}

async fn collage_replace(State(st): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<Value>> {
    let b: ReplaceBody = parse(&body)?;
    command(st, id, Command::ReplaceImage { slot: b.slot, image: b.image }, no_extra).await
}

async fn design_statement(State(st): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<Value>> {
    let b: TextBody = parse(&body)?;
    command(st, id, Command::DesignStatement { text: b.text }, no_extra).await
}

async fn survey(State(st): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<Value>> {
    let survey: SurveyResponse = parse(&body)?;
    command(st, id, Command::Survey { survey }, no_extra).await
}

async fn rankings(State(st): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<Value>> {
    let ranking: RankingRecord = parse(&body)?;
    command(st, id, Command::Rankings { ranking }, no_extra).await
}

/// Unknown routes answer in the same error shape as everything else.
async fn fallback() -> ApiError {
    ApiError(Error::NotFound("no such route".into()))
}
