//! HTTP facade for the browser IDE.
//!
//! All routes live under `/api/v1`:
//!
//! * `GET /components` — tree of concepts, their enhancements and
//!   realizations, and facilities.
//! * `GET /source?id=` / `PUT /source?id=` — module text; writes go to a
//!   per-session scratch buffer (cookie `vcb_session`), never to disk.
//! * `POST /verify?id=` — runs the pipeline on the session's current text.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::{Query, State};
use axum::http::header::{CONTENT_TYPE, COOKIE, SET_COOKIE};
use axum::http::{HeaderMap, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::cors::{AllowOrigin, CorsLayer};
use uuid::Uuid;
use vcbench_core::lang::{parse, ModuleKind, SourceModule};
use vcbench_core::pipeline::{verify_source, Totals, VerifyOptions, VerifyReport};
use vcbench_core::theory::{Library, COMPONENT_SOURCES};

pub const SESSION_COOKIE: &str = "vcb_session";

#[derive(Clone, Debug)]
pub struct Config {
    /// Directory of `*.rsl` module files; `None` serves built-ins only.
    pub root: Option<PathBuf>,
    pub builtins: bool,
    pub verify: VerifyOptions,
    /// Wall-clock cap for one verification request.
    pub cap: Duration,
    /// Allowed browser origin; any origin when unset.
    pub origin: Option<String>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            root: None,
            builtins: true,
            verify: VerifyOptions::default(),
            cap: Duration::from_secs(60),
            origin: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Component {
    id: String,
    name: String,
    kind: Option<ModuleKind>,
    editable: bool,
    concept: Option<String>,
    enhancement: Option<String>,
    source: String,
}

impl Component {
    fn new(id: String, source: String, editable: bool) -> Component {
        let parsed: Option<SourceModule> = parse(&source).ok();
        Component {
            name: parsed.as_ref().map_or_else(|| id.clone(), |m| m.name.name.clone()),
            kind: parsed.as_ref().map(|m| m.kind),
            concept: parsed.as_ref().and_then(|m| m.concept.as_ref().map(|c| c.name.clone())),
            enhancement: parsed.as_ref().and_then(|m| m.enhancement.as_ref().map(|e| e.name.clone())),
            id,
            editable,
            source,
        }
    }
}

/// Node of the component tree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNode {
    pub id: String,
    pub name: String,
    /// `concept`, `enhancement`, `realization`, `facility`, or `invalid`
    /// for files that do not parse.
    pub kind: String,
    pub editable: bool,
    pub children: Vec<TreeNode>,
}

/// Built-in components plus the module files of the root directory.
#[derive(Clone, Debug)]
pub struct Workspace {
    components: Vec<Component>,
}

impl Workspace {
    pub fn load(root: Option<&Path>, builtins: bool) -> std::io::Result<Workspace> {
        let mut components = Vec::new();
        if builtins {
            for src in COMPONENT_SOURCES {
                let c = Component::new(String::new(), src.to_string(), false);
                components.push(Component { id: c.name.clone(), ..c });
            }
        }
        if let Some(dir) = root {
            let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "rsl"))
                .collect();
            files.sort();
            for f in files {
                let id = f.file_stem().unwrap_or_default().to_string_lossy().to_string();
                if components.iter().any(|c| c.id == id) {
                    continue;
                }
                components.push(Component::new(id, std::fs::read_to_string(&f)?, true));
            }
        }
        Ok(Workspace { components })
    }

    fn get(&self, id: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.id == id)
    }

    /// Concepts with their enhancements (realizations nested below those)
    /// and any realization naming the concept directly; then facilities
    /// and anything that fits nowhere.
    pub fn tree(&self) -> Vec<TreeNode> {
        let node = |c: &Component, children| TreeNode {
            id: c.id.clone(),
            name: c.name.clone(),
            kind: c.kind.map_or_else(|| "invalid".to_string(), |k| k.to_string()),
            editable: c.editable,
            children,
        };
        let mut placed = vec![false; self.components.len()];
        let mut roots = Vec::new();
        for (ci, concept) in self.components.iter().enumerate() {
            if concept.kind != Some(ModuleKind::Concept) {
                continue;
            }
            placed[ci] = true;
            let mut kids = Vec::new();
            for (ei, enh) in self.components.iter().enumerate() {
                if enh.kind != Some(ModuleKind::Enhancement) || enh.concept.as_deref() != Some(&concept.name) {
                    continue;
                }
                placed[ei] = true;
                let mut realizations = Vec::new();
                for (ri, r) in self.components.iter().enumerate() {
                    if r.kind == Some(ModuleKind::Realization)
                        && r.concept.as_deref() == Some(&concept.name)
                        && r.enhancement.as_deref() == Some(&enh.name)
                    {
                        placed[ri] = true;
                        realizations.push(node(r, vec![]));
                    }
                }
                kids.push(node(enh, realizations));
            }
            for (ri, r) in self.components.iter().enumerate() {
                if !placed[ri] && r.kind == Some(ModuleKind::Realization) && r.concept.as_deref() == Some(&concept.name) {
                    placed[ri] = true;
                    kids.push(node(r, vec![]));
                }
            }
            roots.push(node(concept, kids));
        }
        for (i, c) in self.components.iter().enumerate() {
            if !placed[i] {
                roots.push(node(c, vec![]));
            }
        }
        roots
    }
}

#[derive(Clone)]
pub struct AppState {
    workspace: Arc<Workspace>,
    library: Arc<Library>,
    scratch: Arc<Mutex<HashMap<String, BTreeMap<String, String>>>>,
    verify: VerifyOptions,
    cap: Duration,
}

impl AppState {
    pub fn new(config: &Config, library: Library) -> std::io::Result<AppState> {
        Ok(AppState {
            workspace: Arc::new(Workspace::load(config.root.as_deref(), config.builtins)?),
            library: Arc::new(library),
            scratch: Arc::default(),
            verify: config.verify.clone(),
            cap: config.cap,
        })
    }
}

#[derive(Debug, Deserialize)]
struct IdQuery {
    id: String,
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: String,
}

fn error(status: StatusCode, msg: impl Into<String>) -> Response {
    (status, Json(ErrorBody { error: msg.into() })).into_response()
}

/// The caller's session id, and whether it has to be issued.
fn session(headers: &HeaderMap) -> (String, bool) {
    let existing = headers
        .get_all(COOKIE)
        .iter()
        .filter_map(|v| v.to_str().ok())
        .flat_map(|v| v.split(';'))
        .filter_map(|kv| kv.trim().split_once('='))
        .find(|(k, v)| *k == SESSION_COOKIE && Uuid::parse_str(v).is_ok())
        .map(|(_, v)| v.to_string());
    match existing {
        Some(s) => (s, false),
        None => (Uuid::new_v4().to_string(), true),
    }
}

fn with_session(mut resp: Response, sid: &str, fresh: bool) -> Response {
    if fresh {
        let cookie = format!("{SESSION_COOKIE}={sid}; Path=/; HttpOnly; SameSite=Lax");
        if let Ok(v) = HeaderValue::from_str(&cookie) {
            resp.headers_mut().append(SET_COOKIE, v);
        }
    }
    resp
}

impl AppState {
    fn current_text(&self, sid: &str, c: &Component) -> String {
        let scratch = self.scratch.lock().expect("scratch lock");
        scratch
            .get(sid)
            .and_then(|m| m.get(&c.id))
            .cloned()
            .unwrap_or_else(|| c.source.clone())
    }
}

async fn components(State(st): State<AppState>) -> Json<Vec<TreeNode>> {
    Json(st.workspace.tree())
}

async fn get_source(State(st): State<AppState>, headers: HeaderMap, Query(q): Query<IdQuery>) -> Response {
    let (sid, fresh) = session(&headers);
    let Some(c) = st.workspace.get(&q.id) else {
        return error(StatusCode::NOT_FOUND, format!("no component `{}`", q.id));
    };
    let text = st.current_text(&sid, c);
    let resp = ([(CONTENT_TYPE, "text/plain; charset=utf-8")], text).into_response();
    with_session(resp, &sid, fresh)
}

async fn put_source(
    State(st): State<AppState>,
    headers: HeaderMap,
    Query(q): Query<IdQuery>,
    body: String,
) -> Response {
    let (sid, fresh) = session(&headers);
    let Some(c) = st.workspace.get(&q.id) else {
        return error(StatusCode::NOT_FOUND, format!("no component `{}`", q.id));
    };
    if !c.editable {
        return error(StatusCode::FORBIDDEN, format!("`{}` is a read-only built-in", q.id));
    }
    st.scratch
        .lock()
        .expect("scratch lock")
        .entry(sid.clone())
        .or_default()
        .insert(c.id.clone(), body);
    with_session(StatusCode::NO_CONTENT.into_response(), &sid, fresh)
}

async fn verify(State(st): State<AppState>, headers: HeaderMap, Query(q): Query<IdQuery>) -> Response {
    let (sid, fresh) = session(&headers);
    let Some(c) = st.workspace.get(&q.id) else {
        return error(StatusCode::NOT_FOUND, format!("no component `{}`", q.id));
    };
    let text = st.current_text(&sid, c);
    let name = c.name.clone();
    let (lib, opts) = (st.library.clone(), st.verify.clone());
    let job = tokio::task::spawn_blocking(move || verify_source(&text, &lib, &opts));
    let resp = match tokio::time::timeout(st.cap, job).await {
        Err(_) => error(StatusCode::GATEWAY_TIMEOUT, "verification exceeded the server time cap"),
        Ok(Err(e)) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
        Ok(Ok(Ok(report))) => Json(report).into_response(),
        Ok(Ok(Err(diagnostics))) => {
            let report = VerifyReport {
                module: name,
                diagnostics,
                vcs: Vec::new(),
                totals: Totals::default(),
            };
            (StatusCode::UNPROCESSABLE_ENTITY, Json(report)).into_response()
        }
    };
    with_session(resp, &sid, fresh)
}

pub fn router(state: AppState, origin: Option<&str>) -> Router {
    let cors = CorsLayer::new()
        .allow_methods([Method::GET, Method::PUT, Method::POST])
        .allow_headers([CONTENT_TYPE]);
    let cors = match origin.and_then(|o| HeaderValue::from_str(o).ok()) {
        Some(o) => cors.allow_origin(o).allow_credentials(true),
        None => cors.allow_origin(AllowOrigin::any()),
    };
    let api = Router::new()
        .route("/components", get(components))
        .route("/source", get(get_source).put(put_source))
        .route("/verify", post(verify));
    Router::new().nest("/api/v1", api).layer(cors).with_state(state)
}

/// Binds `addr` and serves until the process ends.
pub async fn serve(config: Config, library: Library, addr: &str) -> std::io::Result<()> {
    let state = AppState::new(&config, library)?;
    let app = router(state, config.origin.as_deref());
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, app).await
}
