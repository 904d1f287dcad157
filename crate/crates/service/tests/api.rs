use std::path::{Path, PathBuf};
use std::time::Duration;

use axum::body::Body;
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;
use vcbench_core::theory::Library;
use vcbench_service::{router, AppState, Config, TreeNode, SESSION_COOKIE};

fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn app_with(config: Config) -> Router {
    let state = AppState::new(&config, Library::standard()).expect("workspace loads");
    router(state, config.origin.as_deref())
}

fn app() -> Router {
    app_with(Config {
        root: Some(corpus()),
        ..Config::default()
    })
}

struct Reply {
    status: StatusCode,
    cookie: Option<String>,
    body: Vec<u8>,
}

impl Reply {
    fn json(&self) -> Value {
        serde_json::from_slice(&self.body).unwrap_or_else(|e| panic!("{e}: {}", self.text()))
    }

    fn text(&self) -> String {
        String::from_utf8_lossy(&self.body).into_owned()
    }
}

async fn send(app: &Router, method: Method, uri: &str, cookie: Option<&str>, body: &str) -> Reply {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(c) = cookie {
        req = req.header(header::COOKIE, c);
    }
    let resp = app
        .clone()
        .oneshot(req.body(Body::from(body.to_string())).unwrap())
        .await
        .unwrap();
    let status = resp.status();
    let cookie = resp
        .headers()
        .get(header::SET_COOKIE)
        .map(|v| v.to_str().unwrap().split(';').next().unwrap().to_string());
    let body = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    Reply { status, cookie, body }
}

async fn get(app: &Router, uri: &str, cookie: Option<&str>) -> Reply {
    send(app, Method::GET, uri, cookie, "").await
}

async fn put(app: &Router, uri: &str, cookie: Option<&str>, body: &str) -> Reply {
    send(app, Method::PUT, uri, cookie, body).await
}

async fn verify(app: &Router, id: &str, cookie: Option<&str>) -> Reply {
    send(app, Method::POST, &format!("/api/v1/verify?id={id}"), cookie, "").await
}

fn statuses(report: &Value) -> Vec<String> {
    report["vcs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v["status"].as_str().unwrap().to_string())
        .collect()
}

fn without_ms(mut report: Value) -> Value {
    for v in report["vcs"].as_array_mut().unwrap() {
        v["ms"] = 0.into();
    }
    report["totals"]["ms"] = 0.into();
    report
}

fn tree(reply: &Reply) -> Vec<TreeNode> {
    serde_json::from_slice(&reply.body).unwrap()
}

fn find<'a>(nodes: &'a [TreeNode], id: &str) -> Option<&'a TreeNode> {
    nodes
        .iter()
        .find_map(|n| if n.id == id { Some(n) } else { find(&n.children, id) })
}

#[tokio::test]
async fn builtins_only_tree() {
    let app = app_with(Config::default());
    let r = get(&app, "/api/v1/components", None).await;
    assert_eq!(r.status, StatusCode::OK);
    let t = tree(&r);
    let ids: Vec<&str> = t.iter().map(|n| n.id.as_str()).collect();
    assert_eq!(ids, ["Integer_Template", "Preemptable_Queue_Template", "Stack_Template"]);
    assert!(t.iter().all(|n| n.kind == "concept" && !n.editable));
}

#[tokio::test]
async fn corpus_tree_nests_invert_under_the_queue() {
    let t = tree(&get(&app(), "/api/v1/components", None).await);
    let queue = find(&t, "Preemptable_Queue_Template").unwrap();
    let invert = queue.children.iter().find(|n| n.name == "Invert").expect("Invert under the queue");
    assert_eq!(invert.kind, "enhancement");
    let realizations: Vec<&str> = invert.children.iter().map(|n| n.id.as_str()).collect();
    assert_eq!(realizations, ["invert_faulty", "invert_fixed"]);
    let exchange = find(&t, "exchange_missing_requires").unwrap();
    assert_eq!((exchange.kind.as_str(), exchange.editable), ("facility", true));
}

#[tokio::test]
async fn empty_root_without_builtins() {
    let dir = tempfile::tempdir().unwrap();
    let app = app_with(Config {
        root: Some(dir.path().to_path_buf()),
        builtins: false,
        ..Config::default()
    });
    let r = get(&app, "/api/v1/components", None).await;
    assert_eq!(r.status, StatusCode::OK);
    assert!(tree(&r).is_empty());
}

#[tokio::test]
async fn unparseable_file_is_listed_as_invalid() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("junk.rsl"), "this is not a module").unwrap();
    let app = app_with(Config {
        root: Some(dir.path().to_path_buf()),
        builtins: false,
        ..Config::default()
    });
    let t = tree(&get(&app, "/api/v1/components", None).await);
    assert_eq!(t.len(), 1);
    assert_eq!((t[0].id.as_str(), t[0].kind.as_str()), ("junk", "invalid"));
}

#[tokio::test]
async fn source_round_trips_per_session() {
    let app = app();
    let on_disk = std::fs::read_to_string(corpus().join("invert_faulty.rsl")).unwrap();
    let r = get(&app, "/api/v1/source?id=invert_faulty", None).await;
    assert_eq!(r.status, StatusCode::OK);
    assert_eq!(r.text(), on_disk);
    let cookie = r.cookie.expect("a session is issued");
    assert!(cookie.starts_with(&format!("{SESSION_COOKIE}=")));

    let edited = "edited text,\n kept \u{2014} byte for byte\r\n";
    let w = put(&app, "/api/v1/source?id=invert_faulty", Some(&cookie), edited).await;
    assert_eq!(w.status, StatusCode::NO_CONTENT);
    assert_eq!(w.cookie, None);
    assert_eq!(get(&app, "/api/v1/source?id=invert_faulty", Some(&cookie)).await.text(), edited);

    // another session and the file itself are untouched
    assert_eq!(get(&app, "/api/v1/source?id=invert_faulty", None).await.text(), on_disk);
    assert_eq!(std::fs::read_to_string(corpus().join("invert_faulty.rsl")).unwrap(), on_disk);
}

#[tokio::test]
async fn builtins_are_read_only() {
    let app = app();
    let r = get(&app, "/api/v1/source?id=Integer_Template", None).await;
    assert_eq!(r.status, StatusCode::OK);
    assert!(r.text().contains("Integer_Template"));
    let w = put(&app, "/api/v1/source?id=Integer_Template", None, "Concept X;\nend X;\n").await;
    assert_eq!(w.status, StatusCode::FORBIDDEN);
    assert!(w.json()["error"].as_str().unwrap().contains("read-only"));
}

#[tokio::test]
async fn unknown_ids_are_404() {
    let app = app();
    assert_eq!(get(&app, "/api/v1/source?id=nope", None).await.status, StatusCode::NOT_FOUND);
    assert_eq!(put(&app, "/api/v1/source?id=nope", None, "x").await.status, StatusCode::NOT_FOUND);
    assert_eq!(verify(&app, "nope", None).await.status, StatusCode::NOT_FOUND);
    assert_eq!(get(&app, "/api/v1/nothing", None).await.status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn exchange_then_fixed_text() {
    let app = app();
    let r = verify(&app, "exchange_missing_requires", None).await;
    assert_eq!(r.status, StatusCode::OK);
    let report = r.json();
    assert_eq!(report["module"], "Int_Swap_Example_Fac");
    assert_eq!(statuses(&report), ["unprovable", "unprovable", "proved", "proved", "proved", "proved", "proved", "proved"]);
    assert_eq!(report["vcs"][0]["line"], 7);
    let cookie = r.cookie.unwrap();

    let fixed = std::fs::read_to_string(corpus().join("exchange_fixed.rsl")).unwrap();
    put(&app, "/api/v1/source?id=exchange_missing_requires", Some(&cookie), &fixed).await;
    let report = verify(&app, "exchange_missing_requires", Some(&cookie)).await.json();
    assert_eq!(statuses(&report), vec!["proved"; 8]);
    assert_eq!(report["totals"]["proved"], 8);
}

#[tokio::test]
async fn unparseable_text_is_422_with_lines() {
    let app = app();
    let cookie = get(&app, "/api/v1/source?id=invert_fixed", None).await.cookie.unwrap();
    put(&app, "/api/v1/source?id=invert_fixed", Some(&cookie), "Realization R for X of Y;\n    Operation (;\nend R;\n").await;
    let r = verify(&app, "invert_fixed", Some(&cookie)).await;
    assert_eq!(r.status, StatusCode::UNPROCESSABLE_ENTITY);
    let report = r.json();
    assert_eq!(report["diagnostics"][0]["line"], 2);
    assert_eq!(report["diagnostics"][0]["severity"], "error");
    assert_eq!(report["vcs"].as_array().unwrap().len(), 0);
}

#[tokio::test]
async fn flip_stage_two_clears_pop_only() {
    let report = verify(&app(), "flip_onto_stage2", None).await.json();
    let vc = |id: &str| {
        report["vcs"]
            .as_array()
            .unwrap()
            .iter()
            .find(|v| v["id"] == id)
            .cloned()
            .unwrap()
    };
    assert!(vc("1_1")["description"].as_str().unwrap().contains("Pop"));
    assert_eq!(vc("1_1")["status"], "proved");
    assert_eq!(vc("2_1")["kind"], "procedure-ensures");
    assert_eq!(vc("2_1")["status"], "unprovable");
}

#[tokio::test]
async fn verification_is_stateless() {
    let app = app();
    let a = without_ms(verify(&app, "copy_queue_realiz", None).await.json());
    let b = without_ms(verify(&app, "copy_queue_realiz", None).await.json());
    assert_eq!(a, b);
    assert_eq!(a["totals"]["vcs"], 15);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn concurrent_sessions_keep_their_own_text() {
    let app = app();
    let fixed = std::fs::read_to_string(corpus().join("exchange_fixed.rsl")).unwrap();
    let faulty = std::fs::read_to_string(corpus().join("exchange_missing_requires.rsl")).unwrap();
    let mut sessions = Vec::new();
    for i in 0..8 {
        let cookie = get(&app, "/api/v1/source?id=exchange_missing_requires", None).await.cookie.unwrap();
        let text = if i % 2 == 0 { &fixed } else { &faulty };
        put(&app, "/api/v1/source?id=exchange_missing_requires", Some(&cookie), text).await;
        sessions.push((cookie, i % 2 == 0));
    }
    let runs = sessions.iter().map(|(cookie, fixed)| {
        let (app, cookie, fixed) = (app.clone(), cookie.clone(), *fixed);
        tokio::spawn(async move {
            let r = verify(&app, "exchange_missing_requires", Some(&cookie)).await.json();
            (fixed, r["totals"]["unprovable"].as_u64().unwrap())
        })
    });
    for run in runs.collect::<Vec<_>>() {
        let (fixed, unprovable) = run.await.unwrap();
        assert_eq!(unprovable, if fixed { 0 } else { 2 });
    }
}

#[tokio::test]
async fn verification_cap_gives_504() {
    let app = app_with(Config {
        root: Some(corpus()),
        cap: Duration::ZERO,
        ..Config::default()
    });
    let r = verify(&app, "copy_queue_realiz", None).await;
    assert_eq!(r.status, StatusCode::GATEWAY_TIMEOUT);
}

#[tokio::test]
async fn cors_answers_the_ide_origin() {
    let app = app_with(Config {
        origin: Some("http://localhost:5173".into()),
        ..Config::default()
    });
    let req = Request::builder()
        .method(Method::OPTIONS)
        .uri("/api/v1/verify?id=x")
        .header(header::ORIGIN, "http://localhost:5173")
        .header(header::ACCESS_CONTROL_REQUEST_METHOD, "POST")
        .body(Body::empty())
        .unwrap();
    let resp = app.oneshot(req).await.unwrap();
    let allowed = resp.headers().get(header::ACCESS_CONTROL_ALLOW_ORIGIN).unwrap();
    assert_eq!(allowed, "http://localhost:5173");
    assert_eq!(resp.headers().get(header::ACCESS_CONTROL_ALLOW_CREDENTIALS).unwrap(), "true");
}

#[tokio::test]
async fn malformed_cookie_gets_a_fresh_session() {
    let app = app();
    let r = get(&app, "/api/v1/source?id=invert_fixed", Some(&format!("{SESSION_COOKIE}=not-a-uuid"))).await;
    assert_eq!(r.status, StatusCode::OK);
    assert!(r.cookie.is_some());
}
