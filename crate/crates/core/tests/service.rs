mod common;

use std::io::{Read, Write};
use std::net::TcpStream;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use common::*;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use sitelens::service::{router, serve, ServiceState};
use tower::ServiceExt;

fn app() -> Router {
    router(ServiceState::load(fixture_dir()).unwrap())
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let request = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
        .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

fn ids_of(list: &Value) -> Vec<String> {
    list.as_array().unwrap().iter().map(|s| s["id"].as_str().or(s["site_id"].as_str()).unwrap().to_owned()).collect()
}

#[tokio::test]
async fn health_reports_counts_from_fixture_files() {
    let (status, body) = call(&app(), "GET", "/api/health", None).await;
    assert_eq!(status, StatusCode::OK);
    let data_rows = |file: &str| std::fs::read_to_string(fixture_dir().join(file)).unwrap().lines().skip(1).filter(|l| !l.is_empty()).count();
    assert_eq!(body["data"]["sites"], data_rows("sites.csv"));
    assert_eq!(body["data"]["factors"], data_rows("factors.csv"));
    assert_eq!(body["data"]["values"], data_rows("series.csv"));
    assert_eq!(body["stamp"], body["data"]["stamp"]);
    assert_eq!(body["stamp"].as_str().unwrap().len(), 16);
}

#[tokio::test]
async fn site_navigation() {
    let app = app();
    let (_, body) = call(&app, "GET", "/api/sites/NRW/children", None).await;
    assert_eq!(ids_of(&body["data"]), ["05558", "05754", "05974", "05978"]);
    let (_, body) = call(&app, "GET", "/api/sites/05754/parent", None).await;
    assert_eq!(body["data"]["id"], "NRW");
    let (_, body) = call(&app, "GET", "/api/sites/DE/parent", None).await;
    assert_eq!(body["data"], Value::Null);
    let (_, body) = call(&app, "GET", "/api/sites/05754012001/path", None).await;
    assert_eq!(ids_of(&body["data"]), ["DE", "NRW", "05754", "05754012", "05754012001"]);
    let (_, body) = call(&app, "GET", "/api/sites/05754", None).await;
    assert_eq!(body["data"]["level"], "county");
    assert_eq!(body["data"]["child_count"], 3);
    let (_, body) = call(&app, "GET", "/api/sites?level=district&parent=NRW", None).await;
    assert_eq!(body["data"].as_array().unwrap().len(), 3);
    let (_, body) = call(&app, "GET", "/api/sites", None).await;
    assert_eq!(body["data"].as_array().unwrap().len(), 13);
    let (_, body) = call(&app, "GET", "/api/levels", None).await;
    assert_eq!(body["data"][2], json!({"ordinal": 2, "name": "county", "site_count": 4}));
}

#[tokio::test]
async fn error_codes() {
    let app = app();
    let cases = [
        ("GET", "/api/sites/unknown", None, StatusCode::NOT_FOUND, "unknown_site"),
        ("GET", "/api/what?site=NRW&factors=nope&t=2016-01", None, StatusCode::NOT_FOUND, "unknown_factor"),
        ("GET", "/api/sites?level=planet", None, StatusCode::NOT_FOUND, "unknown_level"),
        ("GET", "/api/what?site=NRW&factors=population&t=2016-13", None, StatusCode::BAD_REQUEST, "bad_time"),
        ("GET", "/api/choropleth?parent=05754012001&factor=population", None, StatusCode::UNPROCESSABLE_ENTITY, "childless_parent"),
        ("GET", "/api/choropleth?parent=NRW&factor=population&k=12", None, StatusCode::BAD_REQUEST, "bad_request"),
        ("GET", "/api/series?site=02&factor=unemployment_rate&from=2016-07&to=2016-05", None, StatusCode::BAD_REQUEST, "inverted_range"),
        ("GET", "/api/geometries", None, StatusCode::BAD_REQUEST, "bad_request"),
        ("GET", "/api/nothing", None, StatusCode::NOT_FOUND, "not_found"),
        ("POST", "/api/query/when", Some(json!({"site": "02", "factor": "unemployment_rate", "condition": "~7"})), StatusCode::BAD_REQUEST, "bad_predicate"),
        ("POST", "/api/query/where", Some(json!({"level": "county", "t": "2016-01", "predicates": [{"factor": "population", "op": "between", "value": [5, 1]}]})), StatusCode::BAD_REQUEST, "bad_predicate"),
        ("POST", "/api/checklist", Some(json!({"sites": ["05978"], "criteria": [{"factor": "population", "weight": -1, "plus_threshold": 1, "minus_threshold": 0, "direction": "higher_is_better"}]})), StatusCode::BAD_REQUEST, "bad_criteria"),
    ];
    for (method, uri, body, status, code) in cases {
        let (got, body) = call(&app, method, uri, body).await;
        assert_eq!((got, body["error"]["code"].as_str()), (status, Some(code)), "{uri}");
        assert!(!body["error"]["message"].as_str().unwrap().is_empty());
    }
}

#[tokio::test]
async fn malformed_body_is_bad_request() {
    let app = app();
    let request = Request::post("/api/query/where").body(Body::from("{level: county")).unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    assert_eq!(response.status(), StatusCode::BAD_REQUEST);
    let (status, body) = call(&app, "POST", "/api/query/where", Some(json!({"scope": "NRW"}))).await;
    assert_eq!((status, body["error"]["code"].as_str()), (StatusCode::BAD_REQUEST, Some("bad_request")));
}

#[tokio::test]
async fn where_ranking_is_headed_by_unna() {
    let body = json!({"level": "county", "scope": "NRW", "t": "2016-01", "rank_by": [["population", "desc"]]});
    let (status, body) = call(&app(), "POST", "/api/query/where", Some(body)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(ids_of(&body["data"]), [UNNA.0, GUETERSLOH.0, SOEST.0, COESFELD.0]);
    assert_eq!(body["data"][0]["values"][0]["value"], UNNA.1);
    assert_eq!(body["data"][0]["rank"], 1);
}

#[tokio::test]
async fn what_when_compare_checklist() {
    let app = app();
    let (_, body) = call(&app, "GET", "/api/what?site=05754&factors=income_per_household,population&t=2016-01", None).await;
    assert_eq!(body["data"][0]["value"], INCOME_GUETERSLOH);
    assert_eq!(body["data"][0]["t"], "2016-01");
    let (_, body) = call(&app, "GET", "/api/what?site=02&factors=unemployment_rate&t=2016-12&mode=latest_at_or_before", None).await;
    assert_eq!((body["data"][0]["value"].as_f64(), body["data"][0]["t"].as_str()), (Some(7.1), Some("2016-07")));

    for condition in [json!("<7"), json!({"op": "lt", "value": 7.0})] {
        let (_, body) = call(&app, "POST", "/api/query/when", Some(json!({"site": "02", "factor": "unemployment_rate", "condition": condition}))).await;
        assert_eq!(body["data"], json!([{"from": "2016-06", "to": "2016-06"}]));
    }

    let (_, body) = call(&app, "POST", "/api/compare", Some(json!({"sites": ["05754", "05978"], "factors": ["income_per_household", "population"]}))).await;
    assert_eq!(body["data"]["rankings"][0]["order"], json!(["05754", "05978"]));
    assert_eq!(body["data"]["rankings"][1]["order"], json!(["05978", "05754"]));

    let criteria = json!([{"factor": "population", "weight": 1, "plus_threshold": 400000, "minus_threshold": 300000, "direction": "higher_is_better"}]);
    let (_, body) = call(&app, "POST", "/api/checklist", Some(json!({"sites": ["05558", "05978", "05974"], "criteria": criteria, "t": "2016-01"}))).await;
    let ranking: Vec<_> = body["data"]["rows"].as_array().unwrap().iter().map(|r| (r["site_id"].clone(), r["cells"][0]["rating"].clone())).collect();
    assert_eq!(ranking, [(json!("05978"), json!("+")), (json!("05974"), json!("o")), (json!("05558"), json!("-"))]);
}

#[tokio::test]
async fn insights_pie_sums_to_one() {
    let body = json!({"sites": ["05558", "05974", "05978"], "factors": ["population"], "t": "2016-01"});
    let (status, body) = call(&app(), "POST", "/api/insights", Some(body)).await;
    assert_eq!(status, StatusCode::OK);
    let pie = body["data"]["charts"]["pie"].as_array().unwrap();
    assert_eq!(pie.len(), 3);
    let total: f64 = pie.iter().map(|s| s["proportion"].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
    assert_eq!(body["data"]["table"]["rows"].as_array().unwrap().len(), 3);
}

#[tokio::test]
async fn views_and_geometries() {
    let app = app();
    let (_, body) = call(&app, "GET", "/api/choropleth?parent=NRW&factor=population&t=2016-01&scheme=quantile&k=2", None).await;
    let classes: Vec<_> = body["data"]["sites"].as_array().unwrap().iter().map(|s| (s["site_id"].clone(), s["class"].clone())).collect();
    assert_eq!(classes, [(json!("05558"), json!(0)), (json!("05754"), json!(1)), (json!("05974"), json!(0)), (json!("05978"), json!(1))]);
    assert_eq!(body["data"]["legend"].as_array().unwrap().len(), 2);

    let (_, geo) = call(&app, "GET", "/api/geometries?parent=NRW", None).await;
    assert_eq!(geo["type"], "FeatureCollection");
    assert_eq!(geo["features"].as_array().unwrap().len(), 4);
    assert_eq!(geo["stamp"], body["stamp"]);

    let (_, body) = call(&app, "GET", "/api/series?site=02,NRW&factor=unemployment_rate&reference=7&highlight=02", None).await;
    assert_eq!(body["data"]["series"][0]["points"].as_array().unwrap().len(), 3);
    assert_eq!(body["data"]["series"][1]["points"], json!([]));
    assert_eq!(body["data"]["reference"], 7.0);

    let (_, body) = call(&app, "GET", "/api/statistics?site=NRW&factor=population&t=2016-01", None).await;
    assert_eq!(body["data"]["n"], 4);
    assert_eq!(body["data"]["max"], UNNA.1);

    let (_, body) = call(&app, "GET", "/api/factors", None).await;
    assert_eq!(body["data"][2]["aggregation"], json!({"rule": "weighted_mean", "weight": "households"}));
}

#[tokio::test]
async fn svg_choropleth_route() {
    let request = Request::get("/api/choropleth?parent=NRW&factor=population&format=svg").body(Body::empty()).unwrap();
    let response = app().oneshot(request).await.unwrap();
    assert_eq!(response.headers()["content-type"], "image/svg+xml");
    assert_eq!(response.headers()["x-sitelens-stamp"], fixture().provenance().stamp.as_str());
    let text = String::from_utf8(response.into_body().collect().await.unwrap().to_bytes().to_vec()).unwrap();
    assert_eq!(text.matches("<path ").count(), 4);
}

#[tokio::test]
async fn reload_swaps_or_keeps_snapshot() {
    let state = ServiceState::load(fixture_dir()).unwrap();
    let app = router(state.clone());
    let (_, health) = call(&app, "GET", "/api/health", None).await;
    let old = health["stamp"].clone();

    let synthetic = tempfile::tempdir().unwrap();
    sitelens::ingest::generate_synthetic(&[1, 3], 2, 2, 1).write(synthetic.path()).unwrap();
    let (status, body) = call(&app, "POST", "/api/admin/reload", Some(json!({"path": synthetic.path()}))).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["data"]["previous_stamp"], old);
    assert_ne!(body["stamp"], old);
    let (_, health) = call(&app, "GET", "/api/health", None).await;
    assert_eq!(health["data"]["sites"], 4);

    let corrupt = tempfile::tempdir().unwrap();
    sitelens::ingest::generate_synthetic(&[1, 3], 2, 2, 1).write(corrupt.path()).unwrap();
    std::fs::write(corrupt.path().join("series.csv"), "site_id,factor_id,t,value\ns0_00000,f00,2000-01,abc\n").unwrap();
    let (status, body) = call(&app, "POST", "/api/admin/reload", Some(json!({"path": corrupt.path()}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"]["code"], "bundle_malformed");
    let (_, after) = call(&app, "GET", "/api/health", None).await;
    assert_eq!(after["stamp"], health["stamp"]);

    // An empty body reloads the current source.
    let (status, body) = call(&app, "POST", "/api/admin/reload", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["stamp"], health["stamp"]);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn serves_over_tcp() {
    let handle = serve(ServiceState::load(fixture_dir()).unwrap(), "127.0.0.1:0").await.unwrap();
    let addr = handle.addr;
    let response = tokio::task::spawn_blocking(move || {
        let mut stream = TcpStream::connect(addr).unwrap();
        write!(stream, "GET /api/sites/NRW HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n").unwrap();
        let mut text = String::new();
        stream.read_to_string(&mut text).unwrap();
        text
    })
    .await
    .unwrap();
    assert!(response.starts_with("HTTP/1.1 200"), "{response}");
    assert!(response.contains(r#""name":"Nordrhein-Westfalen""#));
    handle.shutdown().await.unwrap();
}
