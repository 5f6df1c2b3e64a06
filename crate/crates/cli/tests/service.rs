use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use trainyard::engine::simulate;
use trainyard::io::{parse_formula, parse_level, serialize_level, LevelDocument, LoadedLevel, TraceDocument};
use trainyard::reduction::{canonical_layout, compile, Assignment};
use trainyard::{Level, Position, Tile};
use trainyard_cli::service::router;

async fn call(method: &str, uri: &str, body: impl Into<Body>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder().method(method).uri(uri).body(body.into()).unwrap();
    let resp = router(None).oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}

fn json_of(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap()
}

const FIG12: &str = "mms 3 2 1\n1 2 0\n2 3 0\n";

fn doc_value(loaded: &LoadedLevel) -> Value {
    serde_json::from_str(&serialize_level(loaded)).unwrap()
}

#[tokio::test]
async fn compile_matches_library_output() {
    let (status, body) = call("POST", "/api/compile", FIG12).await;
    assert_eq!(status, StatusCode::OK);
    let plan = compile(&parse_formula(FIG12).unwrap()).unwrap();
    assert_eq!(String::from_utf8(body.clone()).unwrap(), serialize_level(&LoadedLevel::from_plan(&plan, None)));
    let loaded = parse_level(std::str::from_utf8(&body).unwrap()).unwrap();
    let p = loaded.plan.unwrap();
    assert_eq!(p.row_bands.len(), 3);
    assert_eq!(p.column_bands.len(), 2);
}

#[tokio::test]
async fn compile_k_override() {
    let (status, body) = call("POST", "/api/compile?k=2", FIG12).await;
    assert_eq!(status, StatusCode::OK);
    let loaded = parse_level(std::str::from_utf8(&body).unwrap()).unwrap();
    assert_eq!(loaded.plan.unwrap().instance.k, 2);
}

#[tokio::test]
async fn compile_parse_errors_are_400() {
    let (status, body) = call("POST", "/api/compile", "mms 2 1 1\n-1 0\n").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let v = json_of(&body);
    assert_eq!(v["error"], "MonotonicityViolation");
    assert_eq!((v["line"].as_u64(), v["column"].as_u64()), (Some(2), Some(1)));

    let (status, body) = call("POST", "/api/compile", "").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(json_of(&body)["error"], "MissingHeader");
}

fn single_clause_request(cap: Option<u64>) -> (Value, trainyard::engine::SimResult) {
    let plan = compile(&parse_formula("mms 1 1 1\n1 0\n").unwrap()).unwrap();
    let layout = canonical_layout(&plan, &Assignment::new([1])).unwrap();
    let expected = simulate(&plan.level, &layout, cap.unwrap_or(10_000)).unwrap();
    let req = json!({
        "level": doc_value(&LoadedLevel::from_plan(&plan, Some(layout))),
        "cap": cap,
    });
    (req, expected)
}

#[tokio::test]
async fn simulate_canonical_layout_wins_and_replays() {
    let (req, expected) = single_clause_request(None);
    let (status, body) = call("POST", "/api/simulate", req.to_string()).await;
    assert_eq!(status, StatusCode::OK);
    let doc: TraceDocument = serde_json::from_slice(&body).unwrap();
    assert_eq!(doc.outcome, trainyard::Outcome::Won);
    assert_eq!(doc.states(), expected.trace.states);
    assert_eq!(doc.events, expected.trace.events);
}

#[tokio::test]
async fn simulate_is_a_pure_function_of_the_request() {
    let (req, _) = single_clause_request(None);
    let a = call("POST", "/api/simulate", req.to_string()).await;
    let b = call("POST", "/api/simulate", req.to_string()).await;
    assert_eq!(a, b);
}

#[tokio::test]
async fn simulate_small_cap_times_out() {
    let (req, _) = single_clause_request(Some(1));
    let (status, body) = call("POST", "/api/simulate", req.to_string()).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(json_of(&body)["outcome"], "timeout");
}

#[tokio::test]
async fn rail_on_rock_is_422_with_cells() {
    let mut tiles = vec![Tile::Empty; 4];
    tiles[1] = Tile::Rock;
    let level = Level::new(2, 2, tiles).unwrap();
    let doc = LevelDocument::from_loaded(&LoadedLevel::new(level));
    let req = json!({
        "level": doc,
        "layout": [
            {"pos": {"row": 0, "col": 1}, "piece": {"kind": "straight", "rotation": 0}},
            {"pos": {"row": 5, "col": 5}, "piece": {"kind": "turn", "rotation": 1}},
            {"pos": {"row": 1, "col": 1}, "piece": {"kind": "turn", "rotation": 1}}
        ]
    });
    let (status, body) = call("POST", "/api/simulate", req.to_string()).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let v = json_of(&body);
    let cells = v["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 2);
    let positions: Vec<Position> = cells.iter().map(|c| serde_json::from_value(c["pos"].clone()).unwrap()).collect();
    assert!(positions.contains(&Position::new(0, 1)));
    assert!(positions.contains(&Position::new(5, 5)));
}

#[tokio::test]
async fn malformed_simulate_body_is_400() {
    let (status, _) = call("POST", "/api/simulate", "{not json").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = call("POST", "/api/simulate", json!({"level": {"version": 1, "width": 1, "height": 1, "tiles": [
        {"pos": {"row": 0, "col": 0}, "tile": {"type": "rock"}},
        {"pos": {"row": 0, "col": 0}, "tile": {"type": "rock"}}
    ]}}).to_string()).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn gadget_catalog_lists_ports() {
    let (status, body) = call("GET", "/api/gadgets", Body::empty()).await;
    assert_eq!(status, StatusCode::OK);
    let v = json_of(&body);
    let list = v.as_array().unwrap();
    let names: Vec<&str> = list.iter().map(|g| g["name"].as_str().unwrap()).collect();
    for want in ["one_way", "terminus", "cross_satisfy", "and2", "replicator3"] {
        assert!(names.contains(&want), "{names:?}");
    }
    let cs = list.iter().find(|g| g["name"] == "cross_satisfy").unwrap();
    assert!(!cs["stamp"]["ports"].as_array().unwrap().is_empty());
    assert_eq!(cs["designs"], json!(["pass_through", "duplicate"]));
}

#[tokio::test]
async fn verify_endpoint() {
    let req = json!({"kind": "one_way", "mode": {"mode": "sampled", "samples": 200, "seed": 3}});
    let (status, body) = call("POST", "/api/verify", req.to_string()).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(json_of(&body)["violations"], 0);
    let req = json!({"kind": "nope", "mode": {"mode": "exhaustive", "bound": 6}});
    let (status, _) = call("POST", "/api/verify", req.to_string()).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn root_serves_a_page() {
    let (status, body) = call("GET", "/", Body::empty()).await;
    assert_eq!(status, StatusCode::OK);
    assert!(String::from_utf8(body).unwrap().contains("/api/simulate"));
}
