use std::fs;

use augvis_core::anchor::spec_id;
use augvis_core::artifacts::{render_virtual, DEFAULT_HUB};
use augvis_core::augment::compile;
use augvis_core::spec::{canonicalize, parse_spec};
use augvis_hub::{router, Store};
use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value as Json;
use tower::ServiceExt;

fn fixture(name: &str) -> String {
    fs::read_to_string(format!("{}/../../fixtures/{name}.pv.json", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

struct Hub {
    app: Router,
    _dir: tempfile::TempDir,
}

impl Hub {
    fn new() -> Hub {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path(), DEFAULT_HUB).unwrap();
        Hub { app: router(store, None), _dir: dir }
    }

    async fn call(&self, method: &str, uri: &str, body: &str) -> (StatusCode, Vec<u8>) {
        let req = Request::builder().method(method).uri(uri).body(Body::from(body.to_string())).unwrap();
        let res = self.app.clone().oneshot(req).await.unwrap();
        let status = res.status();
        (status, res.into_body().collect().await.unwrap().to_bytes().to_vec())
    }

    async fn json(&self, method: &str, uri: &str, body: &str) -> (StatusCode, Json) {
        let (s, b) = self.call(method, uri, body).await;
        (s, serde_json::from_slice(&b).unwrap())
    }
}

fn with_extra_append(text: &str) -> String {
    let mut doc: Json = serde_json::from_str(text).unwrap();
    let rows = doc["ar"]["appends"][0]["values"].as_array_mut().unwrap();
    let mut extra = rows[0].clone();
    for (_, v) in extra.as_object_mut().unwrap() {
        if let Some(n) = v.as_f64() {
            *v = serde_json::json!(n + 1.0);
        }
    }
    rows.push(extra);
    doc.to_string()
}

#[tokio::test]
async fn publish_is_idempotent_and_content_addressed() {
    let hub = Hub::new();
    let text = fixture("bar_extend");
    let (s1, r1) = hub.json("POST", "/specs", &text).await;
    let (s2, r2) = hub.json("POST", "/specs", &text).await;
    assert_eq!(s1, StatusCode::CREATED);
    assert_eq!(s2, StatusCode::OK);
    assert_eq!(r1, r2);
    assert_eq!(r1["version"], 1);
    let canonical = canonicalize(&parse_spec(&text).unwrap());
    assert_eq!(r1["id"], spec_id(canonical.as_bytes()));
    assert_eq!(r1["anchorPayload"]["papar"], 1);

    let id = r1["id"].as_str().unwrap();
    let (s, body) = hub.call("GET", &format!("/specs/{id}"), "").await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(body, canonical.as_bytes());
}

#[tokio::test]
async fn new_version_keeps_id_and_old_reference() {
    let hub = Hub::new();
    let text = fixture("bar_extend");
    let (_, r1) = hub.json("POST", "/specs", &text).await;
    let id = r1["id"].as_str().unwrap().to_string();
    let (_, ref1) = hub.call("GET", &format!("/specs/{id}/reference?v=1"), "").await;
    let (_, virt1) = hub.call("GET", &format!("/specs/{id}/virtual"), "").await;

    let (s, r2) = hub.json("POST", &format!("/specs/{id}"), &with_extra_append(&text)).await;
    assert_eq!(s, StatusCode::CREATED);
    assert_eq!(r2["id"], id.as_str());
    assert_eq!(r2["version"], 2);

    let (_, ref1_again) = hub.call("GET", &format!("/specs/{id}/reference?v=1"), "").await;
    let (_, virt2) = hub.call("GET", &format!("/specs/{id}/virtual"), "").await;
    let (_, virt1_again) = hub.call("GET", &format!("/specs/{id}/virtual?v=1"), "").await;
    assert_eq!(ref1, ref1_again);
    assert_ne!(virt1, virt2);
    assert_eq!(virt1, virt1_again);

    let (_, spec1) = hub.call("GET", &format!("/specs/{id}?v=1"), "").await;
    assert_eq!(spec1, canonicalize(&parse_spec(&text).unwrap()).as_bytes());
    let (s, e) = hub.json("GET", &format!("/specs/{id}?v=3"), "").await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(e["error"], "UnknownVersion");
}

#[tokio::test]
async fn virtual_matches_local_render() {
    let hub = Hub::new();
    let text = fixture("bar_extend");
    let (_, r) = hub.json("POST", "/specs", &text).await;
    let (s, body) = hub.call("GET", &format!("/specs/{}/virtual", r["id"].as_str().unwrap()), "").await;
    assert_eq!(s, StatusCode::OK);
    let local = render_virtual(&compile(&parse_spec(&text).unwrap()).unwrap()).unwrap();
    assert_eq!(String::from_utf8(body).unwrap(), local);
}

#[tokio::test]
async fn anchor_matches_receipt() {
    let hub = Hub::new();
    let (_, r) = hub.json("POST", "/specs", &fixture("composite")).await;
    let (_, a) = hub.json("GET", &format!("/specs/{}/anchor", r["id"].as_str().unwrap()), "").await;
    assert_eq!(a, r["anchorPayload"]);
}

#[tokio::test]
async fn invalid_spec_is_rejected_unless_forced() {
    let hub = Hub::new();
    let text = fixture("pie_extend");
    let (s, e) = hub.json("POST", "/specs", &text).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(e["error"], "ValidationFailed");
    assert_eq!(e["detail"]["verdict"], "invalid");
    let (s, _) = hub.json("POST", "/specs?force=true", &text).await;
    assert_eq!(s, StatusCode::CREATED);
}

#[tokio::test]
async fn error_statuses() {
    let hub = Hub::new();
    let (s, e) = hub.json("POST", "/specs", "{not json").await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    assert_eq!(e["error"], "InvalidSpec");
    let (s, e) = hub.json("GET", "/specs/0123456789abcdef", "").await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    assert_eq!(e["error"], "UnknownId");
    let (s, _) = hub.json("GET", "/specs/..%2Fetc", "").await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = hub.json("POST", "/specs/0123456789abcdef", &fixture("bar_extend")).await;
    assert_eq!(s, StatusCode::NOT_FOUND);

    let mut plain: Json = serde_json::from_str(&fixture("bar_extend")).unwrap();
    plain.as_object_mut().unwrap().remove("ar");
    let (s, r) = hub.json("POST", "/specs", &plain.to_string()).await;
    assert_eq!(s, StatusCode::CREATED);
    let (s, e) = hub.json("GET", &format!("/specs/{}/virtual", r["id"].as_str().unwrap()), "").await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(e["error"], "NoArBlock");
}

#[tokio::test]
async fn stateless_endpoints() {
    let hub = Hub::new();
    let (s, svg) = hub.call("POST", "/compile", &fixture("bar_extend")).await;
    assert_eq!(s, StatusCode::OK);
    let svg = String::from_utf8(svg).unwrap();
    assert!(svg.contains("data-layer=\"static\"") && svg.contains("data-layer=\"virtual\""));
    assert!(svg.contains("#FF8C00") && svg.contains("#1E90FF"));

    let (s, report) = hub.json("POST", "/validate", &fixture("treemap_internal")).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(report["verdict"], "invalid");
    let (_, report) = hub.json("POST", "/validate", &fixture("bar_extend")).await;
    assert_eq!(report["verdict"], "valid");
}

#[test]
fn concurrent_publishes_serialize() {
    let dir = tempfile::tempdir().unwrap();
    let store = std::sync::Arc::new(Store::open(dir.path(), DEFAULT_HUB).unwrap());
    let text = fixture("bar_extend");
    let id = store.publish(&text, None, false).unwrap().receipt.id;
    let variants: Vec<String> = (0..8)
        .map(|i| {
            let mut doc: Json = serde_json::from_str(&text).unwrap();
            doc["width"] = serde_json::json!(400 + i);
            doc.to_string()
        })
        .collect();
    let handles: Vec<_> = variants
        .into_iter()
        .map(|t| {
            let (store, id) = (store.clone(), id.clone());
            std::thread::spawn(move || store.publish(&t, Some(&id), false).map(|p| p.receipt.version))
        })
        .collect();
    let mut versions: Vec<u64> = handles.into_iter().map(|h| h.join().unwrap().unwrap()).collect();
    versions.sort();
    let meta = store.meta(&id).unwrap();
    assert_eq!(meta.versions.iter().map(|v| v.version).collect::<Vec<_>>(), (1..=meta.versions.len() as u64).collect::<Vec<_>>());
    assert!(versions.windows(2).all(|w| w[0] <= w[1]));
}
