mod common;

use std::fs;

use common::{sample, TestServer};
use reqwest::{Client, StatusCode};
use serde_json::{json, Value};
use sketchlevel::image::encode_png;
use sketchlevel_core::SketchImage;

fn white_png() -> Vec<u8> {
    encode_png(&SketchImage::blank(256, 256).unwrap())
}

async fn create(client: &Client, server: &TestServer, body: Vec<u8>, query: &str) -> (StatusCode, Value) {
    let resp = client
        .post(server.url(&format!("/api/levels{query}")))
        .body(body)
        .send()
        .await
        .unwrap();
    let status = resp.status();
    (status, resp.json().await.unwrap())
}

fn assert_error(body: &Value, code: &str) {
    assert_eq!(body["error"], code, "{body}");
    assert!(body["detail"].is_string(), "{body}");
}

#[tokio::test]
async fn white_page_creates_empty_stable_level() {
    let dir = tempfile::tempdir().unwrap();
    let server = TestServer::start(dir.path()).await;
    let client = Client::new();
    let (status, body) = create(&client, &server, white_png(), "").await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(body["stats"]["total_blocks"], 0);
    assert_eq!(body["stability"]["stable"], true);
    assert!(body["xml"].as_str().unwrap().contains("<GameObjects/>"));
    assert!(body["feedback_preview"]["text"].is_string());
    assert_eq!(body["recognition"]["entries"].as_array().unwrap().len(), 5);
    let id = body["id"].as_str().unwrap();
    assert!(dir.path().join("levels").join(format!("{id}.xml")).exists());
    assert!(dir.path().join("levels").join(format!("{id}.json")).exists());
}

#[tokio::test]
async fn same_request_same_xml_new_id() {
    let dir = tempfile::tempdir().unwrap();
    let server = TestServer::start(dir.path()).await;
    let client = Client::new();
    let png = fs::read(sample("house.png")).unwrap();
    let (_, a) = create(&client, &server, png.clone(), "?seed=5").await;
    let (_, b) = create(&client, &server, png, "?seed=5").await;
    assert_eq!(a["xml"], b["xml"]);
    assert_ne!(a["id"], b["id"]);
}

#[tokio::test]
async fn request_errors() {
    let dir = tempfile::tempdir().unwrap();
    let server = TestServer::start(dir.path()).await;
    let client = Client::new();

    let (status, body) = create(&client, &server, b"\x89PNG\r\n\x1a\ngarbage".to_vec(), "").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error(&body, "decode_error");

    let (status, body) = create(&client, &server, b"GIF89a".to_vec(), "").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error(&body, "unsupported_format");

    let (status, body) = create(&client, &server, white_png(), "?tnt_prob=3").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error(&body, "invalid_parameter");

    let black = encode_png(&SketchImage::new(64, 64, vec![0; 64 * 64]).unwrap());
    let mut pipeline = sketchlevel::pipeline::Pipeline::default();
    pipeline.config.max_blocks = 50;
    let tight = TestServer::start_with(dir.path(), pipeline).await;
    let (status, body) = create(&client, &tight, black, "").await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_error(&body, "over_budget");
    assert!(body["detail"].as_str().unwrap().contains("50"));

    let resp = client.get(server.url("/nowhere")).send().await.unwrap();
    assert_eq!(resp.status(), StatusCode::NOT_FOUND);
    assert_error(&resp.json().await.unwrap(), "not_found");
}

#[tokio::test]
async fn large_bodies_are_refused() {
    let dir = tempfile::tempdir().unwrap();
    let server = TestServer::start(dir.path()).await;
    for path in ["/api/levels", "/api/recognize"] {
        // A fresh client each time: the server drops the connection after refusing.
        let resp = Client::new()
            .post(server.url(path))
            .body(vec![0u8; 2 * 1024 * 1024])
            .send()
            .await
            .unwrap();
        assert_eq!(resp.status(), StatusCode::PAYLOAD_TOO_LARGE);
        assert_error(&resp.json().await.unwrap(), "payload_too_large");
    }
    assert_eq!(std::fs::read_dir(dir.path().join("levels")).unwrap().count(), 0);
}

#[tokio::test]
async fn get_returns_stored_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let server = TestServer::start(dir.path()).await;
    let client = Client::new();
    let png = fs::read(sample("smiling_face.png")).unwrap();
    let (_, body) = create(&client, &server, png, "?seed=3").await;
    let id = body["id"].as_str().unwrap();

    let resp = client.get(server.url(&format!("/api/levels/{id}"))).send().await.unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    assert_eq!(resp.headers()["content-type"], "application/xml");
    assert_eq!(resp.text().await.unwrap(), body["xml"].as_str().unwrap());

    let resp = client
        .get(server.url(&format!("/api/levels/{id}/meta")))
        .send()
        .await
        .unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    let bytes = resp.bytes().await.unwrap();
    let on_disk = fs::read(dir.path().join("levels").join(format!("{id}.json"))).unwrap();
    assert_eq!(bytes.as_ref(), on_disk.as_slice());
    let meta: Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(meta["recognition"]["entries"].as_array().unwrap().len(), 5);
    assert_eq!(meta["config"]["seed"], 3);

    for path in [
        "/api/levels/0123456789abcdef0123456789abcdef",
        "/api/levels/not-an-id/meta",
    ] {
        let resp = client.get(server.url(path)).send().await.unwrap();
        assert_eq!(resp.status(), StatusCode::NOT_FOUND);
        assert_error(&resp.json().await.unwrap(), "not_found");
    }
}

#[tokio::test]
async fn outcomes() {
    let dir = tempfile::tempdir().unwrap();
    let server = TestServer::start(dir.path()).await;
    let client = Client::new();
    let png = fs::read(sample("smiling_face.png")).unwrap();
    let (_, body) = create(&client, &server, png, "?seed=3").await;
    let id = body["id"].as_str().unwrap();
    assert!(body["stats"]["difficulty_score"].as_u64().unwrap() >= 40);
    let outcome = |b: Value| {
        let client = client.clone();
        let url = server.url(&format!("/api/levels/{id}/outcome"));
        async move {
            let resp = client.post(url).json(&b).send().await.unwrap();
            (resp.status(), resp.json::<Value>().await.unwrap())
        }
    };

    let (status, body) = outcome(json!({"status": "failed", "birds_used": 3})).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(
        body["feedback"]["text"],
        "Good job! You just designed a hard level in the shape of a smiling face."
    );

    let (status, body) = outcome(json!({"status": "cleared", "birds_used": 1})).await;
    assert_eq!(status, StatusCode::OK);
    assert!(body["feedback"]["text"].as_str().unwrap().contains("smiling face"));

    let meta: Value = serde_json::from_slice(
        &fs::read(dir.path().join("levels").join(format!("{id}.json"))).unwrap(),
    )
    .unwrap();
    assert_eq!(meta["outcome"]["status"], "cleared");
    assert_eq!(meta["outcome"]["birds_used"], 1);

    let (status, body) = outcome(json!({"status": "quit", "birds_used": 1})).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_error(&body, "invalid_status");

    let (status, body) = outcome(json!({"status": "cleared"})).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_error(&body, "invalid_outcome");

    let resp = client
        .post(server.url("/api/levels/0123456789abcdef0123456789abcdef/outcome"))
        .json(&json!({"status": "cleared", "birds_used": 1}))
        .send()
        .await
        .unwrap();
    assert_eq!(resp.status(), StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn recognize_endpoint() {
    let dir = tempfile::tempdir().unwrap();
    let server = TestServer::start(dir.path()).await;
    let client = Client::new();
    let post = |body: Vec<u8>| {
        let client = client.clone();
        let url = server.url("/api/recognize");
        async move { client.post(url).body(body).send().await.unwrap() }
    };

    let resp = post(fs::read(sample("house.png")).unwrap()).await;
    assert_eq!(resp.status(), StatusCode::OK);
    let body: Value = resp.json().await.unwrap();
    assert_eq!(body["entries"][0]["label"], "house");

    let resp = post(white_png()).await;
    assert_eq!(resp.status(), StatusCode::OK);
    let body: Value = resp.json().await.unwrap();
    let conf: Vec<f64> = body["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["confidence"].as_f64().unwrap())
        .collect();
    assert_eq!(conf.len(), 5);
    assert!(conf.windows(2).all(|w| w[0] >= w[1]));

    let resp = post(b"\x89PNG\r\n\x1a\n\0\0\0\rIHDR".to_vec()).await;
    assert_eq!(resp.status(), StatusCode::BAD_REQUEST);
    assert_error(&resp.json().await.unwrap(), "decode_error");
    assert_eq!(fs::read_dir(dir.path().join("levels")).unwrap().count(), 0);
}

#[tokio::test]
async fn levels_survive_restart() {
    let dir = tempfile::tempdir().unwrap();
    let client = Client::new();
    let png = fs::read(sample("tree.pgm")).unwrap();
    let server = TestServer::start(dir.path()).await;
    let (_, first) = create(&client, &server, png.clone(), "?seed=9").await;
    server.stop().await;

    let server = TestServer::start(dir.path()).await;
    let id = first["id"].as_str().unwrap();
    let xml = client
        .get(server.url(&format!("/api/levels/{id}")))
        .send()
        .await
        .unwrap()
        .text()
        .await
        .unwrap();
    assert_eq!(xml, first["xml"].as_str().unwrap());
    let (_, second) = create(&client, &server, png, "?seed=9").await;
    assert_eq!(second["xml"], first["xml"]);
}

#[tokio::test]
async fn cors_headers_present() {
    let dir = tempfile::tempdir().unwrap();
    let server = TestServer::start(dir.path()).await;
    let resp = Client::new()
        .get(server.url("/api/levels/0123456789abcdef0123456789abcdef"))
        .header("Origin", "http://localhost:5173")
        .send()
        .await
        .unwrap();
    assert_eq!(resp.headers()["access-control-allow-origin"], "*");
}
