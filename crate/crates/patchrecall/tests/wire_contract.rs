use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;

use patchrecall::embeddings::{
    validate_response, EmbedRequest, EmbedResponse, HealthResponse, PrecomputedEmbedder,
    PrecomputedRecord, RemoteEmbedder,
};
use patchrecall_core::dense::{embed, DenseError, EmbedItem, Embedder, DEFAULT_MODEL_ID};

fn golden(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures/wire")
        .join(name);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn request_golden_round_trip() {
    let req: EmbedRequest = serde_json::from_str(&golden("embed_request.json")).unwrap();
    assert_eq!(req.model, "all-mpnet-base-v2");
    assert_eq!(req.texts, vec!["TypeError when parsing config", "a"]);
    assert_eq!(
        serde_json::to_string(&req).unwrap(),
        golden("embed_request.json").trim_end()
    );
    let defaulted: EmbedRequest =
        serde_json::from_str(&golden("embed_request_default_model.json")).unwrap();
    assert_eq!(defaulted.model, DEFAULT_MODEL_ID);
}

#[test]
fn response_golden_decodes_and_validates() {
    let resp: EmbedResponse = serde_json::from_str(&golden("embed_response.json")).unwrap();
    let vectors = validate_response(resp, DEFAULT_MODEL_ID, 4, 2).unwrap();
    assert_eq!(vectors[0].values(), &[0.5, 0.5, 0.5, 0.5]);
    assert_eq!(vectors[1].values(), &[1.0, 0.0, 0.0, 0.0]);

    let bad: EmbedResponse = serde_json::from_str(&golden("embed_response_bad_norm.json")).unwrap();
    assert!(matches!(
        validate_response(bad, DEFAULT_MODEL_ID, 4, 2),
        Err(DenseError::ProviderContractViolation(_))
    ));
    let short: EmbedResponse = serde_json::from_str(&golden("embed_response_short.json")).unwrap();
    assert!(matches!(
        validate_response(short, DEFAULT_MODEL_ID, 4, 2),
        Err(DenseError::ProviderContractViolation(_))
    ));
}

#[test]
fn health_golden_decodes() {
    let h: HealthResponse = serde_json::from_str(&golden("health_ok.json")).unwrap();
    assert_eq!(
        h,
        HealthResponse {
            status: "ok".into(),
            model: DEFAULT_MODEL_ID.into(),
            dim: 4
        }
    );
    let loading: HealthResponse = serde_json::from_str(&golden("health_loading.json")).unwrap();
    assert_eq!(loading.status, "loading");
}

#[test]
fn precomputed_golden_loads() {
    let text = golden("precomputed.jsonl");
    for line in text.lines() {
        let rec: PrecomputedRecord = serde_json::from_str(line).unwrap();
        assert_eq!(rec.vector.len(), 3);
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.jsonl");
    std::fs::write(&path, &text).unwrap();
    let e = PrecomputedEmbedder::load(&path, 3).unwrap();
    let v = embed(
        &e,
        &[EmbedItem {
            id: "o/r@c0:src/app.py#0",
            text: "ignored",
        }],
    )
    .unwrap();
    assert_eq!(v[0].values(), &[0.0, 0.0, 1.0]);
}

/// What the mock service does.
#[derive(Clone)]
struct Behaviour {
    health: String,
    model: String,
    /// Answer this many `/embed` calls with 503 before serving.
    unavailable_first: usize,
    /// Drop the last vector of every response.
    truncate: bool,
}

struct Mock {
    endpoint: String,
    batches: Arc<Mutex<Vec<usize>>>,
    embed_calls: Arc<AtomicUsize>,
}

/// A deterministic unit vector for `text` of width 4.
fn vector_for(text: &str) -> Vec<f64> {
    let mut v = vec![0.0; 4];
    v[text.len() % 4] = 1.0;
    v
}

fn respond(stream: &mut impl Write, status: &str, body: &str) {
    let _ = write!(
        stream,
        "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    );
}

fn serve(b: Behaviour) -> Mock {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let endpoint = format!("http://{}", listener.local_addr().unwrap());
    let batches = Arc::new(Mutex::new(Vec::new()));
    let embed_calls = Arc::new(AtomicUsize::new(0));
    let (batches2, calls2) = (batches.clone(), embed_calls.clone());
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { return };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut request_line = String::new();
            reader.read_line(&mut request_line).unwrap();
            let mut content_length = 0;
            loop {
                let mut h = String::new();
                reader.read_line(&mut h).unwrap();
                if h == "\r\n" || h.is_empty() {
                    break;
                }
                if let Some((k, v)) = h.split_once(':') {
                    if k.eq_ignore_ascii_case("content-length") {
                        content_length = v.trim().parse().unwrap();
                    }
                }
            }
            let mut body = vec![0; content_length];
            reader.read_exact(&mut body).unwrap();
            if request_line.starts_with("GET /health") {
                respond(&mut stream, "200 OK", &b.health);
            } else if request_line.starts_with("POST /embed") {
                let n = calls2.fetch_add(1, Ordering::SeqCst);
                if n < b.unavailable_first {
                    respond(&mut stream, "503 Service Unavailable", "{}");
                    continue;
                }
                let req: EmbedRequest = serde_json::from_slice(&body).unwrap();
                batches2.lock().unwrap().push(req.texts.len());
                let mut vectors: Vec<Vec<f64>> = req.texts.iter().map(|t| vector_for(t)).collect();
                if b.truncate {
                    vectors.pop();
                }
                let resp = EmbedResponse {
                    model: b.model.clone(),
                    dim: 4,
                    vectors,
                };
                respond(
                    &mut stream,
                    "200 OK",
                    &serde_json::to_string(&resp).unwrap(),
                );
            } else {
                respond(&mut stream, "404 Not Found", "{}");
            }
        }
    });
    Mock {
        endpoint,
        batches,
        embed_calls,
    }
}

fn healthy() -> Behaviour {
    Behaviour {
        health: golden("health_ok.json"),
        model: DEFAULT_MODEL_ID.into(),
        unavailable_first: 0,
        truncate: false,
    }
}

#[test]
fn remote_client_batches_in_order() {
    let mock = serve(healthy());
    let client = RemoteEmbedder::connect(&mock.endpoint, DEFAULT_MODEL_ID).unwrap();
    assert_eq!(client.dim(), 4);
    let texts: Vec<String> = (0..150).map(|i| "x".repeat(i % 7 + 1)).collect();
    let items: Vec<EmbedItem<'_>> = texts.iter().map(|t| EmbedItem { id: t, text: t }).collect();
    let vectors = embed(&client, &items).unwrap();
    assert_eq!(vectors.len(), 150);
    for (t, v) in texts.iter().zip(&vectors) {
        assert_eq!(v.values(), vector_for(t).as_slice());
    }
    assert_eq!(*mock.batches.lock().unwrap(), vec![64, 64, 22]);
}

#[test]
fn remote_client_retries_unavailable() {
    let mock = serve(Behaviour {
        unavailable_first: 1,
        ..healthy()
    });
    let client = RemoteEmbedder::connect(&mock.endpoint, DEFAULT_MODEL_ID).unwrap();
    let v = embed(
        &client,
        &[EmbedItem {
            id: "a",
            text: "abc",
        }],
    )
    .unwrap();
    assert_eq!(v[0].values(), vector_for("abc").as_slice());
    assert_eq!(mock.embed_calls.load(Ordering::SeqCst), 2);

    let down = serve(Behaviour {
        unavailable_first: 100,
        ..healthy()
    });
    let client = RemoteEmbedder::connect(&down.endpoint, DEFAULT_MODEL_ID).unwrap();
    assert!(matches!(
        embed(
            &client,
            &[EmbedItem {
                id: "a",
                text: "abc"
            }]
        ),
        Err(DenseError::ProviderUnavailable(_))
    ));
}

#[test]
fn remote_contract_violations() {
    let mock = serve(Behaviour {
        truncate: true,
        ..healthy()
    });
    let client = RemoteEmbedder::connect(&mock.endpoint, DEFAULT_MODEL_ID).unwrap();
    assert!(matches!(
        embed(
            &client,
            &[
                EmbedItem { id: "a", text: "a" },
                EmbedItem { id: "b", text: "b" }
            ]
        ),
        Err(DenseError::ProviderContractViolation(_))
    ));

    let wrong_model = serve(healthy());
    assert!(matches!(
        RemoteEmbedder::connect(&wrong_model.endpoint, "other-model"),
        Err(DenseError::ProviderContractViolation(_))
    ));

    let loading = serve(Behaviour {
        health: golden("health_loading.json"),
        ..healthy()
    });
    assert!(matches!(
        RemoteEmbedder::connect(&loading.endpoint, DEFAULT_MODEL_ID),
        Err(DenseError::ProviderUnavailable(_))
    ));
}

#[test]
fn unreachable_endpoint_is_unavailable() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let endpoint = format!("http://{}", listener.local_addr().unwrap());
    drop(listener);
    assert!(matches!(
        RemoteEmbedder::connect(&endpoint, DEFAULT_MODEL_ID),
        Err(DenseError::ProviderUnavailable(_))
    ));
}
