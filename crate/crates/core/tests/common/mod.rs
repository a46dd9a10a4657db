#![allow(dead_code)]

use std::sync::{Arc, Mutex};
use std::thread;

/// One request as seen by the stub.
#[derive(Debug, Clone)]
pub struct Seen {
    pub method: String,
    pub url: String,
    pub body: String,
}

/// A local HTTP server answering every request with `handler`.
pub struct Stub {
    pub url: String,
    pub seen: Arc<Mutex<Vec<Seen>>>,
    server: Arc<tiny_http::Server>,
    worker: Option<thread::JoinHandle<()>>,
}

impl Stub {
    pub fn start<F>(handler: F) -> Stub
    where
        F: Fn(&Seen) -> (u16, String) + Send + Sync + 'static,
    {
        let server = Arc::new(tiny_http::Server::http("127.0.0.1:0").expect("bind stub"));
        let url = format!(
            "http://{}",
            server.server_addr().to_ip().expect("ip address")
        );
        let seen = Arc::new(Mutex::new(Vec::new()));
        let handler = Arc::new(handler);
        let worker = {
            let server = Arc::clone(&server);
            let seen = Arc::clone(&seen);
            thread::spawn(move || {
                for mut request in server.incoming_requests() {
                    let mut body = String::new();
                    let _ = request.as_reader().read_to_string(&mut body);
                    let entry = Seen {
                        method: request.method().to_string(),
                        url: request.url().to_string(),
                        body,
                    };
                    seen.lock().unwrap().push(entry.clone());
                    let handler = Arc::clone(&handler);
                    // Answer on a separate thread so concurrent clients overlap.
                    thread::spawn(move || {
                        let (status, body) = handler(&entry);
                        let response = tiny_http::Response::from_string(body)
                            .with_status_code(status)
                            .with_header(
                                "Content-Type: application/json"
                                    .parse::<tiny_http::Header>()
                                    .unwrap(),
                            );
                        let _ = request.respond(response);
                    });
                }
            })
        };
        Stub {
            url,
            seen,
            server,
            worker: Some(worker),
        }
    }

    pub fn requests(&self) -> Vec<Seen> {
        self.seen.lock().unwrap().clone()
    }

    pub fn count(&self, path: &str) -> usize {
        self.requests().iter().filter(|r| r.url == path).count()
    }
}

impl Drop for Stub {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
    }
}

/// Decodes an `application/x-www-form-urlencoded` body.
pub fn form_field(body: &str, key: &str) -> Option<String> {
    body.split('&').find_map(|pair| {
        let (k, v) = pair.split_once('=')?;
        (k == key).then(|| decode(v))
    })
}

fn decode(v: &str) -> String {
    let bytes = v.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'+' => out.push(b' '),
            b'%' if i + 2 < bytes.len() => {
                let hex = std::str::from_utf8(&bytes[i + 1..i + 3]).unwrap();
                out.push(u8::from_str_radix(hex, 16).unwrap());
                i += 2;
            }
            b => out.push(b),
        }
        i += 1;
    }
    String::from_utf8(out).unwrap()
}

/// Embeds a sentence as `[len, first byte, 1]` so order is observable.
pub fn fake_vector(s: &str) -> Vec<f64> {
    vec![
        s.len() as f64,
        f64::from(*s.as_bytes().first().unwrap_or(&0)),
        1.0,
    ]
}

/// An embedding server returning `fake_vector` rows of dimension 3.
pub fn embed_server() -> Stub {
    Stub::start(|req| match (req.method.as_str(), req.url.as_str()) {
        ("GET", "/health") => (200, r#"{"status":"ok","id":"fake","dim":3}"#.to_string()),
        ("POST", "/embed") => {
            let v: serde_json::Value = serde_json::from_str(&req.body).unwrap();
            let rows: Vec<Vec<f64>> = v["sentences"]
                .as_array()
                .unwrap()
                .iter()
                .map(|s| fake_vector(s.as_str().unwrap()))
                .collect();
            (
                200,
                serde_json::json!({"dim": 3, "embeddings": rows}).to_string(),
            )
        }
        _ => (404, "{}".to_string()),
    })
}
