mod common;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use common::{embed_server, fake_vector, form_field, Stub};
use corpus_scope::corpus::{Corpus, Role};
use corpus_scope::fluency::{
    check_remote, plausibility_scores, LanguageModel, LanguageToolClient, Proofreader,
    RemoteLanguageModel,
};
use corpus_scope::http::RetryPolicy;
use corpus_scope::semantic::{CachedEmbedder, EmbeddingBackend, RemoteEmbedder};
use corpus_scope::Error;

fn quick() -> RetryPolicy {
    RetryPolicy {
        attempts: 3,
        backoff: Duration::from_millis(1),
        timeout: Duration::from_secs(5),
    }
}

fn sentences(n: usize) -> Vec<String> {
    (0..n)
        .map(|i| format!("{} sentence number {i}", (b'a' + (i % 26) as u8) as char))
        .collect()
}

#[test]
fn embeddings_keep_order_across_batches() {
    let stub = embed_server();
    let client = RemoteEmbedder::connect(&stub.url, 64, quick()).unwrap();
    assert_eq!(client.dim(), 3);
    assert_eq!(client.id(), "remote/fake");
    let owned = sentences(130);
    let refs: Vec<&str> = owned.iter().map(String::as_str).collect();
    let out = client.embed_batch(&refs).unwrap();
    assert_eq!(out.len(), 130);
    for (s, e) in refs.iter().zip(&out) {
        assert_eq!(e.values(), fake_vector(s).as_slice());
    }
    assert_eq!(stub.count("/embed"), 3);
    let sizes: Vec<usize> = stub
        .requests()
        .iter()
        .filter(|r| r.url == "/embed")
        .map(|r| {
            serde_json::from_str::<serde_json::Value>(&r.body).unwrap()["sentences"]
                .as_array()
                .unwrap()
                .len()
        })
        .collect();
    assert_eq!(sizes, [64, 64, 2]);
}

#[test]
fn dimension_change_between_batches_is_an_error() {
    let calls = Arc::new(AtomicUsize::new(0));
    let c = Arc::clone(&calls);
    let stub = Stub::start(move |req| match req.url.as_str() {
        "/health" => (200, r#"{"status":"ok","id":"x","dim":2}"#.into()),
        _ => {
            let n = serde_json::from_str::<serde_json::Value>(&req.body).unwrap()["sentences"]
                .as_array()
                .unwrap()
                .len();
            let dim = if c.fetch_add(1, Ordering::SeqCst) == 0 {
                2
            } else {
                3
            };
            let rows = vec![vec![1.0; dim]; n];
            (
                200,
                serde_json::json!({"dim": dim, "embeddings": rows}).to_string(),
            )
        }
    });
    let client = RemoteEmbedder::connect(&stub.url, 2, quick()).unwrap();
    let err = client.embed_batch(&["a", "b", "c"]).unwrap_err();
    assert!(
        matches!(err, Error::DimensionMismatch { left: 2, right: 3 }),
        "{err}"
    );
}

#[test]
fn short_or_ragged_embed_responses_are_rejected() {
    let stub = Stub::start(|req| match req.url.as_str() {
        "/health" => (200, r#"{"status":"ok","id":"x","dim":2}"#.into()),
        _ if req.body.contains("ragged") => (200, r#"{"dim":2,"embeddings":[[1,2,3]]}"#.into()),
        _ => (200, r#"{"dim":2,"embeddings":[[1,2]]}"#.into()),
    });
    let client = RemoteEmbedder::connect(&stub.url, 8, quick()).unwrap();
    assert!(matches!(
        client.embed_batch(&["a", "b"]),
        Err(Error::BadResponse { .. })
    ));
    assert!(client.embed_batch(&["ragged"]).is_err());
}

#[test]
fn unhealthy_server_is_refused() {
    let stub = Stub::start(|_| (200, r#"{"status":"loading","id":"x","dim":2}"#.into()));
    assert!(RemoteEmbedder::connect(&stub.url, 8, quick()).is_err());
}

#[test]
fn cache_avoids_repeat_requests() {
    let stub = embed_server();
    let dir = tempfile::tempdir().unwrap();
    let first = {
        let client = RemoteEmbedder::connect(&stub.url, 64, quick()).unwrap();
        let cached = CachedEmbedder::open(client, dir.path()).unwrap();
        cached.embed_batch(&["one", "two", "one"]).unwrap()
    };
    let after_first = stub.count("/embed");
    let client = RemoteEmbedder::connect(&stub.url, 64, quick()).unwrap();
    let cached = CachedEmbedder::open(client, dir.path()).unwrap();
    assert_eq!(cached.len(), 2);
    assert_eq!(
        cached.embed_batch(&["two", "one"]).unwrap(),
        vec![first[1].clone(), first[0].clone()]
    );
    assert_eq!(stub.count("/embed"), after_first);
}

fn languagetool() -> Stub {
    Stub::start(|req| {
        if req.url != "/v2/check" || req.method != "POST" {
            return (404, "{}".into());
        }
        let text = form_field(&req.body, "text").unwrap_or_default();
        assert_eq!(form_field(&req.body, "language").as_deref(), Some("en-US"));
        let n = text.matches("teh").count();
        let matches: Vec<_> = (0..n).map(|i| serde_json::json!({"offset": i})).collect();
        (
            200,
            serde_json::json!({"software": {"name": "stub"}, "matches": matches}).to_string(),
        )
    })
}

#[test]
fn proofreader_returns_match_counts_in_order() {
    let stub = languagetool();
    let client = LanguageToolClient::new(&stub.url, "en-US", quick())
        .unwrap()
        .with_concurrency(4);
    assert_eq!(client.count_errors("teh cat & teh hat").unwrap(), 2);
    assert_eq!(check_remote("fine", &stub.url, "en-US").unwrap(), 0);
    let texts: Vec<String> = (0..20).map(|i| "teh ".repeat(i % 5) + "end").collect();
    let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
    let counts: Vec<usize> = client
        .count_errors_many(&refs)
        .into_iter()
        .map(Result::unwrap)
        .collect();
    assert_eq!(counts, (0..20).map(|i| i % 5).collect::<Vec<_>>());
}

#[test]
fn proofreader_gives_up_after_three_server_errors() {
    let stub = Stub::start(|_| (500, "oops".into()));
    let client = LanguageToolClient::new(&stub.url, "en-US", quick()).unwrap();
    let err = client.count_errors("text").unwrap_err();
    assert!(
        matches!(err, Error::HttpStatus { status: 500, .. }),
        "{err}"
    );
    assert_eq!(stub.count("/v2/check"), 3);
}

#[test]
fn client_errors_are_not_retried() {
    let stub = Stub::start(|_| (400, "bad".into()));
    let client = LanguageToolClient::new(&stub.url, "en-US", quick()).unwrap();
    assert!(matches!(
        client.count_errors("text"),
        Err(Error::HttpStatus { status: 400, .. })
    ));
    assert_eq!(stub.count("/v2/check"), 1);
}

#[test]
fn transient_failure_recovers() {
    let calls = Arc::new(AtomicUsize::new(0));
    let c = Arc::clone(&calls);
    let stub = Stub::start(move |_| {
        if c.fetch_add(1, Ordering::SeqCst) == 0 {
            (503, "busy".into())
        } else {
            (200, r#"{"matches":[{}]}"#.into())
        }
    });
    let client = LanguageToolClient::new(&stub.url, "en-US", quick()).unwrap();
    assert_eq!(client.count_errors("text").unwrap(), 1);
    assert_eq!(calls.load(Ordering::SeqCst), 2);
}

#[test]
fn unreachable_endpoint_is_a_transport_error() {
    let addr = {
        let l = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        l.local_addr().unwrap()
    };
    let client = LanguageToolClient::new(&format!("http://{addr}"), "en-US", quick()).unwrap();
    assert!(matches!(
        client.count_errors("text"),
        Err(Error::Http { .. })
    ));
}

#[test]
fn remote_language_model_scores_in_batches() {
    let stub = Stub::start(|req| {
        let v: serde_json::Value = serde_json::from_str(&req.body).unwrap();
        let ppl: Vec<f64> = v["sentences"]
            .as_array()
            .unwrap()
            .iter()
            .map(|s| s.as_str().unwrap().len() as f64)
            .collect();
        (200, serde_json::json!({ "perplexities": ppl }).to_string())
    });
    let lm = RemoteLanguageModel::new(&stub.url, quick()).unwrap();
    let owned = sentences(70);
    let corpus = Corpus::from_sentences("g", Role::Generated, owned.iter().map(String::as_str));
    let scores = plausibility_scores(&corpus, &lm).unwrap();
    for (s, p) in owned.iter().zip(&scores) {
        assert_eq!(p.perplexity, s.len() as f64);
    }
    assert_eq!(stub.count("/score"), 2);
    assert!(lm.id().starts_with("remote/"));
}
