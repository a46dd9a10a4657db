//! Client for the embedding-server protocol.
//!
//! `GET <endpoint>/health` answers `{"status":"ok","id":..,"dim":..}` and
//! `POST <endpoint>/embed` takes `{"sentences":[..]}` and answers
//! `{"dim":d,"embeddings":[[..],..]}` with one row per input, in order.

use serde::Deserialize;
use serde_json::json;

use super::embed::{Embedding, EmbeddingBackend};
use crate::error::{Error, Result};
use crate::http::{join_url, HttpClient, RetryPolicy};

pub const DEFAULT_BATCH_SIZE: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct Health {
    pub status: String,
    pub id: String,
    pub dim: usize,
}

#[derive(Deserialize)]
struct EmbedResponse {
    dim: usize,
    embeddings: Vec<Vec<f64>>,
}

pub fn parse_health(body: &str) -> Result<Health> {
    let health: Health =
        serde_json::from_str(body).map_err(|e| Error::parse(format!("bad /health body: {e}")))?;
    if health.status != "ok" {
        return Err(Error::parse(format!(
            "server status is `{}`",
            health.status
        )));
    }
    if health.dim == 0 {
        return Err(Error::parse("server reports dim 0"));
    }
    Ok(health)
}

/// Parses an `/embed` response body, checking every row against `dim`.
pub fn parse_embed_response(body: &str) -> Result<(usize, Vec<Embedding>)> {
    let resp: EmbedResponse =
        serde_json::from_str(body).map_err(|e| Error::parse(format!("bad /embed body: {e}")))?;
    let rows = resp
        .embeddings
        .into_iter()
        .map(|row| {
            if row.len() != resp.dim {
                return Err(Error::DimensionMismatch {
                    left: resp.dim,
                    right: row.len(),
                });
            }
            Embedding::new(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((resp.dim, rows))
}

pub struct RemoteEmbedder {
    endpoint: String,
    http: HttpClient,
    batch_size: usize,
    health: Health,
}

impl RemoteEmbedder {
    /// Queries `/health` to learn the backend id and dimension.
    pub fn connect(endpoint: &str, batch_size: usize, policy: RetryPolicy) -> Result<Self> {
        if batch_size == 0 {
            return Err(Error::InvalidArgument("batch size must be positive".into()));
        }
        let http = HttpClient::new(policy)?;
        let url = join_url(endpoint, "health");
        let health = parse_health(&http.get(&url)?).map_err(|e| bad_response(&url, e))?;
        Ok(RemoteEmbedder {
            endpoint: endpoint.to_string(),
            http,
            batch_size,
            health,
        })
    }

    pub fn health(&self) -> &Health {
        &self.health
    }
}

fn bad_response(url: &str, e: Error) -> Error {
    match e {
        Error::Parse { message } => Error::BadResponse {
            url: url.to_string(),
            message,
        },
        other => other,
    }
}

impl EmbeddingBackend for RemoteEmbedder {
    fn id(&self) -> String {
        format!("remote/{}", self.health.id)
    }

    fn dim(&self) -> usize {
        self.health.dim
    }

    fn embed_batch(&self, sentences: &[&str]) -> Result<Vec<Embedding>> {
        let url = join_url(&self.endpoint, "embed");
        let mut out = Vec::with_capacity(sentences.len());
        for batch in sentences.chunks(self.batch_size) {
            let body = self.http.post_json(&url, &json!({ "sentences": batch }))?;
            let (dim, rows) = parse_embed_response(&body).map_err(|e| bad_response(&url, e))?;
            if dim != self.health.dim {
                return Err(Error::DimensionMismatch {
                    left: self.health.dim,
                    right: dim,
                });
            }
            if rows.len() != batch.len() {
                return Err(Error::BadResponse {
                    url,
                    message: format!("expected {} embeddings, got {}", batch.len(), rows.len()),
                });
            }
            out.extend(rows);
        }
        Ok(out)
    }
}
