//! External perplexity scorer.
//!
//! `POST <endpoint>/score` with `{"sentences":[..]}` (raw sentences) answers
//! `{"perplexities":[..]}`, one finite value per input in order.

use serde::Deserialize;
use serde_json::json;

use super::LanguageModel;
use crate::corpus::SentenceRecord;
use crate::error::{Error, Result};
use crate::http::{join_url, HttpClient, RetryPolicy};

const BATCH_SIZE: usize = 64;

#[derive(Deserialize)]
struct ScoreResponse {
    perplexities: Vec<f64>,
}

pub fn parse_score_response(body: &str) -> Result<Vec<f64>> {
    let resp: ScoreResponse =
        serde_json::from_str(body).map_err(|e| Error::parse(format!("bad /score body: {e}")))?;
    if let Some(bad) = resp
        .perplexities
        .iter()
        .find(|p| !p.is_finite() || **p < 0.0)
    {
        return Err(Error::parse(format!(
            "perplexity {bad} is not a finite non-negative number"
        )));
    }
    Ok(resp.perplexities)
}

pub struct RemoteLanguageModel {
    endpoint: String,
    http: HttpClient,
}

impl RemoteLanguageModel {
    pub fn new(endpoint: &str, policy: RetryPolicy) -> Result<Self> {
        Ok(RemoteLanguageModel {
            endpoint: endpoint.to_string(),
            http: HttpClient::new(policy)?,
        })
    }

    fn score(&self, batch: &[&str]) -> Result<Vec<f64>> {
        let url = join_url(&self.endpoint, "score");
        let body = self.http.post_json(&url, &json!({ "sentences": batch }))?;
        let scores = parse_score_response(&body).map_err(|e| Error::BadResponse {
            url: url.clone(),
            message: e.to_string(),
        })?;
        if scores.len() != batch.len() {
            return Err(Error::BadResponse {
                url,
                message: format!("expected {} scores, got {}", batch.len(), scores.len()),
            });
        }
        Ok(scores)
    }
}

impl LanguageModel for RemoteLanguageModel {
    fn id(&self) -> String {
        format!("remote/{}", self.endpoint)
    }

    fn perplexity(&self, sentence: &SentenceRecord) -> Result<f64> {
        if sentence.is_empty() {
            return Err(Error::EmptySentence);
        }
        Ok(self.score(&[sentence.raw.as_str()])?[0])
    }

    fn perplexities(&self, sentences: &[SentenceRecord]) -> Vec<Result<f64>> {
        let mut out = Vec::with_capacity(sentences.len());
        for batch in sentences.chunks(BATCH_SIZE) {
            if let Some(empty) = batch.iter().position(SentenceRecord::is_empty) {
                out.extend((0..batch.len()).map(|i| {
                    Err(if i == empty {
                        Error::EmptySentence
                    } else {
                        Error::parse("batch not scored")
                    })
                }));
                continue;
            }
            let raws: Vec<&str> = batch.iter().map(|s| s.raw.as_str()).collect();
            match self.score(&raws) {
                Ok(scores) => out.extend(scores.into_iter().map(Ok)),
                Err(e) => {
                    // The batch failed as a whole; attribute it to its first sentence.
                    out.push(Err(e));
                    out.extend((1..batch.len()).map(|_| Err(Error::parse("batch not scored"))));
                }
            }
        }
        out
    }
}
