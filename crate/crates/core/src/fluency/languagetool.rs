//! LanguageTool v2 `/check` client.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use serde::Deserialize;

use super::Proofreader;
use crate::error::{Error, Result};
use crate::http::{join_url, HttpClient, RetryPolicy};

pub const DEFAULT_LANGUAGE: &str = "en-US";
pub const DEFAULT_CONCURRENCY: usize = 4;

#[derive(Deserialize)]
struct CheckResponse {
    matches: Vec<serde_json::Value>,
}

/// Number of entries in the `matches` array of a `/v2/check` response.
pub fn parse_check_response(body: &str) -> Result<usize> {
    let resp: CheckResponse =
        serde_json::from_str(body).map_err(|e| Error::parse(format!("bad /v2/check body: {e}")))?;
    Ok(resp.matches.len())
}

pub struct LanguageToolClient {
    endpoint: String,
    language: String,
    http: HttpClient,
    concurrency: usize,
}

impl LanguageToolClient {
    pub fn new(endpoint: &str, language: &str, policy: RetryPolicy) -> Result<Self> {
        Ok(LanguageToolClient {
            endpoint: endpoint.to_string(),
            language: language.to_string(),
            http: HttpClient::new(policy)?,
            concurrency: DEFAULT_CONCURRENCY,
        })
    }

    /// Maximum number of requests in flight at once.
    pub fn with_concurrency(mut self, concurrency: usize) -> Self {
        self.concurrency = concurrency.max(1);
        self
    }
}

impl Proofreader for LanguageToolClient {
    fn id(&self) -> String {
        format!("languagetool/{}", self.language)
    }

    fn count_errors(&self, raw: &str) -> Result<usize> {
        let url = join_url(&self.endpoint, "v2/check");
        let body = self
            .http
            .post_form(&url, &[("text", raw), ("language", &self.language)])?;
        parse_check_response(&body).map_err(|e| match e {
            Error::Parse { message } => Error::BadResponse { url, message },
            other => other,
        })
    }

    fn count_errors_many(&self, raws: &[&str]) -> Vec<Result<usize>> {
        let next = AtomicUsize::new(0);
        let slots: Vec<Mutex<Option<Result<usize>>>> =
            raws.iter().map(|_| Mutex::new(None)).collect();
        thread::scope(|scope| {
            for _ in 0..self.concurrency.min(raws.len()) {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= raws.len() {
                        break;
                    }
                    let result = self.count_errors(raws[i]);
                    *slots[i].lock().expect("slot lock") = Some(result);
                });
            }
        });
        slots
            .into_iter()
            .map(|s| {
                s.into_inner()
                    .expect("slot lock")
                    .expect("every slot filled")
            })
            .collect()
    }
}

/// One `/v2/check` request against `endpoint`; returns the match count.
pub fn check_remote(text: &str, endpoint: &str, language: &str) -> Result<usize> {
    LanguageToolClient::new(endpoint, language, RetryPolicy::default())?.count_errors(text)
}
