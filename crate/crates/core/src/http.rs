//! Blocking HTTP client with bounded retries, shared by the remote backends.

use std::thread;
use std::time::Duration;

use reqwest::blocking::{Client, RequestBuilder};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    /// Total attempts, including the first.
    pub attempts: u32,
    pub backoff: Duration,
    pub timeout: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            attempts: 3,
            backoff: Duration::from_millis(200),
            timeout: Duration::from_secs(30),
        }
    }
}

#[derive(Debug, Clone)]
pub struct HttpClient {
    client: Client,
    policy: RetryPolicy,
}

impl HttpClient {
    pub fn new(policy: RetryPolicy) -> Result<Self> {
        let client = Client::builder()
            .timeout(policy.timeout)
            .build()
            .map_err(|e| Error::Http {
                url: String::new(),
                message: e.to_string(),
            })?;
        Ok(HttpClient { client, policy })
    }

    pub fn get(&self, url: &str) -> Result<String> {
        self.send(url, || self.client.get(url))
    }

    pub fn post_form(&self, url: &str, fields: &[(&str, &str)]) -> Result<String> {
        self.send(url, || self.client.post(url).form(fields))
    }

    pub fn post_json(&self, url: &str, body: &serde_json::Value) -> Result<String> {
        let body = body.to_string();
        self.send(url, || {
            self.client
                .post(url)
                .header("content-type", "application/json")
                .body(body.clone())
        })
    }

    /// Retries transport failures and 5xx responses; other non-2xx
    /// statuses fail immediately.
    fn send(&self, url: &str, build: impl Fn() -> RequestBuilder) -> Result<String> {
        let mut last = None;
        for attempt in 0..self.policy.attempts.max(1) {
            if attempt > 0 {
                thread::sleep(self.policy.backoff * attempt);
            }
            match build().send() {
                Ok(resp) => {
                    let status = resp.status();
                    if status.is_success() {
                        return resp.text().map_err(|e| Error::Http {
                            url: url.to_string(),
                            message: e.to_string(),
                        });
                    }
                    let err = Error::HttpStatus {
                        url: url.to_string(),
                        status: status.as_u16(),
                    };
                    if !status.is_server_error() {
                        return Err(err);
                    }
                    last = Some(err);
                }
                Err(e) => {
                    last = Some(Error::Http {
                        url: url.to_string(),
                        message: e.to_string(),
                    })
                }
            }
        }
        Err(last.expect("at least one attempt"))
    }
}

pub(crate) fn join_url(endpoint: &str, path: &str) -> String {
    format!(
        "{}/{}",
        endpoint.trim_end_matches('/'),
        path.trim_start_matches('/')
    )
}
