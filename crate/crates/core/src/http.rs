//! Blocking JSON-over-HTTP with bounded retries, shared by the embedding
//! and chat providers.

use std::thread::sleep;
use std::time::Duration;

use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub(crate) struct RetryPolicy {
    pub max_retries: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_retries: 3,
            base_delay: Duration::from_millis(250),
        }
    }
}

pub(crate) struct JsonClient {
    agent: ureq::Agent,
    retry: RetryPolicy,
}

impl JsonClient {
    pub fn new(retry: RetryPolicy, timeout: Duration) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        JsonClient { agent, retry }
    }

    pub fn post(&self, url: &str, api_key: Option<&str>, body: &Value) -> Result<Value> {
        let payload = body.to_string();
        let mut last_err = String::new();
        for attempt in 0..=self.retry.max_retries {
            if attempt > 0 {
                sleep(self.retry.base_delay * 2u32.saturating_pow(attempt - 1));
            }
            let mut req = self
                .agent
                .post(url)
                .header("Content-Type", "application/json");
            if let Some(key) = api_key {
                req = req.header("Authorization", &format!("Bearer {key}"));
            }
            match req.send(payload.as_str()) {
                Ok(mut resp) => {
                    let status = resp.status().as_u16();
                    let text = resp
                        .body_mut()
                        .read_to_string()
                        .map_err(|e| Error::Provider(format!("{url}: reading body: {e}")));
                    if (200..300).contains(&status) {
                        let text = text?;
                        return serde_json::from_str(&text).map_err(|e| {
                            Error::Provider(format!("{url}: invalid JSON reply: {e}"))
                        });
                    }
                    last_err = format!("{url}: HTTP {status}");
                    if status != 429 && status < 500 {
                        return Err(Error::Provider(last_err));
                    }
                }
                Err(e) => last_err = format!("{url}: {e}"),
            }
            log::debug!("attempt {} failed: {last_err}", attempt + 1);
        }
        Err(Error::Provider(format!(
            "{last_err} (gave up after {} attempts)",
            self.retry.max_retries + 1
        )))
    }
}
