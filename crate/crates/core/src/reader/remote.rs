//! Client for a generative reader served over HTTP.
//!
//! `POST {endpoint}/generate` with `{"question", "passages", "budget"}`;
//! a 2xx reply is `{"answer", "model"}`, anything else `{"error"}`.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::ReformulatedQuery;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerateRequest {
    pub question: String,
    pub passages: Vec<String>,
    pub budget: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerateResponse {
    pub answer: String,
    pub model: String,
    /// Set by services that had to cut the input to their own subword budget.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncated: Option<bool>,
}

#[derive(Debug, Deserialize)]
struct ErrorBody {
    error: String,
}

impl From<&ReformulatedQuery> for GenerateRequest {
    fn from(rq: &ReformulatedQuery) -> Self {
        GenerateRequest {
            question: rq.question.clone(),
            passages: rq.passages.iter().filter(|p| !p.is_empty()).cloned().collect(),
            budget: rq.token_budget,
        }
    }
}

fn excerpt(body: &str) -> String {
    const MAX: usize = 200;
    match body.char_indices().nth(MAX) {
        Some((i, _)) => format!("{}...", &body[..i]),
        None => body.to_string(),
    }
}

fn generate_url(endpoint: &str) -> String {
    let base = endpoint.trim_end_matches('/');
    if base.ends_with("/generate") {
        base.to_string()
    } else {
        format!("{base}/generate")
    }
}

/// Sends `rq` to the reader service and returns its answer verbatim.
pub fn remote_generate(endpoint: &str, rq: &ReformulatedQuery, timeout: Duration) -> Result<GenerateResponse> {
    let client = reqwest::blocking::Client::builder()
        .timeout(timeout)
        .build()
        .map_err(|e| Error::RemoteReader { status: None, message: e.to_string() })?;
    let response = client
        .post(generate_url(endpoint))
        .json(&GenerateRequest::from(rq))
        .send()
        .map_err(|e| Error::RemoteReader {
            status: e.status().map(|s| s.as_u16()),
            message: if e.is_timeout() { format!("timed out after {timeout:?}") } else { e.to_string() },
        })?;
    let status = response.status();
    let body = response.text().map_err(|e| Error::RemoteReader {
        status: Some(status.as_u16()),
        message: format!("failed to read body: {e}"),
    })?;
    if !status.is_success() {
        let message = serde_json::from_str::<ErrorBody>(&body)
            .map(|b| b.error)
            .unwrap_or_else(|_| excerpt(&body));
        return Err(Error::RemoteReader { status: Some(status.as_u16()), message });
    }
    serde_json::from_str(&body).map_err(|e| Error::RemoteReader {
        status: Some(status.as_u16()),
        message: format!("schema violation ({e}): {}", excerpt(&body)),
    })
}
