//! HTTP+JSON clients for embedding, translation and coherence services.
//!
//! Endpoints (relative to the configured base URL):
//!
//! - `POST /embed {"texts":[...]}` -> `{"embeddings":[[...]]}`
//! - `POST /translate {"texts":[...],"source":"ko","target":"en"}` -> `{"texts":[...]}`
//! - `POST /nsp {"pairs":[[prev,next],...]}` -> `{"scores":[...]}`
//!
//! Requests carry at most `batch_size` items; failed requests are retried
//! with exponential backoff. Results are reassembled in input order.

use std::thread;
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{BackendError, CoherenceScorer, EmbeddingBackend, TranslationBackend};
use crate::Real;

#[derive(Debug, Clone)]
pub struct RemoteConfig {
    /// Base URL, e.g. `http://localhost:8080`.
    pub endpoint: String,
    /// Sent as `Authorization: Bearer <key>` when present.
    pub api_key: Option<String>,
    pub max_attempts: u32,
    pub initial_backoff: Duration,
    pub batch_size: usize,
    pub timeout: Duration,
}

impl RemoteConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            api_key: None,
            max_attempts: 3,
            initial_backoff: Duration::from_millis(200),
            batch_size: 64,
            timeout: Duration::from_secs(60),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RemoteBackend {
    config: RemoteConfig,
    agent: ureq::Agent,
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [String],
}

#[derive(Deserialize)]
struct EmbedResponse {
    embeddings: Vec<Vec<Real>>,
}

#[derive(Serialize)]
struct TranslateRequest<'a> {
    texts: &'a [String],
    source: &'a str,
    target: &'a str,
}

#[derive(Deserialize)]
struct TranslateResponse {
    texts: Vec<String>,
}

#[derive(Serialize)]
struct NspRequest<'a> {
    pairs: Vec<[&'a str; 2]>,
}

#[derive(Deserialize)]
struct NspResponse {
    scores: Vec<Real>,
}

impl RemoteBackend {
    pub fn new(config: RemoteConfig) -> Self {
        let agent = ureq::Agent::config_builder().timeout_global(Some(config.timeout)).build().into();
        Self { config, agent }
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.config
    }

    fn url(&self, path: &str) -> String {
        format!("{}/{}", self.config.endpoint.trim_end_matches('/'), path)
    }

    fn post<B: Serialize, R: DeserializeOwned>(&self, path: &str, body: &B) -> Result<R, BackendError> {
        let url = self.url(path);
        let mut backoff = self.config.initial_backoff;
        let mut attempt = 1;
        loop {
            match self.post_once(&url, body) {
                Ok(r) => return Ok(r),
                Err(e) if e.is_retriable() && attempt < self.config.max_attempts.max(1) => {
                    log::warn!("{url}: attempt {attempt} failed ({e}); retrying in {backoff:?}");
                    thread::sleep(backoff);
                    backoff *= 2;
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }

    fn post_once<B: Serialize, R: DeserializeOwned>(&self, url: &str, body: &B) -> Result<R, BackendError> {
        let mut req = self.agent.post(url);
        if let Some(key) = &self.config.api_key {
            req = req.header("Authorization", format!("Bearer {key}"));
        }
        let transport = |message: String, retriable: bool| BackendError::Transport { endpoint: url.to_owned(), message, retriable };
        let resp = req.send_json(body).map_err(|e| match e {
            ureq::Error::StatusCode(code) => transport(format!("HTTP {code}"), code >= 500 || code == 429 || code == 408),
            ureq::Error::Io(_)
            | ureq::Error::Timeout(_)
            | ureq::Error::HostNotFound
            | ureq::Error::ConnectionFailed
            | ureq::Error::Protocol(_) => transport(e.to_string(), true),
            other => transport(other.to_string(), false),
        })?;
        resp.into_body().read_json::<R>().map_err(|e| match e {
            ureq::Error::Io(_) | ureq::Error::Timeout(_) => transport(e.to_string(), true),
            other => BackendError::Data(format!("{url}: {other}")),
        })
    }

    fn batches<'a, T>(&self, items: &'a [T]) -> std::slice::Chunks<'a, T> {
        items.chunks(self.config.batch_size.max(1))
    }
}

fn expect_len<T>(got: Vec<T>, want: usize, what: &str) -> Result<Vec<T>, BackendError> {
    if got.len() == want {
        Ok(got)
    } else {
        Err(BackendError::Data(format!("{what}: expected {want} items, got {}", got.len())))
    }
}

fn normalized(mut v: Vec<Real>) -> Result<Vec<Real>, BackendError> {
    let norm = v.iter().map(|x| x * x).sum::<Real>().sqrt();
    if !norm.is_finite() || norm == 0.0 {
        return Err(BackendError::Data("embedding has zero or non-finite norm".into()));
    }
    v.iter_mut().for_each(|x| *x /= norm);
    Ok(v)
}

impl EmbeddingBackend for RemoteBackend {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<Real>>, BackendError> {
        let mut out = Vec::with_capacity(texts.len());
        let mut dim = None;
        for batch in self.batches(texts) {
            let resp: EmbedResponse = self.post("embed", &EmbedRequest { texts: batch })?;
            for v in expect_len(resp.embeddings, batch.len(), "embed")? {
                if *dim.get_or_insert(v.len()) != v.len() {
                    return Err(BackendError::Data("embeddings of differing dimension".into()));
                }
                out.push(normalized(v)?);
            }
        }
        Ok(out)
    }
}

impl TranslationBackend for RemoteBackend {
    fn translate(&self, texts: &[String], source: &str, target: &str) -> Result<Vec<String>, BackendError> {
        let mut out = Vec::with_capacity(texts.len());
        for batch in self.batches(texts) {
            let resp: TranslateResponse = self.post("translate", &TranslateRequest { texts: batch, source, target })?;
            out.extend(expect_len(resp.texts, batch.len(), "translate")?);
        }
        Ok(out)
    }
}

impl CoherenceScorer for RemoteBackend {
    fn score(&self, prev: &str, next: &str) -> Result<Real, BackendError> {
        let scores = self.score_pairs(&[(prev.to_owned(), next.to_owned())])?;
        Ok(scores[0])
    }

    fn score_pairs(&self, pairs: &[(String, String)]) -> Result<Vec<Real>, BackendError> {
        let mut out = Vec::with_capacity(pairs.len());
        for batch in self.batches(pairs) {
            let body = NspRequest { pairs: batch.iter().map(|(p, n)| [p.as_str(), n.as_str()]).collect() };
            let resp: NspResponse = self.post("nsp", &body)?;
            out.extend(expect_len(resp.scores, batch.len(), "nsp")?);
        }
        Ok(out)
    }
}
