//! TOML configuration and backend construction.
//!
//! ```toml
//! dictionary = "/usr/share/cmudict/cmudict.dict"
//! seed = 7
//! pooled = false
//!
//! [embed]
//! kind = "remote"
//! endpoint = "http://localhost:8080"
//! api_key_env = "LYR_EMBED_KEY"
//! ```
//!
//! Command-line flags override file values. API keys are read only from the
//! environment variable a service names (or its default variable).

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use lyr_core::semantics::{
    CoherenceScorer, EmbeddingBackend, IdentityTranslator, RemoteBackend, RemoteConfig, StubCoherence, StubEmbedding, TranslationBackend,
};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Stub,
    Remote,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    #[serde(default)]
    pub kind: BackendKind,
    pub endpoint: Option<String>,
    pub api_key_env: Option<String>,
    pub batch_size: Option<usize>,
    pub max_attempts: Option<u32>,
    pub timeout_secs: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub corpus: Option<PathBuf>,
    pub dictionary: Option<PathBuf>,
    pub jamo_table: Option<PathBuf>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub pooled: bool,
    #[serde(default)]
    pub official_only: bool,
    #[serde(default)]
    pub embed: ServiceConfig,
    #[serde(default)]
    pub translate: ServiceConfig,
    #[serde(default)]
    pub nsp: ServiceConfig,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Service {
    Embed,
    Translate,
    Nsp,
}

impl Service {
    fn name(self) -> &'static str {
        match self {
            Service::Embed => "embed",
            Service::Translate => "translate",
            Service::Nsp => "nsp",
        }
    }

    fn default_key_env(self) -> &'static str {
        match self {
            Service::Embed => "LYR_EMBED_KEY",
            Service::Translate => "LYR_TRANSLATE_KEY",
            Service::Nsp => "LYR_NSP_KEY",
        }
    }
}

fn remote(service: Service, cfg: &ServiceConfig) -> Result<RemoteBackend> {
    let Some(endpoint) = cfg.endpoint.as_deref().filter(|e| !e.trim().is_empty()) else {
        bail!("[{}] kind = \"remote\" requires an endpoint", service.name());
    };
    let mut rc = RemoteConfig::new(endpoint);
    let key_env = cfg.api_key_env.as_deref().unwrap_or(service.default_key_env());
    rc.api_key = std::env::var(key_env).ok().filter(|k| !k.is_empty());
    if let Some(b) = cfg.batch_size {
        rc.batch_size = b;
    }
    if let Some(a) = cfg.max_attempts {
        rc.max_attempts = a;
    }
    if let Some(t) = cfg.timeout_secs {
        rc.timeout = std::time::Duration::from_secs(t);
    }
    Ok(RemoteBackend::new(rc))
}

pub fn embedding(cfg: &ServiceConfig) -> Result<Box<dyn EmbeddingBackend>> {
    Ok(match cfg.kind {
        BackendKind::Stub => Box::new(StubEmbedding::default()),
        BackendKind::Remote => Box::new(remote(Service::Embed, cfg)?),
    })
}

pub fn translation(cfg: &ServiceConfig) -> Result<Box<dyn TranslationBackend>> {
    Ok(match cfg.kind {
        BackendKind::Stub => Box::new(IdentityTranslator),
        BackendKind::Remote => Box::new(remote(Service::Translate, cfg)?),
    })
}

pub fn coherence(cfg: &ServiceConfig) -> Result<Box<dyn CoherenceScorer>> {
    Ok(match cfg.kind {
        BackendKind::Stub => Box::new(StubCoherence::default()),
        BackendKind::Remote => Box::new(remote(Service::Nsp, cfg)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let cfg: Config = toml::from_str(
            r#"
            seed = 3
            pooled = true
            [embed]
            kind = "remote"
            endpoint = "http://localhost:1"
            [nsp]
            kind = "stub"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.seed, Some(3));
        assert!(cfg.pooled);
        assert_eq!(cfg.embed.kind, BackendKind::Remote);
        assert_eq!(cfg.translate.kind, BackendKind::Stub);
        assert!(embedding(&cfg.embed).is_ok());
    }

    #[test]
    fn remote_without_endpoint_is_rejected() {
        let cfg: Config = toml::from_str("[translate]\nkind = \"remote\"\n").unwrap();
        let err = translation(&cfg.translate).err().unwrap();
        assert!(err.to_string().contains("[translate]"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<Config>("[embed]\nkind = \"stub\"\napi_key = \"secret\"\n").is_err());
        assert!(toml::from_str::<Config>("[embed]\nkind = \"gpu\"\n").is_err());
    }
}
