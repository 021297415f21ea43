use std::time::Duration;

use serde_json::{json, Value};
use waterbid_core::chat::ChatRequest;

use crate::{ChatTransport, GatewayError, TransportError};

pub const ENV_ENDPOINT: &str = "WATERBID_LLM_ENDPOINT";
pub const ENV_API_KEY: &str = "WATERBID_LLM_API_KEY";
pub const ENV_MODEL: &str = "WATERBID_LLM_MODEL";
pub const ENV_API_VERSION: &str = "WATERBID_LLM_API_VERSION";

/// Where and how to reach the provider.
///
/// With an `api_version` the endpoint is treated as an Azure resource
/// (`{endpoint}/openai/deployments/{model}/chat/completions?api-version=..`,
/// `api-key` header). Without one, `endpoint` is the full chat-completions
/// URL and the key is sent as a bearer token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProviderConfig {
    pub endpoint: String,
    pub api_key: String,
    pub model: Option<String>,
    pub api_version: Option<String>,
}

impl ProviderConfig {
    pub fn from_env() -> Result<Self, GatewayError> {
        let var = |name| std::env::var(name).ok().filter(|v: &String| !v.is_empty());
        Ok(Self {
            endpoint: var(ENV_ENDPOINT).ok_or(GatewayError::MissingEnv(ENV_ENDPOINT))?,
            api_key: var(ENV_API_KEY).ok_or(GatewayError::MissingEnv(ENV_API_KEY))?,
            model: var(ENV_MODEL),
            api_version: var(ENV_API_VERSION),
        })
    }

    pub fn url_for(&self, model: &str) -> String {
        let base = self.endpoint.trim_end_matches('/');
        match &self.api_version {
            Some(v) => format!("{base}/openai/deployments/{model}/chat/completions?api-version={v}"),
            None => base.to_string(),
        }
    }
}

pub struct HttpTransport {
    config: ProviderConfig,
    client: reqwest::blocking::Client,
}

impl HttpTransport {
    pub fn new(config: ProviderConfig) -> Result<Self, GatewayError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(300))
            .build()
            .map_err(|e| GatewayError::Client(e.to_string()))?;
        Ok(Self { config, client })
    }
}

/// Pulls `choices[0].message.content` out of a response body.
pub(crate) fn response_text(body: &Value) -> Result<String, TransportError> {
    body.pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| TransportError::Fatal(format!("response has no message content: {body}")))
}

impl ChatTransport for HttpTransport {
    fn send(&self, request: &ChatRequest) -> Result<String, TransportError> {
        let model = self.config.model.as_deref().unwrap_or(&request.model);
        let body = json!({
            "model": model,
            "messages": request.messages,
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        });
        let mut call = self.client.post(self.config.url_for(model)).json(&body);
        call = if self.config.api_version.is_some() {
            call.header("api-key", &self.config.api_key)
        } else {
            call.bearer_auth(&self.config.api_key)
        };
        let resp = call
            .send()
            .map_err(|e| TransportError::Transient(e.to_string()))?;
        let status = resp.status();
        let text = resp
            .text()
            .map_err(|e| TransportError::Transient(e.to_string()))?;
        if status.as_u16() == 429 {
            return Err(TransportError::RateLimited(text));
        }
        if status.is_server_error() {
            return Err(TransportError::Transient(format!("{status}: {text}")));
        }
        if !status.is_success() {
            return Err(TransportError::Fatal(format!("{status}: {text}")));
        }
        let value: Value =
            serde_json::from_str(&text).map_err(|e| TransportError::Fatal(e.to_string()))?;
        response_text(&value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn azure_and_plain_urls() {
        let mut c = ProviderConfig {
            endpoint: "https://example.openai.azure.com/".into(),
            api_key: "k".into(),
            model: None,
            api_version: Some("2023-07-01-preview".into()),
        };
        assert_eq!(
            c.url_for("gpt-4-32k"),
            "https://example.openai.azure.com/openai/deployments/gpt-4-32k/chat/completions?api-version=2023-07-01-preview"
        );
        c.api_version = None;
        c.endpoint = "http://localhost:8080/v1/chat/completions".into();
        assert_eq!(c.url_for("x"), "http://localhost:8080/v1/chat/completions");
    }

    #[test]
    fn content_extraction() {
        let body = json!({"choices": [{"message": {"role": "assistant", "content": "I bid $5"}}]});
        assert_eq!(response_text(&body).unwrap(), "I bid $5");
        assert!(response_text(&json!({"choices": []})).is_err());
    }
}
