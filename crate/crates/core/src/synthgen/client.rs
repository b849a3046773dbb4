use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::mock::mock_generate;
use super::PromptJob;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompletionError {
    /// Credentials rejected; retrying will not help.
    Auth(String),
    /// Timeouts, connection failures, rate limits and 5xx responses.
    Transient(String),
    /// The request itself was refused or the response was unusable.
    Rejected(String),
}

impl std::fmt::Display for CompletionError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CompletionError::Auth(m) => write!(f, "authentication failed: {m}"),
            CompletionError::Transient(m) => write!(f, "transient failure: {m}"),
            CompletionError::Rejected(m) => write!(f, "request rejected: {m}"),
        }
    }
}

pub trait CompletionClient: Send + Sync {
    fn complete(&self, job: &PromptJob) -> std::result::Result<String, CompletionError>;

    /// Short description recorded in corpus provenance.
    fn describe(&self) -> String;
}

/// Answers every job with [`mock_generate`].
#[derive(Debug, Clone)]
pub struct MockClient {
    pub seed: u64,
}

impl MockClient {
    pub fn new(seed: u64) -> Self {
        MockClient { seed }
    }
}

impl CompletionClient for MockClient {
    fn complete(&self, job: &PromptJob) -> std::result::Result<String, CompletionError> {
        Ok(mock_generate(job, self.seed))
    }

    fn describe(&self) -> String {
        format!("mock(seed={})", self.seed)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ApiStyle {
    /// `{model, messages: [{role, content}], ...}`, reply in `choices[0].message.content`.
    #[default]
    Chat,
    /// `{model, prompt, ...}`, reply in `choices[0].text`.
    Completions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub initial_backoff_ms: u64,
    pub max_backoff_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 4,
            initial_backoff_ms: 500,
            max_backoff_ms: 8_000,
        }
    }
}

impl RetryPolicy {
    /// Delay before retry number `attempt` (1-based), doubling up to the cap.
    pub fn backoff(&self, attempt: u32) -> Duration {
        let factor = 1u64.checked_shl(attempt.saturating_sub(1)).unwrap_or(u64::MAX);
        Duration::from_millis(self.initial_backoff_ms.saturating_mul(factor).min(self.max_backoff_ms))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmClientConfig {
    pub endpoint: String,
    pub model: String,
    pub api_key_env: String,
    pub style: ApiStyle,
    pub max_concurrent: usize,
    pub timeout_secs: u64,
    pub retry: RetryPolicy,
}

impl Default for LlmClientConfig {
    fn default() -> Self {
        LlmClientConfig {
            endpoint: "https://api.openai.com/v1/chat/completions".to_string(),
            model: "gpt-3.5-turbo".to_string(),
            api_key_env: "OPENAI_API_KEY".to_string(),
            style: ApiStyle::Chat,
            max_concurrent: 4,
            timeout_secs: 60,
            retry: RetryPolicy::default(),
        }
    }
}

impl LlmClientConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_concurrent == 0 {
            return Err(Error::Config("max_concurrent must be at least 1".into()));
        }
        if self.retry.max_attempts == 0 {
            return Err(Error::Config("retry.max_attempts must be at least 1".into()));
        }
        if self.endpoint.is_empty() || self.model.is_empty() {
            return Err(Error::Config("endpoint and model must be set".into()));
        }
        Ok(())
    }
}

pub struct HttpClient {
    config: LlmClientConfig,
    api_key: String,
    agent: ureq::Agent,
}

impl HttpClient {
    /// Reads the API key from the configured environment variable.
    pub fn from_env(config: LlmClientConfig) -> Result<Self> {
        let key = std::env::var(&config.api_key_env)
            .map_err(|_| Error::Config(format!("environment variable {} is not set", config.api_key_env)))?;
        Self::with_key(config, key)
    }

    pub fn with_key(config: LlmClientConfig, api_key: String) -> Result<Self> {
        config.validate()?;
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs.max(1))))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(HttpClient { config, api_key, agent })
    }

    pub fn config(&self) -> &LlmClientConfig {
        &self.config
    }

    fn request_body(&self, job: &PromptJob) -> Value {
        let mut body = match self.config.style {
            ApiStyle::Chat => json!({
                "model": self.config.model,
                "messages": [{"role": "user", "content": job.prompt}],
            }),
            ApiStyle::Completions => json!({
                "model": self.config.model,
                "prompt": job.prompt,
            }),
        };
        body["temperature"] = json!(job.sampling.temperature);
        body["max_tokens"] = json!(job.sampling.max_tokens);
        if let Some(seed) = job.sampling.seed {
            body["seed"] = json!(seed);
        }
        body
    }
}

fn classify_status(status: u16, body: &str) -> CompletionError {
    let snippet: String = body.chars().take(200).collect();
    match status {
        401 | 403 => CompletionError::Auth(format!("HTTP {status}: {snippet}")),
        408 | 409 | 429 | 500..=599 => CompletionError::Transient(format!("HTTP {status}: {snippet}")),
        _ => CompletionError::Rejected(format!("HTTP {status}: {snippet}")),
    }
}

fn extract_text(style: ApiStyle, v: &Value) -> Option<String> {
    let choice = v.get("choices")?.get(0)?;
    let text = match style {
        ApiStyle::Chat => choice.get("message")?.get("content")?.as_str(),
        ApiStyle::Completions => choice.get("text")?.as_str(),
    }?;
    Some(text.trim().to_string())
}

impl CompletionClient for HttpClient {
    fn complete(&self, job: &PromptJob) -> std::result::Result<String, CompletionError> {
        let resp = self
            .agent
            .post(&self.config.endpoint)
            .header("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(self.request_body(job));
        let mut resp = match resp {
            Ok(r) => r,
            Err(e) => return Err(CompletionError::Transient(e.to_string())),
        };
        let status = resp.status().as_u16();
        let body = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| CompletionError::Transient(e.to_string()))?;
        if !(200..300).contains(&status) {
            return Err(classify_status(status, &body));
        }
        let value: Value =
            serde_json::from_str(&body).map_err(|e| CompletionError::Rejected(format!("invalid JSON: {e}")))?;
        match extract_text(self.config.style, &value) {
            Some(t) if !t.is_empty() => Ok(t),
            Some(_) => Err(CompletionError::Rejected("empty completion".into())),
            None => Err(CompletionError::Rejected("response has no completion text".into())),
        }
    }

    fn describe(&self) -> String {
        format!("{} via {}", self.config.model, self.config.endpoint)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthgen::{expand_plan, GenerationPlan};
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;

    /// Serves one canned response per connection and returns the request bodies.
    fn serve(responses: Vec<(u16, String)>) -> (String, std::thread::JoinHandle<Vec<String>>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
        let handle = std::thread::spawn(move || {
            let mut bodies = Vec::new();
            for (status, body) in responses {
                let (stream, _) = listener.accept().unwrap();
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut len = 0;
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    if line == "\r\n" || line.is_empty() {
                        break;
                    }
                    if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                        len = v.trim().parse().unwrap();
                    }
                }
                let mut buf = vec![0; len];
                reader.read_exact(&mut buf).unwrap();
                bodies.push(String::from_utf8(buf).unwrap());
                let mut stream = stream;
                write!(
                    stream,
                    "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                )
                .unwrap();
            }
            bodies
        });
        (url, handle)
    }

    fn client(url: String, style: ApiStyle) -> HttpClient {
        let config = LlmClientConfig {
            endpoint: url,
            model: "test-model".into(),
            style,
            ..LlmClientConfig::default()
        };
        HttpClient::with_key(config, "k".into()).unwrap()
    }

    #[test]
    fn chat_request_and_reply() {
        let reply = r#"{"choices":[{"message":{"role":"assistant","content":" I am stressed. "}}]}"#;
        let (url, h) = serve(vec![(200, reply.into())]);
        let job = &expand_plan(&GenerationPlan::blog_only()).unwrap()[0];
        assert_eq!(client(url, ApiStyle::Chat).complete(job).unwrap(), "I am stressed.");
        let sent: Value = serde_json::from_str(&h.join().unwrap()[0]).unwrap();
        assert_eq!(sent["model"], "test-model");
        assert_eq!(sent["messages"][0]["content"], job.prompt.as_str());
        assert_eq!(sent["max_tokens"], 256);
        assert_eq!(sent["temperature"], 1.0);
    }

    #[test]
    fn completions_style() {
        let (url, h) = serve(vec![(200, r#"{"choices":[{"text":"money"}]}"#.into())]);
        let job = &expand_plan(&GenerationPlan::blog_only()).unwrap()[0];
        assert_eq!(client(url, ApiStyle::Completions).complete(job).unwrap(), "money");
        let sent: Value = serde_json::from_str(&h.join().unwrap()[0]).unwrap();
        assert_eq!(sent["prompt"], job.prompt.as_str());
    }

    #[test]
    fn status_classification() {
        let (url, h) = serve(vec![
            (401, "{}".into()),
            (429, "{}".into()),
            (400, "{}".into()),
            (200, "{\"choices\":[]}".into()),
        ]);
        let c = client(url, ApiStyle::Chat);
        let job = &expand_plan(&GenerationPlan::blog_only()).unwrap()[0];
        assert!(matches!(c.complete(job), Err(CompletionError::Auth(_))));
        assert!(matches!(c.complete(job), Err(CompletionError::Transient(_))));
        assert!(matches!(c.complete(job), Err(CompletionError::Rejected(_))));
        assert!(matches!(c.complete(job), Err(CompletionError::Rejected(_))));
        h.join().unwrap();
    }

    #[test]
    fn missing_key_is_config_error() {
        let config = LlmClientConfig {
            api_key_env: "FIDELITY_TEST_KEY_THAT_IS_NOT_SET".into(),
            ..LlmClientConfig::default()
        };
        assert!(matches!(HttpClient::from_env(config), Err(Error::Config(_))));
    }

    #[test]
    fn backoff_doubles_and_caps() {
        let p = RetryPolicy {
            max_attempts: 5,
            initial_backoff_ms: 100,
            max_backoff_ms: 350,
        };
        assert_eq!(p.backoff(1), Duration::from_millis(100));
        assert_eq!(p.backoff(2), Duration::from_millis(200));
        assert_eq!(p.backoff(3), Duration::from_millis(350));
        assert_eq!(p.backoff(70), Duration::from_millis(350));
    }

    #[test]
    fn zero_attempts_rejected() {
        let mut c = LlmClientConfig::default();
        c.retry.max_attempts = 0;
        assert!(c.validate().is_err());
    }
}
