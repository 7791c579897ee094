//! Language-model backends: transcript recording, replay and a live
//! OpenAI-compatible chat endpoint.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::thread;
use std::time::Duration;

use roco_core::llm::{ChatRequest, LanguageModel, LlmError, TemplateId};
use serde::{Deserialize, Serialize};

/// One line of `transcript.jsonl`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub seq: u64,
    pub template_id: TemplateId,
    pub temperature: f64,
    pub prompt_sha256: String,
    pub prompt: String,
    pub response: String,
}

pub fn read_transcript(path: &Path) -> io::Result<Vec<TranscriptRecord>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("{}:{}: {e}", path.display(), i + 1)))?;
        out.push(rec);
    }
    Ok(out)
}

/// Appends every successful completion of the inner model to a transcript.
pub struct Recorder<M> {
    inner: M,
    records: Vec<TranscriptRecord>,
    sink: Option<BufWriter<File>>,
}

impl<M: LanguageModel> Recorder<M> {
    pub fn new(inner: M) -> Self {
        Self {
            inner,
            records: Vec::new(),
            sink: None,
        }
    }

    /// Also streams records to `path`, one JSON object per line.
    pub fn to_file(inner: M, path: &Path) -> io::Result<Self> {
        Ok(Self {
            inner,
            records: Vec::new(),
            sink: Some(BufWriter::new(File::create(path)?)),
        })
    }

    pub fn records(&self) -> &[TranscriptRecord] {
        &self.records
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }
}

impl<M: LanguageModel> LanguageModel for Recorder<M> {
    fn complete(&mut self, request: &ChatRequest) -> Result<String, LlmError> {
        let response = self.inner.complete(request)?;
        let rec = TranscriptRecord {
            seq: self.records.len() as u64,
            template_id: request.template_id,
            temperature: request.temperature,
            prompt_sha256: request.prompt_sha256(),
            prompt: request.prompt.clone(),
            response: response.clone(),
        };
        if let Some(sink) = &mut self.sink {
            let line = serde_json::to_string(&rec).expect("records serialize");
            if let Err(e) = writeln!(sink, "{line}").and_then(|()| sink.flush()) {
                log::error!("transcript write failed: {e}");
            }
        }
        self.records.push(rec);
        Ok(response)
    }
}

/// Serves responses of a recorded run in order, checking that each request
/// matches the recorded one.
pub struct ReplayModel {
    records: Vec<TranscriptRecord>,
    next: usize,
}

impl ReplayModel {
    pub fn new(records: Vec<TranscriptRecord>) -> Self {
        Self { records, next: 0 }
    }

    pub fn from_file(path: &Path) -> io::Result<Self> {
        read_transcript(path).map(Self::new)
    }

    pub fn remaining(&self) -> usize {
        self.records.len() - self.next
    }
}

impl LanguageModel for ReplayModel {
    fn complete(&mut self, request: &ChatRequest) -> Result<String, LlmError> {
        let Some(rec) = self.records.get(self.next) else {
            return Err(LlmError::Replay(format!("transcript ends after {} records", self.records.len())));
        };
        if rec.template_id != request.template_id {
            return Err(LlmError::Replay(format!(
                "record {} is {} but the run asked for {}",
                rec.seq, rec.template_id, request.template_id
            )));
        }
        if rec.prompt_sha256 != request.prompt_sha256() {
            return Err(LlmError::Replay(format!("record {} was made from a different prompt", rec.seq)));
        }
        self.next += 1;
        Ok(rec.response.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LiveConfig {
    /// Base URL; `/chat/completions` is appended.
    pub endpoint: String,
    pub model: String,
    /// Environment variable holding the bearer token.
    pub api_key_env: String,
    pub max_retries: u32,
    pub initial_backoff_s: f64,
    pub request_timeout_s: f64,
}

impl Default for LiveConfig {
    fn default() -> Self {
        Self {
            endpoint: "https://api.openai.com/v1".into(),
            model: "gpt-4o-mini".into(),
            api_key_env: "ROCO_API_KEY".into(),
            max_retries: 4,
            initial_backoff_s: 1.0,
            request_timeout_s: 120.0,
        }
    }
}

pub struct LiveModel {
    config: LiveConfig,
    agent: ureq::Agent,
    api_key: Option<String>,
}

#[derive(Deserialize)]
struct ChatChoiceMessage {
    content: Option<String>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatChoiceMessage,
}

#[derive(Deserialize)]
struct ChatCompletion {
    choices: Vec<ChatChoice>,
}

enum Attempt {
    Retry(String),
    Fatal(String),
}

impl LiveModel {
    pub fn new(config: LiveConfig) -> Self {
        let api_key = std::env::var(&config.api_key_env).ok();
        if api_key.is_none() {
            log::warn!("{} is not set; requests are sent without credentials", config.api_key_env);
        }
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(config.request_timeout_s)))
            .build()
            .into();
        Self { config, agent, api_key }
    }

    fn attempt(&self, request: &ChatRequest) -> Result<String, Attempt> {
        let url = format!("{}/chat/completions", self.config.endpoint.trim_end_matches('/'));
        let body = serde_json::json!({
            "model": self.config.model,
            "temperature": request.temperature,
            "messages": [{"role": "user", "content": request.prompt}],
        });
        let mut call = self.agent.post(&url);
        if let Some(key) = &self.api_key {
            call = call.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = call.send_json(&body).map_err(|e| match e {
            ureq::Error::StatusCode(code) if code == 429 || code >= 500 => Attempt::Retry(format!("HTTP {code}")),
            ureq::Error::StatusCode(code) => Attempt::Fatal(format!("HTTP {code}")),
            other => Attempt::Retry(other.to_string()),
        })?;
        let parsed: ChatCompletion = resp
            .body_mut()
            .read_json()
            .map_err(|e| Attempt::Retry(format!("bad completion body: {e}")))?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| Attempt::Retry("completion without content".into()))
    }
}

impl LanguageModel for LiveModel {
    fn complete(&mut self, request: &ChatRequest) -> Result<String, LlmError> {
        let mut delay = self.config.initial_backoff_s;
        let mut last = String::new();
        for attempt in 0..=self.config.max_retries {
            match self.attempt(request) {
                Ok(text) => return Ok(text),
                Err(Attempt::Fatal(m)) => return Err(LlmError::Transport(m)),
                Err(Attempt::Retry(m)) => {
                    log::warn!("completion attempt {} failed: {m}", attempt + 1);
                    last = m;
                    if attempt < self.config.max_retries {
                        thread::sleep(Duration::from_secs_f64(delay));
                        delay *= 2.0;
                    }
                }
            }
        }
        Err(LlmError::Transport(last))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use roco_core::llm::MockModel;

    fn req(id: TemplateId, prompt: &str) -> ChatRequest {
        ChatRequest::new(id, prompt.into(), None, 0)
    }

    #[test]
    fn record_then_replay() {
        let mut rec = Recorder::new(MockModel::constant("hello"));
        rec.complete(&req(TemplateId::EohInit, "a")).unwrap();
        rec.complete(&req(TemplateId::EohM1, "b")).unwrap();
        let mut replay = ReplayModel::new(rec.records().to_vec());
        assert_eq!(replay.complete(&req(TemplateId::EohInit, "a")).unwrap(), "hello");
        assert!(matches!(replay.complete(&req(TemplateId::EohM1, "changed")), Err(LlmError::Replay(_))));
        assert_eq!(replay.complete(&req(TemplateId::EohM1, "b")).unwrap(), "hello");
        let end = replay.complete(&req(TemplateId::EohM1, "b")).unwrap_err();
        assert!(end.is_terminal());
    }

    #[test]
    fn record_wire_form() {
        let mut rec = Recorder::new(MockModel::constant("r"));
        rec.complete(&req(TemplateId::CriticBetter, "p")).unwrap();
        let line = serde_json::to_string(&rec.records()[0]).unwrap();
        assert_eq!(
            line,
            r#"{"seq":0,"template_id":"critic_better","temperature":1.0,"prompt_sha256":"148de9c5a7a44d19e56cd9ae1a554bf67847afb0c58f6e12fa29ac7ddfca9940","prompt":"p","response":"r"}"#
        );
    }
}
