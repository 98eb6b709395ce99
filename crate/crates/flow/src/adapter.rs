//! Bridge to any OpenAI-compatible chat-completions endpoint with tool calls.
//!
//! Registry descriptors become function schemas. A reserved `submit_answer`
//! function carries the structured final answer; a plain assistant message
//! is taken as a free-text answer with no option.

use std::time::Duration;

use ctflow_mcp::ToolDescriptor;
use serde_json::{json, Map, Value};

use crate::agent::{Agent, AgentError, AgentMove};
use crate::episode::{format_observation, TaskPrompt, TrajectoryStep};

pub const SUBMIT_ANSWER: &str = "submit_answer";
pub const DEFAULT_ATTEMPTS: u32 = 3;

const SYSTEM_PROMPT: &str = "You analyse CT volumes with the provided tools. Call tools to gather \
evidence, one call per turn. When you are confident, call submit_answer with the option label.";

#[derive(Debug, Clone, PartialEq)]
pub struct ExternalConfig {
    /// Base URL; `/chat/completions` is appended.
    pub endpoint: String,
    pub model: String,
    /// Environment variable holding the bearer token.
    pub api_key_env: String,
    pub attempts: u32,
    /// First retry delay; doubles on each further retry.
    pub base_delay: Duration,
    pub timeout: Duration,
}

impl ExternalConfig {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>, api_key_env: impl Into<String>) -> Self {
        ExternalConfig {
            endpoint: endpoint.into(),
            model: model.into(),
            api_key_env: api_key_env.into(),
            attempts: DEFAULT_ATTEMPTS,
            base_delay: Duration::from_millis(500),
            timeout: Duration::from_secs(120),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AdapterConfigError {
    #[error("no credentials: environment variable {0} is unset or empty")]
    MissingCredentials(String),
    #[error("endpoint must be an http(s) URL, got '{0}'")]
    InvalidEndpoint(String),
    #[error("model id must be non-empty")]
    MissingModel,
}

/// Drops `x-` extension keywords, which function-schema validators may reject.
fn strip_extensions(v: &Value) -> Value {
    match v {
        Value::Object(m) => Value::Object(
            m.iter().filter(|(k, _)| !k.starts_with("x-")).map(|(k, v)| (k.clone(), strip_extensions(v))).collect(),
        ),
        Value::Array(a) => Value::Array(a.iter().map(strip_extensions).collect()),
        other => other.clone(),
    }
}

pub fn function_schemas(tools: &[&ToolDescriptor]) -> Vec<Value> {
    let mut out: Vec<Value> = tools
        .iter()
        .map(|t| {
            json!({"type": "function", "function": {
                "name": t.name, "description": t.description, "parameters": strip_extensions(&t.input_schema),
            }})
        })
        .collect();
    out.push(json!({"type": "function", "function": {
        "name": SUBMIT_ANSWER,
        "description": "Give the final answer and end the episode.",
        "parameters": {
            "type": "object",
            "properties": {"option": {"type": "string"}, "text": {"type": "string"}},
            "required": ["option"],
        },
    }}));
    out
}

pub fn build_messages(prompt: &TaskPrompt, history: &[TrajectoryStep]) -> Vec<Value> {
    let mut user = prompt.query.clone();
    if !prompt.options.is_empty() {
        user.push_str("\nOptions:");
        for (label, text) in &prompt.options {
            user.push_str(&format!("\n{label}. {text}"));
        }
    }
    let mut messages = vec![json!({"role": "system", "content": SYSTEM_PROMPT}), json!({"role": "user", "content": user})];
    for step in history {
        let id = format!("call_{}", step.index);
        let content = if step.thought.is_empty() { Value::Null } else { Value::String(step.thought.clone()) };
        messages.push(json!({
            "role": "assistant",
            "content": content,
            "tool_calls": [{"id": id, "type": "function", "function": {
                "name": step.action.name, "arguments": step.action.args.to_string(),
            }}],
        }));
        messages.push(json!({"role": "tool", "tool_call_id": id, "content": format_observation(&step.observation)}));
    }
    messages
}

/// Maps one chat-completions response body to a move.
pub fn parse_completion(body: &Value) -> Result<AgentMove, AgentError> {
    let malformed = |m: &str| AgentError::Malformed(m.to_string());
    let message = body.pointer("/choices/0/message").ok_or_else(|| malformed("response has no choices[0].message"))?;
    let thought = message.get("content").and_then(Value::as_str).unwrap_or_default().to_string();
    let call = message.get("tool_calls").and_then(Value::as_array).and_then(|c| c.first());
    let Some(call) = call else {
        if thought.trim().is_empty() {
            return Err(malformed("message has neither tool calls nor content"));
        }
        return Ok(AgentMove::answer(String::new(), thought, None));
    };
    let name = call.pointer("/function/name").and_then(Value::as_str).ok_or_else(|| malformed("tool call without a name"))?;
    let raw = call.pointer("/function/arguments").ok_or_else(|| malformed("tool call without arguments"))?;
    // the arguments field is a JSON document inside a string
    let args: Value = match raw {
        Value::String(s) if s.trim().is_empty() => Value::Object(Map::new()),
        Value::String(s) => serde_json::from_str(s).map_err(|e| malformed(&format!("arguments of {name}: {e}")))?,
        Value::Object(_) => raw.clone(),
        _ => return Err(malformed("arguments must be a JSON object")),
    };
    if !args.is_object() {
        return Err(malformed("arguments must be a JSON object"));
    }
    if name == SUBMIT_ANSWER {
        let option = args.get("option").and_then(Value::as_str).ok_or_else(|| malformed("submit_answer needs an option"))?;
        let text = args.get("text").and_then(Value::as_str).map_or_else(|| format!("Option {option}"), str::to_string);
        return Ok(AgentMove::answer(thought, text, Some(option)));
    }
    Ok(AgentMove::call(thought, name, args))
}

pub struct ExternalAgent {
    http: ureq::Agent,
    url: String,
    api_key: String,
    config: ExternalConfig,
    functions: Vec<Value>,
}

impl ExternalAgent {
    pub fn new(config: ExternalConfig, tools: &[&ToolDescriptor], api_key: Option<String>) -> Result<Self, AdapterConfigError> {
        if !(config.endpoint.starts_with("http://") || config.endpoint.starts_with("https://")) {
            return Err(AdapterConfigError::InvalidEndpoint(config.endpoint));
        }
        if config.model.trim().is_empty() {
            return Err(AdapterConfigError::MissingModel);
        }
        let api_key = api_key
            .filter(|k| !k.trim().is_empty())
            .ok_or_else(|| AdapterConfigError::MissingCredentials(config.api_key_env.clone()))?;
        let http: ureq::Agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(config.timeout))
            .build()
            .into();
        Ok(ExternalAgent {
            http,
            url: format!("{}/chat/completions", config.endpoint.trim_end_matches('/')),
            api_key,
            functions: function_schemas(tools),
            config,
        })
    }

    /// Reads the key from the environment variable named in `config`.
    pub fn from_env(config: ExternalConfig, tools: &[&ToolDescriptor]) -> Result<Self, AdapterConfigError> {
        let key = std::env::var(&config.api_key_env).ok();
        Self::new(config, tools, key)
    }

    fn post(&self, body: &Value) -> Result<Value, AgentError> {
        let mut last = String::new();
        for attempt in 0..self.config.attempts.max(1) {
            if attempt > 0 {
                std::thread::sleep(self.config.base_delay * 2u32.pow(attempt - 1));
            }
            let sent = self
                .http
                .post(&self.url)
                .header("Authorization", &format!("Bearer {}", self.api_key))
                .send_json(body);
            match sent {
                Ok(mut resp) => {
                    let status = resp.status().as_u16();
                    if status == 429 || status >= 500 {
                        last = format!("HTTP {status}");
                        continue;
                    }
                    if status >= 400 {
                        return Err(AgentError::Transport(format!("HTTP {status}")));
                    }
                    return resp.body_mut().read_json::<Value>().map_err(|e| AgentError::Malformed(e.to_string()));
                }
                Err(e) => last = e.to_string(),
            }
        }
        Err(AgentError::Transport(format!("{} attempts failed, last: {last}", self.config.attempts.max(1))))
    }
}

impl Agent for ExternalAgent {
    fn next_move(&mut self, prompt: &TaskPrompt, history: &[TrajectoryStep]) -> Result<AgentMove, AgentError> {
        let body = json!({
            "model": self.config.model,
            "messages": build_messages(prompt, history),
            "tools": self.functions,
            "temperature": 0,
        });
        parse_completion(&self.post(&body)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::Action;

    #[test]
    fn completion_parsing() {
        let call = json!({"choices": [{"message": {"content": "look", "tool_calls": [
            {"id": "1", "type": "function", "function": {"name": "view_slice", "arguments": "{\"index\": 4}"}}
        ]}}]});
        assert_eq!(parse_completion(&call).unwrap(), AgentMove::call("look", "view_slice", json!({"index": 4})));

        let plain = json!({"choices": [{"message": {"content": "It is B."}}]});
        assert!(matches!(parse_completion(&plain).unwrap().action, Action::FinalAnswer(ref a) if a.option.is_none()));

        let submit = json!({"choices": [{"message": {"content": null, "tool_calls": [
            {"function": {"name": "submit_answer", "arguments": "{\"option\": \"C\"}"}}
        ]}}]});
        assert_eq!(parse_completion(&submit).unwrap(), AgentMove::answer("", "Option C", Some("C")));

        let broken = json!({"choices": [{"message": {"tool_calls": [
            {"function": {"name": "view_slice", "arguments": "{index: 4"}}
        ]}}]});
        assert!(matches!(parse_completion(&broken), Err(AgentError::Malformed(_))));
        assert!(parse_completion(&json!({"choices": []})).is_err());
    }

    #[test]
    fn extension_keywords_are_stripped() {
        let schema = json!({"type": "object", "properties": {"index": {"type": "integer", "x-bound": "slice_index"}}});
        assert_eq!(strip_extensions(&schema), json!({"type": "object", "properties": {"index": {"type": "integer"}}}));
    }

    #[test]
    fn configuration_is_checked_up_front() {
        let cfg = ExternalConfig::new("http://localhost:1", "m", "CTFLOW_TEST_UNSET_KEY");
        assert_eq!(
            ExternalAgent::new(cfg.clone(), &[], None).err(),
            Some(AdapterConfigError::MissingCredentials("CTFLOW_TEST_UNSET_KEY".into()))
        );
        let bad = ExternalConfig { endpoint: "localhost".into(), ..cfg.clone() };
        assert!(matches!(ExternalAgent::new(bad, &[], Some("k".into())), Err(AdapterConfigError::InvalidEndpoint(_))));
        assert!(ExternalAgent::new(cfg, &[], Some("k".into())).is_ok());
    }
}
