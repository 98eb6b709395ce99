use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::episode::{TaskPrompt, TrajectoryStep};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolCall {
    pub name: String,
    #[serde(default)]
    pub args: Value,
}

impl ToolCall {
    pub fn new(name: impl Into<String>, args: Value) -> Self {
        ToolCall { name: name.into(), args }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalAnswer {
    pub text: String,
    /// Chosen option label, for multiple-choice cases.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub option: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    ToolCall(ToolCall),
    FinalAnswer(FinalAnswer),
}

/// One agent turn: free-form reasoning plus exactly one action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentMove {
    #[serde(default)]
    pub thought: String,
    pub action: Action,
}

impl AgentMove {
    pub fn call(thought: impl Into<String>, name: impl Into<String>, args: Value) -> Self {
        AgentMove { thought: thought.into(), action: Action::ToolCall(ToolCall::new(name, args)) }
    }

    pub fn answer(thought: impl Into<String>, text: impl Into<String>, option: Option<&str>) -> Self {
        AgentMove {
            thought: thought.into(),
            action: Action::FinalAnswer(FinalAnswer { text: text.into(), option: option.map(str::to_string) }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AgentError {
    #[error("script exhausted before a final answer")]
    ScriptExhausted,
    #[error("malformed move: {0}")]
    Malformed(String),
    #[error("transport: {0}")]
    Transport(String),
}

/// History in, move out. Implementations see the full, untruncated history.
pub trait Agent {
    fn next_move(&mut self, prompt: &TaskPrompt, history: &[TrajectoryStep]) -> Result<AgentMove, AgentError>;
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScriptError {
    #[error("script is empty")]
    Empty,
    #[error("script must end with a final answer")]
    NoFinalAnswer,
}

/// Replays a fixed move list, ignoring observations.
#[derive(Debug, Clone)]
pub struct ScriptedAgent {
    moves: VecDeque<AgentMove>,
}

impl ScriptedAgent {
    pub fn new(script: Vec<AgentMove>) -> Result<Self, ScriptError> {
        match script.last() {
            None => Err(ScriptError::Empty),
            Some(AgentMove { action: Action::ToolCall(_), .. }) => Err(ScriptError::NoFinalAnswer),
            Some(_) => Ok(ScriptedAgent { moves: script.into() }),
        }
    }

    /// Tool calls of `sop` followed by a final answer naming `option`.
    pub fn from_sop(sop: &[ToolCall], option: &str) -> Self {
        let mut moves: Vec<AgentMove> = sop
            .iter()
            .enumerate()
            .map(|(n, c)| AgentMove::call(format!("step {}: {}", n + 1, c.name), c.name.clone(), c.args.clone()))
            .collect();
        moves.push(AgentMove::answer("evidence collected", format!("Option {option}"), Some(option)));
        ScriptedAgent { moves: moves.into() }
    }
}

impl Agent for ScriptedAgent {
    fn next_move(&mut self, _: &TaskPrompt, _: &[TrajectoryStep]) -> Result<AgentMove, AgentError> {
        self.moves.pop_front().ok_or(AgentError::ScriptExhausted)
    }
}
