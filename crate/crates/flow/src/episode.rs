//! The reason-act loop and its trajectory record.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use ctflow_mcp::result::canonical_string;
use ctflow_mcp::{Category, ContentBlock, Toolbox, ToolResult};
use serde::{Deserialize, Serialize};

use crate::agent::{Action, Agent, FinalAnswer, ToolCall};

pub const DEFAULT_BUDGET: usize = 16;

/// What the agent is asked: the query and, for multiple choice, the options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskPrompt {
    pub case_id: String,
    pub query: String,
    #[serde(default)]
    pub options: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStep {
    pub index: usize,
    pub thought: String,
    pub action: ToolCall,
    pub observation: ToolResult,
    /// Digest of the observation's canonical serialization.
    pub observation_digest: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Answer,
    Budget,
    AgentFailure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub case_id: String,
    pub query: String,
    pub steps: Vec<TrajectoryStep>,
    pub final_answer: Option<FinalAnswer>,
    pub terminated_by: Termination,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    /// Shown label to original label, when options were shuffled.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key_map: Option<BTreeMap<String, String>>,
    /// Tool categories hidden during the run.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub disabled: Vec<Category>,
}

impl Trajectory {
    pub fn tool_names(&self) -> Vec<String> {
        self.steps.iter().map(|s| s.action.name.clone()).collect()
    }

    /// Final option translated back to the original labelling.
    pub fn original_option(&self) -> Option<String> {
        let option = self.final_answer.as_ref()?.option.clone()?;
        Some(match &self.key_map {
            Some(map) => map.get(&option).cloned().unwrap_or(option),
            None => option,
        })
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("trajectory serializes")
    }
}

/// Runs one episode to an answer, the budget, or an agent failure.
///
/// At most `budget` tool calls execute. Once they are spent the agent gets
/// one more turn, which counts only if it answers.
pub fn run_episode(prompt: &TaskPrompt, agent: &mut dyn Agent, toolbox: &mut Toolbox, budget: usize) -> Trajectory {
    let mut traj = Trajectory {
        case_id: prompt.case_id.clone(),
        query: prompt.query.clone(),
        steps: Vec::new(),
        final_answer: None,
        terminated_by: Termination::Budget,
        failure: None,
        key_map: None,
        disabled: toolbox.config().disabled().iter().copied().collect(),
    };
    loop {
        let mv = match agent.next_move(prompt, &traj.steps) {
            Ok(mv) => mv,
            Err(e) => {
                traj.terminated_by = Termination::AgentFailure;
                traj.failure = Some(e.to_string());
                return traj;
            }
        };
        let call = match mv.action {
            Action::FinalAnswer(answer) => {
                traj.final_answer = Some(answer);
                traj.terminated_by = Termination::Answer;
                return traj;
            }
            Action::ToolCall(_) if traj.steps.len() >= budget => return traj,
            Action::ToolCall(call) => call,
        };
        let observation = match toolbox.call_tool(&call.name, &call.args) {
            Ok(r) => r,
            Err(e) => {
                traj.terminated_by = Termination::AgentFailure;
                traj.failure = Some(format!("malformed move: {e}"));
                return traj;
            }
        };
        traj.steps.push(TrajectoryStep {
            index: traj.steps.len(),
            thought: mv.thought,
            action: call,
            observation_digest: observation.digest(),
            observation,
        });
    }
}

/// Agent-facing rendering of a tool result.
///
/// Images become a stable token plus their size; the pixels stay with the
/// adapter.
pub fn format_observation(result: &ToolResult) -> String {
    let mut parts = Vec::with_capacity(result.content.len());
    for block in &result.content {
        parts.push(match block {
            ContentBlock::Text(t) => t.clone(),
            ContentBlock::Data(v) => canonical_string(v),
            ContentBlock::Image { bytes, media_type, width, height } => {
                let digest = ctflow_mcp::result::sha256_hex(bytes);
                format!("[image:{} {width}x{height} {media_type}]", &digest[..12])
            }
        });
    }
    let body = parts.join("\n");
    match result.error_kind {
        Some(kind) => format!("ERROR({}): {body}", kind.as_str()),
        None => body,
    }
}

pub fn write_trajectories(out: &mut impl Write, trajectories: &[Trajectory]) -> std::io::Result<()> {
    for t in trajectories {
        writeln!(out, "{}", t.to_json_line())?;
    }
    Ok(())
}

pub fn read_trajectories(input: impl BufRead) -> Result<Vec<Trajectory>, String> {
    let mut out = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line.map_err(|e| e.to_string())?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| format!("line {}: {e}", n + 1))?);
    }
    Ok(out)
}
