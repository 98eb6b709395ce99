//! Agent episodes over the CT toolbox and their evaluation.

pub mod adapter;
pub mod agent;
pub mod bench;
pub mod episode;
pub mod eval;
pub mod manifest;
pub mod report;
pub mod shuffle;

pub use agent::{Action, Agent, AgentError, AgentMove, FinalAnswer, ScriptedAgent, ToolCall};
pub use episode::{format_observation, run_episode, TaskPrompt, Termination, Trajectory, TrajectoryStep, DEFAULT_BUDGET};
pub use eval::{
    compare_to_sop, compute_tool_stats, run_ablation, score_accuracy, validate_trajectory, AccuracyReport,
    EvalError, SopAlignment, StepVerdict, ToolUsageStats, ValidationReport,
};
pub use manifest::{load_task_manifest, CaseType, ManifestError, Scenario, TaskCase};
pub use shuffle::randomize_options;
