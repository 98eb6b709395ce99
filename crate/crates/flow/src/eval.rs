//! Trajectory re-execution and benchmark statistics.

use std::collections::{BTreeMap, BTreeSet};

use ctflow_mcp::{Category, ConfigError, ErrorKind, Toolbox, ToolboxConfig};
use serde::{Deserialize, Serialize};

use crate::agent::Agent;
use crate::episode::{run_episode, Trajectory};
use crate::manifest::{Scenario, TaskCase};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("cannot validate case {case}: {reason}")]
    ValidationImpossible { case: String, reason: String },
    #[error("no trajectories given")]
    EmptyInput,
    #[error("trajectory for unknown case '{0}'")]
    UnknownCase(String),
    #[error("case '{0}' has no reference tool sequence")]
    SopUnavailable(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepVerdict {
    Reproduced,
    Divergent,
    NotExecutable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub case_id: String,
    pub steps: Vec<StepVerdict>,
    pub answer_correct: bool,
    pub consistent: bool,
}

/// Replays every recorded action on a fresh workspace and checks each
/// observation digest, then the final answer against the key.
pub fn validate_trajectory(
    traj: &Trajectory,
    case: &TaskCase,
    base: &ToolboxConfig,
) -> Result<ValidationReport, EvalError> {
    let impossible = |reason: String| EvalError::ValidationImpossible { case: case.id.clone(), reason };
    for rel in std::iter::once(&case.volume_path).chain(case.mask_path.as_ref()) {
        if !base.data_root().join(rel).is_file() {
            return Err(impossible(format!("'{rel}' not found under the data root")));
        }
    }
    let config = base.clone().with_disabled(traj.disabled.iter().copied())?;
    let mut toolbox = Toolbox::new(config);
    let steps: Vec<StepVerdict> = traj
        .steps
        .iter()
        .map(|step| match toolbox.call_tool(&step.action.name, &step.action.args) {
            Err(_) => StepVerdict::NotExecutable,
            Ok(r) if r.digest() == step.observation_digest => StepVerdict::Reproduced,
            Ok(_) => StepVerdict::Divergent,
        })
        .collect();
    let answer_correct = traj.original_option().as_deref() == Some(case.answer_key.as_str());
    let consistent = steps.iter().all(|v| *v == StepVerdict::Reproduced) && answer_correct;
    Ok(ValidationReport { case_id: case.id.clone(), steps, answer_correct, consistent })
}

/// Per-case means of tool calls and of the two error families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToolUsageStats {
    pub cases: usize,
    pub avg_calls: f64,
    pub avg_name_errors: f64,
    pub avg_args_errors: f64,
}

pub fn compute_tool_stats(trajectories: &[Trajectory]) -> Result<ToolUsageStats, EvalError> {
    if trajectories.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let (mut calls, mut names, mut args) = (0usize, 0usize, 0usize);
    for t in trajectories {
        calls += t.steps.len();
        for s in &t.steps {
            match s.observation.error_kind {
                Some(ErrorKind::NameError) => names += 1,
                Some(ErrorKind::ArgsError) => args += 1,
                _ => {}
            }
        }
    }
    let n = trajectories.len() as f64;
    Ok(ToolUsageStats {
        cases: trajectories.len(),
        avg_calls: calls as f64 / n,
        avg_name_errors: names as f64 / n,
        avg_args_errors: args as f64 / n,
    })
}

/// Accuracy in percent per scenario; scenarios without trajectories are absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub per_scenario: BTreeMap<Scenario, f64>,
    /// Unweighted mean of the scenario columns.
    pub average: f64,
    pub cases: usize,
}

impl AccuracyReport {
    /// Mean of whichever scenario accuracies are present.
    pub fn from_columns(per_scenario: BTreeMap<Scenario, f64>, cases: usize) -> Self {
        let average = if per_scenario.is_empty() {
            0.0
        } else {
            per_scenario.values().sum::<f64>() / per_scenario.len() as f64
        };
        AccuracyReport { per_scenario, average, cases }
    }
}

pub fn score_accuracy(trajectories: &[Trajectory], cases: &[TaskCase]) -> Result<AccuracyReport, EvalError> {
    if trajectories.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let by_id: BTreeMap<&str, &TaskCase> = cases.iter().map(|c| (c.id.as_str(), c)).collect();
    let mut tally: BTreeMap<Scenario, (usize, usize)> = BTreeMap::new();
    for t in trajectories {
        let case = by_id.get(t.case_id.as_str()).ok_or_else(|| EvalError::UnknownCase(t.case_id.clone()))?;
        let entry = tally.entry(case.scenario).or_default();
        entry.1 += 1;
        if t.original_option().as_deref() == Some(case.answer_key.as_str()) {
            entry.0 += 1;
        }
    }
    let columns = tally.into_iter().map(|(s, (hit, n))| (s, 100.0 * hit as f64 / n as f64)).collect();
    Ok(AccuracyReport::from_columns(columns, trajectories.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SopAlignment {
    pub exact_match: bool,
    pub common_prefix_len: usize,
    pub edit_distance: usize,
}

pub fn align_sequences(actual: &[String], reference: &[String]) -> SopAlignment {
    let common_prefix_len = actual.iter().zip(reference).take_while(|(a, b)| a == b).count();
    SopAlignment {
        exact_match: actual == reference,
        common_prefix_len,
        edit_distance: strsim::generic_levenshtein(&actual.to_vec(), &reference.to_vec()),
    }
}

/// Tool-name sequence of `traj` against the case's reference sequence.
pub fn compare_to_sop(traj: &Trajectory, case: &TaskCase) -> Result<SopAlignment, EvalError> {
    let sop = case.sop.as_ref().ok_or_else(|| EvalError::SopUnavailable(case.id.clone()))?;
    let reference: Vec<String> = sop.iter().map(|c| c.name.clone()).collect();
    Ok(align_sequences(&traj.tool_names(), &reference))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationResult {
    pub disabled: Vec<Category>,
    pub accuracy: AccuracyReport,
    pub stats: ToolUsageStats,
    pub trajectories: Vec<Trajectory>,
}

/// One episode per case, each on a fresh workspace.
pub fn run_episodes(
    cases: &[TaskCase],
    config: &ToolboxConfig,
    budget: usize,
    make_agent: &mut dyn FnMut(&TaskCase) -> Box<dyn Agent>,
) -> Vec<Trajectory> {
    cases
        .iter()
        .map(|case| {
            let mut toolbox = Toolbox::new(config.clone());
            let mut agent = make_agent(case);
            run_episode(&case.prompt(), agent.as_mut(), &mut toolbox, budget)
        })
        .collect()
}

/// Runs all cases once per configuration of disabled categories.
pub fn run_ablation(
    cases: &[TaskCase],
    base: &ToolboxConfig,
    configurations: &[BTreeSet<Category>],
    budget: usize,
    make_agent: &mut dyn FnMut(&TaskCase) -> Box<dyn Agent>,
) -> Result<Vec<AblationResult>, EvalError> {
    let configs = configurations
        .iter()
        .map(|d| base.clone().with_disabled(d.iter().copied()))
        .collect::<Result<Vec<_>, _>>()?;
    configs
        .into_iter()
        .map(|config| {
            let trajectories = run_episodes(cases, &config, budget, make_agent);
            Ok(AblationResult {
                disabled: config.disabled().iter().copied().collect(),
                accuracy: score_accuracy(&trajectories, cases)?,
                stats: compute_tool_stats(&trajectories)?,
                trajectories,
            })
        })
        .collect()
}
