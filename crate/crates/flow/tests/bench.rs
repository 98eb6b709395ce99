mod common;

use ctflow_flow::bench::synthetic_benchmark;
use ctflow_flow::eval::run_episodes;
use ctflow_flow::episode::write_trajectories;
use ctflow_flow::manifest::{load_task_manifest, write_task_manifest};
use ctflow_flow::report::{render_json, render_table, ReportRow};
use ctflow_flow::{
    compare_to_sop, compute_tool_stats, score_accuracy, validate_trajectory, Agent, ScriptedAgent, TaskCase,
};
use ctflow_mcp::ToolboxConfig;

fn sop_agent(c: &TaskCase) -> Box<dyn Agent> {
    Box::new(ScriptedAgent::from_sop(c.sop.as_ref().unwrap(), &c.answer_key))
}

fn run_all(dir: &std::path::Path) -> (String, String) {
    let cases = synthetic_benchmark(dir).unwrap();
    let cfg = ToolboxConfig::new(dir).unwrap();
    let trajs = run_episodes(&cases, &cfg, 16, &mut sop_agent);
    let mut out = Vec::new();
    write_trajectories(&mut out, &trajs).unwrap();
    let row = ReportRow {
        name: "full".into(),
        accuracy: score_accuracy(&trajs, &cases).unwrap(),
        stats: compute_tool_stats(&trajs).unwrap(),
    };
    (String::from_utf8(out).unwrap(), render_table(std::slice::from_ref(&row)) + &render_json(&[row]))
}

#[test]
fn benchmark_is_valid_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cases = synthetic_benchmark(dir.path()).unwrap();
    assert!(cases.len() >= 10);
    assert_eq!(load_task_manifest(write_task_manifest(&cases).as_bytes()).unwrap(), cases);
    let cfg = ToolboxConfig::new(dir.path()).unwrap();
    let trajs = run_episodes(&cases, &cfg, 16, &mut sop_agent);
    for (t, c) in trajs.iter().zip(&cases) {
        assert!(t.steps.iter().all(|s| !s.observation.is_error), "{}", c.id);
        assert!(validate_trajectory(t, c, &cfg).unwrap().consistent, "{}", c.id);
        assert!(compare_to_sop(t, c).unwrap().exact_match);
    }
    assert_eq!(score_accuracy(&trajs, &cases).unwrap().average, 100.0);

    let other = tempfile::tempdir().unwrap();
    assert_eq!(run_all(dir.path()), run_all(other.path()));
}
