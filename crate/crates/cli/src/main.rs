use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ctflow_core::morphometry::Vocabulary;
use ctflow_core::phantom::{generate, PhantomSpec};
use ctflow_flow::adapter::{ExternalAgent, ExternalConfig};
use ctflow_flow::bench::synthetic_benchmark;
use ctflow_flow::episode::{read_trajectories, write_trajectories};
use ctflow_flow::eval::run_episodes;
use ctflow_flow::manifest::write_task_manifest;
use ctflow_flow::report::{configuration_name, render_json, render_table, ReportRow};
use ctflow_flow::{
    compute_tool_stats, load_task_manifest, randomize_options, run_ablation, run_episode, score_accuracy,
    validate_trajectory, Agent, ScriptedAgent, TaskCase, Trajectory, DEFAULT_BUDGET,
};
use ctflow_mcp::{Category, Server, Toolbox, ToolboxConfig};

#[derive(Parser)]
#[command(name = "ctflow", version, about = "CT volume tools for agents, and their evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ToolboxArgs {
    /// Directory all tool file access is confined to.
    #[arg(long, env = "CTFLOW_DATA_ROOT", default_value = ".")]
    data_root: PathBuf,
    /// Anatomy vocabulary (TSV: id, name, synonyms) replacing the builtin one.
    #[arg(long)]
    vocabulary: Option<PathBuf>,
    /// Tool categories to hide, comma separated.
    #[arg(long, value_delimiter = ',')]
    disable: Vec<Category>,
}

impl ToolboxArgs {
    fn config(&self) -> Result<ToolboxConfig> {
        let mut cfg = ToolboxConfig::new(&self.data_root)?;
        if let Some(path) = &self.vocabulary {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            cfg = cfg.with_vocabulary(Vocabulary::parse(&text)?);
        }
        Ok(cfg.with_disabled(self.disable.iter().copied())?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AgentKind {
    /// Replays each case's reference tool sequence and answers its key.
    Scripted,
    /// OpenAI-compatible chat endpoint with tool calling.
    External,
}

#[derive(Subcommand)]
enum Command {
    /// Serve the tools as JSON-RPC 2.0 over stdin/stdout.
    Serve(ToolboxArgs),
    /// Write a synthetic phantom volume, mask and label sidecar.
    Phantom {
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value = "phantom")]
        stem: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print the tool registry.
    Tools {
        #[arg(long, value_delimiter = ',')]
        category: Vec<Category>,
        /// Full descriptors as JSON instead of a name list.
        #[arg(long)]
        json: bool,
    },
    /// Run agent episodes over a task manifest.
    Run {
        #[arg(long)]
        tasks: PathBuf,
        #[arg(long, value_enum, default_value = "scripted")]
        agent: AgentKind,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        #[arg(long)]
        out: PathBuf,
        /// Shuffle option order with this seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "https://api.openai.com/v1")]
        endpoint: String,
        #[arg(long, default_value = "gpt-4o")]
        model: String,
        #[arg(long, default_value = "OPENAI_API_KEY")]
        api_key_env: String,
        #[command(flatten)]
        toolbox: ToolboxArgs,
    },
    /// Re-execute trajectories and check observations and answers.
    Validate {
        #[arg(long)]
        traj: PathBuf,
        #[arg(long)]
        tasks: PathBuf,
        #[command(flatten)]
        toolbox: ToolboxArgs,
    },
    /// Accuracy and tool-usage table for a trajectory file.
    Score {
        #[arg(long)]
        traj: PathBuf,
        #[arg(long)]
        tasks: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Scripted runs with tool categories removed, against the full toolbox.
    Ablate {
        #[arg(long)]
        tasks: PathBuf,
        /// One configuration per flag, e.g. `--disable global,detail --disable advanced`.
        #[arg(long, required = true)]
        disable: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        #[arg(long, env = "CTFLOW_DATA_ROOT", default_value = ".")]
        data_root: PathBuf,
    },
    /// Build the synthetic benchmark, run it with the scripted agent and report.
    Bench {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
}

fn read_cases(path: &Path) -> Result<Vec<TaskCase>> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(load_task_manifest(&bytes)?)
}

fn read_trajs(path: &Path) -> Result<Vec<Trajectory>> {
    let file = File::open(path).with_context(|| format!("reading {}", path.display()))?;
    read_trajectories(BufReader::new(file)).map_err(anyhow::Error::msg)
}

fn write_trajs(path: &Path, trajs: &[Trajectory]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    write_trajectories(&mut out, trajs)?;
    Ok(out.flush()?)
}

fn scripted(case: &TaskCase) -> Box<dyn Agent> {
    let sop = case.sop.clone().unwrap_or_default();
    Box::new(ScriptedAgent::from_sop(&sop, &case.answer_key))
}

fn row(name: String, trajs: &[Trajectory], cases: &[TaskCase]) -> Result<ReportRow> {
    Ok(ReportRow { name, accuracy: score_accuracy(trajs, cases)?, stats: compute_tool_stats(trajs)? })
}

fn run(
    cases: &[TaskCase],
    config: &ToolboxConfig,
    agent: AgentKind,
    budget: usize,
    seed: Option<u64>,
    external: &ExternalConfig,
) -> Result<Vec<Trajectory>> {
    let tools = Toolbox::new(config.clone());
    let descriptors = tools.list_tools(None);
    if let AgentKind::External = agent {
        // fail on configuration before any episode starts
        ExternalAgent::from_env(external.clone(), &descriptors)?;
    }
    let mut out = Vec::with_capacity(cases.len());
    for case in cases {
        let (shown, key_map) = match seed {
            Some(s) => {
                let (c, m) = randomize_options(case, s);
                (c, Some(m))
            }
            None => (case.clone(), None),
        };
        let mut agent: Box<dyn Agent> = match agent {
            AgentKind::Scripted => scripted(&shown),
            AgentKind::External => Box::new(ExternalAgent::from_env(external.clone(), &descriptors)?),
        };
        let mut toolbox = Toolbox::new(config.clone());
        let mut t = run_episode(&shown.prompt(), agent.as_mut(), &mut toolbox, budget);
        t.key_map = key_map;
        out.push(t);
    }
    Ok(out)
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Serve(args) => {
            let mut server = Server::new(Toolbox::new(args.config()?));
            server.serve(std::io::stdin().lock(), std::io::stdout().lock())?;
        }
        Command::Phantom { out, stem, seed } => {
            std::fs::create_dir_all(&out)?;
            let files = generate(&PhantomSpec { seed, ..Default::default() }).write_files(&out, &stem)?;
            for f in files {
                println!("{}", out.join(f).display());
            }
        }
        Command::Tools { category, json } => {
            let filter = (!category.is_empty()).then_some(category.as_slice());
            let tools = ctflow_mcp::registry::list_tools(filter);
            if json {
                println!("{}", serde_json::to_string_pretty(&tools)?);
            } else {
                for t in tools {
                    println!("{:<10} {:<28} {}", t.category.as_str(), t.name, t.description);
                }
            }
        }
        Command::Run { tasks, agent, budget, out, seed, endpoint, model, api_key_env, toolbox } => {
            let cases = read_cases(&tasks)?;
            let external = ExternalConfig::new(endpoint, model, api_key_env);
            let trajs = run(&cases, &toolbox.config()?, agent, budget, seed, &external)?;
            write_trajs(&out, &trajs)?;
            eprintln!("{} episode(s) written to {}", trajs.len(), out.display());
        }
        Command::Validate { traj, tasks, toolbox } => {
            let cases = read_cases(&tasks)?;
            let config = toolbox.config()?;
            let mut consistent = 0;
            let trajs = read_trajs(&traj)?;
            for t in &trajs {
                let Some(case) = cases.iter().find(|c| c.id == t.case_id) else {
                    bail!("trajectory for unknown case '{}'", t.case_id);
                };
                let report = validate_trajectory(t, case, &config)?;
                consistent += report.consistent as usize;
                println!("{}", serde_json::to_string(&report)?);
            }
            eprintln!("{consistent}/{} consistent", trajs.len());
            if consistent != trajs.len() {
                std::process::exit(1);
            }
        }
        Command::Score { traj, tasks, json } => {
            let cases = read_cases(&tasks)?;
            let trajs = read_trajs(&traj)?;
            let rows = [row(traj.display().to_string(), &trajs, &cases)?];
            print!("{}", if json { render_json(&rows) + "\n" } else { render_table(&rows) });
        }
        Command::Ablate { tasks, disable, budget, data_root } => {
            let cases = read_cases(&tasks)?;
            let base = ToolboxConfig::new(&data_root)?;
            let mut configs = vec![BTreeSet::new()];
            for flag in &disable {
                configs.push(flag.split(',').map(|c| c.trim().parse()).collect::<Result<BTreeSet<Category>, _>>()?);
            }
            let results = run_ablation(&cases, &base, &configs, budget, &mut scripted)?;
            let rows: Vec<ReportRow> = results
                .into_iter()
                .map(|r| ReportRow { name: configuration_name(&r.disabled), accuracy: r.accuracy, stats: r.stats })
                .collect();
            print!("{}", render_table(&rows));
        }
        Command::Bench { out, budget } => {
            std::fs::create_dir_all(&out)?;
            let cases = synthetic_benchmark(&out)?;
            std::fs::write(out.join("tasks.jsonl"), write_task_manifest(&cases))?;
            let config = ToolboxConfig::new(&out)?;
            let trajs = run_episodes(&cases, &config, budget, &mut scripted);
            write_trajs(&out.join("trajectories.jsonl"), &trajs)?;
            let rows = [row("scripted".into(), &trajs, &cases)?];
            std::fs::write(out.join("report.json"), render_json(&rows) + "\n")?;
            let table = render_table(&rows);
            std::fs::write(out.join("report.txt"), &table)?;
            print!("{table}");
        }
    }
    Ok(())
}
