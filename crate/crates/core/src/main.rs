use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use autoscale_sim::allocation::AllocationPolicy;
use autoscale_sim::autoscaling::PolicyKind;
use autoscale_sim::harness::{
    emit_report, presets, run_experiment, run_sweep, size_infrastructure, to_csv, BurstPreset, Execution,
    ExperimentConfig, ReportFormat, SweepSpec,
};
use autoscale_sim::workload::{generate_burst, generate_chronos, parse_trace, to_json, BurstSpec, ChronosSpec};
use autoscale_sim::{Error, Result};

#[derive(Parser)]
#[command(
    name = "autoscale-sim",
    version,
    about = "Trace-driven simulator of workflow autoscaling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        autoscaler: Option<String>,
        #[arg(long)]
        allocator: Option<String>,
        /// Write report.csv and report.json here instead of printing CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a sweep from a spec file or a named preset.
    Sweep {
        #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
        spec: Option<PathBuf>,
        /// One of: domain, bursty, allocation, utilization, at_scale.
        #[arg(long)]
        preset: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        sequential: bool,
    },
    /// Clusters needed for a target utilization.
    Size {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        utilization: f64,
        #[arg(long, default_value_t = 70)]
        vms_per_cluster: u32,
    },
    /// Generate a synthetic trace.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Parse and validate a trace file.
    Validate {
        #[arg(long)]
        trace: PathBuf,
    },
}

#[derive(Subcommand)]
enum GenKind {
    Chronos {
        #[command(flatten)]
        args: ChronosArgs,
        #[arg(long)]
        out: PathBuf,
    },
    Burst {
        #[command(flatten)]
        args: BurstArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ChronosArgs {
    #[arg(long)]
    tasks_per_workflow: Option<usize>,
    #[arg(long)]
    runtime: Option<f64>,
    #[arg(long)]
    cpus: Option<u32>,
    #[arg(long)]
    levels: Option<usize>,
    /// Chain each workflow after one of the previous minute.
    #[arg(long)]
    chain: bool,
    #[arg(long)]
    runtime_cv: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    AskalonEe2,
    AskalonEe2Full,
    AskalonEe,
    Spec,
}

#[derive(Args)]
struct BurstArgs {
    #[arg(long, value_enum)]
    preset: Option<PresetArg>,
    #[arg(long)]
    tasks: Option<usize>,
    #[arg(long)]
    workflows: Option<usize>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    runtime_mean: Option<f64>,
    #[arg(long)]
    burst_window: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn parent_dir(path: &Path) -> &Path {
    path.parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."))
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run {
            config,
            autoscaler,
            allocator,
            out,
        } => {
            let mut cfg =
                ExperimentConfig::from_json(&read(&config)?).map_err(|e| e.context(config.display().to_string()))?;
            if let Some(a) = autoscaler {
                cfg.autoscaler = a.parse::<PolicyKind>()?;
            }
            if let Some(a) = allocator {
                cfg.allocator = a.parse::<AllocationPolicy>()?;
            }
            let run = run_experiment(&cfg, parent_dir(&config))?;
            eprintln!(
                "{}: {} tasks in {:.2?}",
                run.report.label(),
                run.report.tasks,
                run.wall_time
            );
            match out {
                Some(dir) => {
                    emit_report(&[&run], ReportFormat::Csv, &dir)?;
                    emit_report(&[&run], ReportFormat::Json, &dir)?;
                }
                None => print!("{}", to_csv(std::slice::from_ref(&run.report))?),
            }
            Ok(())
        }
        Command::Sweep {
            spec,
            preset,
            out,
            sequential,
        } => {
            let (spec, base_dir) = match (spec, preset) {
                (Some(path), _) => {
                    let s = SweepSpec::from_json(&read(&path)?).map_err(|e| e.context(path.display().to_string()))?;
                    (s, parent_dir(&path).to_path_buf())
                }
                (None, Some(name)) => {
                    let s = presets::by_name(&name)
                        .ok_or_else(|| Error::InvalidConfig(format!("unknown preset `{name}`")))?;
                    (s, PathBuf::from("."))
                }
                (None, None) => unreachable!("clap requires --spec or --preset"),
            };
            let dir = out
                .or_else(|| spec.out_dir.clone())
                .unwrap_or_else(|| PathBuf::from("sweep-out"));
            let exec = if sequential {
                Execution::Sequential
            } else {
                Execution::Parallel
            };
            let outcome = run_sweep(&spec, &base_dir, exec);
            let runs: Vec<_> = outcome.runs().collect();
            eprintln!("{} of {} cells succeeded", runs.len(), outcome.cells.len());
            if !runs.is_empty() {
                emit_report(&runs, ReportFormat::Csv, &dir)?;
                emit_report(&runs, ReportFormat::Json, &dir)?;
            }
            let failures: Vec<String> = outcome.failures().map(|(_, e)| e.to_string()).collect();
            if !failures.is_empty() {
                std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
                write(&dir.join("failures.txt"), &(failures.join("\n") + "\n"))?;
                for f in &failures {
                    eprintln!("failed: {f}");
                }
                return Err(Error::Runtime(format!("{} sweep cells failed", failures.len())));
            }
            Ok(())
        }
        Command::Size {
            trace,
            utilization,
            vms_per_cluster,
        } => {
            let t = parse_trace(&read(&trace)?)?;
            println!("{}", size_infrastructure(&t, utilization, vms_per_cluster)?);
            Ok(())
        }
        Command::Gen { kind } => {
            let (trace, out) = match kind {
                GenKind::Chronos { args, out } => {
                    let d = ChronosSpec::default();
                    let spec = ChronosSpec {
                        tasks_per_workflow: args.tasks_per_workflow.unwrap_or(d.tasks_per_workflow),
                        runtime_s: args.runtime.unwrap_or(d.runtime_s),
                        cpus: args.cpus.unwrap_or(d.cpus),
                        levels: args.levels.unwrap_or(d.levels),
                        chain_workflows: args.chain,
                        runtime_cv: args.runtime_cv.unwrap_or(d.runtime_cv),
                        seed: args.seed,
                    };
                    (generate_chronos(&spec), out)
                }
                GenKind::Burst { args, out } => {
                    let mut spec = match args.preset {
                        Some(PresetArg::AskalonEe2) => BurstPreset::AskalonEe2.spec(),
                        Some(PresetArg::AskalonEe2Full) => BurstPreset::AskalonEe2Full.spec(),
                        Some(PresetArg::AskalonEe) => BurstPreset::AskalonEe.spec(),
                        Some(PresetArg::Spec) => BurstPreset::Spec.spec(),
                        None => BurstSpec::default(),
                    };
                    if let Some(x) = args.tasks {
                        spec.tasks = x;
                    }
                    if let Some(x) = args.workflows {
                        spec.workflows = x;
                    }
                    if let Some(x) = args.levels {
                        spec.levels = x;
                    }
                    if let Some(x) = args.runtime_mean {
                        spec.runtime_mean_s = x;
                    }
                    if let Some(x) = args.burst_window {
                        spec.burst_window_s = x;
                    }
                    (generate_burst(&spec, args.seed), out)
                }
            };
            write(&out, &to_json(&trace))?;
            eprintln!(
                "{}: {} workflows, {} tasks",
                trace.name(),
                trace.workflow_count(),
                trace.task_count()
            );
            Ok(())
        }
        Command::Validate { trace } => {
            let t = parse_trace(&read(&trace)?).map_err(|e| e.context(trace.display().to_string()))?;
            println!("ok: {} workflows, {} tasks", t.workflow_count(), t.task_count());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
