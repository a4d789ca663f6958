use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use archopt_core::antipattern::{count_pas, detect, DetectionConfig, DetectionMode};
use archopt_core::experiment::{
    pareto_csv, read_pareto_csv, report, report_csv, report_text, run_experiment, variant_rpf,
    write_pareto_csv, ExperimentSpec, Variant,
};
use archopt_core::lqn::{solve, transform, write_dump, SolverOptions};
use archopt_core::model::{load_model, to_json, validate, ArchitectureModel};
use archopt_core::moo::{evaluate, reference_front, OptimizerConfig};
use archopt_core::refactoring::{apply_sequence, RefactoringAction};
use archopt_core::reliability::evaluate_reliability;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "archopt",
    version,
    about = "Multi-objective refactoring search for annotated architecture models"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Base seed for randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for evaluation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file or directory, depending on the command.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct Detection {
    /// Fuzziness threshold in [0, 1].
    #[arg(long, default_value_t = 0.95)]
    fuzziness: f64,
    /// Crisp detection instead of fuzzy.
    #[arg(long)]
    deterministic: bool,
}

impl Detection {
    fn config(&self) -> DetectionConfig {
        DetectionConfig {
            fuzziness_threshold: self.fuzziness,
            mode: if self.deterministic {
                DetectionMode::Deterministic
            } else {
                DetectionMode::Fuzzy
            },
            ..DetectionConfig::default()
        }
    }
}

#[derive(Args)]
struct Search {
    #[arg(long, default_value_t = 16)]
    population: usize,
    #[arg(long, default_value_t = 4)]
    length: usize,
    #[arg(long, default_value_t = 0.8)]
    p_crossover: f64,
    #[arg(long, default_value_t = 0.2)]
    p_mutation: f64,
    #[arg(long, default_value_t = 100)]
    generations: usize,
    #[arg(long, default_value_t = 1)]
    runs: usize,
    /// Fuzziness thresholds of the arms using the antipattern objective.
    /// Repeatable; defaults to 0.95 unless only --no-pas is given.
    #[arg(long)]
    fuzziness: Vec<f64>,
    /// Add an arm without the antipattern objective.
    #[arg(long)]
    no_pas: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check a model and print its violations.
    Validate { model: PathBuf },
    /// Transform a model into an LQN and solve it.
    SolveLqn {
        model: PathBuf,
        /// Also write the LQN as text into the --output directory.
        #[arg(long)]
        dump_lqn: bool,
    },
    /// System reliability with per-scenario details.
    Reliability { model: PathBuf },
    /// Detect performance antipatterns on the solved model.
    Detect {
        model: PathBuf,
        #[command(flatten)]
        detection: Detection,
    },
    /// Apply a refactoring sequence and print the resulting model.
    Apply { model: PathBuf, sequence: PathBuf },
    /// Objective values of a refactoring sequence.
    Evaluate {
        model: PathBuf,
        sequence: PathBuf,
        #[arg(long, default_value_t = 0.95)]
        fuzziness: f64,
        #[arg(long)]
        no_pas: bool,
    },
    /// Run the optimizer, either from flags or from an experiment spec.
    Optimize {
        /// Model to optimize (ignored when --spec is given).
        model: Option<PathBuf>,
        /// Experiment spec JSON.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[command(flatten)]
        search: Search,
    },
    /// Summarize an experiment directory.
    Report { dir: PathBuf },
    /// Merge Pareto fronts (CSV files or variant directories) into a reference front.
    Rpf {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
}

fn read_model(path: &Path) -> Result<ArchitectureModel> {
    load_model(path).with_context(|| format!("loading {}", path.display()))
}

fn read_sequence(path: &Path) -> Result<Vec<RefactoringAction>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing sequence {}", path.display()))
}

/// Writes to stdout, treating a closed pipe as success.
fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    emit(&(serde_json::to_string_pretty(value)? + "\n"))
}

fn cmd_validate(path: &Path) -> Result<bool> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let model: ArchitectureModel =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let report = validate(&model);
    print_json(&json!({ "valid": report.is_valid(), "violations": report.violations }))?;
    Ok(report.is_valid())
}

fn variants(search: &Search, seed: u64) -> Vec<Variant> {
    let base = OptimizerConfig {
        population_size: search.population,
        sequence_length: search.length,
        p_crossover: search.p_crossover,
        p_mutation: search.p_mutation,
        generations: search.generations,
        runs: search.runs,
        seed,
        ..OptimizerConfig::default()
    };
    let mut thresholds = search.fuzziness.clone();
    if thresholds.is_empty() && !search.no_pas {
        thresholds.push(base.fuzziness_threshold);
    }
    let mut out: Vec<Variant> = thresholds
        .iter()
        .map(|&t| Variant {
            name: format!("pas-{t}"),
            config: OptimizerConfig {
                fuzziness_threshold: t,
                enable_pas_objective: true,
                ..base.clone()
            },
        })
        .collect();
    if search.no_pas {
        out.push(Variant {
            name: "no-pas".into(),
            config: OptimizerConfig {
                enable_pas_objective: false,
                ..base
            },
        });
    }
    out
}

fn cmd_optimize(
    global: &Global,
    model: Option<PathBuf>,
    spec: Option<PathBuf>,
    search: &Search,
) -> Result<bool> {
    let spec = match spec {
        Some(path) => {
            let text =
                fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let mut spec: ExperimentSpec = serde_json::from_str(&text)
                .with_context(|| format!("parsing spec {}", path.display()))?;
            // Relative paths in a spec are relative to the spec file.
            let base = path.parent().unwrap_or(Path::new("."));
            spec.model = base.join(&spec.model);
            spec.output = match &global.output {
                Some(out) => out.clone(),
                None => base.join(&spec.output),
            };
            spec
        }
        None => {
            let Some(model) = model else {
                bail!("either a model or --spec is required")
            };
            ExperimentSpec {
                model,
                variants: variants(search, global.seed),
                output: global
                    .output
                    .clone()
                    .unwrap_or_else(|| PathBuf::from("results")),
            }
        }
    };
    let model = read_model(&spec.model)?;
    let stop = Arc::new(AtomicBool::new(false));
    {
        let stop = Arc::clone(&stop);
        // A second interrupt falls through to the default handler.
        let _ = ctrlc::set_handler(move || {
            if stop.swap(true, Ordering::SeqCst) {
                std::process::exit(130);
            }
            eprintln!("interrupted: finishing the current generation");
        });
    }
    let manifest = run_experiment(&spec, &model, Some(&stop))?;
    print_json(&manifest)?;
    Ok(manifest.complete)
}

fn cmd_report(global: &Global, dir: &Path) -> Result<()> {
    let rows = report(dir)?;
    let csv = report_csv(&rows);
    let target = global
        .output
        .clone()
        .unwrap_or_else(|| dir.join("report.csv"));
    fs::write(&target, &csv).with_context(|| format!("writing {}", target.display()))?;
    emit(&report_text(&rows))?;
    Ok(())
}

fn cmd_rpf(global: &Global, inputs: &[PathBuf]) -> Result<()> {
    let mut fronts = Vec::new();
    for input in inputs {
        if input.is_dir() {
            fronts.push(variant_rpf(input)?);
        } else {
            fronts.push(read_pareto_csv(input)?);
        }
    }
    let rpf = reference_front(&fronts);
    match &global.output {
        Some(path) => write_pareto_csv(path, &rpf)?,
        None => emit(&pareto_csv(&rpf))?,
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring threads")?;
    }
    let global = &cli.global;
    match cli.command {
        Command::Validate { model } => return cmd_validate(&model),
        Command::SolveLqn {
            model,
            dump_lqn: dump,
        } => {
            let lqn = transform(&read_model(&model)?)?;
            if dump {
                let dir = global.output.clone().unwrap_or_else(|| PathBuf::from("."));
                let path = write_dump(&lqn, &dir)
                    .with_context(|| format!("writing dump into {}", dir.display()))?;
                eprintln!("LQN written to {}", path.display());
            }
            let results = solve(&lqn, &SolverOptions::default())?;
            if !results.converged {
                eprintln!(
                    "warning: solver stopped after {} iterations without converging",
                    results.iterations
                );
            }
            print_json(&results)?;
        }
        Command::Reliability { model } => print_json(&evaluate_reliability(&read_model(&model)?)?)?,
        Command::Detect { model, detection } => {
            let model = read_model(&model)?;
            let results = solve(&transform(&model)?, &SolverOptions::default())?;
            let config = detection.config();
            let instances = detect(&model, &results, &config);
            print_json(
                &json!({ "count": count_pas(&instances, &config), "instances": instances }),
            )?;
        }
        Command::Apply { model, sequence } => {
            let refactored = apply_sequence(&read_sequence(&sequence)?, &read_model(&model)?)?;
            emit(&(to_json(&refactored) + "\n"))?;
        }
        Command::Evaluate {
            model,
            sequence,
            fuzziness,
            no_pas,
        } => {
            let config = OptimizerConfig {
                fuzziness_threshold: fuzziness,
                enable_pas_objective: !no_pas,
                ..Default::default()
            };
            let objectives = evaluate(
                &read_sequence(&sequence)?,
                &read_model(&model)?,
                &config.eval_settings(),
            )?;
            print_json(&objectives)?;
        }
        Command::Optimize {
            model,
            spec,
            search,
        } => return cmd_optimize(global, model, spec, &search),
        Command::Report { dir } => cmd_report(global, &dir)?,
        Command::Rpf { inputs } => cmd_rpf(global, &inputs)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
