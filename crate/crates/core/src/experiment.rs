//! Batch experiments: several optimizer variants, several seeded runs each,
//! written to a directory tree, merged into reference fronts and summarized.
//!
//! ```text
//! <root>/manifest.json
//! <root>/.incomplete              while running or after an interruption
//! <root>/<variant>/rpf.csv
//! <root>/<variant>/run-<k>/{pareto.csv, stats.csv, config.json}
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::AtomicBool;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::model::ArchitectureModel;
use crate::moo::{
    reference_front, run_with, Evaluator, GenerationStats, ObjectiveVector, OptimizerConfig,
    OptimizerError, RunResult, Solution, Summary,
};
use crate::refactoring::RefactoringAction;

pub const INCOMPLETE_MARKER: &str = ".incomplete";

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error in {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("malformed {path}: {detail}")]
    Malformed { path: String, detail: String },
    #[error(transparent)]
    Optimizer(#[from] OptimizerError),
    #[error("no completed runs under {0}")]
    MissingRuns(String),
    #[error("invalid experiment: {0}")]
    Invalid(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Csv {
        path: path.display().to_string(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variant {
    pub name: String,
    pub config: OptimizerConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub model: PathBuf,
    pub variants: Vec<Variant>,
    pub output: PathBuf,
}

impl ExperimentSpec {
    pub fn check(&self) -> Result<(), ExperimentError> {
        if self.variants.is_empty() {
            return Err(ExperimentError::Invalid(
                "at least one variant is required".into(),
            ));
        }
        for (i, v) in self.variants.iter().enumerate() {
            if v.name.is_empty() || v.name.contains(['/', '\\']) || v.name.starts_with('.') {
                return Err(ExperimentError::Invalid(format!(
                    "bad variant name '{}'",
                    v.name
                )));
            }
            if self.variants[..i].iter().any(|w| w.name == v.name) {
                return Err(ExperimentError::Invalid(format!(
                    "duplicate variant '{}'",
                    v.name
                )));
            }
            if v.config.runs == 0 {
                return Err(ExperimentError::Invalid(format!(
                    "variant '{}' has no runs",
                    v.name
                )));
            }
            v.config.check()?;
        }
        Ok(())
    }
}

/// Locale-independent rendering with 6 significant digits.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let trim = |s: String| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    // Round first so that the exponent reflects the rounded value.
    let rounded: f64 = format!("{x:.5e}").parse().expect("formatted float");
    let e = rounded.abs().log10().floor() as i32;
    if (-4..6).contains(&e) {
        trim(format!("{:.*}", (5 - e).max(0) as usize, rounded))
    } else {
        let s = format!("{rounded:.5e}");
        let (mantissa, exp) = s.split_once('e').expect("exponent");
        format!("{}e{}", trim(mantissa.to_string()), exp)
    }
}

fn objective_header() -> Vec<&'static str> {
    ObjectiveVector::NAMES.to_vec()
}

/// Pareto front as CSV text.
pub fn pareto_csv(front: &[Solution]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = objective_header();
    header.push("sequence");
    w.write_record(&header).expect("in-memory write");
    for s in front {
        let mut row: Vec<String> = s
            .objectives
            .values()
            .iter()
            .map(|&v| format_number(v))
            .collect();
        row.push(serde_json::to_string(&s.sequence).expect("actions serialize"));
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

pub fn write_pareto_csv(path: &Path, front: &[Solution]) -> Result<(), ExperimentError> {
    fs::write(path, pareto_csv(front)).map_err(io_err(path))
}

pub fn read_pareto_csv(path: &Path) -> Result<Vec<Solution>, ExperimentError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let malformed = |detail: String| ExperimentError::Malformed {
        path: path.display().to_string(),
        detail,
    };
    let headers = r.headers().map_err(csv_err(path))?.clone();
    let mut expected = objective_header();
    expected.push("sequence");
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(malformed(format!("unexpected header {:?}", headers)));
    }
    let mut out = Vec::new();
    for record in r.records() {
        let record = record.map_err(csv_err(path))?;
        let num = |i: usize| -> Result<f64, ExperimentError> {
            record[i]
                .parse::<f64>()
                .map_err(|e| malformed(format!("column {}: {e}", expected[i])))
        };
        let sequence: Vec<RefactoringAction> =
            serde_json::from_str(&record[4]).map_err(|e| malformed(format!("sequence: {e}")))?;
        out.push(Solution {
            sequence,
            objectives: ObjectiveVector {
                perfq: num(0)?,
                reliability: num(1)?,
                n_pas: num(2)?,
                arch_dist: num(3)?,
            },
        });
    }
    Ok(out)
}

pub fn write_stats_csv(path: &Path, stats: &[GenerationStats]) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    let mut header: Vec<String> = [
        "generation",
        "population_size",
        "front_size",
        "hypervolume",
        "evaluations",
        "discarded",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for name in ObjectiveVector::NAMES {
        for stat in ["min", "max", "median", "mean"] {
            header.push(format!("{name}_{stat}"));
        }
    }
    w.write_record(&header).map_err(csv_err(path))?;
    for s in stats {
        let mut row = vec![
            s.generation.to_string(),
            s.population_size.to_string(),
            s.front_size.to_string(),
            format_number(s.hypervolume),
            s.evaluations.to_string(),
            s.discarded.to_string(),
        ];
        for o in &s.objectives {
            row.extend(
                [o.min, o.max, o.median, o.mean]
                    .iter()
                    .map(|&v| format_number(v)),
            );
        }
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ExperimentError> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    fs::write(path, text + "\n").map_err(io_err(path))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub evaluations: usize,
    pub discarded: usize,
    pub detector_calls: usize,
    pub front_size: usize,
    pub wall_time_s: f64,
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantRecord {
    pub name: String,
    pub runs: Vec<RunRecord>,
    pub rpf_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub model: String,
    pub variants: Vec<VariantRecord>,
    /// Model alternatives evaluated over all runs.
    pub models_evaluated: usize,
    pub wall_time_s: f64,
    pub complete: bool,
}

/// Runs every variant of `spec` on `model`, writing results as each run
/// finishes. Setting `stop` ends the current run after its generation; the
/// partial run is kept and the experiment stays marked incomplete.
pub fn run_experiment(
    spec: &ExperimentSpec,
    model: &ArchitectureModel,
    stop: Option<&AtomicBool>,
) -> Result<Manifest, ExperimentError> {
    spec.check()?;
    let root = &spec.output;
    fs::create_dir_all(root).map_err(io_err(root))?;
    let marker = root.join(INCOMPLETE_MARKER);
    fs::write(&marker, "").map_err(io_err(&marker))?;
    let started = Instant::now();
    let mut manifest = Manifest {
        model: spec.model.display().to_string(),
        variants: Vec::new(),
        models_evaluated: 0,
        wall_time_s: 0.0,
        complete: false,
    };
    let manifest_path = root.join("manifest.json");
    let mut interrupted = false;

    'variants: for variant in &spec.variants {
        let dir = root.join(&variant.name);
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let evaluator =
            Evaluator::new(model, variant.config.eval_settings()).map_err(OptimizerError::from)?;
        manifest.variants.push(VariantRecord {
            name: variant.name.clone(),
            runs: Vec::new(),
            rpf_size: 0,
        });
        let mut fronts = Vec::new();
        for k in 0..variant.config.runs {
            let config = OptimizerConfig {
                seed: variant.config.seed.wrapping_add(k as u64),
                ..variant.config.clone()
            };
            let t = Instant::now();
            let result: RunResult = run_with(&config, &evaluator, stop)?;
            let run_dir = dir.join(format!("run-{k}"));
            fs::create_dir_all(&run_dir).map_err(io_err(&run_dir))?;
            write_pareto_csv(&run_dir.join("pareto.csv"), &result.front)?;
            write_stats_csv(&run_dir.join("stats.csv"), &result.stats)?;
            write_json(&run_dir.join("config.json"), &config)?;
            let record = manifest.variants.last_mut().expect("pushed above");
            record.runs.push(RunRecord {
                run: k,
                seed: config.seed,
                evaluations: result.evaluations,
                discarded: result.discarded,
                detector_calls: result.detector_calls,
                front_size: result.front.len(),
                wall_time_s: t.elapsed().as_secs_f64(),
                complete: !result.interrupted,
            });
            manifest.models_evaluated += result.evaluations;
            // Merge the fronts as written so rpf.csv agrees with variant_rpf.
            fronts.push(read_pareto_csv(&run_dir.join("pareto.csv"))?);
            let rpf = reference_front(&fronts);
            record.rpf_size = rpf.len();
            write_pareto_csv(&dir.join("rpf.csv"), &rpf)?;
            manifest.wall_time_s = started.elapsed().as_secs_f64();
            write_json(&manifest_path, &manifest)?;
            if result.interrupted {
                interrupted = true;
                break 'variants;
            }
        }
    }

    manifest.complete = !interrupted;
    manifest.wall_time_s = started.elapsed().as_secs_f64();
    write_json(&manifest_path, &manifest)?;
    if manifest.complete {
        fs::remove_file(&marker).map_err(io_err(&marker))?;
    }
    Ok(manifest)
}

/// `pareto.csv` files of the runs under a variant directory, by run index.
pub fn run_fronts(variant_dir: &Path) -> Result<Vec<PathBuf>, ExperimentError> {
    let mut runs: Vec<(usize, PathBuf)> = Vec::new();
    let entries = fs::read_dir(variant_dir).map_err(io_err(variant_dir))?;
    for entry in entries {
        let entry = entry.map_err(io_err(variant_dir))?;
        let name = entry.file_name().to_string_lossy().to_string();
        let Some(k) = name.strip_prefix("run-").and_then(|k| k.parse().ok()) else {
            continue;
        };
        let pareto = entry.path().join("pareto.csv");
        if pareto.is_file() {
            runs.push((k, pareto));
        }
    }
    runs.sort();
    Ok(runs.into_iter().map(|(_, p)| p).collect())
}

/// Reference front of every run of a variant.
pub fn variant_rpf(variant_dir: &Path) -> Result<Vec<Solution>, ExperimentError> {
    let runs = run_fronts(variant_dir)?;
    if runs.is_empty() {
        return Err(ExperimentError::MissingRuns(
            variant_dir.display().to_string(),
        ));
    }
    let fronts = runs
        .iter()
        .map(|p| read_pareto_csv(p))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(reference_front(&fronts))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub variant: String,
    pub solutions: usize,
    pub perfq: Summary,
    pub reliability: Summary,
    pub arch_dist: Summary,
}

/// Summary of the reference front of `solutions`.
pub fn summarize(variant: &str, solutions: &[Solution]) -> Option<ReportRow> {
    let column = |f: fn(&ObjectiveVector) -> f64| -> Option<Summary> {
        Summary::of(
            &solutions
                .iter()
                .map(|s| f(&s.objectives))
                .collect::<Vec<_>>(),
        )
    };
    Some(ReportRow {
        variant: variant.to_string(),
        solutions: solutions.len(),
        perfq: column(|o| o.perfq)?,
        reliability: column(|o| o.reliability)?,
        arch_dist: column(|o| o.arch_dist)?,
    })
}

/// One row per variant directory of an experiment, in name order, computed
/// on the variant's reference front.
pub fn report(root: &Path) -> Result<Vec<ReportRow>, ExperimentError> {
    let mut dirs: Vec<PathBuf> = Vec::new();
    for entry in fs::read_dir(root).map_err(io_err(root))? {
        let entry = entry.map_err(io_err(root))?;
        if entry.path().is_dir() && !entry.file_name().to_string_lossy().starts_with('.') {
            dirs.push(entry.path());
        }
    }
    dirs.sort();
    if dirs.is_empty() {
        return Err(ExperimentError::MissingRuns(root.display().to_string()));
    }
    let mut rows = Vec::new();
    for dir in dirs {
        let name = dir
            .file_name()
            .expect("directory name")
            .to_string_lossy()
            .to_string();
        let rpf = variant_rpf(&dir)?;
        let row = summarize(&name, &rpf)
            .ok_or_else(|| ExperimentError::MissingRuns(dir.display().to_string()))?;
        rows.push(row);
    }
    Ok(rows)
}

const REPORT_COLUMNS: [&str; 3] = ["perfq", "reliability", "arch_dist"];

fn row_cells(row: &ReportRow) -> Vec<String> {
    let mut cells = vec![row.variant.clone(), row.solutions.to_string()];
    for s in [&row.perfq, &row.reliability, &row.arch_dist] {
        cells.extend(
            [s.min, s.max, s.median, s.mean]
                .iter()
                .map(|&v| format_number(v)),
        );
    }
    cells
}

fn report_header() -> Vec<String> {
    let mut header = vec!["variant".to_string(), "solutions".to_string()];
    for name in REPORT_COLUMNS {
        for stat in ["min", "max", "median", "mean"] {
            header.push(format!("{name}_{stat}"));
        }
    }
    header
}

pub fn report_csv(rows: &[ReportRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(report_header()).expect("in-memory write");
    for row in rows {
        w.write_record(row_cells(row)).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// Aligned plain-text rendering of the report.
pub fn report_text(rows: &[ReportRow]) -> String {
    let mut table = vec![report_header()];
    table.extend(rows.iter().map(row_cells));
    let widths: Vec<usize> = (0..table[0].len())
        .map(|c| table.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for r in &table {
        let line: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                if c == 0 {
                    format!("{cell:<w$}", w = widths[c])
                } else {
                    format!("{cell:>w$}", w = widths[c])
                }
            })
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}
