//! Browser bindings: analyze a model, score a refactoring sequence, and run
//! a small optimization. Every entry point takes and returns JSON text.

use archopt_core::antipattern::{count_pas, detect, DetectionConfig};
use archopt_core::lqn::{solve, transform, SolverOptions};
use archopt_core::model::{to_json, validate, ArchitectureModel};
use archopt_core::moo::{evaluate, run, OptimizerConfig};
use archopt_core::refactoring::{apply_sequence, sequence_label, RefactoringAction};
use archopt_core::reliability::evaluate_reliability;
use serde::Deserialize;
use serde_json::json;
use wasm_bindgen::prelude::*;

/// The bundled train-booking model.
pub const SAMPLE_MODEL: &str = include_str!("../../core/models/ttbs.json");

fn parse(model_json: &str) -> Result<ArchitectureModel, String> {
    let model: ArchitectureModel =
        serde_json::from_str(model_json).map_err(|e| format!("model: {e}"))?;
    let report = validate(&model);
    if report.is_valid() {
        Ok(model)
    } else {
        Err(format!("invalid model:\n{report}"))
    }
}

/// Performance, reliability and antipatterns of a model.
pub fn analyze_json(model_json: &str, fuzziness: f64) -> Result<String, String> {
    let model = parse(model_json)?;
    let results = solve(
        &transform(&model).map_err(|e| e.to_string())?,
        &SolverOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let reliability = evaluate_reliability(&model).map_err(|e| e.to_string())?;
    let config = DetectionConfig::with_threshold(fuzziness);
    let mut instances = detect(&model, &results, &config);
    instances.sort_by(|a, b| b.probability.total_cmp(&a.probability));
    Ok(json!({
        "chains": results.chains,
        "processors": results.processors,
        "reliability": reliability.reliability,
        "pas": count_pas(&instances, &config),
        "instances": instances.iter().take(8).collect::<Vec<_>>(),
    })
    .to_string())
}

/// Objectives of a sequence and the refactored model.
pub fn evaluate_json(
    model_json: &str,
    sequence_json: &str,
    fuzziness: f64,
) -> Result<String, String> {
    let model = parse(model_json)?;
    let sequence: Vec<RefactoringAction> =
        serde_json::from_str(sequence_json).map_err(|e| format!("sequence: {e}"))?;
    let refactored = apply_sequence(&sequence, &model).map_err(|e| e.to_string())?;
    let config = OptimizerConfig {
        fuzziness_threshold: fuzziness,
        ..Default::default()
    };
    let objectives =
        evaluate(&sequence, &model, &config.eval_settings()).map_err(|e| e.to_string())?;
    let refactored: serde_json::Value =
        serde_json::from_str(&to_json(&refactored)).expect("model serializes");
    Ok(json!({ "objectives": objectives, "model": refactored }).to_string())
}

#[derive(Deserialize)]
#[serde(default)]
struct DemoSearch {
    population_size: usize,
    generations: usize,
    sequence_length: usize,
    seed: u64,
    fuzziness: f64,
    pas_objective: bool,
}

impl Default for DemoSearch {
    fn default() -> Self {
        DemoSearch {
            population_size: 16,
            generations: 10,
            sequence_length: 4,
            seed: 0,
            fuzziness: 0.95,
            pas_objective: true,
        }
    }
}

/// Pareto front and hypervolume trace of one run.
pub fn optimize_json(model_json: &str, settings_json: &str) -> Result<String, String> {
    let model = parse(model_json)?;
    let s: DemoSearch =
        serde_json::from_str(settings_json).map_err(|e| format!("settings: {e}"))?;
    let config = OptimizerConfig {
        population_size: s.population_size,
        generations: s.generations,
        sequence_length: s.sequence_length,
        seed: s.seed,
        fuzziness_threshold: s.fuzziness,
        enable_pas_objective: s.pas_objective,
        ..Default::default()
    };
    let result = run(&config, &model).map_err(|e| e.to_string())?;
    let front: Vec<_> = result
        .front
        .iter()
        .map(|sol| json!({ "objectives": sol.objectives, "sequence": sol.sequence, "label": sequence_label(&sol.sequence) }))
        .collect();
    let hypervolume: Vec<f64> = result.stats.iter().map(|g| g.hypervolume).collect();
    Ok(
        json!({ "front": front, "hypervolume": hypervolume, "evaluations": result.evaluations })
            .to_string(),
    )
}

#[wasm_bindgen(js_name = sampleModel)]
pub fn sample_model() -> String {
    SAMPLE_MODEL.to_string()
}

#[wasm_bindgen]
pub fn analyze(model_json: &str, fuzziness: f64) -> Result<String, JsError> {
    analyze_json(model_json, fuzziness).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = evaluateSequence)]
pub fn evaluate_sequence(
    model_json: &str,
    sequence_json: &str,
    fuzziness: f64,
) -> Result<String, JsError> {
    evaluate_json(model_json, sequence_json, fuzziness).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn optimize(model_json: &str, settings_json: &str) -> Result<String, JsError> {
    optimize_json(model_json, settings_json).map_err(|e| JsError::new(&e))
}
