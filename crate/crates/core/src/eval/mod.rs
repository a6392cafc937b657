//! Agreement metric and the experiment harness.

mod experiment;
mod qwk;
mod report;

pub use experiment::{
    run_ablation, run_experiment, AblationReport, AblationRow, Experiment, ExperimentReport, PromptResult, Timings,
    REFERENCE_FALL_PERCENT, REFERENCE_MEAN_QWK, REFERENCE_QWK, REPORT_VERSION,
};
pub use qwk::{quadratic_weighted_kappa, qwk, weight_matrix, QwkMatrices};
pub use report::{render_ablation_text, render_experiment_text};
