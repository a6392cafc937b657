use std::fmt::Write as _;

use super::experiment::{AblationReport, ExperimentReport};

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.3}"))
}

/// Per-prompt QWK table with the published values alongside.
pub fn render_experiment_text(r: &ExperimentReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<8} {:>6} {:>6} {:>5} {:>5} {:>9} {:>8} {:>8} {:>8} {:>9}",
        "prompt", "train", "neg", "val", "test", "threshold", "val_qwk", "test_qwk", "score_b", "published"
    );
    for p in &r.prompts {
        let _ = writeln!(
            s,
            "{:<8} {:>6} {:>6} {:>5} {:>5} {:>9} {:>8} {:>8.3} {:>8} {:>9}",
            p.prompt_id,
            p.n_train,
            p.n_cross_prompt_negatives + p.n_shuffled_negatives,
            p.n_validation,
            p.n_test,
            p.incidence_threshold,
            opt(p.validation_qwk),
            p.test_qwk,
            opt(p.test_qwk_score_b),
            opt(p.reference_qwk)
        );
    }
    let _ = writeln!(
        s,
        "{:<8} {:>6} {:>6} {:>5} {:>5} {:>9} {:>8} {:>8.3} {:>8} {:>9.3}",
        "mean", "", "", "", "", "", "", r.mean_test_qwk, "", r.reference_mean_qwk
    );
    s
}

/// Groups ordered by QWK fall, with the published falls alongside.
pub fn render_ablation_text(r: &AblationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "full model mean QWK: {:.3}", r.baseline_mean_qwk);
    let _ = writeln!(s, "{:<4} {:<30} {:>8} {:>8} {:>8} {:>10}", "rank", "group", "qwk", "fall", "fall_%", "published%");
    for (i, row) in r.rows.iter().enumerate() {
        let _ = writeln!(
            s,
            "{:<4} {:<30} {:>8.3} {:>8.3} {:>8.2} {:>10}",
            i + 1,
            row.group.label(),
            row.mean_test_qwk,
            row.qwk_fall,
            row.fall_percent,
            row.reference_fall_percent.map_or_else(|| "-".to_string(), |v| format!("{v:.2}"))
        );
    }
    s
}
