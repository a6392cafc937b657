//! Per-response feedback built from path attributions.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::Grade;
use crate::error::{Error, Result};
use crate::features::{FeatureGroup, FeatureSchema, FeatureVector};
use crate::forest::Contribution;
use crate::scalar::Real;

pub const FEEDBACK_VERSION: u32 = 1;

/// Default percentile of the training distribution below which a flag
/// fires.
pub const DEFAULT_FLAG_PERCENTILE: f64 = 0.2;

/// Features watched for flags, with the message shown when one is low.
pub const FLAGGED_FEATURES: [(&str, &str); 6] = [
    ("prompt_coverage", "low prompt overlap"),
    ("content_overlap", "little overlap with the reading passage"),
    ("keyword_match_count", "few key terms"),
    ("type_token_ratio", "low lexical diversity"),
    ("word_count", "short response"),
    ("op_total", "few logical connectives"),
];

/// Fires when the feature's normalized value is below `cutoff`, the
/// `percentile` point of the training responses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlagRule {
    pub feature: String,
    pub message: String,
    pub percentile: f64,
    pub cutoff: f64,
}

/// Nearest-rank percentile of `values`; `None` when empty.
pub fn percentile(values: &[f64], p: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = ((p.clamp(0.0, 1.0) * v.len() as f64).ceil() as usize).clamp(1, v.len());
    Some(v[rank - 1])
}

/// One rule per watched feature that is in the schema and varies in
/// training. `rows` are normalized training vectors.
pub fn fit_flag_rules(schema: &FeatureSchema, rows: &[Vec<f64>], p: f64) -> Vec<FlagRule> {
    FLAGGED_FEATURES
        .iter()
        .filter_map(|&(feature, message)| {
            let i = schema.index_of(feature)?;
            if schema.stds[i] == 0.0 {
                return None;
            }
            let col: Vec<f64> = rows.iter().map(|r| r[i]).collect();
            Some(FlagRule {
                feature: feature.to_string(),
                message: message.to_string(),
                percentile: p,
                cutoff: percentile(&col, p)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureDetail {
    pub name: String,
    /// Normalized value fed to the model.
    pub value: f64,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupFeedback {
    pub group: FeatureGroup,
    pub label: String,
    pub contribution: f64,
    pub top_features: Vec<FeatureDetail>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flag {
    pub feature: String,
    pub message: String,
    pub value: f64,
    pub cutoff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackReport {
    pub version: u32,
    pub response_id: String,
    pub prompt_id: String,
    pub predicted_grade: Grade,
    pub raw_prediction: f64,
    pub bias: f64,
    /// Every group in the schema, by decreasing absolute contribution.
    pub groups: Vec<GroupFeedback>,
    pub flags: Vec<Flag>,
}

/// How many member features each group lists.
pub const TOP_FEATURES_PER_GROUP: usize = 3;

fn by_magnitude(a: f64, b: f64) -> std::cmp::Ordering {
    b.abs().total_cmp(&a.abs())
}

pub fn build_report<T: Real>(
    response_id: &str,
    prompt_id: &str,
    predicted_grade: Grade,
    contribution: &Contribution<T>,
    values: &FeatureVector<T>,
    schema: &FeatureSchema,
    rules: &[FlagRule],
) -> Result<FeedbackReport> {
    if contribution.per_feature.len() != schema.len() || values.len() != schema.len() {
        return Err(Error::SchemaMismatch(format!(
            "contribution has {} features and values {}, schema has {}",
            contribution.per_feature.len(),
            values.len(),
            schema.len()
        )));
    }
    let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
    let mut groups: Vec<GroupFeedback> = schema
        .present_groups()
        .into_iter()
        .map(|g| {
            let idx = schema.indices_of(g);
            let mut members: Vec<FeatureDetail> = idx
                .iter()
                .map(|&i| FeatureDetail {
                    name: schema.names[i].clone(),
                    value: f(values.values[i]),
                    contribution: f(contribution.per_feature[i]),
                })
                .collect();
            members.sort_by(|a, b| by_magnitude(a.contribution, b.contribution));
            members.truncate(TOP_FEATURES_PER_GROUP);
            GroupFeedback {
                group: g,
                label: g.label().to_string(),
                contribution: contribution.group(g).map_or(0.0, f),
                top_features: members,
            }
        })
        .collect();
    // Stable sort keeps canonical group order among equal magnitudes.
    groups.sort_by(|a, b| by_magnitude(a.contribution, b.contribution));
    let flags = rules
        .iter()
        .filter_map(|r| {
            let i = schema.index_of(&r.feature)?;
            let v = f(values.values[i]);
            (v < r.cutoff).then(|| Flag {
                feature: r.feature.clone(),
                message: r.message.clone(),
                value: v,
                cutoff: r.cutoff,
            })
        })
        .collect();
    Ok(FeedbackReport {
        version: FEEDBACK_VERSION,
        response_id: response_id.to_string(),
        prompt_id: prompt_id.to_string(),
        predicted_grade,
        raw_prediction: f(contribution.total()),
        bias: f(contribution.bias),
        groups,
        flags,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    PlainText,
    Structured,
}

/// Renders a report. Plain text shows numbers to three decimals and the
/// `top_groups` groups with the largest nonzero contributions; structured
/// output is the full report as JSON.
pub fn render(report: &FeedbackReport, format: ReportFormat, top_groups: usize) -> String {
    match format {
        ReportFormat::Structured => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        ReportFormat::PlainText => render_text(report, top_groups),
    }
}

fn render_text(r: &FeedbackReport, top_groups: usize) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "Response {} (prompt {})", r.response_id, r.prompt_id);
    let _ = writeln!(s, "Predicted grade: {} (raw {:.3})", r.predicted_grade, r.raw_prediction);
    let _ = writeln!(s, "Baseline: {:.3}", r.bias);
    let shown: Vec<&GroupFeedback> = r.groups.iter().filter(|g| g.contribution != 0.0).take(top_groups).collect();
    if !shown.is_empty() {
        let _ = writeln!(s, "Contributions:");
        for g in shown {
            let members: Vec<String> = g
                .top_features
                .iter()
                .map(|m| format!("{} {:+.3} (value {:.3})", m.name, m.contribution, m.value))
                .collect();
            let _ = writeln!(s, "  {:+.3}  {}: {}", g.contribution, g.label, members.join(", "));
        }
    }
    if !r.flags.is_empty() {
        let _ = writeln!(s, "Areas to improve:");
        for f in &r.flags {
            let _ = writeln!(s, "  - {} ({} {:.3} below {:.3})", f.message, f.feature, f.value, f.cutoff);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> FeatureSchema {
        FeatureSchema {
            names: vec!["prompt_coverage".into(), "prompt_jaccard".into(), "word_count".into(), "type_token_ratio".into()],
            groups: vec![
                FeatureGroup::PromptOverlap,
                FeatureGroup::PromptOverlap,
                FeatureGroup::LengthStats,
                FeatureGroup::WordFreqDifficulty,
            ],
            means: vec![0.0; 4],
            stds: vec![1.0; 4],
            normalized: vec![true; 4],
        }
    }

    fn contribution(per_feature: Vec<f64>, bias: f64) -> Contribution<f64> {
        let s = schema();
        let per_group = s
            .present_groups()
            .into_iter()
            .map(|g| (g, s.indices_of(g).iter().map(|&i| per_feature[i]).sum()))
            .collect();
        Contribution { bias, per_feature, per_group }
    }

    fn values(v: [f64; 4]) -> FeatureVector<f64> {
        FeatureVector { values: v.to_vec() }
    }

    #[test]
    fn zero_contributions_show_only_the_baseline() {
        let r = build_report("7", "1", 1, &contribution(vec![0.0; 4], 1.2), &values([0.0; 4]), &schema(), &[]).unwrap();
        let text = render(&r, ReportFormat::PlainText, 9);
        assert!(text.contains("Baseline: 1.200"));
        assert!(!text.contains("Contributions:"));
        assert!(!text.contains("Areas to improve"));
        assert!(r.flags.is_empty());
    }

    #[test]
    fn negative_prompt_overlap_ranks_first() {
        let c = contribution(vec![-0.9, -0.2, 0.3, 0.1], 1.5);
        let r = build_report("7", "1", 1, &c, &values([-1.0, 0.0, 0.5, 0.2]), &schema(), &[]).unwrap();
        assert_eq!(r.groups[0].group, FeatureGroup::PromptOverlap);
        assert!((r.groups[0].contribution + 1.1).abs() < 1e-12);
        assert_eq!(r.groups[0].top_features[0].name, "prompt_coverage");
        let sum: f64 = r.bias + r.groups.iter().map(|g| g.contribution).sum::<f64>();
        assert!((sum - r.raw_prediction).abs() < 1e-12);
    }

    #[test]
    fn flags_and_top_k() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![f64::from(i); 4]).collect();
        let rules = fit_flag_rules(&schema(), &rows, 0.2);
        assert_eq!(rules.len(), 3);
        assert_eq!(rules[0].cutoff, 1.0);
        let c = contribution(vec![0.5, 0.0, -0.3, 0.1], 1.0);
        let r = build_report("9", "1", 1, &c, &values([0.5, 0.0, 4.0, 3.0]), &schema(), &rules).unwrap();
        assert_eq!(r.flags.len(), 1);
        assert_eq!(r.flags[0].message, "low prompt overlap");
        let text = render(&r, ReportFormat::PlainText, 2);
        assert!(text.contains("Areas to improve:\n  - low prompt overlap"));
        assert_eq!(text.matches("\n  +").count() + text.matches("\n  -0").count(), 2);
    }

    #[test]
    fn structured_round_trip_and_stability() {
        let c = contribution(vec![0.1234567, -0.5, 0.25, 0.0], 0.75);
        let r = build_report("3", "2", 1, &c, &values([0.1, 0.2, 0.3, 0.4]), &schema(), &[]).unwrap();
        let json = render(&r, ReportFormat::Structured, 9);
        let back: FeedbackReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
        assert_eq!(json, render(&back, ReportFormat::Structured, 9));
    }

    #[test]
    fn mismatched_schema_is_rejected() {
        let c = contribution(vec![0.0; 4], 0.0);
        let bad = FeatureVector { values: vec![0.0; 3] };
        assert!(build_report("1", "1", 0, &c, &bad, &schema(), &[]).is_err());
    }

    #[test]
    fn nearest_rank_percentile() {
        assert_eq!(percentile(&[5.0, 1.0, 3.0, 2.0, 4.0], 0.2), Some(1.0));
        assert_eq!(percentile(&[5.0, 1.0, 3.0, 2.0, 4.0], 0.5), Some(3.0));
        assert_eq!(percentile(&[], 0.5), None);
    }
}
