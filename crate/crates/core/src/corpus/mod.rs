//! Response datasets: ingestion, prompt metadata, stratified splitting and
//! negative augmentation.

mod augment;
mod prompt;
mod split;

use std::cmp::Ordering;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use augment::{augment_cross_prompt, augment_shuffled, Augmented};
pub use prompt::{PromptSpec, PromptTable};
pub use split::{stratified_split, SplitSet, DEFAULT_RATIOS};

pub type Grade = i32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Original,
    CrossPromptNegative,
    ShuffledNegative,
}

/// One student answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub id: String,
    pub prompt_id: String,
    pub text: String,
    pub score_a: Grade,
    pub score_b: Option<Grade>,
    pub resolved_score: Grade,
    pub origin: Origin,
}

/// Which human score becomes the training target.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreResolution {
    #[default]
    ScoreA,
    ScoreB,
    Max,
}

impl ScoreResolution {
    pub fn resolve(self, score_a: Grade, score_b: Option<Grade>) -> Grade {
        match (self, score_b) {
            (ScoreResolution::ScoreA, _) | (_, None) => score_a,
            (ScoreResolution::ScoreB, Some(b)) => b,
            (ScoreResolution::Max, Some(b)) => score_a.max(b),
        }
    }
}

/// Orders ids numerically when both parse as integers, lexically otherwise.
/// ASAP ids are integers, so "9" sorts before "10".
pub fn compare_ids(a: &str, b: &str) -> Ordering {
    match (a.parse::<i64>(), b.parse::<i64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        (Err(_), Err(_)) => a.cmp(b),
    }
}

pub const ASAP_HEADER: [&str; 5] = ["Id", "EssaySet", "Score1", "Score2", "EssayText"];

/// Reads the ASAP short-answer training release: a tab-separated file with
/// one header row and the columns `Id EssaySet Score1 Score2 EssayText`.
pub fn load_asap_tsv(path: &Path, prompts: &PromptTable, resolution: ScoreResolution) -> Result<Vec<Response>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_asap_tsv(&String::from_utf8_lossy(&bytes), path, prompts, resolution)
}

pub fn parse_asap_tsv(
    content: &str,
    path: &Path,
    prompts: &PromptTable,
    resolution: ScoreResolution,
) -> Result<Vec<Response>> {
    let mut out = Vec::new();
    let mut lines = content.lines().enumerate();
    match lines.next() {
        None => return Ok(out),
        Some((_, header)) => {
            let cols: Vec<&str> = header.trim_start_matches('\u{feff}').split('\t').map(str::trim).collect();
            if cols.len() != ASAP_HEADER.len() || !cols.iter().zip(ASAP_HEADER).all(|(c, h)| c.eq_ignore_ascii_case(h)) {
                return Err(Error::parse(path, 1, format!("expected header {:?}, found {:?}", ASAP_HEADER, cols)));
            }
        }
    }
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.splitn(5, '\t').collect();
        if fields.len() != 5 {
            return Err(Error::parse(path, lineno, format!("expected 5 tab-separated columns, found {}", fields.len())));
        }
        let id = fields[0].trim();
        let prompt_id = fields[1].trim();
        let prompt = prompts
            .get(prompt_id)
            .ok_or_else(|| Error::parse(path, lineno, format!("unknown prompt id {prompt_id:?}")))?;
        let parse_grade = |s: &str, col: &str| -> Result<Grade> {
            let g: Grade = s
                .trim()
                .parse()
                .map_err(|_| Error::parse(path, lineno, format!("{col} {s:?} is not an integer")))?;
            if !prompt.contains_grade(g) {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("{col} = {g} outside grade range {}..={} of prompt {prompt_id}", prompt.grade_min, prompt.grade_max),
                ));
            }
            Ok(g)
        };
        let score_a = parse_grade(fields[2], "Score1")?;
        let score_b = match fields[3].trim() {
            "" | "NA" => None,
            s => Some(parse_grade(s, "Score2")?),
        };
        out.push(Response {
            id: id.to_string(),
            prompt_id: prompt_id.to_string(),
            text: fields[4].to_string(),
            score_a,
            score_b,
            resolved_score: resolution.resolve(score_a, score_b),
            origin: Origin::Original,
        });
    }
    Ok(out)
}

/// An ungraded response to be scored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Submission {
    pub id: String,
    pub prompt_id: String,
    pub text: String,
}

/// Reads responses for scoring. Accepts either the three-column
/// `Id EssaySet EssayText` layout or the five-column training layout (scores
/// are ignored).
pub fn load_submissions(path: &Path) -> Result<Vec<Submission>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let content = String::from_utf8_lossy(&bytes);
    let mut lines = content.lines().enumerate();
    let width = match lines.next() {
        None => return Ok(Vec::new()),
        Some((_, header)) => {
            let cols: Vec<String> = header
                .trim_start_matches('\u{feff}')
                .split('\t')
                .map(|c| c.trim().to_ascii_lowercase())
                .collect();
            match cols.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
                ["id", "essayset", "essaytext"] => 3,
                ["id", "essayset", "score1", "score2", "essaytext"] => 5,
                _ => return Err(Error::parse(path, 1, format!("unrecognised header {cols:?}"))),
            }
        }
    };
    let mut out = Vec::new();
    for (idx, line) in lines {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.splitn(width, '\t').collect();
        if fields.len() != width {
            return Err(Error::parse(
                path,
                idx + 1,
                format!("expected {width} tab-separated columns, found {}", fields.len()),
            ));
        }
        out.push(Submission {
            id: fields[0].trim().to_string(),
            prompt_id: fields[1].trim().to_string(),
            text: fields[width - 1].to_string(),
        });
    }
    Ok(out)
}

/// Writes responses in the five-column training layout.
pub fn write_asap_tsv(responses: &[Response]) -> String {
    let mut s = ASAP_HEADER.join("\t");
    s.push('\n');
    for r in responses {
        let b = r.score_b.map(|b| b.to_string()).unwrap_or_default();
        s.push_str(&format!("{}\t{}\t{}\t{}\t{}\n", r.id, r.prompt_id, r.score_a, b, r.text.replace(['\t', '\n'], " ")));
    }
    s
}
