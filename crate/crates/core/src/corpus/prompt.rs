use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::Grade;
use crate::error::{Error, Result};

/// A question with its grading range and optional comprehension passage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptSpec {
    pub prompt_id: String,
    pub question_text: String,
    pub passage_text: Option<String>,
    pub grade_min: Grade,
    pub grade_max: Grade,
    /// Offline documents used for keyword weighting.
    #[serde(default)]
    pub reference_docs: Vec<String>,
}

impl PromptSpec {
    pub fn new(id: &str, question: &str, grade_min: Grade, grade_max: Grade) -> Self {
        PromptSpec {
            prompt_id: id.to_string(),
            question_text: question.to_string(),
            passage_text: None,
            grade_min,
            grade_max,
            reference_docs: Vec::new(),
        }
    }

    pub fn contains_grade(&self, g: Grade) -> bool {
        (self.grade_min..=self.grade_max).contains(&g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grade_min >= self.grade_max {
            return Err(Error::Config(format!(
                "prompt {}: grade_min {} must be below grade_max {}",
                self.prompt_id, self.grade_min, self.grade_max
            )));
        }
        if self.question_text.trim().is_empty() {
            return Err(Error::Config(format!("prompt {}: empty question text", self.prompt_id)));
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PromptEntry {
    id: String,
    question: String,
    passage: Option<String>,
    passage_file: Option<PathBuf>,
    grade_min: Grade,
    grade_max: Grade,
    #[serde(default)]
    reference_docs: Vec<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PromptFile {
    #[serde(default)]
    prompt: Vec<PromptEntry>,
}

/// All prompts of a dataset, keyed by prompt id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PromptTable {
    prompts: BTreeMap<String, PromptSpec>,
}

impl PromptTable {
    pub fn from_specs(specs: impl IntoIterator<Item = PromptSpec>) -> Self {
        PromptTable {
            prompts: specs.into_iter().map(|p| (p.prompt_id.clone(), p)).collect(),
        }
    }

    /// Loads a TOML prompt table. Passage and reference-document paths are
    /// resolved relative to the table's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: PromptFile = toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut prompts = BTreeMap::new();
        for entry in file.prompt {
            let passage_text = match (entry.passage, entry.passage_file) {
                (Some(_), Some(_)) => {
                    return Err(Error::Config(format!("prompt {}: give passage or passage_file, not both", entry.id)))
                }
                (Some(p), None) => Some(p),
                (None, Some(f)) => {
                    let f = base.join(f);
                    Some(fs::read_to_string(&f).map_err(|e| Error::io(&f, e))?)
                }
                (None, None) => None,
            };
            let reference_docs = entry
                .reference_docs
                .iter()
                .map(|p| {
                    let p = base.join(p);
                    fs::read(&p)
                        .map(|b| String::from_utf8_lossy(&b).into_owned())
                        .map_err(|e| Error::io(&p, e))
                })
                .collect::<Result<Vec<_>>>()?;
            let spec = PromptSpec {
                prompt_id: entry.id.clone(),
                question_text: entry.question,
                passage_text,
                grade_min: entry.grade_min,
                grade_max: entry.grade_max,
                reference_docs,
            };
            spec.validate()?;
            if prompts.insert(entry.id.clone(), spec).is_some() {
                return Err(Error::Config(format!("duplicate prompt id {}", entry.id)));
            }
        }
        Ok(PromptTable { prompts })
    }

    pub fn get(&self, id: &str) -> Option<&PromptSpec> {
        self.prompts.get(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.prompts.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = &PromptSpec> {
        self.prompts.values()
    }

    pub fn len(&self) -> usize {
        self.prompts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prompts.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_relative_reference_docs() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("ref.txt"), "Cells divide by mitosis.").unwrap();
        fs::write(dir.path().join("passage.txt"), "Paul met Mr. Leonard.").unwrap();
        fs::write(
            dir.path().join("prompts.toml"),
            r#"
[[prompt]]
id = "1"
question = "How do cells divide?"
grade_min = 0
grade_max = 3
reference_docs = ["ref.txt"]

[[prompt]]
id = "2"
question = "Describe Paul."
passage_file = "passage.txt"
grade_min = 0
grade_max = 2
"#,
        )
        .unwrap();
        let table = PromptTable::load(&dir.path().join("prompts.toml")).unwrap();
        assert_eq!(table.len(), 2);
        assert_eq!(table.get("1").unwrap().reference_docs, ["Cells divide by mitosis."]);
        assert_eq!(table.get("2").unwrap().passage_text.as_deref(), Some("Paul met Mr. Leonard."));
    }

    #[test]
    fn rejects_inverted_grade_range() {
        assert!(PromptSpec::new("x", "q?", 3, 3).validate().is_err());
        assert!(PromptSpec::new("x", "q?", 0, 3).validate().is_ok());
    }
}
