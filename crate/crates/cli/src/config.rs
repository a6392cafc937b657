use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use sasgrade::corpus::{load_asap_tsv, PromptTable, Response, ScoreResolution};
use sasgrade::embeddings::{load_idf, load_vectors, VectorFormat};
use sasgrade::features::{DifficultyLexicon, FeatureGroup, FeatureResources, Stopwords, SynonymLexicon};
use sasgrade::model::TrainConfig;
use sasgrade::scalar::Real;
use sasgrade::textproc::{read_tagged_corpus, Lexicon, PerceptronTagger, Preprocessor, SpellCorrector, Tagger, TrainOptions};
use sasgrade::{Error, Result};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
pub enum Scalar {
    #[default]
    #[serde(rename = "f64")]
    F64,
    #[serde(rename = "f32")]
    F32,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataPaths {
    pub dataset: PathBuf,
    pub prompts: PathBuf,
    #[serde(default)]
    pub score_resolution: ScoreResolution,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourcePaths {
    pub embeddings: Option<PathBuf>,
    #[serde(default)]
    pub embeddings_format: VectorFormat,
    /// `word<TAB>idf` sidecar for the embedding table.
    pub embeddings_idf: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub synonyms: Option<PathBuf>,
    /// Word frequencies used to assign difficulty levels.
    pub frequency_lexicon: Option<PathBuf>,
    /// Word frequencies for spelling correction; no correction when unset.
    pub spell_lexicon: Option<PathBuf>,
    pub tagger_model: Option<PathBuf>,
    /// `word_TAG` corpus to train a tagger from when no model is given.
    pub tagger_corpus: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub scalar: Scalar,
    /// Output directory; `--out` takes precedence.
    pub output: Option<PathBuf>,
    pub data: Option<DataPaths>,
    #[serde(default)]
    pub resources: ResourcePaths,
    #[serde(default)]
    pub train: TrainConfig,
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub disabled: Vec<FeatureGroup>,
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

fn require_file(what: &str, p: &Path) -> Result<()> {
    if p.is_file() {
        Ok(())
    } else {
        Err(Error::Io {
            path: p.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, format!("{what} not found")),
        })
    }
}

impl RunConfig {
    /// Parses the file, resolves its paths against the file's directory,
    /// applies overrides and validates.
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(d) = &mut cfg.data {
            resolve(base, &mut d.dataset);
            resolve(base, &mut d.prompts);
        }
        let r = &mut cfg.resources;
        for p in [
            &mut r.embeddings,
            &mut r.embeddings_idf,
            &mut r.stopwords,
            &mut r.synonyms,
            &mut r.frequency_lexicon,
            &mut r.spell_lexicon,
            &mut r.tagger_model,
            &mut r.tagger_corpus,
        ]
        .into_iter()
        .flatten()
        {
            resolve(base, p);
        }
        if let Some(o) = &mut cfg.output {
            resolve(base, o);
        }

        if let Some(seed) = overrides.seed {
            cfg.train.seed = seed;
        }
        if let Some(out) = &overrides.out {
            cfg.output = Some(out.clone());
        }
        for g in &overrides.disabled {
            cfg.train.features.groups.remove(g);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.train.features.groups.is_empty() {
            return Err(Error::Config("every feature group is disabled".into()));
        }
        let sum: f64 = self.train.split_ratios.iter().sum();
        if (sum - 1.0).abs() > 1e-9 || self.train.split_ratios.iter().any(|r| *r < 0.0) {
            return Err(Error::Config(format!(
                "split_ratios {:?} must be nonnegative and sum to 1",
                self.train.split_ratios
            )));
        }
        if self.train.forest.n_trees == 0 {
            return Err(Error::Config("forest.n_trees must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.train.flag_percentile) {
            return Err(Error::Config("flag_percentile must lie in [0, 1]".into()));
        }
        if let Some(d) = &self.data {
            require_file("dataset", &d.dataset)?;
            require_file("prompt table", &d.prompts)?;
        }
        let r = &self.resources;
        let files = [
            ("embeddings", &r.embeddings),
            ("embeddings idf", &r.embeddings_idf),
            ("stopword list", &r.stopwords),
            ("synonym lexicon", &r.synonyms),
            ("frequency lexicon", &r.frequency_lexicon),
            ("spelling lexicon", &r.spell_lexicon),
            ("tagger model", &r.tagger_model),
            ("tagger corpus", &r.tagger_corpus),
        ];
        for (what, p) in files {
            if let Some(p) = p {
                require_file(what, p)?;
            }
        }
        if self.train.features.groups.contains(&FeatureGroup::Embeddings) && r.embeddings.is_none() {
            return Err(Error::Config(
                "the embeddings group is enabled but resources.embeddings is not set".into(),
            ));
        }
        Ok(())
    }

    pub fn data(&self) -> Result<&DataPaths> {
        self.data
            .as_ref()
            .ok_or_else(|| Error::Config("this command needs a [data] section".into()))
    }

    pub fn output_dir(&self) -> Result<&Path> {
        self.output
            .as_deref()
            .ok_or_else(|| Error::Config("no output directory: set `output` or pass --out".into()))
    }

    pub fn enabled_groups(&self) -> Vec<FeatureGroup> {
        let g: &BTreeSet<FeatureGroup> = &self.train.features.groups;
        g.iter().copied().collect()
    }

    pub fn load_dataset(&self) -> Result<(PromptTable, Vec<Response>)> {
        let d = self.data()?;
        let prompts = PromptTable::load(&d.prompts)?;
        let responses = load_asap_tsv(&d.dataset, &prompts, d.score_resolution)?;
        Ok((prompts, responses))
    }

    pub fn load_resources<T: Real>(&self) -> Result<FeatureResources<T>> {
        let r = &self.resources;
        let tagger = match (&r.tagger_model, &r.tagger_corpus) {
            (Some(m), _) => Tagger::Perceptron(PerceptronTagger::load(m)?),
            (None, Some(c)) => {
                let sentences = read_tagged_corpus(c)?;
                let opts = TrainOptions {
                    seed: self.train.seed,
                    ..TrainOptions::default()
                };
                Tagger::Perceptron(PerceptronTagger::train(&sentences, opts))
            }
            (None, None) => Tagger::default(),
        };
        let speller = r.spell_lexicon.as_deref().map(Lexicon::load).transpose()?.map(SpellCorrector::new);
        let embeddings = match &r.embeddings {
            None => None,
            Some(p) => {
                let table = load_vectors::<T>(p, r.embeddings_format)?;
                Some(match &r.embeddings_idf {
                    Some(i) => table.with_idf(load_idf(i)?),
                    None => table,
                })
            }
        };
        let difficulty = match &r.frequency_lexicon {
            Some(p) => DifficultyLexicon::from_frequencies(&Lexicon::load(p)?),
            None => DifficultyLexicon::default(),
        };
        Ok(FeatureResources {
            preprocessor: Preprocessor {
                tagger,
                speller,
                ..Preprocessor::default()
            },
            embeddings,
            stopwords: r.stopwords.as_deref().map(Stopwords::load).transpose()?.unwrap_or_default(),
            synonyms: r.synonyms.as_deref().map(SynonymLexicon::load).transpose()?,
            difficulty,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn paths_resolve_against_the_config_directory() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "d.tsv", "Id\tEssaySet\tScore1\tScore2\tEssayText\n");
        write(dir.path(), "p.toml", "");
        let cfg = write(
            dir.path(),
            "run.toml",
            "output = \"out\"\n[data]\ndataset = \"d.tsv\"\nprompts = \"p.toml\"\n[train.features]\ngroups = [\"temporal\"]\n",
        );
        let c = RunConfig::load(&cfg, &Overrides::default()).unwrap();
        assert_eq!(c.data().unwrap().dataset, dir.path().join("d.tsv"));
        assert_eq!(c.output_dir().unwrap(), dir.path().join("out"));
        assert_eq!(c.enabled_groups(), [FeatureGroup::Temporal]);
    }

    #[test]
    fn disabling_every_group_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write(dir.path(), "run.toml", "[train.features]\ngroups = [\"temporal\"]\n");
        let o = Overrides {
            disabled: vec![FeatureGroup::Temporal],
            ..Overrides::default()
        };
        assert!(matches!(RunConfig::load(&cfg, &o), Err(Error::Config(_))));
    }

    #[test]
    fn missing_files_and_bad_settings_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write(dir.path(), "a.toml", "[data]\ndataset = \"nope.tsv\"\nprompts = \"nope.toml\"\n");
        assert!(matches!(RunConfig::load(&cfg, &Overrides::default()), Err(Error::Io { .. })));
        let cfg = write(dir.path(), "b.toml", "colour = 3\n");
        assert!(matches!(RunConfig::load(&cfg, &Overrides::default()), Err(Error::Config(_))));
        let cfg = write(dir.path(), "c.toml", "[train]\nsplit_ratios = [0.5, 0.1, 0.1]\n");
        assert!(matches!(RunConfig::load(&cfg, &Overrides::default()), Err(Error::Config(_))));
    }

    #[test]
    fn overrides_take_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write(dir.path(), "run.toml", "output = \"a\"\n[train]\nseed = 1\n[train.features]\ngroups = [\"temporal\", \"length-stats\"]\n");
        let o = Overrides {
            seed: Some(9),
            out: Some(PathBuf::from("/tmp/b")),
            disabled: vec![FeatureGroup::Temporal],
        };
        let c = RunConfig::load(&cfg, &o).unwrap();
        assert_eq!(c.train.seed, 9);
        assert_eq!(c.output_dir().unwrap(), Path::new("/tmp/b"));
        assert_eq!(c.enabled_groups(), [FeatureGroup::LengthStats]);
    }
}
