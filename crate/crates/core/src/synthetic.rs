//! Deterministic synthetic prompts whose grades are a known function of the
//! text, for tests, fixtures and sanity checks.
//!
//! A response to a synthetic prompt earns one grade point for every concept
//! word of the question it mentions, so its grade equals both the number of
//! keyword matches and (up to a constant factor) its prompt coverage.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Grade, Origin, PromptSpec, PromptTable, Response};
use crate::embeddings::EmbeddingTable;
use crate::features::{DifficultyLexicon, FeatureResources};
use crate::scalar::Real;
use crate::textproc::{tokenize_and_split, Lexicon};

const TOPICS: [(&str, [&str; 3]); 10] = [
    ("cell", ["membrane", "solute", "gradient"]),
    ("river", ["sediment", "delta", "erosion"]),
    ("engine", ["piston", "crankshaft", "exhaust"]),
    ("forest", ["canopy", "fungus", "lichen"]),
    ("volcano", ["magma", "crater", "basalt"]),
    ("market", ["merchant", "tariff", "barter"]),
    ("planet", ["orbit", "gravity", "comet"]),
    ("castle", ["moat", "drawbridge", "turret"]),
    ("ocean", ["plankton", "coral", "current"]),
    ("story", ["narrator", "villain", "climax"]),
];

const CONCEPT_TEMPLATES: [&str; 4] = [
    "The {} is important.",
    "We studied the {} in class.",
    "I remember the {} from the lesson.",
    "Then the {} changed.",
];

const FILLER: [&str; 8] = [
    "I think my answer is good.",
    "My teacher wanted a short reply.",
    "This was written quickly today.",
    "I wrote down some ideas.",
    "It was a long week at school.",
    "We talked about it with a friend.",
    "That is what I know.",
    "Maybe I forgot something else.",
];

/// Highest grade of every synthetic prompt.
pub const SYNTHETIC_GRADE_MAX: Grade = 3;

pub struct SyntheticSet {
    pub prompts: PromptTable,
    pub responses: Vec<Response>,
}

fn prompt_spec(index: usize) -> PromptSpec {
    let (subject, concepts) = TOPICS[index % TOPICS.len()];
    let id = (index + 1).to_string();
    let question = format!(
        "Explain how the {}, the {} and the {} relate to the {}.",
        concepts[0], concepts[1], concepts[2], subject
    );
    let mut p = PromptSpec::new(&id, &question, 0, SYNTHETIC_GRADE_MAX);
    p.reference_docs = vec![
        format!("The {} and the {} shape the {}.", concepts[0], concepts[1], subject),
        format!("A {} depends on the {}.", subject, concepts[2]),
        "Clear evidence supports every claim.".to_string(),
    ];
    p
}

fn response_text(concepts: &[&str], grade: usize, rng: &mut ChaCha8Rng) -> String {
    let mut chosen: Vec<&str> = concepts.to_vec();
    chosen.shuffle(rng);
    let mut sentences: Vec<String> = chosen[..grade]
        .iter()
        .map(|c| CONCEPT_TEMPLATES.choose(rng).expect("nonempty").replace("{}", c))
        .collect();
    for _ in 0..rng.gen_range(1..=3) {
        sentences.push(FILLER.choose(rng).expect("nonempty").to_string());
    }
    sentences.shuffle(rng);
    sentences.join(" ")
}

/// `n_prompts` prompts with `per_prompt` responses each. Grades cycle
/// through 0..=3 before shuffling, so every grade is equally common.
pub fn synthetic_set(n_prompts: usize, per_prompt: usize, seed: u64) -> SyntheticSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut specs = Vec::new();
    let mut responses = Vec::new();
    let mut next_id = 1;
    for p in 0..n_prompts {
        let spec = prompt_spec(p);
        let concepts = TOPICS[p % TOPICS.len()].1;
        let mut grades: Vec<usize> = (0..per_prompt).map(|i| i % (SYNTHETIC_GRADE_MAX as usize + 1)).collect();
        grades.shuffle(&mut rng);
        for g in grades {
            responses.push(Response {
                id: next_id.to_string(),
                prompt_id: spec.prompt_id.clone(),
                text: response_text(&concepts, g, &mut rng),
                score_a: g as Grade,
                score_b: Some(g as Grade),
                resolved_score: g as Grade,
                origin: Origin::Original,
            });
            next_id += 1;
        }
        specs.push(spec);
    }
    SyntheticSet {
        prompts: PromptTable::from_specs(specs),
        responses,
    }
}

/// Every lowercased word the generator can emit, sorted.
pub fn synthetic_vocabulary() -> Vec<String> {
    let mut words = BTreeSet::new();
    let mut add = |text: &str| {
        for t in tokenize_and_split(text).tokens.iter().filter(|t| t.is_word()) {
            words.insert(t.lower());
        }
    };
    for i in 0..TOPICS.len() {
        let p = prompt_spec(i);
        add(&p.question_text);
        p.reference_docs.iter().for_each(|d| add(d));
    }
    FILLER.iter().chain(&CONCEPT_TEMPLATES).for_each(|s| add(s));
    words.into_iter().collect()
}

/// Random unit-scale vectors for the synthetic vocabulary.
pub fn synthetic_embeddings<T: Real>(dim: usize, seed: u64) -> EmbeddingTable<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = EmbeddingTable::new(dim);
    for w in synthetic_vocabulary() {
        let v: Vec<T> = (0..dim).map(|_| T::from_f64_lossy(rng.gen_range(-1.0..1.0))).collect();
        table.insert(&w, &v);
    }
    table
}

/// Resources matching the generator: a small embedding table and a
/// difficulty lexicon ranked by position in the vocabulary.
pub fn synthetic_resources<T: Real>(seed: u64) -> FeatureResources<T> {
    let vocab = synthetic_vocabulary();
    let n = vocab.len() as u64;
    let lexicon = Lexicon::from_counts(vocab.iter().enumerate().map(|(i, w)| (w.as_str(), n - i as u64)));
    FeatureResources {
        embeddings: Some(synthetic_embeddings(8, seed)),
        difficulty: DifficultyLexicon::from_frequencies(&lexicon),
        ..FeatureResources::default()
    }
}
