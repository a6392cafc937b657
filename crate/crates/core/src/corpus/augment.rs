use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{compare_ids, Origin, PromptSpec, Response};

/// Result of an augmentation step. `shortfall` is how many fewer items were
/// produced than requested because the eligible pool was too small.
#[derive(Debug, Clone, PartialEq)]
pub struct Augmented {
    pub responses: Vec<Response>,
    pub shortfall: usize,
}

fn by_score_then_id(a: &&Response, b: &&Response) -> std::cmp::Ordering {
    b.resolved_score
        .cmp(&a.resolved_score)
        .then_with(|| compare_ids(&a.id, &b.id))
        .then_with(|| a.prompt_id.cmp(&b.prompt_id))
}

fn as_negative(target: &PromptSpec, id: String, text: String, origin: Origin) -> Response {
    Response {
        id,
        prompt_id: target.prompt_id.clone(),
        text,
        score_a: target.grade_min,
        score_b: None,
        resolved_score: target.grade_min,
        origin,
    }
}

/// Takes the `k` highest-graded original responses written for *other*
/// prompts and relabels them as lowest-grade answers to `target`. Ties on
/// score are broken by id order.
pub fn augment_cross_prompt<'a, I>(target: &PromptSpec, other_sets: I, k: usize) -> Augmented
where
    I: IntoIterator<Item = &'a [Response]>,
{
    let mut pool: Vec<&Response> = other_sets
        .into_iter()
        .flatten()
        .filter(|r| r.origin == Origin::Original && r.prompt_id != target.prompt_id)
        .collect();
    pool.sort_by(by_score_then_id);
    let shortfall = k.saturating_sub(pool.len());
    if shortfall > 0 {
        log::warn!(
            "prompt {}: only {} cross-prompt responses available, {} requested",
            target.prompt_id,
            pool.len(),
            k
        );
    }
    let responses = pool
        .into_iter()
        .take(k)
        .map(|r| {
            as_negative(
                target,
                format!("xp-{}-{}", r.prompt_id, r.id),
                r.text.clone(),
                Origin::CrossPromptNegative,
            )
        })
        .collect();
    Augmented { responses, shortfall }
}

/// Copies the `m` highest-graded training responses with their words put in
/// random order, labelled with the prompt's lowest grade.
///
/// Responses with fewer than two distinct words are skipped since every
/// permutation of them reproduces the original.
pub fn augment_shuffled(train: &[Response], prompt: &PromptSpec, m: usize, seed: u64) -> Augmented {
    let mut eligible: Vec<&Response> = train
        .iter()
        .filter(|r| r.origin == Origin::Original)
        .filter(|r| {
            let mut words = r.text.split_whitespace();
            let first = words.next();
            words.any(|w| Some(w) != first)
        })
        .collect();
    eligible.sort_by(by_score_then_id);
    let shortfall = m.saturating_sub(eligible.len());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let responses = eligible
        .into_iter()
        .take(m)
        .map(|r| {
            let words: Vec<&str> = r.text.split_whitespace().collect();
            let mut shuffled = words.clone();
            shuffled.shuffle(&mut rng);
            if shuffled == words {
                // Fixed point of the shuffle: rotate to the first position
                // holding a different word.
                let pos = words.iter().position(|w| *w != words[0]).expect("two distinct words");
                shuffled.rotate_left(pos);
            }
            as_negative(
                prompt,
                format!("sh-{}", r.id),
                shuffled.join(" "),
                Origin::ShuffledNegative,
            )
        })
        .collect();
    Augmented { responses, shortfall }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::ScoreResolution;

    fn resp(id: &str, prompt: &str, score: i32, text: &str) -> Response {
        Response {
            id: id.into(),
            prompt_id: prompt.into(),
            text: text.into(),
            score_a: score,
            score_b: None,
            resolved_score: ScoreResolution::ScoreA.resolve(score, None),
            origin: Origin::Original,
        }
    }

    fn sorted_words(s: &str) -> Vec<&str> {
        let mut w: Vec<&str> = s.split_whitespace().collect();
        w.sort_unstable();
        w
    }

    #[test]
    fn cross_prompt_takes_top_k_and_relabels() {
        let target = PromptSpec::new("1", "q", 0, 3);
        let sets: Vec<Vec<Response>> = (2..=10)
            .map(|p| (0..4).map(|i| resp(&format!("{p}{i}"), &p.to_string(), i % 3, "some text")).collect())
            .collect();
        let out = augment_cross_prompt(&target, sets.iter().map(Vec::as_slice), 10);
        assert_eq!(out.responses.len(), 10);
        assert_eq!(out.shortfall, 0);
        for r in &out.responses {
            assert_eq!(r.resolved_score, 0);
            assert_eq!(r.prompt_id, "1");
            assert_eq!(r.origin, Origin::CrossPromptNegative);
        }
        // 9 prompts contribute one grade-2 response each; the tenth comes from
        // the grade-1 tier, lowest id first.
        assert_eq!(out.responses[0].id, "xp-2-22");
        assert_eq!(out.responses[9].id, "xp-2-21");
    }

    #[test]
    fn cross_prompt_edge_cases() {
        let target = PromptSpec::new("1", "q", 1, 3);
        let other = vec![resp("a", "2", 2, "x"), resp("b", "2", 1, "y"), resp("c", "1", 3, "own prompt")];
        assert!(augment_cross_prompt(&target, [other.as_slice()], 0).responses.is_empty());
        let out = augment_cross_prompt(&target, [other.as_slice()], 10);
        assert_eq!(out.responses.len(), 2);
        assert_eq!(out.shortfall, 8);
        assert!(out.responses.iter().all(|r| r.resolved_score == 1));
    }

    #[test]
    fn shuffled_keeps_multiset_and_changes_order() {
        let prompt = PromptSpec::new("1", "q", 0, 3);
        let text: String = (0..50).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ");
        let train = vec![resp("1", "1", 3, &text), resp("2", "1", 1, "low one")];
        let out = augment_shuffled(&train, &prompt, 1, 5);
        let neg = &out.responses[0];
        assert_eq!(neg.id, "sh-1");
        assert_eq!(neg.resolved_score, 0);
        assert_eq!(neg.origin, Origin::ShuffledNegative);
        assert_eq!(sorted_words(&neg.text), sorted_words(&text));
        assert_ne!(neg.text, text);
    }

    #[test]
    fn shuffled_zero_and_determinism_and_single_word() {
        let prompt = PromptSpec::new("1", "q", 0, 3);
        let train = vec![resp("1", "1", 3, "alpha beta gamma delta"), resp("2", "1", 3, "solo"), resp("3", "1", 2, "a a a")];
        assert!(augment_shuffled(&train, &prompt, 0, 1).responses.is_empty());
        let a = augment_shuffled(&train, &prompt, 10, 42);
        let b = augment_shuffled(&train, &prompt, 10, 42);
        assert_eq!(a, b);
        assert_eq!(a.responses.len(), 1);
        assert_eq!(a.shortfall, 9);
    }

    #[test]
    fn two_word_response_is_swapped() {
        let prompt = PromptSpec::new("1", "q", 0, 3);
        let train = vec![resp("1", "1", 3, "hello world")];
        for seed in 0..20 {
            assert_eq!(augment_shuffled(&train, &prompt, 1, seed).responses[0].text, "world hello");
        }
    }
}
