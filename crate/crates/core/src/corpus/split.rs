use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{compare_ids, Grade, Origin, Response};
use crate::error::{Error, Result};

pub const DEFAULT_RATIOS: [f64; 3] = [0.7, 0.1, 0.2];

const PARTS: usize = 3;
const QUOTA_EPS: f64 = 1e-9;

/// Disjoint train / validation / test id lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSet {
    pub train: Vec<String>,
    pub validation: Vec<String>,
    pub test: Vec<String>,
    pub ratios: [f64; 3],
}

impl SplitSet {
    pub fn parts(&self) -> [&[String]; 3] {
        [&self.train, &self.validation, &self.test]
    }
}

/// Splits one prompt's responses into train, validation and test parts,
/// stratified by resolved grade.
///
/// Each grade stratum is cut with largest-remainder rounding, and the
/// leftover units are placed so that part totals are themselves a
/// largest-remainder rounding of `ratio * total`. Every (part, grade) count is
/// therefore within one of its exact quota. Responses that are not
/// [`Origin::Original`] always go to train.
pub fn stratified_split(responses: &[Response], ratios: [f64; 3], seed: u64) -> Result<SplitSet> {
    if ratios.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(Error::InvalidInput(format!("split ratios must be nonnegative, got {ratios:?}")));
    }
    let sum: f64 = ratios.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!("split ratios must sum to 1, got {sum}")));
    }
    if let Some(first) = responses.first() {
        if let Some(other) = responses.iter().find(|r| r.prompt_id != first.prompt_id) {
            return Err(Error::InvalidInput(format!(
                "stratified split needs a single prompt, found {} and {}",
                first.prompt_id, other.prompt_id
            )));
        }
    }

    let mut strata: BTreeMap<Grade, Vec<&str>> = BTreeMap::new();
    let mut augmented = Vec::new();
    for r in responses {
        if r.origin == Origin::Original {
            strata.entry(r.resolved_score).or_default().push(&r.id);
        } else {
            augmented.push(r.id.clone());
        }
    }
    let sizes: Vec<usize> = strata.values().map(Vec::len).collect();
    let counts = allocate(&sizes, ratios);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parts: [Vec<String>; PARTS] = Default::default();
    for (ids, row) in strata.values_mut().zip(&counts) {
        ids.sort_by(|a, b| compare_ids(a, b));
        ids.shuffle(&mut rng);
        let mut rest = &ids[..];
        for (part, &c) in parts.iter_mut().zip(row) {
            let (take, tail) = rest.split_at(c);
            part.extend(take.iter().map(|s| s.to_string()));
            rest = tail;
        }
        debug_assert!(rest.is_empty());
    }
    parts[0].extend(augmented);
    for part in &mut parts {
        part.sort_by(|a, b| compare_ids(a, b));
    }
    let [train, validation, test] = parts;
    Ok(SplitSet {
        train,
        validation,
        test,
        ratios,
    })
}

fn floor_quota(q: f64) -> (usize, f64) {
    let f = (q + QUOTA_EPS).floor();
    (f as usize, (q - f).max(0.0))
}

/// Largest-remainder split of `n` units by `ratios`; ties go to the lower part
/// index.
fn largest_remainder(n: usize, ratios: [f64; 3]) -> [usize; 3] {
    let mut out = [0; PARTS];
    let mut fracs = [0.0; PARTS];
    for p in 0..PARTS {
        (out[p], fracs[p]) = floor_quota(ratios[p] * n as f64);
    }
    let assigned: usize = out.iter().sum();
    let mut order: Vec<usize> = (0..PARTS).collect();
    order.sort_by(|&a, &b| fracs[b].total_cmp(&fracs[a]).then(a.cmp(&b)));
    for &p in order.iter().cycle().take(n.saturating_sub(assigned)) {
        out[p] += 1;
    }
    out
}

/// Integer (stratum x part) counts whose rows sum to the stratum sizes, whose
/// columns sum to the largest-remainder part totals, and where every cell is
/// the floor of its quota or one more.
fn allocate(sizes: &[usize], ratios: [f64; 3]) -> Vec<[usize; 3]> {
    let total: usize = sizes.iter().sum();
    let targets = largest_remainder(total, ratios);

    let mut counts = Vec::with_capacity(sizes.len());
    let mut fracs = Vec::with_capacity(sizes.len());
    let mut row_deficit = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let mut row = [0; PARTS];
        let mut fr = [0.0; PARTS];
        for p in 0..PARTS {
            (row[p], fr[p]) = floor_quota(ratios[p] * n as f64);
        }
        row_deficit.push(n - row.iter().sum::<usize>());
        counts.push(row);
        fracs.push(fr);
    }
    let mut col_remaining = [0usize; PARTS];
    for p in 0..PARTS {
        let used: usize = counts.iter().map(|r| r[p]).sum();
        col_remaining[p] = targets[p].saturating_sub(used);
    }

    // Each stratum hands its leftover units to distinct parts; this is a small
    // bipartite b-matching solved by augmenting paths, trying parts in order of
    // descending remainder.
    let prefs: Vec<Vec<usize>> = fracs
        .iter()
        .map(|fr| {
            let mut o: Vec<usize> = (0..PARTS).collect();
            o.sort_by(|&a, &b| fr[b].total_cmp(&fr[a]).then(a.cmp(&b)));
            o
        })
        .collect();
    let mut extra = vec![[false; PARTS]; sizes.len()];
    let mut feasible = true;
    'rows: for g in 0..sizes.len() {
        for _ in 0..row_deficit[g] {
            let mut visited = [false; PARTS];
            if !augment(g, &prefs, &mut extra, &mut col_remaining, &mut visited) {
                feasible = false;
                break 'rows;
            }
        }
    }
    if !feasible {
        log::warn!("could not balance split totals exactly; falling back to per-grade rounding");
        return sizes.iter().map(|&n| largest_remainder(n, ratios)).collect();
    }
    for (row, ex) in counts.iter_mut().zip(&extra) {
        for p in 0..PARTS {
            row[p] += usize::from(ex[p]);
        }
    }
    counts
}

fn augment(
    g: usize,
    prefs: &[Vec<usize>],
    extra: &mut [[bool; PARTS]],
    col_remaining: &mut [usize; PARTS],
    visited: &mut [bool; PARTS],
) -> bool {
    for &p in &prefs[g] {
        if extra[g][p] || visited[p] {
            continue;
        }
        visited[p] = true;
        if col_remaining[p] > 0 {
            col_remaining[p] -= 1;
            extra[g][p] = true;
            return true;
        }
        for g2 in 0..extra.len() {
            if g2 != g && extra[g2][p] && augment(g2, prefs, extra, col_remaining, visited) {
                extra[g2][p] = false;
                extra[g][p] = true;
                return true;
            }
        }
    }
    false
}
