use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Hyperparams;
use crate::scalar::Real;

const LEAF: i32 = -1;

/// A regression tree as parallel node arrays. Node 0 is the root; a node
/// with `feature == -1` is a leaf. Samples with `x[feature] <= threshold`
/// go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Tree<T> {
    pub feature: Vec<i32>,
    pub threshold: Vec<T>,
    /// Mean training target of the bootstrap samples reaching the node.
    pub value: Vec<T>,
    pub left: Vec<u32>,
    pub right: Vec<u32>,
}

impl<T: Real> Tree<T> {
    pub fn len(&self) -> usize {
        self.value.len()
    }

    pub fn is_empty(&self) -> bool {
        self.value.is_empty()
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        self.feature[node] == LEAF
    }

    /// Node indices from the root to the leaf reached by `x`.
    pub fn path(&self, x: &[T]) -> Vec<usize> {
        let mut node = 0;
        let mut out = vec![0];
        while !self.is_leaf(node) {
            node = self.child(node, x);
            out.push(node);
        }
        out
    }

    fn child(&self, node: usize, x: &[T]) -> usize {
        if x[self.feature[node] as usize] <= self.threshold[node] {
            self.left[node] as usize
        } else {
            self.right[node] as usize
        }
    }

    pub fn predict(&self, x: &[T]) -> T {
        let mut node = 0;
        while !self.is_leaf(node) {
            node = self.child(node, x);
        }
        self.value[node]
    }

    fn push(&mut self, value: T) -> usize {
        self.feature.push(LEAF);
        self.threshold.push(T::zero());
        self.value.push(value);
        self.left.push(0);
        self.right.push(0);
        self.value.len() - 1
    }
}

struct Split<T> {
    gain: T,
    feature: usize,
    threshold: T,
}

impl<T: Real> Split<T> {
    /// Higher gain wins; equal gains go to the lower feature index, then the
    /// lower threshold.
    fn beats(&self, other: &Option<Split<T>>) -> bool {
        match other {
            None => true,
            Some(o) => {
                self.gain > o.gain
                    || (self.gain == o.gain
                        && (self.feature < o.feature || (self.feature == o.feature && self.threshold < o.threshold)))
            }
        }
    }
}

fn mean<T: Real>(y: &[T], idx: &[usize]) -> T {
    idx.iter().fold(T::zero(), |s, &i| s + y[i]) / T::from_count(idx.len())
}

/// Best variance-reducing threshold on one feature, if any split leaves at
/// least `min_leaf` samples on each side and improves by more than
/// `min_gain`.
fn best_on_feature<T: Real>(
    x: &[Vec<T>],
    y: &[T],
    idx: &[usize],
    f: usize,
    min_leaf: usize,
    min_gain: T,
) -> Option<Split<T>> {
    let mut order: Vec<usize> = idx.to_vec();
    order.sort_by(|&a, &b| x[a][f].partial_cmp(&x[b][f]).expect("finite").then(a.cmp(&b)));
    let n = order.len();
    let total = order.iter().fold(T::zero(), |s, &i| s + y[i]);
    let parent = total * total / T::from_count(n);
    let mut left = T::zero();
    let mut best: Option<Split<T>> = None;
    for pos in 0..n - 1 {
        left = left + y[order[pos]];
        let nl = pos + 1;
        let (a, b) = (x[order[pos]][f], x[order[pos + 1]][f]);
        if a == b || nl < min_leaf || n - nl < min_leaf {
            continue;
        }
        let right = total - left;
        let gain = left * left / T::from_count(nl) + right * right / T::from_count(n - nl) - parent;
        if gain <= min_gain {
            continue;
        }
        let mid = (a + b) / (T::one() + T::one());
        let threshold = if mid < b { mid } else { a };
        let cand = Split { gain, feature: f, threshold };
        if cand.beats(&best) {
            best = Some(cand);
        }
    }
    best
}

/// Grows one tree. Features with `excluded[f]` set are drawn like any
/// other but never split on, exactly as a constant feature would be.
pub(super) fn grow<T: Real>(x: &[Vec<T>], y: &[T], hp: &Hyperparams, k: usize, excluded: &[bool], seed: u64) -> Tree<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = y.len();
    let d = x[0].len();
    let bootstrap: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
    let mut tree = Tree {
        feature: Vec::new(),
        threshold: Vec::new(),
        value: Vec::new(),
        left: Vec::new(),
        right: Vec::new(),
    };
    let root = tree.push(mean(y, &bootstrap));
    let mut stack = vec![(root, bootstrap, 0usize)];
    while let Some((node, idx, depth)) = stack.pop() {
        if hp.max_depth.is_some_and(|m| depth >= m) || idx.len() < 2 * hp.min_samples_leaf {
            continue;
        }
        let first = y[idx[0]];
        if idx.iter().all(|&i| y[i] == first) {
            continue;
        }
        let scale = idx.iter().fold(T::zero(), |s, &i| s + y[i] * y[i]);
        let min_gain = T::epsilon() * T::from_count(64) * scale;
        // Examine k features in random order; if none of them splits, keep
        // drawing until one does or all have been tried.
        let mut best: Option<Split<T>> = None;
        for (tried, f) in sample(&mut rng, d, d).into_iter().enumerate() {
            if tried >= k && best.is_some() {
                break;
            }
            if excluded[f] {
                continue;
            }
            if let Some(s) = best_on_feature(x, y, &idx, f, hp.min_samples_leaf, min_gain) {
                if s.beats(&best) {
                    best = Some(s);
                }
            }
        }
        let Some(split) = best else { continue };
        let (li, ri): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| x[i][split.feature] <= split.threshold);
        let l = tree.push(mean(y, &li));
        let r = tree.push(mean(y, &ri));
        tree.feature[node] = split.feature as i32;
        tree.threshold[node] = split.threshold;
        tree.left[node] = l as u32;
        tree.right[node] = r as u32;
        stack.push((r, ri, depth + 1));
        stack.push((l, li, depth + 1));
    }
    tree
}
