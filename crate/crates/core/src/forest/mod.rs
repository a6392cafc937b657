//! Random-forest regression with path attribution and group importance.

mod attribution;
mod importance;
mod tree;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Grade;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub use attribution::{decompose, Contribution};
pub use importance::{group_importance, GroupImportance, ImportanceData, ImportanceMode};
pub use tree::Tree;


#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    pub n_trees: usize,
    /// `None` grows until the leaf-size or purity limits stop it.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Candidate features per split; `None` means the ceiling of the square
    /// root of the feature count.
    pub features_per_split: Option<usize>,
    pub master_seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            n_trees: 500,
            max_depth: None,
            min_samples_leaf: 2,
            features_per_split: None,
            master_seed: 0,
        }
    }
}

impl Hyperparams {
    pub fn resolved_features_per_split(&self, n_features: usize) -> usize {
        self.features_per_split
            .unwrap_or_else(|| (n_features as f64).sqrt().ceil() as usize)
            .clamp(1, n_features.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Forest<T> {
    pub hyperparams: Hyperparams,
    pub n_features: usize,
    /// Fingerprint of the feature schema the forest was trained against.
    pub schema_fingerprint: Option<String>,
    pub trees: Vec<Tree<T>>,
}

fn check_inputs<T: Real>(x: &[Vec<T>], y: &[T]) -> Result<usize> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!("{} feature rows but {} targets", x.len(), y.len())));
    }
    if y.len() < 2 {
        return Err(Error::InvalidInput("need at least two training rows".into()));
    }
    let d = x[0].len();
    if d == 0 {
        return Err(Error::InvalidInput("feature rows are empty".into()));
    }
    for (i, row) in x.iter().enumerate() {
        if row.len() != d {
            return Err(Error::InvalidInput(format!("row {i} has {} features, expected {d}", row.len())));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("row {i} contains a non-finite value")));
        }
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("targets contain a non-finite value".into()));
    }
    Ok(d)
}

/// Grows `n_trees` trees in parallel. Tree `i` draws its bootstrap sample
/// and split candidates from a generator seeded with `master_seed + i`, so
/// the result does not depend on the thread count.
pub fn train_forest<T: Real>(x: &[Vec<T>], y: &[T], hp: &Hyperparams) -> Result<Forest<T>> {
    train_forest_excluding(x, y, hp, &[])
}

/// Like [`train_forest`], but the listed columns are never split on. The
/// random draws are those of the full forest, so excluding columns that
/// were never used reproduces it exactly.
pub fn train_forest_excluding<T: Real>(x: &[Vec<T>], y: &[T], hp: &Hyperparams, excluded: &[usize]) -> Result<Forest<T>> {
    let d = check_inputs(x, y)?;
    let mut mask = vec![false; d];
    for &c in excluded {
        *mask.get_mut(c).ok_or_else(|| Error::InvalidInput(format!("excluded column {c} out of range")))? = true;
    }
    if mask.iter().all(|&m| m) {
        return Err(Error::Config("every feature column is excluded".into()));
    }
    if hp.n_trees == 0 {
        return Err(Error::Config("n_trees must be positive".into()));
    }
    if hp.min_samples_leaf == 0 {
        return Err(Error::Config("min_samples_leaf must be positive".into()));
    }
    let k = hp.resolved_features_per_split(d);
    let trees = (0..hp.n_trees)
        .into_par_iter()
        .map(|i| tree::grow(x, y, hp, k, &mask, hp.master_seed.wrapping_add(i as u64)))
        .collect();
    Ok(Forest {
        hyperparams: hp.clone(),
        n_features: d,
        schema_fingerprint: None,
        trees,
    })
}

impl<T: Real> Forest<T> {
    pub fn with_schema_fingerprint(mut self, fingerprint: String) -> Self {
        self.schema_fingerprint = Some(fingerprint);
        self
    }

    fn check(&self, x: &[T]) -> Result<()> {
        if x.len() != self.n_features {
            return Err(Error::SchemaMismatch(format!(
                "input has {} features, forest expects {}",
                x.len(),
                self.n_features
            )));
        }
        Ok(())
    }

    /// Mean of the trees' leaf values.
    pub fn predict(&self, x: &[T]) -> Result<T> {
        self.check(x)?;
        let sum = self.trees.iter().fold(T::zero(), |s, t| s + t.predict(x));
        Ok(sum / T::from_count(self.trees.len()))
    }

    pub fn predict_grade(&self, x: &[T], grade_min: Grade, grade_max: Grade) -> Result<Grade> {
        Ok(to_grade(self.predict(x)?, grade_min, grade_max))
    }
}

pub fn predict<T: Real>(forest: &Forest<T>, x: &[T]) -> Result<T> {
    forest.predict(x)
}

pub fn predict_grade<T: Real>(forest: &Forest<T>, x: &[T], grade_min: Grade, grade_max: Grade) -> Result<Grade> {
    forest.predict_grade(x, grade_min, grade_max)
}

/// Rounds half away from zero, then clamps into the grade range.
pub fn to_grade<T: Real>(raw: T, grade_min: Grade, grade_max: Grade) -> Grade {
    let r = raw.round().to_f64().unwrap_or(0.0);
    (r.clamp(f64::from(grade_min), f64::from(grade_max))) as Grade
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    pub(crate) fn synthetic(n: usize, d: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let y = x.iter().map(|r| (r[0] * 2.0 + r[1] * r[1]).round()).collect();
        (x, y)
    }

    #[test]
    fn grade_rounding() {
        assert_eq!(to_grade(2.5001, 0, 3), 3);
        assert_eq!(to_grade(2.5, 0, 3), 3);
        assert_eq!(to_grade(1.5, 0, 3), 2);
        assert_eq!(to_grade(-0.4, 0, 3), 0);
        assert_eq!(to_grade(1.49, 0, 3), 1);
        assert_eq!(to_grade(7.0f32, 0, 3), 3);
    }

    #[test]
    fn constant_target_predicts_constant() {
        let (x, _) = synthetic(30, 4, 1);
        let y = vec![1.5; 30];
        let f = train_forest(&x, &y, &Hyperparams { n_trees: 10, ..Default::default() }).unwrap();
        for row in &x {
            assert_eq!(f.predict(row).unwrap(), 1.5);
        }
    }

    #[test]
    fn depth_zero_single_tree_predicts_bootstrap_mean() {
        let x = vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]];
        let y = vec![1.0, 1.0, 1.0, 1.0];
        let hp = Hyperparams { n_trees: 1, max_depth: Some(0), ..Default::default() };
        let f = train_forest(&x, &y, &hp).unwrap();
        assert_eq!(f.trees[0].len(), 1);
        assert_eq!(f.predict(&[10.0]).unwrap(), 1.0);
    }

    #[test]
    fn perfectly_separating_feature() {
        let x = vec![vec![0.0, 5.0], vec![0.0, 3.0], vec![1.0, 5.0], vec![1.0, 3.0]];
        let y = vec![0.0, 0.0, 3.0, 3.0];
        let hp = Hyperparams {
            n_trees: 1,
            max_depth: Some(1),
            min_samples_leaf: 1,
            features_per_split: Some(2),
            master_seed: 0,
        };
        // Bootstrap sampling could drop one class, so check every seed that
        // keeps both.
        for seed in 0..20 {
            let f = train_forest(&x, &y, &Hyperparams { master_seed: seed, ..hp.clone() }).unwrap();
            if f.trees[0].len() == 3 {
                for (row, &t) in x.iter().zip(&y) {
                    assert_eq!(f.predict(row).unwrap(), t);
                }
            }
        }
    }

    #[test]
    fn deterministic_and_thread_independent() {
        let (x, y) = synthetic(80, 6, 2);
        let hp = Hyperparams { n_trees: 20, master_seed: 9, ..Default::default() };
        let a = train_forest(&x, &y, &hp).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| train_forest(&x, &y, &hp).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn single_tree_forest_equals_tree() {
        let (x, y) = synthetic(50, 3, 3);
        let f = train_forest(&x, &y, &Hyperparams { n_trees: 1, ..Default::default() }).unwrap();
        for row in &x {
            assert_eq!(f.predict(row).unwrap(), f.trees[0].predict(row));
        }
    }

    #[test]
    fn rejects_bad_input() {
        let hp = Hyperparams::default();
        assert!(train_forest::<f64>(&[vec![1.0]], &[1.0], &hp).is_err());
        assert!(train_forest(&[vec![1.0], vec![f64::NAN]], &[1.0, 2.0], &hp).is_err());
        assert!(train_forest(&[vec![1.0], vec![2.0, 3.0]], &[1.0, 2.0], &hp).is_err());
        let f = train_forest(&[vec![1.0], vec![2.0]], &[1.0, 2.0], &Hyperparams { n_trees: 2, ..hp }).unwrap();
        assert!(matches!(f.predict(&[1.0, 2.0]), Err(Error::SchemaMismatch(_))));
    }

    #[test]
    fn works_in_single_precision() {
        let (x, y) = synthetic(60, 4, 4);
        let x32: Vec<Vec<f32>> = x.iter().map(|r| r.iter().map(|&v| v as f32).collect()).collect();
        let y32: Vec<f32> = y.iter().map(|&v| v as f32).collect();
        let f = train_forest(&x32, &y32, &Hyperparams { n_trees: 10, ..Default::default() }).unwrap();
        let (lo, hi) = (y32.iter().copied().fold(f32::MAX, f32::min), y32.iter().copied().fold(f32::MIN, f32::max));
        for row in &x32 {
            let p = f.predict(row).unwrap();
            assert!(p >= lo && p <= hi);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn predictions_within_target_range(seed in any::<u64>(), probe in proptest::collection::vec(-3.0..3.0f64, 3)) {
            let (x, y) = synthetic(40, 3, seed);
            let f = train_forest(&x, &y, &Hyperparams { n_trees: 8, master_seed: seed, ..Default::default() }).unwrap();
            let lo = y.iter().copied().fold(f64::MAX, f64::min);
            let hi = y.iter().copied().fold(f64::MIN, f64::max);
            let p = f.predict(&probe).unwrap();
            prop_assert!(p >= lo - 1e-12 && p <= hi + 1e-12);
        }
    }
}
