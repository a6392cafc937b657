use serde::{Deserialize, Serialize};

use super::Forest;
use crate::error::{Error, Result};
use crate::features::{FeatureGroup, FeatureSchema};
use crate::scalar::Real;

/// A prediction split into the forest's mean root value and one additive
/// term per feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Contribution<T> {
    pub bias: T,
    pub per_feature: Vec<T>,
    /// Sums of `per_feature` over each group present in the schema, in
    /// canonical group order.
    pub per_group: Vec<(FeatureGroup, T)>,
}

impl<T: Real> Contribution<T> {
    /// `bias + sum(per_feature)`, which equals the forest prediction up to
    /// rounding.
    pub fn total(&self) -> T {
        self.per_feature.iter().fold(self.bias, |s, &c| s + c)
    }

    pub fn group(&self, g: FeatureGroup) -> Option<T> {
        self.per_group.iter().find(|(h, _)| *h == g).map(|(_, v)| *v)
    }
}

/// Credits each split on the path of `x` with the change in node mean it
/// causes, averaged over trees.
pub fn decompose<T: Real>(forest: &Forest<T>, x: &[T], schema: &FeatureSchema) -> Result<Contribution<T>> {
    forest.check(x)?;
    if schema.len() != forest.n_features {
        return Err(Error::SchemaMismatch(format!(
            "schema has {} features, forest expects {}",
            schema.len(),
            forest.n_features
        )));
    }
    let mut bias = T::zero();
    let mut per_feature = vec![T::zero(); forest.n_features];
    for tree in &forest.trees {
        let path = tree.path(x);
        bias = bias + tree.value[0];
        for w in path.windows(2) {
            let f = tree.feature[w[0]] as usize;
            per_feature[f] = per_feature[f] + (tree.value[w[1]] - tree.value[w[0]]);
        }
    }
    let n = T::from_count(forest.trees.len());
    bias = bias / n;
    for c in &mut per_feature {
        *c = *c / n;
    }
    let per_group = schema
        .present_groups()
        .into_iter()
        .map(|g| (g, schema.indices_of(g).iter().fold(T::zero(), |s, &i| s + per_feature[i])))
        .collect();
    Ok(Contribution {
        bias,
        per_feature,
        per_group,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::{train_forest, Hyperparams};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn schema(d: usize) -> FeatureSchema {
        FeatureSchema {
            names: (0..d).map(|i| format!("f{i}")).collect(),
            groups: (0..d).map(|i| FeatureGroup::ALL[i % 9]).collect(),
            means: vec![0.0; d],
            stds: vec![1.0; d],
            normalized: vec![true; d],
        }
    }

    fn data(seed: u64) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..60).map(|_| (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let y = x.iter().map(|r| r[0] + 2.0 * r[2] - r[4] * r[1]).collect();
        (x, y)
    }

    #[test]
    fn depth_zero_is_all_bias() {
        let (x, y) = data(1);
        let f = train_forest(&x, &y, &Hyperparams { n_trees: 3, max_depth: Some(0), ..Default::default() }).unwrap();
        let c = decompose(&f, &x[0], &schema(5)).unwrap();
        assert_eq!(c.bias, f.predict(&x[0]).unwrap());
        assert!(c.per_feature.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_split_credits_only_its_feature() {
        let x = vec![vec![0.0, 7.0], vec![0.0, 7.0], vec![1.0, 7.0], vec![1.0, 7.0]];
        let y = vec![0.0, 0.0, 2.0, 2.0];
        let hp = Hyperparams { n_trees: 1, max_depth: Some(1), min_samples_leaf: 1, ..Default::default() };
        let f = train_forest(&x, &y, &hp).unwrap();
        let c = decompose(&f, &[1.0, 7.0], &schema(2)).unwrap();
        assert_eq!(c.per_feature[1], 0.0);
        if f.trees[0].len() > 1 {
            assert!(c.per_feature[0] != 0.0);
        }
    }

    #[test]
    fn groups_sum_members() {
        let (x, y) = data(2);
        let f = train_forest(&x, &y, &Hyperparams { n_trees: 10, ..Default::default() }).unwrap();
        let s = schema(5);
        let c = decompose(&f, &x[3], &s).unwrap();
        for (g, v) in &c.per_group {
            let sum: f64 = s.indices_of(*g).iter().map(|&i| c.per_feature[i]).sum();
            assert_eq!(*v, sum);
        }
        assert!(decompose(&f, &x[3], &schema(4)).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn identity_holds(seed in any::<u64>(), probe in proptest::collection::vec(-2.0..2.0f64, 5)) {
            let (x, y) = data(seed);
            let f = train_forest(&x, &y, &Hyperparams { n_trees: 15, master_seed: seed, ..Default::default() }).unwrap();
            let c = decompose(&f, &probe, &schema(5)).unwrap();
            let p = f.predict(&probe).unwrap();
            prop_assert!((c.total() - p).abs() <= 1e-9 * p.abs().max(1.0));
        }
    }
}
