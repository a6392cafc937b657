use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{to_grade, train_forest_excluding, Forest};
use crate::corpus::Grade;
use crate::error::{Error, Result};
use crate::eval::quadratic_weighted_kappa;
use crate::features::{FeatureGroup, FeatureSchema};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImportanceMode {
    /// Shuffle the group's columns across validation rows.
    Permutation,
    /// Retrain with the same hyperparameters and random draws, never
    /// splitting on the group's columns.
    RefitAblation,
}

/// Training rows (needed for refitting) and validation rows with human
/// grades.
#[derive(Debug, Clone, Copy)]
pub struct ImportanceData<'a, T> {
    pub x_train: &'a [Vec<T>],
    pub y_train: &'a [T],
    pub x_val: &'a [Vec<T>],
    pub y_val: &'a [Grade],
    pub grade_min: Grade,
    pub grade_max: Grade,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupImportance {
    pub group: FeatureGroup,
    /// Validation QWK of the full forest minus that of the altered one.
    pub qwk_drop: f64,
}

fn validation_qwk<T: Real>(forest: &Forest<T>, x: &[Vec<T>], data: &ImportanceData<'_, T>) -> Result<f64> {
    let predicted = x
        .iter()
        .map(|r| Ok(to_grade(forest.predict(r)?, data.grade_min, data.grade_max)))
        .collect::<Result<Vec<_>>>()?;
    quadratic_weighted_kappa(data.y_val, &predicted, data.grade_min, data.grade_max)
}

/// QWK drop per schema group, largest first (ties in canonical group
/// order).
pub fn group_importance<T: Real>(
    forest: &Forest<T>,
    data: &ImportanceData<'_, T>,
    schema: &FeatureSchema,
    mode: ImportanceMode,
) -> Result<Vec<GroupImportance>> {
    if schema.len() != forest.n_features {
        return Err(Error::SchemaMismatch(format!(
            "schema has {} features, forest expects {}",
            schema.len(),
            forest.n_features
        )));
    }
    let base = validation_qwk(forest, data.x_val, data)?;
    let mut out = Vec::new();
    for group in schema.present_groups() {
        let cols = schema.indices_of(group);
        let altered = match mode {
            ImportanceMode::Permutation => {
                let mut order: Vec<usize> = (0..data.x_val.len()).collect();
                let mut rng = ChaCha8Rng::seed_from_u64(forest.hyperparams.master_seed ^ group as u64);
                order.shuffle(&mut rng);
                let x: Vec<Vec<T>> = data
                    .x_val
                    .iter()
                    .zip(&order)
                    .map(|(row, &src)| {
                        let mut r = row.clone();
                        for &c in &cols {
                            r[c] = data.x_val[src][c];
                        }
                        r
                    })
                    .collect();
                validation_qwk(forest, &x, data)?
            }
            ImportanceMode::RefitAblation => {
                if cols.len() == schema.len() {
                    return Err(Error::Config(format!("removing {group} would leave no features")));
                }
                let refit = train_forest_excluding(data.x_train, data.y_train, &forest.hyperparams, &cols)?;
                validation_qwk(&refit, data.x_val, data)?
            }
        };
        out.push(GroupImportance {
            group,
            qwk_drop: base - altered,
        });
    }
    out.sort_by(|a, b| b.qwk_drop.total_cmp(&a.qwk_drop).then(a.group.cmp(&b.group)));
    Ok(out)
}
