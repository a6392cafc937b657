use serde::{Deserialize, Serialize};

use crate::corpus::Grade;
use crate::error::{Error, Result};
use crate::scalar::Field;

/// Quadratic weights `W[i][j] = (i - j)^2 / (n - 1)^2`.
pub fn weight_matrix<T: Field>(n: usize) -> Result<Vec<Vec<T>>> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("weight matrix needs at least 2 ratings, got {n}")));
    }
    let denom = T::from_count((n - 1) * (n - 1));
    Ok((0..n)
        .map(|i| (0..n).map(|j| T::from_count(i.abs_diff(j).pow(2)) / denom).collect())
        .collect())
}

/// The matrices behind a kappa value. Row index is the human grade, column
/// index the model grade, both offset by `grade_min`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QwkMatrices<T> {
    pub n: usize,
    pub weights: Vec<Vec<T>>,
    pub observed: Vec<Vec<T>>,
    /// Outer product of the two grade histograms, scaled to the item count.
    pub expected: Vec<Vec<T>>,
    pub kappa: T,
}

/// Quadratic weighted kappa between two raters.
pub fn qwk<T: Field>(human: &[Grade], model: &[Grade], grade_min: Grade, grade_max: Grade) -> Result<QwkMatrices<T>> {
    if human.len() != model.len() {
        return Err(Error::InvalidInput(format!(
            "rater lists differ in length ({} vs {})",
            human.len(),
            model.len()
        )));
    }
    if human.is_empty() {
        return Err(Error::InvalidInput("no ratings to compare".into()));
    }
    if grade_max <= grade_min {
        return Err(Error::InvalidInput(format!("empty grade range {grade_min}..={grade_max}")));
    }
    let n = (grade_max - grade_min + 1) as usize;
    let index = |g: Grade| -> Result<usize> {
        if (grade_min..=grade_max).contains(&g) {
            Ok((g - grade_min) as usize)
        } else {
            Err(Error::InvalidInput(format!("grade {g} outside {grade_min}..={grade_max}")))
        }
    };
    let mut counts = vec![vec![0usize; n]; n];
    let (mut hist_h, mut hist_m) = (vec![0usize; n], vec![0usize; n]);
    for (&h, &m) in human.iter().zip(model) {
        let (i, j) = (index(h)?, index(m)?);
        counts[i][j] += 1;
        hist_h[i] += 1;
        hist_m[j] += 1;
    }
    let total = T::from_count(human.len());
    let weights = weight_matrix::<T>(n)?;
    let observed: Vec<Vec<T>> = counts.iter().map(|r| r.iter().map(|&c| T::from_count(c)).collect()).collect();
    let expected: Vec<Vec<T>> = hist_h
        .iter()
        .map(|&a| hist_m.iter().map(|&b| T::from_count(a * b) / total).collect())
        .collect();
    let weighted = |m: &[Vec<T>]| {
        let mut s = T::zero();
        for i in 0..n {
            for j in 0..n {
                s = s + weights[i][j] * m[i][j];
            }
        }
        s
    };
    let (wo, we) = (weighted(&observed), weighted(&expected));
    if we == T::zero() {
        return Err(Error::DegenerateRatings);
    }
    Ok(QwkMatrices {
        n,
        kappa: T::one() - wo / we,
        weights,
        observed,
        expected,
    })
}

/// Kappa alone, in f64.
pub fn quadratic_weighted_kappa(human: &[Grade], model: &[Grade], grade_min: Grade, grade_max: Grade) -> Result<f64> {
    Ok(qwk::<f64>(human, model, grade_min, grade_max)?.kappa)
}
