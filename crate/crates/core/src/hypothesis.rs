//! Decision stumps, response matrices and linear ensembles of stumps.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::dataset::FeatureMatrix;
use crate::error::{Error, Result};

/// One-feature threshold classifier with output `polarity * sign(x[feature] - threshold)`,
/// where `sign(0) = +1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    pub polarity: i8,
}

/// Bitwise identity of a stump, usable as a hash key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StumpKey {
    pub feature: usize,
    pub threshold_bits: u64,
    pub polarity: i8,
}

impl Stump {
    pub fn new(feature: usize, threshold: f64, polarity: i8) -> Result<Self> {
        if polarity != 1 && polarity != -1 {
            return Err(Error::InvalidArgument(format!("stump polarity {polarity}")));
        }
        if threshold.is_nan() {
            return Err(Error::InvalidArgument("stump threshold is NaN".into()));
        }
        Ok(Stump {
            feature,
            threshold,
            polarity,
        })
    }

    #[inline]
    pub fn output_on(&self, value: f64) -> i8 {
        if value >= self.threshold {
            self.polarity
        } else {
            -self.polarity
        }
    }

    #[inline]
    pub fn output(&self, row: &[f64]) -> i8 {
        self.output_on(row[self.feature])
    }

    pub fn key(&self) -> StumpKey {
        StumpKey {
            feature: self.feature,
            threshold_bits: self.threshold.to_bits(),
            polarity: self.polarity,
        }
    }

    /// Response column of this stump over every row of `features`.
    pub fn responses(&self, features: &FeatureMatrix) -> Result<Vec<i8>> {
        if self.feature >= features.dims() {
            return Err(Error::InvalidArgument(format!(
                "stump feature index {} out of range for {} dimensions",
                self.feature,
                features.dims()
            )));
        }
        Ok((0..features.rows())
            .map(|i| self.output_on(features.get(i, self.feature)))
            .collect())
    }
}

/// Read access to an M x N matrix of weak-hypothesis outputs in {-1, +1}.
pub trait Responses {
    fn n_rows(&self) -> usize;
    fn n_cols(&self) -> usize;
    fn column(&self, j: usize) -> Cow<'_, [i8]>;
}

/// Materialized response matrix, stored column by column.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ResponseMatrix {
    rows: usize,
    columns: Vec<Vec<i8>>,
}

impl ResponseMatrix {
    pub fn new(rows: usize) -> Self {
        ResponseMatrix {
            rows,
            columns: Vec::new(),
        }
    }

    pub fn from_columns(rows: usize, columns: Vec<Vec<i8>>) -> Result<Self> {
        let mut m = ResponseMatrix::new(rows);
        for c in columns {
            m.push_column(c)?;
        }
        Ok(m)
    }

    pub fn from_stumps(stumps: &[Stump], features: &FeatureMatrix) -> Result<Self> {
        let columns = stumps
            .iter()
            .map(|s| s.responses(features))
            .collect::<Result<Vec<_>>>()?;
        Ok(ResponseMatrix {
            rows: features.rows(),
            columns,
        })
    }

    pub fn push_column(&mut self, column: Vec<i8>) -> Result<()> {
        if column.len() != self.rows {
            return Err(Error::DimensionMismatch {
                what: "response column",
                expected: self.rows,
                got: column.len(),
            });
        }
        if column.iter().any(|&v| v != 1 && v != -1) {
            return Err(Error::InvalidArgument(
                "response entries must be -1 or +1".into(),
            ));
        }
        self.columns.push(column);
        Ok(())
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.columns[j][i]
    }
}

impl Responses for ResponseMatrix {
    fn n_rows(&self) -> usize {
        self.rows
    }
    fn n_cols(&self) -> usize {
        self.columns.len()
    }
    fn column(&self, j: usize) -> Cow<'_, [i8]> {
        Cow::Borrowed(&self.columns[j])
    }
}

/// Response matrix whose columns are evaluated from stumps on demand.
#[derive(Debug, Clone, Copy)]
pub struct LazyResponses<'a> {
    stumps: &'a [Stump],
    features: &'a FeatureMatrix,
}

impl<'a> LazyResponses<'a> {
    pub fn new(stumps: &'a [Stump], features: &'a FeatureMatrix) -> Result<Self> {
        if let Some(s) = stumps.iter().find(|s| s.feature >= features.dims()) {
            return Err(Error::InvalidArgument(format!(
                "stump feature index {} out of range",
                s.feature
            )));
        }
        Ok(LazyResponses { stumps, features })
    }
}

impl Responses for LazyResponses<'_> {
    fn n_rows(&self) -> usize {
        self.features.rows()
    }
    fn n_cols(&self) -> usize {
        self.stumps.len()
    }
    fn column(&self, j: usize) -> Cow<'_, [i8]> {
        let s = self.stumps[j];
        Cow::Owned(
            (0..self.features.rows())
                .map(|i| s.output_on(self.features.get(i, s.feature)))
                .collect(),
        )
    }
}

/// Margins `z_i = y_i * sum_j H[i][j] * w_j`.
pub fn margins<R: Responses + ?Sized>(w: &[f64], h: &R, labels: &[i8]) -> Result<Vec<f64>> {
    if w.len() != h.n_cols() {
        return Err(Error::DimensionMismatch {
            what: "coefficient vector",
            expected: h.n_cols(),
            got: w.len(),
        });
    }
    if labels.len() != h.n_rows() {
        return Err(Error::DimensionMismatch {
            what: "labels",
            expected: h.n_rows(),
            got: labels.len(),
        });
    }
    let mut acc = vec![0.0; h.n_rows()];
    for (j, &wj) in w.iter().enumerate() {
        if wj == 0.0 {
            continue;
        }
        let col = h.column(j);
        for (a, &hij) in acc.iter_mut().zip(col.iter()) {
            *a += f64::from(hij) * wj;
        }
    }
    for (a, &y) in acc.iter_mut().zip(labels) {
        *a *= f64::from(y);
    }
    Ok(acc)
}

/// Linear combination of stumps with non-negative coefficients and an offset:
/// `score(x) = sum_j w_j h_j(x) - b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    stumps: Vec<Stump>,
    w: Vec<f64>,
    b: f64,
}

impl Default for Ensemble {
    fn default() -> Self {
        Ensemble::empty()
    }
}

impl Ensemble {
    pub fn new(stumps: Vec<Stump>, w: Vec<f64>, b: f64) -> Result<Self> {
        if stumps.len() != w.len() {
            return Err(Error::DimensionMismatch {
                what: "ensemble coefficients",
                expected: stumps.len(),
                got: w.len(),
            });
        }
        if let Some(bad) = w.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "ensemble coefficient {bad} is not a finite non-negative number"
            )));
        }
        if b.is_nan() {
            return Err(Error::InvalidArgument("offset is NaN".into()));
        }
        Ok(Ensemble { stumps, w, b })
    }

    pub fn empty() -> Self {
        Ensemble {
            stumps: Vec::new(),
            w: Vec::new(),
            b: 0.0,
        }
    }

    pub fn stumps(&self) -> &[Stump] {
        &self.stumps
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn offset(&self) -> f64 {
        self.b
    }

    pub fn set_offset(&mut self, b: f64) {
        assert!(!b.is_nan(), "offset is NaN");
        self.b = b;
    }

    pub fn with_offset(mut self, b: f64) -> Self {
        self.set_offset(b);
        self
    }

    pub fn len(&self) -> usize {
        self.stumps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stumps.is_empty()
    }

    /// Number of coefficients strictly above `tol`.
    pub fn effective_count(&self, tol: f64) -> usize {
        self.w.iter().filter(|&&v| v > tol).count()
    }

    /// `sum_j w_j h_j(x)`, without the offset.
    pub fn raw_score(&self, row: &[f64]) -> f64 {
        self.stumps
            .iter()
            .zip(&self.w)
            .map(|(s, &w)| w * f64::from(s.output(row)))
            .sum()
    }

    pub fn score(&self, row: &[f64]) -> f64 {
        self.raw_score(row) - self.b
    }

    pub fn predict(&self, row: &[f64]) -> i8 {
        if self.score(row) >= 0.0 {
            1
        } else {
            -1
        }
    }

    pub fn raw_scores(&self, features: &FeatureMatrix) -> Vec<f64> {
        (0..features.rows())
            .map(|i| self.raw_score(features.row(i)))
            .collect()
    }

    /// The first `n` stumps with coefficients `w` (same offset).
    pub fn prefix_with(&self, n: usize, w: Vec<f64>) -> Result<Ensemble> {
        if n > self.stumps.len() {
            return Err(Error::InvalidArgument(format!(
                "prefix of length {n} from ensemble of {}",
                self.stumps.len()
            )));
        }
        Ensemble::new(self.stumps[..n].to_vec(), w, self.b)
    }
}
