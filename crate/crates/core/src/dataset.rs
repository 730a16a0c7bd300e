//! Feature matrices and labelled binary datasets.

use crate::error::{Error, Result};

/// Dense row-major matrix of real-valued features (one row per example).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    dims: usize,
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(rows: usize, dims: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * dims {
            return Err(Error::DimensionMismatch {
                what: "feature values",
                expected: rows * dims,
                got: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite feature value at row {}, column {}",
                pos / dims.max(1),
                pos % dims.max(1)
            )));
        }
        Ok(FeatureMatrix { rows, dims, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dims = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * dims);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dims {
                return Err(Error::InvalidArgument(format!(
                    "row {i} has {} features, expected {dims}",
                    r.len()
                )));
            }
            values.extend_from_slice(r);
        }
        Self::new(rows.len(), dims, values)
    }

    pub fn empty(dims: usize) -> Self {
        FeatureMatrix {
            rows: 0,
            dims,
            values: Vec::new(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    #[inline]
    pub fn get(&self, row: usize, dim: usize) -> f64 {
        self.values[row * self.dims + dim]
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.dims..(row + 1) * self.dims]
    }

    pub fn push_row(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.dims {
            return Err(Error::DimensionMismatch {
                what: "pushed row",
                expected: self.dims,
                got: row.len(),
            });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite feature value".into()));
        }
        self.values.extend_from_slice(row);
        self.rows += 1;
        Ok(())
    }

    /// Rows picked by index, in the given order.
    pub fn select(&self, indices: &[usize]) -> FeatureMatrix {
        let mut values = Vec::with_capacity(indices.len() * self.dims);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            rows: indices.len(),
            dims: self.dims,
            values,
        }
    }
}

/// Binary dataset with labels in {-1, +1}; both classes must be present.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: FeatureMatrix,
    labels: Vec<i8>,
    n_pos: usize,
    n_neg: usize,
}

impl LabeledDataset {
    pub fn new(features: FeatureMatrix, labels: Vec<i8>) -> Result<Self> {
        if labels.len() != features.rows() {
            return Err(Error::DimensionMismatch {
                what: "labels",
                expected: features.rows(),
                got: labels.len(),
            });
        }
        let mut n_pos = 0;
        let mut n_neg = 0;
        for (i, &y) in labels.iter().enumerate() {
            match y {
                1 => n_pos += 1,
                -1 => n_neg += 1,
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "label {other} at example {i} is not -1 or +1"
                    )))
                }
            }
        }
        if n_pos == 0 || n_neg == 0 {
            return Err(Error::InvalidArgument(format!(
                "dataset needs both classes (positives: {n_pos}, negatives: {n_neg})"
            )));
        }
        Ok(LabeledDataset {
            features,
            labels,
            n_pos,
            n_neg,
        })
    }

    /// Stacks a positive and a negative feature matrix, positives first.
    pub fn from_classes(pos: &FeatureMatrix, neg: &FeatureMatrix) -> Result<Self> {
        if pos.dims() != neg.dims() {
            return Err(Error::DimensionMismatch {
                what: "negative feature dimension",
                expected: pos.dims(),
                got: neg.dims(),
            });
        }
        let mut values = Vec::with_capacity((pos.rows() + neg.rows()) * pos.dims());
        values.extend_from_slice(&pos.values);
        values.extend_from_slice(&neg.values);
        let features = FeatureMatrix::new(pos.rows() + neg.rows(), pos.dims(), values)?;
        let mut labels = vec![1i8; pos.rows()];
        labels.resize(pos.rows() + neg.rows(), -1);
        Self::new(features, labels)
    }

    pub fn features(&self) -> &FeatureMatrix {
        &self.features
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    #[inline]
    pub fn label(&self, i: usize) -> f64 {
        f64::from(self.labels[i])
    }

    /// Number of examples M.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dims(&self) -> usize {
        self.features.dims()
    }

    /// Number of positives M1.
    pub fn n_pos(&self) -> usize {
        self.n_pos
    }

    /// Number of negatives M2.
    pub fn n_neg(&self) -> usize {
        self.n_neg
    }

    /// Feature rows of one class, in dataset order.
    pub fn class_rows(&self, label: i8) -> FeatureMatrix {
        let idx: Vec<usize> = (0..self.len())
            .filter(|&i| self.labels[i] == label)
            .collect();
        self.features.select(&idx)
    }

    /// Splits each class at `fraction` of its size: the leading part of each
    /// class goes to the first dataset, the remainder to the second.
    pub fn split_per_class(&self, fraction: f64) -> Result<(LabeledDataset, LabeledDataset)> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(Error::InvalidArgument(format!("split fraction {fraction}")));
        }
        let mut head = Vec::new();
        let mut tail = Vec::new();
        for class in [1i8, -1] {
            let idx: Vec<usize> = (0..self.len())
                .filter(|&i| self.labels[i] == class)
                .collect();
            let cut = (idx.len() as f64 * fraction).round() as usize;
            head.extend_from_slice(&idx[..cut]);
            tail.extend_from_slice(&idx[cut..]);
        }
        let pick = |ix: &[usize]| {
            LabeledDataset::new(
                self.features.select(ix),
                ix.iter().map(|&i| self.labels[i]).collect(),
            )
        };
        Ok((pick(&head)?, pick(&tail)?))
    }

    /// Examples picked by index, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<LabeledDataset> {
        LabeledDataset::new(
            self.features.select(indices),
            indices.iter().map(|&i| self.labels[i]).collect(),
        )
    }
}
