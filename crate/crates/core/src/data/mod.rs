//! Dataset representation: dense or sparse feature matrices with optional
//! labels, feature names, and a missing-value mask.
//!
//! Sparse storage is an ingestion format, not a compute path: every numeric
//! operation densifies first, so dense and sparse storage of the same matrix
//! produce bit-identical results downstream.

mod load;

pub use load::{load_delimited, load_sparse_indexed, DelimitedOptions};

use ndarray::{Array1, Array2, CowArray, Ix2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::error::{Error, Result};

/// Feature matrix storage. Both variants describe an n-by-m real matrix.
#[derive(Debug, Clone)]
pub enum Features {
    Dense(Array2<f64>),
    /// Row-major list of (column, value) pairs with strictly increasing
    /// columns per row; unlisted entries are exact zeros.
    Sparse { rows: Vec<Vec<(usize, f64)>>, dim: usize },
}

/// Class labels. Binary problems are encoded as -1/+1, multiclass as
/// contiguous ids `0..classes`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Labels {
    Binary(Vec<i8>),
    Multiclass { ids: Vec<usize>, classes: usize },
}

impl Labels {
    pub fn len(&self) -> usize {
        match self {
            Labels::Binary(v) => v.len(),
            Labels::Multiclass { ids, .. } => ids.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of classes (2 for binary).
    pub fn num_classes(&self) -> usize {
        match self {
            Labels::Binary(_) => 2,
            Labels::Multiclass { classes, .. } => *classes,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Labels::Binary(v) => {
                if let Some(bad) = v.iter().find(|&&y| y != -1 && y != 1) {
                    return Err(Error::Data(format!(
                        "binary labels must be -1 or +1, found {bad}"
                    )));
                }
            }
            Labels::Multiclass { ids, classes } => {
                if let Some(bad) = ids.iter().find(|&&c| c >= *classes) {
                    return Err(Error::Data(format!(
                        "class id {bad} out of range 0..{classes}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn select(&self, idx: &[usize]) -> Labels {
        match self {
            Labels::Binary(v) => Labels::Binary(idx.iter().map(|&i| v[i]).collect()),
            Labels::Multiclass { ids, classes } => Labels::Multiclass {
                ids: idx.iter().map(|&i| ids[i]).collect(),
                classes: *classes,
            },
        }
    }
}

/// Per-feature non-zero frequencies (the dichotomized sample average).
#[derive(Debug, Clone)]
pub struct NonZeroFrequencies {
    /// `freq[d] = |{i : x_id != 0}| / n`, each in [0, 1].
    pub freq: Array1<f64>,
    /// Sample count the frequencies were computed from.
    pub n: usize,
}

/// An immutable sample matrix with optional labels, names, and missing mask.
#[derive(Debug, Clone)]
pub struct Dataset {
    features: Features,
    labels: Option<Labels>,
    feature_names: Option<Vec<String>>,
    missing_mask: Option<Array2<bool>>,
}

impl Dataset {
    pub fn from_dense(features: Array2<f64>, labels: Option<Labels>) -> Result<Self> {
        Self::new(Features::Dense(features), labels, None, None)
    }

    pub fn from_sparse(
        rows: Vec<Vec<(usize, f64)>>,
        dim: usize,
        labels: Option<Labels>,
    ) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            let mut last = None;
            for &(col, _) in row {
                if col >= dim {
                    return Err(Error::Data(format!(
                        "sparse row {i} has column {col} >= dimension {dim}"
                    )));
                }
                if let Some(prev) = last {
                    if col <= prev {
                        return Err(Error::Data(format!(
                            "sparse row {i} has non-increasing columns"
                        )));
                    }
                }
                last = Some(col);
            }
        }
        Self::new(Features::Sparse { rows, dim }, labels, None, None)
    }

    pub(crate) fn new(
        features: Features,
        labels: Option<Labels>,
        feature_names: Option<Vec<String>>,
        missing_mask: Option<Array2<bool>>,
    ) -> Result<Self> {
        let ds = Dataset { features, labels, feature_names, missing_mask };
        if let Some(labels) = &ds.labels {
            if labels.len() != ds.n() {
                return Err(Error::Dimension { expected: ds.n(), got: labels.len() });
            }
            labels.validate()?;
        }
        if let Some(names) = &ds.feature_names {
            if names.len() != ds.m() {
                return Err(Error::Dimension { expected: ds.m(), got: names.len() });
            }
        }
        if let Some(mask) = &ds.missing_mask {
            if mask.dim() != (ds.n(), ds.m()) {
                return Err(Error::Data("missing mask shape differs from features".into()));
            }
        }
        Ok(ds)
    }

    /// Number of samples.
    pub fn n(&self) -> usize {
        match &self.features {
            Features::Dense(a) => a.nrows(),
            Features::Sparse { rows, .. } => rows.len(),
        }
    }

    /// Number of features.
    pub fn m(&self) -> usize {
        match &self.features {
            Features::Dense(a) => a.ncols(),
            Features::Sparse { dim, .. } => *dim,
        }
    }

    pub fn labels(&self) -> Option<&Labels> {
        self.labels.as_ref()
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub fn missing_mask(&self) -> Option<&Array2<bool>> {
        self.missing_mask.as_ref()
    }

    pub fn with_labels(mut self, labels: Option<Labels>) -> Result<Self> {
        if let Some(l) = &labels {
            if l.len() != self.n() {
                return Err(Error::Dimension { expected: self.n(), got: l.len() });
            }
            l.validate()?;
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn with_missing_mask(mut self, mask: Option<Array2<bool>>) -> Result<Self> {
        if let Some(m) = &mask {
            if m.dim() != (self.n(), self.m()) {
                return Err(Error::Data("missing mask shape differs from features".into()));
            }
        }
        self.missing_mask = mask;
        Ok(self)
    }

    /// Dense view of the feature matrix; borrows when already dense.
    pub fn dense_features(&self) -> CowArray<'_, f64, Ix2> {
        match &self.features {
            Features::Dense(a) => CowArray::from(a.view()),
            Features::Sparse { rows, dim } => {
                let mut out = Array2::zeros((rows.len(), *dim));
                for (i, row) in rows.iter().enumerate() {
                    for &(col, val) in row {
                        out[(i, col)] = val;
                    }
                }
                CowArray::from(out)
            }
        }
    }

    /// Binary targets as a +/-1.0 vector.
    pub fn binary_targets(&self) -> Result<Array1<f64>> {
        match self.labels() {
            Some(Labels::Binary(v)) => Ok(v.iter().map(|&y| f64::from(y)).collect()),
            Some(Labels::Multiclass { .. }) => {
                Err(Error::Data("expected binary labels, found multiclass".into()))
            }
            None => Err(Error::Data("dataset has no labels".into())),
        }
    }

    /// Count of exactly non-zero entries per feature.
    pub fn nonzero_counts(&self) -> Vec<usize> {
        match &self.features {
            Features::Dense(a) => (0..a.ncols())
                .map(|d| a.column(d).iter().filter(|&&x| x != 0.0).count())
                .collect(),
            Features::Sparse { rows, dim } => {
                let mut counts = vec![0usize; *dim];
                for row in rows {
                    for &(col, val) in row {
                        if val != 0.0 {
                            counts[col] += 1;
                        }
                    }
                }
                counts
            }
        }
    }

    /// Per-feature frequency of non-zero values (dichotomized sample mean).
    pub fn nonzero_frequencies(&self) -> Result<NonZeroFrequencies> {
        let n = self.n();
        if n == 0 {
            return Err(Error::Data("cannot compute frequencies of an empty dataset".into()));
        }
        let freq = self
            .nonzero_counts()
            .into_iter()
            .map(|c| c as f64 / n as f64)
            .collect();
        Ok(NonZeroFrequencies { freq, n })
    }

    /// Dataset restricted to the given rows, preserving storage kind.
    pub fn select_rows(&self, idx: &[usize]) -> Result<Self> {
        let n = self.n();
        if let Some(&bad) = idx.iter().find(|&&i| i >= n) {
            return Err(Error::Data(format!("row index {bad} out of range 0..{n}")));
        }
        let features = match &self.features {
            Features::Dense(a) => {
                let mut out = Array2::zeros((idx.len(), a.ncols()));
                for (r, &i) in idx.iter().enumerate() {
                    out.row_mut(r).assign(&a.row(i));
                }
                Features::Dense(out)
            }
            Features::Sparse { rows, dim } => Features::Sparse {
                rows: idx.iter().map(|&i| rows[i].clone()).collect(),
                dim: *dim,
            },
        };
        let labels = self.labels.as_ref().map(|l| l.select(idx));
        let mask = self.missing_mask.as_ref().map(|m| {
            let mut out = Array2::from_elem((idx.len(), m.ncols()), false);
            for (r, &i) in idx.iter().enumerate() {
                out.row_mut(r).assign(&m.row(i));
            }
            out
        });
        Dataset::new(features, labels, self.feature_names.clone(), mask)
    }

    /// Partition into (complete rows, rows with missing values). Missing
    /// entries stay zero-imputed and flagged in the mask; row order is
    /// preserved within each part.
    pub fn missing_data_split(&self) -> Result<(Dataset, Dataset)> {
        let mask = self
            .missing_mask
            .as_ref()
            .ok_or_else(|| Error::Data("missing_data_split requires a missing mask".into()))?;
        if self.labels.is_none() {
            return Err(Error::Data("missing_data_split requires labels".into()));
        }
        let (mut complete, mut incomplete) = (Vec::new(), Vec::new());
        for i in 0..self.n() {
            if mask.row(i).iter().any(|&b| b) {
                incomplete.push(i);
            } else {
                complete.push(i);
            }
        }
        if complete.is_empty() {
            return Err(Error::Data(
                "no fully observed rows: cannot form a source domain".into(),
            ));
        }
        Ok((self.select_rows(&complete)?, self.select_rows(&incomplete)?))
    }

    /// Comma-separated text, one sample per row, label appended as the last
    /// column when present. Values print in shortest round-trip form, so
    /// reloading recovers them bit-exactly; zero-imputed cells export as
    /// plain zeros.
    pub fn to_delimited_string(&self) -> String {
        use std::fmt::Write as _;
        let x = self.dense_features();
        let mut out = String::new();
        for i in 0..self.n() {
            for d in 0..self.m() {
                let _ = write!(out, "{}", x[(i, d)]);
                if d + 1 < self.m() || self.labels.is_some() {
                    out.push(',');
                }
            }
            match &self.labels {
                Some(Labels::Binary(v)) => {
                    let _ = write!(out, "{}", v[i]);
                }
                Some(Labels::Multiclass { ids, .. }) => {
                    let _ = write!(out, "{}", ids[i]);
                }
                None => {}
            }
            out.push('\n');
        }
        out
    }

    /// Uniform subsample without replacement, deterministic given `seed`.
    pub fn subsample(&self, size: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.subsample_with_rng(size, &mut rng)
    }

    /// Uniform subsample without replacement drawn from the given stream.
    pub fn subsample_with_rng<R: Rng + ?Sized>(&self, size: usize, rng: &mut R) -> Result<Self> {
        let n = self.n();
        if size < 1 || size > n {
            return Err(Error::Config(format!(
                "subsample size {size} out of range 1..={n}"
            )));
        }
        // partial Fisher-Yates
        let mut idx: Vec<usize> = (0..n).collect();
        for i in 0..size {
            let j = rng.random_range(i..n);
            idx.swap(i, j);
        }
        idx.truncate(size);
        self.select_rows(&idx)
    }
}
