//! Linear classifier container: weights with bias appended, loss kind,
//! training metadata, prediction, and plain-text serialization.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::data::{Dataset, Labels};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    Quadratic,
    Logistic,
}

impl LossKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LossKind::Quadratic => "quadratic",
            LossKind::Logistic => "logistic",
        }
    }
}

impl std::str::FromStr for LossKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quadratic" => Ok(LossKind::Quadratic),
            "logistic" => Ok(LossKind::Logistic),
            other => Err(Error::Config(format!("unknown loss kind `{other}`"))),
        }
    }
}

/// Weight storage; the last row is always the bias coordinate.
#[derive(Debug, Clone)]
pub enum ModelWeights {
    /// Length m+1 vector for binary classification.
    Binary(Array1<f64>),
    /// (m+1) x K matrix for multiclass, one column per class.
    Multiclass(Array2<f64>),
}

/// Optimization bookkeeping recorded by the fit routines.
#[derive(Debug, Clone, Default)]
pub struct TrainMeta {
    pub iterations: usize,
    pub grad_norm: f64,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct LinearModel {
    weights: ModelWeights,
    loss: LossKind,
    adapted: bool,
    meta: TrainMeta,
}

impl LinearModel {
    pub fn new(weights: ModelWeights, loss: LossKind, adapted: bool, meta: TrainMeta) -> Result<Self> {
        let finite = match &weights {
            ModelWeights::Binary(w) => w.iter().all(|v| v.is_finite()),
            ModelWeights::Multiclass(w) => w.iter().all(|v| v.is_finite()),
        };
        if !finite {
            return Err(Error::Numeric("model weights contain non-finite values".into()));
        }
        if let ModelWeights::Multiclass(w) = &weights {
            if w.ncols() < 2 {
                return Err(Error::Data("multiclass model needs at least 2 classes".into()));
            }
        }
        Ok(LinearModel { weights, loss, adapted, meta })
    }

    pub fn weights(&self) -> &ModelWeights {
        &self.weights
    }

    /// Binary weight vector, bias last.
    pub fn binary_weights(&self) -> Result<ArrayView1<'_, f64>> {
        match &self.weights {
            ModelWeights::Binary(w) => Ok(w.view()),
            ModelWeights::Multiclass(_) => {
                Err(Error::Data("expected a binary model, found multiclass".into()))
            }
        }
    }

    pub fn multiclass_weights(&self) -> Result<ArrayView2<'_, f64>> {
        match &self.weights {
            ModelWeights::Multiclass(w) => Ok(w.view()),
            ModelWeights::Binary(_) => {
                Err(Error::Data("expected a multiclass model, found binary".into()))
            }
        }
    }

    pub fn loss(&self) -> LossKind {
        self.loss
    }

    pub fn adapted(&self) -> bool {
        self.adapted
    }

    pub fn meta(&self) -> &TrainMeta {
        &self.meta
    }

    /// Feature dimension m (weights hold m+1 rows).
    pub fn feature_dim(&self) -> usize {
        match &self.weights {
            ModelWeights::Binary(w) => w.len() - 1,
            ModelWeights::Multiclass(w) => w.nrows() - 1,
        }
    }

    pub fn num_classes(&self) -> usize {
        match &self.weights {
            ModelWeights::Binary(_) => 2,
            ModelWeights::Multiclass(w) => w.ncols(),
        }
    }

    /// Classify every row. Binary: sign of the score with sign(0) = +1.
    /// Multiclass: argmax score, ties broken by the lowest class id.
    pub fn predict(&self, data: &Dataset) -> Result<Labels> {
        if data.m() != self.feature_dim() {
            return Err(Error::Dimension { expected: self.feature_dim(), got: data.m() });
        }
        let x = data.dense_features();
        match &self.weights {
            ModelWeights::Binary(w) => {
                let head = w.slice(ndarray::s![..w.len() - 1]);
                let bias = w[w.len() - 1];
                let scores = x.dot(&head);
                Ok(Labels::Binary(
                    scores
                        .iter()
                        .map(|&s| if s + bias >= 0.0 { 1 } else { -1 })
                        .collect(),
                ))
            }
            ModelWeights::Multiclass(w) => {
                let head = w.slice(ndarray::s![..w.nrows() - 1, ..]);
                let bias = w.row(w.nrows() - 1);
                let scores = x.dot(&head);
                let ids = scores
                    .rows()
                    .into_iter()
                    .map(|row| {
                        let mut best = (0usize, row[0] + bias[0]);
                        for k in 1..row.len() {
                            let s = row[k] + bias[k];
                            if s > best.1 {
                                best = (k, s);
                            }
                        }
                        best.0
                    })
                    .collect();
                Ok(Labels::Multiclass { ids, classes: w.ncols() })
            }
        }
    }

    /// Serialize to a plain-text block; floats use the shortest
    /// representation that parses back to the same value.
    pub fn to_text(&self) -> String {
        let (rows, cols, flat): (usize, usize, Vec<f64>) = match &self.weights {
            ModelWeights::Binary(w) => (w.len(), 1, w.to_vec()),
            ModelWeights::Multiclass(w) => {
                (w.nrows(), w.ncols(), w.iter().copied().collect())
            }
        };
        let mut out = String::new();
        let _ = writeln!(out, "flda-model v1");
        let _ = writeln!(out, "loss {}", self.loss.as_str());
        let _ = writeln!(out, "adapted {}", self.adapted);
        let _ = writeln!(out, "shape {rows} {cols}");
        let _ = writeln!(out, "iterations {}", self.meta.iterations);
        let _ = writeln!(out, "grad_norm {}", self.meta.grad_norm);
        match self.meta.seed {
            Some(s) => { let _ = writeln!(out, "seed {s}"); }
            None => { let _ = writeln!(out, "seed none"); }
        }
        let _ = writeln!(out, "weights");
        for r in 0..rows {
            let line: Vec<String> =
                (0..cols).map(|c| format!("{}", flat[r * cols + c])).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut expect = |key: &str| -> Result<(usize, String)> {
            let (no, line) = lines
                .next()
                .ok_or_else(|| Error::Parse { line: 0, msg: format!("missing `{key}` line") })?;
            let rest = line.strip_prefix(key).ok_or_else(|| Error::Parse {
                line: no,
                msg: format!("expected `{key}`, found `{line}`"),
            })?;
            Ok((no, rest.trim().to_string()))
        };

        expect("flda-model v1")?;
        let loss: LossKind = expect("loss")?.1.parse()?;
        let adapted = {
            let (no, v) = expect("adapted")?;
            v.parse::<bool>().map_err(|_| Error::Parse {
                line: no,
                msg: format!("bad boolean `{v}`"),
            })?
        };
        let (shape_no, shape) = expect("shape")?;
        let dims: Vec<usize> = shape
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Parse { line: shape_no, msg: format!("bad shape `{shape}`") })?;
        let [rows, cols] = dims[..] else {
            return Err(Error::Parse { line: shape_no, msg: "shape needs two integers".into() });
        };
        let iterations = {
            let (no, v) = expect("iterations")?;
            v.parse::<usize>()
                .map_err(|_| Error::Parse { line: no, msg: format!("bad count `{v}`") })?
        };
        let grad_norm = {
            let (no, v) = expect("grad_norm")?;
            v.parse::<f64>()
                .map_err(|_| Error::Parse { line: no, msg: format!("bad float `{v}`") })?
        };
        let seed = {
            let (no, v) = expect("seed")?;
            if v == "none" {
                None
            } else {
                Some(v.parse::<u64>().map_err(|_| Error::Parse {
                    line: no,
                    msg: format!("bad seed `{v}`"),
                })?)
            }
        };
        expect("weights")?;

        let mut flat = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (no, line) = lines
                .next()
                .ok_or_else(|| Error::Parse { line: 0, msg: "truncated weight table".into() })?;
            for tok in line.split_whitespace() {
                flat.push(tok.parse::<f64>().map_err(|_| Error::Parse {
                    line: no,
                    msg: format!("bad weight `{tok}`"),
                })?);
            }
        }
        if flat.len() != rows * cols {
            return Err(Error::Parse { line: 0, msg: "weight table size mismatch".into() });
        }

        let weights = if cols == 1 {
            ModelWeights::Binary(Array1::from(flat))
        } else {
            ModelWeights::Multiclass(
                Array2::from_shape_vec((rows, cols), flat)
                    .map_err(|e| Error::Data(e.to_string()))?,
            )
        };
        LinearModel::new(weights, loss, adapted, TrainMeta { iterations, grad_norm, seed })
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::from_text(&fs::read_to_string(path)?)
    }
}

/// Fraction of positions where the two label sequences disagree.
pub fn error_rate(predicted: &Labels, truth: &Labels) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::Dimension { expected: truth.len(), got: predicted.len() });
    }
    if predicted.is_empty() {
        return Err(Error::Data("cannot score zero predictions".into()));
    }
    let mismatches = match (predicted, truth) {
        (Labels::Binary(p), Labels::Binary(t)) => {
            p.iter().zip(t).filter(|(a, b)| a != b).count()
        }
        (Labels::Multiclass { ids: p, .. }, Labels::Multiclass { ids: t, .. }) => {
            p.iter().zip(t).filter(|(a, b)| a != b).count()
        }
        _ => {
            return Err(Error::Data(
                "cannot compare binary predictions with multiclass labels".into(),
            ))
        }
    };
    Ok(mismatches as f64 / truth.len() as f64)
}

/// Fraction of positions where two prediction sequences differ.
pub fn disagreement(a: &Labels, b: &Labels) -> Result<f64> {
    error_rate(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn zero_weights_predict_positive() {
        let model = LinearModel::new(
            ModelWeights::Binary(Array1::zeros(3)),
            LossKind::Quadratic,
            false,
            TrainMeta::default(),
        )
        .unwrap();
        let data = Dataset::from_dense(array![[1.0, -5.0], [0.0, 0.0]], None).unwrap();
        assert_eq!(model.predict(&data).unwrap(), Labels::Binary(vec![1, 1]));
    }

    #[test]
    fn multiclass_tie_breaks_to_lowest_id() {
        let w = Array2::zeros((2, 3)); // all scores equal
        let model = LinearModel::new(
            ModelWeights::Multiclass(w),
            LossKind::Quadratic,
            false,
            TrainMeta::default(),
        )
        .unwrap();
        let data = Dataset::from_dense(array![[2.0]], None).unwrap();
        assert_eq!(
            model.predict(&data).unwrap(),
            Labels::Multiclass { ids: vec![0], classes: 3 }
        );
    }

    #[test]
    fn error_rate_counts_mismatches() {
        let p = Labels::Binary(vec![1, 1, -1, 1]);
        let t = Labels::Binary(vec![1, -1, -1, 1]);
        assert_eq!(error_rate(&p, &t).unwrap(), 0.25);
    }

    #[test]
    fn error_rate_rejects_kind_mismatch() {
        let p = Labels::Binary(vec![1]);
        let t = Labels::Multiclass { ids: vec![0], classes: 2 };
        assert!(error_rate(&p, &t).is_err());
    }

    #[test]
    fn text_round_trip_is_bit_exact() {
        let w = array![0.1 + 0.2, -1.0 / 3.0, 5e-324, 1.7976931348623157e308];
        let model = LinearModel::new(
            ModelWeights::Binary(w.clone()),
            LossKind::Logistic,
            true,
            TrainMeta { iterations: 17, grad_norm: 3.5e-6, seed: Some(42) },
        )
        .unwrap();
        let text = model.to_text();
        let back = LinearModel::from_text(&text).unwrap();
        let wb = back.binary_weights().unwrap();
        for (a, b) in w.iter().zip(wb.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(back.loss(), LossKind::Logistic);
        assert!(back.adapted());
        assert_eq!(back.meta().iterations, 17);
        assert_eq!(back.meta().seed, Some(42));
        assert_eq!(text, back.to_text());
    }

    #[test]
    fn multiclass_round_trip() {
        let w = array![[0.5, -0.25, 0.125], [1.0, 2.0, -3.0]];
        let model = LinearModel::new(
            ModelWeights::Multiclass(w.clone()),
            LossKind::Quadratic,
            false,
            TrainMeta::default(),
        )
        .unwrap();
        let back = LinearModel::from_text(&model.to_text()).unwrap();
        assert_eq!(back.multiclass_weights().unwrap(), w.view());
    }
}
