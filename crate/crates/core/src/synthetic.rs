//! Class-conditional Bernoulli and Poisson generators for the artificial
//! experiments, plus dropout-corrupted target construction.

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Labels};
use crate::error::{Error, Result};
use crate::transfer::{DropoutTransfer, DEFAULT_EPSILON};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Bernoulli,
    Poisson,
}

/// Generator description: one parameter vector per class (Bernoulli success
/// probabilities or Poisson rates), class priors, the true dropout rates
/// used to build the target domain, and the base seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub family: Family,
    /// Per-class parameter vectors, all of the same length m.
    pub class_params: Vec<Vec<f64>>,
    /// Class priors; defaults to uniform when empty.
    #[serde(default)]
    pub priors: Vec<f64>,
    pub n_per_domain: usize,
    /// Dropout rates applied when constructing the target domain.
    pub true_theta: Vec<f64>,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn num_classes(&self) -> usize {
        self.class_params.len()
    }

    pub fn num_features(&self) -> usize {
        self.class_params.first().map_or(0, Vec::len)
    }

    /// Priors, substituting uniform when unspecified.
    pub fn effective_priors(&self) -> Vec<f64> {
        if self.priors.is_empty() {
            vec![1.0 / self.num_classes() as f64; self.num_classes()]
        } else {
            self.priors.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_classes() < 2 {
            return Err(Error::Config("need at least two classes".into()));
        }
        let m = self.num_features();
        if m == 0 {
            return Err(Error::Config("need at least one feature".into()));
        }
        if self.class_params.iter().any(|p| p.len() != m) {
            return Err(Error::Config("class parameter vectors differ in length".into()));
        }
        match self.family {
            Family::Bernoulli => {
                if self.class_params.iter().flatten().any(|&p| !(0.0..=1.0).contains(&p)) {
                    return Err(Error::Config("Bernoulli parameters must lie in [0, 1]".into()));
                }
            }
            Family::Poisson => {
                if self.class_params.iter().flatten().any(|&l| !l.is_finite() || l <= 0.0) {
                    return Err(Error::Config("Poisson rates must be positive".into()));
                }
            }
        }
        if !self.priors.is_empty() {
            if self.priors.len() != self.num_classes() {
                return Err(Error::Config("one prior per class required".into()));
            }
            if self.priors.iter().any(|&p| p < 0.0) {
                return Err(Error::Config("priors must be non-negative".into()));
            }
            let total: f64 = self.priors.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::Config(format!("priors sum to {total}, expected 1")));
            }
        }
        if self.true_theta.len() != m {
            return Err(Error::Config("one dropout rate per feature required".into()));
        }
        if self.true_theta.iter().any(|&t| !(0.0..1.0).contains(&t)) {
            return Err(Error::Config("dropout rates must lie in [0, 1)".into()));
        }
        if self.n_per_domain == 0 {
            return Err(Error::Config("n_per_domain must be positive".into()));
        }
        Ok(())
    }

    /// The transfer model that generated the target domain.
    pub fn true_transfer(&self) -> Result<DropoutTransfer> {
        DropoutTransfer::from_theta(self.true_theta.clone().into(), DEFAULT_EPSILON)
    }
}

/// Poisson draw by inversion (sequential search), adequate for the small
/// rates used here and deterministic for a given stream.
fn sample_poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    let mut p = (-lambda).exp();
    let mut cdf = p;
    let mut k = 0u64;
    while u >= cdf && k < 10_000 {
        k += 1;
        p *= lambda / k as f64;
        cdf += p;
    }
    k as f64
}

fn sample_class<R: Rng + ?Sized>(priors: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut cum = 0.0;
    for (k, &p) in priors.iter().enumerate() {
        cum += p;
        if u < cum {
            return k;
        }
    }
    priors.len() - 1
}

fn encode_labels(ids: Vec<usize>, classes: usize) -> Labels {
    if classes == 2 {
        // ascending convention: class 0 -> -1, class 1 -> +1
        Labels::Binary(ids.into_iter().map(|c| if c == 0 { -1 } else { 1 }).collect())
    } else {
        Labels::Multiclass { ids, classes }
    }
}

fn draw_domain<R: Rng + ?Sized>(spec: &SyntheticSpec, rng: &mut R) -> Result<Dataset> {
    spec.validate()?;
    let priors = spec.effective_priors();
    let (n, m) = (spec.n_per_domain, spec.num_features());
    let mut features = Array2::zeros((n, m));
    let mut ids = Vec::with_capacity(n);
    for i in 0..n {
        let class = sample_class(&priors, rng);
        ids.push(class);
        let params = &spec.class_params[class];
        for d in 0..m {
            features[(i, d)] = match spec.family {
                Family::Bernoulli => {
                    if rng.random::<f64>() < params[d] {
                        1.0
                    } else {
                        0.0
                    }
                }
                Family::Poisson => sample_poisson(params[d], rng),
            };
        }
    }
    Dataset::from_dense(features, Some(encode_labels(ids, spec.num_classes())))
}

/// Draw a labeled source-domain dataset.
pub fn generate_source<R: Rng + ?Sized>(spec: &SyntheticSpec, rng: &mut R) -> Result<Dataset> {
    draw_domain(spec, rng)
}

/// Source and target domains drawn from one stream seeded by `spec.seed`,
/// matching the first two datasets of every synthetic experiment.
pub fn generate_pair(spec: &SyntheticSpec) -> Result<(Dataset, Dataset)> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(spec.seed);
    let source = generate_source(spec, &mut rng)?;
    let target = generate_target(spec, &mut rng)?;
    Ok((source, target))
}

/// Draw a fresh source-distribution sample and push it through the true
/// dropout transfer; labels are kept.
pub fn generate_target<R: Rng + ?Sized>(spec: &SyntheticSpec, rng: &mut R) -> Result<Dataset> {
    let clean = draw_domain(spec, rng)?;
    let transfer = spec.true_transfer()?;
    let x = clean.dense_features();
    let mut z = Array2::zeros((clean.n(), clean.m()));
    for (i, row) in x.rows().into_iter().enumerate() {
        z.row_mut(i).assign(&transfer.sample(row, rng));
    }
    Dataset::from_dense(z, clean.labels().cloned())
}
