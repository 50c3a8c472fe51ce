//! Learning curves: error as a function of the training-set size, averaged
//! over seeded repetitions, against fixed validation sets.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::classify::{fit_ls, TrainConfig};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::synthetic::{generate_source, generate_target, SyntheticSpec};

use super::{
    estimate_transfer, evaluate, fit_quadratic_adapted, names, CellTiming, ConfigSnapshot,
    CurveCell, ExperimentResult, VALIDATION_N,
};

const CURVE_CLASSIFIERS: [&str; 3] = [names::S_LS, names::T_LS, names::FLDA_Q];
const DOMAINS: [&str; 2] = ["source", "target"];

struct Cell {
    size_idx: usize,
    rep: usize,
}

/// One repetition at one size: subsample, fit the three quadratic
/// classifiers, and score them on both validation sets.
fn run_cell(
    size: usize,
    rep_seed: u64,
    pools: (&Dataset, &Dataset),
    validations: (&Dataset, &Dataset),
    config: &TrainConfig,
) -> Result<([f64; 6], f64)> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(rep_seed);
    let src = pools.0.subsample_with_rng(size, &mut rng)?;
    let tgt = pools.1.subsample_with_rng(size, &mut rng)?;

    let s_ls = fit_ls(&src, config)?;
    let t_ls = fit_ls(&tgt, config)?;
    let transfer = estimate_transfer(&src, &tgt)?;
    let flda_q = fit_quadratic_adapted(&src, &transfer, config)?;

    let mut errs = [0.0; 6];
    for (ci, model) in [&s_ls, &t_ls, &flda_q].into_iter().enumerate() {
        for (di, val) in [validations.0, validations.1].into_iter().enumerate() {
            errs[ci * 2 + di] = evaluate(model, val)?;
        }
    }
    Ok((errs, start.elapsed().as_secs_f64()))
}

/// Learning-curve experiment over ascending sizes with `repetitions` seeded
/// repeats per size (seed = base seed + repetition index). Reports the mean
/// error and its standard error for every (size, classifier, domain) cell.
pub fn run_learning_curve(
    spec: &SyntheticSpec,
    sizes: &[usize],
    repetitions: usize,
    config: &TrainConfig,
) -> Result<ExperimentResult> {
    spec.validate()?;
    if sizes.is_empty() {
        return Err(Error::Config("no training sizes given".into()));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("sizes must be strictly ascending".into()));
    }
    if repetitions < 2 {
        return Err(Error::Config("need at least 2 repetitions for a standard error".into()));
    }
    if let Some(&too_big) = sizes.iter().find(|&&s| s > spec.n_per_domain) {
        return Err(Error::Config(format!(
            "size {too_big} exceeds the generated pool of {}",
            spec.n_per_domain
        )));
    }

    let snapshot = ConfigSnapshot {
        experiment: "curve".into(),
        seed: spec.seed,
        validation_n: VALIDATION_N,
        train: config.clone(),
        synthetic: Some(spec.clone()),
        sizes: Some(sizes.to_vec()),
        repetitions: Some(repetitions),
        deltas: None,
        source_path: None,
        target_path: None,
    };
    let mut result = ExperimentResult::empty("curve", snapshot);

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let source_pool = generate_source(spec, &mut rng)?;
    let target_pool = generate_target(spec, &mut rng)?;
    let val_spec = SyntheticSpec { n_per_domain: VALIDATION_N, ..spec.clone() };
    let val_source = generate_source(&val_spec, &mut rng)?;
    let val_target = generate_target(&val_spec, &mut rng)?;

    let cells: Vec<Cell> = (0..sizes.len())
        .flat_map(|size_idx| (0..repetitions).map(move |rep| Cell { size_idx, rep }))
        .collect();

    // cells are independent pure computations with derived seeds
    let outcomes: Result<Vec<([f64; 6], f64)>> = cells
        .par_iter()
        .map(|cell| {
            run_cell(
                sizes[cell.size_idx],
                spec.seed.wrapping_add(cell.rep as u64),
                (&source_pool, &target_pool),
                (&val_source, &val_target),
                config,
            )
        })
        .collect();
    let outcomes = outcomes?;

    for (cell, (_, seconds)) in cells.iter().zip(&outcomes) {
        result.timings.push(CellTiming {
            cell: format!("size={} rep={}", sizes[cell.size_idx], cell.rep),
            seconds: *seconds,
        });
    }

    for (size_idx, &size) in sizes.iter().enumerate() {
        for (ci, classifier) in CURVE_CLASSIFIERS.iter().enumerate() {
            for (di, domain) in DOMAINS.iter().enumerate() {
                let samples: Vec<f64> = cells
                    .iter()
                    .zip(&outcomes)
                    .filter(|(c, _)| c.size_idx == size_idx)
                    .map(|(_, (errs, _))| errs[ci * 2 + di])
                    .collect();
                let n = samples.len() as f64;
                let mean = samples.iter().sum::<f64>() / n;
                let var =
                    samples.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (n - 1.0);
                result.curve.push(CurveCell {
                    size,
                    classifier: (*classifier).into(),
                    domain: (*domain).into(),
                    mean,
                    sem: (var / n).sqrt(),
                    repetitions,
                });
            }
        }
    }

    Ok(result)
}
