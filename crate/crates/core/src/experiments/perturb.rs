//! Sensitivity of the adapted classifiers to errors in the estimated
//! transfer parameters: add fixed offsets to the first dropout rate and
//! watch the target error.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::classify::{fit_flda_l, fit_lr, fit_ls, LinearModel, TrainConfig};
use crate::error::{Error, Result};
use crate::synthetic::{generate_source, generate_target, SyntheticSpec};

use super::{
    boundary_line, estimate_transfer, evaluate, fit_quadratic_adapted, scatter_of, CellTiming,
    ConfigSnapshot, ExperimentResult, PerturbCell, VALIDATION_N,
};

/// Default offsets added to the first transfer parameter.
pub const DEFAULT_DELTAS: [f64; 4] = [0.0, 0.1, 0.2, 0.3];

/// Train naive source and target classifiers plus one adapted classifier per
/// perturbation, for both losses; report target errors as a 2 x (2+deltas)
/// table.
pub fn run_perturbation(
    spec: &SyntheticSpec,
    deltas: &[f64],
    config: &TrainConfig,
) -> Result<ExperimentResult> {
    spec.validate()?;
    if deltas.is_empty() {
        return Err(Error::Config("no perturbation offsets given".into()));
    }
    let snapshot = ConfigSnapshot {
        experiment: "perturb".into(),
        seed: spec.seed,
        validation_n: VALIDATION_N,
        train: config.clone(),
        synthetic: Some(spec.clone()),
        sizes: None,
        repetitions: None,
        deltas: Some(deltas.to_vec()),
        source_path: None,
        target_path: None,
    };
    let mut result = ExperimentResult::empty("perturb", snapshot);

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let source = generate_source(spec, &mut rng)?;
    let target = generate_target(spec, &mut rng)?;
    let val_spec = SyntheticSpec { n_per_domain: VALIDATION_N, ..spec.clone() };
    let val_target = generate_target(&val_spec, &mut rng)?;

    let transfer = estimate_transfer(&source, &target)?;
    for (d, &t) in transfer.theta().iter().enumerate() {
        result.theta.push(super::ThetaCell { feature: d.to_string(), theta: t });
    }

    let start = Instant::now();
    let mut table: Vec<(String, String, LinearModel)> = Vec::new();
    table.push(("quadratic".into(), "sl".into(), fit_ls(&source, config)?));
    table.push(("quadratic".into(), "tl".into(), fit_ls(&target, config)?));
    for &delta in deltas {
        let perturbed = transfer.perturbed(0, delta)?;
        table.push((
            "quadratic".into(),
            format!("theta+{delta}"),
            fit_quadratic_adapted(&source, &perturbed, config)?,
        ));
    }
    table.push(("logistic".into(), "sl".into(), fit_lr(&source, config)?));
    table.push(("logistic".into(), "tl".into(), fit_lr(&target, config)?));
    for &delta in deltas {
        let perturbed = transfer.perturbed(0, delta)?;
        table.push((
            "logistic".into(),
            format!("theta+{delta}"),
            fit_flda_l(&source, &perturbed, config)?,
        ));
    }
    result.timings.push(CellTiming {
        cell: "fit-all".into(),
        seconds: start.elapsed().as_secs_f64(),
    });

    for (loss, column, model) in &table {
        result.perturbation.push(PerturbCell {
            loss: loss.clone(),
            column: column.clone(),
            error: evaluate(model, &val_target)?,
        });
    }

    if spec.num_features() == 2 {
        let scatter = scatter_of("target", &val_target)?;
        for (loss, column, model) in &table {
            if let Ok(w) = model.binary_weights() {
                result.boundary.push(boundary_line(
                    &format!("{loss}-{column}"),
                    w.as_slice().expect("contiguous"),
                    &scatter,
                ));
            }
        }
        result.scatters.push(scatter);
    }

    Ok(result)
}
