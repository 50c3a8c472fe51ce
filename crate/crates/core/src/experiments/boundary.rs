//! Boundary experiment: train the naive and adapted classifiers on one
//! generated domain pair and report validation errors, pairwise boundary
//! agreement, and plot data.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::classify::TrainConfig;
use crate::error::Result;
use crate::synthetic::{generate_source, generate_target, SyntheticSpec};

use super::{
    boundary_line, estimate_transfer, evaluate, fit_all_six, names, scatter_of, CellTiming,
    ConfigSnapshot, DisagreementCell, ErrorCell, ExperimentResult, VALIDATION_N,
};

/// Train s-ls, t-ls, flda-q and their logistic counterparts on a generated
/// pair; score them on fixed source and target validation sets.
pub fn run_boundary(spec: &SyntheticSpec, config: &TrainConfig) -> Result<ExperimentResult> {
    spec.validate()?;
    let snapshot = ConfigSnapshot {
        experiment: "boundary".into(),
        seed: spec.seed,
        validation_n: VALIDATION_N,
        train: config.clone(),
        synthetic: Some(spec.clone()),
        sizes: None,
        repetitions: None,
        deltas: None,
        source_path: None,
        target_path: None,
    };
    let mut result = ExperimentResult::empty("boundary", snapshot);

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let source = generate_source(spec, &mut rng)?;
    let target = generate_target(spec, &mut rng)?;
    let val_spec = SyntheticSpec { n_per_domain: VALIDATION_N, ..spec.clone() };
    let val_source = generate_source(&val_spec, &mut rng)?;
    let val_target = generate_target(&val_spec, &mut rng)?;

    let transfer = estimate_transfer(&source, &target)?;
    for (d, &t) in transfer.theta().iter().enumerate() {
        result.theta.push(super::ThetaCell { feature: d.to_string(), theta: t });
    }

    let start = Instant::now();
    let models = fit_all_six(&source, &target, &transfer, config)?;
    result.timings.push(CellTiming {
        cell: "fit-all".into(),
        seconds: start.elapsed().as_secs_f64(),
    });

    for (name, model) in &models {
        for (domain, val) in [("source", &val_source), ("target", &val_target)] {
            result.errors.push(ErrorCell {
                classifier: (*name).into(),
                domain: domain.into(),
                error: evaluate(model, val)?,
            });
        }
    }

    // boundary-equivalence diagnostics on the target validation set
    let pick = |n: &str| models.iter().find(|(k, _)| *k == n).map(|(_, m)| m);
    for (a, b) in [(names::FLDA_Q, names::T_LS), (names::FLDA_L, names::T_LR)] {
        if let (Some(ma), Some(mb)) = (pick(a), pick(b)) {
            let rate = crate::classify::disagreement(
                &ma.predict(&val_target)?,
                &mb.predict(&val_target)?,
            )?;
            result.disagreements.push(DisagreementCell {
                first: a.into(),
                second: b.into(),
                rate,
            });
        }
    }

    if spec.num_features() == 2 {
        let scatter_source = scatter_of("source", &val_source)?;
        let scatter_target = scatter_of("target", &val_target)?;
        for (name, model) in &models {
            if let Ok(w) = model.binary_weights() {
                result
                    .boundary
                    .push(boundary_line(name, w.as_slice().expect("contiguous"), &scatter_target));
            }
        }
        result.scatters.push(scatter_source);
        result.scatters.push(scatter_target);
    }

    Ok(result)
}
