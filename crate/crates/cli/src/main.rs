//! `flda` command line: generate synthetic domain pairs, fit and score
//! individual classifiers, and run the benchmark experiments.

mod config;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use flda::classify::TrainConfig;
use flda::error::Error;
use flda::experiments::{
    emit_results, run_boundary, run_learning_curve, run_missing, run_pair, run_perturbation,
    ExperimentResult, PairOptions, DEFAULT_DELTAS,
};

use config::FileConfig;
use io::{load_dataset, write_synthetic_pair, LoadArgs};

const LONG_ABOUT: &str = "\
Feature-level domain adaptation: estimate a per-feature dropout transfer \
model between a labeled source dataset and an unlabeled target dataset, then \
train linear classifiers that minimize the expected loss under it.

Input formats:
  delimited   one sample per row, configurable delimiter (default `,`), \
optional header row (--header), optional label column (--label-col, 0-based), \
optional missing-value token (--missing) that is zero-imputed and tracked.
  sparse      (--sparse) one sample per line: `label idx:val idx:val ...` \
with strictly increasing 1-based indices; unlisted entries are zeros.

Config files are TOML with [synthetic], [train], [curve], and [perturb] \
sections; see the project README for the schema. --seed overrides the seed \
from the config file.

Transfer models are reported as one `feature<TAB>theta` line per feature. \
Models are saved as a plain-text header plus a weight table and round-trip \
bit-exactly.

Exit status is 0 on success; failures print `error[<category>]: ...` with \
category one of parse, config, dimension, data, numeric, io.";

#[derive(Parser)]
#[command(name = "flda", version, about = "Feature-level domain adaptation toolkit", long_about = LONG_ABOUT)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic source/target pair and save it as delimited text.
    Synth {
        /// TOML config with a [synthetic] section; optional when the
        /// generator flags are all given.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the seed from the config file.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (source.csv, target.csv; label in the last column).
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        generator: SynthFlags,
    },
    /// Train one classifier and save the model.
    Fit {
        /// Classifier kind: ls, lr, flda-q, or flda-l.
        #[arg(long)]
        classifier: String,
        /// Training data (the labeled source for adapted fits).
        #[arg(long)]
        source: PathBuf,
        /// Unlabeled target data; required for flda-q / flda-l.
        #[arg(long)]
        target: Option<PathBuf>,
        /// Optional TOML config ([train] section).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Recorded in the model header for provenance.
        #[arg(long)]
        seed: Option<u64>,
        /// Ridge / l2 penalty for the naive baselines.
        #[arg(long)]
        l2: Option<f64>,
        /// Output model file.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        load: LoadArgs,
    },
    /// Score a saved model on a labeled dataset.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Unused; accepted for interface uniformity.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Unused; accepted for interface uniformity.
        #[arg(long)]
        seed: Option<u64>,
        /// Optional directory for an eval.txt report.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        load: LoadArgs,
    },
    /// Run a benchmark experiment and persist its result files.
    Bench {
        #[command(subcommand)]
        experiment: BenchCommand,
    },
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Train all six classifiers on one generated pair; report errors and
    /// decision-boundary data.
    Boundary {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Error as a function of training-set size with per-size repetitions.
    Curve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated ascending sizes; overrides the config.
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
        /// Repetitions per size; overrides the config.
        #[arg(long)]
        reps: Option<usize>,
    },
    /// Sensitivity to offsets added to the first transfer parameter.
    Perturb {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated offsets; overrides the config.
        #[arg(long, value_delimiter = ',')]
        deltas: Vec<f64>,
    },
    /// Fit on a source file, adapt toward a target file, report target errors.
    Pair {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        l2: Option<f64>,
        #[command(flatten)]
        load: LoadArgs,
    },
    /// Split one dataset by missing values into source/target, then evaluate.
    Missing {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        l2: Option<f64>,
        #[command(flatten)]
        load: LoadArgs,
    },
}

/// Flag alternative to the [synthetic] config section; any flag given
/// overrides the corresponding config value.
#[derive(clap::Args)]
struct SynthFlags {
    /// Generator family: bernoulli or poisson.
    #[arg(long)]
    family: Option<String>,
    /// Per-class parameter vectors, classes separated by `;`, e.g. "2,2;6,6".
    #[arg(long)]
    class_params: Option<String>,
    /// Class priors, comma-separated; uniform when omitted.
    #[arg(long, value_delimiter = ',')]
    priors: Vec<f64>,
    /// Samples per domain.
    #[arg(long)]
    n_per_domain: Option<usize>,
    /// Dropout rates used to build the target, comma-separated, e.g. "0.5,0".
    #[arg(long, value_delimiter = ',')]
    true_theta: Vec<f64>,
}

impl SynthFlags {
    fn resolve(
        self,
        base: Option<flda::SyntheticSpec>,
        seed: Option<u64>,
    ) -> flda::Result<flda::SyntheticSpec> {
        use flda::Family;
        let family = match (&self.family, &base) {
            (Some(f), _) => match f.as_str() {
                "bernoulli" => Family::Bernoulli,
                "poisson" => Family::Poisson,
                other => return Err(Error::Config(format!("unknown family `{other}`"))),
            },
            (None, Some(b)) => b.family,
            (None, None) => {
                return Err(Error::Config("--family or a [synthetic] config required".into()))
            }
        };
        let class_params = match (&self.class_params, &base) {
            (Some(s), _) => s
                .split(';')
                .map(|cls| {
                    cls.split(',')
                        .map(|tok| {
                            tok.trim().parse::<f64>().map_err(|_| {
                                Error::Config(format!("bad class parameter `{tok}`"))
                            })
                        })
                        .collect::<flda::Result<Vec<f64>>>()
                })
                .collect::<flda::Result<Vec<Vec<f64>>>>()?,
            (None, Some(b)) => b.class_params.clone(),
            (None, None) => {
                return Err(Error::Config("--class-params or a [synthetic] config required".into()))
            }
        };
        let spec = flda::SyntheticSpec {
            family,
            class_params,
            priors: if self.priors.is_empty() {
                base.as_ref().map(|b| b.priors.clone()).unwrap_or_default()
            } else {
                self.priors
            },
            n_per_domain: self
                .n_per_domain
                .or(base.as_ref().map(|b| b.n_per_domain))
                .ok_or_else(|| Error::Config("--n-per-domain or a [synthetic] config required".into()))?,
            true_theta: if self.true_theta.is_empty() {
                base.as_ref()
                    .map(|b| b.true_theta.clone())
                    .ok_or_else(|| Error::Config("--true-theta or a [synthetic] config required".into()))?
            } else {
                self.true_theta
            },
            seed: seed.or(base.as_ref().map(|b| b.seed)).unwrap_or(0),
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn exit_code(err: &Error) -> u8 {
    match err.category() {
        "parse" => 2,
        "config" => 3,
        "dimension" => 4,
        "data" => 5,
        "numeric" => 6,
        _ => 7,
    }
}

fn finish(result: &ExperimentResult, out: &std::path::Path) -> flda::Result<()> {
    let written = emit_results(result, out)?;
    for cell in &result.errors {
        println!("{}\t{}\t{}", cell.classifier, cell.domain, cell.error);
    }
    for t in &result.timings {
        eprintln!("timing: {} {:.3}s", t.cell, t.seconds);
    }
    eprintln!("wrote {} files to {}", written.len(), out.display());
    Ok(())
}

fn train_config(
    config: Option<&PathBuf>,
    l2: Option<f64>,
) -> flda::Result<TrainConfig> {
    let mut train = match config {
        Some(path) => FileConfig::from_path(path)?.train.unwrap_or_default(),
        None => TrainConfig::default(),
    };
    if let Some(l2) = l2 {
        train.l2 = l2;
    }
    Ok(train)
}

fn run(cli: Cli) -> flda::Result<()> {
    match cli.command {
        Command::Synth { config, seed, out, generator } => {
            let base = match &config {
                Some(path) => Some(FileConfig::from_path(path)?.synthetic_required()?),
                None => None,
            };
            let spec = generator.resolve(base, seed)?;
            let paths = write_synthetic_pair(&spec, &out)?;
            for p in paths {
                println!("{}", p.display());
            }
            Ok(())
        }
        Command::Fit { classifier, source, target, config, seed, l2, out, load } => {
            let train = train_config(config.as_ref(), l2)?;
            let data = load_dataset(&source, &load)?;
            let mut model = match classifier.as_str() {
                "ls" => flda::fit_ls(&data, &train)?,
                "lr" => flda::fit_lr(&data, &train)?,
                "flda-q" | "flda-l" => {
                    let target_path = target.ok_or_else(|| {
                        Error::Config(format!("--target is required for {classifier}"))
                    })?;
                    let target_data = load_dataset(&target_path, &load)?;
                    let source_model = flda::SourceModel::estimate(&data)?;
                    let transfer =
                        flda::DropoutTransfer::estimate(&source_model, &target_data)?;
                    eprint!("{}", transfer.to_table_string(data.feature_names()));
                    if classifier == "flda-q" {
                        match data.labels() {
                            Some(flda::Labels::Multiclass { .. }) => {
                                flda::fit_flda_q_multiclass(&data, &transfer, &train)?
                            }
                            _ => flda::fit_flda_q(&data, &transfer, &train)?,
                        }
                    } else {
                        flda::fit_flda_l(&data, &transfer, &train)?
                    }
                }
                other => {
                    return Err(Error::Config(format!(
                        "unknown classifier `{other}` (expected ls, lr, flda-q, flda-l)"
                    )))
                }
            };
            if let Some(seed) = seed {
                let mut meta = model.meta().clone();
                meta.seed = Some(seed);
                model = flda::LinearModel::new(
                    model.weights().clone(),
                    model.loss(),
                    model.adapted(),
                    meta,
                )?;
            }
            model.save(&out)?;
            println!("{}", out.display());
            Ok(())
        }
        Command::Eval { model, data, out, load, .. } => {
            let model = flda::LinearModel::load(&model)?;
            let dataset = load_dataset(&data, &load)?;
            let truth = dataset
                .labels()
                .ok_or_else(|| Error::Data("evaluation data has no labels".into()))?;
            let rate = flda::error_rate(&model.predict(&dataset)?, truth)?;
            println!("error_rate {rate}");
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)?;
                std::fs::write(dir.join("eval.txt"), format!("error_rate {rate}\n"))?;
            }
            Ok(())
        }
        Command::Bench { experiment } => match experiment {
            BenchCommand::Boundary { config, seed, out } => {
                let file = FileConfig::from_path(&config)?;
                let mut spec = file.synthetic_required()?;
                if let Some(seed) = seed {
                    spec.seed = seed;
                }
                let result = run_boundary(&spec, &file.train.unwrap_or_default())?;
                finish(&result, &out)
            }
            BenchCommand::Curve { config, seed, out, sizes, reps } => {
                let file = FileConfig::from_path(&config)?;
                let mut spec = file.synthetic_required()?;
                if let Some(seed) = seed {
                    spec.seed = seed;
                }
                let section = file.curve.clone().unwrap_or_default();
                let sizes = if sizes.is_empty() { section.sizes } else { sizes };
                let reps = reps.unwrap_or(section.repetitions);
                let result =
                    run_learning_curve(&spec, &sizes, reps, &file.train.unwrap_or_default())?;
                finish(&result, &out)
            }
            BenchCommand::Perturb { config, seed, out, deltas } => {
                let file = FileConfig::from_path(&config)?;
                let mut spec = file.synthetic_required()?;
                if let Some(seed) = seed {
                    spec.seed = seed;
                }
                let deltas = if deltas.is_empty() {
                    file.perturb
                        .clone()
                        .map(|p| p.deltas)
                        .unwrap_or_else(|| DEFAULT_DELTAS.to_vec())
                } else {
                    deltas
                };
                let result =
                    run_perturbation(&spec, &deltas, &file.train.unwrap_or_default())?;
                finish(&result, &out)
            }
            BenchCommand::Pair { source, target, config, seed, out, l2, load } => {
                let train = train_config(config.as_ref(), l2)?;
                let source_data = load_dataset(&source, &load)?;
                let target_data = load_dataset(&target, &load)?;
                let opts = PairOptions {
                    train,
                    source_path: Some(source.display().to_string()),
                    target_path: Some(target.display().to_string()),
                    seed: seed.unwrap_or(0),
                    ..Default::default()
                };
                let result = run_pair(&source_data, &target_data, &opts)?;
                finish(&result, &out)
            }
            BenchCommand::Missing { data, config, seed, out, l2, load } => {
                let train = train_config(config.as_ref(), l2)?;
                let dataset = load_dataset(&data, &load)?;
                let opts = PairOptions {
                    train,
                    source_path: Some(data.display().to_string()),
                    seed: seed.unwrap_or(0),
                    ..Default::default()
                };
                let result = run_missing(&dataset, &opts)?;
                finish(&result, &out)
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error[{}]: {err}", err.category());
            ExitCode::from(exit_code(&err))
        }
    }
}
