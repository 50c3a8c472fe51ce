//! Result persistence: one structured TOML file plus flat delimited tables
//! and plot-ready scatter/line files. Emission is a pure function of the
//! result, so re-emitting the same result is bit-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::ExperimentResult;

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

fn write_file(dir: &Path, name: &str, content: String, written: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, content)?;
    written.push(path);
    Ok(())
}

/// Write the result files into `out_dir` (created if absent); returns the
/// paths written.
pub fn emit_results(result: &ExperimentResult, out_dir: &Path) -> Result<Vec<PathBuf>> {
    if result.is_empty() {
        return Err(Error::Data("empty result: nothing to write".into()));
    }
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();

    let toml_text = toml::to_string_pretty(result)
        .map_err(|e| Error::Data(format!("cannot serialize result: {e}")))?;
    write_file(out_dir, "result.toml", toml_text, &mut written)?;

    if !result.errors.is_empty() {
        let mut s = String::from("classifier,domain,error\n");
        for c in &result.errors {
            let _ = writeln!(s, "{},{},{}", c.classifier, c.domain, c.error);
        }
        write_file(out_dir, "errors.csv", s, &mut written)?;
    }

    if !result.disagreements.is_empty() {
        let mut s = String::from("first,second,rate\n");
        for c in &result.disagreements {
            let _ = writeln!(s, "{},{},{}", c.first, c.second, c.rate);
        }
        write_file(out_dir, "disagreements.csv", s, &mut written)?;
    }

    if !result.curve.is_empty() {
        let mut s = String::from("size,classifier,domain,mean,sem,repetitions\n");
        for c in &result.curve {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                c.size, c.classifier, c.domain, c.mean, c.sem, c.repetitions
            );
        }
        write_file(out_dir, "curve.csv", s, &mut written)?;
    }

    if !result.perturbation.is_empty() {
        let mut s = String::from("loss,column,error\n");
        for c in &result.perturbation {
            let _ = writeln!(s, "{},{},{}", c.loss, c.column, c.error);
        }
        write_file(out_dir, "perturbation.csv", s, &mut written)?;
    }

    if !result.theta.is_empty() {
        let mut s = String::from("feature\ttheta\n");
        for c in &result.theta {
            let _ = writeln!(s, "{}\t{}", c.feature, c.theta);
        }
        write_file(out_dir, "theta.tsv", s, &mut written)?;
    }

    for scatter in &result.scatters {
        let mut s = String::from("x,y,label\n");
        for &(x, y, label) in &scatter.points {
            let _ = writeln!(s, "{x},{y},{label}");
        }
        write_file(out_dir, &format!("scatter_{}.csv", sanitize(&scatter.domain)), s, &mut written)?;
    }

    for line in &result.boundary {
        let mut s = String::from("x,y\n");
        for &[x, y] in &line.endpoints {
            let _ = writeln!(s, "{x},{y}");
        }
        write_file(out_dir, &format!("line_{}.csv", sanitize(&line.classifier)), s, &mut written)?;
    }

    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::TrainConfig;
    use crate::experiments::{ConfigSnapshot, ErrorCell};

    fn snapshot() -> ConfigSnapshot {
        ConfigSnapshot {
            experiment: "test".into(),
            seed: 1,
            validation_n: 10,
            train: TrainConfig::default(),
            synthetic: None,
            sizes: None,
            repetitions: None,
            deltas: None,
            source_path: None,
            target_path: None,
        }
    }

    #[test]
    fn empty_result_is_an_error_and_writes_nothing() {
        let result = ExperimentResult::empty("test", snapshot());
        let dir = tempfile::tempdir().unwrap();
        assert!(emit_results(&result, dir.path()).is_err());
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn re_emission_is_bit_identical() {
        let mut result = ExperimentResult::empty("test", snapshot());
        result.errors.push(ErrorCell {
            classifier: "s-ls".into(),
            domain: "target".into(),
            error: 0.123456789,
        });
        let dir = tempfile::tempdir().unwrap();
        let first = emit_results(&result, dir.path()).unwrap();
        let bytes1: Vec<Vec<u8>> = first.iter().map(|p| fs::read(p).unwrap()).collect();
        let second = emit_results(&result, dir.path()).unwrap();
        let bytes2: Vec<Vec<u8>> = second.iter().map(|p| fs::read(p).unwrap()).collect();
        assert_eq!(first, second);
        assert_eq!(bytes1, bytes2);
    }
}
