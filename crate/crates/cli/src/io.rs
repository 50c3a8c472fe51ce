//! Dataset loading shared by the subcommands, and synthetic-pair export.

use std::path::{Path, PathBuf};

use clap::Args;

use flda::data::{load_delimited, load_sparse_indexed, Dataset, DelimitedOptions};
use flda::error::Result;
use flda::synthetic::{generate_pair, SyntheticSpec};

#[derive(Debug, Clone, Args)]
pub struct LoadArgs {
    /// Cell delimiter for delimited files.
    #[arg(long, default_value = ",")]
    pub delimiter: char,
    /// 0-based label column.
    #[arg(long)]
    pub label_col: Option<usize>,
    /// Token marking a missing value (zero-imputed, tracked in the mask).
    #[arg(long)]
    pub missing: Option<String>,
    /// First row holds feature names.
    #[arg(long)]
    pub header: bool,
    /// Parse 1-based sparse `label idx:val` lines instead of delimited text.
    #[arg(long)]
    pub sparse: bool,
}

pub fn load_dataset(path: &Path, args: &LoadArgs) -> Result<Dataset> {
    if args.sparse {
        load_sparse_indexed(path)
    } else {
        load_delimited(
            path,
            &DelimitedOptions {
                delimiter: args.delimiter,
                label_column: args.label_col,
                missing_token: args.missing.clone(),
                has_header: args.header,
            },
        )
    }
}

/// Generate a source/target pair and write them as `source.csv` and
/// `target.csv` with the label in the last column.
pub fn write_synthetic_pair(spec: &SyntheticSpec, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let (source, target) = generate_pair(spec)?;
    let source_path = out_dir.join("source.csv");
    let target_path = out_dir.join("target.csv");
    std::fs::write(&source_path, source.to_delimited_string())?;
    std::fs::write(&target_path, target.to_delimited_string())?;
    Ok(vec![source_path, target_path])
}
