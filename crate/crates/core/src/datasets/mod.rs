//! Ingestion, label rules, synthetic data, PCA scaling, corruption and
//! splitting.

mod pca;
mod prepared;
mod raw;
mod split;
mod synthetic;

pub use pca::{pca_scale, PcaTransform};
pub use prepared::{prepare, subsample, PrepareOptions, PreparedDataset, Provenance, SubsetMode};
pub use raw::{binarize_labels, impute_median, load_csv, read_csv, CsvSchema, LabelRule, RawDataset};
pub use split::{corrupt_labels, flip_at, split, Corruption, SplitPlan, SplitSpec};
pub use synthetic::{make_gaussian_blobs, make_gaussian_blobs_with, DEFAULT_CENTRES};
