//! File formats: pattern grids, IDX datasets, run configuration, reports.

pub mod config;
pub mod idx;
pub mod patterns;
pub mod report;

pub use config::{IdxSource, McSection, NetworkOptions, PatternSource, RunConfig, SweepSection, TextSource};
pub use idx::{load_idx, load_idx_labels, parse_idx_images, parse_idx_labels, IdxImages};
pub use patterns::{load_pattern_set, load_patterns, parse_patterns, serialize_patterns, PatternSet};
