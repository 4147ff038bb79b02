//! Ground truth from gold patches, ranking metrics and dataset reports.

mod bootstrap;
mod diff;
mod ground_truth;
mod instance;
mod metrics;
mod report;

pub use bootstrap::{bootstrap_ci, DEFAULT_RESAMPLES, DEFAULT_SEED};
pub use diff::{parse_unified_diff, touched_lines, FilePatch, Hunk, HunkLine};
pub use ground_truth::{extract_ground_truth, GroundTruth};
pub use instance::{load_instances, LocalizationInstance};
pub use metrics::{acc_at_k, mrr_at_k, recall_at_k};
pub use report::{evaluate_dataset, BootstrapSettings, EvalReport, InstanceResult, MetricTriple};
