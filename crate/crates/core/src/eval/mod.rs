//! Metrics, cross-validation, grid search and reports.

pub mod cv;
pub mod metrics;
pub mod report;
pub mod timing;

pub use cv::{cross_validate, grid_search, stratified_k_fold, stratified_split, CvPlan, CvResult, GridResult};
pub use metrics::{balanced_accuracy, Confusion};
pub use timing::{timing_report, Timing};
