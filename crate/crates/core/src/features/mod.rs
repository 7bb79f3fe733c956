//! Feature extraction from captured windows.

pub mod export;
pub mod extract;
pub mod time;
pub mod wavelet;

pub use extract::{energy_pool, extract_feature_matrix, window_features, EnergyColumn, FeatureMatrix, FeatureMode};
pub use time::{TimeFeature, TimeFeatureParams, TimeSchema};
pub use wavelet::WaveletSpec;
