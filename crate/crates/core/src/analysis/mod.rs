//! Indicators computed from game records, and the report files built from
//! them.

mod aggregate;
pub mod export;
mod indicators;
mod quantile;
mod rsr;

pub use aggregate::{
    abundance_label, aggregate, summarize_setting, DayBox, Distribution, PlayerSurvival,
    RunCurves, RunSummary, SettingSummary,
};
pub use indicators::{compute_indicators, IndicatorSet};
pub use quantile::{quantile_sorted, BoxStats, QUANTILE_METHOD, WHISKER_METHOD};
pub use rsr::{compute_rsr, mean_rsr, round_ratio, Rsr};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("record has schema version {0}, this build reads version {expected}", expected = crate::SCHEMA_VERSION)]
    SchemaVersion(u32),
    #[error("setting {setting_id} mixes schema versions {a} and {b}")]
    MixedSchema { setting_id: u32, a: u32, b: u32 },
    #[error("setting {0} has no records")]
    EmptyGroup(u32),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
