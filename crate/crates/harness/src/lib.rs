//! Experiment driver: LLE spectra on grids against the analytic spectrum of the
//! limiting operator, with CSV and SVG output.

pub mod cli;
pub mod compare;
pub mod config;
pub mod output;
pub mod plot;
pub mod verify;

pub use compare::{run_compare, ComparisonReport, ComparisonRow};
pub use config::ExperimentConfig;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: lle_spectra::Error,
    },
    #[error("config: {0}")]
    Config(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

/// Tags library errors with the pipeline stage that produced them.
pub trait Stage<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> Stage<T> for lle_spectra::Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|source| HarnessError::Stage { stage, source })
    }
}
