//! Infinite feature selection.
//!
//! Features become vertices of a complete weighted graph whose edge weights
//! mix a relevance and a redundancy measure; a feature's energy is the
//! weighted sum of all paths leaving it, obtained in closed form from a
//! regularized matrix geometric series. Three graph constructions are
//! provided:
//!
//! - **IFS**: standard deviation relevance, Spearman redundancy.
//! - **mIFS**: standard deviation relevance, mutual-information redundancy.
//! - **SIFS**: label mutual-information relevance, Spearman redundancy.
//!
//! An mRMR greedy baseline and an avg/max top-N evaluation harness with
//! stratified cross-validation complete the crate.
//!
//! ```no_run
//! use infinisel::{load_csv, rank_features, SelectorConfig, SelectorKind};
//!
//! let data = load_csv("train.csv", Some("label")).unwrap();
//! let config = SelectorConfig::new(SelectorKind::Sifs).with_alpha(0.5);
//! let ranking = rank_features(&data, &config).unwrap();
//! println!("best feature: {}", data.feature_name(ranking.order[0]));
//! ```

pub mod adjacency;
pub mod baselines;
pub mod cli;
pub mod config;
pub mod data;
pub mod eval;
pub mod scorer;
pub mod select;
pub mod stats;

use thiserror::Error;

pub use adjacency::{AdjacencyMatrix, DiagonalMode, GraphVariant};
pub use baselines::{mrmr_select, MrmrSelection};
pub use config::{AlphaChoice, PreprocessChoice, SelectorConfig, SelectorKind};
pub use data::{load_csv, load_libsvm, preprocess, Dataset, PreprocessingScheme};
pub use eval::{cross_validate, evaluate_selector, EvalReport};
pub use scorer::{energy_scores, rank_features, spectral_radius, truncated_energy_scores, FeatureRanking};
pub use select::{select_features, Selection};
pub use stats::{BinningKind, BinningPolicy, MeasureCache};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Data(#[from] data::DataError),
    #[error(transparent)]
    Stats(#[from] stats::StatsError),
    #[error(transparent)]
    Adjacency(#[from] adjacency::AdjacencyError),
    #[error(transparent)]
    Scorer(#[from] scorer::ScorerError),
    #[error("{0} requires class labels, but the dataset has none")]
    LabelsRequired(&'static str),
    #[error("{0}")]
    Config(String),
}

impl Error {
    /// Failures in reading or validating input files.
    pub fn is_input(&self) -> bool {
        matches!(self, Error::Data(_))
    }

    /// Requests that are well-formed but cannot be satisfied for this data.
    pub fn is_config(&self) -> bool {
        match self {
            Error::LabelsRequired(_) | Error::Config(_) | Error::Adjacency(_) => true,
            Error::Stats(e) => !matches!(e, stats::StatsError::LengthMismatch { .. }),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
