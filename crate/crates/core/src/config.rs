//! Selector configuration shared by the library entry points and the CLI.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::adjacency::{DiagonalMode, GraphVariant};
use crate::data::PreprocessingScheme;
use crate::stats::{BinningPolicy, MeasureRequest};
use crate::Error;

/// Alpha values tried when alpha is chosen by cross-validation.
pub const ALPHA_GRID: [f64; 11] = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

/// Classifier cost values tried by cross-validation.
pub const COST_GRID: [f64; 5] = [0.01, 0.1, 1.0, 10.0, 100.0];

/// Feature counts at which the avg/max protocol evaluates a ranking.
pub const DEFAULT_N_GRID: [usize; 5] = [10, 50, 100, 150, 200];

pub const DEFAULT_C: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectorKind {
    Ifs,
    Mifs,
    Sifs,
    Mrmr,
}

impl SelectorKind {
    pub const ALL: [SelectorKind; 4] = [
        SelectorKind::Ifs,
        SelectorKind::Mifs,
        SelectorKind::Sifs,
        SelectorKind::Mrmr,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SelectorKind::Ifs => "ifs",
            SelectorKind::Mifs => "mifs",
            SelectorKind::Sifs => "sifs",
            SelectorKind::Mrmr => "mrmr",
        }
    }

    /// The graph variant behind this selector; `None` for mRMR.
    pub fn graph_variant(self) -> Option<GraphVariant> {
        match self {
            SelectorKind::Ifs => Some(GraphVariant::Ifs),
            SelectorKind::Mifs => Some(GraphVariant::Mifs),
            SelectorKind::Sifs => Some(GraphVariant::Sifs),
            SelectorKind::Mrmr => None,
        }
    }

    pub fn is_supervised(self) -> bool {
        matches!(self, SelectorKind::Sifs | SelectorKind::Mrmr)
    }

    /// Unsupervised variants normalize, supervised ones standardize.
    pub fn default_preprocessing(self) -> PreprocessingScheme {
        if self.is_supervised() {
            PreprocessingScheme::Standardize
        } else {
            PreprocessingScheme::Normalize
        }
    }

    pub fn measure_request(self) -> MeasureRequest {
        match self {
            SelectorKind::Ifs => MeasureRequest {
                spearman: true,
                ..Default::default()
            },
            SelectorKind::Mifs => MeasureRequest {
                mi_matrix: true,
                ..Default::default()
            },
            SelectorKind::Sifs => MeasureRequest {
                spearman: true,
                relevance: true,
                ..Default::default()
            },
            SelectorKind::Mrmr => MeasureRequest::default(),
        }
    }
}

impl fmt::Display for SelectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SelectorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SelectorKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown variant {s:?}; valid variants: ifs, mifs, sifs, mrmr"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaChoice {
    Fixed(f64),
    /// Picked from [`ALPHA_GRID`] by cross-validation on training data.
    Cv,
}

impl FromStr for AlphaChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "cv" {
            return Ok(AlphaChoice::Cv);
        }
        match s.parse::<f64>() {
            Ok(a) if (0.0..=1.0).contains(&a) => Ok(AlphaChoice::Fixed(a)),
            _ => Err(format!("alpha must be a number in [0, 1] or \"cv\", got {s:?}")),
        }
    }
}

impl fmt::Display for AlphaChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaChoice::Fixed(a) => write!(f, "{a}"),
            AlphaChoice::Cv => f.write_str("cv"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PreprocessChoice {
    Scheme(PreprocessingScheme),
    /// Resolves per selector, see [`SelectorKind::default_preprocessing`].
    Auto,
}

impl FromStr for PreprocessChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(PreprocessChoice::Auto);
        }
        s.parse().map(PreprocessChoice::Scheme).map_err(|_| {
            format!("unknown preprocessing {s:?} (expected none, normalize, standardize or auto)")
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectorConfig {
    pub kind: SelectorKind,
    pub alpha: AlphaChoice,
    /// Fraction of the convergence radius used as the series weight, r = c / rho(A).
    pub c: f64,
    pub preprocessing: PreprocessChoice,
    pub binning: BinningPolicy,
    pub diagonal: DiagonalMode,
    pub seed: u64,
}

impl SelectorConfig {
    pub fn new(kind: SelectorKind) -> SelectorConfig {
        SelectorConfig {
            kind,
            alpha: AlphaChoice::Fixed(0.5),
            c: DEFAULT_C,
            preprocessing: PreprocessChoice::Auto,
            binning: BinningPolicy::default(),
            diagonal: DiagonalMode::Formula,
            seed: 0,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> SelectorConfig {
        self.alpha = AlphaChoice::Fixed(alpha);
        self
    }

    pub fn with_preprocessing(mut self, scheme: PreprocessingScheme) -> SelectorConfig {
        self.preprocessing = PreprocessChoice::Scheme(scheme);
        self
    }

    pub fn resolved_preprocessing(&self) -> PreprocessingScheme {
        match self.preprocessing {
            PreprocessChoice::Scheme(s) => s,
            PreprocessChoice::Auto => self.kind.default_preprocessing(),
        }
    }

    /// The fixed alpha, or an error when alpha is still "cv".
    pub fn fixed_alpha(&self) -> Result<f64, Error> {
        match self.alpha {
            AlphaChoice::Fixed(a) => Ok(a),
            AlphaChoice::Cv => Err(Error::Config(
                "alpha=cv must be resolved by cross-validation before ranking".into(),
            )),
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if let AlphaChoice::Fixed(a) = self.alpha {
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::Config(format!("alpha must lie in [0, 1], got {a}")));
            }
        }
        if !(self.c > 0.0 && self.c < 1.0) {
            return Err(Error::Config(format!("c must lie in (0, 1), got {}", self.c)));
        }
        self.binning
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auto_preprocessing_rule() {
        assert_eq!(SelectorConfig::new(SelectorKind::Ifs).resolved_preprocessing(), PreprocessingScheme::Normalize);
        assert_eq!(SelectorConfig::new(SelectorKind::Mifs).resolved_preprocessing(), PreprocessingScheme::Normalize);
        assert_eq!(SelectorConfig::new(SelectorKind::Sifs).resolved_preprocessing(), PreprocessingScheme::Standardize);
        assert_eq!(SelectorConfig::new(SelectorKind::Mrmr).resolved_preprocessing(), PreprocessingScheme::Standardize);
        let explicit = SelectorConfig::new(SelectorKind::Sifs).with_preprocessing(PreprocessingScheme::None);
        assert_eq!(explicit.resolved_preprocessing(), PreprocessingScheme::None);
    }

    #[test]
    fn parse_flags() {
        assert_eq!("cv".parse::<AlphaChoice>().unwrap(), AlphaChoice::Cv);
        assert_eq!("0.25".parse::<AlphaChoice>().unwrap(), AlphaChoice::Fixed(0.25));
        assert!("1.5".parse::<AlphaChoice>().is_err());
        assert_eq!("auto".parse::<PreprocessChoice>().unwrap(), PreprocessChoice::Auto);
        let err = "svm".parse::<SelectorKind>().unwrap_err();
        assert!(err.contains("ifs, mifs, sifs, mrmr"));
    }

    #[test]
    fn validate_ranges() {
        let mut c = SelectorConfig::new(SelectorKind::Ifs);
        assert!(c.validate().is_ok());
        c.c = 1.0;
        assert!(c.validate().is_err());
    }
}
