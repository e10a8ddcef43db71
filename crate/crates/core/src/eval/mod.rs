//! The avg/max top-N protocol: rank on the training split, train a linear
//! classifier on the top N features for each N, test on the held-out split.

pub mod classifier;
pub mod cv;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use log::warn;
use serde::Serialize;

use crate::config::{AlphaChoice, SelectorConfig, SelectorKind, ALPHA_GRID, COST_GRID};
use crate::data::{Dataset, PreprocessingScheme};
use crate::select::{select_preprocessed, Selection};
use crate::Error;

pub use classifier::{auc, train_linear, LinearClassifier, LinearModel, DEFAULT_EPOCHS};
pub use cv::{cross_validate, stratified_folds, CvCandidate, CvOutcome};

use cv::{clip_grid, Split, Workspace};

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOptions {
    pub folds: usize,
    pub epochs: usize,
    pub alpha_grid: Vec<f64>,
    pub cost_grid: Vec<f64>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            folds: 5,
            epochs: DEFAULT_EPOCHS,
            alpha_grid: ALPHA_GRID.to_vec(),
            cost_grid: COST_GRID.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub selector: SelectorKind,
    pub preprocessing: PreprocessingScheme,
    pub n_grid: Vec<usize>,
    /// Requested feature counts larger than the feature count.
    pub clipped_n: Vec<usize>,
    pub per_n_accuracy: BTreeMap<usize, f64>,
    /// Present for two-class problems only.
    pub per_n_auc: Option<BTreeMap<usize, f64>>,
    pub avg: f64,
    pub max: f64,
    /// `None` for mRMR, which has no alpha.
    pub chosen_alpha: Option<f64>,
    pub chosen_classifier_cost: f64,
    pub cv_accuracy: f64,
    pub fold_seed: u64,
    /// Ranking computed on the training split, best first.
    #[serde(skip)]
    pub selection: Selection,
}

impl EvalReport {
    /// Line-oriented `key=value` form.
    pub fn to_text(&self) -> String {
        let join = |v: &[usize]| v.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",");
        let mut out = String::new();
        let _ = writeln!(out, "selector={}", self.selector);
        let _ = writeln!(out, "preprocessing={}", self.preprocessing);
        let _ = writeln!(out, "n_grid={}", join(&self.n_grid));
        let _ = writeln!(out, "clipped_n={}", join(&self.clipped_n));
        for (n, acc) in &self.per_n_accuracy {
            let _ = writeln!(out, "accuracy@{n}={acc}");
        }
        if let Some(aucs) = &self.per_n_auc {
            for (n, a) in aucs {
                let _ = writeln!(out, "auc@{n}={a}");
            }
        }
        let _ = writeln!(out, "avg={}", self.avg);
        let _ = writeln!(out, "max={}", self.max);
        let alpha = self.chosen_alpha.map_or("none".to_string(), |a| a.to_string());
        let _ = writeln!(out, "chosen_alpha={alpha}");
        let _ = writeln!(out, "chosen_classifier_cost={}", self.chosen_classifier_cost);
        let _ = writeln!(out, "cv_accuracy={}", self.cv_accuracy);
        let _ = writeln!(out, "fold_seed={}", self.fold_seed);
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

pub fn evaluate_selector(
    train: &Dataset,
    test: &Dataset,
    config: &SelectorConfig,
    n_grid: &[usize],
    seed: u64,
) -> Result<EvalReport, Error> {
    evaluate_selector_with(train, test, config, n_grid, seed, &EvalOptions::default())
}

/// Chooses alpha (when set to cv) and the classifier cost by cross-validation
/// on `train`, then ranks on all of `train` and tests the top-N classifiers
/// on `test`. Nothing computed from `test` reaches the ranking.
pub fn evaluate_selector_with(
    train: &Dataset,
    test: &Dataset,
    config: &SelectorConfig,
    n_grid: &[usize],
    seed: u64,
    options: &EvalOptions,
) -> Result<EvalReport, Error> {
    config.validate()?;
    if train.labels().is_none() {
        return Err(Error::LabelsRequired("evaluation"));
    }
    let test_labels = test.labels().ok_or(Error::LabelsRequired("evaluation"))?;
    let m = train.n_features();
    if test.n_features() != m {
        return Err(Error::Config(format!(
            "training data has {m} features but test data has {}",
            test.n_features()
        )));
    }
    if config.kind.graph_variant().is_some() && m < 2 {
        return Err(Error::Config(format!("ranking needs at least 2 features, dataset has {m}")));
    }
    if options.cost_grid.is_empty() {
        return Err(Error::Config("classifier cost grid is empty".into()));
    }
    let (n_eff, clipped) = clip_grid(n_grid, m)?;
    if !clipped.is_empty() {
        warn!("feature counts {clipped:?} exceed the {m} available features; clipped to {m}");
    }

    let alphas: Vec<f64> = match (config.kind, config.alpha) {
        (SelectorKind::Mrmr, _) => vec![0.0],
        (_, AlphaChoice::Fixed(a)) => vec![a],
        (_, AlphaChoice::Cv) => options.alpha_grid.clone(),
    };
    if alphas.is_empty() {
        return Err(Error::Config("alpha grid is empty".into()));
    }
    let grid: Vec<CvCandidate> = alphas
        .iter()
        .flat_map(|&a| {
            options.cost_grid.iter().map(move |&cost| CvCandidate {
                config: SelectorConfig {
                    alpha: AlphaChoice::Fixed(a),
                    ..*config
                },
                cost,
            })
        })
        .collect();
    let cv = cross_validate(train, &grid, options.folds, seed, &n_eff, options.epochs)?;
    let alpha = alpha_value(&cv.chosen.config);
    let cost = cv.chosen.cost;

    let scheme = config.resolved_preprocessing();
    let split = Split::new(train, test.values(), test_labels.to_vec(), scheme)?;
    let mut ws = Workspace::new(split, options.epochs);
    let selection = select_preprocessed(ws.train(), config, alpha, *n_eff.last().unwrap())?;
    let order = selection.order();

    let mut per_n_accuracy = BTreeMap::new();
    let mut per_n_auc = Some(BTreeMap::new());
    for &n in &n_eff {
        let (acc, auc) = ws.accuracy_and_auc(&order[..n], cost)?;
        per_n_accuracy.insert(n, acc);
        per_n_auc = match (per_n_auc, auc) {
            (Some(mut map), Some(a)) => {
                map.insert(n, a);
                Some(map)
            }
            _ => None,
        };
    }
    let avg = per_n_accuracy.values().sum::<f64>() / per_n_accuracy.len() as f64;
    let max = per_n_accuracy.values().copied().fold(f64::NEG_INFINITY, f64::max);

    Ok(EvalReport {
        selector: config.kind,
        preprocessing: scheme,
        n_grid: n_eff,
        clipped_n: clipped,
        per_n_accuracy,
        per_n_auc,
        avg,
        max,
        chosen_alpha: (config.kind != SelectorKind::Mrmr).then_some(alpha),
        chosen_classifier_cost: cost,
        cv_accuracy: cv.scores[cv.chosen_index],
        fold_seed: seed,
        selection,
    })
}

fn alpha_value(config: &SelectorConfig) -> f64 {
    match config.alpha {
        AlphaChoice::Fixed(a) => a,
        AlphaChoice::Cv => unreachable!("grid cells carry fixed alphas"),
    }
}
