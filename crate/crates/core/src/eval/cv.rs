//! Stratified k-fold cross-validation over (selector config, classifier cost) pairs.

use std::collections::HashMap;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::adjacency;
use crate::config::{SelectorConfig, SelectorKind};
use crate::data::{Dataset, PreprocessingScheme, Scaler};
use crate::scorer::energy_scores;
use crate::select::select_preprocessed;
use crate::stats::{build_measure_cache, BinningPolicy, MeasureCache, MeasureRequest};
use crate::Error;

use super::classifier::LinearModel;

/// One grid cell: a selector with a fixed alpha plus a classifier cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvCandidate {
    pub config: SelectorConfig,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvOutcome {
    pub chosen: CvCandidate,
    pub chosen_index: usize,
    /// Mean validation accuracy (averaged over N, then over folds) per grid cell.
    pub scores: Vec<f64>,
}

/// Assigns each sample a fold in `0..folds`, class by class.
///
/// Each class's indices are shuffled and dealt round-robin, with the dealing
/// position carried over from one class to the next so fold sizes differ by
/// at most one.
pub fn stratified_folds(labels: &[i64], folds: usize, seed: u64) -> Result<Vec<usize>, Error> {
    let n = labels.len();
    if folds < 2 {
        return Err(Error::Config(format!("cross-validation needs at least 2 folds, got {folds}")));
    }
    if n < folds {
        return Err(Error::Config(format!("{n} samples cannot be split into {folds} folds")));
    }
    let mut classes = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; n];
    let mut next = 0;
    for &c in &classes {
        let mut members: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
        members.shuffle(&mut rng);
        for i in members {
            assignment[i] = next % folds;
            next += 1;
        }
    }

    for f in 0..folds {
        let mut seen: Option<i64> = None;
        let two_classes = (0..n).filter(|&i| assignment[i] != f).any(|i| match seen {
            None => {
                seen = Some(labels[i]);
                false
            }
            Some(c) => labels[i] != c,
        });
        if !two_classes {
            return Err(Error::Config(format!(
                "training split of fold {} contains a single class; too few samples per class for {folds} folds",
                f + 1
            )));
        }
    }
    Ok(assignment)
}

/// Clips a feature-count grid to `m`; returns the sorted effective grid and
/// the requested values that exceeded `m`.
pub(crate) fn clip_grid(n_grid: &[usize], m: usize) -> Result<(Vec<usize>, Vec<usize>), Error> {
    if n_grid.is_empty() {
        return Err(Error::Config("feature-count grid is empty".into()));
    }
    if let Some(&bad) = n_grid.iter().find(|&&n| n == 0) {
        return Err(Error::Config(format!("feature counts must be at least 1, got {bad}")));
    }
    let clipped: Vec<usize> = n_grid.iter().copied().filter(|&n| n > m).collect();
    let mut effective: Vec<usize> = n_grid.iter().map(|&n| n.min(m)).collect();
    effective.sort_unstable();
    effective.dedup();
    Ok((effective, clipped))
}

/// A preprocessed training set and the evaluation samples mapped with the
/// same scaler.
pub(crate) struct Split {
    pub train: Dataset,
    pub eval_x: Array2<f64>,
    pub eval_y: Vec<i64>,
}

impl Split {
    pub fn new(train: &Dataset, eval_x: &Array2<f64>, eval_y: Vec<i64>, scheme: PreprocessingScheme) -> Result<Split, Error> {
        let scaler = Scaler::fit(train, scheme);
        Ok(Split {
            train: scaler.transform(train)?,
            eval_x: scaler.transform_values(eval_x).map_err(Error::Config)?,
            eval_y,
        })
    }
}

/// Rankings and accuracies on one split, memoized.
///
/// Measure caches are shared by every alpha; accuracies are keyed by the
/// selected feature set (order does not matter to the classifier) and cost.
pub(crate) struct Workspace {
    split: Split,
    epochs: usize,
    caches: Vec<(MeasureRequest, BinningPolicy, MeasureCache)>,
    mrmr: Vec<(BinningPolicy, usize, Vec<usize>)>,
    accuracy: HashMap<(Vec<usize>, u64), f64>,
}

impl Workspace {
    pub fn new(split: Split, epochs: usize) -> Workspace {
        Workspace {
            split,
            epochs,
            caches: Vec::new(),
            mrmr: Vec::new(),
            accuracy: HashMap::new(),
        }
    }

    fn cache(&mut self, request: MeasureRequest, policy: BinningPolicy) -> Result<&MeasureCache, Error> {
        let pos = match self.caches.iter().position(|(r, p, _)| *r == request && *p == policy) {
            Some(pos) => pos,
            None => {
                let cache = build_measure_cache(&self.split.train, policy, request)?;
                self.caches.push((request, policy, cache));
                self.caches.len() - 1
            }
        };
        Ok(&self.caches[pos].2)
    }

    /// Best-first feature order, at least `k` long.
    pub fn order(&mut self, config: &SelectorConfig, alpha: f64, k: usize) -> Result<Vec<usize>, Error> {
        match config.kind.graph_variant() {
            Some(variant) => {
                let c = config.c;
                let diagonal = config.diagonal;
                let cache = self.cache(config.kind.measure_request(), config.binning)?;
                let a = adjacency::build(cache, variant, alpha, diagonal)?;
                Ok(energy_scores(&a, c)?.order)
            }
            None => {
                let key = (config.binning, k);
                if let Some((_, _, order)) = self.mrmr.iter().find(|(p, kk, _)| (*p, *kk) == key) {
                    return Ok(order.clone());
                }
                let order = select_preprocessed(&self.split.train, config, alpha, k)?.order();
                self.mrmr.push((key.0, key.1, order.clone()));
                Ok(order)
            }
        }
    }

    /// Trains on `features` of the training set and returns the accuracy
    /// on the evaluation samples.
    pub fn accuracy(&mut self, features: &[usize], cost: f64) -> Result<f64, Error> {
        let mut key = features.to_vec();
        key.sort_unstable();
        let key = (key, cost.to_bits());
        if let Some(&acc) = self.accuracy.get(&key) {
            return Ok(acc);
        }
        let (model, x) = self.fit(&key.0, cost)?;
        let acc = model.accuracy(x.view(), &self.split.eval_y);
        self.accuracy.insert(key, acc);
        Ok(acc)
    }

    /// Accuracy plus the binary AUC when there are two classes.
    pub fn accuracy_and_auc(&mut self, features: &[usize], cost: f64) -> Result<(f64, Option<f64>), Error> {
        let mut sorted = features.to_vec();
        sorted.sort_unstable();
        let (model, x) = self.fit(&sorted, cost)?;
        Ok((model.accuracy(x.view(), &self.split.eval_y), model.auc(x.view(), &self.split.eval_y)))
    }

    fn fit(&self, sorted: &[usize], cost: f64) -> Result<(LinearModel, Array2<f64>), Error> {
        let train_x = self.split.train.values().select(Axis(1), sorted);
        let labels = self.split.train.labels().expect("evaluation splits are labeled");
        let model = LinearModel::fit(train_x.view(), labels, cost, self.epochs)?;
        Ok((model, self.split.eval_x.select(Axis(1), sorted)))
    }

    pub fn train(&self) -> &Dataset {
        &self.split.train
    }
}

fn alpha_of(candidate: &CvCandidate) -> Result<f64, Error> {
    match candidate.config.kind {
        SelectorKind::Mrmr => Ok(candidate.config.fixed_alpha().unwrap_or(0.0)),
        _ => candidate.config.fixed_alpha(),
    }
}

/// Picks the grid cell with the best mean validation accuracy.
///
/// Each cell's score is the accuracy averaged over the (clipped) `n_grid`,
/// then over folds. Ties go to the smaller alpha, then the smaller cost,
/// then the earlier cell.
pub fn cross_validate(
    d: &Dataset,
    grid: &[CvCandidate],
    folds: usize,
    seed: u64,
    n_grid: &[usize],
    epochs: usize,
) -> Result<CvOutcome, Error> {
    if grid.is_empty() {
        return Err(Error::Config("cross-validation grid is empty".into()));
    }
    let labels = d.labels().ok_or(Error::LabelsRequired("cross-validation"))?;
    let m = d.n_features();
    let (n_eff, _) = clip_grid(n_grid, m)?;
    let k = *n_eff.last().unwrap();
    let alphas = grid.iter().map(alpha_of).collect::<Result<Vec<_>, _>>()?;
    for c in grid {
        c.config.validate()?;
        if c.cost.is_nan() || c.cost <= 0.0 {
            return Err(Error::Config(format!("classifier cost must be positive, got {}", c.cost)));
        }
    }
    let assignment = stratified_folds(labels, folds, seed)?;

    let mut schemes: Vec<PreprocessingScheme> = grid.iter().map(|c| c.config.resolved_preprocessing()).collect();
    schemes.sort_by_key(|s| s.as_str());
    schemes.dedup();

    let per_fold: Vec<Vec<f64>> = (0..folds)
        .into_par_iter()
        .map(|f| -> Result<Vec<f64>, Error> {
            let train_idx: Vec<usize> = (0..d.n_samples()).filter(|&i| assignment[i] != f).collect();
            let val_idx: Vec<usize> = (0..d.n_samples()).filter(|&i| assignment[i] == f).collect();
            let train = d.select_samples(&train_idx)?;
            let val_x = d.values().select(Axis(0), &val_idx);
            let val_y: Vec<i64> = val_idx.iter().map(|&i| labels[i]).collect();

            let mut spaces = schemes
                .iter()
                .map(|&s| Ok((s, Workspace::new(Split::new(&train, &val_x, val_y.clone(), s)?, epochs))))
                .collect::<Result<Vec<_>, Error>>()?;

            grid.iter()
                .zip(&alphas)
                .map(|(c, &alpha)| {
                    let scheme = c.config.resolved_preprocessing();
                    let ws = &mut spaces.iter_mut().find(|(s, _)| *s == scheme).unwrap().1;
                    let order = ws.order(&c.config, alpha, k)?;
                    let mut total = 0.0;
                    for &n in &n_eff {
                        total += ws.accuracy(&order[..n], c.cost)?;
                    }
                    Ok(total / n_eff.len() as f64)
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;

    let scores: Vec<f64> = (0..grid.len())
        .map(|g| per_fold.iter().map(|fold| fold[g]).sum::<f64>() / folds as f64)
        .collect();

    let mut best = 0;
    for g in 1..grid.len() {
        let better = scores[g] > scores[best]
            || (scores[g] == scores[best]
                && (alphas[g] < alphas[best]
                    || (alphas[g] == alphas[best] && grid[g].cost < grid[best].cost)));
        if better {
            best = g;
        }
    }
    Ok(CvOutcome {
        chosen: grid[best],
        chosen_index: best,
        scores,
    })
}
