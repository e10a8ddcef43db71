//! One entry point for "give me the best k features" across all selectors.

use crate::baselines::mrmr_select;
use crate::config::{SelectorConfig, SelectorKind};
use crate::data::{preprocess, Dataset};
use crate::scorer::rank_preprocessed;
use crate::Error;

/// Selected features best first, each with the score it was chosen by.
///
/// Graph selectors rank every feature by energy score; mRMR stops after
/// `k` picks and records the greedy criterion at each step.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub kind: SelectorKind,
    pub ranked: Vec<(usize, f64)>,
}

impl Selection {
    pub fn order(&self) -> Vec<usize> {
        self.ranked.iter().map(|&(i, _)| i).collect()
    }

    pub fn top(&self, n: usize) -> Vec<usize> {
        self.ranked.iter().take(n).map(|&(i, _)| i).collect()
    }

    /// `rank,index,name,score` lines with a header, scores at full precision.
    pub fn to_csv(&self, d: &Dataset) -> String {
        let mut out = String::from("rank,index,name,score\n");
        for (rank, &(i, score)) in self.ranked.iter().enumerate() {
            out.push_str(&format!("{},{},{},{:?}\n", rank + 1, i, d.feature_name(i), score));
        }
        out
    }
}

/// Selection on data that has already been preprocessed. `alpha` is ignored
/// by mRMR; `k` only limits mRMR.
pub(crate) fn select_preprocessed(
    d: &Dataset,
    config: &SelectorConfig,
    alpha: f64,
    k: usize,
) -> Result<Selection, Error> {
    let ranked = match config.kind {
        SelectorKind::Mrmr => {
            let s = mrmr_select(d, k.clamp(1, d.n_features()), config.binning)?;
            s.order.into_iter().zip(s.objective_trace).collect()
        }
        _ => {
            let r = rank_preprocessed(d, config, alpha)?;
            r.order.iter().map(|&i| (i, r.scores[i])).collect()
        }
    };
    Ok(Selection {
        kind: config.kind,
        ranked,
    })
}

/// Preprocesses `d` per `config` and selects features. mRMR returns `k`
/// features, graph selectors all of them.
pub fn select_features(d: &Dataset, config: &SelectorConfig, k: usize) -> Result<Selection, Error> {
    config.validate()?;
    let alpha = match config.kind {
        SelectorKind::Mrmr => 0.0,
        _ => config.fixed_alpha()?,
    };
    let pre = preprocess(d, config.resolved_preprocessing());
    select_preprocessed(&pre, config, alpha, k)
}
