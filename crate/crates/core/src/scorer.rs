//! Energy scores over the feature graph.
//!
//! A feature's score sums weighted path products of every length starting
//! at that feature. With `r = c / rho(A)` the series converges and
//!
//! ```text
//! s' = ((I - rA)^-1 - I) 1 = (I - rA)^-1 (rA 1)
//! ```
//!
//! which is computed here with one Cholesky solve (`I - rA` is symmetric
//! positive definite whenever `r * rho(A) < 1`).

use log::warn;
use ndarray::Array2;
use thiserror::Error as ThisError;

use crate::adjacency::{self, AdjacencyMatrix};
use crate::config::SelectorConfig;
use crate::data::{preprocess, Dataset};
use crate::stats::build_measure_cache;
use crate::Error;

pub const POWER_TOL: f64 = 1e-10;
pub const POWER_MAX_ITER: usize = 10_000;

/// Scores closer than this (relative to the largest score) count as tied.
pub const TIE_RTOL: f64 = 1e-12;

#[derive(Debug, ThisError, PartialEq)]
pub enum ScorerError {
    #[error("adjacency matrix is all zeros")]
    ZeroMatrix,
    #[error("power iteration did not converge in {0} iterations")]
    NonConvergence(usize),
    #[error("regularization fraction c must lie in (0, 1), got {0}")]
    InvalidFraction(f64),
    #[error("series weight r must be positive and path length at least 1")]
    InvalidSeries,
    #[error("system I - rA is not positive definite")]
    Singular,
}

/// Features ordered best first, with their energy scores.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRanking {
    pub order: Vec<usize>,
    /// Score per feature index (not per rank).
    pub scores: Vec<f64>,
    pub r_used: f64,
    /// 0 when the adjacency matrix was all zeros.
    pub spectral_radius: f64,
}

impl FeatureRanking {
    pub fn top(&self, n: usize) -> &[usize] {
        &self.order[..n.min(self.order.len())]
    }
}

fn mat_vec(a: &Array2<f64>, x: &[f64]) -> Vec<f64> {
    a.rows()
        .into_iter()
        .map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum())
        .collect()
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Largest eigenvalue magnitude of a symmetric non-negative matrix by power
/// iteration from the all-ones vector.
///
/// The estimate is `||A x||` for unit `x`, which converges to `rho(A)` even
/// when `-rho(A)` is also an eigenvalue (bipartite graphs).
pub fn spectral_radius(a: &AdjacencyMatrix, tol: f64, max_iter: usize) -> Result<f64, ScorerError> {
    let m = a.n_features();
    if a.a.iter().all(|&v| v == 0.0) {
        return Err(ScorerError::ZeroMatrix);
    }
    if m == 1 {
        return Ok(a.a[[0, 0]].abs());
    }
    let mut x = vec![1.0 / (m as f64).sqrt(); m];
    let mut previous = f64::NAN;
    for _ in 0..max_iter {
        let y = mat_vec(&a.a, &x);
        let lambda = norm(&y);
        if lambda == 0.0 {
            return Err(ScorerError::NonConvergence(0));
        }
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / lambda;
        }
        if (lambda - previous).abs() <= tol * lambda {
            return Ok(lambda);
        }
        previous = lambda;
    }
    Err(ScorerError::NonConvergence(max_iter))
}

/// Solves `M x = b` for symmetric positive definite `M`.
fn cholesky_solve(mut l: Array2<f64>, b: &[f64]) -> Result<Vec<f64>, ScorerError> {
    let m = b.len();
    for j in 0..m {
        let mut d = l[[j, j]];
        for k in 0..j {
            d -= l[[j, k]] * l[[j, k]];
        }
        if d.is_nan() || d <= 0.0 {
            return Err(ScorerError::Singular);
        }
        let d = d.sqrt();
        l[[j, j]] = d;
        for i in j + 1..m {
            let mut s = l[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / d;
        }
    }
    let mut z = b.to_vec();
    for i in 0..m {
        for k in 0..i {
            z[i] -= l[[i, k]] * z[k];
        }
        z[i] /= l[[i, i]];
    }
    for i in (0..m).rev() {
        for k in i + 1..m {
            z[i] -= l[[k, i]] * z[k];
        }
        z[i] /= l[[i, i]];
    }
    Ok(z)
}

/// Orders features by descending score. Scores within [`TIE_RTOL`] of the
/// head of their run are tied: they are reported with the head's value and
/// ordered by ascending index.
fn order_by_score(raw: &[f64]) -> (Vec<usize>, Vec<f64>) {
    let m = raw.len();
    let mut sorted: Vec<usize> = (0..m).collect();
    sorted.sort_by(|&i, &j| raw[j].total_cmp(&raw[i]).then(i.cmp(&j)));
    let scale = raw.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let tol = TIE_RTOL * scale;

    let mut order = Vec::with_capacity(m);
    let mut scores = raw.to_vec();
    let mut start = 0;
    while start < m {
        let head = raw[sorted[start]];
        let mut end = start + 1;
        while end < m && head - raw[sorted[end]] <= tol {
            end += 1;
        }
        let mut group = sorted[start..end].to_vec();
        group.sort_unstable();
        for &i in &group {
            scores[i] = head;
        }
        order.extend(group);
        start = end;
    }
    (order, scores)
}

/// Regularized energy scores `((I - rA)^-1 - I) 1` with `r = c / rho(A)`.
pub fn energy_scores(a: &AdjacencyMatrix, c: f64) -> Result<FeatureRanking, ScorerError> {
    if !(c > 0.0 && c < 1.0) {
        return Err(ScorerError::InvalidFraction(c));
    }
    let m = a.n_features();
    let rho = match spectral_radius(a, POWER_TOL, POWER_MAX_ITER) {
        Ok(rho) => rho,
        Err(ScorerError::ZeroMatrix) => {
            warn!("adjacency matrix is all zeros; every feature scores 0");
            return Ok(FeatureRanking {
                order: (0..m).collect(),
                scores: vec![0.0; m],
                r_used: c,
                spectral_radius: 0.0,
            });
        }
        Err(e) => return Err(e),
    };
    let r = c / rho;
    let system = Array2::from_shape_fn((m, m), |(i, j)| {
        let identity = if i == j { 1.0 } else { 0.0 };
        identity - r * a.a[[i, j]]
    });
    let rhs: Vec<f64> = a.a.rows().into_iter().map(|row| r * row.sum()).collect();
    let raw = cholesky_solve(system, &rhs)?;
    let (order, scores) = order_by_score(&raw);
    Ok(FeatureRanking {
        order,
        scores,
        r_used: r,
        spectral_radius: rho,
    })
}

/// Partial path sums `sum_{l=1..max_len} r^l A^l 1` by repeated
/// matrix-vector products.
pub fn truncated_energy_scores(a: &AdjacencyMatrix, r: f64, max_len: usize) -> Result<Vec<f64>, ScorerError> {
    if r.is_nan() || r <= 0.0 || max_len < 1 {
        return Err(ScorerError::InvalidSeries);
    }
    let m = a.n_features();
    let mut walk = vec![1.0; m];
    let mut total = vec![0.0; m];
    for _ in 0..max_len {
        walk = mat_vec(&a.a, &walk).into_iter().map(|v| r * v).collect();
        for (t, w) in total.iter_mut().zip(&walk) {
            *t += w;
        }
    }
    Ok(total)
}

/// Path length after which the series tail `c^(L+1) / (1 - c)` is below `eps`.
pub fn truncation_length(c: f64, eps: f64) -> usize {
    ((eps * (1.0 - c)).ln() / c.ln()).ceil() as usize
}

/// Ranks the features of an already preprocessed dataset with a fixed alpha.
pub(crate) fn rank_preprocessed(d: &Dataset, config: &SelectorConfig, alpha: f64) -> Result<FeatureRanking, Error> {
    let variant = config.kind.graph_variant().ok_or_else(|| {
        Error::Config("mrmr produces a greedy selection, not a graph ranking".into())
    })?;
    if d.n_features() < 2 {
        return Err(Error::Config(format!(
            "ranking needs at least 2 features, dataset has {}",
            d.n_features()
        )));
    }
    if config.kind.is_supervised() && d.labels().is_none() {
        return Err(Error::LabelsRequired(config.kind.as_str()));
    }
    let cache = build_measure_cache(d, config.binning, config.kind.measure_request())?;
    let adjacency = adjacency::build(&cache, variant, alpha, config.diagonal)?;
    Ok(energy_scores(&adjacency, config.c)?)
}

/// Preprocess, measure, build the graph and score it.
pub fn rank_features(d: &Dataset, config: &SelectorConfig) -> Result<FeatureRanking, Error> {
    config.validate()?;
    let alpha = config.fixed_alpha()?;
    let pre = preprocess(d, config.resolved_preprocessing());
    rank_preprocessed(&pre, config, alpha)
}
