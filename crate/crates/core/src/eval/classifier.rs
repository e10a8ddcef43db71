//! Linear max-margin classifier trained by averaged batch subgradient descent
//! on the hinge loss.
//!
//! Objective, with the bias folded in as a regularized constant feature:
//!
//! ```text
//! F(w, b) = (lambda / 2) (|w|^2 + b^2) + mean_i max(0, 1 - y_i (w . x_i + b)),  lambda = 1 / cost
//! ```
//!
//! Because the loss is a mean, duplicating every training sample leaves the
//! objective (and the iterates) unchanged.

use ndarray::{Array1, ArrayView1, ArrayView2};

use crate::Error;

pub const DEFAULT_EPOCHS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearClassifier {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub cost: f64,
    /// Best objective reached after each epoch (non-increasing).
    pub objective_trace: Vec<f64>,
}

impl LinearClassifier {
    pub fn decision(&self, x: ArrayView1<'_, f64>) -> f64 {
        x.iter().zip(&self.weights).map(|(a, w)| a * w).sum::<f64>() + self.bias
    }

    pub fn predict(&self, x: ArrayView1<'_, f64>) -> bool {
        self.decision(x) > 0.0
    }
}

fn objective(x: &ArrayView2<'_, f64>, y: &Array1<f64>, w: &Array1<f64>, b: f64, lambda: f64) -> f64 {
    let reg = 0.5 * lambda * (w.dot(w) + b * b);
    let margins = (x.dot(w) + b) * y;
    reg + margins.mapv(|m| (1.0 - m).max(0.0)).sum() / y.len() as f64
}

/// Trains a binary classifier; `positive[i]` marks the +1 class.
pub fn train_linear(
    x: ArrayView2<'_, f64>,
    positive: &[bool],
    cost: f64,
    epochs: usize,
) -> Result<LinearClassifier, Error> {
    let (n, k) = x.dim();
    if n != positive.len() {
        return Err(Error::Config(format!("{n} samples but {} labels", positive.len())));
    }
    if k < 1 {
        return Err(Error::Config("classifier needs at least one feature".into()));
    }
    if positive.iter().all(|&p| p) || positive.iter().all(|&p| !p) {
        return Err(Error::Config("classifier training data contains a single class".into()));
    }
    if cost.is_nan() || cost <= 0.0 || epochs < 1 {
        return Err(Error::Config(format!("classifier needs cost > 0 and epochs >= 1, got {cost}, {epochs}")));
    }

    let lambda = 1.0 / cost;
    let radius = 1.0 / lambda.sqrt();
    let y: Array1<f64> = positive.iter().map(|&p| if p { 1.0 } else { -1.0 }).collect();
    let inv_n = 1.0 / n as f64;

    let mut w = Array1::<f64>::zeros(k);
    let mut b = 0.0;
    let mut avg_w = Array1::<f64>::zeros(k);
    let mut avg_b = 0.0;
    let mut best = (avg_w.clone(), avg_b, f64::INFINITY);
    let mut trace = Vec::with_capacity(epochs);

    for t in 1..=epochs {
        // subgradient of the mean hinge loss at the current iterate:
        // samples inside the margin contribute -y_i x_i
        let margins = (x.dot(&w) + b) * &y;
        let coef: Array1<f64> = margins
            .iter()
            .zip(&y)
            .map(|(&m, &yi)| if m < 1.0 { -yi } else { 0.0 })
            .collect();
        let grad = x.t().dot(&coef);
        let grad_b = coef.sum();

        let eta = 1.0 / (lambda * t as f64);
        let shrink = 1.0 - eta * lambda;
        w *= shrink;
        w.scaled_add(-eta * inv_n, &grad);
        b = shrink * b - eta * grad_b * inv_n;

        let norm = (w.dot(&w) + b * b).sqrt();
        if norm > radius {
            let s = radius / norm;
            w *= s;
            b *= s;
        }

        let weight = 1.0 / t as f64;
        avg_w.zip_mut_with(&w, |a, &wj| *a += (wj - *a) * weight);
        avg_b += (b - avg_b) * weight;

        let f = objective(&x, &y, &avg_w, avg_b, lambda);
        if f < best.2 {
            best = (avg_w.clone(), avg_b, f);
        }
        trace.push(best.2);
    }

    Ok(LinearClassifier {
        weights: best.0.to_vec(),
        bias: best.1,
        cost,
        objective_trace: trace,
    })
}

/// One-vs-rest wrapper; two classes use a single binary machine.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub classes: Vec<i64>,
    pub machines: Vec<LinearClassifier>,
}

impl LinearModel {
    pub fn fit(x: ArrayView2<'_, f64>, labels: &[i64], cost: f64, epochs: usize) -> Result<LinearModel, Error> {
        let mut classes = labels.to_vec();
        classes.sort_unstable();
        classes.dedup();
        if classes.len() < 2 {
            return Err(Error::Config("classifier training data contains a single class".into()));
        }
        let targets: Vec<i64> = if classes.len() == 2 {
            vec![classes[1]]
        } else {
            classes.clone()
        };
        let machines = targets
            .iter()
            .map(|&c| {
                let positive: Vec<bool> = labels.iter().map(|&l| l == c).collect();
                train_linear(x, &positive, cost, epochs)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(LinearModel { classes, machines })
    }

    pub fn predict(&self, x: ArrayView1<'_, f64>) -> i64 {
        if self.machines.len() == 1 {
            return if self.machines[0].predict(x) {
                self.classes[1]
            } else {
                self.classes[0]
            };
        }
        // highest decision value, lowest class on ties
        let mut best = (0usize, f64::NEG_INFINITY);
        for (c, m) in self.machines.iter().enumerate() {
            let v = m.decision(x);
            if v > best.1 {
                best = (c, v);
            }
        }
        self.classes[best.0]
    }

    /// Binary decision value for the larger class; `None` for multiclass.
    pub fn binary_decision(&self, x: ArrayView1<'_, f64>) -> Option<f64> {
        (self.machines.len() == 1).then(|| self.machines[0].decision(x))
    }

    pub fn accuracy(&self, x: ArrayView2<'_, f64>, labels: &[i64]) -> f64 {
        let hits = x
            .rows()
            .into_iter()
            .zip(labels)
            .filter(|(row, &l)| self.predict(*row) == l)
            .count();
        hits as f64 / labels.len() as f64
    }

    /// Area under the ROC curve for binary problems, ties counted half.
    pub fn auc(&self, x: ArrayView2<'_, f64>, labels: &[i64]) -> Option<f64> {
        if self.machines.len() != 1 {
            return None;
        }
        let scores: Vec<f64> = x.rows().into_iter().map(|r| self.machines[0].decision(r)).collect();
        let positive: Vec<bool> = labels.iter().map(|&l| l == self.classes[1]).collect();
        auc(&scores, &positive)
    }
}

/// Mann-Whitney AUC with midranks; `None` if one class is absent.
pub fn auc(scores: &[f64], positive: &[bool]) -> Option<f64> {
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return None;
    }
    let ranks = crate::stats::midranks(scores);
    let rank_sum: f64 = ranks.iter().zip(positive).filter(|(_, &p)| p).map(|(r, _)| r).sum();
    let u = rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Some(u / (n_pos * n_neg) as f64)
}
