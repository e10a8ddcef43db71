//! Scalar measures feeding the adjacency matrices: per-feature dispersion,
//! Spearman rank correlation, plug-in mutual information and the mean
//! normalized-MI redundancy of a feature.
//!
//! All logarithms are natural (nats).

mod binning;
mod cache;

pub use binning::{BinningKind, BinningPolicy, Discretized};
pub use cache::{build_measure_cache, MeasureCache, MeasureRequest};

use thiserror::Error;

use crate::data::{mean_and_population_std, Dataset};

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least 2 observations, got {0}")]
    TooShort(usize),
    #[error("bin count must be at least 2, got {0}")]
    BinCount(usize),
    #[error("redundancy needs at least 2 features, dataset has {0}")]
    TooFewFeatures(usize),
    #[error("feature index {index} out of range for {m} features")]
    FeatureIndex { index: usize, m: usize },
    #[error("labels are required for relevance but the dataset has none")]
    LabelsRequired,
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<(), StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(StatsError::TooShort(x.len()));
    }
    Ok(())
}

fn check_index(d: &Dataset, i: usize) -> Result<(), StatsError> {
    if i >= d.n_features() {
        return Err(StatsError::FeatureIndex {
            index: i,
            m: d.n_features(),
        });
    }
    Ok(())
}

fn column_vec(d: &Dataset, i: usize) -> Vec<f64> {
    d.column(i).to_vec()
}

/// Population standard deviation of feature `i`.
pub fn feature_std(d: &Dataset, i: usize) -> Result<f64, StatsError> {
    check_index(d, i)?;
    Ok(mean_and_population_std(d.column(i).iter().copied()).1)
}

/// Average ranks (1-based), with tied values sharing the mean of their span.
pub fn midranks(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && x[order[end]] == x[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Pearson correlation; 0 when either side has zero variance.
pub(crate) fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
}

/// Spearman's rank correlation with midranks for ties. A constant input
/// yields 0.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    check_pair(x, y)?;
    Ok(pearson(&midranks(x), &midranks(y)))
}

/// Shannon entropy of a discretized vector.
pub fn entropy(d: &Discretized) -> f64 {
    let mut counts = vec![0usize; d.levels];
    for &c in &d.codes {
        counts[c as usize] += 1;
    }
    entropy_of_counts(&counts, d.len())
}

fn entropy_of_counts(counts: &[usize], n: usize) -> f64 {
    let n = n as f64;
    let mut terms: Vec<f64> = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .collect();
    sorted_sum(&mut terms)
}

// Summation in a canonical order makes results independent of how the
// histogram happened to be laid out (e.g. MI(x, y) vs MI(y, x)).
fn sorted_sum(terms: &mut [f64]) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

/// Histogram summary of a pair of discretized vectors.
struct JointHistogram {
    n: usize,
    left: Vec<usize>,
    right: Vec<usize>,
    joint: Vec<usize>,
}

impl JointHistogram {
    fn new(a: &Discretized, b: &Discretized) -> JointHistogram {
        let mut left = vec![0usize; a.levels];
        let mut right = vec![0usize; b.levels];
        let mut joint = vec![0usize; a.levels * b.levels];
        for (&ca, &cb) in a.codes.iter().zip(&b.codes) {
            left[ca as usize] += 1;
            right[cb as usize] += 1;
            joint[ca as usize * b.levels + cb as usize] += 1;
        }
        JointHistogram {
            n: a.len(),
            left,
            right,
            joint,
        }
    }

    fn mutual_information(&self) -> f64 {
        let n = self.n as f64;
        let width = self.right.len();
        let mut terms = Vec::new();
        for (cell, &count) in self.joint.iter().enumerate() {
            if count == 0 {
                continue;
            }
            let pab = count as f64 / n;
            let pa = self.left[cell / width] as f64 / n;
            let pb = self.right[cell % width] as f64 / n;
            terms.push(pab * (pab / (pa * pb)).ln());
        }
        sorted_sum(&mut terms).max(0.0)
    }
}

/// Plug-in MI of two already discretized vectors of equal length.
pub fn mutual_information_discrete(a: &Discretized, b: &Discretized) -> f64 {
    assert_eq!(a.len(), b.len(), "discretized vectors differ in length");
    JointHistogram::new(a, b).mutual_information()
}

/// MI divided by the smaller marginal entropy; 0 when that entropy is 0.
pub fn normalized_mi_discrete(a: &Discretized, b: &Discretized) -> f64 {
    let hist = JointHistogram::new(a, b);
    let h = entropy_of_counts(&hist.left, hist.n).min(entropy_of_counts(&hist.right, hist.n));
    if h <= 0.0 {
        return 0.0;
    }
    (hist.mutual_information() / h).clamp(0.0, 1.0)
}

/// Plug-in mutual information (nats) after discretizing both inputs.
pub fn mutual_information(x: &[f64], y: &[f64], policy: BinningPolicy) -> Result<f64, StatsError> {
    check_pair(x, y)?;
    policy.validate()?;
    Ok(mutual_information_discrete(
        &Discretized::from_values(x, policy),
        &Discretized::from_values(y, policy),
    ))
}

/// Mutual information scaled into [0, 1] by `min(H(x), H(y))`.
pub fn normalized_mi(x: &[f64], y: &[f64], policy: BinningPolicy) -> Result<f64, StatsError> {
    check_pair(x, y)?;
    policy.validate()?;
    Ok(normalized_mi_discrete(
        &Discretized::from_values(x, policy),
        &Discretized::from_values(y, policy),
    ))
}

/// Mean normalized MI between feature `i` and every other feature.
pub fn rdn(d: &Dataset, i: usize, policy: BinningPolicy) -> Result<f64, StatsError> {
    let m = d.n_features();
    if m < 2 {
        return Err(StatsError::TooFewFeatures(m));
    }
    check_index(d, i)?;
    policy.validate()?;
    let target = Discretized::from_values(&column_vec(d, i), policy);
    let mut sum = 0.0;
    for j in (0..m).filter(|&j| j != i) {
        let other = Discretized::from_values(&column_vec(d, j), policy);
        sum += normalized_mi_discrete(&other, &target);
    }
    Ok(sum / (m - 1) as f64)
}

/// Normalized MI between discretized feature `i` and the class labels.
pub fn relevance_to_labels(d: &Dataset, i: usize, policy: BinningPolicy) -> Result<f64, StatsError> {
    let labels = d.labels().ok_or(StatsError::LabelsRequired)?;
    check_index(d, i)?;
    policy.validate()?;
    let feature = Discretized::from_values(&column_vec(d, i), policy);
    Ok(normalized_mi_discrete(&feature, &Discretized::from_labels(labels)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    fn two_bins() -> BinningPolicy {
        BinningPolicy::new(BinningKind::EqualFrequency, 2).unwrap()
    }

    fn dataset(cols: &[&[f64]], labels: Option<Vec<i64>>) -> Dataset {
        let n = cols[0].len();
        let v = Array2::from_shape_fn((n, cols.len()), |(r, c)| cols[c][r]);
        Dataset::new("t", v, labels, None).unwrap()
    }

    #[test]
    fn std_examples() {
        let d = dataset(&[&[2.0, 2.0, 2.0], &[0.0, 1.0, 0.5]], None);
        assert_eq!(feature_std(&d, 0).unwrap(), 0.0);
        assert_eq!(feature_std(&dataset(&[&[0.0, 1.0]], None), 0).unwrap(), 0.5);
        assert_eq!(feature_std(&dataset(&[&[0.0, 0.0, 1.0, 1.0]], None), 0).unwrap(), 0.5);
        assert!(feature_std(&d, 2).is_err());
    }

    #[test]
    fn spearman_examples() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap(), 1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        let x = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| v.powi(3)).collect();
        assert_eq!(spearman(&x, &y).unwrap(), 1.0);
    }

    #[test]
    fn spearman_constant_and_mismatch() {
        assert_eq!(spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(
            spearman(&[1.0, 2.0], &[1.0]),
            Err(StatsError::LengthMismatch { left: 2, right: 1 })
        );
    }

    #[test]
    fn midranks_share_ties() {
        assert_eq!(midranks(&[10.0, 20.0, 10.0, 30.0]), vec![1.5, 3.0, 1.5, 4.0]);
    }

    #[test]
    fn mi_examples() {
        let x = [0.0, 0.0, 1.0, 1.0];
        let mi = mutual_information(&x, &x, two_bins()).unwrap();
        assert!((mi - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(mutual_information(&x, &[0.0, 1.0, 0.0, 1.0], two_bins()).unwrap(), 0.0);
        assert_eq!(mutual_information(&[3.0; 4], &x, two_bins()).unwrap(), 0.0);
        assert_eq!(
            mutual_information(&x, &x, BinningPolicy { kind: BinningKind::EqualWidth, bin_count: 1 }),
            Err(StatsError::BinCount(1))
        );
        assert!(mutual_information(&x, &x[..3], two_bins()).is_err());
    }

    #[test]
    fn normalized_mi_examples() {
        let x = [0.0, 0.0, 1.0, 1.0];
        assert_eq!(normalized_mi(&x, &x, two_bins()).unwrap(), 1.0);
        assert_eq!(normalized_mi(&x, &[0.0, 1.0, 0.0, 1.0], two_bins()).unwrap(), 0.0);
        assert_eq!(normalized_mi(&[3.0; 4], &x, two_bins()).unwrap(), 0.0);
    }

    #[test]
    fn rdn_examples() {
        let a = [0.0, 0.0, 1.0, 1.0];
        let b = [0.0, 1.0, 0.0, 1.0];
        assert_eq!(rdn(&dataset(&[&a, &a], None), 0, two_bins()).unwrap(), 1.0);
        assert_eq!(rdn(&dataset(&[&a, &b], None), 0, two_bins()).unwrap(), 0.0);
        assert!(matches!(rdn(&dataset(&[&a], None), 0, two_bins()), Err(StatsError::TooFewFeatures(1))));
    }

    #[test]
    fn rdn_three_features_matches_direct_histograms() {
        let a = [0.0, 0.0, 1.0, 1.0];
        let b = [0.0, 1.0, 0.0, 1.0];
        let d = dataset(&[&a, &a, &b], None);
        // direct evaluation: nmi(a, a) = ln2 / ln2, nmi(b, a) = 0 / ln2
        let ln2 = std::f64::consts::LN_2;
        let joint_aa = 2.0 * (0.5 * (0.5f64 / (0.5 * 0.5)).ln());
        let expected = (joint_aa / ln2 + 0.0) / 2.0;
        assert!((expected - 0.5).abs() < 1e-15);
        assert!((rdn(&d, 0, two_bins()).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn relevance_examples() {
        let y = vec![0, 0, 1, 1];
        let d = dataset(&[&[0.0, 0.0, 1.0, 1.0], &[0.0, 1.0, 0.0, 1.0]], Some(y));
        assert_eq!(relevance_to_labels(&d, 0, two_bins()).unwrap(), 1.0);
        assert_eq!(relevance_to_labels(&d, 1, two_bins()).unwrap(), 0.0);
        let unlabeled = dataset(&[&[0.0, 1.0]], None);
        assert_eq!(relevance_to_labels(&unlabeled, 0, two_bins()), Err(StatsError::LabelsRequired));
    }

    #[test]
    fn relevance_one_flipped_sample_of_eight() {
        let y = vec![0, 0, 0, 0, 1, 1, 1, 1];
        let f = [0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0];
        let d = dataset(&[&f], Some(y));
        // hand-built histogram: cells (f=0,y=0)=3, (1,0)=1, (1,1)=4; p(f=0)=3/8, p(y)=1/2
        let mi = 3.0 / 8.0 * 2f64.ln() + 1.0 / 8.0 * (2.0f64 / 5.0).ln() + 0.5 * (8.0f64 / 5.0).ln();
        let hf = -(3.0 / 8.0 * (3.0f64 / 8.0).ln() + 5.0 / 8.0 * (5.0f64 / 8.0).ln());
        let expected = mi / hf.min(2f64.ln());
        assert!((expected - 0.5749951688786838).abs() < 1e-15);
        let got = relevance_to_labels(&d, 0, BinningPolicy::default()).unwrap();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
        assert!(got > 0.0 && got < 1.0);
    }
}
