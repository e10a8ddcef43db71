use ndarray::Array2;
use rayon::prelude::*;

use super::{
    midranks, normalized_mi_discrete, pearson, BinningPolicy, Discretized, StatsError,
};
use crate::data::{mean_and_population_std, Dataset};

/// Which optional blocks of a [`MeasureCache`] to compute.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MeasureRequest {
    /// Pairwise normalized MI plus the per-feature redundancy derived from it.
    pub mi_matrix: bool,
    pub spearman: bool,
    /// Normalized MI of each feature with the labels.
    pub relevance: bool,
}

/// Precomputed per-feature and pairwise measures for one dataset.
///
/// `std` is always present; the other blocks only when requested.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureCache {
    pub std: Vec<f64>,
    pub rdn: Option<Vec<f64>>,
    pub relevance: Option<Vec<f64>>,
    pub spearman: Option<Array2<f64>>,
    /// Normalized MI, in [0, 1].
    pub mi: Option<Array2<f64>>,
}

impl MeasureCache {
    pub fn n_features(&self) -> usize {
        self.std.len()
    }

    /// Reorders every block so that new feature `k` is old feature `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> MeasureCache {
        let m = perm.len();
        let pick = |v: &Vec<f64>| perm.iter().map(|&i| v[i]).collect::<Vec<_>>();
        let pick2 = |a: &Array2<f64>| Array2::from_shape_fn((m, m), |(i, j)| a[[perm[i], perm[j]]]);
        MeasureCache {
            std: pick(&self.std),
            rdn: self.rdn.as_ref().map(pick),
            relevance: self.relevance.as_ref().map(pick),
            spearman: self.spearman.as_ref().map(pick2),
            mi: self.mi.as_ref().map(pick2),
        }
    }
}

/// Fills one symmetric matrix from a pairwise function evaluated on the
/// upper triangle (diagonal included). Each cell is written once.
fn symmetric_matrix<F>(m: usize, f: F) -> Array2<f64>
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i..m).map(move |j| (i, j))).collect();
    let values: Vec<f64> = pairs.par_iter().map(|&(i, j)| f(i, j)).collect();
    let mut out = Array2::zeros((m, m));
    for (&(i, j), &v) in pairs.iter().zip(&values) {
        out[[i, j]] = v;
        out[[j, i]] = v;
    }
    out
}

pub fn build_measure_cache(
    d: &Dataset,
    policy: BinningPolicy,
    request: MeasureRequest,
) -> Result<MeasureCache, StatsError> {
    policy.validate()?;
    let m = d.n_features();
    let labels = if request.relevance {
        Some(d.labels().ok_or(StatsError::LabelsRequired)?)
    } else {
        None
    };
    if request.mi_matrix && m < 2 {
        return Err(StatsError::TooFewFeatures(m));
    }

    let columns: Vec<Vec<f64>> = (0..m).map(|i| d.column(i).to_vec()).collect();
    let std = columns
        .iter()
        .map(|c| mean_and_population_std(c.iter().copied()).1)
        .collect();

    let spearman = request.spearman.then(|| {
        let ranks: Vec<Vec<f64>> = columns.par_iter().map(|c| midranks(c)).collect();
        symmetric_matrix(m, |i, j| pearson(&ranks[i], &ranks[j]))
    });

    let binned: Option<Vec<Discretized>> = (request.mi_matrix || request.relevance).then(|| {
        columns
            .par_iter()
            .map(|c| Discretized::from_values(c, policy))
            .collect()
    });

    let mi = request.mi_matrix.then(|| {
        let binned = binned.as_ref().expect("binned columns");
        symmetric_matrix(m, |i, j| normalized_mi_discrete(&binned[i], &binned[j]))
    });

    let rdn = mi.as_ref().map(|mi| {
        (0..m)
            .map(|i| {
                let mut sum = 0.0;
                for j in (0..m).filter(|&j| j != i) {
                    sum += mi[[i, j]];
                }
                sum / (m - 1) as f64
            })
            .collect()
    });

    let relevance = labels.map(|labels| {
        let target = Discretized::from_labels(labels);
        let binned = binned.as_ref().expect("binned columns");
        binned
            .par_iter()
            .map(|b| normalized_mi_discrete(b, &target))
            .collect()
    });

    Ok(MeasureCache {
        std,
        rdn,
        relevance,
        spearman,
        mi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{self, BinningKind};
    use ndarray::array;

    const ALL: MeasureRequest = MeasureRequest {
        mi_matrix: true,
        spearman: true,
        relevance: true,
    };

    #[test]
    fn duplicate_pair_all_blocks() {
        let v = array![[0.0, 0.0], [0.0, 0.0], [1.0, 1.0], [1.0, 1.0]];
        let d = Dataset::new("dup", v, Some(vec![0, 1, 0, 1]), None).unwrap();
        let p = BinningPolicy::new(BinningKind::EqualFrequency, 2).unwrap();
        let c = build_measure_cache(&d, p, ALL).unwrap();
        assert_eq!(c.spearman.unwrap(), array![[1.0, 1.0], [1.0, 1.0]]);
        let mi = c.mi.unwrap();
        assert_eq!((mi[[0, 1]], mi[[1, 0]]), (1.0, 1.0));
        assert_eq!(c.rdn.unwrap(), vec![1.0, 1.0]);
        assert_eq!(c.relevance.unwrap(), vec![0.0, 0.0]);
        assert_eq!(c.std, vec![0.5, 0.5]);
    }

    #[test]
    fn unrequested_blocks_are_absent() {
        let d = Dataset::new("d", array![[1.0, 2.0], [2.0, 1.0], [3.0, 3.0]], None, None).unwrap();
        let c = build_measure_cache(&d, BinningPolicy::default(), MeasureRequest::default()).unwrap();
        assert!(c.rdn.is_none() && c.mi.is_none() && c.spearman.is_none() && c.relevance.is_none());
        assert_eq!(c.std.len(), 2);
    }

    #[test]
    fn relevance_without_labels_fails() {
        let d = Dataset::new("d", array![[1.0, 2.0], [2.0, 1.0]], None, None).unwrap();
        let req = MeasureRequest {
            relevance: true,
            ..Default::default()
        };
        assert_eq!(
            build_measure_cache(&d, BinningPolicy::default(), req),
            Err(StatsError::LabelsRequired)
        );
    }

    #[test]
    fn matches_pairwise_recomputation() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let n = 40;
        let v = Array2::from_shape_fn((n, 5), |_| rng.random::<f64>());
        let labels: Vec<i64> = (0..n).map(|_| rng.random_range(0..3)).collect();
        let d = Dataset::new("r", v, Some(labels), None).unwrap();
        let p = BinningPolicy::default();
        let c = build_measure_cache(&d, p, ALL).unwrap();
        let (sp, mi) = (c.spearman.as_ref().unwrap(), c.mi.as_ref().unwrap());
        for i in 0..5 {
            let xi = d.column(i).to_vec();
            assert_eq!(c.std[i], stats::feature_std(&d, i).unwrap());
            assert_eq!(c.rdn.as_ref().unwrap()[i], stats::rdn(&d, i, p).unwrap());
            assert_eq!(c.relevance.as_ref().unwrap()[i], stats::relevance_to_labels(&d, i, p).unwrap());
            for j in 0..5 {
                let xj = d.column(j).to_vec();
                assert_eq!(sp[[i, j]], stats::spearman(&xi, &xj).unwrap());
                assert_eq!(mi[[i, j]], stats::normalized_mi(&xi, &xj, p).unwrap());
            }
        }
    }

    #[test]
    fn permuted_reorders_blocks() {
        let d = Dataset::new("d", array![[1.0, 5.0, 0.0], [2.0, 4.0, 1.0], [3.0, 9.0, 0.0], [4.0, 1.0, 1.0]], None, None).unwrap();
        let req = MeasureRequest {
            mi_matrix: true,
            spearman: true,
            relevance: false,
        };
        let c = build_measure_cache(&d, BinningPolicy::default(), req).unwrap();
        let perm = [2, 0, 1];
        let direct = build_measure_cache(&d.select_features(&perm).unwrap(), BinningPolicy::default(), req).unwrap();
        let p = c.permuted(&perm);
        assert_eq!((&p.std, &p.spearman, &p.mi), (&direct.std, &direct.spearman, &direct.mi));
        // rdn sums in a different order after permutation
        for (a, b) in p.rdn.unwrap().iter().zip(direct.rdn.unwrap()) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
