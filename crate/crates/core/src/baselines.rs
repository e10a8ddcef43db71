//! mRMR greedy forward selection (difference form), the supervised baseline.
//!
//! Step 1 picks `argmax MI(f; Y)`; each later step picks
//! `argmax MI(f; Y) - mean_{s in S} MI(f; s)` over unselected `f`.
//! MI here is the raw plug-in estimate, not the normalized one used by the
//! graph variants. Ties go to the lowest feature index.

use rayon::prelude::*;

use crate::data::Dataset;
use crate::stats::{mutual_information_discrete, BinningPolicy, Discretized};
use crate::Error;

#[derive(Debug, Clone, PartialEq)]
pub struct MrmrSelection {
    pub order: Vec<usize>,
    /// Criterion value of each pick at the step it was made.
    pub objective_trace: Vec<f64>,
}

/// Index of the largest value, lowest index on ties. `None` values are skipped.
fn argmax(values: &[Option<f64>]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.iter().enumerate() {
        if let Some(v) = *v {
            match best {
                Some((_, b)) if v <= b => {}
                _ => best = Some((i, v)),
            }
        }
    }
    best.map(|(i, _)| i)
}

pub fn mrmr_select(d: &Dataset, k: usize, policy: BinningPolicy) -> Result<MrmrSelection, Error> {
    let labels = d.labels().ok_or(Error::LabelsRequired("mrmr"))?;
    let m = d.n_features();
    if k < 1 || k > m {
        return Err(Error::Config(format!("mrmr needs 1 <= k <= {m}, got {k}")));
    }
    policy.validate()?;

    let binned: Vec<Discretized> = (0..m)
        .into_par_iter()
        .map(|i| Discretized::from_values(&d.column(i).to_vec(), policy))
        .collect();
    let target = Discretized::from_labels(labels);
    let relevance: Vec<f64> = binned
        .par_iter()
        .map(|b| mutual_information_discrete(b, &target))
        .collect();

    let mut selected = vec![false; m];
    // running sum of MI with the selected set, accumulated in selection order
    let mut redundancy = vec![0.0; m];
    let mut order = Vec::with_capacity(k);
    let mut trace = Vec::with_capacity(k);

    for step in 0..k {
        let criterion: Vec<Option<f64>> = (0..m)
            .map(|i| {
                (!selected[i]).then(|| {
                    if step == 0 {
                        relevance[i]
                    } else {
                        relevance[i] - redundancy[i] / step as f64
                    }
                })
            })
            .collect();
        let pick = argmax(&criterion).expect("k <= m leaves a candidate");
        selected[pick] = true;
        order.push(pick);
        trace.push(criterion[pick].unwrap());

        if step + 1 < k {
            let fresh: Vec<(usize, f64)> = (0..m)
                .into_par_iter()
                .filter(|&i| !selected[i])
                .map(|i| (i, mutual_information_discrete(&binned[i], &binned[pick])))
                .collect();
            for (i, mi) in fresh {
                redundancy[i] += mi;
            }
        }
    }

    Ok(MrmrSelection {
        order,
        objective_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::mutual_information;
    use ndarray::Array2;

    fn dataset(cols: &[Vec<f64>], labels: Vec<i64>) -> Dataset {
        let n = labels.len();
        let v = Array2::from_shape_fn((n, cols.len()), |(r, c)| cols[c][r]);
        Dataset::new("t", v, Some(labels), None).unwrap()
    }

    #[test]
    fn first_pick_is_max_relevance() {
        let y = vec![0, 0, 1, 1, 0, 1, 0, 1];
        let cols = vec![
            vec![1.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 2.0],
            y.iter().map(|&v| v as f64).collect(),
            vec![0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0],
        ];
        let d = dataset(&cols, y);
        let s = mrmr_select(&d, 1, BinningPolicy::default()).unwrap();
        assert_eq!(s.order, vec![1]);
        assert!((s.objective_trace[0] - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn duplicate_of_first_pick_when_feature_equals_label() {
        // with f0 = Y every candidate scores MI(f;Y) - MI(f;Y) = 0, so the
        // condition for skipping the duplicate never holds and the tie rule picks f1
        let y: Vec<i64> = vec![0, 0, 0, 0, 1, 1, 1, 1];
        let f0: Vec<f64> = y.iter().map(|&v| v as f64).collect();
        let f2 = vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0];
        let p = BinningPolicy::default();
        let crit = |f: &[f64]| mutual_information(f, &f0, p).unwrap() - mutual_information(f, &f0, p).unwrap();
        assert_eq!(crit(&f0), 0.0);
        assert_eq!(crit(&f2), 0.0);
        let d = dataset(&[f0.clone(), f0.clone(), f2], y);
        assert_eq!(mrmr_select(&d, 2, p).unwrap().order, vec![0, 1]);
    }

    #[test]
    fn duplicate_skipped_when_another_feature_adds_information() {
        // Y = 2*b1 + b2 with independent balanced bits; f0 = f1 = b1, f2 = b2
        let b1 = vec![0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0];
        let b2 = vec![0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0];
        let y: Vec<i64> = b1.iter().zip(&b2).map(|(a, b)| (2.0 * a + b) as i64).collect();
        let yv: Vec<f64> = y.iter().map(|&v| v as f64).collect();
        let p = BinningPolicy::default();
        let mi = |a: &[f64], b: &[f64]| mutual_information(a, b, p).unwrap();
        let ln2 = std::f64::consts::LN_2;
        assert!((mi(&b1, &yv) - ln2).abs() < 1e-12 && (mi(&b2, &yv) - ln2).abs() < 1e-12);
        // step 2 criteria by hand: duplicate ln2 - ln2 = 0, f2 ln2 - 0 = ln2
        let dup = mi(&b1, &yv) - mi(&b1, &b1);
        let other = mi(&b2, &yv) - mi(&b2, &b1);
        assert!(other > dup);
        let d = dataset(&[b1.clone(), b1, b2], y);
        let s = mrmr_select(&d, 2, p).unwrap();
        assert_eq!(s.order, vec![0, 2]);
        assert!((s.objective_trace[1] - other).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let d = dataset(&[vec![1.0, 2.0, 3.0]], vec![0, 1, 0]);
        assert!(mrmr_select(&d, 0, BinningPolicy::default()).is_err());
        assert!(mrmr_select(&d, 2, BinningPolicy::default()).is_err());
        let unlabeled = Dataset::new("u", Array2::zeros((3, 2)), None, None).unwrap();
        assert!(matches!(
            mrmr_select(&unlabeled, 1, BinningPolicy::default()),
            Err(Error::LabelsRequired(_))
        ));
    }

    #[test]
    fn order_has_no_repeats() {
        let y: Vec<i64> = (0..30).map(|i| (i % 3) as i64).collect();
        let cols: Vec<Vec<f64>> = (0..6)
            .map(|c| (0..30).map(|r| ((r * (c + 3)) % 7) as f64).collect())
            .collect();
        let d = dataset(&cols, y);
        let s = mrmr_select(&d, 6, BinningPolicy::default()).unwrap();
        let mut sorted = s.order.clone();
        sorted.sort();
        assert_eq!(sorted, (0..6).collect::<Vec<_>>());
        assert_eq!(s.objective_trace.len(), 6);
    }
}
