use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::StatsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinningKind {
    EqualWidth,
    EqualFrequency,
}

impl FromStr for BinningKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "width" | "equal_width" => Ok(BinningKind::EqualWidth),
            "frequency" | "equal_frequency" => Ok(BinningKind::EqualFrequency),
            other => Err(format!(
                "unknown binning {other:?} (expected width or frequency)"
            )),
        }
    }
}

impl fmt::Display for BinningKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BinningKind::EqualWidth => "width",
            BinningKind::EqualFrequency => "frequency",
        })
    }
}

/// How real-valued features are discretized for histogram estimates.
///
/// The effective number of bins for a vector is `min(bin_count, distinct values)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BinningPolicy {
    pub kind: BinningKind,
    pub bin_count: usize,
}

impl Default for BinningPolicy {
    fn default() -> Self {
        BinningPolicy {
            kind: BinningKind::EqualFrequency,
            bin_count: 10,
        }
    }
}

impl BinningPolicy {
    pub fn new(kind: BinningKind, bin_count: usize) -> Result<Self, StatsError> {
        let p = BinningPolicy { kind, bin_count };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), StatsError> {
        if self.bin_count < 2 {
            return Err(StatsError::BinCount(self.bin_count));
        }
        Ok(())
    }
}

/// A vector mapped onto contiguous integer codes `0..levels`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Discretized {
    pub codes: Vec<u32>,
    pub levels: usize,
}

impl Discretized {
    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Integer labels taken as-is: each distinct value is one level,
    /// numbered in ascending label order.
    pub fn from_labels(labels: &[i64]) -> Discretized {
        let mut distinct: Vec<i64> = labels.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let codes = labels
            .iter()
            .map(|l| distinct.binary_search(l).expect("label present") as u32)
            .collect();
        Discretized {
            codes,
            levels: distinct.len(),
        }
    }

    /// Bins a real vector under `policy`. Equal values always share a bin.
    pub fn from_values(x: &[f64], policy: BinningPolicy) -> Discretized {
        let n = x.len();
        if n == 0 {
            return Discretized {
                codes: Vec::new(),
                levels: 0,
            };
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));

        // runs of equal values in sorted order
        let mut runs: Vec<(usize, usize)> = Vec::new();
        let mut start = 0;
        for k in 1..=n {
            if k == n || x[order[k]] != x[order[start]] {
                runs.push((start, k));
                start = k;
            }
        }
        let bins = policy.bin_count.min(runs.len()).max(1);

        let mut raw = vec![0usize; n];
        match policy.kind {
            BinningKind::EqualFrequency => {
                // a run goes to the bin containing the midpoint of its rank span
                for &(lo, hi) in &runs {
                    let mid = (lo + hi) as f64 / 2.0;
                    let bin = ((mid * bins as f64 / n as f64) as usize).min(bins - 1);
                    for &i in &order[lo..hi] {
                        raw[i] = bin;
                    }
                }
            }
            BinningKind::EqualWidth => {
                let min = x[order[0]];
                let max = x[order[n - 1]];
                let width = (max - min) / bins as f64;
                for (i, &v) in x.iter().enumerate() {
                    raw[i] = if width > 0.0 {
                        (((v - min) / width) as usize).min(bins - 1)
                    } else {
                        0
                    };
                }
            }
        }

        // squeeze out empty bins so codes are contiguous
        let mut used = vec![false; bins];
        for &b in &raw {
            used[b] = true;
        }
        let mut remap = vec![0u32; bins];
        let mut next = 0u32;
        for b in 0..bins {
            if used[b] {
                remap[b] = next;
                next += 1;
            }
        }
        Discretized {
            codes: raw.iter().map(|&b| remap[b]).collect(),
            levels: next as usize,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn freq(k: usize) -> BinningPolicy {
        BinningPolicy::new(BinningKind::EqualFrequency, k).unwrap()
    }

    #[test]
    fn rejects_single_bin() {
        assert!(matches!(
            BinningPolicy::new(BinningKind::EqualWidth, 1),
            Err(StatsError::BinCount(1))
        ));
    }

    #[test]
    fn equal_frequency_balanced_binary() {
        let d = Discretized::from_values(&[0.0, 0.0, 1.0, 1.0], freq(2));
        assert_eq!(d.codes, vec![0, 0, 1, 1]);
        assert_eq!(d.levels, 2);
    }

    #[test]
    fn equal_frequency_skewed_ties_keep_two_levels() {
        let d = Discretized::from_values(&[0.0, 1.0, 1.0, 1.0], freq(2));
        assert_eq!(d.codes, vec![0, 1, 1, 1]);
        let d = Discretized::from_values(&[5.0, 5.0, 5.0, 1.0], freq(10));
        assert_eq!(d.codes, vec![1, 1, 1, 0]);
        assert_eq!(d.levels, 2);
    }

    #[test]
    fn equal_frequency_quantiles() {
        let x: Vec<f64> = (0..100).rev().map(f64::from).collect();
        let d = Discretized::from_values(&x, freq(10));
        assert_eq!(d.levels, 10);
        for (i, &v) in x.iter().enumerate() {
            assert_eq!(d.codes[i], (v as u32) / 10);
        }
    }

    #[test]
    fn bins_never_exceed_distinct_values() {
        let d = Discretized::from_values(&[3.0, 1.0, 2.0, 1.0, 3.0], freq(10));
        assert_eq!(d.levels, 3);
        assert_eq!(d.codes, vec![2, 0, 1, 0, 2]);
        let w = BinningPolicy::new(BinningKind::EqualWidth, 10).unwrap();
        assert_eq!(Discretized::from_values(&[3.0, 1.0, 2.0, 1.0, 3.0], w).levels, 3);
    }

    #[test]
    fn equal_width_edges() {
        let w = BinningPolicy::new(BinningKind::EqualWidth, 2).unwrap();
        let d = Discretized::from_values(&[0.0, 0.4, 0.6, 1.0, 0.5], w);
        assert_eq!(d.codes, vec![0, 0, 1, 1, 1]);
    }

    #[test]
    fn constant_vector_has_one_level() {
        for p in [freq(4), BinningPolicy::new(BinningKind::EqualWidth, 4).unwrap()] {
            let d = Discretized::from_values(&[7.0; 5], p);
            assert_eq!(d.levels, 1);
            assert!(d.codes.iter().all(|&c| c == 0));
        }
    }

    #[test]
    fn labels_are_not_rebinned() {
        let d = Discretized::from_labels(&[5, -1, 5, 3, 3, 9]);
        assert_eq!(d.codes, vec![2, 0, 2, 1, 1, 3]);
        assert_eq!(d.levels, 4);
    }
}
