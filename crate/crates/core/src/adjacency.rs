//! Feature adjacency matrices for the IFS family.
//!
//! Every variant is a convex combination of a relevance term and a
//! redundancy term:
//!
//! | variant | relevance                 | redundancy            |
//! |---------|---------------------------|-----------------------|
//! | IFS     | `max(std_i, std_j)`       | `1 - |spr_ij|`        |
//! | mIFS    | `max(std_i, std_j)`       | `1 - min(rdn_i, rdn_j)` |
//! | SIFS    | `max(rel_i, rel_j)`       | `1 - |spr_ij|`        |
//!
//! weighted `alpha * relevance + (1 - alpha) * redundancy`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stats::MeasureCache;

#[derive(Debug, Error, PartialEq)]
pub enum AdjacencyError {
    #[error("alpha must lie in [0, 1], got {0}")]
    AlphaOutOfRange(f64),
    #[error("measure cache is missing the {0} block")]
    MissingBlock(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphVariant {
    Ifs,
    Mifs,
    Sifs,
}

impl fmt::Display for GraphVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphVariant::Ifs => "ifs",
            GraphVariant::Mifs => "mifs",
            GraphVariant::Sifs => "sifs",
        })
    }
}

/// Whether `a_ii` follows the entry formula or is forced to zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiagonalMode {
    #[default]
    Formula,
    Zero,
}

impl FromStr for DiagonalMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "formula" => Ok(DiagonalMode::Formula),
            "zero" => Ok(DiagonalMode::Zero),
            other => Err(format!("unknown diagonal mode {other:?} (expected formula or zero)")),
        }
    }
}

/// Symmetric m×m matrix of pairwise feature energies.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrix {
    pub a: Array2<f64>,
    pub variant: GraphVariant,
    pub alpha: f64,
}

impl AdjacencyMatrix {
    pub fn n_features(&self) -> usize {
        self.a.nrows()
    }

    /// Wraps an arbitrary square matrix, e.g. for scoring experiments.
    pub fn from_matrix(a: Array2<f64>, variant: GraphVariant, alpha: f64) -> AdjacencyMatrix {
        assert!(a.is_square(), "adjacency matrix must be square");
        AdjacencyMatrix { a, variant, alpha }
    }

    /// Row-major CSV dump at full precision.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for row in self.a.rows() {
            let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }
}

fn check_alpha(alpha: f64) -> Result<(), AdjacencyError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(AdjacencyError::AlphaOutOfRange(alpha));
    }
    Ok(())
}

fn combine<R, D>(m: usize, alpha: f64, relevance: R, redundancy: D, diagonal: DiagonalMode) -> Array2<f64>
where
    R: Fn(usize, usize) -> f64,
    D: Fn(usize, usize) -> f64,
{
    let mut a = Array2::zeros((m, m));
    for i in 0..m {
        for j in i..m {
            let v = if i == j && diagonal == DiagonalMode::Zero {
                0.0
            } else {
                alpha * relevance(i, j) + (1.0 - alpha) * redundancy(i, j)
            };
            a[[i, j]] = v;
            a[[j, i]] = v;
        }
    }
    a
}

/// Builds the adjacency matrix of `variant` from a measure cache.
pub fn build(
    cache: &MeasureCache,
    variant: GraphVariant,
    alpha: f64,
    diagonal: DiagonalMode,
) -> Result<AdjacencyMatrix, AdjacencyError> {
    check_alpha(alpha)?;
    let m = cache.n_features();
    let std = &cache.std;
    let a = match variant {
        GraphVariant::Ifs => {
            let spr = cache.spearman.as_ref().ok_or(AdjacencyError::MissingBlock("spearman"))?;
            combine(m, alpha, |i, j| std[i].max(std[j]), |i, j| 1.0 - spr[[i, j]].abs(), diagonal)
        }
        GraphVariant::Mifs => {
            let rdn = cache.rdn.as_ref().ok_or(AdjacencyError::MissingBlock("rdn"))?;
            combine(m, alpha, |i, j| std[i].max(std[j]), |i, j| 1.0 - rdn[i].min(rdn[j]), diagonal)
        }
        GraphVariant::Sifs => {
            let rel = cache.relevance.as_ref().ok_or(AdjacencyError::MissingBlock("relevance"))?;
            let spr = cache.spearman.as_ref().ok_or(AdjacencyError::MissingBlock("spearman"))?;
            combine(m, alpha, |i, j| rel[i].max(rel[j]), |i, j| 1.0 - spr[[i, j]].abs(), diagonal)
        }
    };
    Ok(AdjacencyMatrix { a, variant, alpha })
}

/// Original IFS: dispersion relevance with Spearman redundancy.
pub fn build_ifs(cache: &MeasureCache, alpha: f64) -> Result<AdjacencyMatrix, AdjacencyError> {
    build(cache, GraphVariant::Ifs, alpha, DiagonalMode::Formula)
}

/// mIFS: dispersion relevance with mutual-information redundancy.
pub fn build_mifs(cache: &MeasureCache, alpha: f64) -> Result<AdjacencyMatrix, AdjacencyError> {
    build(cache, GraphVariant::Mifs, alpha, DiagonalMode::Formula)
}

/// SIFS: label mutual information relevance with Spearman redundancy.
pub fn build_sifs(cache: &MeasureCache, alpha: f64) -> Result<AdjacencyMatrix, AdjacencyError> {
    build(cache, GraphVariant::Sifs, alpha, DiagonalMode::Formula)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn cache(std: Vec<f64>) -> MeasureCache {
        MeasureCache {
            std,
            rdn: None,
            relevance: None,
            spearman: None,
            mi: None,
        }
    }

    #[test]
    fn ifs_alpha_one_unit_std_is_all_ones() {
        let mut c = cache(vec![1.0; 3]);
        c.spearman = Some(array![[1.0, 0.3, -0.2], [0.3, 1.0, 0.9], [-0.2, 0.9, 1.0]]);
        let a = build_ifs(&c, 1.0).unwrap();
        assert!(a.a.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn ifs_duplicates_zero_at_alpha_zero() {
        let mut c = cache(vec![0.5, 0.5]);
        c.spearman = Some(array![[1.0, 1.0], [1.0, 1.0]]);
        assert_eq!(build_ifs(&c, 0.0).unwrap().a[[0, 1]], 0.0);
    }

    #[test]
    fn ifs_arithmetic() {
        let mut c = cache(vec![0.5, 0.3]);
        c.spearman = Some(array![[1.0, 0.2], [0.2, 1.0]]);
        let a = build_ifs(&c, 0.5).unwrap();
        assert!((a.a[[0, 1]] - 0.65).abs() < 1e-15);
        // diagonal uses the same formula: spr_ii = 1 cancels redundancy
        assert!((a.a[[0, 0]] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn mifs_examples() {
        let mut c = cache(vec![0.5, 0.5]);
        c.rdn = Some(vec![1.0, 1.0]);
        assert_eq!(build_mifs(&c, 0.0).unwrap().a[[0, 1]], 0.0);

        let mut c = cache(vec![0.5, 0.2, 0.4]);
        c.rdn = Some(vec![0.1, 0.2, 0.3]);
        let a = build_mifs(&c, 1.0).unwrap().a;
        assert_eq!((a[[0, 1]], a[[1, 2]]), (0.5, 0.4));

        let mut c = cache(vec![0.4, 0.2]);
        c.rdn = Some(vec![0.3, 0.7]);
        assert!((build_mifs(&c, 0.5).unwrap().a[[0, 1]] - 0.55).abs() < 1e-15);
    }

    #[test]
    fn sifs_examples() {
        let mut c = cache(vec![0.1; 3]);
        c.relevance = Some(vec![1.0, 0.0, 0.0]);
        c.spearman = Some(Array2::eye(3));
        let a = build_sifs(&c, 1.0).unwrap().a;
        assert_eq!(a.row(0).to_vec(), vec![1.0; 3]);
        assert_eq!(a[[1, 2]], 0.0);

        let mut c = cache(vec![0.1; 2]);
        c.relevance = Some(vec![0.6, 0.2]);
        c.spearman = Some(array![[1.0, -0.5], [-0.5, 1.0]]);
        assert!((build_sifs(&c, 0.5).unwrap().a[[0, 1]] - 0.55).abs() < 1e-15);
    }

    #[test]
    fn sifs_at_zero_equals_ifs() {
        let mut c = cache(vec![0.3, 0.1, 0.7]);
        c.relevance = Some(vec![0.2, 0.9, 0.4]);
        c.spearman = Some(array![[1.0, 0.4, -0.3], [0.4, 1.0, 0.1], [-0.3, 0.1, 1.0]]);
        assert_eq!(build_sifs(&c, 0.0).unwrap().a, build_ifs(&c, 0.0).unwrap().a);
    }

    #[test]
    fn errors() {
        let c = cache(vec![0.3, 0.1]);
        assert_eq!(build_ifs(&c, 0.5), Err(AdjacencyError::MissingBlock("spearman")));
        assert_eq!(build_mifs(&c, 0.5), Err(AdjacencyError::MissingBlock("rdn")));
        assert_eq!(build_sifs(&c, 0.5), Err(AdjacencyError::MissingBlock("relevance")));
        assert_eq!(build_ifs(&c, 1.5), Err(AdjacencyError::AlphaOutOfRange(1.5)));
    }

    #[test]
    fn zero_diagonal_mode() {
        let mut c = cache(vec![0.3, 0.1]);
        c.spearman = Some(array![[1.0, 0.4], [0.4, 1.0]]);
        let a = build(&c, GraphVariant::Ifs, 0.5, DiagonalMode::Zero).unwrap().a;
        assert_eq!((a[[0, 0]], a[[1, 1]]), (0.0, 0.0));
        assert!(a[[0, 1]] > 0.0);
    }

    #[test]
    fn csv_dump_round_trips_values() {
        let a = AdjacencyMatrix::from_matrix(array![[0.1, 1.0 / 3.0], [1.0 / 3.0, 0.0]], GraphVariant::Ifs, 0.5);
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "0.1,0.3333333333333333\n0.3333333333333333,0.0\n");
    }
}
