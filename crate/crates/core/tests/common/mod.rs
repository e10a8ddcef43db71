#![allow(dead_code)]

use infinisel::Dataset;
use ndarray::{s, Array2};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.sample(StandardNormal))
}

pub fn from_columns(cols: &[Vec<f64>], labels: Option<Vec<i64>>) -> Dataset {
    let n = cols[0].len();
    let v = Array2::from_shape_fn((n, cols.len()), |(r, c)| cols[c][r]);
    Dataset::new("t", v, labels, None).unwrap()
}

/// `n` samples of `m` standard normal features; five randomly placed
/// features carry the signal and the label is the sign of their sum.
pub struct Planted {
    pub data: Dataset,
    pub planted: Vec<usize>,
}

pub fn planted(seed: u64, n: usize, m: usize) -> Planted {
    let mut rng = rng(seed);
    let values = gaussian(&mut rng, n, m);
    let mut idx: Vec<usize> = (0..m).collect();
    idx.shuffle(&mut rng);
    let mut planted = idx[..5].to_vec();
    planted.sort_unstable();
    let labels: Vec<i64> = values
        .rows()
        .into_iter()
        .map(|row| i64::from(planted.iter().map(|&j| row[j]).sum::<f64>() > 0.0))
        .collect();
    Planted {
        data: Dataset::new("planted", values, Some(labels), None).unwrap(),
        planted,
    }
}

/// First `n_train` rows versus the rest.
pub fn split(d: &Dataset, n_train: usize) -> (Dataset, Dataset) {
    let labels = d.labels().unwrap();
    let part = |lo: usize, hi: usize| {
        Dataset::new(
            d.name(),
            d.values().slice(s![lo..hi, ..]).to_owned(),
            Some(labels[lo..hi].to_vec()),
            None,
        )
        .unwrap()
    };
    (part(0, n_train), part(n_train, d.n_samples()))
}

pub fn write_csv(path: &std::path::Path, d: &Dataset) {
    let m = d.n_features();
    let mut out: Vec<String> = (0..m).map(|j| format!("f{j}")).collect();
    if d.labels().is_some() {
        out.push("label".into());
    }
    let mut text = out.join(",") + "\n";
    for (r, row) in d.values().rows().into_iter().enumerate() {
        let mut cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        if let Some(l) = d.labels() {
            cells.push(l[r].to_string());
        }
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    std::fs::write(path, text).unwrap();
}
