//! Seeded inputs shared by the benchmarks.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(seed: u64, n: usize) -> Vec<f64> {
    let mut r = rng(seed);
    (0..n).map(|_| StandardNormal.sample(&mut r)).collect()
}

/// Sparse linear regression problem: `rows` x `cols` design, 5 active columns.
pub fn regression(seed: u64, rows: usize, cols: usize) -> (DMatrix<f64>, Vec<f64>) {
    let mut r = rng(seed);
    let x = DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut r));
    let y = (0..rows)
        .map(|i| {
            let signal: f64 = (0..cols.min(5)).map(|j| x[(i, j)] * (j + 1) as f64).sum();
            signal + r.random_range(-0.5..0.5)
        })
        .collect();
    (x, y)
}

/// Two-class rows whose label depends on the first two columns.
pub fn labeled_rows(seed: u64, rows: usize, cols: usize) -> (Vec<Vec<Option<f64>>>, Vec<usize>) {
    let mut r = rng(seed);
    let data: Vec<Vec<Option<f64>>> = (0..rows)
        .map(|_| (0..cols).map(|_| Some(StandardNormal.sample(&mut r))).collect())
        .collect();
    let labels = data
        .iter()
        .map(|row| usize::from(row[0].unwrap() + 0.5 * row[1].unwrap() > 0.0))
        .collect();
    (data, labels)
}
