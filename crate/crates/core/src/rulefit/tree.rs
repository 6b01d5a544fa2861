//! Depth-limited least-squares regression trees and per-class gradient
//! boosting over them.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Node {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    pub(crate) fn predict(&self, row: &[f64]) -> f64 {
        match self {
            Node::Leaf { value } => *value,
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if row[*feature] <= *threshold {
                    left.predict(row)
                } else {
                    right.predict(row)
                }
            }
        }
    }
}

pub(crate) struct TreeParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

/// `x` is row-major with no missing values.
pub(crate) fn fit_tree(x: &[Vec<f64>], y: &[f64], rows: &[usize], params: &TreeParams) -> Node {
    grow(x, y, rows.to_vec(), 0, params)
}

fn mean_of(y: &[f64], rows: &[usize]) -> f64 {
    rows.iter().map(|&i| y[i]).sum::<f64>() / rows.len() as f64
}

fn grow(x: &[Vec<f64>], y: &[f64], rows: Vec<usize>, depth: usize, params: &TreeParams) -> Node {
    let value = mean_of(y, &rows);
    if depth >= params.max_depth || rows.len() < 2 * params.min_samples_leaf {
        return Node::Leaf { value };
    }
    let Some((feature, threshold)) = best_split(x, y, &rows, params.min_samples_leaf) else {
        return Node::Leaf { value };
    };
    let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| x[i][feature] <= threshold);
    Node::Split {
        feature,
        threshold,
        left: Box::new(grow(x, y, l, depth + 1, params)),
        right: Box::new(grow(x, y, r, depth + 1, params)),
    }
}

/// Exhaustive search for the split with the largest reduction in squared
/// error. Thresholds are midpoints between consecutive distinct values; the
/// first best (lowest feature index, then lowest threshold) wins ties.
fn best_split(x: &[Vec<f64>], y: &[f64], rows: &[usize], min_leaf: usize) -> Option<(usize, f64)> {
    let n = rows.len();
    let total: f64 = rows.iter().map(|&i| y[i]).sum();
    let base = total * total / n as f64;
    let p = x[rows[0]].len();
    let mut best: Option<(usize, f64, f64)> = None;
    let mut order: Vec<usize> = rows.to_vec();
    for f in 0..p {
        order.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(a.cmp(&b)));
        let mut left_sum = 0.0;
        for k in 0..n - 1 {
            left_sum += y[order[k]];
            let nl = k + 1;
            let nr = n - nl;
            let (v, next) = (x[order[k]][f], x[order[k + 1]][f]);
            if v == next || nl < min_leaf || nr < min_leaf {
                continue;
            }
            let right_sum = total - left_sum;
            let gain = left_sum * left_sum / nl as f64 + right_sum * right_sum / nr as f64 - base;
            if gain > 1e-12 && best.is_none_or(|(_, _, g)| gain > g) {
                best = Some((f, v + (next - v) / 2.0, gain));
            }
        }
    }
    best.map(|(f, t, _)| (f, t))
}

pub(crate) struct BoostParams {
    pub n_trees: usize,
    pub learning_rate: f64,
    pub subsample: f64,
    pub tree: TreeParams,
    pub seed: u64,
}

/// Boosts squared-error trees on the 0/1 indicator `target`.
pub(crate) fn boost(x: &[Vec<f64>], target: &[f64], params: &BoostParams) -> Vec<Node> {
    let n = target.len();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut score = vec![target.iter().sum::<f64>() / n as f64; n];
    let take = ((params.subsample * n as f64).round() as usize).clamp(1, n);
    let mut trees = Vec::with_capacity(params.n_trees);
    for _ in 0..params.n_trees {
        let mut rows: Vec<usize> = if take == n {
            (0..n).collect()
        } else {
            sample(&mut rng, n, take).into_vec()
        };
        rows.sort_unstable();
        let residual: Vec<f64> = target.iter().zip(&score).map(|(t, s)| t - s).collect();
        let tree = fit_tree(x, &residual, &rows, &params.tree);
        for (i, s) in score.iter_mut().enumerate() {
            *s += params.learning_rate * tree.predict(&x[i]);
        }
        trees.push(tree);
    }
    trees
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_clean_threshold() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, (i % 3) as f64]).collect();
        let y: Vec<f64> = (0..20).map(|i| if i >= 12 { 1.0 } else { 0.0 }).collect();
        let rows: Vec<usize> = (0..20).collect();
        let tree = fit_tree(&x, &y, &rows, &TreeParams { max_depth: 1, min_samples_leaf: 1 });
        match tree {
            Node::Split { feature, threshold, .. } => {
                assert_eq!(feature, 0);
                assert_eq!(threshold, 11.5);
            }
            _ => panic!("expected a split"),
        }
    }

    #[test]
    fn constant_features_give_a_leaf() {
        let x = vec![vec![1.0]; 10];
        let y: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let rows: Vec<usize> = (0..10).collect();
        assert!(matches!(
            fit_tree(&x, &y, &rows, &TreeParams { max_depth: 3, min_samples_leaf: 1 }),
            Node::Leaf { .. }
        ));
    }

    #[test]
    fn boosting_is_seeded() {
        let x: Vec<Vec<f64>> = (0..50).map(|i| vec![(i * 7 % 13) as f64, i as f64]).collect();
        let y: Vec<f64> = (0..50).map(|i| ((i * 7 % 13) > 6) as u8 as f64).collect();
        let params = BoostParams {
            n_trees: 5,
            learning_rate: 0.1,
            subsample: 0.75,
            tree: TreeParams { max_depth: 2, min_samples_leaf: 2 },
            seed: 7,
        };
        assert_eq!(boost(&x, &y, &params), boost(&x, &y, &params));
    }
}
