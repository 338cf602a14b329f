//! k-nearest-neighbour classification under cross-validation.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::metrics::{accuracy, f1_score, F1Average};
use super::EvalError;
use crate::embedding::EmbeddingSet;
use crate::seeds;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnnConfig {
    pub k: usize,
    pub folds: usize,
    pub seed: u64,
    pub average: F1Average,
}

impl Default for KnnConfig {
    fn default() -> Self {
        Self {
            k: 4,
            folds: 10,
            seed: 0,
            average: F1Average::Weighted,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnnOutcome {
    pub accuracy: f64,
    pub f1: f64,
    /// Pooled out-of-fold predictions, one per item.
    pub predictions: Vec<usize>,
}

/// Stratified fold ids. Within each class, items are ordered by a seeded
/// hash of their key and dealt round-robin, continuing the deal across
/// classes so fold sizes stay balanced. Depends only on `(key, class)`
/// pairs, not on item order.
pub fn stratified_folds(
    keys: &[String],
    truth: &[usize],
    folds: usize,
    seed: u64,
) -> Result<Vec<usize>, EvalError> {
    if keys.len() != truth.len() {
        return Err(EvalError::LengthMismatch {
            left: keys.len(),
            right: truth.len(),
        });
    }
    if folds < 2 || truth.len() < folds {
        return Err(EvalError::TooFewItems {
            items: truth.len(),
            folds,
        });
    }
    let mut by_class: BTreeMap<usize, Vec<(u64, &str, usize)>> = BTreeMap::new();
    for (i, (key, &c)) in keys.iter().zip(truth).enumerate() {
        let h = seeds::derive(seed, seeds::STREAM_FOLDS, seeds::hash_str(key));
        by_class.entry(c).or_default().push((h, key.as_str(), i));
    }
    if let Some((c, m)) = by_class.iter().find(|(_, m)| m.len() < 2) {
        return Err(EvalError::DegenerateStrata(format!(
            "class {c} has {} member(s); need at least 2",
            m.len()
        )));
    }
    let mut fold_of = vec![0; truth.len()];
    let mut deal = 0;
    for members in by_class.values_mut() {
        members.sort_unstable();
        for &(_, _, i) in members.iter() {
            fold_of[i] = deal % folds;
            deal += 1;
        }
    }
    Ok(fold_of)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

/// Majority vote among the `k` nearest training items (clamped to the
/// training size); vote ties go to the smaller distance sum, then the
/// smaller class id. Distance ties among candidates resolve by key.
fn vote(query: &[f64], train: &[(&[f64], usize, &str)], k: usize) -> usize {
    let mut scored: Vec<(f64, &str, usize)> = train
        .iter()
        .map(|&(x, c, key)| (sq_dist(query, x), key, c))
        .collect();
    let k = k.min(scored.len());
    scored.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(b.1)));
    let mut tally: BTreeMap<usize, (usize, f64)> = BTreeMap::new();
    for &(d2, _, c) in &scored[..k] {
        let e = tally.entry(c).or_default();
        e.0 += 1;
        e.1 += d2.sqrt();
    }
    tally
        .into_iter()
        .min_by(|a, b| {
            b.1 .0
                .cmp(&a.1 .0)
                .then(a.1 .1.total_cmp(&b.1 .1))
                .then(a.0.cmp(&b.0))
        })
        .map(|(c, _)| c)
        .expect("k >= 1")
}

/// Out-of-fold predictions for items with given fold ids.
pub fn cross_validate(
    points: &[&[f64]],
    keys: &[String],
    truth: &[usize],
    fold_of: &[usize],
    k: usize,
) -> Result<Vec<usize>, EvalError> {
    let n = points.len();
    for len in [keys.len(), truth.len(), fold_of.len()] {
        if len != n {
            return Err(EvalError::LengthMismatch { left: len, right: n });
        }
    }
    if k == 0 {
        return Err(EvalError::InvalidNeighborCount(k));
    }
    let folds = fold_of.iter().copied().max().map_or(0, |m| m + 1);
    let mut pred = vec![usize::MAX; n];
    for f in 0..folds {
        let train: Vec<(&[f64], usize, &str)> = (0..n)
            .filter(|&i| fold_of[i] != f)
            .map(|i| (points[i], truth[i], keys[i].as_str()))
            .collect();
        let test: Vec<usize> = (0..n).filter(|&i| fold_of[i] == f).collect();
        if test.is_empty() {
            continue;
        }
        if train.is_empty() {
            return Err(EvalError::DegenerateStrata(format!("fold {f} leaves no training items")));
        }
        let out: Vec<usize> = test.par_iter().map(|&i| vote(points[i], &train, k)).collect();
        for (&i, c) in test.iter().zip(out) {
            pred[i] = c;
        }
    }
    Ok(pred)
}

fn score(truth: &[usize], predictions: Vec<usize>, average: F1Average) -> Result<KnnOutcome, EvalError> {
    Ok(KnnOutcome {
        accuracy: accuracy(truth, &predictions)?,
        f1: f1_score(truth, &predictions, average)?,
        predictions,
    })
}

/// Stratified k-fold kNN over the nodes of one embedding set.
pub fn knn_cv_classify(set: &EmbeddingSet, truth: &[usize], cfg: &KnnConfig) -> Result<KnnOutcome, EvalError> {
    if truth.len() != set.len() {
        return Err(EvalError::LengthMismatch {
            left: truth.len(),
            right: set.len(),
        });
    }
    let fold_of = stratified_folds(set.labels(), truth, cfg.folds, cfg.seed)?;
    let points: Vec<&[f64]> = (0..set.len()).map(|a| set.row(a)).collect();
    let pred = cross_validate(&points, set.labels(), truth, &fold_of, cfg.k)?;
    score(truth, pred, cfg.average)
}

/// kNN where whole graphs form the folds: every node of a test graph is
/// classified from nodes of the training graphs only.
pub fn knn_cv_across_graphs(
    sets: &[EmbeddingSet],
    truths: &[Vec<usize>],
    cfg: &KnnConfig,
) -> Result<KnnOutcome, EvalError> {
    if sets.len() != truths.len() {
        return Err(EvalError::LengthMismatch {
            left: sets.len(),
            right: truths.len(),
        });
    }
    if sets.len() < cfg.folds || cfg.folds < 2 {
        return Err(EvalError::TooFewItems {
            items: sets.len(),
            folds: cfg.folds,
        });
    }
    let dim = sets.first().map_or(0, EmbeddingSet::dim);
    if let Some(s) = sets.iter().find(|s| s.dim() != dim) {
        return Err(EvalError::LengthMismatch {
            left: s.dim(),
            right: dim,
        });
    }
    let mut graph_order: Vec<(u64, usize)> = (0..sets.len())
        .map(|g| (seeds::derive(cfg.seed, seeds::STREAM_FOLDS, g as u64), g))
        .collect();
    graph_order.sort_unstable();
    let mut graph_fold = vec![0; sets.len()];
    for (rank, &(_, g)) in graph_order.iter().enumerate() {
        graph_fold[g] = rank % cfg.folds;
    }

    let mut points = Vec::new();
    let mut keys = Vec::new();
    let mut truth = Vec::new();
    let mut fold_of = Vec::new();
    for (g, (set, t)) in sets.iter().zip(truths).enumerate() {
        if t.len() != set.len() {
            return Err(EvalError::LengthMismatch {
                left: t.len(),
                right: set.len(),
            });
        }
        for ((row, label), &role) in set.rows().zip(set.labels()).zip(t) {
            points.push(row);
            keys.push(format!("{g}/{label}"));
            truth.push(role);
            fold_of.push(graph_fold[g]);
        }
    }
    let pred = cross_validate(&points, &keys, &truth, &fold_of, cfg.k)?;
    score(&truth, pred, cfg.average)
}

/// Fraction of nodes whose nearest other node is their mirror image. An
/// exact distance tie counts in the mirror's favour.
pub fn mirror_accuracy(set: &EmbeddingSet, mirror: &[usize]) -> Result<f64, EvalError> {
    let n = set.len();
    if mirror.len() != n {
        return Err(EvalError::LengthMismatch {
            left: mirror.len(),
            right: n,
        });
    }
    if n < 2 {
        return Err(EvalError::TooFewItems { items: n, folds: 2 });
    }
    let hits = (0..n)
        .into_par_iter()
        .filter(|&a| {
            let twin = set.distance(a, mirror[a]);
            (0..n)
                .filter(|&b| b != a)
                .all(|b| set.distance(a, b) >= twin)
        })
        .count();
    Ok(hits as f64 / n as f64)
}
