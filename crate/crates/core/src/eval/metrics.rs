//! Entropy-based clustering scores, silhouette, accuracy and F1.

use std::collections::{BTreeMap, BTreeSet};

use super::EvalError;

fn check_lengths(a: &[usize], b: &[usize]) -> Result<(), EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

fn entropy(counts: impl Iterator<Item = usize>, total: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / total;
            -p * p.ln()
        })
        .sum()
}

/// `(homogeneity, completeness)`; a zero marginal entropy scores 1.
pub fn homogeneity_completeness(truth: &[usize], pred: &[usize]) -> Result<(f64, f64), EvalError> {
    check_lengths(truth, pred)?;
    let n = truth.len() as f64;
    if truth.is_empty() {
        return Ok((1.0, 1.0));
    }
    let mut joint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut t_count: BTreeMap<usize, usize> = BTreeMap::new();
    let mut p_count: BTreeMap<usize, usize> = BTreeMap::new();
    for (&t, &p) in truth.iter().zip(pred) {
        *joint.entry((t, p)).or_default() += 1;
        *t_count.entry(t).or_default() += 1;
        *p_count.entry(p).or_default() += 1;
    }
    let h_truth = entropy(t_count.values().copied(), n);
    let h_pred = entropy(p_count.values().copied(), n);
    let h_joint = entropy(joint.values().copied(), n);
    // H(T|P) = H(T,P) - H(P)
    let h_t_given_p = (h_joint - h_pred).max(0.0);
    let h_p_given_t = (h_joint - h_truth).max(0.0);
    let score = |cond: f64, marginal: f64| {
        if marginal == 0.0 {
            1.0
        } else {
            (1.0 - cond / marginal).clamp(0.0, 1.0)
        }
    };
    Ok((score(h_t_given_p, h_truth), score(h_p_given_t, h_pred)))
}

/// Mean silhouette from a row-major distance matrix. Singletons score 0 and
/// so does a point whose `a` and `b` are both 0.
pub fn silhouette(dist: &[f64], n: usize, pred: &[usize]) -> Result<f64, EvalError> {
    if pred.len() != n || dist.len() != n * n {
        return Err(EvalError::LengthMismatch {
            left: pred.len(),
            right: n,
        });
    }
    let clusters: BTreeSet<usize> = pred.iter().copied().collect();
    if clusters.len() < 2 {
        return Err(EvalError::SingleCluster);
    }
    let ids: Vec<usize> = clusters.into_iter().collect();
    let slot = |c: usize| ids.binary_search(&c).expect("known cluster");
    let mut sizes = vec![0usize; ids.len()];
    for &c in pred {
        sizes[slot(c)] += 1;
    }
    let mut total = 0.0;
    let mut sums = vec![0.0; ids.len()];
    for i in 0..n {
        let own = slot(pred[i]);
        if sizes[own] == 1 {
            continue;
        }
        sums.iter_mut().for_each(|s| *s = 0.0);
        for j in 0..n {
            if j != i {
                sums[slot(pred[j])] += dist[i * n + j];
            }
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..ids.len())
            .filter(|&c| c != own)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    Ok(total / n as f64)
}

pub fn accuracy(truth: &[usize], pred: &[usize]) -> Result<f64, EvalError> {
    check_lengths(truth, pred)?;
    if truth.is_empty() {
        return Ok(0.0);
    }
    let hits = truth.iter().zip(pred).filter(|(t, p)| t == p).count();
    Ok(hits as f64 / truth.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum F1Average {
    /// Per-class F1 weighted by true support.
    #[default]
    Weighted,
    /// Unweighted mean over classes seen in truth or prediction.
    Macro,
}

impl F1Average {
    pub fn as_str(self) -> &'static str {
        match self {
            F1Average::Weighted => "weighted",
            F1Average::Macro => "macro",
        }
    }
}

pub fn f1_score(truth: &[usize], pred: &[usize], average: F1Average) -> Result<f64, EvalError> {
    check_lengths(truth, pred)?;
    let classes: BTreeSet<usize> = truth.iter().chain(pred).copied().collect();
    let mut weighted = 0.0;
    let mut unweighted = 0.0;
    for &c in &classes {
        let tp = truth.iter().zip(pred).filter(|&(&t, &p)| t == c && p == c).count() as f64;
        let support = truth.iter().filter(|&&t| t == c).count() as f64;
        let predicted = pred.iter().filter(|&&p| p == c).count() as f64;
        // 2PR/(P+R) simplifies to 2TP/(support+predicted).
        let f1 = if support + predicted > 0.0 { 2.0 * tp / (support + predicted) } else { 0.0 };
        weighted += f1 * support;
        unweighted += f1;
    }
    Ok(match average {
        F1Average::Weighted if truth.is_empty() => 0.0,
        F1Average::Weighted => weighted / truth.len() as f64,
        F1Average::Macro if classes.is_empty() => 0.0,
        F1Average::Macro => unweighted / classes.len() as f64,
    })
}
