//! Scoring embeddings against ground-truth roles.

mod clustering;
mod knn;
mod metrics;

use std::fmt::Write as _;

use rayon::prelude::*;

pub use clustering::{agglomerative_cluster, single_linkage, ClusteringResult};
pub use knn::{
    cross_validate, knn_cv_across_graphs, knn_cv_classify, mirror_accuracy, stratified_folds, KnnConfig,
    KnnOutcome,
};
pub use metrics::{accuracy, f1_score, homogeneity_completeness, silhouette, F1Average};

use crate::embedding::{embed_all, EmbeddingConfig, EmbeddingError, EmbeddingSet};
use crate::seeds;
use crate::synthgen::{NamedBenchmark, RoleBenchmark, SynthError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("cannot form {k} clusters from {n} items")]
    InvalidClusterCount { k: usize, n: usize },
    #[error("silhouette needs at least two clusters")]
    SingleCluster,
    #[error("degenerate strata: {0}")]
    DegenerateStrata(String),
    #[error("{items} items are too few for {folds} folds")]
    TooFewItems { items: usize, folds: usize },
    #[error("neighbour count must be positive, got {0}")]
    InvalidNeighborCount(usize),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Synth(#[from] SynthError),
}

/// Scores of one pipeline run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialMetrics {
    pub homogeneity: f64,
    pub completeness: f64,
    pub silhouette: f64,
    pub accuracy: f64,
    pub f1: f64,
}

impl TrialMetrics {
    pub const NAMES: [&'static str; 5] = ["homogeneity", "completeness", "silhouette", "accuracy", "f1"];

    pub fn values(&self) -> [f64; 5] {
        [self.homogeneity, self.completeness, self.silhouette, self.accuracy, self.f1]
    }

    fn from_values(v: [f64; 5]) -> Self {
        Self {
            homogeneity: v[0],
            completeness: v[1],
            silhouette: v[2],
            accuracy: v[3],
            f1: v[4],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub trial: usize,
    pub seed: u64,
    pub result: Result<TrialMetrics, String>,
}

/// Per-trial scores plus summary statistics over the successful trials.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub name: String,
    pub trials: Vec<TrialOutcome>,
}

impl MetricReport {
    pub fn successful(&self) -> Vec<TrialMetrics> {
        self.trials.iter().filter_map(|t| t.result.clone().ok()).collect()
    }

    pub fn failures(&self) -> Vec<(usize, &str)> {
        self.trials
            .iter()
            .filter_map(|t| t.result.as_ref().err().map(|e| (t.trial, e.as_str())))
            .collect()
    }

    /// Mean of each metric; `None` when every trial failed.
    pub fn mean(&self) -> Option<TrialMetrics> {
        let ok = self.successful();
        if ok.is_empty() {
            return None;
        }
        let mut sum = [0.0; 5];
        for m in &ok {
            for (s, v) in sum.iter_mut().zip(m.values()) {
                *s += v;
            }
        }
        Some(TrialMetrics::from_values(sum.map(|s| s / ok.len() as f64)))
    }

    /// Population standard deviation of each metric.
    pub fn std(&self) -> Option<TrialMetrics> {
        let ok = self.successful();
        let mean = self.mean()?.values();
        let mut acc = [0.0; 5];
        for m in &ok {
            for ((a, v), mu) in acc.iter_mut().zip(m.values()).zip(mean) {
                *a += (v - mu).powi(2);
            }
        }
        Some(TrialMetrics::from_values(acc.map(|a| (a / ok.len() as f64).sqrt())))
    }

    /// Aligned plain-text summary.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}: {} trial(s), {} failed", self.name, self.trials.len(), self.failures().len());
        let _ = writeln!(out, "{:<14}{:>10}{:>10}", "metric", "mean", "std");
        if let (Some(m), Some(s)) = (self.mean(), self.std()) {
            for ((name, mu), sd) in TrialMetrics::NAMES.iter().zip(m.values()).zip(s.values()) {
                let _ = writeln!(out, "{name:<14}{mu:>10.4}{sd:>10.4}");
            }
        }
        for (t, e) in self.failures() {
            let _ = writeln!(out, "trial {t} failed: {e}");
        }
        out
    }

    /// One row per trial followed by `mean` and `std` rows.
    pub fn to_csv(&self) -> String {
        let mut out = format!("trial,seed,status,{}\n", TrialMetrics::NAMES.join(","));
        let row = |v: [f64; 5]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        for t in &self.trials {
            match &t.result {
                Ok(m) => {
                    let _ = writeln!(out, "{},{},ok,{}", t.trial, t.seed, row(m.values()));
                }
                Err(e) => {
                    let msg = e.replace([',', '\n'], ";");
                    let _ = writeln!(out, "{},{},failed: {msg},,,,,", t.trial, t.seed);
                }
            }
        }
        if let (Some(m), Some(s)) = (self.mean(), self.std()) {
            let _ = writeln!(out, "mean,,,{}", row(m.values()));
            let _ = writeln!(out, "std,,,{}", row(s.values()));
        }
        out
    }
}

/// Clusters with the true role count and runs kNN cross-validation.
pub fn score_embedding(
    set: &EmbeddingSet,
    bench: &RoleBenchmark,
    knn: &KnnConfig,
) -> Result<TrialMetrics, EvalError> {
    let k = bench.roles_present();
    let dist = set.distance_matrix();
    let clusters = single_linkage(&dist, set.len(), k)?;
    let (homogeneity, completeness) = homogeneity_completeness(&bench.roles, &clusters.assignments)?;
    let silhouette = silhouette(&dist, set.len(), &clusters.assignments)?;
    let cv = knn_cv_classify(set, &bench.roles, knn)?;
    Ok(TrialMetrics {
        homogeneity,
        completeness,
        silhouette,
        accuracy: cv.accuracy,
        f1: cv.f1,
    })
}

/// Regenerates `bench` with a derived seed per trial, embeds it and scores
/// it. Trial failures are kept in the report.
pub fn run_benchmark(
    bench: NamedBenchmark,
    trials: usize,
    seed: u64,
    cfg: &EmbeddingConfig,
    knn: &KnnConfig,
) -> MetricReport {
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let trial_seed = seeds::derive(seed, seeds::STREAM_TRIAL, trial as u64);
            let result = (|| -> Result<TrialMetrics, EvalError> {
                let b = bench.generate(trial_seed)?;
                let set = embed_all(&b.graph, cfg)?;
                let knn = KnnConfig {
                    seed: seeds::derive(trial_seed, seeds::STREAM_FOLDS, 0),
                    ..*knn
                };
                score_embedding(&set, &b, &knn)
            })()
            .map_err(|e| e.to_string());
            TrialOutcome {
                trial,
                seed: trial_seed,
                result,
            }
        })
        .collect();
    MetricReport {
        name: bench.as_str().to_string(),
        trials: outcomes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_statistics() {
        let m = |x: f64| TrialMetrics::from_values([x; 5]);
        let r = MetricReport {
            name: "t".into(),
            trials: vec![
                TrialOutcome { trial: 0, seed: 1, result: Ok(m(1.0)) },
                TrialOutcome { trial: 1, seed: 2, result: Ok(m(0.5)) },
                TrialOutcome { trial: 2, seed: 3, result: Err("boom".into()) },
            ],
        };
        assert_eq!(r.mean().unwrap().accuracy, 0.75);
        assert_eq!(r.std().unwrap().f1, 0.25);
        assert_eq!(r.failures(), vec![(2, "boom")]);
        let csv = r.to_csv();
        assert_eq!(csv.lines().count(), 1 + 3 + 2);
        assert!(csv.contains("2,3,failed: boom,,,,,"));
        assert!(r.to_table().contains("trial 2 failed: boom"));
    }

    #[test]
    fn single_trial_is_deterministic() {
        let cfg = EmbeddingConfig::default();
        let knn = KnnConfig::default();
        let a = run_benchmark(NamedBenchmark::House, 1, 5, &cfg, &knn);
        let b = run_benchmark(NamedBenchmark::House, 1, 5, &cfg, &knn);
        assert_eq!(a.trials.len(), 1);
        assert_eq!(a, b);
        let m = a.mean().unwrap();
        assert!(m.homogeneity > 0.99 && m.accuracy > 0.99, "{m:?}");
    }
}
