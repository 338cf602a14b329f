//! End-to-end experiment protocols.

use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::time::Instant;

use rayon::prelude::*;

use crate::embedding::{embed_all, EmbeddingConfig, EmbeddingError, EmbeddingSet};
use crate::eval::{
    knn_cv_across_graphs, mirror_accuracy, run_benchmark, score_embedding, EvalError, KnnConfig,
    MetricReport, TrialMetrics, TrialOutcome,
};
use crate::seeds;
use crate::spectral::SpectrumMode;
use crate::synthgen::{
    make_crossgraph_corpus, make_mirrored_karate, make_scaling_family, perturb_edges, CorpusRecipe,
    NamedBenchmark, PerturbMode, SynthError,
};
use crate::wavelet::WaveletMode;

pub const DEFAULT_TRIALS: usize = 25;
pub const DEFAULT_CORPUS_SIZE: usize = 200;
pub const DEFAULT_SCALING_SIZES: [usize; 5] = [1000, 2000, 4000, 8000, 16000];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExperimentError {
    #[error("unknown experiment '{0}'")]
    UnknownExperiment(String),
    #[error("protocol deviation refused: {0}")]
    RefusedDeviation(String),
    #[error("invalid experiment setting: {0}")]
    InvalidSetting(String),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Synth(#[from] SynthError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentName {
    Barbell,
    House,
    HousePerturbed,
    Varied,
    VariedPerturbed,
    Crossgraph,
    Karate,
    Scaling,
    NoiseSweep,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 9] = [
        ExperimentName::Barbell,
        ExperimentName::House,
        ExperimentName::HousePerturbed,
        ExperimentName::Varied,
        ExperimentName::VariedPerturbed,
        ExperimentName::Crossgraph,
        ExperimentName::Karate,
        ExperimentName::Scaling,
        ExperimentName::NoiseSweep,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentName::Barbell => "barbell",
            ExperimentName::House => "house",
            ExperimentName::HousePerturbed => "house-perturbed",
            ExperimentName::Varied => "varied",
            ExperimentName::VariedPerturbed => "varied-perturbed",
            ExperimentName::Crossgraph => "crossgraph",
            ExperimentName::Karate => "karate",
            ExperimentName::Scaling => "scaling",
            ExperimentName::NoiseSweep => "noise-sweep",
        }
    }

    pub fn parse(s: &str) -> Result<Self, ExperimentError> {
        Self::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| ExperimentError::UnknownExperiment(s.to_string()))
    }

    fn role_benchmark(self) -> Option<NamedBenchmark> {
        match self {
            ExperimentName::House => Some(NamedBenchmark::House),
            ExperimentName::HousePerturbed => Some(NamedBenchmark::HousePerturbed),
            ExperimentName::Varied => Some(NamedBenchmark::Varied),
            ExperimentName::VariedPerturbed => Some(NamedBenchmark::VariedPerturbed),
            _ => None,
        }
    }
}

/// Clustering used by the noise sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SweepClustering {
    #[default]
    Agglomerative,
    /// Not implemented; requesting it is refused.
    AffinityPropagation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub embedding: EmbeddingConfig,
    pub knn: KnnConfig,
    pub trials: usize,
    pub seed: u64,
    pub corpus_size: usize,
    pub corpus: CorpusRecipe,
    pub mirror_edges: RangeInclusive<usize>,
    pub scaling_sizes: Vec<usize>,
    /// Timed runs per size; the median is reported.
    pub scaling_repeats: usize,
    pub noise_levels: Vec<f64>,
    pub sweep_clustering: SweepClustering,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            embedding: EmbeddingConfig::default(),
            knn: KnnConfig::default(),
            trials: DEFAULT_TRIALS,
            seed: 0,
            corpus_size: DEFAULT_CORPUS_SIZE,
            corpus: CorpusRecipe::default(),
            mirror_edges: 1..=25,
            scaling_sizes: DEFAULT_SCALING_SIZES.to_vec(),
            scaling_repeats: 3,
            noise_levels: (0..=10).map(|i| i as f64 * 0.05).collect(),
            sweep_clustering: SweepClustering::Agglomerative,
        }
    }
}

/// Distances among barbell orbits.
#[derive(Debug, Clone, PartialEq)]
pub struct BarbellResult {
    pub role_count: usize,
    /// Largest distance between two nodes of the same role.
    pub max_within: f64,
    /// Smallest distance between nodes of different roles.
    pub min_between: f64,
    pub set: EmbeddingSet,
    pub roles: Vec<usize>,
}

/// Embeds the default barbell with dense wavelets.
pub fn barbell(cfg: &ExperimentConfig) -> Result<BarbellResult, ExperimentError> {
    let b = NamedBenchmark::Barbell.generate(cfg.seed)?;
    let emb = EmbeddingConfig {
        mode: WaveletMode::Dense,
        ..cfg.embedding.clone()
    };
    let set = embed_all(&b.graph, &emb)?;
    let (mut max_within, mut min_between) = (0.0f64, f64::INFINITY);
    for a in 0..set.len() {
        for c in a + 1..set.len() {
            let d = set.distance(a, c);
            if b.roles[a] == b.roles[c] {
                max_within = max_within.max(d);
            } else {
                min_between = min_between.min(d);
            }
        }
    }
    Ok(BarbellResult {
        role_count: b.role_count(),
        max_within,
        min_between,
        set,
        roles: b.roles,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossgraphResult {
    pub graphs: usize,
    pub nodes: usize,
    pub accuracy: f64,
    pub f1: f64,
}

/// Embeds every corpus graph and classifies each node from the other
/// graphs' nodes under graph-level folds.
pub fn crossgraph(cfg: &ExperimentConfig) -> Result<CrossgraphResult, ExperimentError> {
    let corpus = make_crossgraph_corpus(cfg.corpus_size, cfg.seed, &cfg.corpus)?;
    let sets = corpus
        .par_iter()
        .map(|b| embed_all(&b.graph, &cfg.embedding))
        .collect::<Result<Vec<_>, _>>()?;
    let truths: Vec<Vec<usize>> = corpus.iter().map(|b| b.roles.clone()).collect();
    let knn = KnnConfig {
        seed: seeds::derive(cfg.seed, seeds::STREAM_FOLDS, 0),
        ..cfg.knn
    };
    let out = knn_cv_across_graphs(&sets, &truths, &knn)?;
    Ok(CrossgraphResult {
        graphs: corpus.len(),
        nodes: truths.iter().map(Vec::len).sum(),
        accuracy: out.accuracy,
        f1: out.f1,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KarateResult {
    /// `(mirror edge count, accuracy)`.
    pub points: Vec<(usize, f64)>,
}

impl KarateResult {
    pub fn mean(&self) -> f64 {
        self.points.iter().map(|p| p.1).sum::<f64>() / self.points.len().max(1) as f64
    }

    pub fn min(&self) -> f64 {
        self.points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("mirror_edges,accuracy\n");
        for (k, a) in &self.points {
            let _ = writeln!(out, "{k},{a}");
        }
        let _ = writeln!(out, "mean,{}", self.mean());
        out
    }
}

/// Mirror-recovery accuracy for each mirror edge count.
pub fn karate(cfg: &ExperimentConfig) -> Result<KarateResult, ExperimentError> {
    if cfg.mirror_edges.is_empty() {
        return Err(ExperimentError::InvalidSetting("empty mirror edge range".into()));
    }
    let points = cfg
        .mirror_edges
        .clone()
        .into_par_iter()
        .map(|k| {
            let b = make_mirrored_karate(k, cfg.seed)?;
            let set = embed_all(&b.graph, &cfg.embedding)?;
            let mirror = b.mirror.as_ref().expect("mirrored benchmark has a mirror map");
            Ok((k, mirror_accuracy(&set, mirror)?))
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    Ok(KarateResult { points })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub nodes: usize,
    pub edges: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingResult {
    pub rows: Vec<ScalingRow>,
}

impl ScalingResult {
    /// Least-squares slope of `ln(seconds)` against `ln(edges)`.
    pub fn loglog_slope(&self) -> f64 {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .map(|r| ((r.edges as f64).ln(), r.seconds.max(1e-12).ln()))
            .collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("nodes,edges,seconds\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{}", r.nodes, r.edges, r.seconds);
        }
        out
    }
}

/// Median wall time of the Chebyshev pipeline per graph size.
pub fn scaling(cfg: &ExperimentConfig) -> Result<ScalingResult, ExperimentError> {
    if cfg.scaling_repeats == 0 {
        return Err(ExperimentError::InvalidSetting("scaling repeats must be >= 1".into()));
    }
    let graphs = make_scaling_family(&cfg.scaling_sizes, cfg.seed)?;
    let emb = EmbeddingConfig {
        mode: WaveletMode::Chebyshev,
        spectrum_mode: SpectrumMode::Iterative,
        ..cfg.embedding.clone()
    };
    // Warm-up so the first timed size does not pay one-off costs.
    if let Some(g) = graphs.first() {
        embed_all(g, &emb)?;
    }
    let mut rows = Vec::new();
    for g in &graphs {
        let mut times = Vec::with_capacity(cfg.scaling_repeats);
        for _ in 0..cfg.scaling_repeats {
            let start = Instant::now();
            embed_all(g, &emb)?;
            times.push(start.elapsed().as_secs_f64());
        }
        times.sort_by(f64::total_cmp);
        rows.push(ScalingRow {
            nodes: g.node_count(),
            edges: g.edge_count(),
            seconds: times[times.len() / 2],
        });
    }
    Ok(ScalingResult { rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseRow {
    pub fraction: f64,
    pub report: MetricReport,
}

/// Header comment describing how the sweep departs from an
/// affinity-propagation protocol.
pub const NOISE_SWEEP_NOTE: &str =
    "clustering: single-linkage agglomerative with the true role count (used in place of affinity propagation)";

/// Scores on the varied benchmark as edge rewiring grows.
pub fn noise_sweep(cfg: &ExperimentConfig) -> Result<Vec<NoiseRow>, ExperimentError> {
    if cfg.sweep_clustering == SweepClustering::AffinityPropagation {
        return Err(ExperimentError::RefusedDeviation(
            "affinity propagation is not implemented; use agglomerative clustering".into(),
        ));
    }
    cfg.noise_levels
        .iter()
        .enumerate()
        .map(|(level, &fraction)| {
            let trials = (0..cfg.trials)
                .into_par_iter()
                .map(|trial| {
                    let trial_seed = seeds::derive(
                        seeds::derive(cfg.seed, seeds::STREAM_NOISE, level as u64),
                        seeds::STREAM_TRIAL,
                        trial as u64,
                    );
                    let result = (|| -> Result<TrialMetrics, ExperimentError> {
                        let clean = NamedBenchmark::Varied.generate(trial_seed)?;
                        let b = perturb_edges(&clean, fraction, PerturbMode::Rewire, trial_seed)?;
                        let set = embed_all(&b.graph, &cfg.embedding)?;
                        let knn = KnnConfig {
                            seed: seeds::derive(trial_seed, seeds::STREAM_FOLDS, 0),
                            ..cfg.knn
                        };
                        Ok(score_embedding(&set, &b, &knn)?)
                    })()
                    .map_err(|e| e.to_string());
                    TrialOutcome {
                        trial,
                        seed: trial_seed,
                        result,
                    }
                })
                .collect();
            Ok(NoiseRow {
                fraction,
                report: MetricReport {
                    name: format!("varied-rewired-{fraction}"),
                    trials,
                },
            })
        })
        .collect()
}

pub fn noise_sweep_csv(rows: &[NoiseRow]) -> String {
    let mut out = format!("# {NOISE_SWEEP_NOTE}\nfraction,trials,failed");
    for name in TrialMetrics::NAMES {
        let _ = write!(out, ",{name}_mean,{name}_std");
    }
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{},{},{}", r.fraction, r.report.trials.len(), r.report.failures().len());
        match (r.report.mean(), r.report.std()) {
            (Some(m), Some(s)) => {
                for (mu, sd) in m.values().iter().zip(s.values()) {
                    let _ = write!(out, ",{mu},{sd}");
                }
            }
            _ => out.push_str(&",".repeat(10)),
        }
        out.push('\n');
    }
    out
}

/// Rendered outputs of one experiment: a human summary and named files.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub name: ExperimentName,
    pub summary: String,
    /// `(file suffix, contents)`; timing files are marked by the suffix
    /// `timing.csv`.
    pub files: Vec<(String, String)>,
}

pub fn run_experiment(name: ExperimentName, cfg: &ExperimentConfig) -> Result<ExperimentOutput, ExperimentError> {
    if let Some(bench) = name.role_benchmark() {
        let report = run_benchmark(bench, cfg.trials, cfg.seed, &cfg.embedding, &cfg.knn);
        return Ok(ExperimentOutput {
            name,
            summary: report.to_table(),
            files: vec![
                ("report.txt".into(), report.to_table()),
                ("report.csv".into(), report.to_csv()),
            ],
        });
    }
    let (summary, files) = match name {
        ExperimentName::Barbell => {
            let r = barbell(cfg)?;
            let summary = format!(
                "barbell: {} roles, max within-role distance {}, min between-role distance {}\n",
                r.role_count, r.max_within, r.min_between
            );
            let mut emb = Vec::new();
            r.set.write_csv(&mut emb).expect("writing to memory");
            let mut roles = String::from("node,role_id\n");
            for (l, role) in r.set.labels().iter().zip(&r.roles) {
                let _ = writeln!(roles, "{l},{role}");
            }
            (
                summary.clone(),
                vec![
                    ("report.txt".into(), summary),
                    ("embedding.csv".into(), String::from_utf8(emb).expect("utf-8")),
                    ("roles.csv".into(), roles),
                ],
            )
        }
        ExperimentName::Crossgraph => {
            let r = crossgraph(cfg)?;
            let summary = format!(
                "crossgraph: {} graphs, {} nodes, accuracy {}, f1 {}\n",
                r.graphs, r.nodes, r.accuracy, r.f1
            );
            let csv = format!("graphs,nodes,accuracy,f1\n{},{},{},{}\n", r.graphs, r.nodes, r.accuracy, r.f1);
            (summary.clone(), vec![("report.txt".into(), summary), ("report.csv".into(), csv)])
        }
        ExperimentName::Karate => {
            let r = karate(cfg)?;
            let summary = format!(
                "karate: mirror edges {}..={}, mean accuracy {}, min {}, max {}\n",
                cfg.mirror_edges.start(),
                cfg.mirror_edges.end(),
                r.mean(),
                r.min(),
                r.max()
            );
            (summary.clone(), vec![("report.txt".into(), summary), ("report.csv".into(), r.to_csv())])
        }
        ExperimentName::Scaling => {
            let r = scaling(cfg)?;
            let summary = format!("scaling: log-log slope of time vs edges {}\n", r.loglog_slope());
            (summary.clone(), vec![("report.txt".into(), summary), ("timing.csv".into(), r.to_csv())])
        }
        ExperimentName::NoiseSweep => {
            let rows = noise_sweep(cfg)?;
            let csv = noise_sweep_csv(&rows);
            let mut summary = format!("noise-sweep ({NOISE_SWEEP_NOTE})\n");
            for r in &rows {
                if let Some(m) = r.report.mean() {
                    let _ = writeln!(
                        summary,
                        "rewired {:.2}: homogeneity {:.4} accuracy {:.4}",
                        r.fraction, m.homogeneity, m.accuracy
                    );
                }
            }
            (summary.clone(), vec![("report.txt".into(), summary), ("noise.csv".into(), csv)])
        }
        _ => unreachable!("role benchmarks handled above"),
    };
    Ok(ExperimentOutput { name, summary, files })
}
