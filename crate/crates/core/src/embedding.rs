//! Structural embeddings: sampled empirical characteristic functions of
//! wavelet coefficient distributions, concatenated over scales.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use rayon::prelude::*;

use crate::graph::Graph;
use crate::spectral::{ChebyshevWorkspace, SpectralConfig, SpectrumMode, DEFAULT_CHEBYSHEV_ORDER};
use crate::wavelet::{
    admissible_scale_bound, select_scales, HeatDiffusion, WaveletColumn, WaveletError,
    WaveletMode, WaveletPath, DEFAULT_ETA, DEFAULT_GAMMA, TRUNCATION_EPS,
};

pub const DEFAULT_SAMPLE_COUNT: usize = 50;
pub const DEFAULT_T_MAX: f64 = 100.0;
pub const DEFAULT_SCALE_COUNT: usize = 2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EmbeddingError {
    #[error(transparent)]
    Wavelet(#[from] WaveletError),
    #[error("invalid embedding configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("unknown node label '{0}'")]
    UnknownNode(String),
    #[error("node index {index} out of range for {n} nodes")]
    NodeOutOfRange { index: usize, n: usize },
    #[error("k = {k} out of range ({available} candidates)")]
    NeighborCount { k: usize, available: usize },
    #[error("embedding file line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Where the diffusion scales come from.
#[derive(Debug, Clone, PartialEq)]
pub enum ScaleSource {
    /// Heuristic range from the extreme eigenvalues.
    Auto { eta: f64, gamma: f64, count: usize },
    Explicit(Vec<f64>),
}

impl Default for ScaleSource {
    fn default() -> Self {
        ScaleSource::Auto {
            eta: DEFAULT_ETA,
            gamma: DEFAULT_GAMMA,
            count: DEFAULT_SCALE_COUNT,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingConfig {
    /// Number of characteristic-function sample points `d`.
    pub sample_count: usize,
    pub t_max: f64,
    pub scales: ScaleSource,
    pub mode: WaveletMode,
    pub spectrum_mode: SpectrumMode,
    /// Chebyshev order `K`.
    pub order: usize,
    pub spectral: SpectralConfig,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        Self {
            sample_count: DEFAULT_SAMPLE_COUNT,
            t_max: DEFAULT_T_MAX,
            scales: ScaleSource::default(),
            mode: WaveletMode::Auto,
            spectrum_mode: SpectrumMode::Auto,
            order: DEFAULT_CHEBYSHEV_ORDER,
            spectral: SpectralConfig::default(),
        }
    }
}

impl EmbeddingConfig {
    pub fn validate(&self) -> Result<(), EmbeddingError> {
        if self.sample_count == 0 {
            return Err(EmbeddingError::InvalidConfig("d must be at least 1".into()));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(EmbeddingError::InvalidConfig(format!(
                "t_max must be positive and finite, got {}",
                self.t_max
            )));
        }
        if self.order == 0 {
            return Err(EmbeddingError::InvalidConfig("Chebyshev order must be at least 1".into()));
        }
        if let ScaleSource::Explicit(s) = &self.scales {
            if s.is_empty() || s.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
                return Err(EmbeddingError::InvalidConfig(
                    "explicit scales must be a non-empty list of finite values >= 0".into(),
                ));
            }
        }
        Ok(())
    }

    /// `t_i = i * t_max / d` for `i = 1..=d`.
    pub fn sample_points(&self) -> Vec<f64> {
        let d = self.sample_count;
        (1..=d)
            .map(|i| if i == d { self.t_max } else { i as f64 * self.t_max / d as f64 })
            .collect()
    }
}

/// `φ(t) = (1/N) Σ_m e^{i t Ψ_ma}`, with the unstored zeros contributing
/// `(1, 0)` each.
pub fn char_function(col: &WaveletColumn, t: f64) -> (f64, f64) {
    let mut out = [0.0; 2];
    char_function_samples(col, &[t], &mut out);
    (out[0], out[1])
}

/// Interleaved `(Re, Im)` samples of the characteristic function at each `t`.
pub fn char_function_samples(col: &WaveletColumn, ts: &[f64], out: &mut [f64]) {
    assert_eq!(out.len(), 2 * ts.len());
    let n = col.len() as f64;
    let zeros = (col.len() - col.nnz()) as f64;
    for (k, &t) in ts.iter().enumerate() {
        let (mut re, mut im) = (zeros, 0.0);
        for &v in col.values() {
            let (s, c) = (t * v).sin_cos();
            re += c;
            im += s;
        }
        out[2 * k] = re / n;
        out[2 * k + 1] = im / n;
    }
}

/// `‖x - y‖₂`.
pub fn structural_distance(x: &[f64], y: &[f64]) -> Result<f64, EmbeddingError> {
    if x.len() != y.len() {
        return Err(EmbeddingError::DimensionMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(euclidean(x, y))
}

fn euclidean(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
}

/// Embeddings of every node of one graph, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    data: Vec<f64>,
    pub scales: Vec<f64>,
    pub sample_points: Vec<f64>,
    pub order: usize,
    pub path: Option<WaveletPath>,
    pub lambda2: Option<f64>,
    pub lambda_n: Option<f64>,
    pub graph_hash: Option<String>,
    /// Non-fatal diagnostics gathered while embedding.
    pub notes: Vec<String>,
}

impl EmbeddingSet {
    /// Wraps precomputed vectors; all rows must share one length.
    pub fn from_rows(labels: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self, EmbeddingError> {
        let dim = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(dim * rows.len());
        for r in &rows {
            if r.len() != dim {
                return Err(EmbeddingError::DimensionMismatch {
                    left: dim,
                    right: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        if labels.len() != rows.len() {
            return Err(EmbeddingError::DimensionMismatch {
                left: labels.len(),
                right: rows.len(),
            });
        }
        Ok(Self::assemble(labels, dim, data))
    }

    /// Rows labelled `"0".."n-1"`.
    pub fn from_unlabeled(rows: Vec<Vec<f64>>) -> Result<Self, EmbeddingError> {
        let labels = (0..rows.len()).map(|i| i.to_string()).collect();
        Self::from_rows(labels, rows)
    }

    fn assemble(labels: Vec<String>, dim: usize, data: Vec<f64>) -> Self {
        let index = labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        Self {
            labels,
            index,
            dim,
            data,
            scales: Vec::new(),
            sample_points: Vec::new(),
            order: 0,
            path: None,
            lambda2: None,
            lambda_n: None,
            graph_hash: None,
            notes: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn node_index(&self, label: &str) -> Result<usize, EmbeddingError> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| EmbeddingError::UnknownNode(label.to_string()))
    }

    pub fn row(&self, a: usize) -> &[f64] {
        &self.data[a * self.dim..(a + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim.max(1)).take(self.len())
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        euclidean(self.row(a), self.row(b))
    }

    /// Full symmetric `N x N` distance matrix, row-major.
    pub fn distance_matrix(&self) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n * n];
        out.par_chunks_mut(n.max(1)).enumerate().for_each(|(a, row)| {
            for (b, slot) in row.iter_mut().enumerate() {
                *slot = self.distance(a, b);
            }
        });
        out
    }

    /// The `k` closest nodes to `a`, ascending by distance then index. `a`
    /// itself is always skipped.
    pub fn nearest_neighbors(
        &self,
        a: usize,
        k: usize,
        exclude: &BTreeSet<usize>,
    ) -> Result<Vec<(usize, f64)>, EmbeddingError> {
        let n = self.len();
        if a >= n {
            return Err(EmbeddingError::NodeOutOfRange { index: a, n });
        }
        let mut cands: Vec<(usize, f64)> = (0..n)
            .filter(|&b| b != a && !exclude.contains(&b))
            .map(|b| (b, self.distance(a, b)))
            .collect();
        if k == 0 || k > cands.len() {
            return Err(EmbeddingError::NeighborCount {
                k,
                available: cands.len(),
            });
        }
        cands.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)));
        cands.truncate(k);
        Ok(cands)
    }

    /// `node,s{j}_t{i}_re,s{j}_t{i}_im,...` with 1-based `j` and `i`.
    pub fn csv_header(&self) -> String {
        let mut h = String::from("node");
        let per_scale = self.sample_points.len().max(1);
        let scales = if self.sample_points.is_empty() { 0 } else { self.dim / (2 * per_scale) };
        if scales * 2 * per_scale == self.dim && scales > 0 {
            for j in 1..=scales {
                for i in 1..=per_scale {
                    let _ = write!(h, ",s{j}_t{i}_re,s{j}_t{i}_im");
                }
            }
        } else {
            for c in 1..=self.dim {
                let _ = write!(h, ",c{c}");
            }
        }
        h
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", self.csv_header())?;
        for (label, row) in self.labels.iter().zip(self.rows()) {
            let mut line = label.clone();
            for v in row {
                let _ = write!(line, ",{v}");
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    /// Reads a CSV produced by [`EmbeddingSet::write_csv`]. Lines starting
    /// with `#` are skipped.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self, EmbeddingError> {
        let mut labels = Vec::new();
        let mut rows = Vec::new();
        let mut header_cols: Option<usize> = None;
        for (i, line) in input.lines().enumerate() {
            let lineno = i + 1;
            let line = line.map_err(|e| EmbeddingError::Parse {
                line: lineno,
                message: e.to_string(),
            })?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split(',');
            let first = fields.next().unwrap_or_default().trim();
            if header_cols.is_none() {
                if first != "node" {
                    return Err(EmbeddingError::Parse {
                        line: lineno,
                        message: "expected header starting with 'node'".into(),
                    });
                }
                header_cols = Some(fields.count());
                continue;
            }
            let row = fields
                .map(|f| f.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| EmbeddingError::Parse {
                    line: lineno,
                    message: e.to_string(),
                })?;
            if Some(row.len()) != header_cols {
                return Err(EmbeddingError::Parse {
                    line: lineno,
                    message: format!("expected {} values, found {}", header_cols.unwrap_or(0), row.len()),
                });
            }
            labels.push(first.to_string());
            rows.push(row);
        }
        if header_cols.is_none() {
            return Err(EmbeddingError::Parse {
                line: 0,
                message: "empty embedding file".into(),
            });
        }
        let mut set = Self::from_rows(labels, rows)?;
        if set.dim == 0 && header_cols != Some(0) {
            set.dim = header_cols.unwrap_or(0);
        }
        Ok(set)
    }

    /// `key: value` lines describing how the embedding was produced.
    pub fn metadata_lines(&self) -> Vec<(String, String)> {
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), |x| x.to_string());
        let mut m = vec![
            ("nodes".to_string(), self.len().to_string()),
            ("dimension".to_string(), self.dim.to_string()),
            ("scales".to_string(), list(&self.scales)),
            ("d".to_string(), self.sample_points.len().to_string()),
            (
                "t_max".to_string(),
                self.sample_points.last().map_or("none".into(), |t| t.to_string()),
            ),
            ("chebyshev_order".to_string(), self.order.to_string()),
            (
                "wavelet_path".to_string(),
                match self.path {
                    Some(WaveletPath::Dense) => "dense".into(),
                    Some(WaveletPath::Chebyshev) => "chebyshev".into(),
                    None => "none".into(),
                },
            ),
            ("lambda2".to_string(), opt(self.lambda2)),
            ("lambda_n".to_string(), opt(self.lambda_n)),
            (
                "graph_hash".to_string(),
                self.graph_hash.clone().unwrap_or_else(|| "none".into()),
            ),
        ];
        for note in &self.notes {
            m.push(("note".to_string(), note.clone()));
        }
        m
    }
}

/// Runs the full pipeline on a connected graph.
pub fn embed_all(g: &Graph, cfg: &EmbeddingConfig) -> Result<EmbeddingSet, EmbeddingError> {
    cfg.validate()?;
    let diffusion = HeatDiffusion::new(g, cfg.mode, cfg.spectrum_mode, cfg.order, &cfg.spectral)?;
    let spec = diffusion.spectrum();
    let scales = match &cfg.scales {
        ScaleSource::Auto { eta, gamma, count } => select_scales(spec, *eta, *gamma, *count)?.scales,
        ScaleSource::Explicit(s) => s.clone(),
    };
    let ts = cfg.sample_points();
    let n = g.node_count();
    let block = 2 * ts.len();
    let dim = block * scales.len();
    let mut data = vec![0.0; n * dim];

    match diffusion.path() {
        WaveletPath::Dense => {
            for (j, &s) in scales.iter().enumerate() {
                let wm = diffusion.matrix(s)?;
                data.par_chunks_mut(dim).enumerate().for_each(|(a, row)| {
                    char_function_samples(wm.column(a), &ts, &mut row[j * block..(j + 1) * block]);
                });
            }
        }
        WaveletPath::Chebyshev => {
            let filters = scales
                .iter()
                .map(|&s| diffusion.filter(s))
                .collect::<Result<Vec<_>, _>>()
                .map_err(WaveletError::from)?;
            let lap = diffusion.laplacian();
            data.par_chunks_mut(dim)
                .enumerate()
                .map_init(
                    || ChebyshevWorkspace::new(n),
                    |ws, (a, row)| -> Result<(), EmbeddingError> {
                        for (j, f) in filters.iter().enumerate() {
                            let col = ws
                                .apply(lap, f, a, Some(TRUNCATION_EPS))
                                .map_err(WaveletError::from)?;
                            char_function_samples(&col, &ts, &mut row[j * block..(j + 1) * block]);
                        }
                        Ok(())
                    },
                )
                .collect::<Result<Vec<()>, _>>()?;
        }
    }

    let mut set = EmbeddingSet::assemble(g.labels().to_vec(), dim, data);
    set.notes = scale_notes(&scales, spec.lambda2, cfg.order);
    set.scales = scales;
    set.sample_points = ts;
    set.order = cfg.order;
    set.path = Some(diffusion.path());
    set.lambda2 = Some(spec.lambda2);
    set.lambda_n = Some(spec.lambda_n);
    set.graph_hash = Some(g.content_hash());
    Ok(set)
}

fn scale_notes(scales: &[f64], lambda2: f64, order: usize) -> Vec<String> {
    let bound = admissible_scale_bound(lambda2, order, 1e-6);
    let largest = scales.iter().copied().fold(0.0, f64::max);
    if largest > bound {
        vec![format!(
            "largest scale {largest} exceeds the order-{order} admissible bound {bound} (eps=1e-6)"
        )]
    } else {
        Vec::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k2() -> Graph {
        Graph::from_index_edges(2, &[(0, 1)]).unwrap()
    }

    #[test]
    fn char_function_trivial_cases() {
        let delta = WaveletColumn::dense(0, 0.0, vec![1.0, 0.0, 0.0, 0.0], WaveletPath::Dense);
        assert_eq!(char_function(&delta, 0.0), (1.0, 0.0));
        let t = 2.3;
        let (re, im) = char_function(&delta, t);
        assert!((re - (3.0 + t.cos()) / 4.0).abs() < 1e-15);
        assert!((im - t.sin() / 4.0).abs() < 1e-15);

        let flat = WaveletColumn::dense(0, 9.0, vec![0.25; 4], WaveletPath::Dense);
        let (re, im) = char_function(&flat, t);
        assert!((re - (t / 4.0).cos()).abs() < 1e-15);
        assert!((im - (t / 4.0).sin()).abs() < 1e-15);
    }

    #[test]
    fn sparse_zeros_match_dense() {
        let dense = WaveletColumn::dense(1, 1.0, vec![0.0, 0.6, 0.0, 0.4, 0.0], WaveletPath::Dense);
        let sparse = WaveletColumn::sparse(1, 1.0, 5, vec![1, 3], vec![0.6, 0.4], WaveletPath::Chebyshev);
        for t in [0.5, 3.0, 40.0] {
            let (a, b) = (char_function(&dense, t), char_function(&sparse, t));
            assert!((a.0 - b.0).abs() < 1e-15 && (a.1 - b.1).abs() < 1e-15);
        }
    }

    #[test]
    fn sample_points_layout() {
        let cfg = EmbeddingConfig {
            sample_count: 4,
            t_max: 10.0,
            ..Default::default()
        };
        assert_eq!(cfg.sample_points(), vec![2.5, 5.0, 7.5, 10.0]);
    }

    #[test]
    fn k2_single_scale_single_sample() {
        let (s, tau) = (0.4, 3.0);
        let cfg = EmbeddingConfig {
            sample_count: 1,
            t_max: tau,
            scales: ScaleSource::Explicit(vec![s]),
            mode: WaveletMode::Dense,
            ..Default::default()
        };
        let set = embed_all(&k2(), &cfg).unwrap();
        let e = (-2.0 * s).exp();
        let atoms = [(1.0 + e) / 2.0, (1.0 - e) / 2.0];
        let re = atoms.iter().map(|x| (tau * x).cos()).sum::<f64>() / 2.0;
        let im = atoms.iter().map(|x| (tau * x).sin()).sum::<f64>() / 2.0;
        for a in 0..2 {
            assert!((set.row(a)[0] - re).abs() < 1e-12);
            assert!((set.row(a)[1] - im).abs() < 1e-12);
        }
    }

    #[test]
    fn default_dimension_is_200() {
        let g = Graph::from_index_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let set = embed_all(&g, &EmbeddingConfig::default()).unwrap();
        assert_eq!(set.dim(), 200);
        assert_eq!(set.len(), 5);
        assert_eq!(set.csv_header().split(',').count(), 201);
        assert!(set.csv_header().starts_with("node,s1_t1_re,s1_t1_im,s1_t2_re"));
        assert!(set.csv_header().ends_with("s2_t50_re,s2_t50_im"));
    }

    #[test]
    fn distance_basics() {
        assert_eq!(structural_distance(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 0.0);
        assert!((structural_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!(structural_distance(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn nearest_neighbor_queries() {
        let set = EmbeddingSet::from_unlabeled(vec![
            vec![0.0],
            vec![1.0],
            vec![-1.0],
            vec![5.0],
        ])
        .unwrap();
        let all = set.nearest_neighbors(0, 3, &BTreeSet::new()).unwrap();
        assert_eq!(all.iter().map(|x| x.0).collect::<Vec<_>>(), vec![1, 2, 3]);
        let only = set
            .nearest_neighbors(0, 1, &[1, 2].into_iter().collect())
            .unwrap();
        assert_eq!(only, vec![(3, 5.0)]);
        assert!(set.nearest_neighbors(0, 4, &BTreeSet::new()).is_err());
    }

    #[test]
    fn csv_roundtrip() {
        let g = Graph::from_index_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let cfg = EmbeddingConfig {
            sample_count: 3,
            ..Default::default()
        };
        let set = embed_all(&g, &cfg).unwrap();
        let mut buf = Vec::new();
        set.write_csv(&mut buf).unwrap();
        let back = EmbeddingSet::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.labels(), set.labels());
        for a in 0..3 {
            assert_eq!(back.row(a), set.row(a));
        }
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = EmbeddingConfig {
            sample_count: 0,
            ..Default::default()
        };
        assert!(embed_all(&k2(), &cfg).is_err());
    }
}
