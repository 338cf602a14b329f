//! Heat-diffusion wavelets: per-node coefficient columns, automatic scale
//! range selection, and the variance/convergence diagnostics that motivate it.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::graph::{Graph, Laplacian};
use crate::spectral::{
    dense_heat_operator, extremal_eigenvalues, ChebyshevFilter, ChebyshevWorkspace,
    SpectralConfig, SpectralError, SpectrumInfo, SpectrumMode,
};

/// Chebyshev-path coefficients below this magnitude are dropped.
pub const TRUNCATION_EPS: f64 = 1e-10;
/// Default lower localization threshold for `s_max`.
pub const DEFAULT_ETA: f64 = 0.85;
/// Default upper threshold for `s_min`.
pub const DEFAULT_GAMMA: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WaveletError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("invalid scale parameters: {0}")]
    InvalidScales(String),
    #[error("graph is disconnected ({components} components, sizes {sizes:?})")]
    Disconnected { components: usize, sizes: Vec<usize> },
}

/// Which computation produced a column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveletPath {
    Dense,
    Chebyshev,
}

/// Wavelet coefficients `Ψ_{·a}` of one node at one scale.
///
/// Stored sparsely; indices not listed are exact zeros. Dense columns list
/// every index.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletColumn {
    pub node: usize,
    pub scale: f64,
    pub path: WaveletPath,
    n: usize,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl WaveletColumn {
    pub fn dense(node: usize, scale: f64, values: Vec<f64>, path: WaveletPath) -> Self {
        let n = values.len();
        Self {
            node,
            scale,
            path,
            n,
            indices: (0..n).collect(),
            values,
        }
    }

    /// `indices` must be strictly increasing and `< n`.
    pub fn sparse(
        node: usize,
        scale: f64,
        n: usize,
        indices: Vec<usize>,
        values: Vec<f64>,
        path: WaveletPath,
    ) -> Self {
        debug_assert_eq!(indices.len(), values.len());
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Self {
            node,
            scale,
            path,
            n,
            indices,
            values,
        }
    }

    /// Length of the full coefficient vector (the node count).
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Number of stored coefficients.
    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, m: usize) -> f64 {
        match self.indices.binary_search(&m) {
            Ok(k) => self.values[k],
            Err(_) => 0.0,
        }
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            out[i] = v;
        }
        out
    }
}

/// All `N` wavelet columns at one scale.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletMatrix {
    pub scale: f64,
    columns: Vec<WaveletColumn>,
}

impl WaveletMatrix {
    pub fn new(scale: f64, columns: Vec<WaveletColumn>) -> Self {
        debug_assert!(columns.iter().enumerate().all(|(a, c)| c.node == a && c.scale == scale));
        Self { scale, columns }
    }

    pub fn n(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, a: usize) -> &WaveletColumn {
        &self.columns[a]
    }

    pub fn columns(&self) -> &[WaveletColumn] {
        &self.columns
    }

    /// `Δ_a = |Ψ_aa - 1/N|`.
    pub fn delta(&self, a: usize) -> f64 {
        (self.columns[a].get(a) - 1.0 / self.n() as f64).abs()
    }

    /// Sample variance `(1/(N-1)) Σ_{m≠a} (Ψ_ma - μ̃)²` of the off-diagonal
    /// coefficients of column `a`, with `μ̃` their mean.
    pub fn offdiag_variance(&self, a: usize) -> f64 {
        let col = self.columns[a].to_dense();
        let n = col.len();
        assert!(n >= 2, "off-diagonal variance needs at least two nodes");
        let off = || col.iter().enumerate().filter(move |&(m, _)| m != a).map(|(_, &v)| v);
        let mean = off().sum::<f64>() / (n - 1) as f64;
        off().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    }

    /// Dumps `node,m,coefficient` rows for every stored coefficient.
    pub fn write_csv<W: Write>(&self, mut out: W, labels: Option<&[String]>) -> io::Result<()> {
        writeln!(out, "node,m,coefficient")?;
        for col in &self.columns {
            for (&m, &v) in col.indices.iter().zip(&col.values) {
                match labels {
                    Some(l) => writeln!(out, "{},{},{}", l[col.node], l[m], v)?,
                    None => writeln!(out, "{},{},{}", col.node, m, v)?,
                }
            }
        }
        Ok(())
    }
}

/// A range of diffusion scales `[s_min, s_max]` sampled at `J` points.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleRange {
    pub s_min: f64,
    pub s_max: f64,
    pub eta: f64,
    pub gamma: f64,
    pub scales: Vec<f64>,
}

impl ScaleRange {
    pub fn count(&self) -> usize {
        self.scales.len()
    }
}

/// Picks `s_min = -ln(γ)/√(λ2 λN)` and `s_max = -ln(η)/√(λ2 λN)`, then
/// `count` geometrically spaced scales between them (one scale collapses to
/// the geometric midpoint).
pub fn select_scales(
    spec: &SpectrumInfo,
    eta: f64,
    gamma: f64,
    count: usize,
) -> Result<ScaleRange, WaveletError> {
    if !(spec.lambda2 > 0.0) {
        return Err(SpectralError::Disconnected {
            lambda2: spec.lambda2,
            threshold: 0.0,
        }
        .into());
    }
    scale_range_from_eigenvalues(spec.lambda2, spec.lambda_n, eta, gamma, count)
}

pub fn scale_range_from_eigenvalues(
    lambda2: f64,
    lambda_n: f64,
    eta: f64,
    gamma: f64,
    count: usize,
) -> Result<ScaleRange, WaveletError> {
    if !(0.0 < eta && eta <= gamma && gamma < 1.0) {
        return Err(WaveletError::InvalidScales(format!(
            "need 0 < eta <= gamma < 1, got eta={eta}, gamma={gamma}"
        )));
    }
    if count == 0 {
        return Err(WaveletError::InvalidScales("need at least one scale".into()));
    }
    let mean = (lambda2 * lambda_n).sqrt();
    let s_min = -gamma.ln() / mean;
    let s_max = -eta.ln() / mean;
    let scales = if count == 1 {
        vec![(s_min * s_max).sqrt()]
    } else {
        let ratio = s_max / s_min;
        (0..count)
            .map(|j| match j {
                0 => s_min,
                j if j + 1 == count => s_max,
                j => s_min * ratio.powf(j as f64 / (count - 1) as f64),
            })
            .collect()
    };
    Ok(ScaleRange {
        s_min,
        s_max,
        eta,
        gamma,
        scales,
    })
}

/// Largest scale at which the order-`order` Taylor remainder stays below
/// `eps` for every eigenvalue: `((K+1)! ε)^{1/(K+1)} / λ2`.
pub fn admissible_scale_bound(lambda2: f64, order: usize, eps: f64) -> f64 {
    let k1 = (order + 1) as f64;
    let log_fact: f64 = (1..=order + 1).map(|i| (i as f64).ln()).sum();
    ((log_fact + eps.ln()) / k1).exp() / lambda2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WaveletMode {
    #[default]
    Auto,
    Dense,
    Chebyshev,
}

impl WaveletMode {
    pub fn as_str(self) -> &'static str {
        match self {
            WaveletMode::Auto => "auto",
            WaveletMode::Dense => "dense",
            WaveletMode::Chebyshev => "chebyshev",
        }
    }
}

/// Spectrum plus everything needed to produce wavelet columns at any scale.
#[derive(Debug, Clone)]
pub struct HeatDiffusion {
    laplacian: Laplacian,
    spectrum: SpectrumInfo,
    path: WaveletPath,
    order: usize,
}

impl HeatDiffusion {
    /// Rejects disconnected graphs, estimates the spectrum, and resolves
    /// `mode`. Dense wavelets force a dense spectrum.
    pub fn new(
        g: &Graph,
        mode: WaveletMode,
        spectrum_mode: SpectrumMode,
        order: usize,
        cfg: &SpectralConfig,
    ) -> Result<Self, WaveletError> {
        let comps = g.components();
        if comps.len() > 1 {
            let mut sizes: Vec<usize> = comps.iter().map(Vec::len).collect();
            sizes.sort_unstable_by(|a, b| b.cmp(a));
            return Err(WaveletError::Disconnected {
                components: comps.len(),
                sizes,
            });
        }
        let n = g.node_count();
        let path = match mode {
            WaveletMode::Dense => WaveletPath::Dense,
            WaveletMode::Chebyshev => WaveletPath::Chebyshev,
            WaveletMode::Auto if n <= cfg.dense_threshold => WaveletPath::Dense,
            WaveletMode::Auto => WaveletPath::Chebyshev,
        };
        let spectrum_mode = if path == WaveletPath::Dense {
            SpectrumMode::Dense
        } else {
            spectrum_mode
        };
        let laplacian = g.laplacian();
        let spectrum = extremal_eigenvalues(&laplacian, spectrum_mode, cfg)?;
        Ok(Self {
            laplacian,
            spectrum,
            path,
            order,
        })
    }

    pub fn spectrum(&self) -> &SpectrumInfo {
        &self.spectrum
    }

    pub fn laplacian(&self) -> &Laplacian {
        &self.laplacian
    }

    pub fn path(&self) -> WaveletPath {
        self.path
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn filter(&self, scale: f64) -> Result<ChebyshevFilter, SpectralError> {
        ChebyshevFilter::heat(scale, self.spectrum.chebyshev_bound(), self.order)
    }

    /// All columns at `scale`. Chebyshev columns are truncated at
    /// [`TRUNCATION_EPS`] and renormalized.
    pub fn matrix(&self, scale: f64) -> Result<WaveletMatrix, WaveletError> {
        if !(scale >= 0.0) {
            return Err(WaveletError::InvalidScales(format!("scale must be >= 0, got {scale}")));
        }
        match self.path {
            WaveletPath::Dense => Ok(dense_heat_operator(&self.spectrum, scale)?),
            WaveletPath::Chebyshev => {
                let filter = self.filter(scale)?;
                let n = self.laplacian.dim();
                let columns = (0..n)
                    .into_par_iter()
                    .map_init(
                        || ChebyshevWorkspace::new(n),
                        |ws, a| ws.apply(&self.laplacian, &filter, a, Some(TRUNCATION_EPS)),
                    )
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(WaveletMatrix::new(scale, columns))
            }
        }
    }
}

/// Heat wavelets of every node of `g` at scale `s`.
pub fn heat_wavelets(
    g: &Graph,
    scale: f64,
    mode: WaveletMode,
    order: usize,
) -> Result<WaveletMatrix, WaveletError> {
    HeatDiffusion::new(g, mode, SpectrumMode::Auto, order, &SpectralConfig::default())?.matrix(scale)
}

/// Bracket of `Δ_a^{(s)}` by the extreme eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceBounds {
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
}

impl ConvergenceBounds {
    pub fn holds(&self, slack: f64) -> bool {
        self.lower <= self.value + slack && self.value <= self.upper + slack
    }
}

/// `Δ_a^{(s)} = |Ψ_aa^{(s)} - 1/N|` evaluated from the full decomposition.
pub fn delta_from_spectrum(spec: &SpectrumInfo, a: usize, scale: f64) -> Result<f64, SpectralError> {
    let dec = spec
        .decomposition
        .as_ref()
        .ok_or(SpectralError::MissingDecomposition)?;
    let n = dec.dim();
    if a >= n {
        return Err(SpectralError::NodeOutOfRange { index: a, n });
    }
    Ok((dec.diagonal_entry(a, |lam| (-scale * lam).exp()) - 1.0 / n as f64).abs())
}

/// Returns `(e^{-λN s} Δ⁰, Δˢ, e^{-λ2 s} Δ⁰)` for integer `s`.
pub fn convergence_bounds(
    spec: &SpectrumInfo,
    a: usize,
    s: u32,
) -> Result<ConvergenceBounds, SpectralError> {
    let s_f = s as f64;
    let d0 = delta_from_spectrum(spec, a, 0.0)?;
    let ds = delta_from_spectrum(spec, a, s_f)?;
    Ok(ConvergenceBounds {
        lower: (-spec.lambda_n * s_f).exp() * d0,
        value: ds,
        upper: (-spec.lambda2 * s_f).exp() * d0,
    })
}

/// Dense-path check of the bracket for node `a` of `g` at integer scale `s`.
pub fn convergence_bounds_check(g: &Graph, a: usize, s: u32) -> Result<ConvergenceBounds, WaveletError> {
    let spec = extremal_eigenvalues(&g.laplacian(), SpectrumMode::Dense, &SpectralConfig::default())?;
    Ok(convergence_bounds(&spec, a, s)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k2() -> Graph {
        Graph::from_index_edges(2, &[(0, 1)]).unwrap()
    }

    fn cycle(n: usize) -> Graph {
        let e: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::from_index_edges(n, &e).unwrap()
    }

    #[test]
    fn k2_scale_selection() {
        let r = scale_range_from_eigenvalues(2.0, 2.0, DEFAULT_ETA, DEFAULT_GAMMA, 2).unwrap();
        assert!((r.s_min - 0.025_646_647_193_775_29).abs() < 1e-12);
        assert!((r.s_max - 0.081_259_464_748_887_47).abs() < 1e-12);
        assert_eq!(r.scales, vec![r.s_min, r.s_max]);
    }

    #[test]
    fn equal_thresholds_collapse_range() {
        let r = scale_range_from_eigenvalues(0.3, 5.0, 0.9, 0.9, 3).unwrap();
        assert_eq!(r.s_min, r.s_max);
        assert!(r.scales.iter().all(|&s| (s - r.s_min).abs() < 1e-15));
    }

    #[test]
    fn gamma_near_one_sends_s_min_to_zero() {
        let r = scale_range_from_eigenvalues(1.0, 4.0, 0.5, 1.0 - 1e-12, 2).unwrap();
        assert!(r.s_min < 1e-11);
    }

    #[test]
    fn geometric_spacing_and_midpoint() {
        let r = scale_range_from_eigenvalues(0.5, 2.0, 0.5, 0.9, 5).unwrap();
        let ratios: Vec<f64> = r.scales.windows(2).map(|w| w[1] / w[0]).collect();
        assert!(ratios.windows(2).all(|w| (w[0] - w[1]).abs() < 1e-12));
        let one = scale_range_from_eigenvalues(0.5, 2.0, 0.5, 0.9, 1).unwrap();
        assert!((one.scales[0] - (one.s_min * one.s_max).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn invalid_thresholds() {
        assert!(scale_range_from_eigenvalues(1.0, 2.0, 0.95, 0.85, 2).is_err());
        assert!(scale_range_from_eigenvalues(1.0, 2.0, 0.0, 0.85, 2).is_err());
        assert!(scale_range_from_eigenvalues(1.0, 2.0, 0.5, 0.85, 0).is_err());
    }

    #[test]
    fn k2_wavelets_both_paths() {
        let e = (-2.0f64).exp();
        for mode in [WaveletMode::Dense, WaveletMode::Chebyshev] {
            let wm = heat_wavelets(&k2(), 1.0, mode, 30).unwrap();
            assert!((wm.column(0).get(0) - (1.0 + e) / 2.0).abs() < 1e-8);
            assert!((wm.column(1).get(0) - (1.0 - e) / 2.0).abs() < 1e-8);
            let id = heat_wavelets(&k2(), 0.0, mode, 30).unwrap();
            assert!((id.column(1).get(1) - 1.0).abs() < 1e-10);
            assert!(id.column(1).get(0).abs() < 1e-10);
        }
    }

    #[test]
    fn delta_examples() {
        let g = cycle(6);
        let id = heat_wavelets(&g, 0.0, WaveletMode::Dense, 30).unwrap();
        assert!((id.delta(2) - 5.0 / 6.0).abs() < 1e-12);

        for s in [0.2, 1.5] {
            let wm = heat_wavelets(&k2(), s, WaveletMode::Dense, 30).unwrap();
            assert!((wm.delta(0) - (-2.0 * s).exp() / 2.0).abs() < 1e-12);
        }
        let far = heat_wavelets(&g, 500.0, WaveletMode::Dense, 30).unwrap();
        assert!(far.delta(0) < 1e-12);
    }

    #[test]
    fn offdiag_variance_trivial_cases() {
        let g = cycle(5);
        let id = heat_wavelets(&g, 0.0, WaveletMode::Dense, 30).unwrap();
        assert!(id.offdiag_variance(0).abs() < 1e-24);
        let wm = heat_wavelets(&k2(), 0.7, WaveletMode::Dense, 30).unwrap();
        assert_eq!(wm.offdiag_variance(0), 0.0);
    }

    #[test]
    fn convergence_examples() {
        let zero = convergence_bounds_check(&cycle(5), 1, 0).unwrap();
        for v in [zero.lower, zero.value, zero.upper] {
            assert!((v - 0.8).abs() < 1e-12);
        }
        let b = convergence_bounds_check(&k2(), 0, 1).unwrap();
        let e = (-2.0f64).exp() / 2.0;
        for v in [b.lower, b.value, b.upper] {
            assert!((v - e).abs() < 1e-12);
        }
        let c8 = cycle(8);
        for a in 0..8 {
            assert!(convergence_bounds_check(&c8, a, 1).unwrap().holds(1e-12));
        }
    }

    #[test]
    fn disconnected_graph_rejected_with_sizes() {
        let g = Graph::from_index_edges(5, &[(0, 1), (2, 3), (3, 4)]).unwrap();
        let err = heat_wavelets(&g, 1.0, WaveletMode::Auto, 30).unwrap_err();
        assert_eq!(
            err,
            WaveletError::Disconnected {
                components: 2,
                sizes: vec![3, 2]
            }
        );
    }

    #[test]
    fn admissible_bound_formula() {
        // K = 1: sqrt(2 ε) / λ2
        let b = admissible_scale_bound(0.5, 1, 1e-6);
        assert!((b - (2e-6f64).sqrt() / 0.5).abs() < 1e-12);
    }

    #[test]
    fn csv_dump() {
        let wm = heat_wavelets(&k2(), 0.0, WaveletMode::Dense, 30).unwrap();
        let mut buf = Vec::new();
        wm.write_csv(&mut buf, None).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("node,m,coefficient"));
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(&first[..2], &["0", "0"]);
        assert!((first[2].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
    }
}
