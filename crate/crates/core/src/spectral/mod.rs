//! Extremal Laplacian eigenvalues, the dense heat operator, and Chebyshev
//! filtering of delta signals.

mod chebyshev;
mod lanczos;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::graph::Laplacian;
use crate::sparse::{reverse_cuthill_mckee, CsrMatrix, FactorError, SkylineCholesky};
use crate::wavelet::{WaveletColumn, WaveletMatrix, WaveletPath};

pub use chebyshev::{apply_filter, ChebyshevFilter, ChebyshevWorkspace};
use lanczos::{largest_eigenvalue, LanczosConfig};

/// Default node count up to which `Auto` uses a dense eigendecomposition.
pub const DEFAULT_DENSE_THRESHOLD: usize = 1024;
/// Default Chebyshev order.
pub const DEFAULT_CHEBYSHEV_ORDER: usize = 30;
/// Relative inflation applied to the `lambda_n` estimate for the Chebyshev domain.
pub const BOUND_INFLATION: f64 = 1.01;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectralError {
    #[error(
        "graph is disconnected or nearly so: lambda2 = {lambda2:e} below threshold {threshold:e}"
    )]
    Disconnected { lambda2: f64, threshold: f64 },
    #[error("iterative eigensolver did not converge for {target} after {iterations} matrix-vector products (residual {residual:e})")]
    NoConvergence {
        target: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("graph must have at least 2 nodes for spectral analysis, found {0}")]
    TooSmall(usize),
    #[error("full eigendecomposition required but not available")]
    MissingDecomposition,
    #[error("Chebyshev domain bound {bound} is below the operator spectrum at node {node}; inflate the lambda_n estimate")]
    BoundViolation { bound: f64, node: usize },
    #[error("invalid filter parameters: {0}")]
    InvalidFilter(String),
    #[error("node index {index} out of range for {n} nodes")]
    NodeOutOfRange { index: usize, n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpectrumMode {
    #[default]
    Auto,
    Dense,
    Iterative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumMethod {
    Dense,
    Iterative,
}

impl SpectrumMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SpectrumMethod::Dense => "dense",
            SpectrumMethod::Iterative => "iterative",
        }
    }
}

/// Tuning for [`extremal_eigenvalues`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralConfig {
    pub dense_threshold: usize,
    pub rel_tol: f64,
    pub max_iterations: usize,
    /// `lambda2 < connectivity_eps * lambda_n` is reported as disconnected.
    pub connectivity_eps: f64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            dense_threshold: DEFAULT_DENSE_THRESHOLD,
            rel_tol: 1e-6,
            max_iterations: 10_000,
            connectivity_eps: 1e-9,
        }
    }
}

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns) of `L`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl EigenDecomposition {
    pub fn of(lap: &Laplacian) -> Self {
        let eig = SymmetricEigen::new(lap.to_dense());
        let n = eig.eigenvalues.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        Self { values, vectors }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `(U f(Λ) Uᵀ)_{aa}`, without forming the matrix.
    pub fn diagonal_entry(&self, a: usize, f: impl Fn(f64) -> f64) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(l, &lam)| f(lam) * self.vectors[(a, l)].powi(2))
            .sum()
    }
}

/// Extremal eigenvalues of the Laplacian, optionally with the full spectrum.
#[derive(Debug, Clone)]
pub struct SpectrumInfo {
    pub lambda2: f64,
    pub lambda_n: f64,
    pub method: SpectrumMethod,
    pub decomposition: Option<EigenDecomposition>,
    /// Matrix-vector products (or solves) spent by the iterative path.
    pub iterations: usize,
}

impl SpectrumInfo {
    /// Upper end of the Chebyshev approximation domain.
    pub fn chebyshev_bound(&self) -> f64 {
        self.lambda_n * BOUND_INFLATION
    }
}

/// Estimates `lambda2` and `lambda_n` of `lap`.
pub fn extremal_eigenvalues(
    lap: &Laplacian,
    mode: SpectrumMode,
    cfg: &SpectralConfig,
) -> Result<SpectrumInfo, SpectralError> {
    let n = lap.dim();
    if n < 2 {
        return Err(SpectralError::TooSmall(n));
    }
    let dense = match mode {
        SpectrumMode::Dense => true,
        SpectrumMode::Iterative => false,
        SpectrumMode::Auto => n <= cfg.dense_threshold,
    };
    let info = if dense {
        let dec = EigenDecomposition::of(lap);
        SpectrumInfo {
            lambda2: dec.values[1],
            lambda_n: dec.values[n - 1],
            method: SpectrumMethod::Dense,
            decomposition: Some(dec),
            iterations: 0,
        }
    } else {
        iterative_extremes(lap, cfg)?
    };
    let threshold = cfg.connectivity_eps * info.lambda_n;
    if !(info.lambda2 >= threshold) || info.lambda2 <= 0.0 {
        return Err(SpectralError::Disconnected {
            lambda2: info.lambda2,
            threshold,
        });
    }
    Ok(info)
}

fn iterative_extremes(lap: &Laplacian, cfg: &SpectralConfig) -> Result<SpectrumInfo, SpectralError> {
    let n = lap.dim();
    let lanczos = LanczosConfig {
        rel_tol: cfg.rel_tol,
        max_matvecs: cfg.max_iterations,
        max_basis: 120,
        seed: 0x5eed_1a4c,
    };
    let tol = cfg.rel_tol;

    let top = largest_eigenvalue(n, |x, y| lap.matvec(x, y), false, lanczos, |t, r| {
        r <= tol * t.abs()
    });
    if !top.converged {
        return Err(SpectralError::NoConvergence {
            target: "lambda_n",
            iterations: top.matvecs,
            residual: top.residual,
        });
    }
    let lambda_n = top.value;

    let (lambda2, spent) = match lambda2_shift_invert(lap, lanczos) {
        Ok(v) => v,
        Err(ShiftInvertError::Singular) => {
            return Err(SpectralError::Disconnected {
                lambda2: 0.0,
                threshold: cfg.connectivity_eps * lambda_n,
            })
        }
        Err(ShiftInvertError::Lanczos(e)) => return Err(e),
        Err(ShiftInvertError::TooDense) => lambda2_shifted_power(lap, lanczos, lambda_n)?,
    };

    Ok(SpectrumInfo {
        lambda2,
        lambda_n,
        method: SpectrumMethod::Iterative,
        decomposition: None,
        iterations: top.matvecs + spent,
    })
}

enum ShiftInvertError {
    Singular,
    TooDense,
    Lanczos(SpectralError),
}

/// `lambda2 = 1 / max eig(L⁺)` on the complement of the constant vector.
///
/// `L⁺ x` is applied by grounding one node and solving the remaining SPD
/// system with an envelope Cholesky factor under reverse Cuthill-McKee order.
fn lambda2_shift_invert(
    lap: &Laplacian,
    cfg: LanczosConfig,
) -> Result<(f64, usize), ShiftInvertError> {
    let n = lap.dim();
    let perm = reverse_cuthill_mckee(lap.matrix());
    let mut position = vec![0usize; n];
    for (new, &old) in perm.iter().enumerate() {
        position[old] = new;
    }
    // Ground the node ordered last.
    let m = n - 1;
    let mut triplets = Vec::with_capacity(lap.matrix().nnz());
    for old_i in 0..n {
        let i = position[old_i];
        if i == m {
            continue;
        }
        let (cols, vals) = lap.matrix().row(old_i);
        for (&old_j, &v) in cols.iter().zip(vals) {
            let j = position[old_j];
            if j != m {
                triplets.push((i, j, v));
            }
        }
    }
    let reduced = CsrMatrix::from_triplets(m, &triplets);
    let budget = 64 * lap.matrix().nnz() + 1_000_000;
    let factor = match SkylineCholesky::factor(&reduced, budget) {
        Ok(f) => f,
        Err(FactorError::EnvelopeTooLarge { .. }) => return Err(ShiftInvertError::TooDense),
        Err(FactorError::NotPositiveDefinite { .. }) => return Err(ShiftInvertError::Singular),
    };

    let mut buf = vec![0.0; m];
    let tol = cfg.rel_tol;
    let out = largest_eigenvalue(
        n,
        |x, y| {
            for (old, &xi) in x.iter().enumerate() {
                let i = position[old];
                if i < m {
                    buf[i] = xi;
                }
            }
            factor.solve_in_place(&mut buf);
            for (old, yi) in y.iter_mut().enumerate() {
                let i = position[old];
                *yi = if i < m { buf[i] } else { 0.0 };
            }
            let mean = y.iter().sum::<f64>() / n as f64;
            for yi in y.iter_mut() {
                *yi -= mean;
            }
        },
        true,
        cfg,
        |t, r| r <= tol * t.abs(),
    );
    if !out.converged {
        return Err(ShiftInvertError::Lanczos(SpectralError::NoConvergence {
            target: "lambda2",
            iterations: out.matvecs,
            residual: out.residual,
        }));
    }
    if !(out.value > 0.0) || !out.value.is_finite() {
        return Err(ShiftInvertError::Singular);
    }
    Ok((1.0 / out.value, out.matvecs))
}

/// Fallback: `lambda2 = c - max eig(cI - L)` on the constant complement.
fn lambda2_shifted_power(
    lap: &Laplacian,
    cfg: LanczosConfig,
    lambda_n: f64,
) -> Result<(f64, usize), SpectralError> {
    let n = lap.dim();
    let shift = lambda_n * BOUND_INFLATION;
    let tol = cfg.rel_tol;
    let out = largest_eigenvalue(
        n,
        |x, y| {
            lap.matvec(x, y);
            for (yi, xi) in y.iter_mut().zip(x) {
                *yi = shift * xi - *yi;
            }
        },
        true,
        cfg,
        |t, r| r <= tol * (shift - t).abs(),
    );
    if !out.converged {
        return Err(SpectralError::NoConvergence {
            target: "lambda2",
            iterations: out.matvecs,
            residual: out.residual,
        });
    }
    Ok((shift - out.value, out.matvecs))
}

/// `Ψ = U diag(e^{-sλ}) Uᵀ` from a full decomposition.
///
/// The upper triangle is computed and mirrored, so `Ψ` is exactly symmetric.
pub fn dense_heat_operator(spec: &SpectrumInfo, scale: f64) -> Result<WaveletMatrix, SpectralError> {
    let dec = spec
        .decomposition
        .as_ref()
        .ok_or(SpectralError::MissingDecomposition)?;
    let psi = dense_kernel_matrix(dec, |lam| (-scale * lam).exp());
    let n = dec.dim();
    let columns = (0..n)
        .map(|a| WaveletColumn::dense(a, scale, psi.column(a).iter().copied().collect(), WaveletPath::Dense))
        .collect();
    Ok(WaveletMatrix::new(scale, columns))
}

pub(crate) fn dense_kernel_matrix(dec: &EigenDecomposition, g: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let n = dec.dim();
    let mut weighted = dec.vectors.clone();
    for (l, &lam) in dec.values.iter().enumerate() {
        let gl = g(lam);
        weighted.column_mut(l).scale_mut(gl);
    }
    let mut psi = &weighted * dec.vectors.transpose();
    for j in 0..n {
        for i in (j + 1)..n {
            psi[(i, j)] = psi[(j, i)];
        }
    }
    psi
}
