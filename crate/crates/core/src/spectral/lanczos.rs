//! Restarted Lanczos with full reorthogonalization for one extremal eigenvalue.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy)]
pub(crate) struct LanczosConfig {
    pub rel_tol: f64,
    pub max_matvecs: usize,
    pub max_basis: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct LanczosOutcome {
    pub value: f64,
    pub residual: f64,
    pub matvecs: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn remove_mean(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    for x in v.iter_mut() {
        *x -= mean;
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    norm
}

/// Largest eigenvalue of the symmetric operator `op` of dimension `n`.
///
/// With `deflate_constant` the iteration is confined to the orthogonal
/// complement of the all-ones vector. `accept(theta, residual)` decides
/// convergence of the current Ritz pair.
pub(crate) fn largest_eigenvalue<F, A>(
    n: usize,
    mut op: F,
    deflate_constant: bool,
    cfg: LanczosConfig,
    accept: A,
) -> LanczosOutcome
where
    F: FnMut(&[f64], &mut [f64]),
    A: Fn(f64, f64) -> bool,
{
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut start: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    if deflate_constant {
        remove_mean(&mut start);
    }
    normalize(&mut start);

    let max_basis = cfg.max_basis.max(2).min(n.max(1));
    let mut matvecs = 0;
    let mut previous_theta: Option<f64> = None;
    let mut last = LanczosOutcome {
        value: f64::NAN,
        residual: f64::INFINITY,
        matvecs: 0,
        converged: false,
    };

    loop {
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut w = vec![0.0; n];
        let mut ritz_vector_coeffs: Vec<f64> = vec![1.0];

        for j in 0..max_basis {
            op(&basis[j], &mut w);
            matvecs += 1;
            let a = dot(&w, &basis[j]);
            axpy(-a, &basis[j], &mut w);
            if j > 0 {
                axpy(-beta[j - 1], &basis[j - 1], &mut w);
            }
            for _ in 0..2 {
                if deflate_constant {
                    remove_mean(&mut w);
                }
                for q in &basis {
                    let c = dot(&w, q);
                    axpy(-c, q, &mut w);
                }
            }
            alpha.push(a);
            let b = dot(&w, &w).sqrt();

            let scale = alpha.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1e-300);
            let exhausted = b <= 1e-13 * scale || j + 1 == max_basis || j + 1 >= n;
            let budget_hit = matvecs >= cfg.max_matvecs;
            if exhausted || budget_hit || (j + 1) % 5 == 0 {
                let (theta, y) = tridiagonal_top(&alpha, &beta);
                let residual = if b <= 1e-13 * scale { 0.0 } else { b * y[y.len() - 1].abs() };
                last = LanczosOutcome {
                    value: theta,
                    residual,
                    matvecs,
                    converged: false,
                };
                ritz_vector_coeffs = y;
                if accept(theta, residual) || residual == 0.0 {
                    last.converged = true;
                    return last;
                }
                if budget_hit {
                    return last;
                }
                if exhausted {
                    break;
                }
            }
            for x in w.iter_mut() {
                *x /= b;
            }
            basis.push(w.clone());
            beta.push(b);
        }

        // Stagnation across restarts: the Ritz value no longer moves.
        if let Some(prev) = previous_theta {
            if (last.value - prev).abs() <= cfg.rel_tol * last.value.abs() * 1e-3 {
                last.converged = true;
                return last;
            }
        }
        previous_theta = Some(last.value);

        let mut next = vec![0.0; n];
        for (q, &c) in basis.iter().zip(&ritz_vector_coeffs) {
            axpy(c, q, &mut next);
        }
        if deflate_constant {
            remove_mean(&mut next);
        }
        if normalize(&mut next) == 0.0 {
            return last;
        }
        start = next;
    }
}

/// Largest eigenpair of the symmetric tridiagonal matrix with diagonal
/// `alpha` and off-diagonal `beta` (only the first `alpha.len() - 1` entries).
fn tridiagonal_top(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let m = alpha.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let (k, &theta) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty tridiagonal");
    (theta, eig.eigenvectors.column(k).iter().copied().collect())
}
