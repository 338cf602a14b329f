//! Minimal sparse symmetric matrix support.
//!
//! Only what the spectral code needs: CSR storage with matrix-vector
//! products, a reverse Cuthill-McKee ordering, and an envelope (skyline)
//! Cholesky factorization for SPD systems whose bandwidth stays small
//! under that ordering.

use std::collections::VecDeque;

/// Compressed sparse row matrix with `f64` values.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Builds an `n x n` matrix from `(row, col, value)` triplets.
    ///
    /// Duplicate coordinates are summed. Columns within a row are sorted.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &(r, c, _) in triplets {
            assert!(r < n && c < n, "triplet ({r}, {c}) out of bounds for n={n}");
            counts[r + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut raw_cols = vec![0usize; triplets.len()];
        let mut raw_vals = vec![0.0; triplets.len()];
        for &(r, c, v) in triplets {
            raw_cols[next[r]] = c;
            raw_vals[next[r]] = v;
            next[r] += 1;
        }

        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for i in 0..n {
            scratch.clear();
            scratch.extend((counts[i]..counts[i + 1]).map(|k| (raw_cols[k], raw_vals[k])));
            scratch.sort_by_key(|&(c, _)| c);
            for &(c, v) in &scratch {
                match cols.last() {
                    Some(&last) if cols.len() > row_ptr[i] && last == c => {
                        *vals.last_mut().unwrap() += v;
                    }
                    _ => {
                        cols.push(c);
                        vals.push(v);
                    }
                }
            }
            row_ptr.push(cols.len());
        }
        Self {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.cols[range.clone()], &self.vals[range])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    /// `y = A x`
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
        }
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                m[(i, j)] = v;
            }
        }
        m
    }
}

/// Reverse Cuthill-McKee ordering of the sparsity pattern of `a`.
///
/// Returns `perm` with `perm[new] = old`. Each connected component is started
/// from a pseudo-peripheral node so that level sets stay narrow.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.dim();
    let degree: Vec<usize> = (0..n)
        .map(|i| a.row(i).0.iter().filter(|&&j| j != i).count())
        .collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut level = vec![usize::MAX; n];

    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(a, seed, &mut level);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        let mut nbrs = Vec::new();
        while let Some(u) = queue.pop_front() {
            order.push(u);
            nbrs.clear();
            nbrs.extend(a.row(u).0.iter().copied().filter(|&v| !visited[v]));
            nbrs.sort_by_key(|&v| (degree[v], v));
            for &v in &nbrs {
                visited[v] = true;
                queue.push_back(v);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(a: &CsrMatrix, start: usize, level: &mut [usize]) -> (usize, Vec<usize>) {
    let mut touched = vec![start];
    level[start] = 0;
    let mut queue = VecDeque::from([start]);
    let mut depth = 0;
    while let Some(u) = queue.pop_front() {
        depth = depth.max(level[u]);
        for &v in a.row(u).0 {
            if level[v] == usize::MAX {
                level[v] = level[u] + 1;
                touched.push(v);
                queue.push_back(v);
            }
        }
    }
    (depth, touched)
}

fn pseudo_peripheral(a: &CsrMatrix, seed: usize, level: &mut [usize]) -> usize {
    let mut current = seed;
    let mut best_depth = 0;
    for _ in 0..8 {
        let (depth, touched) = bfs_levels(a, current, level);
        let far = touched
            .iter()
            .copied()
            .filter(|&v| level[v] == depth)
            .min_by_key(|&v| (a.row(v).0.len(), v))
            .unwrap_or(current);
        for &v in &touched {
            level[v] = usize::MAX;
        }
        if depth <= best_depth && current != seed {
            break;
        }
        best_depth = depth;
        if far == current {
            break;
        }
        current = far;
    }
    current
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum FactorError {
    #[error("matrix is not positive definite (pivot {pivot:e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },
    #[error("envelope of {entries} entries exceeds the budget of {budget}")]
    EnvelopeTooLarge { entries: usize, budget: usize },
}

/// Envelope Cholesky factor `A = L Lᵀ` of a symmetric positive definite matrix.
///
/// Row `i` of `L` is stored densely from its first structural nonzero up to
/// the diagonal.
#[derive(Debug, Clone)]
pub struct SkylineCholesky {
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl SkylineCholesky {
    /// Factors `a`, which must already be in the desired ordering.
    ///
    /// `budget` caps the number of stored envelope entries.
    pub fn factor(a: &CsrMatrix, budget: usize) -> Result<Self, FactorError> {
        let n = a.dim();
        let mut first = Vec::with_capacity(n);
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            let f = a.row(i).0.iter().copied().filter(|&j| j <= i).min().unwrap_or(i);
            first.push(f);
            start.push(start[i] + (i - f + 1));
        }
        let entries = start[n];
        if entries > budget {
            return Err(FactorError::EnvelopeTooLarge { entries, budget });
        }

        let mut data = vec![0.0; entries];
        for i in 0..n {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if j <= i {
                    data[start[i] + (j - first[i])] = v;
                }
            }
        }

        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let fj = first[j];
                let lo = fi.max(fj);
                let mut acc = data[start[i] + (j - fi)];
                let ri = &data[start[i] + (lo - fi)..start[i] + (j - fi)];
                let rj = &data[start[j] + (lo - fj)..start[j] + (j - fj)];
                acc -= ri.iter().zip(rj).map(|(x, y)| x * y).sum::<f64>();
                if j == i {
                    if acc <= 0.0 || !acc.is_finite() {
                        return Err(FactorError::NotPositiveDefinite { row: i, pivot: acc });
                    }
                    data[start[i] + (i - fi)] = acc.sqrt();
                } else {
                    data[start[i] + (j - fi)] = acc / data[start[j] + (j - fj)];
                }
            }
        }
        Ok(Self { first, start, data })
    }

    pub fn dim(&self) -> usize {
        self.first.len()
    }

    pub fn envelope_len(&self) -> usize {
        self.data.len()
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            let dot: f64 = row[..i - fi].iter().zip(&b[fi..i]).map(|(l, x)| l * x).sum();
            b[i] = (b[i] - dot) / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            b[i] /= row[i - fi];
            let xi = b[i];
            for (k, l) in (fi..i).zip(&row[..i - fi]) {
                b[k] -= l * xi;
            }
        }
    }
}
