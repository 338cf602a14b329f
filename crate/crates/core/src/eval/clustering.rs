//! Single-linkage agglomerative clustering.

use super::EvalError;
use crate::embedding::EmbeddingSet;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusteringResult {
    /// Cluster id per node; ids are numbered by each cluster's smallest member.
    pub assignments: Vec<usize>,
    pub num_clusters: usize,
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Keeps the smaller root so the representative is the minimum member.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = (ra.min(rb), ra.max(rb));
        self.parent[hi] = lo;
        true
    }
}

/// Merges the closest pair of clusters until `k` remain. Merges are taken in
/// `(distance, i, j)` order over node pairs, which is single linkage with
/// ties resolved toward smaller node indices.
pub fn single_linkage(dist: &[f64], n: usize, k: usize) -> Result<ClusteringResult, EvalError> {
    if k == 0 || k > n {
        return Err(EvalError::InvalidClusterCount { k, n });
    }
    if dist.len() != n * n {
        return Err(EvalError::LengthMismatch {
            left: dist.len(),
            right: n * n,
        });
    }
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            pairs.push((dist[i * n + j], i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut ds = DisjointSet::new(n);
    let mut clusters = n;
    for &(_, i, j) in &pairs {
        if clusters == k {
            break;
        }
        if ds.union(i, j) {
            clusters -= 1;
        }
    }

    let mut id_of_root = vec![usize::MAX; n];
    let mut next = 0;
    let assignments = (0..n)
        .map(|a| {
            let r = ds.find(a);
            if id_of_root[r] == usize::MAX {
                id_of_root[r] = next;
                next += 1;
            }
            id_of_root[r]
        })
        .collect();
    Ok(ClusteringResult {
        assignments,
        num_clusters: k,
    })
}

pub fn agglomerative_cluster(set: &EmbeddingSet, k: usize) -> Result<ClusteringResult, EvalError> {
    single_linkage(&set.distance_matrix(), set.len(), k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn points(xs: &[f64]) -> EmbeddingSet {
        EmbeddingSet::from_unlabeled(xs.iter().map(|&x| vec![x]).collect()).unwrap()
    }

    #[test]
    fn extremes() {
        let s = points(&[0.0, 1.0, 3.0, 7.0]);
        let all = agglomerative_cluster(&s, 4).unwrap();
        assert_eq!(all.assignments, vec![0, 1, 2, 3]);
        let one = agglomerative_cluster(&s, 1).unwrap();
        assert_eq!(one.assignments, vec![0; 4]);
        assert!(agglomerative_cluster(&s, 0).is_err());
        assert!(agglomerative_cluster(&s, 5).is_err());
    }

    #[test]
    fn separated_groups() {
        let s = points(&[100.0, 0.0, 100.1, 0.2, 0.1, 100.2]);
        let c = agglomerative_cluster(&s, 2).unwrap();
        assert_eq!(c.assignments, vec![0, 1, 0, 1, 1, 0]);
    }

    #[test]
    fn chaining_behaviour() {
        // Single linkage follows the chain 0-1-2-3 before joining the far point.
        let s = points(&[0.0, 1.0, 2.0, 3.0, 10.0]);
        let c = agglomerative_cluster(&s, 2).unwrap();
        assert_eq!(c.assignments, vec![0, 0, 0, 0, 1]);
    }
}
