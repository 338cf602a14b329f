//! Undirected weighted graphs and their combinatorial Laplacian.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GraphError {
    #[error("self-loop on node '{0}'")]
    SelfLoop(String),
    #[error("invalid weight {weight} on edge ({u}, {v}); weights must be finite and positive")]
    InvalidWeight { u: String, v: String, weight: f64 },
    #[error("edge ({u}, {v}) listed with conflicting weights {first} and {second}")]
    ConflictingWeight {
        u: String,
        v: String,
        first: f64,
        second: f64,
    },
    #[error("empty node label")]
    EmptyLabel,
    #[error("duplicate node label '{0}'")]
    DuplicateLabel(String),
    #[error("node index {index} out of range for graph with {n} nodes")]
    NodeOutOfRange { index: usize, n: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("graph has no nodes")]
    Empty,
}

/// An undirected edge between node indices `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// Immutable undirected graph with positive edge weights.
///
/// Nodes are dense indices `0..n` with an external string label each.
/// Edges are stored once with `u < v`, sorted by `(u, v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    edges: Vec<Edge>,
    adjacency: CsrMatrix,
    degrees: Vec<f64>,
}

impl Graph {
    /// Builds a graph from labelled edges. Node indices follow first-seen order
    /// and a missing weight means 1.0.
    pub fn from_labeled_edges<S, I>(edges: I) -> Result<Self, GraphError>
    where
        S: AsRef<str>,
        I: IntoIterator<Item = (S, S, Option<f64>)>,
    {
        let mut labels: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut indexed = Vec::new();
        for (a, b, w) in edges {
            let (a, b) = (a.as_ref(), b.as_ref());
            let mut intern = |s: &str| -> Result<usize, GraphError> {
                if s.is_empty() {
                    return Err(GraphError::EmptyLabel);
                }
                if let Some(&i) = index.get(s) {
                    return Ok(i);
                }
                labels.push(s.to_owned());
                index.insert(s.to_owned(), labels.len() - 1);
                Ok(labels.len() - 1)
            };
            let u = intern(a)?;
            let v = intern(b)?;
            indexed.push((u, v, w.unwrap_or(1.0)));
        }
        Self::from_parts(labels, indexed)
    }

    /// Builds a graph on `n` nodes labelled `"0".."n-1"` from index pairs with
    /// unit weights.
    pub fn from_index_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let labels = (0..n).map(|i| i.to_string()).collect();
        Self::from_parts(labels, edges.iter().map(|&(u, v)| (u, v, 1.0)).collect())
    }

    /// Builds a graph from explicit node labels and weighted index edges.
    pub fn from_parts(
        labels: Vec<String>,
        edges: Vec<(usize, usize, f64)>,
    ) -> Result<Self, GraphError> {
        let n = labels.len();
        let mut index = HashMap::with_capacity(n);
        for (i, l) in labels.iter().enumerate() {
            if l.is_empty() {
                return Err(GraphError::EmptyLabel);
            }
            if index.insert(l.clone(), i).is_some() {
                return Err(GraphError::DuplicateLabel(l.clone()));
            }
        }

        let mut seen: HashMap<(usize, usize), f64> = HashMap::with_capacity(edges.len());
        let mut unique = Vec::with_capacity(edges.len());
        for (u, v, w) in edges {
            for idx in [u, v] {
                if idx >= n {
                    return Err(GraphError::NodeOutOfRange { index: idx, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(labels[u].clone()));
            }
            if !w.is_finite() || w <= 0.0 {
                return Err(GraphError::InvalidWeight {
                    u: labels[u].clone(),
                    v: labels[v].clone(),
                    weight: w,
                });
            }
            let key = (u.min(v), u.max(v));
            match seen.get(&key) {
                Some(&prev) if prev == w => {}
                Some(&prev) => {
                    return Err(GraphError::ConflictingWeight {
                        u: labels[key.0].clone(),
                        v: labels[key.1].clone(),
                        first: prev,
                        second: w,
                    })
                }
                None => {
                    seen.insert(key, w);
                    unique.push(Edge {
                        u: key.0,
                        v: key.1,
                        weight: w,
                    });
                }
            }
        }
        unique.sort_by_key(|e| (e.u, e.v));

        let mut triplets = Vec::with_capacity(2 * unique.len());
        let mut degrees = vec![0.0; n];
        for e in &unique {
            triplets.push((e.u, e.v, e.weight));
            triplets.push((e.v, e.u, e.weight));
        }
        let adjacency = CsrMatrix::from_triplets(n, &triplets);
        for (i, d) in degrees.iter_mut().enumerate() {
            *d = adjacency.row(i).1.iter().sum();
        }

        Ok(Self {
            labels,
            index,
            edges: unique,
            adjacency,
            degrees,
        })
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn node_index(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn adjacency(&self) -> &CsrMatrix {
        &self.adjacency
    }

    /// Neighbor indices of `i`, ascending.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        self.adjacency.row(i).0
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency.row(u).0.binary_search(&v).is_ok()
    }

    pub fn is_weighted(&self) -> bool {
        self.edges.iter().any(|e| e.weight != 1.0)
    }

    pub fn laplacian(&self) -> Laplacian {
        Laplacian::new(self)
    }

    /// Nodes within `hops` shortest-path hops of `a`, including `a`.
    pub fn khop_neighborhood(&self, a: usize, hops: usize) -> Result<BTreeSet<usize>, GraphError> {
        let n = self.node_count();
        if a >= n {
            return Err(GraphError::NodeOutOfRange { index: a, n });
        }
        let dist = self.bfs_distances(a);
        Ok((0..n).filter(|&m| dist[m] <= hops).collect())
    }

    /// Hop distances from `a`; unreachable nodes get `usize::MAX`.
    pub fn bfs_distances(&self, a: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.node_count()];
        dist[a] = 0;
        let mut queue = VecDeque::from([a]);
        while let Some(u) = queue.pop_front() {
            for &v in self.neighbors(u) {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Connected components, each sorted ascending, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.node_count();
        let mut comp = vec![usize::MAX; n];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            comp[s] = id;
            let mut members = vec![s];
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &v in self.neighbors(u) {
                    if comp[v] == usize::MAX {
                        comp[v] = id;
                        members.push(v);
                        queue.push_back(v);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// Induced subgraph on the largest connected component (ties: the one with
    /// the smallest node index). Labels are preserved.
    pub fn largest_component(&self) -> Graph {
        let comps = self.components();
        let Some(best) = comps.iter().max_by(|a, b| a.len().cmp(&b.len()).then(b[0].cmp(&a[0])))
        else {
            return self.clone();
        };
        self.induced_subgraph(best)
    }

    /// Induced subgraph on `nodes` (kept in the given order).
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Graph {
        let mut remap = vec![usize::MAX; self.node_count()];
        for (new, &old) in nodes.iter().enumerate() {
            remap[old] = new;
        }
        let labels = nodes.iter().map(|&i| self.labels[i].clone()).collect();
        let edges = self
            .edges
            .iter()
            .filter(|e| remap[e.u] != usize::MAX && remap[e.v] != usize::MAX)
            .map(|e| (remap[e.u], remap[e.v], e.weight))
            .collect();
        Graph::from_parts(labels, edges).expect("subgraph of a valid graph is valid")
    }

    /// Relabels node `i` as node `perm[i]`; labels travel with their nodes.
    pub fn permuted(&self, perm: &[usize]) -> Graph {
        let n = self.node_count();
        assert_eq!(perm.len(), n, "permutation length must equal node count");
        let mut labels = vec![String::new(); n];
        for (old, &new) in perm.iter().enumerate() {
            labels[new] = self.labels[old].clone();
        }
        let edges = self
            .edges
            .iter()
            .map(|e| (perm[e.u], perm[e.v], e.weight))
            .collect();
        Graph::from_parts(labels, edges).expect("permutation of a valid graph is valid")
    }

    /// Writes the edge list in the text format read by [`parse_edge_list`].
    ///
    /// Weights are omitted for unit-weight edges.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for e in &self.edges {
            if e.weight == 1.0 {
                let _ = writeln!(out, "{} {}", self.labels[e.u], self.labels[e.v]);
            } else {
                let _ = writeln!(out, "{} {} {}", self.labels[e.u], self.labels[e.v], e.weight);
            }
        }
        out
    }

    /// SHA-256 over the node labels and canonical edge list, hex encoded.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        for l in &self.labels {
            h.update(l.as_bytes());
            h.update(b"\n");
        }
        h.update(b"--\n");
        h.update(self.to_edge_list().as_bytes());
        hex::encode(h.finalize())
    }
}

/// Hex SHA-256 of raw bytes, used to fingerprint input files.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Parses the whitespace-separated edge-list format: `src dst [weight]` per
/// line, `#` starts a comment line, blank lines are ignored.
pub fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
    let mut triples = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let weight = match parts.len() {
            2 => None,
            3 => Some(parts[2].parse::<f64>().map_err(|e| GraphError::Parse {
                line: lineno + 1,
                message: format!("bad weight '{}': {e}", parts[2]),
            })?),
            k => {
                return Err(GraphError::Parse {
                    line: lineno + 1,
                    message: format!("expected 2 or 3 fields, found {k}"),
                })
            }
        };
        triples.push((parts[0], parts[1], weight));
    }
    if triples.is_empty() {
        return Err(GraphError::Empty);
    }
    Graph::from_labeled_edges(triples)
}

/// The combinatorial Laplacian `L = D - A` in sparse form.
#[derive(Debug, Clone)]
pub struct Laplacian {
    matrix: CsrMatrix,
    degrees: Vec<f64>,
}

impl Laplacian {
    pub fn new(g: &Graph) -> Self {
        let n = g.node_count();
        let mut triplets = Vec::with_capacity(n + 2 * g.edge_count());
        for (i, &d) in g.degrees().iter().enumerate() {
            triplets.push((i, i, d));
        }
        for e in g.edges() {
            triplets.push((e.u, e.v, -e.weight));
            triplets.push((e.v, e.u, -e.weight));
        }
        Self {
            matrix: CsrMatrix::from_triplets(n, &triplets),
            degrees: g.degrees().to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn max_degree(&self) -> f64 {
        self.degrees.iter().copied().fold(0.0, f64::max)
    }

    /// Gershgorin upper bound on the largest eigenvalue.
    pub fn gershgorin_bound(&self) -> f64 {
        2.0 * self.max_degree()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        self.matrix.matvec(x, y)
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        self.matrix.to_dense()
    }
}
