#![allow(clippy::needless_range_loop)]

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use gravelet::graph::Graph;
use gravelet::seeds;
use gravelet::synthgen::{make_barbell, make_crossgraph_corpus, make_mirrored_karate, NamedBenchmark, RoleBenchmark};
use nalgebra::DMatrix;
use rand::Rng;

/// Random connected graph: a random recursive tree plus up to `extra`
/// chords, on `n` nodes.
pub fn random_connected(n: usize, extra: usize, seed: u64) -> Graph {
    let mut rng = seeds::rng(seed);
    let mut edges = BTreeSet::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        edges.insert((u, v));
    }
    for _ in 0..extra {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v {
            edges.insert((u.min(v), u.max(v)));
        }
    }
    let edges: Vec<_> = edges.into_iter().collect();
    Graph::from_index_edges(n, &edges).unwrap()
}

/// The 50-graph random corpus: sizes in 5..=100, a few extra chords each.
pub fn random_corpus() -> Vec<Graph> {
    (0..50u64)
        .map(|i| {
            let mut rng = seeds::rng(seeds::derive(2024, 100, i));
            let n = rng.gen_range(5..=100);
            let extra = rng.gen_range(0..=n);
            random_connected(n, extra, seeds::derive(2024, 101, i))
        })
        .collect()
}

/// Every generated benchmark graph with at most `max_n` nodes.
pub fn benchmark_graphs(max_n: usize) -> Vec<(String, Graph)> {
    let mut out: Vec<(String, RoleBenchmark)> = Vec::new();
    out.push(("barbell".into(), make_barbell(10, 11).unwrap()));
    for b in [
        NamedBenchmark::House,
        NamedBenchmark::HousePerturbed,
        NamedBenchmark::Fan,
        NamedBenchmark::Star,
        NamedBenchmark::Varied,
        NamedBenchmark::VariedPerturbed,
    ] {
        out.push((b.as_str().into(), b.generate(7).unwrap()));
    }
    out.push(("karate-mirror".into(), make_mirrored_karate(10, 7).unwrap()));
    for (i, b) in make_crossgraph_corpus(5, 7, &Default::default()).unwrap().into_iter().enumerate() {
        out.push((format!("corpus-{i}"), b));
    }
    out.into_iter()
        .filter(|(_, b)| b.graph.node_count() <= max_n)
        .map(|(n, b)| (n, b.graph))
        .collect()
}

pub fn dense_laplacian(g: &Graph) -> DMatrix<f64> {
    let n = g.node_count();
    let mut l = DMatrix::zeros(n, n);
    for e in g.edges() {
        l[(e.u, e.v)] -= e.weight;
        l[(e.v, e.u)] -= e.weight;
        l[(e.u, e.u)] += e.weight;
        l[(e.v, e.v)] += e.weight;
    }
    l
}

/// `exp(-sL)` through nalgebra's Padé matrix exponential, independent of
/// the eigendecomposition used by the library.
pub fn heat_kernel_expm(g: &Graph, s: f64) -> DMatrix<f64> {
    (dense_laplacian(g) * -s).exp()
}

/// Joint colour refinement of two vertex colourings of the same graph.
/// Returns `None` as soon as the colour-class sizes diverge.
fn refine(g: &Graph, c1: &mut Vec<usize>, c2: &mut Vec<usize>) -> Option<()> {
    let n = g.node_count();
    loop {
        let sig = |c: &[usize], v: usize| {
            let mut nb: Vec<usize> = g.neighbors(v).iter().map(|&u| c[u]).collect();
            nb.sort_unstable();
            (c[v], nb)
        };
        let s1: Vec<_> = (0..n).map(|v| sig(c1, v)).collect();
        let s2: Vec<_> = (0..n).map(|v| sig(c2, v)).collect();
        let mut ids = BTreeMap::new();
        for s in s1.iter().chain(&s2) {
            let next = ids.len();
            ids.entry(s.clone()).or_insert(next);
        }
        let n1: Vec<usize> = s1.iter().map(|s| ids[s]).collect();
        let n2: Vec<usize> = s2.iter().map(|s| ids[s]).collect();
        let mut h1 = vec![0usize; ids.len()];
        let mut h2 = vec![0usize; ids.len()];
        n1.iter().for_each(|&c| h1[c] += 1);
        n2.iter().for_each(|&c| h2[c] += 1);
        if h1 != h2 {
            return None;
        }
        let before = c1.iter().collect::<BTreeSet<_>>().len();
        *c1 = n1;
        *c2 = n2;
        if c1.iter().collect::<BTreeSet<_>>().len() == before {
            return Some(());
        }
    }
}

fn search(g: &Graph, mut c1: Vec<usize>, mut c2: Vec<usize>) -> Option<Vec<usize>> {
    refine(g, &mut c1, &mut c2)?;
    let n = g.node_count();
    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for v in 0..n {
        classes.entry(c1[v]).or_default().push(v);
    }
    match classes.values().find(|c| c.len() > 1) {
        None => {
            let mut sigma = vec![0; n];
            for v in 0..n {
                sigma[v] = (0..n).find(|&w| c2[w] == c1[v]).unwrap();
            }
            let ok = g.edges().iter().all(|e| g.has_edge(sigma[e.u], sigma[e.v]));
            ok.then_some(sigma)
        }
        Some(class) => {
            let x = class[0];
            let fresh = c1.iter().max().unwrap() + 1;
            for y in (0..n).filter(|&y| c2[y] == c1[x]) {
                let mut d1 = c1.clone();
                let mut d2 = c2.clone();
                d1[x] = fresh;
                d2[y] = fresh;
                if let Some(s) = search(g, d1, d2) {
                    return Some(s);
                }
            }
            None
        }
    }
}

/// An automorphism of `g` that maps `a` to `b`, found by
/// individualization and refinement with backtracking.
pub fn automorphism_mapping(g: &Graph, a: usize, b: usize) -> Option<Vec<usize>> {
    let n = g.node_count();
    let mut c1 = vec![0; n];
    let mut c2 = vec![0; n];
    c1[a] = 1;
    c2[b] = 1;
    search(g, c1, c2)
}

/// Automorphism orbits of `g`.
pub fn orbits(g: &Graph) -> Vec<usize> {
    let n = g.node_count();
    let mut orbit = vec![usize::MAX; n];
    let mut next = 0;
    for a in 0..n {
        if orbit[a] != usize::MAX {
            continue;
        }
        orbit[a] = next;
        for b in a + 1..n {
            if orbit[b] == usize::MAX && automorphism_mapping(g, a, b).is_some() {
                orbit[b] = next;
            }
        }
        next += 1;
    }
    orbit
}
