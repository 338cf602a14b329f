#![allow(clippy::needless_range_loop)]

mod common;

use std::collections::BTreeSet;

use common::{heat_kernel_expm, orbits, random_connected};
use gravelet::embedding::{char_function, structural_distance, ScaleSource};
use gravelet::seeds;
use gravelet::synthgen::{make_barbell, NamedBenchmark};
use gravelet::wavelet::{WaveletColumn, WaveletMode, WaveletPath};
use gravelet::{embed_all, EmbeddingConfig, Graph};
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn dense_cfg() -> EmbeddingConfig {
    EmbeddingConfig {
        mode: WaveletMode::Dense,
        ..Default::default()
    }
}

#[test]
fn embedding_matches_direct_characteristic_function() {
    let g = random_connected(25, 20, 11);
    let set = embed_all(&g, &dense_cfg()).unwrap();
    let ts = dense_cfg().sample_points();
    let n = g.node_count();
    for (j, &s) in set.scales.iter().enumerate() {
        let k = heat_kernel_expm(&g, s);
        for a in 0..n {
            for (i, &t) in ts.iter().enumerate() {
                let re: f64 = (0..n).map(|m| (t * k[(m, a)]).cos()).sum::<f64>() / n as f64;
                let im: f64 = (0..n).map(|m| (t * k[(m, a)]).sin()).sum::<f64>() / n as f64;
                let base = j * 2 * ts.len() + 2 * i;
                assert!((set.row(a)[base] - re).abs() < 1e-9);
                assert!((set.row(a)[base + 1] - im).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn permutation_relabels_embeddings() {
    let b = make_barbell(10, 11).unwrap();
    let n = b.graph.node_count();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut seeds::rng(42));
    let shuffled = b.graph.permuted(&perm);
    let x = embed_all(&b.graph, &dense_cfg()).unwrap();
    let y = embed_all(&shuffled, &dense_cfg()).unwrap();
    for i in 0..n {
        assert_eq!(x.labels()[i], y.labels()[perm[i]]);
        for (p, q) in x.row(i).iter().zip(y.row(perm[i])) {
            assert!((p - q).abs() <= 1e-8, "node {i}: {p} vs {q}");
        }
    }
}

#[test]
fn orbit_mates_have_matching_embeddings() {
    let graphs: Vec<Graph> = vec![
        make_barbell(10, 11).unwrap().graph,
        make_barbell(5, 4).unwrap().graph,
        NamedBenchmark::House.generate(0).unwrap().graph,
        NamedBenchmark::Star.generate(0).unwrap().graph,
    ];
    for g in &graphs {
        let orbit = orbits(g);
        let set = embed_all(g, &dense_cfg()).unwrap();
        for a in 0..g.node_count() {
            for c in a + 1..g.node_count() {
                if orbit[a] == orbit[c] {
                    assert!(set.distance(a, c) <= 1e-6, "{a} {c}: {}", set.distance(a, c));
                }
            }
        }
    }
}

#[test]
fn barbell_clique_pair_closer_than_clique_to_chain_middle() {
    let b = make_barbell(10, 11).unwrap();
    let set = embed_all(&b.graph, &dense_cfg()).unwrap();
    let (interior_a, interior_b) = (0, 1);
    let chain_middle = 10 + 5;
    assert_eq!(b.roles[interior_a], 0);
    assert_eq!(b.roles[chain_middle], *b.roles.iter().max().unwrap());
    assert!(set.distance(interior_a, interior_b) < set.distance(interior_a, chain_middle));

    let nn = set.nearest_neighbors(0, 1, &BTreeSet::new()).unwrap();
    assert_eq!(b.roles[nn[0].0], b.roles[0]);
}

/// Rewires one edge whose endpoints are at least `far` hops from `a`,
/// keeping the graph connected.
fn rewire_far_edge(g: &Graph, a: usize, far: usize) -> Graph {
    let hops = g.bfs_distances(a);
    let n = g.node_count();
    for e in g.edges() {
        if hops[e.u] < far || hops[e.v] < far {
            continue;
        }
        for w in 0..n {
            if w == e.u || w == e.v || hops[w] < far || g.has_edge(e.u, w) {
                continue;
            }
            let mut edges: Vec<(usize, usize, f64)> = g
                .edges()
                .iter()
                .filter(|x| !(x.u == e.u && x.v == e.v))
                .map(|x| (x.u, x.v, x.weight))
                .collect();
            edges.push((e.u, w, 1.0));
            let h = Graph::from_parts(g.labels().to_vec(), edges).unwrap();
            if h.is_connected() {
                return h;
            }
        }
    }
    panic!("no far edge to rewire");
}

#[test]
fn far_rewiring_moves_embedding_less_than_role_gap() {
    let b = NamedBenchmark::House.generate(3).unwrap();
    let g = &b.graph;
    let before = embed_all(g, &dense_cfg()).unwrap();
    for a in [0usize, 30, 31, 32, 34] {
        let after = embed_all(&rewire_far_edge(g, a, 4), &dense_cfg()).unwrap();
        let moved = structural_distance(before.row(a), after.row(a)).unwrap();
        let gap = (0..g.node_count())
            .filter(|&c| b.roles[c] != b.roles[a])
            .map(|c| before.distance(a, c))
            .fold(f64::INFINITY, f64::min);
        assert!(moved < gap, "node {a}: moved {moved}, role gap {gap}");
    }
}

#[test]
fn explicit_scales_are_used_verbatim() {
    let g = random_connected(20, 10, 3);
    let cfg = EmbeddingConfig {
        scales: ScaleSource::Explicit(vec![0.5, 1.5, 3.0]),
        sample_count: 4,
        ..dense_cfg()
    };
    let set = embed_all(&g, &cfg).unwrap();
    assert_eq!(set.scales, vec![0.5, 1.5, 3.0]);
    assert_eq!(set.dim(), 2 * 4 * 3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn characteristic_function_is_bounded(n in 4usize..60, extra in 0usize..50, seed in any::<u64>()) {
        let g = random_connected(n, extra, seed);
        for mode in [WaveletMode::Dense, WaveletMode::Chebyshev] {
            let set = embed_all(&g, &EmbeddingConfig { mode, ..Default::default() }).unwrap();
            for row in set.rows() {
                for pair in row.chunks(2) {
                    prop_assert!(pair[0] * pair[0] + pair[1] * pair[1] <= 1.0 + 1e-12);
                }
            }
        }
    }

    #[test]
    fn characteristic_function_is_lipschitz(
        values in proptest::collection::vec(0.0f64..1.0, 1..40),
        t in 0.0f64..100.0,
        dt in -5.0f64..5.0,
    ) {
        let total: f64 = values.iter().sum::<f64>().max(1e-9);
        let col: Vec<f64> = values.iter().map(|v| v / total).collect();
        let c = WaveletColumn::dense(0, 1.0, col, WaveletPath::Dense);
        let (r1, i1) = char_function(&c, t);
        let (r2, i2) = char_function(&c, t + dt);
        let gap = ((r1 - r2).powi(2) + (i1 - i2).powi(2)).sqrt();
        prop_assert!(gap <= dt.abs() + 1e-12);
    }

    #[test]
    fn sparse_and_dense_columns_agree(
        values in proptest::collection::vec(prop_oneof![Just(0.0f64), 0.0f64..1.0], 2..30),
        t in 0.0f64..100.0,
    ) {
        let n = values.len();
        let (idx, vals): (Vec<usize>, Vec<f64>) =
            values.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(i, &v)| (i, v)).unzip();
        let dense = WaveletColumn::dense(0, 1.0, values.clone(), WaveletPath::Dense);
        let sparse = WaveletColumn::sparse(0, 1.0, n, idx, vals, WaveletPath::Chebyshev);
        let (a, b) = (char_function(&dense, t), char_function(&sparse, t));
        prop_assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
    }
}
