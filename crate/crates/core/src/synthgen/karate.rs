//! Zachary's karate club and its mirrored two-copy variant.

use rand::seq::index::sample;

use super::{RoleBenchmark, SynthError};
use crate::graph::Graph;
use crate::seeds;

const KARATE_EDGES: &str = include_str!("../../data/karate.edges");
pub const KARATE_NODES: usize = 34;

fn karate_pairs() -> Vec<(usize, usize)> {
    KARATE_EDGES
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let mut it = l.split_whitespace().map(|x| x.parse::<usize>().expect("fixture is numeric"));
            (it.next().expect("src"), it.next().expect("dst"))
        })
        .collect()
}

/// The bundled 34-node, 78-edge club graph with labels `"0".."33"`.
pub fn karate_graph() -> Graph {
    Graph::from_index_edges(KARATE_NODES, &karate_pairs()).expect("bundled fixture is valid")
}

/// Two disjoint copies (nodes `i` and `i + 34`) joined by `mirror_edges`
/// distinct edges `(i, i + 34)` with `i` drawn uniformly.
///
/// Role `i` holds both copies of member `i`.
pub fn make_mirrored_karate(mirror_edges: usize, seed: u64) -> Result<RoleBenchmark, SynthError> {
    if !(1..=KARATE_NODES).contains(&mirror_edges) {
        return Err(SynthError::InvalidParameter(format!(
            "mirror edge count must be in 1..={KARATE_NODES}, got {mirror_edges}"
        )));
    }
    let n = KARATE_NODES;
    let base = karate_pairs();
    let mut edges: Vec<(usize, usize)> = base.clone();
    edges.extend(base.iter().map(|&(u, v)| (u + n, v + n)));
    let mut rng = seeds::rng(seeds::derive(seed, seeds::STREAM_MIRROR, mirror_edges as u64));
    let mut picked = sample(&mut rng, n, mirror_edges).into_vec();
    picked.sort_unstable();
    edges.extend(picked.iter().map(|&i| (i, i + n)));

    let graph = Graph::from_index_edges(2 * n, &edges)?;
    let roles = (0..2 * n).map(|i| i % n).collect();
    let role_names = (0..n).map(|i| format!("member-{i}")).collect();
    let mirror = (0..2 * n).map(|i| (i + n) % (2 * n)).collect();
    Ok(RoleBenchmark {
        graph,
        roles,
        role_names,
        seed,
        recipe: vec![
            ("generator".into(), "mirrored-karate".into()),
            ("mirror_edges".into(), mirror_edges.to_string()),
            (
                "mirrored_members".into(),
                picked.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","),
            ),
        ],
        mirror: Some(mirror),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_counts() {
        let g = karate_graph();
        assert_eq!(g.node_count(), 34);
        assert_eq!(g.edge_count(), 78);
        assert!(g.is_connected());
        // Club instructor and administrator have the two largest degrees.
        assert_eq!(g.degrees()[0], 16.0);
        assert_eq!(g.degrees()[33], 17.0);
    }

    #[test]
    fn mirrored_counts_and_copies() {
        for k in [1, 7, 34] {
            let b = make_mirrored_karate(k, 3).unwrap();
            assert_eq!(b.graph.node_count(), 68);
            assert_eq!(b.graph.edge_count(), 2 * 78 + k);
            assert!(b.graph.is_connected());
            let m = b.mirror.as_ref().unwrap();
            for e in karate_graph().edges() {
                assert!(b.graph.has_edge(e.u + 34, e.v + 34));
            }
            assert!((0..68).all(|i| m[m[i]] == i && b.roles[i] == b.roles[m[i]]));
        }
        let full = make_mirrored_karate(34, 1).unwrap();
        assert!((0..34).all(|i| full.graph.has_edge(i, i + 34)));
    }

    #[test]
    fn out_of_range() {
        assert!(make_mirrored_karate(0, 1).is_err());
        assert!(make_mirrored_karate(35, 1).is_err());
    }
}
