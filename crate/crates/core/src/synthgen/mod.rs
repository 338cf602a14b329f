//! Seeded generators for planted-role benchmarks.

mod karate;
mod shapes;

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use karate::{karate_graph, make_mirrored_karate, KARATE_NODES};
pub use shapes::{Shape, ShapeKind};

use crate::graph::{Graph, GraphError};
use crate::seeds;

/// Edge-noise fraction of the perturbed benchmark variants.
pub const PERTURBED_FRACTION: f64 = 0.10;
pub const DEFAULT_BARBELL_CLIQUE: usize = 10;
pub const DEFAULT_BARBELL_CHAIN: usize = 11;
const MAX_PERTURB_ATTEMPTS: u64 = 100;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("invalid generator parameter: {0}")]
    InvalidParameter(String),
    #[error("{requested} shapes requested but the skeleton has only {slots} slots")]
    Oversubscribed { slots: usize, requested: usize },
    #[error("cannot add {requested} edges: only {available} non-edges remain")]
    TooManyEdges { requested: usize, available: usize },
    #[error("perturbation failed after {attempts} attempts: {reason}")]
    PerturbationFailed { attempts: u64, reason: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A generated graph with ground-truth structural roles.
#[derive(Debug, Clone, PartialEq)]
pub struct RoleBenchmark {
    pub graph: Graph,
    /// Role id per node.
    pub roles: Vec<usize>,
    /// Name per role id.
    pub role_names: Vec<String>,
    pub seed: u64,
    /// Ordered generation parameters.
    pub recipe: Vec<(String, String)>,
    /// Structural twin of each node, when the benchmark defines one.
    pub mirror: Option<Vec<usize>>,
}

impl RoleBenchmark {
    pub fn role_count(&self) -> usize {
        self.role_names.len()
    }

    /// Number of distinct role ids that actually occur.
    pub fn roles_present(&self) -> usize {
        self.roles.iter().collect::<BTreeSet<_>>().len()
    }

    pub fn recipe_value(&self, key: &str) -> Option<&str> {
        self.recipe.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn roles_csv(&self) -> String {
        let mut out = String::from("node,role_id,role_name\n");
        for (i, &r) in self.roles.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", self.graph.label(i), r, self.role_names[r]);
        }
        out
    }

    /// `key: value` lines, seed first.
    pub fn recipe_text(&self) -> String {
        let mut out = format!("seed: {}\n", self.seed);
        for (k, v) in &self.recipe {
            let _ = writeln!(out, "{k}: {v}");
        }
        let _ = writeln!(out, "nodes: {}", self.graph.node_count());
        let _ = writeln!(out, "edges: {}", self.graph.edge_count());
        let _ = writeln!(out, "roles: {}", self.role_count());
        let _ = writeln!(out, "graph_hash: {}", self.graph.content_hash());
        out
    }

    /// Writes `<stem>.edges`, `<stem>.roles.csv` and `<stem>.recipe` into
    /// `dir`, returning the paths in that order.
    pub fn write_files(&self, dir: &Path, stem: &str) -> io::Result<Vec<PathBuf>> {
        let files = [
            (format!("{stem}.edges"), self.graph.to_edge_list()),
            (format!("{stem}.roles.csv"), self.roles_csv()),
            (format!("{stem}.recipe"), self.recipe_text()),
        ];
        files
            .into_iter()
            .map(|(name, body)| {
                let p = dir.join(name);
                std::fs::write(&p, body)?;
                Ok(p)
            })
            .collect()
    }
}

/// Two `K_clique` cliques whose gateway nodes are joined through a path of
/// `chain` nodes.
///
/// Roles: clique interior, clique gateway, then chain positions paired with
/// their mirror image (`ceil(chain / 2)` classes ordered outward-in).
pub fn make_barbell(clique: usize, chain: usize) -> Result<RoleBenchmark, SynthError> {
    if clique < 3 {
        return Err(SynthError::InvalidParameter(format!("clique size must be >= 3, got {clique}")));
    }
    if chain < 1 {
        return Err(SynthError::InvalidParameter("chain length must be >= 1".into()));
    }
    let n = 2 * clique + chain;
    let gate_a = clique - 1;
    let gate_b = clique + chain;
    let mut edges = Vec::new();
    for offset in [0, clique + chain] {
        for i in 0..clique {
            for j in i + 1..clique {
                edges.push((offset + i, offset + j));
            }
        }
    }
    let path: Vec<usize> = std::iter::once(gate_a)
        .chain(clique..clique + chain)
        .chain(std::iter::once(gate_b))
        .collect();
    edges.extend(path.windows(2).map(|w| (w[0], w[1])));

    let mut roles = vec![0; n];
    roles[gate_a] = 1;
    roles[gate_b] = 1;
    for p in 0..chain {
        roles[clique + p] = 2 + p.min(chain - 1 - p);
    }
    let mut role_names = vec!["clique-interior".to_string(), "clique-gateway".to_string()];
    role_names.extend((0..chain.div_ceil(2)).map(|k| format!("chain-{}", k + 1)));

    Ok(RoleBenchmark {
        graph: Graph::from_index_edges(n, &edges)?,
        roles,
        role_names,
        seed: 0,
        recipe: vec![
            ("generator".into(), "barbell".into()),
            ("clique_size".into(), clique.to_string()),
            ("chain_length".into(), chain.to_string()),
        ],
        mirror: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    /// Instance `k` of `count` sits at slot `floor(len * k / count)`.
    Regular,
    /// Seeded uniform distinct slots.
    Random,
}

impl Placement {
    pub fn as_str(self) -> &'static str {
        match self {
            Placement::Regular => "regular",
            Placement::Random => "random",
        }
    }
}

/// Role vocabulary builder keyed by descriptive names.
struct Vocabulary {
    names: Vec<String>,
}

impl Vocabulary {
    fn new(names: Vec<String>) -> Self {
        Self { names }
    }

    fn id(&self, name: &str) -> usize {
        self.names.iter().position(|n| n == name).expect("role name in vocabulary")
    }
}

/// Skeleton plus planted shapes, node order: skeleton first, then shapes in
/// instance order.
struct Planted {
    n: usize,
    edges: Vec<(usize, usize)>,
    role_keys: Vec<String>,
}

fn plant(
    skeleton_len: usize,
    mut edges: Vec<(usize, usize)>,
    skeleton_role: &str,
    attachments: &[(usize, ShapeKind)],
) -> Planted {
    let mut role_keys = vec![skeleton_role.to_string(); skeleton_len];
    let mut n = skeleton_len;
    for &(slot, kind) in attachments {
        let shape = kind.shape();
        edges.extend(shape.edges.iter().map(|&(u, v)| (n + u, n + v)));
        edges.push((slot, n + shape.anchor));
        role_keys[slot] = format!("{skeleton_role}-attachment");
        role_keys.extend(shape.orbits.iter().map(|&o| shape.role_name(o)));
        n += shape.size;
    }
    Planted { n, edges, role_keys }
}

fn cycle_edges(len: usize) -> Vec<(usize, usize)> {
    (0..len).map(|i| (i, (i + 1) % len)).collect()
}

fn path_edges(len: usize) -> Vec<(usize, usize)> {
    (1..len).map(|i| (i - 1, i)).collect()
}

/// A cycle of `cycle_len` nodes with shapes attached by one edge from each
/// shape's anchor to a distinct cycle node.
///
/// Role ids follow the order plain cycle, attachment point, then each listed
/// shape kind's orbits; only roles that occur get an id.
pub fn make_cycle_with_shapes(
    cycle_len: usize,
    shapes: &[(ShapeKind, usize)],
    placement: Placement,
    seed: u64,
) -> Result<RoleBenchmark, SynthError> {
    if cycle_len < 3 {
        return Err(SynthError::InvalidParameter(format!("cycle length must be >= 3, got {cycle_len}")));
    }
    let instances: Vec<ShapeKind> = shapes
        .iter()
        .flat_map(|&(k, c)| std::iter::repeat_n(k, c))
        .collect();
    if instances.len() > cycle_len {
        return Err(SynthError::Oversubscribed {
            slots: cycle_len,
            requested: instances.len(),
        });
    }
    let count = instances.len();
    let attachments: Vec<(usize, ShapeKind)> = match placement {
        Placement::Regular => instances
            .iter()
            .enumerate()
            .map(|(k, &kind)| (cycle_len * k / count, kind))
            .collect(),
        Placement::Random => {
            let mut rng = seeds::rng(seeds::derive(seed, seeds::STREAM_PLACEMENT, 0));
            let mut slots = sample(&mut rng, cycle_len, count).into_vec();
            slots.sort_unstable();
            let mut kinds = instances.clone();
            kinds.shuffle(&mut rng);
            slots.into_iter().zip(kinds).collect()
        }
    };

    let planted = plant(cycle_len, cycle_edges(cycle_len), "cycle", &attachments);
    let mut vocab = vec!["cycle".to_string(), "cycle-attachment".to_string()];
    let mut seen_kinds = Vec::new();
    for &(k, _) in shapes {
        if !seen_kinds.contains(&k) {
            seen_kinds.push(k);
            let s = k.shape();
            vocab.extend((0..s.orbit_count()).map(|o| s.role_name(o)));
        }
    }
    let present: HashSet<&String> = planted.role_keys.iter().collect();
    vocab.retain(|name| present.contains(name));
    let vocab = Vocabulary::new(vocab);

    let shape_desc = shapes
        .iter()
        .map(|(k, c)| format!("{k}x{c}"))
        .collect::<Vec<_>>()
        .join(",");
    Ok(RoleBenchmark {
        graph: Graph::from_index_edges(planted.n, &planted.edges)?,
        roles: planted.role_keys.iter().map(|k| vocab.id(k)).collect(),
        role_names: vocab.names,
        seed,
        recipe: vec![
            ("generator".into(), "cycle-with-shapes".into()),
            ("cycle_length".into(), cycle_len.to_string()),
            ("shapes".into(), shape_desc),
            ("placement".into(), placement.as_str().into()),
            (
                "slots".into(),
                attachments.iter().map(|(s, _)| s.to_string()).collect::<Vec<_>>().join(","),
            ),
        ],
        mirror: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbMode {
    /// Insert uniform random non-edges.
    Add,
    /// Move one endpoint of existing edges to a uniform new node.
    Rewire,
}

impl PerturbMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PerturbMode::Add => "add",
            PerturbMode::Rewire => "rewire",
        }
    }
}

/// Applies `floor(fraction * |E|)` edge changes. Roles are kept. A result
/// that is disconnected is redrawn with the next derived seed.
pub fn perturb_edges(
    b: &RoleBenchmark,
    fraction: f64,
    mode: PerturbMode,
    seed: u64,
) -> Result<RoleBenchmark, SynthError> {
    if !(fraction >= 0.0 && fraction.is_finite()) {
        return Err(SynthError::InvalidParameter(format!("fraction must be >= 0, got {fraction}")));
    }
    let count = (fraction * b.graph.edge_count() as f64).floor() as usize;
    let mut last_reason = String::new();
    for attempt in 0..MAX_PERTURB_ATTEMPTS {
        let mut rng = seeds::rng(seeds::derive(seed, seeds::STREAM_PERTURB, attempt));
        let edges = match mode {
            PerturbMode::Add => add_random_edges(&b.graph, count, &mut rng)?,
            PerturbMode::Rewire => match rewire_edges(&b.graph, count, &mut rng) {
                Ok(e) => e,
                Err(reason) => {
                    last_reason = reason;
                    continue;
                }
            },
        };
        let graph = Graph::from_parts(
            b.graph.labels().to_vec(),
            edges.into_iter().map(|(u, v)| (u, v, 1.0)).collect(),
        )?;
        if !graph.is_connected() {
            last_reason = "result disconnected".into();
            continue;
        }
        let mut recipe = b.recipe.clone();
        recipe.push(("perturbation".into(), mode.as_str().into()));
        recipe.push(("perturbation_fraction".into(), fraction.to_string()));
        recipe.push(("perturbation_seed".into(), seed.to_string()));
        recipe.push(("perturbation_attempt".into(), attempt.to_string()));
        return Ok(RoleBenchmark {
            graph,
            roles: b.roles.clone(),
            role_names: b.role_names.clone(),
            seed: b.seed,
            recipe,
            mirror: b.mirror.clone(),
        });
    }
    Err(SynthError::PerturbationFailed {
        attempts: MAX_PERTURB_ATTEMPTS,
        reason: last_reason,
    })
}

fn edge_pairs(g: &Graph) -> Vec<(usize, usize)> {
    g.edges().iter().map(|e| (e.u, e.v)).collect()
}

/// `count` uniform non-edges among `nodes`, appended to `g`'s edges.
fn add_random_edges_among(
    g_edges: Vec<(usize, usize)>,
    nodes: usize,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(usize, usize)>, SynthError> {
    let mut present: HashSet<(usize, usize)> = g_edges.iter().copied().collect();
    let within = g_edges.iter().filter(|&&(u, v)| u < nodes && v < nodes).count();
    let available = nodes * nodes.saturating_sub(1) / 2 - within;
    if count > available {
        return Err(SynthError::TooManyEdges {
            requested: count,
            available,
        });
    }
    let mut edges = g_edges;
    if count * 4 > available {
        let candidates: Vec<(usize, usize)> = (0..nodes)
            .flat_map(|u| (u + 1..nodes).map(move |v| (u, v)))
            .filter(|p| !present.contains(p))
            .collect();
        let picks = sample(rng, candidates.len(), count);
        edges.extend(picks.iter().map(|i| candidates[i]));
    } else {
        let mut added = 0;
        while added < count {
            let u = rng.gen_range(0..nodes);
            let v = rng.gen_range(0..nodes);
            let key = (u.min(v), u.max(v));
            if u != v && present.insert(key) {
                edges.push(key);
                added += 1;
            }
        }
    }
    Ok(edges)
}

fn add_random_edges(
    g: &Graph,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(usize, usize)>, SynthError> {
    add_random_edges_among(edge_pairs(g), g.node_count(), count, rng)
}

fn rewire_edges(g: &Graph, count: usize, rng: &mut ChaCha8Rng) -> Result<Vec<(usize, usize)>, String> {
    let n = g.node_count();
    let original = edge_pairs(g);
    if count > original.len() {
        return Err(format!("cannot rewire {count} of {} edges", original.len()));
    }
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for &(u, v) in &original {
        adj[u].insert(v);
        adj[v].insert(u);
    }
    let mut chosen = sample(rng, original.len(), count).into_vec();
    chosen.sort_unstable();
    for idx in chosen {
        let (u, v) = original[idx];
        let (keep, drop) = if rng.gen_bool(0.5) { (u, v) } else { (v, u) };
        let candidates: Vec<usize> = (0..n)
            .filter(|&w| w != keep && w != drop && !adj[keep].contains(&w))
            .collect();
        let Some(&w) = candidates.choose(rng) else {
            return Err(format!("no valid endpoint to rewire edge ({u}, {v})"));
        };
        adj[keep].remove(&drop);
        adj[drop].remove(&keep);
        adj[keep].insert(w);
        adj[w].insert(keep);
    }
    Ok((0..n)
        .flat_map(|u| adj[u].range(u + 1..).map(move |&v| (u, v)).collect::<Vec<_>>())
        .collect())
}

/// Ranges for the multi-graph corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusRecipe {
    /// Inclusive skeleton size range.
    pub skeleton_size: (usize, usize),
    /// Inclusive shape count range.
    pub shape_count: (usize, usize),
    pub extra_edges: usize,
}

impl Default for CorpusRecipe {
    fn default() -> Self {
        Self {
            skeleton_size: (15, 40),
            shape_count: (2, 8),
            extra_edges: 10,
        }
    }
}

/// Role names shared by every corpus graph.
pub fn corpus_vocabulary() -> Vec<String> {
    let mut v = vec!["skeleton".to_string(), "skeleton-attachment".to_string()];
    for k in [ShapeKind::House, ShapeKind::Chain] {
        let s = k.shape();
        v.extend((0..s.orbit_count()).map(|o| s.role_name(o)));
    }
    v
}

/// `count` independent graphs: cycle or path skeleton (even odds), uniform
/// size, uniform number of house/chain shapes on distinct random slots, and
/// extra random edges between skeleton nodes.
pub fn make_crossgraph_corpus(
    count: usize,
    seed: u64,
    recipe: &CorpusRecipe,
) -> Result<Vec<RoleBenchmark>, SynthError> {
    let (lo, hi) = recipe.skeleton_size;
    let (slo, shi) = recipe.shape_count;
    if count == 0 || lo < 3 || lo > hi || slo > shi || shi > lo {
        return Err(SynthError::InvalidParameter(format!(
            "bad corpus recipe {recipe:?} for {count} graphs"
        )));
    }
    let vocab = Vocabulary::new(corpus_vocabulary());
    (0..count)
        .map(|i| {
            let graph_seed = seeds::derive(seed, seeds::STREAM_CORPUS, i as u64);
            let mut rng = seeds::rng(graph_seed);
            let is_cycle = rng.gen_bool(0.5);
            let size = rng.gen_range(lo..=hi);
            let shapes = rng.gen_range(slo..=shi);
            let kinds: Vec<ShapeKind> = (0..shapes)
                .map(|_| if rng.gen_bool(0.5) { ShapeKind::House } else { ShapeKind::Chain })
                .collect();
            let mut slots = sample(&mut rng, size, shapes).into_vec();
            slots.sort_unstable();
            let attachments: Vec<(usize, ShapeKind)> = slots.into_iter().zip(kinds).collect();
            let skeleton = if is_cycle { cycle_edges(size) } else { path_edges(size) };
            let skeleton = add_random_edges_among(skeleton, size, recipe.extra_edges, &mut rng)?;
            let planted = plant(size, skeleton, "skeleton", &attachments);
            Ok(RoleBenchmark {
                graph: Graph::from_index_edges(planted.n, &planted.edges)?,
                roles: planted.role_keys.iter().map(|k| vocab.id(k)).collect(),
                role_names: vocab.names.clone(),
                seed: graph_seed,
                recipe: vec![
                    ("generator".into(), "crossgraph".into()),
                    ("index".into(), i.to_string()),
                    ("skeleton".into(), if is_cycle { "cycle" } else { "path" }.into()),
                    ("skeleton_size".into(), size.to_string()),
                    ("skeleton_size_range".into(), format!("{lo}..={hi}")),
                    ("shape_count".into(), shapes.to_string()),
                    ("shape_count_range".into(), format!("{slo}..={shi}")),
                    ("extra_edges".into(), recipe.extra_edges.to_string()),
                    (
                        "shapes".into(),
                        attachments
                            .iter()
                            .map(|(s, k)| format!("{k}@{s}"))
                            .collect::<Vec<_>>()
                            .join(","),
                    ),
                ],
                mirror: None,
            })
        })
        .collect()
}

/// One graph per requested size: a cycle of about half the nodes carrying
/// `n / 10` five-node house or chain shapes, plus 10 extra skeleton edges.
pub fn make_scaling_family(sizes: &[usize], seed: u64) -> Result<Vec<Graph>, SynthError> {
    if sizes.windows(2).any(|w| w[0] > w[1]) {
        return Err(SynthError::InvalidParameter("sizes must be ascending".into()));
    }
    sizes
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            if n < 20 {
                return Err(SynthError::InvalidParameter(format!("scaling size must be >= 20, got {n}")));
            }
            let mut rng = seeds::rng(seeds::derive(seed, seeds::STREAM_SCALING, i as u64));
            let shapes = n / 10;
            let cycle_len = n - 5 * shapes;
            let mut slots = sample(&mut rng, cycle_len, shapes).into_vec();
            slots.sort_unstable();
            let attachments: Vec<(usize, ShapeKind)> = slots
                .into_iter()
                .map(|s| (s, if rng.gen_bool(0.5) { ShapeKind::House } else { ShapeKind::Chain }))
                .collect();
            let skeleton = add_random_edges_among(cycle_edges(cycle_len), cycle_len, 10, &mut rng)?;
            let planted = plant(cycle_len, skeleton, "cycle", &attachments);
            Ok(Graph::from_index_edges(planted.n, &planted.edges)?)
        })
        .collect()
}

/// Benchmarks addressable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedBenchmark {
    Barbell,
    House,
    HousePerturbed,
    Fan,
    Star,
    Varied,
    VariedPerturbed,
}

impl NamedBenchmark {
    pub const ALL: [NamedBenchmark; 7] = [
        NamedBenchmark::Barbell,
        NamedBenchmark::House,
        NamedBenchmark::HousePerturbed,
        NamedBenchmark::Fan,
        NamedBenchmark::Star,
        NamedBenchmark::Varied,
        NamedBenchmark::VariedPerturbed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NamedBenchmark::Barbell => "barbell",
            NamedBenchmark::House => "house",
            NamedBenchmark::HousePerturbed => "house-perturbed",
            NamedBenchmark::Fan => "fan",
            NamedBenchmark::Star => "star",
            NamedBenchmark::Varied => "varied",
            NamedBenchmark::VariedPerturbed => "varied-perturbed",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.as_str() == name)
    }

    pub fn is_perturbed(self) -> bool {
        matches!(self, NamedBenchmark::HousePerturbed | NamedBenchmark::VariedPerturbed)
    }

    /// Cycle of 30 with 10 regular shapes, or cycle of 40 with 8 random
    /// instances of each of house, fan and star; perturbed variants add 10%
    /// random edges.
    pub fn generate(self, seed: u64) -> Result<RoleBenchmark, SynthError> {
        let regular = |kind| make_cycle_with_shapes(30, &[(kind, 10)], Placement::Regular, seed);
        let varied = || {
            make_cycle_with_shapes(
                40,
                &[(ShapeKind::House, 8), (ShapeKind::Fan, 8), (ShapeKind::Star, 8)],
                Placement::Random,
                seed,
            )
        };
        let mut b = match self {
            NamedBenchmark::Barbell => make_barbell(DEFAULT_BARBELL_CLIQUE, DEFAULT_BARBELL_CHAIN)?,
            NamedBenchmark::House | NamedBenchmark::HousePerturbed => regular(ShapeKind::House)?,
            NamedBenchmark::Fan => regular(ShapeKind::Fan)?,
            NamedBenchmark::Star => regular(ShapeKind::Star)?,
            NamedBenchmark::Varied | NamedBenchmark::VariedPerturbed => varied()?,
        };
        b.seed = seed;
        if self.is_perturbed() {
            b = perturb_edges(&b, PERTURBED_FRACTION, PerturbMode::Add, seed)?;
        }
        b.recipe.insert(0, ("benchmark".into(), self.as_str().into()));
        Ok(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn barbell_small_roles() {
        let b = make_barbell(4, 2).unwrap();
        assert_eq!(b.graph.node_count(), 10);
        assert_eq!(b.graph.edge_count(), 2 * 6 + 3);
        assert_eq!(b.role_count(), 3);
        assert_eq!(b.roles, vec![0, 0, 0, 1, 2, 2, 1, 0, 0, 0]);
    }

    #[test]
    fn barbell_default_has_eight_classes() {
        let b = make_barbell(DEFAULT_BARBELL_CLIQUE, DEFAULT_BARBELL_CHAIN).unwrap();
        assert_eq!(b.role_count(), 8);
        assert_eq!(b.roles_present(), 8);
        assert!(make_barbell(4, 0).is_err());
        assert!(make_barbell(2, 3).is_err());
    }

    #[test]
    fn house_benchmark_shape() {
        let b = NamedBenchmark::House.generate(7).unwrap();
        assert_eq!(b.graph.node_count(), 30 + 50);
        assert_eq!(b.graph.edge_count(), 30 + 10 * 7);
        assert_eq!(
            b.role_names,
            vec!["cycle", "cycle-attachment", "house-apex", "house-roof", "house-base"]
        );
        assert_eq!(b.recipe_value("slots").unwrap(), "0,3,6,9,12,15,18,21,24,27");
    }

    #[test]
    fn plain_cycle_has_one_role() {
        let b = make_cycle_with_shapes(12, &[], Placement::Regular, 1).unwrap();
        assert_eq!(b.role_count(), 1);
        assert_eq!(b.graph.edge_count(), 12);
    }

    #[test]
    fn varied_benchmark_is_deterministic() {
        let a = NamedBenchmark::Varied.generate(11).unwrap();
        let b = NamedBenchmark::Varied.generate(11).unwrap();
        assert_eq!(a.graph.to_edge_list(), b.graph.to_edge_list());
        assert_eq!(a.roles, b.roles);
        assert_eq!(a.role_count(), 10);
        assert_eq!(a.graph.node_count(), 40 + 8 * 5 + 8 * 5 + 8 * 6);
        let c = NamedBenchmark::Varied.generate(12).unwrap();
        assert_ne!(a.graph.to_edge_list(), c.graph.to_edge_list());
    }

    #[test]
    fn oversubscribed_cycle() {
        let err = make_cycle_with_shapes(5, &[(ShapeKind::Star, 6)], Placement::Random, 1).unwrap_err();
        assert_eq!(err, SynthError::Oversubscribed { slots: 5, requested: 6 });
    }

    #[test]
    fn perturbation_modes() {
        let b = NamedBenchmark::House.generate(3).unwrap();
        let same = perturb_edges(&b, 0.0, PerturbMode::Add, 9).unwrap();
        assert_eq!(same.graph.to_edge_list(), b.graph.to_edge_list());

        let noisy = NamedBenchmark::HousePerturbed.generate(3).unwrap();
        assert_eq!(noisy.graph.edge_count(), 100 + 10);
        assert_eq!(noisy.roles, b.roles);
        assert_eq!(noisy.recipe_value("perturbation_fraction"), Some("0.1"));
        for e in b.graph.edges() {
            assert!(noisy.graph.has_edge(e.u, e.v));
        }

        let rewired = perturb_edges(&b, 0.2, PerturbMode::Rewire, 5).unwrap();
        assert_eq!(rewired.graph.edge_count(), b.graph.edge_count());
        assert!(rewired.graph.is_connected());
        assert_ne!(rewired.graph.to_edge_list(), b.graph.to_edge_list());

        let tri = make_cycle_with_shapes(3, &[], Placement::Regular, 0).unwrap();
        assert!(matches!(
            perturb_edges(&tri, 1.0, PerturbMode::Rewire, 0),
            Err(SynthError::PerturbationFailed { .. })
        ));
        assert!(matches!(
            perturb_edges(&tri, 1.0, PerturbMode::Add, 0),
            Err(SynthError::TooManyEdges { .. })
        ));
    }

    #[test]
    fn corpus_shares_vocabulary() {
        let corpus = make_crossgraph_corpus(6, 4, &CorpusRecipe::default()).unwrap();
        assert_eq!(corpus.len(), 6);
        for b in &corpus {
            assert_eq!(b.role_names, corpus_vocabulary());
            assert!(b.graph.is_connected());
            let size: usize = b.recipe_value("skeleton_size").unwrap().parse().unwrap();
            assert!((15..=40).contains(&size));
            let skeleton_edges = b.graph.edges().iter().filter(|e| e.v < size).count();
            let base = if b.recipe_value("skeleton") == Some("cycle") { size } else { size - 1 };
            assert_eq!(skeleton_edges, base + 10);
        }
        let again = make_crossgraph_corpus(1, 4, &CorpusRecipe::default()).unwrap();
        assert_eq!(again[0], corpus[0]);
    }

    #[test]
    fn scaling_family_sizes() {
        let gs = make_scaling_family(&[1000, 2000], 1).unwrap();
        assert_eq!(gs[0].node_count(), 1000);
        assert_eq!(gs[1].node_count(), 2000);
        assert!(gs.iter().all(Graph::is_connected));
        assert!(make_scaling_family(&[], 1).unwrap().is_empty());
        assert!(make_scaling_family(&[2000, 1000], 1).is_err());
    }

    #[test]
    fn role_csv_and_recipe() {
        let b = make_barbell(3, 1).unwrap();
        let csv = b.roles_csv();
        assert!(csv.starts_with("node,role_id,role_name\n0,0,clique-interior\n"));
        assert!(b.recipe_text().contains("clique_size: 3\n"));
    }
}
