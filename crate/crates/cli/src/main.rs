//! `gravelet`: embed graphs, generate benchmarks, run experiments and query
//! structural distances.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gravelet::embedding::{embed_all, EmbeddingConfig, EmbeddingSet, ScaleSource};
use gravelet::eval::{F1Average, KnnConfig};
use gravelet::experiments::{run_experiment, ExperimentConfig, ExperimentName, SweepClustering};
use gravelet::graph::parse_edge_list;
use gravelet::spectral::SpectrumMode;
use gravelet::synthgen::{
    make_barbell, make_crossgraph_corpus, make_mirrored_karate, NamedBenchmark, RoleBenchmark,
};
use gravelet::wavelet::WaveletMode;
use gravelet::Error;

#[derive(Parser, Debug)]
#[command(name = "gravelet", version, about = "Structural node embeddings from heat-diffusion wavelets")]
struct Cli {
    /// Worker threads for per-node and per-trial parallelism.
    #[arg(long, global = true, env = "GRAVELET_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Embed every node of an edge-list graph.
    Embed(EmbedCmd),
    /// Write a synthetic benchmark: edges, roles CSV and recipe.
    Generate(GenerateCmd),
    /// Run a named experiment protocol and write its reports.
    Experiment(ExperimentCmd),
    /// Structural distances or nearest neighbours from an embedding CSV.
    Distances(DistancesCmd),
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ModeArg {
    Auto,
    Dense,
    Chebyshev,
}

impl From<ModeArg> for WaveletMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Auto => WaveletMode::Auto,
            ModeArg::Dense => WaveletMode::Dense,
            ModeArg::Chebyshev => WaveletMode::Chebyshev,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct EmbedParams {
    /// Characteristic-function sample points per scale.
    #[arg(long = "d", default_value_t = 50, env = "GRAVELET_D")]
    d: usize,
    /// Largest sample point.
    #[arg(long = "t-max", default_value_t = 100.0, env = "GRAVELET_T_MAX")]
    t_max: f64,
    /// Localization threshold for the largest scale.
    #[arg(long, default_value_t = 0.85, env = "GRAVELET_ETA")]
    eta: f64,
    /// Threshold for the smallest scale.
    #[arg(long, default_value_t = 0.95, env = "GRAVELET_GAMMA")]
    gamma: f64,
    /// Number of scales.
    #[arg(long = "scales", default_value_t = 2, env = "GRAVELET_SCALES")]
    scale_count: usize,
    /// Explicit comma-separated scales, overriding eta/gamma/scales.
    #[arg(long = "scale-list", value_delimiter = ',', env = "GRAVELET_SCALE_LIST")]
    scale_list: Option<Vec<f64>>,
    /// Chebyshev order.
    #[arg(long = "order", short = 'K', default_value_t = 30, env = "GRAVELET_ORDER")]
    order: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto, env = "GRAVELET_MODE")]
    mode: ModeArg,
}

impl EmbedParams {
    fn config(&self) -> EmbeddingConfig {
        EmbeddingConfig {
            sample_count: self.d,
            t_max: self.t_max,
            scales: match &self.scale_list {
                Some(s) => ScaleSource::Explicit(s.clone()),
                None => ScaleSource::Auto {
                    eta: self.eta,
                    gamma: self.gamma,
                    count: self.scale_count,
                },
            },
            mode: self.mode.into(),
            spectrum_mode: SpectrumMode::Auto,
            order: self.order,
            ..Default::default()
        }
    }

    fn echo(&self, out: &mut Vec<(String, String)>) {
        let mode = WaveletMode::from(self.mode).as_str();
        out.push(("d".into(), self.d.to_string()));
        out.push(("t_max".into(), self.t_max.to_string()));
        match &self.scale_list {
            Some(s) => out.push((
                "scale_list".into(),
                s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
            )),
            None => {
                out.push(("eta".into(), self.eta.to_string()));
                out.push(("gamma".into(), self.gamma.to_string()));
                out.push(("scale_count".into(), self.scale_count.to_string()));
            }
        }
        out.push(("order".into(), self.order.to_string()));
        out.push(("mode".into(), mode.into()));
    }
}

#[derive(Args, Debug)]
struct EmbedCmd {
    /// Edge list: `src dst [weight]` per line.
    graph: PathBuf,
    /// Embedding CSV destination; the metadata goes next to it with a
    /// `.meta` suffix.
    #[arg(long, short)]
    output: PathBuf,
    /// Embed the largest connected component instead of rejecting a
    /// disconnected graph.
    #[arg(long)]
    largest_component: bool,
    /// Also dump wavelet coefficients at each scale to `<output>.wavelets.s<j>.csv`.
    #[arg(long)]
    dump_wavelets: bool,
    #[command(flatten)]
    params: EmbedParams,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum RecipeArg {
    House,
    HousePerturbed,
    Fan,
    Star,
    Varied,
    VariedPerturbed,
    Barbell,
    Karate,
    Crossgraph,
}

#[derive(Args, Debug)]
struct GenerateCmd {
    #[arg(value_enum)]
    recipe: RecipeArg,
    #[arg(long, default_value_t = 0, env = "GRAVELET_SEED")]
    seed: u64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// File name stem; defaults to the recipe name.
    #[arg(long)]
    stem: Option<String>,
    /// Barbell clique size.
    #[arg(long, default_value_t = gravelet::synthgen::DEFAULT_BARBELL_CLIQUE)]
    clique: usize,
    /// Barbell chain length.
    #[arg(long, default_value_t = gravelet::synthgen::DEFAULT_BARBELL_CHAIN)]
    chain: usize,
    /// Mirror edges for the karate recipe.
    #[arg(long, default_value_t = 10)]
    mirror_edges: usize,
    /// Number of graphs for the crossgraph recipe.
    #[arg(long, default_value_t = 200)]
    count: usize,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ClusteringArg {
    Agglomerative,
    AffinityPropagation,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum AverageArg {
    Weighted,
    Macro,
}

#[derive(Args, Debug)]
struct ExperimentCmd {
    /// barbell, house, house-perturbed, varied, varied-perturbed,
    /// crossgraph, karate, scaling or noise-sweep.
    name: String,
    #[arg(long, default_value_t = 0, env = "GRAVELET_SEED")]
    seed: u64,
    #[arg(long, default_value_t = 25, env = "GRAVELET_TRIALS")]
    trials: usize,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Mirror edge sweep for karate, as `lo..hi` (inclusive) or one count.
    #[arg(long, default_value = "1..25")]
    mirror_edges: String,
    /// Graph sizes for the scaling experiment.
    #[arg(long, value_delimiter = ',', default_value = "1000,2000,4000,8000,16000")]
    sizes: Vec<usize>,
    /// Timed repetitions per scaling size.
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    /// Graphs in the crossgraph corpus.
    #[arg(long, default_value_t = 200)]
    corpus_size: usize,
    /// Rewiring fractions for the noise sweep.
    #[arg(long, value_delimiter = ',')]
    noise_levels: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = ClusteringArg::Agglomerative)]
    clustering: ClusteringArg,
    /// Neighbours for kNN classification.
    #[arg(long, default_value_t = 4)]
    knn: usize,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, value_enum, default_value_t = AverageArg::Weighted)]
    f1_average: AverageArg,
    #[command(flatten)]
    params: EmbedParams,
}

#[derive(Args, Debug)]
struct DistancesCmd {
    /// Embedding CSV.
    embedding: PathBuf,
    /// Second embedding CSV; pair targets are looked up there.
    #[arg(long)]
    against: Option<PathBuf>,
    /// Node pair `a:b`; repeatable.
    #[arg(long = "pair", value_name = "A:B")]
    pairs: Vec<String>,
    /// Report the k nearest neighbours of each queried node.
    #[arg(long)]
    knn: Option<usize>,
    /// Nodes to query for `--knn` (default: all).
    #[arg(long, value_delimiter = ',')]
    nodes: Option<Vec<String>>,
    /// Output CSV (default: stdout).
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn io_err(context: impl Into<String>) -> impl FnOnce(io::Error) -> Error {
    let context = context.into();
    move |source| Error::Io { context, source }
}

fn read_text(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(io_err(format!("reading {}", path.display())))
}

fn write_text(path: &Path, body: &str) -> Result<(), Error> {
    fs::write(path, body).map_err(io_err(format!("writing {}", path.display())))
}

fn comment_block(config: &[(String, String)]) -> String {
    config.iter().fold(String::new(), |mut s, (k, v)| {
        let _ = writeln!(s, "# {k}: {v}");
        s
    })
}

fn sha256_hex(bytes: &[u8]) -> String {
    gravelet::graph::sha256_hex(bytes)
}

fn cmd_embed(cmd: &EmbedCmd) -> Result<(), Error> {
    let text = read_text(&cmd.graph)?;
    let mut g = parse_edge_list(&text)?;
    if cmd.largest_component && !g.is_connected() {
        g = g.largest_component();
    }
    let cfg = cmd.params.config();
    let set = embed_all(&g, &cfg)?;

    let mut run = vec![
        ("command".to_string(), "embed".to_string()),
        ("input".to_string(), cmd.graph.display().to_string()),
        ("input_sha256".to_string(), sha256_hex(text.as_bytes())),
        ("output".to_string(), cmd.output.display().to_string()),
        ("largest_component".to_string(), cmd.largest_component.to_string()),
    ];
    cmd.params.echo(&mut run);

    let mut csv = comment_block(&run).into_bytes();
    set.write_csv(&mut csv).map_err(io_err("formatting embedding"))?;
    write_text(&cmd.output, std::str::from_utf8(&csv).expect("utf-8"))?;

    let mut meta = String::new();
    let extra = set.metadata_lines();
    let extra = extra.iter().filter(|(k, _)| !run.iter().any(|(r, _)| r == k));
    for (k, v) in run.iter().chain(extra) {
        let _ = writeln!(meta, "{k}: {v}");
    }
    write_text(&meta_path(&cmd.output), &meta)?;

    if cmd.dump_wavelets {
        let diffusion = gravelet::wavelet::HeatDiffusion::new(
            &g,
            cfg.mode,
            cfg.spectrum_mode,
            cfg.order,
            &cfg.spectral,
        )?;
        for (j, &s) in set.scales.iter().enumerate() {
            let wm = diffusion.matrix(s)?;
            let mut buf = comment_block(&[("scale".into(), s.to_string())]).into_bytes();
            wm.write_csv(&mut buf, Some(g.labels())).map_err(io_err("formatting wavelets"))?;
            let path = sibling(&cmd.output, &format!("wavelets.s{}.csv", j + 1));
            write_text(&path, std::str::from_utf8(&buf).expect("utf-8"))?;
        }
    }
    Ok(())
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".");
    name.push(suffix);
    path.with_file_name(name)
}

fn meta_path(output: &Path) -> PathBuf {
    sibling(output, "meta")
}

fn recipe_name(r: RecipeArg) -> &'static str {
    match r {
        RecipeArg::House => "house",
        RecipeArg::HousePerturbed => "house-perturbed",
        RecipeArg::Fan => "fan",
        RecipeArg::Star => "star",
        RecipeArg::Varied => "varied",
        RecipeArg::VariedPerturbed => "varied-perturbed",
        RecipeArg::Barbell => "barbell",
        RecipeArg::Karate => "karate",
        RecipeArg::Crossgraph => "crossgraph",
    }
}

fn cmd_generate(cmd: &GenerateCmd) -> Result<(), Error> {
    let name = recipe_name(cmd.recipe);
    let stem = cmd.stem.clone().unwrap_or_else(|| name.to_string());
    fs::create_dir_all(&cmd.out_dir).map_err(io_err(format!("creating {}", cmd.out_dir.display())))?;
    let write = |b: &RoleBenchmark, stem: &str| -> Result<(), Error> {
        let paths = b
            .write_files(&cmd.out_dir, stem)
            .map_err(io_err(format!("writing benchmark into {}", cmd.out_dir.display())))?;
        for p in paths {
            println!("{}", p.display());
        }
        Ok(())
    };
    match cmd.recipe {
        RecipeArg::Barbell => {
            let mut b = make_barbell(cmd.clique, cmd.chain)?;
            b.seed = cmd.seed;
            write(&b, &stem)
        }
        RecipeArg::Karate => write(&make_mirrored_karate(cmd.mirror_edges, cmd.seed)?, &stem),
        RecipeArg::Crossgraph => {
            let corpus = make_crossgraph_corpus(cmd.count, cmd.seed, &Default::default())?;
            let width = corpus.len().to_string().len();
            for (i, b) in corpus.iter().enumerate() {
                write(b, &format!("{stem}-{i:0width$}"))?;
            }
            Ok(())
        }
        _ => {
            let bench = NamedBenchmark::parse(name).expect("recipe names match benchmarks");
            write(&bench.generate(cmd.seed)?, &stem)
        }
    }
}

fn parse_mirror_range(s: &str) -> Result<std::ops::RangeInclusive<usize>, Error> {
    let bad = || Error::Invalid(format!("bad mirror edge range '{s}'; expected 'lo..hi' or a count"));
    let range = match s.split_once("..") {
        Some((lo, hi)) => {
            let hi = hi.trim_start_matches('=');
            lo.trim().parse().map_err(|_| bad())?..=hi.trim().parse().map_err(|_| bad())?
        }
        None => {
            let k = s.trim().parse().map_err(|_| bad())?;
            k..=k
        }
    };
    if range.is_empty() {
        return Err(bad());
    }
    Ok(range)
}

fn cmd_experiment(cmd: &ExperimentCmd) -> Result<(), Error> {
    let name = ExperimentName::parse(&cmd.name)?;
    let defaults = ExperimentConfig::default();
    let cfg = ExperimentConfig {
        embedding: cmd.params.config(),
        knn: KnnConfig {
            k: cmd.knn,
            folds: cmd.folds,
            seed: 0,
            average: match cmd.f1_average {
                AverageArg::Weighted => F1Average::Weighted,
                AverageArg::Macro => F1Average::Macro,
            },
        },
        trials: cmd.trials,
        seed: cmd.seed,
        corpus_size: cmd.corpus_size,
        mirror_edges: parse_mirror_range(&cmd.mirror_edges)?,
        scaling_sizes: cmd.sizes.clone(),
        scaling_repeats: cmd.repeats,
        noise_levels: cmd.noise_levels.clone().unwrap_or(defaults.noise_levels),
        sweep_clustering: match cmd.clustering {
            ClusteringArg::Agglomerative => SweepClustering::Agglomerative,
            ClusteringArg::AffinityPropagation => SweepClustering::AffinityPropagation,
        },
        ..defaults
    };

    let mut run = vec![
        ("command".to_string(), "experiment".to_string()),
        ("experiment".to_string(), name.as_str().to_string()),
        ("seed".to_string(), cmd.seed.to_string()),
        ("trials".to_string(), cmd.trials.to_string()),
        ("knn".to_string(), cmd.knn.to_string()),
        ("folds".to_string(), cmd.folds.to_string()),
        ("f1_average".to_string(), cfg.knn.average.as_str().to_string()),
    ];
    match name {
        ExperimentName::Karate => run.push(("mirror_edges".into(), cmd.mirror_edges.clone())),
        ExperimentName::Crossgraph => run.push(("corpus_size".into(), cmd.corpus_size.to_string())),
        ExperimentName::Scaling => {
            run.push((
                "sizes".into(),
                cmd.sizes.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
            ));
            run.push(("repeats".into(), cmd.repeats.to_string()));
        }
        ExperimentName::NoiseSweep => run.push((
            "noise_levels".into(),
            cfg.noise_levels.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
        )),
        _ => {}
    }
    cmd.params.echo(&mut run);

    let out = run_experiment(name, &cfg)?;
    fs::create_dir_all(&cmd.out_dir).map_err(io_err(format!("creating {}", cmd.out_dir.display())))?;
    let header = comment_block(&run);
    for (suffix, body) in &out.files {
        let path = cmd.out_dir.join(format!("{}.{suffix}", name.as_str()));
        write_text(&path, &format!("{header}{body}"))?;
    }
    print!("{}", out.summary);
    Ok(())
}

fn load_embedding(path: &Path) -> Result<EmbeddingSet, Error> {
    let f = fs::File::open(path).map_err(io_err(format!("reading {}", path.display())))?;
    Ok(EmbeddingSet::read_csv(BufReader::new(f))?)
}

fn cmd_distances(cmd: &DistancesCmd) -> Result<(), Error> {
    let set = load_embedding(&cmd.embedding)?;
    let other = cmd.against.as_deref().map(load_embedding).transpose()?;
    let target = other.as_ref().unwrap_or(&set);
    if target.dim() != set.dim() {
        return Err(gravelet::EmbeddingError::DimensionMismatch {
            left: set.dim(),
            right: target.dim(),
        }
        .into());
    }
    if cmd.pairs.is_empty() && cmd.knn.is_none() {
        return Err(Error::Invalid("give at least one --pair or --knn".into()));
    }

    let mut out = String::new();
    if !cmd.pairs.is_empty() {
        out.push_str("node_a,node_b,distance\n");
        for p in &cmd.pairs {
            let (a, b) = p
                .split_once(':')
                .ok_or_else(|| Error::Invalid(format!("pair '{p}' is not of the form a:b")))?;
            let d = gravelet::embedding::structural_distance(
                set.row(set.node_index(a)?),
                target.row(target.node_index(b)?),
            )?;
            let _ = writeln!(out, "{a},{b},{d}");
        }
    }
    if let Some(k) = cmd.knn {
        if other.is_some() {
            return Err(Error::Invalid("--knn works within a single embedding file".into()));
        }
        out.push_str("node,rank,neighbor,distance\n");
        let queries: Vec<usize> = match &cmd.nodes {
            Some(labels) => labels.iter().map(|l| set.node_index(l)).collect::<Result<_, _>>()?,
            None => (0..set.len()).collect(),
        };
        for a in queries {
            for (rank, (b, d)) in set.nearest_neighbors(a, k, &BTreeSet::new())?.into_iter().enumerate() {
                let _ = writeln!(out, "{},{},{},{d}", set.labels()[a], rank + 1, set.labels()[b]);
            }
        }
    }
    match &cmd.output {
        Some(p) => write_text(p, &out),
        None => io::stdout().write_all(out.as_bytes()).map_err(io_err("writing stdout")),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Invalid("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Embed(c) => cmd_embed(c),
        Command::Generate(c) => cmd_generate(c),
        Command::Experiment(c) => cmd_experiment(c),
        Command::Distances(c) => cmd_distances(c),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let class = e.class();
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {msg}", class.as_str());
            ExitCode::from(class.exit_code() as u8)
        }
    }
}
