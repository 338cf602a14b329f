use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gravelet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gravelet"))
        .args(args)
        .env_remove("GRAVELET_SEED")
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Data rows of an embedding CSV: `(label, values)`.
fn rows(csv: &str) -> Vec<(String, Vec<f64>)> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| {
            let mut it = l.split(',');
            let label = it.next().unwrap().to_string();
            (label, it.map(|x| x.parse().unwrap()).collect())
        })
        .collect()
}

fn generate_house(dir: &Path, seed: &str) {
    let out = gravelet(&["generate", "house", "--seed", seed, "--out-dir", path(dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn embed_writes_two_hundred_columns_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    generate_house(dir.path(), "1");
    let csv = dir.path().join("e.csv");
    let out = gravelet(&["embed", path(&dir.path().join("house.edges")), "-o", path(&csv)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let text = fs::read_to_string(&csv).unwrap();
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header.split(',').count(), 201);
    assert!(header.starts_with("node,s1_t1_re,s1_t1_im"));
    assert!(header.ends_with("s2_t50_re,s2_t50_im"));
    let r = rows(&text);
    assert_eq!(r.len(), 80);
    assert!(r.iter().all(|(_, v)| v.len() == 200));
    assert!(text.contains("# input_sha256: "));

    let meta = fs::read_to_string(dir.path().join("e.csv.meta")).unwrap();
    for key in ["input_sha256:", "scales:", "lambda2:", "lambda_n:", "graph_hash:", "order: 30", "d: 50"] {
        assert!(meta.contains(key), "meta lacks {key}");
    }
}

#[test]
fn disconnected_input_reports_class_and_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.edges");
    fs::write(&g, "a b\nb c\nx y\n").unwrap();
    let out = gravelet(&["embed", path(&g), "-o", path(&dir.path().join("o.csv"))]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error[disconnected]:"), "{err}");
    assert!(err.contains("[3, 2]"), "{err}");

    let out = gravelet(&["embed", path(&g), "-o", path(&dir.path().join("o.csv")), "--largest-component"]);
    assert!(out.status.success());
    assert_eq!(rows(&fs::read_to_string(dir.path().join("o.csv")).unwrap()).len(), 3);
}

#[test]
fn malformed_input_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.edges");
    fs::write(&g, "a b\nb c nope\n").unwrap();
    let out = gravelet(&["embed", path(&g), "-o", path(&dir.path().join("o.csv"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[parse-error]:"));
}

#[test]
fn dense_and_chebyshev_embeddings_agree() {
    let dir = tempfile::tempdir().unwrap();
    generate_house(dir.path(), "2");
    let g = dir.path().join("house.edges");
    let mut outs = Vec::new();
    for mode in ["dense", "chebyshev"] {
        let csv = dir.path().join(format!("{mode}.csv"));
        let out = gravelet(&["embed", path(&g), "-o", path(&csv), "--mode", mode]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        outs.push(rows(&fs::read_to_string(&csv).unwrap()));
    }
    for ((la, a), (lb, b)) in outs[0].iter().zip(&outs[1]) {
        assert_eq!(la, lb);
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= 1e-4, "node {la}: {x} vs {y}");
        }
    }
}

#[test]
fn embedding_output_is_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    generate_house(dir.path(), "4");
    let g = dir.path().join("house.edges");
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(gravelet(&["--threads", "1", "embed", path(&g), "-o", path(&a)]).status.success());
    assert!(gravelet(&["--threads", "3", "embed", path(&g), "-o", path(&b)]).status.success());
    let strip = |p: &Path| {
        fs::read_to_string(p)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with("# output:"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn generate_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    generate_house(a.path(), "9");
    generate_house(b.path(), "9");
    for f in ["house.edges", "house.roles.csv", "house.recipe"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f} differs"
        );
    }
    let roles = fs::read_to_string(a.path().join("house.roles.csv")).unwrap();
    let distinct: std::collections::BTreeSet<&str> =
        roles.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(distinct.len(), 5);
    assert!(fs::read_to_string(a.path().join("house.recipe")).unwrap().starts_with("seed: 9\n"));
}

#[test]
fn perturbed_recipe_records_fraction() {
    let dir = tempfile::tempdir().unwrap();
    let out = gravelet(&["generate", "house-perturbed", "--out-dir", path(dir.path())]);
    assert!(out.status.success());
    let recipe = fs::read_to_string(dir.path().join("house-perturbed.recipe")).unwrap();
    assert!(recipe.contains("0.1"), "{recipe}");
    let edges = fs::read_to_string(dir.path().join("house-perturbed.edges")).unwrap();
    assert_eq!(edges.lines().count(), 110);
}

#[test]
fn distances_pairs_and_neighbors() {
    let dir = tempfile::tempdir().unwrap();
    generate_house(dir.path(), "5");
    let csv = dir.path().join("e.csv");
    assert!(gravelet(&["embed", path(&dir.path().join("house.edges")), "-o", path(&csv)]).status.success());

    let out = gravelet(&["distances", path(&csv), "--pair", "0:0", "--pair", "0:40"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "node_a,node_b,distance");
    assert_eq!(lines[1], "0,0,0");
    assert!(lines[2].split(',').nth(2).unwrap().parse::<f64>().unwrap() >= 0.0);

    let out = gravelet(&["distances", path(&csv), "--knn", "4", "--nodes", "0,7"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 8);
    for l in text.lines().skip(1) {
        let f: Vec<&str> = l.split(',').collect();
        assert_ne!(f[0], f[2], "self listed as neighbour");
    }
}

#[test]
fn distances_reject_dimension_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    generate_house(dir.path(), "6");
    let g = dir.path().join("house.edges");
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(gravelet(&["embed", path(&g), "-o", path(&a)]).status.success());
    assert!(gravelet(&["embed", path(&g), "-o", path(&b), "--d", "10"]).status.success());
    let out = gravelet(&["distances", path(&a), "--against", path(&b), "--pair", "0:0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[invalid-input]:"));
}

#[test]
fn experiment_writes_files_with_config_header() {
    let dir = tempfile::tempdir().unwrap();
    let out = gravelet(&["experiment", "house", "--trials", "2", "--seed", "1", "--out-dir", path(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("house.report.csv")).unwrap();
    assert!(csv.starts_with("# command: experiment\n"));
    assert!(csv.contains("# seed: 1\n"));
    assert!(csv.contains("# trials: 2\n"));
    assert!(csv.contains("\nmean,"));
    assert!(dir.path().join("house.report.txt").exists());
}

#[test]
fn refused_deviation_and_unknown_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let out = gravelet(&[
        "experiment",
        "noise-sweep",
        "--clustering",
        "affinity-propagation",
        "--out-dir",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[refused-deviation]:"));

    let out = gravelet(&["experiment", "nonesuch"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn env_overrides_embedding_parameters() {
    let dir = tempfile::tempdir().unwrap();
    generate_house(dir.path(), "7");
    let csv = dir.path().join("e.csv");
    let out = Command::new(env!("CARGO_BIN_EXE_gravelet"))
        .args(["embed", path(&dir.path().join("house.edges")), "-o", path(&csv)])
        .env("GRAVELET_D", "7")
        .output()
        .unwrap();
    assert!(out.status.success());
    let r = rows(&fs::read_to_string(&csv).unwrap());
    assert_eq!(r[0].1.len(), 2 * 2 * 7);
}
