use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_irg-gkss")).args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn csv_field(table: &str, row: usize, column: &str) -> String {
    let mut lines = table.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == column).unwrap();
    lines.nth(row).unwrap().split(',').nth(idx).unwrap().to_string()
}

#[test]
fn missing_graph_file_exits_with_2() {
    let o = run(&["test", "--graph", "/definitely/not/here.edges", "--model", "er:0.1"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn karate_rejects_er() {
    let o = run(&["test", "--dataset", "karate", "--model", "er:0.139", "--M", "200", "--seed", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("schema_version,graph,n,edges,method"));
    let p: f64 = csv_field(&out, 0, "p_value").parse().unwrap();
    assert!(p <= 0.05, "p-value {p}");
    assert_eq!(csv_field(&out, 0, "reject"), "1");
}

#[test]
fn same_seed_gives_identical_csv_for_any_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = ["a.csv", "b.csv", "c.csv"].iter().map(|f| dir.path().join(f)).collect();
    for (path, workers) in paths.iter().zip(["1", "3", "1"]) {
        let o = run(&[
            "--workers", workers, "test", "--dataset", "florentine", "--model", "er-mle", "--kernel", "graphlet3",
            "--M", "40", "--B", "30", "--seed", "11", "--out", path.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let a = fs::read(&paths[0]).unwrap();
    assert_eq!(a, fs::read(&paths[1]).unwrap());
    assert_eq!(a, fs::read(&paths[2]).unwrap());
}

#[test]
fn karate_fit_matches_published_blocks_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("karate.toml");
    let o = run(&["fit", "--dataset", "karate", "--model", "ermm", "--out", params.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&params).unwrap();
    let value: toml::Value = toml::from_str(&text).unwrap();
    let q: Vec<Vec<f64>> = value["q"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r.as_array().unwrap().iter().map(|x| x.as_float().unwrap()).collect())
        .collect();
    let expect = [[0.2750, 0.0347], [0.0347, 0.2288]];
    for i in 0..2 {
        for j in 0..2 {
            assert!((q[i][j] - expect[i][j]).abs() <= 5e-5, "{q:?}");
        }
    }

    let model = format!("params:{}", params.display());
    let o = run(&["test", "--dataset", "karate", "--model", &model, "--M", "20", "--seed", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(csv_field(&stdout(&o), 0, "model"), model);

    let er = dir.path().join("er.toml");
    let o = run(&["fit", "--dataset", "karate", "--model", "er", "--out", er.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let model = format!("params:{}", er.display());
    let o = run(&["test", "--dataset", "karate", "--model", &model, "--M", "20", "--seed", "1", "--glr"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("glr (df 2)"), "{}", stderr(&o));
    assert_eq!(csv_field(&stdout(&o), 1, "method"), "glr");
}

#[test]
fn fit_with_wrong_label_count_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("g.edges");
    let labels = dir.path().join("g.labels");
    fs::write(&edges, "1 2\n2 3\n").unwrap();
    fs::write(&labels, "1\n2\n").unwrap();
    let o = run(&[
        "fit", "--graph", edges.to_str().unwrap(), "--labels", labels.to_str().unwrap(), "--n", "3", "--model", "ermm",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn empty_graph_fit_warns_and_gives_zero_blocks() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("empty.edges");
    fs::write(&edges, "# no edges\n").unwrap();
    let o = run(&["fit", "--graph", edges.to_str().unwrap(), "--n", "5", "--model", "ermm"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("warning"));
    assert!(stdout(&o).contains("q = [[0.0]]"), "{}", stdout(&o));
}

#[test]
fn power_with_zero_repetitions_writes_only_the_header() {
    let o = run(&["power", "--preset", "calibration-er30", "--repetitions", "0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("warning"));
    assert_eq!(stdout(&o).lines().count(), 1);
}

#[test]
fn power_config_errors_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "schema_version = 1\nnull_size = 5\n[scenario]\nkind = \"er\"\nn = 30\np = 0.06\n[[alternatives]]\nkind = \"null\"\n")
        .unwrap();
    let o = run(&["power", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("null_size"), "{}", stderr(&o));

    fs::write(&path, "schema_version = 1\n[scenario]\nkind = \"er\"\nn = 30\n[[alternatives]]\nkind = \"null\"\n").unwrap();
    let o = run(&["power", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("scenario"), "{}", stderr(&o));
}

#[test]
fn small_power_run_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("small.toml");
    fs::write(
        &path,
        "schema_version = 1\nname = \"small\"\nnull_size = 20\nrepetitions = 4\nseed = 5\nglr = true\n\
         [scenario]\nkind = \"ermm\"\nsizes = [5, 5]\nq = [[0.5, 0.1], [0.1, 0.5]]\n\
         [[alternatives]]\nkind = \"planted-hubs\"\nrounds = 1\nscale = 2.0\n\
         [[methods]]\nkernel = { kind = \"graphlet3\" }\n",
    )
    .unwrap();
    let a = run(&["--workers", "1", "power", path.to_str().unwrap()]);
    let b = run(&["--workers", "2", "power", path.to_str().unwrap()]);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let out = stdout(&a);
    assert_eq!(out.lines().count(), 3);
    assert_eq!(csv_field(&out, 0, "method"), "graphlet3");
    assert_eq!(csv_field(&out, 1, "method"), "glr");
    assert_eq!(csv_field(&out, 0, "runs"), "4");
}

#[test]
fn diagnostics_mean_identity_holds() {
    let o = run(&["diagnostics", "--model", "er:0.5", "--n", "4", "--kernel", "veh1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let gap: f64 = stdout(&o)
        .lines()
        .find_map(|l| l.strip_prefix("1,mean_gap,"))
        .unwrap()
        .parse()
        .unwrap();
    assert!(gap < 1e-10);

    let o = run(&["diagnostics", "--model", "er:0.3", "--n", "4", "--kernel", "wl2"]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("not a product kernel"));
}

#[test]
fn diagnostics_discrepancy_bound_is_the_scaled_absolute_difference() {
    let o = run(&["diagnostics", "--model", "er:0.2", "--n", "6", "--compare", "er:0.5", "--delta", "0.1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let bound: f64 = out.lines().find_map(|l| l.strip_prefix("1,discrepancy_bound,")).unwrap().parse().unwrap();
    assert!((bound - 0.1 * 15.0 * 0.3).abs() < 1e-12);
}

#[test]
fn simulate_then_plant_preserves_edge_count() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("g.edges");
    let planted = dir.path().join("h.edges");
    let o = run(&["simulate", "--model", "er:0.2", "--n", "30", "--seed", "4", "--out", edges.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run(&[
        "plant", "--graph", edges.to_str().unwrap(), "--n", "30", "--kind", "clique", "--size", "5", "--seed", "2",
        "--out", planted.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let count = |p: &Path| fs::read_to_string(p).unwrap().lines().count();
    assert_eq!(count(&edges), count(&planted));
    assert_ne!(fs::read(&edges).unwrap(), fs::read(&planted).unwrap());
}

#[test]
fn unknown_preset_is_an_input_error() {
    let o = run(&["power", "--preset", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["power", "--list-presets"]);
    assert!(stdout(&o).contains("planted-clique-er30"));
}
