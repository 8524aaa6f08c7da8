use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gsdma-sim"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn run_prints_summary_and_row() {
    let scn = data("small.scn");
    let o = run(&["run", scn.to_str().unwrap(), "--set", "protocol=csmaca", "--seed", "4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = String::from_utf8(o.stdout).unwrap();
    let csv: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(csv.len(), 2);
    assert!(csv[0].starts_with("scenario_id,protocol,num_pairs"));
    assert!(csv[1].starts_with("small,csmaca,2,hidden_node,30,0.2,4,20000,"));
    assert!(out.contains("efficiency"));
}

#[test]
fn run_writes_csv_to_out() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("row.csv");
    let o = run(&["run", data("small.scn").to_str().unwrap(), "--out", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let rows = gsdma_cli::results::read_results(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].protocol, "gsdma");
}

#[test]
fn missing_file_is_io_error() {
    let o = run(&["run", "/nonexistent/x.scn"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("x.scn"));
    assert_eq!(code(&run(&["sweep", "/nonexistent/x.swp"])), 3);
    assert_eq!(code(&run(&["plot", "/nonexistent/r.csv", "--spec", "eff-vs-pairs"])), 3);
}

#[test]
fn invalid_values_are_config_errors() {
    let scn = data("small.scn");
    let scn = scn.to_str().unwrap();
    assert_eq!(code(&run(&["run", scn, "--set", "num_pairs=0"])), 2);
    assert_eq!(code(&run(&["run", scn, "--set", "no_such_key=1"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
}

#[test]
fn empty_sweep_axes_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let swp = dir.path().join("empty.swp");
    std::fs::write(&swp, "[general]\nnum_pairs = 2\n[sweep]\n").unwrap();
    let o = run(&["sweep", swp.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(!dir.path().join("results.csv").exists());
}

#[test]
fn sweep_output_matches_golden_file() {
    let golden = std::fs::read(data("small_results.golden.csv")).unwrap();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let o = run(&[
            "sweep",
            data("small.swp").to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let got = std::fs::read(dir.path().join("results.csv")).unwrap();
        assert!(got == golden, "results.csv differs from the golden file");
        let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert_eq!(summary.lines().count(), 1 + 8);
    }
}

#[test]
fn compare_on_hidden_topology_reports_inflation() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "compare",
        data("small.scn").to_str().unwrap(),
        "--seeds",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table =
        gsdma_cli::results::read_table(std::fs::File::open(dir.path().join("comparison.csv")).unwrap()).unwrap();
    assert_eq!(table.rows.len(), 2);
    let topo = table.column("topology").unwrap();
    let infl = table.column("csmaca_delay_inflation").unwrap();
    let ratio = table.column("ratio_efficiency").unwrap();
    assert_eq!(table.rows[0][topo], "hidden_node");
    assert!(table.rows[0][infl].parse::<f64>().is_ok());
    assert_eq!(table.rows[1][infl], "");
    assert!(table.rows[1][ratio].parse::<f64>().unwrap() > 1.0);
    let results = gsdma_cli::results::read_results(std::fs::File::open(dir.path().join("results.csv")).unwrap()).unwrap();
    assert_eq!(results.len(), 4 * 3);
}

#[test]
fn plot_writes_valid_svg_and_rejects_empty_csv() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("p.svg");
    let golden = data("small_results.golden.csv");
    let o = run(&[
        "plot",
        golden.to_str().unwrap(),
        "--spec",
        "compare-eff",
        "--out",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&svg).unwrap();
    let doc = roxmltree::Document::parse(&text).expect("well-formed XML");
    assert_eq!(doc.root_element().tag_name().name(), "svg");
    let lines = doc.descendants().filter(|n| n.has_tag_name("polyline")).count();
    // protocol x lambda series.
    assert_eq!(lines, 4);
    assert!(!text.contains("href"));

    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    assert_eq!(code(&run(&["plot", empty.to_str().unwrap(), "--spec", "eff-vs-pairs"])), 2);
    let cmp = dir.path().join("cmp.csv");
    std::fs::write(&cmp, "topology,ratio_delay\nhidden_node,0.5\n").unwrap();
    assert_eq!(code(&run(&["plot", cmp.to_str().unwrap(), "--spec", "delay-vs-snr"])), 2);
}

#[test]
fn analyze_from_given_parameters() {
    let o = run(&["analyze", "--p-s", "1", "--p-c", "0", "--p-p", "0", "--t-s-us", "40", "--cdf", "2"]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8(o.stdout).unwrap();
    assert_eq!(out.lines().nth(1).unwrap(), ",1,0,0,40,1,0,,1,1");
    assert_eq!(code(&run(&["analyze", "--p-s", "2", "--p-c", "0", "--p-p", "0", "--t-s-us", "1"])), 2);
}

#[test]
fn analyze_from_scenario_estimates_each_pair() {
    let dir = tempfile::tempdir().unwrap();
    let scn = dir.path().join("a.scn");
    std::fs::write(&scn, "num_pairs = 3\nsim_slots = 200000\n").unwrap();
    let o = run(&["analyze", scn.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let t = gsdma_cli::results::read_table(&o.stdout[..]).unwrap();
    assert_eq!(t.rows.len(), 3);
    let (m, s) = (t.column("model_delay_us").unwrap(), t.column("simulated_delay_us").unwrap());
    for r in &t.rows {
        let (model, sim): (f64, f64) = (r[m].parse().unwrap(), r[s].parse().unwrap());
        assert!((model - sim).abs() <= 0.15 * sim + 1.0, "{model} vs {sim}");
    }
    let csma = run(&["analyze", scn.to_str().unwrap(), "--set", "protocol=csmaca"]);
    assert_eq!(code(&csma), 2);
}
