use std::fs;
use std::path::Path;
use std::process::Command;

use tsp_edo::experiment::{emit_edge_frequencies, run_experiment, ExperimentSpec, InstanceSource};
use tsp_edo::instance::{parse_opt_tour, parse_tsplib};
use tsp_edo::mip::{build_mip, solution_for};
use tsp_edo::{unit_graph, EaConfig, Tour};

const BIN: &str = env!("CARGO_BIN_EXE_tsp-edo");

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

/// Data rows of a versioned CSV (header comment and column line dropped).
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn spec_file_sweep_is_reproducible_and_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("grid.spec");
    fs::write(
        &spec_path,
        "# small grid\ninstance = unit:12\nmu = 4, 8\nk = 2, 3\nseeds = 0..4\nmutation = dual\njobs = 3\ntrace_every = 5\nout_dir = first\n",
    )
    .unwrap();
    let spec = ExperimentSpec::from_file(&spec_path).unwrap();
    assert_eq!(spec.out_dir, dir.path().join("first"));
    let rep = run_experiment(&spec).unwrap();
    assert_eq!(rep.rows.len(), 4);
    assert_eq!(rep.runs.len(), 16);

    let mut again = spec.clone();
    again.out_dir = dir.path().join("second");
    again.jobs = 1;
    run_experiment(&again).unwrap();
    for f in ["summary.csv", "finals.csv"] {
        assert_eq!(
            fs::read(spec.out_dir.join(f)).unwrap(),
            fs::read(again.out_dir.join(f)).unwrap(),
            "{f}"
        );
    }
    for r in &rep.runs {
        let name = format!("traces/{}_s{}.csv", r.config_id, r.seed);
        assert_eq!(fs::read(spec.out_dir.join(&name)).unwrap(), fs::read(again.out_dir.join(&name)).unwrap());
    }

    // summary rows recomputed from the final line of each trace
    let summary = fs::read_to_string(spec.out_dir.join("summary.csv")).unwrap();
    assert!(summary.starts_with("# tsp-edo csv v1\n"));
    for row in rows(&summary) {
        let id = &row[0];
        let finals: Vec<f64> = (0..4)
            .map(|s| {
                let t = fs::read_to_string(spec.out_dir.join(format!("traces/{id}_s{s}.csv"))).unwrap();
                t.lines().last().unwrap().split(',').nth(1).unwrap().parse().unwrap()
            })
            .collect();
        let mean = finals.iter().sum::<f64>() / 4.0;
        let min = finals.iter().copied().fold(f64::INFINITY, f64::min);
        let max = finals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let col = |i: usize| row[i].parse::<f64>().unwrap();
        assert!((col(9) - mean).abs() < 2e-6, "{id}");
        assert!((col(10) - min).abs() < 2e-6);
        assert!((col(11) - max).abs() < 2e-6);
        let (h_min, h_max) = (col(14), col(15));
        assert!(h_min <= min && min <= mean && mean <= max && max <= h_max + 1e-6);
    }
    assert!(fs::read_to_string(spec.out_dir.join("timing.csv")).unwrap().lines().count() > 16);
}

#[test]
fn population_dump_and_edge_frequencies() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = ExperimentSpec::new(InstanceSource::Unit(10), dir.path());
    spec.mus = vec![5];
    spec.dump_population = true;
    let rep = run_experiment(&spec).unwrap();
    let stem = format!("{}_s0", rep.runs[0].config_id);
    let edges = fs::read_to_string(dir.path().join(format!("populations/{stem}_edges.csv"))).unwrap();
    let total: u64 = rows(&edges).iter().map(|r| r[2].parse::<u64>().unwrap()).sum();
    assert_eq!(total, 10 * 5);
    let pop = fs::read_to_string(dir.path().join(format!("populations/{stem}.csv"))).unwrap();
    assert_eq!(pop.lines().filter(|l| !l.starts_with('#')).count(), 5);
}

#[test]
fn optimal_population_overlay_has_n_edges() {
    let g = parse_tsplib(&fs::read_to_string(data("eil51.tsp")).unwrap()).unwrap();
    let opt = parse_opt_tour(&fs::read_to_string(data("eil51.opt.tour")).unwrap(), &g).unwrap();
    let pop = vec![opt.opt_tour().unwrap().clone(); 20];
    let csv = emit_edge_frequencies(&pop, &g);
    let r = rows(&csv);
    assert_eq!(r.len(), 51);
    assert!(r.iter().all(|row| row[2] == "20" && row.len() == 7));
}

#[test]
fn cli_run_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(BIN)
        .args(["run", "--unit-graph", "10", "--mu", "6", "--k", "2", "--seeds", "0..2", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("reached 2/2"));
    assert!(dir.path().join("summary.csv").exists());

    let bad = Command::new(BIN)
        .args(["run", "--unit-graph", "10", "--seeds", ""])
        .arg("--out-dir")
        .arg(dir.path().join("never"))
        .output()
        .unwrap();
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("seed list is empty"));
    assert!(!dir.path().join("never").exists());

    let constrained = Command::new(BIN)
        .args(["run", "--instance", &data("eil51.tsp"), "--alpha", "0.05", "--mu", "4", "--k", "2"])
        .output()
        .unwrap();
    assert!(!constrained.status.success());
    assert!(String::from_utf8_lossy(&constrained.stderr).contains("configuration error"));
}

#[test]
fn cli_mip_round_trip_and_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let lp = dir.path().join("m.lp");
    let out = Command::new(BIN)
        .args(["run", "--unit-graph", "5", "--mu", "2", "--k", "2", "--emit-mip"])
        .arg(&lp)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("92 variables, 173 constraints"));

    let g = unit_graph(5).unwrap();
    let model = build_mip(&g, &EaConfig::new(2, 2), None).unwrap();
    let pop = vec![Tour::identity(&g), Tour::new(vec![0, 2, 4, 1, 3], &g).unwrap()];
    let sol = dir.path().join("sol.txt");
    fs::write(&sol, solution_for(&model, &pop).unwrap()).unwrap();
    let out = Command::new(BIN)
        .args(["run", "--unit-graph", "5", "--mu", "2", "--k", "2", "--ingest-solution"])
        .arg(&sol)
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success());
    assert!(text.contains("C = 0") && text.contains("H = 2.995732"), "{text}");

    let out = Command::new(BIN)
        .args(["run", "--unit-graph", "5", "--mu", "2", "--k", "2", "--oracle"])
        .output()
        .unwrap();
    assert!(String::from_utf8_lossy(&out.stdout).contains("best H = 2.995732274"));
}

#[test]
fn cli_verify_and_bounds() {
    let out = Command::new(BIN).args(["verify", "--trials", "200"]).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}");
    assert!(text.contains("0 failed"));

    let out = Command::new(BIN).args(["bounds", "--n", "20", "--mu", "24", "--k", "3"]).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    let h: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("H_max = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((h - 6.87).abs() < 0.005);
}
