use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn annealfem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_annealfem"))
        .args(args)
        .env_remove("ANNEALFEM_SEED")
        .output()
        .unwrap()
}

fn write_problem(dir: &Path, body: &str) -> String {
    let path = dir.join("problem.json");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn solve_laplace_recovers_midpoint() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture("laplace2.json");
    let out = annealfem(&["solve", input.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let solution = std::fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    let mut lines = solution.lines();
    assert_eq!(lines.next(), Some("node,x,box,oracle,difference,bound"));
    let middle: Vec<f64> = lines.nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(middle[0], 1.0);
    assert!((middle[2] - 0.5).abs() <= 2e-3, "box value {}", middle[2]);
    assert_eq!(middle[3], 0.5);

    for row in solution.lines().skip(1) {
        let cols: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
        assert!(cols[4].abs() <= cols[5], "{row}");
    }

    let history = std::fs::read_to_string(dir.path().join("history.csv")).unwrap();
    let energies: Vec<f64> = history
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    assert!(energies.windows(2).all(|w| w[1] <= w[0]), "{energies:?}");
    assert!(history.starts_with("iter,move,r,energy,feasible_fraction,u_0,u_1,u_2\n0,init,"));
    assert!(dir.path().join("summary.txt").exists());
}

#[test]
fn reversed_interval_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_problem(
        dir.path(),
        r#"{
  "problem": { "kind": "general", "x_l": 1.0, "x_r": 0.0, "p": 1.0 },
  "mesh": { "elements": 2 },
  "boundary": { "u_l": 0.0, "u_r": 1.0 }
}"#,
    );
    let out = annealfem(&["solve", &input]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("x_l"), "{err}");
    assert!(err.contains("line"), "{err}");
}

#[test]
fn malformed_json_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_problem(dir.path(), "{ \"problem\": ");
    let out = annealfem(&["oracle", &input]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn export_graph_matches_in_process_assembly() {
    let input = fixture("laplace2.json");
    let out = annealfem(&[
        "export-graph",
        input.to_str().unwrap(),
        "--center",
        "0,0.5,1",
        "--slack",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let exported = annealfem::IsingGraph::from_edge_list(&stdout(&out)).unwrap();

    let text = std::fs::read_to_string(&input).unwrap();
    let problem = annealfem::input::ProblemFile::from_json(&text)
        .unwrap()
        .build(None)
        .unwrap();
    let state = annealfem::BoxState::new(annealfem::NodalState(vec![0.0, 0.5, 1.0]), 0.5).unwrap();
    let graph = annealfem::box_solver::box_graph(&state, &problem.elements, &problem.config).unwrap();
    assert_eq!(exported.n_qubits(), 9);
    assert_eq!(exported.fields(), graph.fields());
    assert_eq!(exported.couplings(), graph.couplings());
}

#[test]
fn export_graph_sizes_and_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let one = write_problem(
        dir.path(),
        r#"{
  "problem": { "kind": "truss", "ea": 1.0 },
  "mesh": { "elements": 1 },
  "boundary": { "u_l": 0.0, "u_r": 1.0 }
}"#,
    );
    let out = annealfem(&["export-graph", &one]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let graph = annealfem::IsingGraph::from_edge_list(&stdout(&out)).unwrap();
    assert_eq!(graph.n_qubits(), 6);
    // 3 + 3 nodal pairs and a full 3x3 element block
    assert_eq!(graph.couplings().len(), 15);

    let ten = write_problem(
        dir.path(),
        r#"{
  "problem": { "kind": "truss", "ea": 2.0, "f": 1.0 },
  "mesh": { "elements": 10 },
  "boundary": { "u_l": 0.0, "u_r": 0.0 }
}"#,
    );
    let out_dir = dir.path().join("graph");
    let out = annealfem(&["export-graph", &ten, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(out_dir.join("graph.txt")).unwrap();
    let graph = annealfem::IsingGraph::from_edge_list(&text).unwrap();
    assert_eq!(graph.n_qubits(), 33);
}

#[test]
fn exact_sampler_capacity_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_problem(
        dir.path(),
        r#"{
  "problem": { "kind": "truss", "ea": 1.0 },
  "mesh": { "elements": 10 },
  "boundary": { "u_l": 0.0, "u_r": 1.0 },
  "solver": { "sampler": "exact" }
}"#,
    );
    let out = annealfem(&["solve", &input]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn iteration_cap_reports_not_converged() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_problem(
        dir.path(),
        r#"{
  "problem": { "kind": "truss", "ea": 1.0 },
  "mesh": { "elements": 3 },
  "boundary": { "u_l": 0.0, "u_r": 1.0 },
  "solver": { "max_iterations": 2, "r_min": 1e-6 }
}"#,
    );
    let out = annealfem(&["solve", &input, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn oracle_prints_nodal_values() {
    let out = annealfem(&["oracle", fixture("truss_a.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let values: Vec<f64> = text
        .lines()
        .skip(1)
        .take(5)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    let want = [0.0, 1.0 / 6.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
    for (v, w) in values.iter().zip(want) {
        assert!((v - w).abs() < 1e-12, "{values:?}");
    }
    assert!(text.contains("Pi_N = "));
}

#[test]
fn seed_override_changes_annealed_run_only_through_seed() {
    let input = fixture("truss_b.json");
    let input = input.to_str().unwrap();
    let run = |seed: &str| {
        let dir = tempfile::tempdir().unwrap();
        let out = annealfem(&[
            "solve",
            input,
            "--sampler",
            "sa",
            "--seed",
            seed,
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        std::fs::read_to_string(dir.path().join("history.csv")).unwrap()
    };
    assert_eq!(run("11"), run("11"));
}

#[test]
fn oracle_laplace_functional() {
    let out = annealfem(&["oracle", fixture("laplace2.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let pi: f64 = text
        .lines()
        .last()
        .unwrap()
        .strip_prefix("Pi_N = ")
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(pi, 0.5);
}

#[test]
fn problem_files_round_trip() {
    use annealfem::input::ProblemFile;
    for name in ["laplace2.json", "truss_a.json", "truss_b.json"] {
        let text = std::fs::read_to_string(fixture(name)).unwrap();
        let parsed = ProblemFile::from_json(&text).unwrap();
        let again = ProblemFile::from_json(&parsed.to_json()).unwrap();
        assert_eq!(parsed, again, "{name}");
    }
}
