use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use eifem::analysis::fit_orders;
use eifem::linalg::{read_matrix_market, read_vector};

fn eifem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eifem")).args(args).output().expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// CSV text with the trailing wall-time column removed.
fn without_wall_time(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn config_file_and_flags_produce_identical_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# small study\nbeta_minus = 10\nbeta_plus = 1\nmesh = 8, 16\nformats = csv\n").unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let out = eifem(&["convergence", "--config", cfg.to_str().unwrap(), "--out", a.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let out = eifem(&[
        "convergence",
        "--beta-minus",
        "10",
        "--beta-plus",
        "1",
        "--mesh",
        "8,16",
        "--formats",
        "csv",
        "--out",
        b.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(without_wall_time(&a.join("convergence.csv")), without_wall_time(&b.join("convergence.csv")));
    assert_eq!(fs::read_to_string(a.join("residuals_n16.csv")).unwrap(), fs::read_to_string(b.join("residuals_n16.csv")).unwrap());
}

#[test]
fn emitted_orders_match_emitted_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = eifem(&["convergence", "--mesh", "8,16,32", "--formats", "csv", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    let rows: Vec<Vec<String>> = text.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect();
    let ns: Vec<usize> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    for col in [2, 4, 6, 8] {
        let errors: Vec<f64> = rows.iter().map(|r| r[col].parse().unwrap()).collect();
        let orders = fit_orders(&ns, &errors).unwrap();
        for (row, order) in rows.iter().zip(orders) {
            match order {
                None => assert!(row[col + 1].is_empty()),
                Some(o) => assert!((row[col + 1].parse::<f64>().unwrap() - o).abs() < 5e-4),
            }
        }
    }
}

#[test]
fn vtk_output_has_solution_and_flux_per_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let out = eifem(&["solve", "--mesh", "8,16", "--formats", "vtk", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    for n in [8, 16] {
        for stem in ["solution", "flux"] {
            let text = fs::read_to_string(dir.path().join(format!("{stem}_n{n}.vtk"))).unwrap();
            assert!(text.starts_with("# vtk DataFile Version"));
        }
    }
    assert!(!dir.path().join("solve.csv").exists());
}

#[test]
fn non_halving_mesh_list_warns_and_omits_orders() {
    let dir = tempfile::tempdir().unwrap();
    let out = eifem(&["convergence", "--mesh", "16,48", "--formats", "csv", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stderr(&out).contains("orders omitted"));
    let text = fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert!(f[3].is_empty() && f[5].is_empty() && f[7].is_empty() && f[9].is_empty());
    }
}

#[test]
fn iteration_cap_reports_not_converged_with_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = eifem(&[
        "precond-bench",
        "--beta-minus",
        "1",
        "--beta-plus",
        "1000",
        "--mesh",
        "16",
        "--maxit",
        "5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("not converged after 5 iterations"));
    let csv = fs::read_to_string(dir.path().join("precond_bench.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().contains(",false,"));
}

#[test]
fn bench_runs_each_case_on_each_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let out = eifem(&["precond-bench", "--cases", "1:1,1:10", "--mesh", "8,16", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("precond_bench.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(dir.path().join("precond_bench.md").exists());
}

#[test]
fn dump_system_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = eifem(&["solve", "--mesh", "8", "--formats", "csv", "--dump-system", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let a = read_matrix_market(fs::File::open(dir.path().join("matrix_n8.mtx")).unwrap()).unwrap();
    let b = read_vector(fs::File::open(dir.path().join("rhs_n8.mtx")).unwrap()).unwrap();
    let x = read_vector(fs::File::open(dir.path().join("solution_n8.mtx")).unwrap()).unwrap();
    let r = a.residual(&x, &b).unwrap();
    let rel = r.iter().map(|v| v * v).sum::<f64>().sqrt() / b.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(rel < 1e-10, "relative residual {rel}");
}

#[test]
fn invalid_configuration_exits_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "mesh = 8\ncolour = blue\n").unwrap();
    let out = eifem(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown key 'colour'"));

    let out = eifem(&["solve", "--theta", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = eifem(&["solve", "--mesh", "2"]);
    assert_eq!(out.status.code(), Some(2));
}
