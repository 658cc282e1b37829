use std::path::Path;
use std::process::{Command, Output};

use qdrift_core::qdrift;

fn qdrift_cmd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdrift"))
        .args(args)
        .env_remove("QDRIFT_OUT_DIR")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn compile_writes_exact_gate_count() {
    let dir = tempfile::tempdir().unwrap();
    let ham = write(dir.path(), "h.txt", "0.5 Z\n0.5 X\n");
    let out = dir.path().join("c.circ");
    let o = qdrift_cmd(&["compile", "--ham", &ham, "--t", "1", "--eps", "1e-3", "--seed", "7", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let summary: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(summary["N"], 2002);
    assert_eq!(summary["lambda"], 1.0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("ROT ")).count(), 2002);

    let ctl = dir.path().join("ctl.circ");
    let o = qdrift_cmd(&[
        "compile", "--ham", &ham, "--t", "1", "--eps", "1e-3", "--seed", "7", "--controlled", "--out",
        ctl.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&ctl).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("CROT ")).count(), 2002);
    assert!(!text.lines().any(|l| l.starts_with("ROT ")));
}

#[test]
fn compile_default_path_uses_env_dir() {
    let dir = tempfile::tempdir().unwrap();
    let ham = write(dir.path(), "chain.txt", "1 ZZ\n0.5 XI\n");
    let o = Command::new(env!("CARGO_BIN_EXE_qdrift"))
        .args(["compile", "--ham", &ham, "--t", "0.5", "--eps", "0.01", "--seed", "3"])
        .env("QDRIFT_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("chain-seed3.circ").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.txt", "1.0 ZZ\n0.5 XQ\n");
    let o = qdrift_cmd(&["compile", "--ham", &bad, "--t", "1", "--eps", "1e-3", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let ham = write(dir.path(), "h.txt", "0.5 Z\n0.5 X\n");
    let o = qdrift_cmd(&["compile", "--ham", &ham, "--t=-1", "--eps", "1e-3", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(3));
    let o = qdrift_cmd(&["truncate", "--ham", &ham, "--eps", "5"]);
    assert_eq!(o.status.code(), Some(3));
    let o = qdrift_cmd(&["phase-est", "--L", "10", "--Lambda", "1", "--lambda", "5", "--pf", "1.5"]);
    assert_eq!(o.status.code(), Some(3));
    let o = qdrift_cmd(&["verify", "--negative-control", "--strict"]);
    assert_eq!(o.status.code(), Some(4));
    let o = qdrift_cmd(&["verify", "--negative-control"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("[flag] slope/"));
}

#[test]
fn cost_rows_match_the_library() {
    let o = qdrift_cmd(&["cost", "--L", "10", "--Lambda", "1", "--lambda", "10", "--t", "1", "--eps", "1e-3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "method,order,variant,r,gates,bound,t,eps,L,Lambda,lambda");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r.len() == 11));
    assert_eq!(rows[0][0], "qdrift");
    let want = qdrift::gate_count_exact(10.0, 1.0, 1e-3).unwrap();
    assert_eq!(rows[0][4].parse::<u64>().unwrap(), want);
    let methods: Vec<String> = rows.iter().map(|r| format!("{}{}{}", r[0], r[1], r[2])).collect();
    assert_eq!(methods[1..], ["trotter1det", "trotter1random", "suzuki2det", "suzuki2random", "suzuki4det", "suzuki4random", "suzuki6det", "suzuki6random"]);
}

#[test]
fn sweep_shape_and_crossover() {
    let args = ["sweep", "--L", "100", "--Lambda", "1", "--lambda", "10", "--eps", "1e-3", "--t-min", "1", "--t-max", "1e10", "--points", "50"];
    let o = qdrift_cmd(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 50 * 9);
    let ts: Vec<f64> = rows.iter().map(|r| r[6].parse().unwrap()).collect();
    assert!(ts.windows(2).all(|w| w[0] <= w[1]));
    assert!(rows.iter().all(|r| r.len() == 11));

    let mut with = args.to_vec();
    with.push("--crossover");
    let text = stdout(&qdrift_cmd(&with));
    let last = text.lines().last().unwrap();
    assert!(last.starts_with("crossover,"), "{last}");
    let t_star: f64 = last.split(',').nth(6).unwrap().parse().unwrap();
    assert!(t_star > 1.0 && t_star < 1e10);
    assert_eq!(text.lines().count(), 1 + 50 * 9 + 1);
}

#[test]
fn sweep_truncates_files_unless_disabled() {
    let dir = tempfile::tempdir().unwrap();
    let ham = write(dir.path(), "h.txt", "0.5 ZZ\n0.3 XI\n0.001 IY\n0.0005 YY\n");
    let lambda_col = |extra: &[&str]| {
        let mut args = vec!["cost", "--ham", &ham, "--t", "1", "--eps", "0.002"];
        args.extend_from_slice(extra);
        let text = stdout(&qdrift_cmd(&args));
        let row: Vec<String> = text.lines().nth(1).unwrap().split(',').map(String::from).collect();
        (row[8].clone(), row[10].parse::<f64>().unwrap())
    };
    let (l, lambda) = lambda_col(&[]);
    assert_eq!(l, "2");
    assert!((lambda - 0.8).abs() < 1e-12);
    let (l, _) = lambda_col(&["--no-truncate"]);
    assert_eq!(l, "4");
}

#[test]
fn phase_est_rows() {
    let o = qdrift_cmd(&["phase-est", "--L", "1", "--Lambda", "1", "--lambda", "1", "--delta-e", "1e-4", "--pf", "0.05"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "method,P_f,p_f_opt,eps_tot,m,total_gates,closed_form_gates,ratio");
    let q: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(q[0], "qdrift");
    let closed: f64 = q[6].parse().unwrap();
    assert!((closed / 1.064e14 - 1.0).abs() < 1e-12);

    let o = qdrift_cmd(&["phase-est", "--L", "100", "--Lambda", "1", "--lambda", "10", "--pf-min", "1e-5", "--pf-max", "0.1", "--points", "20"]);
    let text = stdout(&o);
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').skip(1).map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 40);
    for pair in rows.chunks(2) {
        let ratio = pair[1][4] / pair[0][4];
        assert!((pair[0][6] / ratio - 1.0).abs() < 1e-12);
        assert_eq!(pair[0][6], pair[1][6]);
    }
}

#[test]
fn verify_single_term_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let ham = write(dir.path(), "one.txt", "0.7 XZ\n");
    let csv = dir.path().join("v.csv");
    let o = qdrift_cmd(&["verify", "--ham", &ham, "--out", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), "case,N,d_lower,bound,ratio");
    for line in text.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[2].parse::<f64>().unwrap(), 0.0);
    }
    let json = dir.path().join("v.json");
    let o = qdrift_cmd(&["verify", "--format", "json", "--out", json.to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert!(v["checks"].as_array().unwrap().len() >= 10);
}

#[test]
fn truncate_example() {
    let dir = tempfile::tempdir().unwrap();
    let ham = write(dir.path(), "h.txt", "0.5 ZZ\n0.3 XI\n0.001 IY\n0.0005 YY\n");
    let o = qdrift_cmd(&["truncate", "--ham", &ham, "--eps", "0.002"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body.len(), 2);
    assert!(body[0].ends_with(" ZZ") && body[1].ends_with(" XI"));
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = ["sweep", "--L", "20", "--Lambda", "0.5", "--lambda", "4", "--eps", "1e-4", "--points", "17", "--format", "json"];
    assert_eq!(qdrift_cmd(&args).stdout, qdrift_cmd(&args).stdout);
    let args = ["phase-est", "--L", "20", "--Lambda", "0.5", "--lambda", "4", "--points", "7"];
    assert_eq!(qdrift_cmd(&args).stdout, qdrift_cmd(&args).stdout);
}

#[test]
fn phase_est_repetition_filter() {
    let base = ["phase-est", "--L", "1", "--Lambda", "1", "--lambda", "1", "--pf", "0.05,0.06", "--overlap", "0.5", "--format", "json"];
    let o = qdrift_cmd(&base);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let f = &v[0]["filter"];
    assert_eq!(f["feasible"], true);
    assert_eq!(f["min_repetitions"], 3);

    let mut args = base.to_vec();
    args[10] = "0.1";
    let v: serde_json::Value = serde_json::from_str(&stdout(&qdrift_cmd(&args))).unwrap();
    assert_eq!(v[0]["filter"]["feasible"], false);
    assert!(v[0]["filter"]["min_repetitions"].is_null());

    args[10] = "1.5";
    assert_eq!(qdrift_cmd(&args).status.code(), Some(3));
}
