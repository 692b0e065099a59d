use std::fs;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ls-sched"))
}

#[test]
fn compile_writes_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let status = bin()
        .args(["compile", "--benchmark", "qft", "--qubits", "4", "--layout", "compact"])
        .args(["--regime", "fft-msc", "--mode", "greedy,pipelined", "--seed", "1,2", "--verify", "--dump-groups"])
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let stdout = String::from_utf8(status.stdout).unwrap();
    assert!(stdout.contains("max_deviation="));
    for f in ["report.json", "layout.json", "timing.json", "trace_greedy_seed1.csv", "trace_pipelined_seed2.csv", "groups_seed1.json"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    assert!(!out.join("trace_slice_seed1.csv").exists());
}

#[test]
fn config_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cost = tmp.path().join("cost.toml");
    fs::write(&cost, "t_zz = 1\nbogus = 2\n").unwrap();
    let st = bin()
        .args(["compile", "--benchmark", "qaoa", "--qubits", "4", "--out"])
        .arg(tmp.path().join("o"))
        .arg("--cost-config")
        .arg(&cost)
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&st.stderr).contains("bogus"));
    let st = bin()
        .args(["compile", "--benchmark", "file", "--out"])
        .arg(tmp.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&st.stderr).contains("--input"));
}

#[test]
fn file_benchmark_and_cost_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let circ = tmp.path().join("c.txt");
    fs::write(&circ, "qubits 3\nH 0\nCP 0 1 pi/2\nCP 0 2 pi/4\n").unwrap();
    let cost = tmp.path().join("cost.json");
    fs::write(&cost, r#"{"c_reset": 2}"#).unwrap();
    let out = tmp.path().join("o");
    let st = bin()
        .args(["compile", "--benchmark", "file", "--input"])
        .arg(&circ)
        .arg("--cost-config")
        .arg(&cost)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let report = fs::read_to_string(out.join("report.json")).unwrap();
    assert!(report.contains("\"n_qubits\": 3"));
}
