use std::fs;
use std::path::Path;

use ls_sched::exec::Mode;
use ls_sched::harness::{emit_outputs, geomean, run_experiment, Benchmark, ExperimentConfig};
use ls_sched::layout::LayoutKind;
use ls_sched::rotation::Regime;
use ls_sched::Error;

fn qaoa4_complete() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(Benchmark::Qaoa, 4, LayoutKind::SquareSparse, Regime::Eft);
    cfg.edge_prob = 1.0;
    cfg
}

#[test]
fn qaoa4_report_matches_golden() {
    let report = run_experiment(&qaoa4_complete()).unwrap().report;
    assert_eq!(report.runs.len(), 3);
    let speedups: Vec<f64> = report.runs.iter().filter(|r| r.mode != Mode::Greedy).filter_map(|r| r.speedup).collect();
    assert_eq!(speedups.len(), 2);
    assert!(speedups.iter().all(|&s| s > 1.0));
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/qaoa4_sparse_eft.json");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::write(&golden, report.to_json()).unwrap();
    }
    assert_eq!(report.to_json(), fs::read_to_string(golden).unwrap());
}

#[test]
fn greedy_against_itself_is_one() {
    let mut cfg = qaoa4_complete();
    cfg.modes = vec![Mode::Greedy];
    let report = run_experiment(&cfg).unwrap().report;
    assert_eq!(report.runs[0].speedup, Some(1.0));
    assert_eq!(report.speedup(Mode::Greedy), Some(1.0));
}

#[test]
fn identical_circuits_give_identical_rows() {
    // QFT ignores the seed.
    let mut cfg = ExperimentConfig::new(Benchmark::Qft, 5, LayoutKind::Compact, Regime::FftMsd);
    cfg.seeds = vec![3, 9];
    let report = run_experiment(&cfg).unwrap().report;
    for mode in Mode::ALL {
        let (a, b) = (report.row(3, mode).unwrap(), report.row(9, mode).unwrap());
        assert_eq!((&a.total_cycles, a.windows, &a.stage_b_cycles), (&b.total_cycles, b.windows, &b.stage_b_cycles));
    }
}

#[test]
fn geomean_matches_the_rows() {
    let mut cfg = ExperimentConfig::new(Benchmark::Qaoa, 5, LayoutKind::HalfFilling, Regime::Eft);
    cfg.seeds = vec![1, 2, 3];
    let report = run_experiment(&cfg).unwrap().report;
    for mode in Mode::ALL {
        let ratios: Vec<f64> = report.runs.iter().filter(|r| r.mode == mode).map(|r| r.speedup.unwrap()).collect();
        let by_hand = ratios.iter().product::<f64>().powf(1.0 / ratios.len() as f64);
        let got = report.speedup(mode).unwrap();
        assert!((got - by_hand).abs() < 1e-12, "{mode:?}: {got} vs {by_hand}");
        assert!((geomean(&ratios).unwrap() - by_hand).abs() < 1e-12);
    }
}

#[test]
fn outputs_are_created_and_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("nested/out");
    let cfg = qaoa4_complete();
    let first = emit_outputs(&run_experiment(&cfg).unwrap(), &dir, true).unwrap();
    let snapshot = |paths: &[&Path]| paths.iter().map(|p| fs::read(p).unwrap()).collect::<Vec<_>>();
    let mut files: Vec<&Path> = vec![&first.report, &first.layout];
    files.extend(first.traces.iter().map(|p| p.as_path()));
    files.extend(first.groups.iter().map(|p| p.as_path()));
    assert_eq!(first.traces.len(), 3);
    assert!(dir.join("groups.json").exists());
    let before = snapshot(&files);
    emit_outputs(&run_experiment(&cfg).unwrap(), &dir, true).unwrap();
    assert_eq!(before, snapshot(&files));
}

#[test]
fn without_dump_flag_no_groups_file() {
    let tmp = tempfile::tempdir().unwrap();
    let out = emit_outputs(&run_experiment(&qaoa4_complete()).unwrap(), tmp.path(), false).unwrap();
    assert!(out.groups.is_empty());
    assert!(!tmp.path().join("groups.json").exists());
}

#[test]
fn io_errors_name_the_path() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("plain");
    fs::write(&file, "x").unwrap();
    let err = emit_outputs(&run_experiment(&qaoa4_complete()).unwrap(), &file.join("sub"), false).unwrap_err();
    match err {
        Error::Io { path, .. } => assert!(path.starts_with(&file)),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn config_errors() {
    let mut cfg = qaoa4_complete();
    cfg.modes.clear();
    assert!(matches!(run_experiment(&cfg), Err(Error::Config(_))));
    let mut cfg = qaoa4_complete();
    cfg.seeds.clear();
    assert!(matches!(run_experiment(&cfg), Err(Error::Config(_))));
}

#[test]
fn sweep_order_and_parallelism_do_not_change_results() {
    let configs: Vec<ExperimentConfig> = [3, 4, 5]
        .into_iter()
        .map(|n| ExperimentConfig::new(Benchmark::Qft, n, LayoutKind::SquareSparse, Regime::FftMsc))
        .collect();
    let seq: Vec<String> = ls_sched::harness::run_sweep(&configs, false).into_iter().map(|r| r.unwrap().report.to_json()).collect();
    let par: Vec<String> = ls_sched::harness::run_sweep(&configs, true).into_iter().map(|r| r.unwrap().report.to_json()).collect();
    assert_eq!(seq, par);
}
