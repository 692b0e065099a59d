//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::collections::{BTreeMap, HashSet};
use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{all_coords, batch_span_by_hand, brute_steiner, exhaustive_shortest, random_grid, Rng};
use ls_sched::circuit::{gen_qaoa, gen_qft, Gate, LogicalCircuit, RzDecomposition, SynthGate};
use ls_sched::cost::{merge_cost, required_orientations, CostConfig};
use ls_sched::exec::{execute_pipeline, execute_slices, greedy_compile, Mode};
use ls_sched::harness::{emit_outputs, map_runs, run_experiment, Benchmark, ExperimentConfig};
use ls_sched::layout::{build_layout, Coord, LayoutGrid, LayoutKind, MsDensity, Role};
use ls_sched::oracle::{circuit_unitary, phase_aligned_deviation};
use ls_sched::rotation::{realize_msd_group, select_ms_patch, Regime, RotationSettings};
use ls_sched::routing::{bfs_path, steiner_tree, Blocked};
use ls_sched::schedule::{check_schedule, OpKind};
use ls_sched::Cycles;

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn cnot_stage_cost() -> Outcome {
    let cfg = CostConfig::default();
    let mut g = LayoutGrid::from_ascii(&["DAAD"], MsDensity::Starved).unwrap();
    let path = [Coord::new(0, 0), Coord::new(0, 1), Coord::new(0, 2), Coord::new(0, 3)];
    let misaligned = merge_cost(&path, &g, &cfg).map_err(|e| e.to_string())?.total;
    g.update_orientation(&required_orientations(&path));
    let aligned = merge_cost(&path, &g, &cfg).map_err(|e| e.to_string())?.total;
    ensure(
        misaligned == Cycles::int(4) && aligned == Cycles::int(3),
        format!("misaligned {misaligned}, aligned {aligned}"),
    )
}

fn batch_formula() -> Outcome {
    let cfg = CostConfig::default();
    let mut rng = Rng::new(0xB47C);
    let (mut checked, mut multi, mut attempts) = (0, 0, 0);
    while checked < 200 {
        attempts += 1;
        if attempts > 20_000 {
            return Err(format!("only {checked} routable instances generated"));
        }
        let g = random_grid(&mut rng, 8, 0.15);
        let targets: Vec<Coord> = all_coords(&g).into_iter().filter(|&c| g.role(c) == Some(Role::Data)).collect();
        if targets.is_empty() {
            continue;
        }
        let jobs: Vec<(Coord, RzDecomposition)> = targets
            .iter()
            .take(1 + rng.below(6))
            .map(|&t| {
                let seq: Vec<SynthGate> = (0..1 + rng.below(4))
                    .map(|_| [SynthGate::T, SynthGate::T, SynthGate::S, SynthGate::H][rng.below(4)])
                    .collect();
                (t, RzDecomposition::from_sequence(seq, 6))
            })
            .collect();
        let Ok(plan) = realize_msd_group(&g, &jobs, &cfg, 4) else { continue };
        let want = batch_span_by_hand(&plan, &cfg);
        if plan.span != want {
            return Err(format!("instance {checked}: span {} vs recomputed {want}", plan.span));
        }
        checked += 1;
        multi += usize::from(plan.batches.len() > 1);
    }
    Ok(format!("{checked} instances, {multi} with more than one batch"))
}

fn qft_desk_scale() -> Outcome {
    let cfg = CostConfig::default();
    let settings = RotationSettings::new(Regime::Eft);
    let mut rows = Vec::new();
    let mut last = (0.0, 0.0);
    let mut ok = true;
    for n in [4, 8, 12] {
        let circ = gen_qft(n).unwrap();
        let base = build_layout(LayoutKind::SquareSparse, n, MsDensity::Starved).unwrap();
        let greedy = greedy_compile(&circ, &mut base.clone(), &cfg, &settings).unwrap().total;
        let slice = execute_slices(&circ, &mut base.clone(), &cfg, &settings).unwrap().output.schedule.total_cycles;
        let pipe = execute_pipeline(&circ, &mut base.clone(), &cfg, &settings).unwrap().schedule.total_cycles;
        let (ss, sp) = (greedy.to_f64() / slice.to_f64(), greedy.to_f64() / pipe.to_f64());
        ok &= slice < greedy && pipe < greedy && ss >= last.0 && sp >= last.1;
        last = (ss, sp);
        rows.push(format!("n={n} greedy {greedy} slice {slice} ({ss:.2}x) pipelined {pipe} ({sp:.2}x)"));
    }
    ensure(ok, rows.join("; "))
}

fn multi_target_compression() -> Outcome {
    let cfg = CostConfig::default();
    let settings = RotationSettings::new(Regime::Eft);
    let n = 4;
    let gates: Vec<Gate> = (1..=n).map(|t| Gate::cphase(t - 1, 0, t, PI / (t as f64 + 1.0))).collect();
    let circ = LogicalCircuit::new(n + 1, gates).unwrap();
    let base = build_layout(LayoutKind::SquareSparse, n + 1, MsDensity::Starved).unwrap();
    let slice = execute_slices(&circ, &mut base.clone(), &cfg, &settings).map_err(|e| e.to_string())?;
    let groups: Vec<_> = slice.plan.groups.iter().filter(|g| g.all_members().count() == n).collect();
    if groups.len() != 1 {
        return Err(format!("expected one group of {n}, plan has {} groups", slice.plan.groups.len()));
    }
    let fp = groups[0].footprint.as_ref().ok_or("group has no footprint")?;
    let single_max = groups[0]
        .all_members()
        .map(|m| merge_cost(&fp.full_path(base.position(m.target).unwrap()).unwrap(), &base, &cfg).unwrap().total)
        .max()
        .unwrap();
    let a_span = slice.slices.iter().find(|s| s.group.is_some()).unwrap().a;
    let greedy = greedy_compile(&circ, &mut base.clone(), &cfg, &settings).map_err(|e| e.to_string())?;
    // Sum of the rounds that carry a CNOT.
    let mut cnot_rounds: BTreeMap<Cycles, Cycles> = BTreeMap::new();
    for iv in greedy.output.schedule.intervals.iter().filter(|iv| iv.kind == OpKind::Cnot) {
        let e = cnot_rounds.entry(iv.start).or_insert(Cycles::ZERO);
        *e = (*e).max(iv.end - iv.start);
    }
    let serialized: Cycles = cnot_rounds.values().copied().sum();
    ensure(
        a_span == single_max && serialized >= Cycles::int(3 * n as i64),
        format!(
            "stage A {a_span} vs max single merge {single_max}; greedy CNOT rounds {} summing {serialized}",
            cnot_rounds.len()
        ),
    )
}

fn replay_deviation(circ: &LogicalCircuit, gates: &[Gate]) -> f64 {
    let want = circuit_unitary(circ.num_qubits, &circ.gates).unwrap();
    let got = circuit_unitary(circ.num_qubits, gates).unwrap();
    phase_aligned_deviation(&want, &got).unwrap()
}

fn run_mode(mode: Mode, circ: &LogicalCircuit, base: &LayoutGrid, cfg: &CostConfig, s: &RotationSettings) -> ls_sched::Result<(ls_sched::schedule::EventSchedule, Option<bool>)> {
    let mut grid = base.clone();
    Ok(match mode {
        Mode::Greedy => {
            let run = greedy_compile(circ, &mut grid, cfg, s)?;
            let consistent = run.recomputed_total(cfg) == run.total && run.total == run.output.schedule.total_cycles;
            (run.output.schedule, Some(consistent))
        }
        Mode::Slice => (execute_slices(circ, &mut grid, cfg, s)?.output.schedule, None),
        Mode::Pipelined => (execute_pipeline(circ, &mut grid, cfg, s)?.schedule, None),
    })
}

fn semantic_preservation() -> Outcome {
    let cfg = CostConfig::default();
    let mut suite: Vec<LogicalCircuit> = Vec::new();
    for n in 3..=6 {
        for seed in 0..5 {
            suite.push(gen_qaoa(n, 0.5, seed).unwrap());
        }
    }
    for n in 2..=6 {
        suite.push(gen_qft(n).unwrap());
    }
    let mut jobs = Vec::new();
    for (i, _) in suite.iter().enumerate() {
        for kind in LayoutKind::STANDARD {
            for regime in Regime::ALL {
                for mode in Mode::ALL {
                    jobs.push((i, kind, regime, mode));
                }
            }
        }
    }
    let results = map_runs(&jobs, true, |&(i, kind, regime, mode)| {
        let circ = &suite[i];
        let base = build_layout(kind, circ.num_qubits, MsDensity::Starved).unwrap();
        let (sched, _) = run_mode(mode, circ, &base, &cfg, &RotationSettings::new(regime)).map_err(|e| e.to_string())?;
        Ok::<f64, String>(replay_deviation(circ, &sched.replay()))
    });
    let mut worst = 0.0f64;
    for (r, job) in results.into_iter().zip(&jobs) {
        let d = r.map_err(|e| format!("{job:?}: {e}"))?;
        worst = worst.max(d);
    }
    ensure(worst < 1e-9, format!("{} schedules over {} circuits, max deviation {worst:.2e}", jobs.len(), suite.len()))
}

struct SweepOutcome {
    runs: usize,
    violations: Vec<String>,
    greedy_runs: usize,
    greedy_mismatch: Vec<String>,
}

fn full_sweep() -> SweepOutcome {
    let cfg = CostConfig::default();
    let mut jobs = Vec::new();
    for bench in ["qaoa", "qft"] {
        for n in [4, 8, 16, 32] {
            for kind in LayoutKind::STANDARD {
                for regime in Regime::ALL {
                    for mode in Mode::ALL {
                        jobs.push((bench, n, kind, regime, mode));
                    }
                }
            }
        }
    }
    let results = map_runs(&jobs, true, |&(bench, n, kind, regime, mode)| {
        let circ = if bench == "qaoa" { gen_qaoa(n, 0.5, 0) } else { gen_qft(n) }.unwrap();
        let base = build_layout(kind, n, MsDensity::Starved).unwrap();
        let (sched, consistent) = run_mode(mode, &circ, &base, &cfg, &RotationSettings::new(regime)).map_err(|e| e.to_string())?;
        Ok::<_, String>((check_schedule(&sched, &circ).len(), consistent))
    });
    let mut out = SweepOutcome {
        runs: jobs.len(),
        violations: Vec::new(),
        greedy_runs: 0,
        greedy_mismatch: Vec::new(),
    };
    for (r, job) in results.into_iter().zip(&jobs) {
        match r {
            Ok((v, consistent)) => {
                if v > 0 {
                    out.violations.push(format!("{job:?}: {v} violations"));
                }
                if let Some(c) = consistent {
                    out.greedy_runs += 1;
                    if !c {
                        out.greedy_mismatch.push(format!("{job:?}"));
                    }
                }
            }
            Err(e) => out.violations.push(format!("{job:?}: {e}")),
        }
    }
    out
}

fn top_k_selection() -> Outcome {
    let g = LayoutGrid::from_ascii(&["#M##", "#A##", "#A##", "#A##", "#AAA", "#D#M"], MsDensity::Starved).unwrap();
    let cfg = CostConfig::default();
    let t = Coord::new(5, 1);
    let pick = |k| select_ms_patch(&g, t, &Blocked::new(), &cfg, k).unwrap().unwrap();
    let (near, far) = (pick(1), pick(4));
    ensure(
        near.chosen == Coord::new(5, 3) && far.chosen == Coord::new(0, 1) && far.chosen_cost < near.chosen_cost,
        format!(
            "k=1 -> {} (cost {}), k=4 -> {} (cost {})",
            near.chosen, near.chosen_cost, far.chosen, far.chosen_cost
        ),
    )
}

fn routing_oracles() -> Outcome {
    let mut rng = Rng::new(0x5EED);
    let mut bfs_cases = 0;
    let mut reachable = 0;
    while bfs_cases < 500 {
        let side = 4 + rng.below(2);
        let rows: Vec<String> = (0..side)
            .map(|_| (0..side).map(|_| if rng.chance(0.2) { 'D' } else if rng.chance(0.15) { '#' } else { 'A' }).collect())
            .collect();
        let refs: Vec<&str> = rows.iter().map(String::as_str).collect();
        let g = LayoutGrid::from_ascii(&refs, MsDensity::Starved).unwrap();
        let d: Vec<Coord> = all_coords(&g).into_iter().filter(|&c| g.role(c) == Some(Role::Data)).collect();
        if d.len() < 2 {
            continue;
        }
        let (a, b) = (d[0], d[1 + rng.below(d.len() - 1)]);
        let blocked: HashSet<Coord> = all_coords(&g).into_iter().filter(|_| rng.chance(0.1)).collect();
        let got = bfs_path(&g, a, b, &blocked).map(|p| p.len());
        let want = exhaustive_shortest(&g, a, b, &blocked);
        if got != want {
            return Err(format!("case {bfs_cases}: bfs {got:?} vs exhaustive {want:?} on {rows:?}"));
        }
        reachable += usize::from(want.is_some());
        bfs_cases += 1;
    }
    // Every root and terminal set of up to four on open grids up to 4×4.
    let mut sets = 0;
    let mut worst = 0.0f64;
    for h in 1..=4usize {
        for w in 1..=4usize {
            let cells = h * w;
            for mask in 1u32..(1 << cells) {
                let k = mask.count_ones() as usize;
                if !(2..=5).contains(&k) {
                    continue;
                }
                let rows: Vec<String> = (0..h)
                    .map(|r| (0..w).map(|c| if mask >> (r * w + c) & 1 == 1 { 'D' } else { 'A' }).collect())
                    .collect();
                let refs: Vec<&str> = rows.iter().map(String::as_str).collect();
                let g = LayoutGrid::from_ascii(&refs, MsDensity::Starved).unwrap();
                let data: Vec<Coord> = all_coords(&g).into_iter().filter(|&c| g.role(c) == Some(Role::Data)).collect();
                for (ri, &root) in data.iter().enumerate() {
                    let terms: Vec<Coord> = data.iter().enumerate().filter(|&(i, _)| i != ri).map(|(_, &c)| c).collect();
                    let tree = steiner_tree(&g, root, &terms, &HashSet::new());
                    let opt = brute_steiner(&g, root, &terms, cells);
                    match (tree, opt) {
                        (Some(t), Some(o)) => {
                            let ratio = t.tree_cells.len() as f64 / o as f64;
                            if ratio > 2.0 {
                                return Err(format!("{rows:?} root {root}: tree {} vs optimum {o}", t.tree_cells.len()));
                            }
                            worst = worst.max(ratio);
                        }
                        (None, None) => {}
                        (t, o) => {
                            return Err(format!("{rows:?} root {root}: tree {:?} vs optimum {o:?}", t.map(|t| t.tree_cells.len())))
                        }
                    }
                    sets += 1;
                }
            }
        }
    }
    Ok(format!("{bfs_cases} BFS cases ({reachable} reachable) match; {sets} Steiner sets, worst ratio {worst:.2}"))
}

fn density_sensitivity() -> Outcome {
    let mut speedups = Vec::new();
    for density in [MsDensity::Abundant, MsDensity::Starved] {
        let mut cfg = ExperimentConfig::new(Benchmark::Qft, 32, LayoutKind::Compact, Regime::FftMsd);
        cfg.ms_density = density;
        cfg.epsilon = 6;
        let report = run_experiment(&cfg).map_err(|e| e.to_string())?.report;
        speedups.push((report.speedup(Mode::Slice).unwrap(), report.speedup(Mode::Pipelined).unwrap()));
    }
    let (ab, st) = (speedups[0], speedups[1]);
    ensure(
        ab.0 >= st.0 && ab.1 >= st.1,
        format!(
            "slice {:.3}x abundant vs {:.3}x starved; pipelined {:.3}x vs {:.3}x",
            ab.0, st.0, ab.1, st.1
        ),
    )
}

fn determinism() -> Outcome {
    let mut configs = Vec::new();
    let mut a = ExperimentConfig::new(Benchmark::Qaoa, 8, LayoutKind::SquareSparse, Regime::FftMsd);
    a.seeds = vec![1, 2];
    configs.push(a);
    configs.push(ExperimentConfig::new(Benchmark::Qft, 8, LayoutKind::Compact, Regime::FftMsc));
    let mut c = ExperimentConfig::new(Benchmark::Qaoa, 12, LayoutKind::HalfFilling, Regime::Eft);
    c.ms_density = MsDensity::Abundant;
    configs.push(c);
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut files = 0;
    for (i, cfg) in configs.iter().enumerate() {
        let mut bytes = Vec::new();
        for rep in 0..2 {
            let dir = tmp.path().join(format!("{i}-{rep}"));
            let out = emit_outputs(&run_experiment(cfg).map_err(|e| e.to_string())?, &dir, false).map_err(|e| e.to_string())?;
            let mut all = vec![std::fs::read(&out.report).unwrap()];
            all.extend(out.traces.iter().map(|p| std::fs::read(p).unwrap()));
            bytes.push(all);
        }
        if bytes[0] != bytes[1] {
            return Err(format!("config {i} differs between runs"));
        }
        files += bytes[0].len();
    }
    Ok(format!("{} configs, {files} files byte-identical", configs.len()))
}

fn report(id: usize, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let r = f();
    let elapsed = t.elapsed();
    let in_time = elapsed <= budget;
    let (ok, detail) = match r {
        Ok(d) if in_time => (true, d),
        Ok(d) => (false, format!("{d}; over time budget")),
        Err(d) => (false, d),
    };
    println!(
        "{} criterion {id:>2} [{name}]: {detail} ({:.2}s of {}s)",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    ok
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let mut all = true;
    all &= report(1, "cnot stage cost", secs(1), cnot_stage_cost);
    all &= report(2, "batch formula", secs(10), batch_formula);
    all &= report(3, "qft false dependencies", secs(60), qft_desk_scale);
    all &= report(4, "multi-target compression", secs(1), multi_target_compression);
    all &= report(5, "semantic preservation", secs(120), semantic_preservation);
    let t = Instant::now();
    let sweep = full_sweep();
    let sweep_time = t.elapsed();
    all &= report(6, "schedule validity", secs(1800), || {
        let _ = sweep_time;
        ensure(
            sweep.violations.is_empty(),
            if sweep.violations.is_empty() {
                format!("{} runs, 0 violations ({:.1}s sweep)", sweep.runs, sweep_time.as_secs_f64())
            } else {
                format!("{} of {} runs failed: {}", sweep.violations.len(), sweep.runs, sweep.violations[..sweep.violations.len().min(3)].join("; "))
            },
        )
    }) && sweep_time <= secs(1800);
    all &= report(7, "top-k ms selection", secs(1), top_k_selection);
    all &= report(8, "routing oracles", secs(300), routing_oracles);
    all &= report(9, "greedy self-consistency", secs(1), || {
        ensure(
            sweep.greedy_mismatch.is_empty() && sweep.greedy_runs > 0,
            format!("{} greedy runs, {} mismatches", sweep.greedy_runs, sweep.greedy_mismatch.len()),
        )
    });
    all &= report(10, "ms density sensitivity", secs(300), density_sensitivity);
    all &= report(11, "determinism", secs(60), determinism);
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
