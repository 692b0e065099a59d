//! Experiment runner: builds circuits and layouts, runs the requested
//! executors, validates every schedule and aggregates a report.

mod output;
mod report;

use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;

use crate::circuit::{gen_qaoa, gen_qft, parse_circuit, LogicalCircuit, RzProvider, SynthTable};
use crate::cost::CostConfig;
use crate::cycles::Cycles;
use crate::error::{Error, Result};
use crate::exec::{execute_pipeline, execute_slices, greedy_compile, ExecStats, Mode};
use crate::grouping::{plan_groups, GroupPlan};
use crate::layout::{build_layout, LayoutGrid, LayoutKind, MsDensity};
use crate::oracle::{circuit_unitary, phase_aligned_deviation, MAX_QUBITS, TOLERANCE};
use crate::rotation::{Regime, RotationSettings};
use crate::schedule::{check_schedule, EventSchedule};

pub use output::{emit_outputs, OutputPaths};
pub use report::{geomean, CompilationReport, ModeSummary, RunRow};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Benchmark {
    Qaoa,
    Qft,
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub benchmark: Benchmark,
    pub n_qubits: usize,
    pub edge_prob: f64,
    pub layout: LayoutKind,
    pub ms_density: MsDensity,
    pub regime: Regime,
    pub epsilon: u32,
    pub modes: Vec<Mode>,
    pub seeds: Vec<u64>,
    pub cost: CostConfig,
    /// Candidates evaluated per magic-state selection.
    pub k: usize,
    /// Pre-synthesized rotation table; the analytic model otherwise.
    pub rz_table: Option<PathBuf>,
    /// Run the oracle up to its qubit limit instead of only up to 6.
    pub verify: bool,
}

impl ExperimentConfig {
    pub fn new(benchmark: Benchmark, n_qubits: usize, layout: LayoutKind, regime: Regime) -> Self {
        ExperimentConfig {
            benchmark,
            n_qubits,
            edge_prob: 0.5,
            layout,
            ms_density: MsDensity::Starved,
            regime,
            epsilon: 6,
            modes: Mode::ALL.to_vec(),
            seeds: vec![0],
            cost: CostConfig::default(),
            k: 4,
            rz_table: None,
            verify: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.modes.is_empty() {
            return Err(Error::Config("at least one mode is required".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        if self.benchmark != Benchmark::Qft && self.benchmark != Benchmark::Qaoa {
            // File circuits carry their own size.
        } else if self.n_qubits == 0 {
            return Err(Error::Config("qubit count must be positive".into()));
        }
        if self.layout == LayoutKind::Custom {
            return Err(Error::Config("custom layouts are not built by the runner".into()));
        }
        if self.epsilon < 1 || self.k < 1 {
            return Err(Error::Config("precision and k must be at least 1".into()));
        }
        self.cost.validate()
    }

    pub fn circuit(&self, seed: u64) -> Result<LogicalCircuit> {
        match &self.benchmark {
            Benchmark::Qaoa => gen_qaoa(self.n_qubits, self.edge_prob, seed),
            Benchmark::Qft => gen_qft(self.n_qubits),
            Benchmark::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?;
                parse_circuit(&text)
            }
        }
    }

    pub fn settings(&self) -> Result<RotationSettings> {
        let provider = match &self.rz_table {
            Some(p) => RzProvider::File(SynthTable::load(p)?),
            None => RzProvider::Model,
        };
        Ok(RotationSettings {
            regime: self.regime,
            epsilon: self.epsilon,
            provider,
            k: self.k,
        })
    }
}

/// One executor run with its artifacts.
#[derive(Clone, Debug)]
pub struct RunArtifacts {
    pub seed: u64,
    pub mode: Mode,
    pub total: Cycles,
    pub stats: ExecStats,
    pub schedule: EventSchedule,
    /// Wall-clock seconds; kept out of the report so it stays reproducible.
    pub seconds: f64,
    pub oracle_deviation: Option<f64>,
    /// Σ L_k + (K − 1)·c_reset recomputed from the rounds (greedy only).
    pub recomputed_total: Option<Cycles>,
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub layout: LayoutGrid,
    pub runs: Vec<RunArtifacts>,
    /// Static group plan per seed.
    pub plans: Vec<(u64, GroupPlan)>,
    pub report: CompilationReport,
}

fn run_one(config: &ExperimentConfig, settings: &RotationSettings, circuit: &LogicalCircuit, layout: &LayoutGrid, seed: u64, mode: Mode) -> Result<RunArtifacts> {
    let mut grid = layout.clone();
    let clock = Instant::now();
    let (schedule, stats, recomputed) = match mode {
        Mode::Greedy => {
            let run = greedy_compile(circuit, &mut grid, &config.cost, settings)?;
            let re = run.recomputed_total(&config.cost);
            (run.output.schedule, run.output.stats, Some(re))
        }
        Mode::Slice => {
            let run = execute_slices(circuit, &mut grid, &config.cost, settings)?;
            let re = run.recomputed_total(&config.cost);
            (run.output.schedule, run.output.stats, Some(re))
        }
        Mode::Pipelined => {
            let out = execute_pipeline(circuit, &mut grid, &config.cost, settings)?;
            (out.schedule, out.stats, None)
        }
    };
    let seconds = clock.elapsed().as_secs_f64();
    let violations = check_schedule(&schedule, circuit);
    if !violations.is_empty() {
        let shown: Vec<String> = violations.iter().take(5).map(ToString::to_string).collect();
        return Err(Error::Validation(format!(
            "{} seed {seed}: {} violation(s): {}",
            mode.name(),
            violations.len(),
            shown.join("; ")
        )));
    }
    if let Some(re) = recomputed {
        if re != schedule.total_cycles {
            return Err(Error::Validation(format!(
                "{} seed {seed}: total {} differs from recomputed {re}",
                mode.name(),
                schedule.total_cycles
            )));
        }
    }
    let limit = if config.verify { MAX_QUBITS } else { 6 };
    let oracle_deviation = if circuit.num_qubits <= limit {
        let want = circuit_unitary(circuit.num_qubits, &circuit.gates)?;
        let got = circuit_unitary(circuit.num_qubits, &schedule.replay())?;
        let dev = phase_aligned_deviation(&want, &got)?;
        if dev >= TOLERANCE {
            return Err(Error::Validation(format!(
                "{} seed {seed}: replay deviates from the circuit by {dev:e}",
                mode.name()
            )));
        }
        Some(dev)
    } else {
        None
    };
    Ok(RunArtifacts {
        seed,
        mode,
        total: schedule.total_cycles,
        stats,
        schedule,
        seconds,
        oracle_deviation,
        recomputed_total: recomputed,
    })
}

/// Map `f` over `items`, in parallel when the `parallel` feature is on and
/// `parallel` is set. Output order always matches input order.
pub fn map_runs<T: Sync, R: Send>(items: &[T], parallel: bool, f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = parallel;
    items.iter().map(f).collect()
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    run_experiment_with(config, true)
}

pub fn run_experiment_with(config: &ExperimentConfig, parallel: bool) -> Result<ExperimentResult> {
    config.validate()?;
    let settings = config.settings()?;
    let circuits = config
        .seeds
        .iter()
        .map(|&s| config.circuit(s).map(|c| (s, c)))
        .collect::<Result<Vec<_>>>()?;
    let n = circuits[0].1.num_qubits;
    let layout = build_layout(config.layout, n, config.ms_density)?;
    let jobs: Vec<(usize, Mode)> = (0..circuits.len())
        .flat_map(|i| config.modes.iter().map(move |&m| (i, m)))
        .collect();
    let runs = map_runs(&jobs, parallel, |&(i, mode)| {
        let (seed, circuit) = &circuits[i];
        run_one(config, &settings, circuit, &layout, *seed, mode)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let plans = circuits
        .iter()
        .map(|(s, c)| plan_groups(c, &layout, &config.cost).map(|p| (*s, p)))
        .collect::<Result<Vec<_>>>()?;
    let report = CompilationReport::build(config, n, &runs);
    Ok(ExperimentResult {
        config: config.clone(),
        layout,
        runs,
        plans,
        report,
    })
}

/// Run many experiments; each result keeps its input position.
pub fn run_sweep(configs: &[ExperimentConfig], parallel: bool) -> Vec<Result<ExperimentResult>> {
    map_runs(configs, parallel, |c| run_experiment_with(c, false))
}
