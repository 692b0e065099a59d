use std::collections::BTreeMap;

use serde::Serialize;

use super::{Benchmark, ExperimentConfig, RunArtifacts};
use crate::exec::Mode;

pub const SCHEMA_VERSION: u32 = 1;

/// Geometric mean; `None` for an empty slice.
pub fn geomean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let s: f64 = values.iter().map(|v| v.ln()).sum();
    Some((s / values.len() as f64).exp())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigSummary {
    pub benchmark: String,
    pub n_qubits: usize,
    pub edge_prob: f64,
    pub layout: String,
    pub ms_density: String,
    pub regime: String,
    pub precision: u32,
    pub k: usize,
    pub modes: Vec<Mode>,
    pub seeds: Vec<u64>,
}

/// One (seed, mode) row.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRow {
    pub seed: u64,
    pub mode: Mode,
    /// Exact decimal total.
    pub total_cycles: String,
    /// Total rounded up to whole cycles.
    pub total_cycles_ceil: i64,
    pub groups: usize,
    pub windows: usize,
    pub fallbacks: usize,
    pub stage_a_cycles: String,
    pub stage_b_cycles: String,
    pub stage_c_cycles: String,
    pub speedup: Option<f64>,
    pub oracle_checked: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModeSummary {
    pub geomean_cycles: f64,
    pub geomean_speedup: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompilationReport {
    pub schema_version: u32,
    pub config: ConfigSummary,
    pub runs: Vec<RunRow>,
    pub summary: BTreeMap<Mode, ModeSummary>,
}

impl CompilationReport {
    pub fn build(config: &ExperimentConfig, n_qubits: usize, runs: &[RunArtifacts]) -> Self {
        let mut sorted: Vec<&RunArtifacts> = runs.iter().collect();
        sorted.sort_by_key(|r| (r.seed, r.mode));
        let greedy: BTreeMap<u64, f64> = sorted
            .iter()
            .filter(|r| r.mode == Mode::Greedy)
            .map(|r| (r.seed, r.total.to_f64()))
            .collect();
        let rows: Vec<RunRow> = sorted
            .iter()
            .map(|r| {
                let total = r.total.to_f64();
                RunRow {
                    seed: r.seed,
                    mode: r.mode,
                    total_cycles: r.total.to_string(),
                    total_cycles_ceil: r.total.ceil(),
                    groups: r.stats.groups,
                    windows: r.stats.windows,
                    fallbacks: r.stats.fallbacks,
                    stage_a_cycles: r.stats.stage_a_cycles.to_string(),
                    stage_b_cycles: r.stats.stage_b_cycles.to_string(),
                    stage_c_cycles: r.stats.stage_c_cycles.to_string(),
                    speedup: if r.mode == Mode::Greedy {
                        Some(1.0)
                    } else {
                        greedy.get(&r.seed).map(|g| g / total)
                    },
                    oracle_checked: r.oracle_deviation.is_some(),
                }
            })
            .collect();
        let mut summary = BTreeMap::new();
        for &mode in &config.modes {
            let mine: Vec<&RunRow> = rows.iter().filter(|r| r.mode == mode).collect();
            let cycles: Vec<f64> = sorted
                .iter()
                .filter(|r| r.mode == mode)
                .map(|r| r.total.to_f64())
                .collect();
            let speedups: Option<Vec<f64>> = mine.iter().map(|r| r.speedup).collect();
            summary.insert(
                mode,
                ModeSummary {
                    geomean_cycles: geomean(&cycles).unwrap_or(0.0),
                    geomean_speedup: speedups.and_then(|s| geomean(&s)),
                },
            );
        }
        let benchmark = match &config.benchmark {
            Benchmark::Qaoa => "qaoa".to_string(),
            Benchmark::Qft => "qft".to_string(),
            Benchmark::File(p) => format!("file:{}", p.display()),
        };
        CompilationReport {
            schema_version: SCHEMA_VERSION,
            config: ConfigSummary {
                benchmark,
                n_qubits,
                edge_prob: config.edge_prob,
                layout: config.layout.cli_name().to_string(),
                ms_density: match config.ms_density {
                    crate::layout::MsDensity::Abundant => "abundant".into(),
                    crate::layout::MsDensity::Starved => "starved".into(),
                },
                regime: config.regime.cli_name().to_string(),
                precision: config.epsilon,
                k: config.k,
                modes: config.modes.clone(),
                seeds: config.seeds.clone(),
            },
            runs: rows,
            summary,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn row(&self, seed: u64, mode: Mode) -> Option<&RunRow> {
        self.runs.iter().find(|r| r.seed == seed && r.mode == mode)
    }

    pub fn speedup(&self, mode: Mode) -> Option<f64> {
        self.summary.get(&mode).and_then(|s| s.geomean_speedup)
    }
}
