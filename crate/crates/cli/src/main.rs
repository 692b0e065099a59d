use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ls_sched::cost::CostConfig;
use ls_sched::exec::Mode;
use ls_sched::harness::{emit_outputs, run_experiment, Benchmark, ExperimentConfig};
use ls_sched::layout::{LayoutKind, MsDensity};
use ls_sched::rotation::Regime;
use ls_sched::Error;

#[derive(Parser)]
#[command(name = "ls-sched", version, about = "Lattice-surgery schedule compiler")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a benchmark under each mode and write report, traces and layout.
    Compile(CompileArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum BenchArg {
    Qaoa,
    Qft,
    File,
}

#[derive(Clone, Copy, ValueEnum)]
enum LayoutArg {
    Compact,
    Half,
    Twothirds,
    Sparse,
}

#[derive(Clone, Copy, ValueEnum)]
enum DensityArg {
    Abundant,
    Starved,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    Eft,
    FftMsd,
    FftMsc,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Greedy,
    Slice,
    Pipelined,
}

#[derive(clap::Args)]
struct CompileArgs {
    #[arg(long, value_enum)]
    benchmark: BenchArg,
    /// Circuit file, required with `--benchmark file`.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    qubits: usize,
    #[arg(long, value_enum, default_value = "sparse")]
    layout: LayoutArg,
    #[arg(long = "ms-density", value_enum, default_value = "starved")]
    ms_density: DensityArg,
    #[arg(long, value_enum, default_value = "eft")]
    regime: RegimeArg,
    #[arg(long, default_value_t = 6)]
    precision: u32,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "greedy,slice,pipelined")]
    mode: Vec<ModeArg>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seed: Vec<u64>,
    /// Edge probability for QAOA graphs.
    #[arg(long = "edge-prob", default_value_t = 0.5)]
    edge_prob: f64,
    /// Magic-state candidates evaluated per selection.
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    verify: bool,
    #[arg(long = "dump-groups")]
    dump_groups: bool,
    #[arg(long = "cost-config")]
    cost_config: Option<PathBuf>,
    /// Pre-synthesized rotation table.
    #[arg(long = "rz-table")]
    rz_table: Option<PathBuf>,
}

fn build_config(a: &CompileArgs) -> Result<ExperimentConfig, Error> {
    let benchmark = match a.benchmark {
        BenchArg::Qaoa => Benchmark::Qaoa,
        BenchArg::Qft => Benchmark::Qft,
        BenchArg::File => Benchmark::File(
            a.input
                .clone()
                .ok_or_else(|| Error::Config("--benchmark file needs --input".into()))?,
        ),
    };
    let layout = match a.layout {
        LayoutArg::Compact => LayoutKind::Compact,
        LayoutArg::Half => LayoutKind::HalfFilling,
        LayoutArg::Twothirds => LayoutKind::TwoThirdsFilling,
        LayoutArg::Sparse => LayoutKind::SquareSparse,
    };
    let regime = match a.regime {
        RegimeArg::Eft => Regime::Eft,
        RegimeArg::FftMsd => Regime::FftMsd,
        RegimeArg::FftMsc => Regime::FftMsc,
    };
    let mut cfg = ExperimentConfig::new(benchmark, a.qubits, layout, regime);
    cfg.ms_density = match a.ms_density {
        DensityArg::Abundant => MsDensity::Abundant,
        DensityArg::Starved => MsDensity::Starved,
    };
    cfg.epsilon = a.precision;
    cfg.edge_prob = a.edge_prob;
    cfg.k = a.k;
    cfg.seeds = a.seed.clone();
    cfg.verify = a.verify;
    cfg.rz_table = a.rz_table.clone();
    let mut modes: Vec<Mode> = a
        .mode
        .iter()
        .map(|m| match m {
            ModeArg::Greedy => Mode::Greedy,
            ModeArg::Slice => Mode::Slice,
            ModeArg::Pipelined => Mode::Pipelined,
        })
        .collect();
    modes.sort();
    modes.dedup();
    cfg.modes = modes;
    if let Some(p) = &a.cost_config {
        cfg.cost = CostConfig::load(p)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn compile(a: &CompileArgs) -> Result<(), Error> {
    let cfg = build_config(a)?;
    let result = run_experiment(&cfg)?;
    emit_outputs(&result, &a.out, a.dump_groups)?;
    for row in &result.report.runs {
        let speedup = row.speedup.map(|s| format!("{s:.3}")).unwrap_or_else(|| "-".into());
        println!(
            "seed={} mode={} cycles={} speedup={}",
            row.seed,
            row.mode.name(),
            row.total_cycles,
            speedup
        );
    }
    if a.verify {
        for run in &result.runs {
            match run.oracle_deviation {
                Some(d) => println!("verify seed={} mode={} max_deviation={d:e}", run.seed, run.mode.name()),
                None => println!("verify seed={} mode={} skipped (too many qubits)", run.seed, run.mode.name()),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Compile(args) = cli.command;
    match compile(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Validation(_)) => {
            eprintln!("validation failed: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
