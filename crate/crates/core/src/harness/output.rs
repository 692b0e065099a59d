use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::ExperimentResult;
use crate::error::{Error, Result};

/// Files written by [`emit_outputs`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OutputPaths {
    pub report: PathBuf,
    pub layout: PathBuf,
    pub traces: Vec<PathBuf>,
    pub groups: Vec<PathBuf>,
    pub timing: PathBuf,
}

#[derive(Serialize)]
struct TimingRow<'a> {
    seed: u64,
    mode: &'a str,
    seconds: f64,
}

fn write(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Write report, layout and one trace per run into `dir`, creating it when
/// missing. Wall-clock timings go to their own file so the rest stays
/// byte-identical across reruns.
pub fn emit_outputs(result: &ExperimentResult, dir: &Path, dump_groups: bool) -> Result<OutputPaths> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut paths = OutputPaths {
        report: dir.join("report.json"),
        layout: dir.join("layout.json"),
        timing: dir.join("timing.json"),
        ..OutputPaths::default()
    };
    write(&paths.report, &result.report.to_json())?;
    write(&paths.layout, &result.layout.to_json())?;
    let single_seed = result.config.seeds.len() == 1;
    let mut timing = Vec::new();
    for run in &result.runs {
        let name = if single_seed {
            format!("trace_{}.csv", run.mode.name())
        } else {
            format!("trace_{}_seed{}.csv", run.mode.name(), run.seed)
        };
        let p = dir.join(name);
        write(&p, &run.schedule.trace_csv())?;
        paths.traces.push(p);
        timing.push(TimingRow {
            seed: run.seed,
            mode: run.mode.name(),
            seconds: run.seconds,
        });
    }
    if dump_groups {
        for (seed, plan) in &result.plans {
            let name = if single_seed {
                "groups.json".to_string()
            } else {
                format!("groups_seed{seed}.json")
            };
            let p = dir.join(name);
            write(&p, &plan.to_json())?;
            paths.groups.push(p);
        }
    }
    write(
        &paths.timing,
        &serde_json::to_string_pretty(&timing).expect("timing serializes"),
    )?;
    Ok(paths)
}
