//! Clock-cycle cost model. One cycle is `code_distance` syndrome rounds.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::circuit::RzDecomposition;
use crate::cycles::Cycles;
use crate::error::{Error, Result};
use crate::layout::{Coord, LayoutGrid, Orientation, Role};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotationMode {
    /// All misaligned ancillas rotate in one shared stage.
    #[default]
    Simultaneous,
    /// Each misaligned ancilla contributes its own rotation cost.
    PerSegment,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostConfig {
    pub t_zz: Cycles,
    pub t_rot_patch: Cycles,
    pub t_xx: Cycles,
    pub t_h: Cycles,
    pub t_s: Cycles,
    pub t_rz_inject: Cycles,
    pub t_cult: Cycles,
    pub c_reset: Cycles,
    pub c_flow_per_turn: Cycles,
    pub rotation_mode: RotationMode,
    /// Informational only.
    pub code_distance: u32,
}

impl Default for CostConfig {
    fn default() -> Self {
        CostConfig {
            t_zz: Cycles::int(1),
            t_rot_patch: Cycles::int(1),
            t_xx: Cycles::int(1),
            t_h: Cycles::int(1),
            t_s: Cycles::new(3, 2),
            t_rz_inject: Cycles::new(42, 5),
            t_cult: Cycles::new(19, 10),
            c_reset: Cycles::int(1),
            c_flow_per_turn: Cycles::ZERO,
            rotation_mode: RotationMode::Simultaneous,
            code_distance: 11,
        }
    }
}

impl CostConfig {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("t_zz", self.t_zz),
            ("t_rot_patch", self.t_rot_patch),
            ("t_xx", self.t_xx),
            ("t_h", self.t_h),
            ("t_s", self.t_s),
            ("t_rz_inject", self.t_rz_inject),
            ("t_cult", self.t_cult),
            ("c_reset", self.c_reset),
            ("c_flow_per_turn", self.c_flow_per_turn),
        ];
        if let Some((name, _)) = named.iter().find(|(_, v)| *v < Cycles::ZERO) {
            return Err(Error::Config(format!("{name} must be nonnegative")));
        }
        if self.t_zz < Cycles::int(1) || self.t_xx < Cycles::int(1) {
            return Err(Error::Config("t_zz and t_xx must be at least 1".into()));
        }
        Ok(())
    }

    /// Parse TOML, or JSON when the text starts with `{`. Missing keys keep
    /// their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: CostConfig = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::Config(format!("cost config: {e}")))?
        } else {
            toml::from_str(text).map_err(|e| Error::Config(format!("cost config: {e}")))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::parse(&text)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageBreakdown {
    pub zz1: Cycles,
    pub rot: Cycles,
    pub zz2: Cycles,
    pub xx: Cycles,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathCost {
    pub total: Cycles,
    pub rotation_cycles: Cycles,
    pub turn_cycles: Cycles,
    pub stage_breakdown: StageBreakdown,
}

/// Orientation an interior cell needs, given the step that enters it.
/// Horizontal travel needs Z boundaries facing east/west.
fn required_for_step(from: Coord, to: Coord) -> Orientation {
    if from.row == to.row {
        Orientation::ZHorizontal
    } else {
        Orientation::XHorizontal
    }
}

/// Required orientation for every interior cell of an endpoint-inclusive
/// path. Applying these after a merge keeps the orientation map current.
pub fn required_orientations(path: &[Coord]) -> Vec<(Coord, Orientation)> {
    if path.len() < 3 {
        return Vec::new();
    }
    (1..path.len() - 1)
        .map(|i| (path[i], required_for_step(path[i - 1], path[i])))
        .collect()
}

pub fn count_turns(path: &[Coord]) -> usize {
    path.windows(3)
        .filter(|w| {
            let d1 = (w[1].row - w[0].row, w[1].col - w[0].col);
            let d2 = (w[2].row - w[1].row, w[2].col - w[1].col);
            d1 != d2
        })
        .count()
}

/// Cost of a ZZ, rotate, ZZ, XX merge sequence along `path`, which runs
/// from one endpoint patch to the other. Interior cells must be ancilla.
pub fn merge_cost(path: &[Coord], grid: &LayoutGrid, config: &CostConfig) -> Result<PathCost> {
    if path.len() < 2 {
        return Err(Error::Layout("merge path needs two endpoints".into()));
    }
    for w in path.windows(2) {
        if !w[0].is_adjacent(w[1]) {
            return Err(Error::Layout(format!("path step {} -> {} is not adjacent", w[0], w[1])));
        }
    }
    for &c in &path[1..path.len() - 1] {
        if grid.role(c) != Some(Role::Ancilla) {
            return Err(Error::NotRoutable(c));
        }
    }
    for &c in [path[0], path[path.len() - 1]].iter() {
        if matches!(grid.role(c), None | Some(Role::Wall)) {
            return Err(Error::NotRoutable(c));
        }
    }
    let misaligned = required_orientations(path)
        .into_iter()
        .filter(|&(c, o)| grid.orientation(c) != o)
        .count();
    let rot = match (misaligned, config.rotation_mode) {
        (0, _) => Cycles::ZERO,
        (_, RotationMode::Simultaneous) => config.t_rot_patch,
        (m, RotationMode::PerSegment) => config.t_rot_patch * m as i64,
    };
    let turn_cycles = config.c_flow_per_turn * count_turns(path) as i64;
    let stage_breakdown = StageBreakdown {
        zz1: config.t_zz,
        rot,
        zz2: config.t_zz,
        xx: config.t_xx,
    };
    Ok(PathCost {
        total: config.t_zz + rot + config.t_zz + config.t_xx + turn_cycles,
        rotation_cycles: rot,
        turn_cycles,
        stage_breakdown,
    })
}

/// τ_route · n_T + t_S · n_S + t_H · n_H.
pub fn rz_sequence_cost(dec: &RzDecomposition, tau_route: Cycles, config: &CostConfig) -> Cycles {
    tau_route * dec.n_t as i64 + config.t_s * dec.n_s as i64 + config.t_h * dec.n_h as i64
}

/// Sum of per-batch maxima plus one reset between consecutive batches.
pub fn batch_latency(batch_maxima: &[Cycles], config: &CostConfig) -> Result<Cycles> {
    if batch_maxima.is_empty() {
        return Err(Error::Config("batch_latency needs at least one batch".into()));
    }
    let sum: Cycles = batch_maxima.iter().copied().sum();
    Ok(sum + config.c_reset * (batch_maxima.len() as i64 - 1))
}
