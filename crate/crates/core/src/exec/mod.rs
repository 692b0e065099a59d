//! Executors turning a circuit on a layout into a timed schedule.

pub mod greedy;
pub mod pipeline;
pub mod slice;

use serde::Serialize;

use crate::circuit::{Gate, GateKind, LogicalCircuit, QubitId};
use crate::cost::CostConfig;
use crate::cycles::Cycles;
use crate::error::{Error, Result};
use crate::grouping::GroupMember;
use crate::schedule::EventSchedule;

pub use greedy::{greedy_compile, GreedyRound};
pub use pipeline::execute_pipeline;
pub use slice::{execute_slices, SliceRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Greedy,
    Slice,
    Pipelined,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Greedy, Mode::Slice, Mode::Pipelined];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Greedy => "greedy",
            Mode::Slice => "slice",
            Mode::Pipelined => "pipelined",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ExecStats {
    /// Multi-target groups executed (pipelined: formed dynamically).
    pub groups: usize,
    /// Synchronized windows (slice) or rounds (greedy).
    pub windows: usize,
    /// Groups that fell back to point-to-point routing.
    pub fallbacks: usize,
    pub stage_a_cycles: Cycles,
    pub stage_b_cycles: Cycles,
    pub stage_c_cycles: Cycles,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExecOutput {
    pub schedule: EventSchedule,
    pub stats: ExecStats,
}

/// Duration of an in-place single-qubit op.
pub(crate) fn in_place_cost(g: &Gate, config: &CostConfig) -> Cycles {
    match g.kind {
        GateKind::H => config.t_h,
        GateKind::S => config.t_s,
        _ => Cycles::ZERO,
    }
}

pub(crate) fn is_in_place(g: &Gate) -> bool {
    matches!(g.kind, GateKind::H | GateKind::S | GateKind::Rz)
}

pub(crate) fn cnot(m: &GroupMember) -> Gate {
    Gate::cnot(m.gate, m.control, m.target).with_origin(m.gate)
}

pub(crate) fn target_rotation(m: &GroupMember) -> Gate {
    Gate::rz(m.gate, m.target, -m.angle / 2.0).with_origin(m.gate)
}

/// The closing CNOT with the two frame phases that complete the gate.
pub(crate) fn closing(m: &GroupMember) -> Vec<Gate> {
    vec![
        cnot(m),
        Gate::rz(m.gate, m.control, m.angle / 2.0).annotated(),
        Gate::rz(m.gate, m.target, m.angle / 2.0).annotated(),
    ]
}

pub(crate) fn member_of(g: &Gate) -> GroupMember {
    GroupMember {
        gate: g.id,
        control: g.qubits[0],
        target: g.qubits[1],
        angle: g.angle_or_zero(),
    }
}

pub(crate) fn check_input(circuit: &LogicalCircuit, grid: &crate::layout::LayoutGrid) -> Result<()> {
    circuit.check_executable()?;
    if circuit.num_qubits > grid.num_qubits() {
        return Err(Error::Unplaced(grid.num_qubits()));
    }
    Ok(())
}

pub(crate) fn qubits_of(members: &[GroupMember]) -> Vec<QubitId> {
    let mut q: Vec<QubitId> = members.iter().flat_map(|m| [m.control, m.target]).collect();
    q.sort_unstable();
    q.dedup();
    q
}
