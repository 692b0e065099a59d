use serde::{Deserialize, Serialize};

use super::{Gate, GateId, GateKind};
use crate::error::{Error, Result};

/// CNOT · RZ(-θ/2) · CNOT on the target, plus RZ(θ/2) phases on both qubits.
///
/// The two phases are in-place annotations: they commute with the whole
/// three-gate block and cost no routing, but they are needed for the block
/// to equal CP(θ) up to global phase.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CphaseDecomposition {
    pub gates: [Gate; 3],
    pub phases: [Gate; 2],
}

impl CphaseDecomposition {
    pub fn to_gates(&self) -> Vec<Gate> {
        self.gates.iter().chain(self.phases.iter()).cloned().collect()
    }

    pub fn target_angle(&self) -> f64 {
        self.gates[1].angle_or_zero()
    }
}

/// Decompose a controlled-phase gate. New gate ids start at `first_id`.
pub fn decompose_cphase(gate: &Gate, first_id: GateId) -> Result<CphaseDecomposition> {
    if gate.kind != GateKind::Cphase {
        return Err(Error::InvalidGate(format!(
            "decompose_cphase expects CPHASE, got {:?}",
            gate.kind
        )));
    }
    gate.validate()?;
    let (c, t) = (gate.qubits[0], gate.qubits[1]);
    let theta = gate.angle_or_zero();
    let origin = gate.id;
    Ok(CphaseDecomposition {
        gates: [
            Gate::cnot(first_id, c, t).with_origin(origin),
            Gate::rz(first_id + 1, t, -theta / 2.0).with_origin(origin),
            Gate::cnot(first_id + 2, c, t).with_origin(origin),
        ],
        phases: [
            Gate::rz(first_id + 3, c, theta / 2.0).with_origin(origin).annotated(),
            Gate::rz(first_id + 4, t, theta / 2.0).with_origin(origin).annotated(),
        ],
    })
}
