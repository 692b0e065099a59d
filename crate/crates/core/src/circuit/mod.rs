//! Logical circuit representation.
//!
//! Gates are stored in program order. Consecutive controlled-phase gates are
//! collected into commuting layers; a layer stays open until one of the
//! qubits it wants to touch has seen a non-diagonal (or any single-qubit)
//! gate since the layer opened. Dependencies between gates follow from
//! shared qubits, except between members of the same layer.

mod decompose;
mod generators;
mod io;
mod synth;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use decompose::{decompose_cphase, CphaseDecomposition};
pub use generators::{gen_qaoa, gen_qft, QAOA_BETA, QAOA_GAMMA};
pub use io::{parse_angle, parse_circuit, write_circuit};
pub use synth::{synthesize_rz, RzDecomposition, RzProvider, SynthGate, SynthTable};

pub type QubitId = usize;
pub type GateId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    Cphase,
    Cnot,
    Rz,
    H,
    S,
    T,
    Measure,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Cphase | GateKind::Cnot => 2,
            _ => 1,
        }
    }

    pub fn has_angle(self) -> bool {
        matches!(self, GateKind::Cphase | GateKind::Rz)
    }

    /// Diagonal in the computational basis.
    pub fn is_diagonal(self) -> bool {
        matches!(self, GateKind::Cphase | GateKind::Rz | GateKind::S | GateKind::T)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub id: GateId,
    pub kind: GateKind,
    /// Control first for two-qubit kinds.
    pub qubits: Vec<QubitId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin: Option<GateId>,
    /// Zero-cost in-place phase bookkeeping (mixer phases, decomposition
    /// companion phases). Never routed.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub annotation: bool,
}

impl Gate {
    fn build(id: GateId, kind: GateKind, qubits: Vec<QubitId>, angle: Option<f64>) -> Self {
        Gate {
            id,
            kind,
            qubits,
            angle,
            origin: None,
            annotation: false,
        }
    }

    pub fn cphase(id: GateId, control: QubitId, target: QubitId, theta: f64) -> Self {
        Self::build(id, GateKind::Cphase, vec![control, target], Some(theta))
    }

    pub fn cnot(id: GateId, control: QubitId, target: QubitId) -> Self {
        Self::build(id, GateKind::Cnot, vec![control, target], None)
    }

    pub fn rz(id: GateId, qubit: QubitId, theta: f64) -> Self {
        Self::build(id, GateKind::Rz, vec![qubit], Some(theta))
    }

    pub fn h(id: GateId, qubit: QubitId) -> Self {
        Self::build(id, GateKind::H, vec![qubit], None)
    }

    pub fn s(id: GateId, qubit: QubitId) -> Self {
        Self::build(id, GateKind::S, vec![qubit], None)
    }

    pub fn t(id: GateId, qubit: QubitId) -> Self {
        Self::build(id, GateKind::T, vec![qubit], None)
    }

    pub fn annotated(mut self) -> Self {
        self.annotation = true;
        self
    }

    pub fn with_origin(mut self, origin: GateId) -> Self {
        self.origin = Some(origin);
        self
    }

    pub fn angle_or_zero(&self) -> f64 {
        self.angle.unwrap_or(0.0)
    }

    pub fn touches(&self, q: QubitId) -> bool {
        self.qubits.contains(&q)
    }

    pub fn validate(&self) -> Result<()> {
        if self.qubits.len() != self.kind.arity() {
            return Err(Error::InvalidGate(format!(
                "gate {} ({:?}) expects {} qubits, got {}",
                self.id,
                self.kind,
                self.kind.arity(),
                self.qubits.len()
            )));
        }
        if self.kind.arity() == 2 && self.qubits[0] == self.qubits[1] {
            return Err(Error::InvalidGate(format!(
                "gate {} acts twice on qubit {}",
                self.id, self.qubits[0]
            )));
        }
        match (self.kind.has_angle(), self.angle) {
            (true, None) => {
                return Err(Error::InvalidGate(format!("gate {} is missing its angle", self.id)))
            }
            (false, Some(_)) => {
                return Err(Error::InvalidGate(format!(
                    "gate {} ({:?}) takes no angle",
                    self.id, self.kind
                )))
            }
            (true, Some(a)) if !a.is_finite() || a <= -2.0 * PI || a > 2.0 * PI => {
                return Err(Error::InvalidGate(format!(
                    "gate {} angle {a} outside (-2pi, 2pi]",
                    self.id
                )))
            }
            _ => {}
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogicalCircuit {
    pub num_qubits: usize,
    pub gates: Vec<Gate>,
    pub commuting_layers: Vec<Vec<GateId>>,
    /// `layer_of[g]` is the commuting layer holding gate `g`, if any.
    #[serde(skip)]
    layer_of: Vec<Option<usize>>,
}

impl LogicalCircuit {
    /// Validates the gates and derives commuting layers. Gate ids must equal
    /// their position in `gates`.
    pub fn new(num_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        for (i, g) in gates.iter().enumerate() {
            if g.id != i {
                return Err(Error::InvalidCircuit(format!(
                    "gate at position {i} has id {}",
                    g.id
                )));
            }
            g.validate()?;
            if let Some(&q) = g.qubits.iter().find(|&&q| q >= num_qubits) {
                return Err(Error::InvalidCircuit(format!(
                    "gate {} uses qubit {q} but the circuit has {num_qubits}",
                    g.id
                )));
            }
        }
        let commuting_layers = Self::derive_layers(num_qubits, &gates);
        let mut layer_of = vec![None; gates.len()];
        for (li, layer) in commuting_layers.iter().enumerate() {
            for &g in layer {
                layer_of[g] = Some(li);
            }
        }
        Ok(LogicalCircuit {
            num_qubits,
            gates,
            commuting_layers,
            layer_of,
        })
    }

    fn derive_layers(num_qubits: usize, gates: &[Gate]) -> Vec<Vec<GateId>> {
        let mut layers: Vec<Vec<GateId>> = Vec::new();
        let mut open = false;
        let mut closed = vec![false; num_qubits];
        for g in gates {
            if g.kind == GateKind::Cphase {
                if !open || g.qubits.iter().any(|&q| closed[q]) {
                    layers.push(Vec::new());
                    closed.iter_mut().for_each(|c| *c = false);
                    open = true;
                }
                layers.last_mut().expect("layer opened").push(g.id);
            } else if open {
                for &q in &g.qubits {
                    closed[q] = true;
                }
            }
        }
        layers
    }

    pub fn layer_of(&self, gate: GateId) -> Option<usize> {
        self.layer_of.get(gate).copied().flatten()
    }

    pub fn same_layer(&self, a: GateId, b: GateId) -> bool {
        match (self.layer_of(a), self.layer_of(b)) {
            (Some(x), Some(y)) => x == y,
            _ => false,
        }
    }

    /// Predecessors of every gate: earlier gates sharing a qubit that are not
    /// in the same commuting layer.
    pub fn predecessors(&self) -> Vec<Vec<GateId>> {
        let mut history: Vec<Vec<GateId>> = vec![Vec::new(); self.num_qubits];
        let mut preds = vec![Vec::new(); self.gates.len()];
        for g in &self.gates {
            let mut p: Vec<GateId> = Vec::new();
            for &q in &g.qubits {
                for &h in history[q].iter().rev() {
                    if !self.same_layer(h, g.id) {
                        p.push(h);
                    }
                }
                history[q].push(g.id);
            }
            p.sort_unstable();
            p.dedup();
            preds[g.id] = p;
        }
        preds
    }

    pub fn successors(&self) -> Vec<Vec<GateId>> {
        let mut succ = vec![Vec::new(); self.gates.len()];
        for (g, ps) in self.predecessors().into_iter().enumerate() {
            for p in ps {
                succ[p].push(g);
            }
        }
        succ
    }

    pub fn cphase_count(&self) -> usize {
        self.gates.iter().filter(|g| g.kind == GateKind::Cphase).count()
    }

    pub fn count(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind == kind).count()
    }

    /// Gate kinds the executors accept: controlled phases plus in-place
    /// single-qubit H, S and RZ annotations.
    pub fn check_executable(&self) -> Result<()> {
        for g in &self.gates {
            match g.kind {
                GateKind::Cphase | GateKind::H | GateKind::S | GateKind::Rz => {}
                other => {
                    return Err(Error::InvalidCircuit(format!(
                        "gate {} has kind {other:?}, which executors do not schedule directly",
                        g.id
                    )))
                }
            }
        }
        Ok(())
    }
}
