//! Benchmark generators.
//!
//! QAOA edge sampling walks the ordered pairs (i, j), i < j, in lexicographic
//! order and draws one SplitMix64 word per pair. The top 53 bits map to a
//! uniform double in [0, 1); the edge is kept when that value is below
//! `edge_prob`. Any implementation following this recipe with the same seed
//! reproduces the same instance.

use std::f64::consts::PI;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use super::{Gate, LogicalCircuit};
use crate::error::{Error, Result};

/// Cost-layer phase used for every QAOA edge.
pub const QAOA_GAMMA: f64 = PI / 3.0;
/// Mixer angle; the mixer on each qubit is H · RZ(2β) · H.
pub const QAOA_BETA: f64 = PI / 5.0;

fn unit_draw(rng: &mut SplitMix64) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Depth-1 QAOA over an Erdős–Rényi graph.
pub fn gen_qaoa(n: usize, edge_prob: f64, seed: u64) -> Result<LogicalCircuit> {
    if n < 2 {
        return Err(Error::InvalidCircuit(format!("QAOA needs at least 2 qubits, got {n}")));
    }
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::InvalidCircuit(format!("edge probability {edge_prob} outside [0, 1]")));
    }
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut gates = Vec::new();
    for q in 0..n {
        gates.push(Gate::h(gates.len(), q));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if unit_draw(&mut rng) < edge_prob {
                gates.push(Gate::cphase(gates.len(), i, j, QAOA_GAMMA));
            }
        }
    }
    for q in 0..n {
        gates.push(Gate::h(gates.len(), q));
        gates.push(Gate::rz(gates.len(), q, 2.0 * QAOA_BETA).annotated());
        gates.push(Gate::h(gates.len(), q));
    }
    LogicalCircuit::new(n, gates)
}

/// Textbook QFT without the final qubit reversal. Qubit `i` gets an H,
/// followed by CP(π/2^(j-i)) controlled by every `j > i`.
pub fn gen_qft(n: usize) -> Result<LogicalCircuit> {
    if n < 1 {
        return Err(Error::InvalidCircuit("QFT needs at least 1 qubit".into()));
    }
    let mut gates = Vec::new();
    for i in 0..n {
        gates.push(Gate::h(gates.len(), i));
        for j in (i + 1)..n {
            let theta = PI / 2f64.powi((j - i) as i32);
            gates.push(Gate::cphase(gates.len(), j, i, theta));
        }
    }
    LogicalCircuit::new(n, gates)
}
