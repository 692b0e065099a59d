//! Dense unitaries for small circuits. Qubit `q` is bit `q` of the basis
//! index.

use num_complex::Complex64;

use crate::circuit::{Gate, GateKind};
use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 8;
pub const TOLERANCE: f64 = 1e-9;

/// Column-major dense matrix of dimension 2^n.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    pub num_qubits: usize,
    dim: usize,
    data: Vec<Complex64>,
}

impl UnitaryMatrix {
    pub fn identity(num_qubits: usize) -> Result<Self> {
        if num_qubits > MAX_QUBITS {
            return Err(Error::Oracle(format!("{num_qubits} qubits exceeds the limit of {MAX_QUBITS}")));
        }
        let dim = 1usize << num_qubits;
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        Ok(UnitaryMatrix { num_qubits, dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Entry at row `r`, column `c`.
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[c * self.dim + r]
    }

    /// Left-multiply by `gate`, i.e. apply it after everything so far.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        if let Some(&q) = gate.qubits.iter().find(|&&q| q >= self.num_qubits) {
            return Err(Error::Oracle(format!("gate {} acts on qubit {q} outside the register", gate.id)));
        }
        let dim = self.dim;
        for col in self.data.chunks_mut(dim) {
            apply_to_state(col, gate)?;
        }
        Ok(())
    }

    pub fn max_deviation_from_identity(&self) -> f64 {
        let mut u_dag_u = 0.0f64;
        for i in 0..self.dim {
            for j in 0..self.dim {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..self.dim {
                    s += self.get(k, i).conj() * self.get(k, j);
                }
                let want = if i == j { 1.0 } else { 0.0 };
                u_dag_u = u_dag_u.max((s - want).norm());
            }
        }
        u_dag_u
    }
}

fn rz_phases(theta: f64) -> (Complex64, Complex64) {
    (Complex64::from_polar(1.0, -theta / 2.0), Complex64::from_polar(1.0, theta / 2.0))
}

fn apply_to_state(psi: &mut [Complex64], gate: &Gate) -> Result<()> {
    let bit = |q: usize| 1usize << q;
    match gate.kind {
        GateKind::H => {
            let m = bit(gate.qubits[0]);
            let s = std::f64::consts::FRAC_1_SQRT_2;
            for i in 0..psi.len() {
                if i & m == 0 {
                    let (a, b) = (psi[i], psi[i | m]);
                    psi[i] = (a + b) * s;
                    psi[i | m] = (a - b) * s;
                }
            }
        }
        GateKind::S | GateKind::T => {
            let m = bit(gate.qubits[0]);
            let ph = if gate.kind == GateKind::S {
                Complex64::new(0.0, 1.0)
            } else {
                Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)
            };
            for (i, a) in psi.iter_mut().enumerate() {
                if i & m != 0 {
                    *a *= ph;
                }
            }
        }
        GateKind::Rz => {
            let m = bit(gate.qubits[0]);
            let (p0, p1) = rz_phases(gate.angle_or_zero());
            for (i, a) in psi.iter_mut().enumerate() {
                *a *= if i & m == 0 { p0 } else { p1 };
            }
        }
        GateKind::Cphase => {
            let m = bit(gate.qubits[0]) | bit(gate.qubits[1]);
            let ph = Complex64::from_polar(1.0, gate.angle_or_zero());
            for (i, a) in psi.iter_mut().enumerate() {
                if i & m == m {
                    *a *= ph;
                }
            }
        }
        GateKind::Cnot => {
            let (c, t) = (bit(gate.qubits[0]), bit(gate.qubits[1]));
            for i in 0..psi.len() {
                if i & c != 0 && i & t == 0 {
                    psi.swap(i, i | t);
                }
            }
        }
        GateKind::Measure => {
            return Err(Error::Oracle(format!("gate {} is a measurement", gate.id)));
        }
    }
    Ok(())
}

/// Ordered product of the gates, first gate applied first.
pub fn circuit_unitary(num_qubits: usize, gates: &[Gate]) -> Result<UnitaryMatrix> {
    let mut u = UnitaryMatrix::identity(num_qubits)?;
    for g in gates {
        u.apply(g)?;
    }
    Ok(u)
}

/// Largest elementwise difference after aligning the global phase on the
/// first entry of `a` with magnitude above 1e-6.
pub fn phase_aligned_deviation(a: &UnitaryMatrix, b: &UnitaryMatrix) -> Result<f64> {
    if a.dim != b.dim {
        return Err(Error::Oracle("dimension mismatch".into()));
    }
    let pivot = a
        .data
        .iter()
        .position(|z| z.norm() > 1e-6)
        .ok_or_else(|| Error::Oracle("zero matrix".into()))?;
    if b.data[pivot].norm() <= 1e-6 {
        return Ok(f64::INFINITY);
    }
    let phase = b.data[pivot] / a.data[pivot];
    let phase = phase / phase.norm();
    Ok(a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x * phase - y).norm())
        .fold(0.0, f64::max))
}

pub fn equal_up_to_phase(a: &UnitaryMatrix, b: &UnitaryMatrix) -> Result<bool> {
    Ok(phase_aligned_deviation(a, b)? < TOLERANCE)
}

/// Whether two gates commute, checked on their joint support.
pub fn check_commute(g1: &Gate, g2: &Gate) -> Result<bool> {
    let mut support: Vec<usize> = g1.qubits.iter().chain(&g2.qubits).copied().collect();
    support.sort_unstable();
    support.dedup();
    if support.len() > MAX_QUBITS {
        return Err(Error::Oracle("joint support too large".into()));
    }
    let remap = |g: &Gate| {
        let mut h = g.clone();
        h.qubits = g
            .qubits
            .iter()
            .map(|q| support.binary_search(q).expect("in support"))
            .collect();
        h
    };
    let (a, b) = (remap(g1), remap(g2));
    let ab = circuit_unitary(support.len(), &[a.clone(), b.clone()])?;
    let ba = circuit_unitary(support.len(), &[b, a])?;
    Ok(ab
        .data
        .iter()
        .zip(&ba.data)
        .all(|(x, y)| (x - y).norm() < TOLERANCE))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::circuit::decompose_cphase;

    #[test]
    fn empty_is_identity() {
        let u = circuit_unitary(3, &[]).unwrap();
        assert_eq!(u, UnitaryMatrix::identity(3).unwrap());
    }

    #[test]
    fn cnot_is_an_involution() {
        let g = Gate::cnot(0, 0, 1);
        let u = circuit_unitary(2, &[g.clone(), g]).unwrap();
        assert!(equal_up_to_phase(&u, &UnitaryMatrix::identity(2).unwrap()).unwrap());
    }

    #[test]
    fn decomposition_matches_cphase() {
        for theta in [PI, PI / 3.0, -PI / 8.0, 2.0] {
            let cp = Gate::cphase(0, 0, 1, theta);
            let dec = decompose_cphase(&cp, 1).unwrap();
            let want = circuit_unitary(2, &[cp]).unwrap();
            let got = circuit_unitary(2, &dec.to_gates()).unwrap();
            assert!(phase_aligned_deviation(&want, &got).unwrap() < TOLERANCE);
            // Without the phase annotations the block is not CP.
            let bare = circuit_unitary(2, &dec.gates).unwrap();
            assert!(!equal_up_to_phase(&want, &bare).unwrap());
        }
    }

    #[test]
    fn unitarity() {
        let gates = [Gate::h(0, 0), Gate::cphase(1, 0, 2, 0.7), Gate::s(2, 1), Gate::cnot(3, 2, 1), Gate::rz(4, 0, 0.3)];
        let u = circuit_unitary(3, &gates).unwrap();
        assert!(u.max_deviation_from_identity() < TOLERANCE);
    }

    #[test]
    fn commutation() {
        assert!(check_commute(&Gate::cphase(0, 0, 1, 0.4), &Gate::cphase(1, 0, 2, 1.1)).unwrap());
        assert!(!check_commute(&Gate::cnot(0, 0, 1), &Gate::cnot(1, 1, 2)).unwrap());
        let h = Gate::h(0, 5);
        assert!(check_commute(&h, &h).unwrap());
    }

    #[test]
    fn oversize_is_rejected() {
        assert!(UnitaryMatrix::identity(9).is_err());
    }
}
