//! Timed operation intervals shared by every executor, plus the validator.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::circuit::{Gate, GateId, LogicalCircuit, QubitId};
use crate::cycles::Cycles;
use crate::layout::Coord;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Stage {
    A,
    B,
    C,
    /// In-place single-qubit work outside any group.
    Local,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::A => "A",
            Stage::B => "B",
            Stage::C => "C",
            Stage::Local => "L",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OpKind {
    /// Multi-target CNOT over a routing tree.
    Fanout,
    /// Point-to-point CNOT.
    Cnot,
    /// Continuous-angle state injection.
    Inject,
    /// T-state route from a factory patch, held for the whole sequence.
    TRoute,
    /// T consumption from a cultivation site.
    Cultivate,
    /// Rotation with nothing to route (no T in the sequence).
    Clifford,
    H,
    S,
    /// Zero-cost frame update.
    Phase,
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OpKind::Fanout => "fanout",
            OpKind::Cnot => "cnot",
            OpKind::Inject => "inject",
            OpKind::TRoute => "t_route",
            OpKind::Cultivate => "cultivate",
            OpKind::Clifford => "clifford",
            OpKind::H => "h",
            OpKind::S => "s",
            OpKind::Phase => "phase",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub seq: usize,
    /// Operations sharing a group key form one A→B→C unit and hold their
    /// qubits for the whole unit.
    pub group: Option<usize>,
    pub stage: Stage,
    pub kind: OpKind,
    /// Every cell held for the interval, endpoint patches included.
    pub cells: Vec<Coord>,
    pub qubits: Vec<QubitId>,
    pub start: Cycles,
    pub end: Cycles,
    /// Source-circuit gates this interval implements, in whole or part.
    pub gates: Vec<GateId>,
    /// Logical operations equivalent to this interval, for replay.
    #[serde(skip)]
    pub replay: Vec<Gate>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct EventSchedule {
    pub intervals: Vec<Interval>,
    pub total_cycles: Cycles,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ViolationKind {
    CellOverlap,
    StageOrder,
    QubitLock,
    Dependency,
    Makespan,
    Missing,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.detail)
    }
}

impl EventSchedule {
    pub fn push(&mut self, mut iv: Interval) -> usize {
        iv.seq = self.intervals.len();
        self.total_cycles = self.total_cycles.max(iv.end);
        self.intervals.push(iv);
        self.intervals.len() - 1
    }

    /// Interval order used for replay and for the trace.
    pub fn sorted(&self) -> Vec<&Interval> {
        let mut v: Vec<&Interval> = self.intervals.iter().collect();
        v.sort_by_key(|iv| (iv.start, iv.end, iv.seq));
        v
    }

    pub fn replay(&self) -> Vec<Gate> {
        self.sorted()
            .into_iter()
            .flat_map(|iv| iv.replay.iter().cloned())
            .collect()
    }

    pub fn trace_csv(&self) -> String {
        let mut out = String::from("time_start,time_end,op_id,stage,kind,cells\n");
        for iv in self.sorted() {
            let cells: Vec<String> = iv.cells.iter().map(Coord::to_string).collect();
            writeln!(
                out,
                "{},{},{},{},{},{}",
                iv.start,
                iv.end,
                iv.seq,
                iv.stage,
                iv.kind,
                cells.join(";")
            )
            .expect("write to string");
        }
        out
    }

    pub fn stage_span(&self, stage: Stage) -> Cycles {
        self.intervals
            .iter()
            .filter(|iv| iv.stage == stage)
            .map(|iv| iv.end - iv.start)
            .sum()
    }
}

/// `(true, group)` for grouped intervals, `(false, seq)` otherwise.
type Unit = (bool, usize);

/// Lock unit of an interval: its group, or the interval alone.
fn unit_of(iv: &Interval) -> Unit {
    match iv.group {
        Some(g) => (true, g),
        None => (false, iv.seq),
    }
}

/// Every invariant a valid schedule must satisfy. Empty means valid.
pub fn check_schedule(schedule: &EventSchedule, circuit: &LogicalCircuit) -> Vec<Violation> {
    let mut out = Vec::new();
    let ivs = &schedule.intervals;

    // Cell exclusivity, half-open; zero-length intervals hold nothing.
    let mut by_cell: BTreeMap<Coord, Vec<&Interval>> = BTreeMap::new();
    for iv in ivs.iter().filter(|iv| iv.end > iv.start) {
        for &c in &iv.cells {
            by_cell.entry(c).or_default().push(iv);
        }
    }
    for (cell, mut list) in by_cell {
        list.sort_by_key(|iv| (iv.start, iv.end, iv.seq));
        let mut latest: Option<&Interval> = None;
        for iv in list {
            if let Some(prev) = latest {
                if prev.end > iv.start {
                    out.push(Violation {
                        kind: ViolationKind::CellOverlap,
                        detail: format!(
                            "cell {cell}: op {} [{}, {}) overlaps op {} [{}, {})",
                            prev.seq, prev.start, prev.end, iv.seq, iv.start, iv.end
                        ),
                    });
                }
            }
            if latest.is_none_or(|p| iv.end > p.end) {
                latest = Some(iv);
            }
        }
    }

    // Stage order inside each group.
    let mut groups: BTreeMap<usize, Vec<&Interval>> = BTreeMap::new();
    for iv in ivs {
        if let Some(g) = iv.group {
            groups.entry(g).or_default().push(iv);
        }
    }
    for (g, list) in &groups {
        let span = |s: Stage| {
            let v: Vec<_> = list.iter().filter(|iv| iv.stage == s).collect();
            (!v.is_empty()).then(|| {
                (
                    v.iter().map(|iv| iv.start).min().expect("nonempty"),
                    v.iter().map(|iv| iv.end).max().expect("nonempty"),
                )
            })
        };
        let (a, b, c) = (span(Stage::A), span(Stage::B), span(Stage::C));
        let pairs = [(a, b, "A", "B"), (b, c, "B", "C"), (a, c, "A", "C")];
        for (x, y, xn, yn) in pairs {
            if let (Some((_, xe)), Some((ys, _))) = (x, y) {
                if xe > ys {
                    out.push(Violation {
                        kind: ViolationKind::StageOrder,
                        detail: format!("group {g}: stage {xn} ends at {xe} after stage {yn} starts at {ys}"),
                    });
                }
            }
        }
    }

    // Qubit lock windows: one window per (unit, qubit), disjoint per qubit.
    let mut windows: HashMap<Unit, (Cycles, Cycles, Vec<QubitId>)> = HashMap::new();
    for iv in ivs {
        let w = windows
            .entry(unit_of(iv))
            .or_insert((iv.start, iv.end, Vec::new()));
        w.0 = w.0.min(iv.start);
        w.1 = w.1.max(iv.end);
        w.2.extend(iv.qubits.iter().copied());
    }
    let mut by_qubit: BTreeMap<QubitId, Vec<(Cycles, Cycles, Unit)>> = BTreeMap::new();
    for (unit, (s, e, qs)) in &windows {
        if e <= s {
            continue;
        }
        let mut qs = qs.clone();
        qs.sort_unstable();
        qs.dedup();
        for q in qs {
            by_qubit.entry(q).or_default().push((*s, *e, *unit));
        }
    }
    for (q, mut list) in by_qubit {
        list.sort();
        for w in list.windows(2) {
            if w[0].1 > w[1].0 {
                out.push(Violation {
                    kind: ViolationKind::QubitLock,
                    detail: format!(
                        "qubit {q}: unit {:?} [{}, {}) overlaps unit {:?} [{}, {})",
                        w[0].2, w[0].0, w[0].1, w[1].2, w[1].0, w[1].1
                    ),
                });
            }
        }
    }

    // Dependencies: a gate starts only after its predecessors finish.
    let n = circuit.gates.len();
    let mut first: Vec<Option<Cycles>> = vec![None; n];
    let mut last: Vec<Option<Cycles>> = vec![None; n];
    for iv in ivs {
        for &g in &iv.gates {
            if g >= n {
                out.push(Violation {
                    kind: ViolationKind::Missing,
                    detail: format!("op {} names unknown gate {g}", iv.seq),
                });
                continue;
            }
            first[g] = Some(first[g].map_or(iv.start, |f| f.min(iv.start)));
            last[g] = Some(last[g].map_or(iv.end, |l| l.max(iv.end)));
        }
    }
    for (g, slot) in first.iter().enumerate() {
        if slot.is_none() {
            out.push(Violation {
                kind: ViolationKind::Missing,
                detail: format!("gate {g} is never scheduled"),
            });
        }
    }
    for (g, preds) in circuit.predecessors().iter().enumerate() {
        let Some(gs) = first[g] else { continue };
        for &p in preds {
            if let Some(pe) = last[p] {
                if pe > gs {
                    out.push(Violation {
                        kind: ViolationKind::Dependency,
                        detail: format!("gate {g} starts at {gs} before predecessor {p} ends at {pe}"),
                    });
                }
            }
        }
    }

    let makespan = ivs.iter().map(|iv| iv.end).max().unwrap_or(Cycles::ZERO);
    if makespan != schedule.total_cycles {
        out.push(Violation {
            kind: ViolationKind::Makespan,
            detail: format!("total {} but last interval ends at {makespan}", schedule.total_cycles),
        });
    }
    out
}
