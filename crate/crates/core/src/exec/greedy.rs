//! Round-based greedy baseline. Each controlled phase becomes a CNOT, a
//! rotation and a second CNOT, routed as three dependent operations, and
//! the gate holds both qubits from the first CNOT to the second. Every
//! round starts on a cleared grid, commits in-place work first, then routes
//! the frontier in ascending MRV order with the first feasible path, and
//! lasts as long as its slowest commit.

use serde::Serialize;

use super::{check_input, closing, cnot, in_place_cost, member_of, target_rotation, ExecOutput, ExecStats};
use crate::circuit::{GateKind, LogicalCircuit, QubitId};
use crate::cost::{merge_cost, required_orientations, CostConfig};
use crate::cycles::Cycles;
use crate::error::{Error, Result};
use crate::grouping::GroupMember;
use crate::layout::{Coord, LayoutGrid};
use crate::rotation::{eft_site, msd_tau, nearest_routable_patch, CultivationClock, Regime, RotationSettings};
use crate::routing::{bfs_cells, Blocked};
use crate::schedule::{EventSchedule, Interval, OpKind, Stage};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Step {
    First,
    Rotate,
    Second,
    InPlace,
}

#[derive(Clone, Debug)]
struct Op {
    step: Step,
    gate: usize,
    member: Option<GroupMember>,
    preds: Vec<usize>,
}

/// Ascending lexicographic priority: most constrained first, then the
/// longest minimum distance, then the longest remaining chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct MrvKey {
    pub num_feasible_pairs: usize,
    pub neg_min_distance: i64,
    pub neg_criticality: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GreedyRound {
    pub index: usize,
    pub start: Cycles,
    /// (op id, cost) in commit order.
    pub committed: Vec<(usize, Cycles)>,
    pub latency: Cycles,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GreedyRun {
    pub output: ExecOutput,
    pub rounds: Vec<GreedyRound>,
    pub total: Cycles,
}

impl GreedyRun {
    /// Σ L_k + (K − 1) · c_reset.
    pub fn recomputed_total(&self, config: &CostConfig) -> Cycles {
        let sum: Cycles = self.rounds.iter().map(|r| r.latency).sum();
        sum + config.c_reset * self.rounds.len().saturating_sub(1) as i64
    }
}

fn free_adjacent(grid: &LayoutGrid, c: Coord, blocked: &Blocked) -> Vec<Coord> {
    grid.neighbors(c)
        .filter(|&n| grid.is_free_ancilla(n) && !blocked.contains(&n))
        .collect()
}

/// Attachment pairs for a CNOT between two patches, by increasing
/// Manhattan distance, ties lexicographic.
pub fn endpoint_pairs(grid: &LayoutGrid, a: Coord, b: Coord, blocked: &Blocked) -> Vec<(Coord, Coord)> {
    let (fa, fb) = (free_adjacent(grid, a, blocked), free_adjacent(grid, b, blocked));
    let mut pairs: Vec<(Coord, Coord)> = fa.iter().flat_map(|&x| fb.iter().map(move |&y| (x, y))).collect();
    pairs.sort_by_key(|&(x, y)| (x.manhattan(y), x, y));
    pairs
}

/// MRV key of a CNOT between patches `a` and `b` under the free mask.
pub fn compute_mrv_key(grid: &LayoutGrid, a: Coord, b: Coord, blocked: &Blocked, criticality: usize) -> MrvKey {
    let pairs = endpoint_pairs(grid, a, b, blocked);
    MrvKey {
        num_feasible_pairs: pairs.len(),
        neg_min_distance: -(pairs.first().map_or(0, |&(x, y)| x.manhattan(y)) as i64),
        neg_criticality: -(criticality as i64),
    }
}

fn build_ops(circuit: &LogicalCircuit) -> Vec<Op> {
    let preds = circuit.predecessors();
    let mut last_op = vec![0usize; circuit.gates.len()];
    let mut ops: Vec<Op> = Vec::new();
    for g in &circuit.gates {
        let p: Vec<usize> = preds[g.id].iter().map(|&p| last_op[p]).collect();
        if g.kind == GateKind::Cphase {
            let m = member_of(g);
            let first = ops.len();
            ops.push(Op { step: Step::First, gate: g.id, member: Some(m), preds: p });
            ops.push(Op { step: Step::Rotate, gate: g.id, member: Some(m), preds: vec![first] });
            ops.push(Op { step: Step::Second, gate: g.id, member: Some(m), preds: vec![first + 1] });
            last_op[g.id] = first + 2;
        } else {
            last_op[g.id] = ops.len();
            ops.push(Op { step: Step::InPlace, gate: g.id, member: None, preds: p });
        }
    }
    ops
}

/// Longest chain of ops starting at each op, counted in ops.
fn criticality(ops: &[Op]) -> Vec<usize> {
    let mut succ = vec![Vec::new(); ops.len()];
    for (i, op) in ops.iter().enumerate() {
        for &p in &op.preds {
            succ[p].push(i);
        }
    }
    let mut k = vec![1usize; ops.len()];
    for i in (0..ops.len()).rev() {
        k[i] = 1 + succ[i].iter().map(|&s| k[s]).max().unwrap_or(0);
    }
    k
}

pub fn greedy_compile(
    circuit: &LogicalCircuit,
    grid: &mut LayoutGrid,
    config: &CostConfig,
    settings: &RotationSettings,
) -> Result<GreedyRun> {
    check_input(circuit, grid)?;
    grid.release_all();
    let ops = build_ops(circuit);
    let kappa = criticality(&ops);
    let mut done = vec![false; ops.len()];
    let mut lock: Vec<Option<usize>> = vec![None; circuit.num_qubits];
    let mut clock = CultivationClock::default();
    let mut sched = EventSchedule::default();
    let mut rounds: Vec<GreedyRound> = Vec::new();
    let mut stats = ExecStats::default();
    let mut remaining = ops.len();
    let mut prev_end = Cycles::ZERO;
    let mut start = Cycles::ZERO;

    let ready = |i: usize, done: &[bool]| ops[i].preds.iter().all(|&p| done[p]);
    let unlocked = |q: QubitId, gate: usize, lock: &[Option<usize>]| lock[q].is_none_or(|h| h == gate);

    while remaining > 0 {
        // Zero-cost frame updates ride along at the end of the last round.
        loop {
            let before = remaining;
            for i in 0..ops.len() {
                let g = &circuit.gates[ops[i].gate];
                if !done[i]
                    && ops[i].step == Step::InPlace
                    && in_place_cost(g, config).is_zero()
                    && ready(i, &done)
                    && unlocked(g.qubits[0], usize::MAX, &lock)
                {
                    sched.push(Interval {
                        seq: 0,
                        group: None,
                        stage: Stage::Local,
                        kind: OpKind::Phase,
                        cells: vec![grid.position(g.qubits[0])?],
                        qubits: vec![g.qubits[0]],
                        start: prev_end,
                        end: prev_end,
                        gates: vec![g.id],
                        replay: vec![g.clone()],
                    });
                    done[i] = true;
                    remaining -= 1;
                }
            }
            if remaining == before {
                break;
            }
        }
        if remaining == 0 {
            break;
        }
        let frontier: Vec<usize> = (0..ops.len()).filter(|&i| !done[i] && ready(i, &done)).collect();
        let mut blocked = Blocked::new();
        let mut committed: Vec<(usize, Cycles)> = Vec::new();
        let mut updates = Vec::new();
        let mut touched: Vec<(Vec<Coord>, Cycles)> = Vec::new();

        // In-place work first.
        for &i in &frontier {
            if ops[i].step != Step::InPlace {
                continue;
            }
            let g = &circuit.gates[ops[i].gate];
            let q = g.qubits[0];
            if !unlocked(q, usize::MAX, &lock) {
                continue;
            }
            let cost = in_place_cost(g, config);
            let cell = grid.position(q)?;
            blocked.insert(cell);
            sched.push(Interval {
                seq: 0,
                group: None,
                stage: Stage::Local,
                kind: if g.kind == GateKind::S { OpKind::S } else { OpKind::H },
                cells: vec![cell],
                qubits: vec![q],
                start,
                end: start + cost,
                gates: vec![g.id],
                replay: vec![g.clone()],
            });
            committed.push((i, cost));
        }

        // Routed work in MRV order.
        let mut routed: Vec<(MrvKey, usize)> = Vec::new();
        for &i in &frontier {
            let Some(m) = ops[i].member else { continue };
            if !unlocked(m.control, m.gate, &lock) || !unlocked(m.target, m.gate, &lock) {
                continue;
            }
            let t = grid.position(m.target)?;
            let key = match ops[i].step {
                Step::First | Step::Second => compute_mrv_key(grid, grid.position(m.control)?, t, &blocked, kappa[i]),
                _ => MrvKey {
                    num_feasible_pairs: free_adjacent(grid, t, &blocked).len(),
                    neg_min_distance: 0,
                    neg_criticality: -(kappa[i] as i64),
                },
            };
            routed.push((key, i));
        }
        routed.sort();
        for (key, i) in routed {
            if key.num_feasible_pairs == 0 {
                continue;
            }
            let m = ops[i].member.expect("routed op has a member");
            if !unlocked(m.control, m.gate, &lock) || !unlocked(m.target, m.gate, &lock) {
                continue;
            }
            let (c, t) = (grid.position(m.control)?, grid.position(m.target)?);
            if blocked.contains(&c) || blocked.contains(&t) {
                continue;
            }
            let step = ops[i].step;
            let placed: Option<(Vec<Coord>, Cycles, OpKind, Stage)> = match step {
                Step::First | Step::Second => endpoint_pairs(grid, c, t, &blocked)
                    .into_iter()
                    .find_map(|(x, y)| bfs_cells(grid, x, y, &blocked))
                    .map(|cells| {
                        let mut path = vec![c];
                        path.extend(cells);
                        path.push(t);
                        let cost = merge_cost(&path, grid, config).map(|p| p.total);
                        (path, cost)
                    })
                    .map(|(path, cost)| {
                        let stage = if step == Step::First { Stage::A } else { Stage::C };
                        cost.map(|cost| (path, cost, OpKind::Cnot, stage))
                    })
                    .transpose()?,
                Step::Rotate => match settings.regime {
                    Regime::Eft => eft_site(grid, t, &blocked).map(|s| (vec![t, s], config.t_rz_inject, OpKind::Inject, Stage::B)),
                    Regime::FftMsd => {
                        let dec = settings.decompose(-m.angle / 2.0)?;
                        if dec.n_t == 0 {
                            Some((vec![t], msd_tau(&dec, None, config), OpKind::Clifford, Stage::B))
                        } else {
                            nearest_routable_patch(grid, t, &blocked, config)
                                .map(|r| (r.path(), msd_tau(&dec, Some(&r), config), OpKind::TRoute, Stage::B))
                        }
                    }
                    Regime::FftMsc => {
                        let dec = settings.decompose(-m.angle / 2.0)?;
                        if dec.n_t == 0 {
                            Some((vec![t], msd_tau(&dec, None, config), OpKind::Clifford, Stage::B))
                        } else {
                            match clock.choose_site(grid, t, &blocked) {
                                Some(site) => {
                                    let run = clock.consume(grid, t, site, start, &dec, config)?;
                                    Some((vec![t, site], run.end - start, OpKind::Cultivate, Stage::B))
                                }
                                None => None,
                            }
                        }
                    }
                },
                Step::InPlace => unreachable!("in-place ops are not routed"),
            };
            let Some((cells, cost, kind, stage)) = placed else { continue };
            blocked.extend(cells.iter().copied());
            if matches!(kind, OpKind::Cnot | OpKind::TRoute) {
                updates.extend(required_orientations(&cells));
            }
            if kind != OpKind::Cultivate {
                touched.push((cells.iter().copied().filter(|&x| grid.is_ancilla(x)).collect(), start + cost));
            }
            if step == Step::First {
                lock[m.control] = Some(m.gate);
                lock[m.target] = Some(m.gate);
            }
            let replay = match step {
                Step::First => vec![cnot(&m)],
                Step::Rotate => vec![target_rotation(&m)],
                _ => closing(&m),
            };
            sched.push(Interval {
                seq: 0,
                group: Some(m.gate),
                stage,
                kind,
                cells,
                qubits: if stage == Stage::B { vec![m.target] } else { vec![m.control, m.target] },
                start,
                end: start + cost,
                gates: vec![m.gate],
                replay,
            });
            match stage {
                Stage::A => stats.stage_a_cycles += cost,
                Stage::B => stats.stage_b_cycles += cost,
                _ => stats.stage_c_cycles += cost,
            }
            committed.push((i, cost));
        }
        if committed.is_empty() {
            let stuck = frontier.first().map(|&i| ops[i].gate);
            return Err(match stuck {
                Some(g) => Error::Layout(format!("gate {g} cannot be routed on a cleared grid")),
                None => Error::Deadlock {
                    time: start.to_string(),
                    detail: "no executable operation".into(),
                },
            });
        }
        let latency = committed.iter().map(|&(_, c)| c).fold(Cycles::ZERO, Cycles::max);
        for &(i, _) in &committed {
            done[i] = true;
            remaining -= 1;
            if ops[i].step == Step::Second {
                let m = ops[i].member.expect("member");
                lock[m.control] = None;
                lock[m.target] = None;
            }
        }
        grid.update_orientation(&updates);
        for (cells, t) in touched {
            clock.touch(cells, t);
        }
        rounds.push(GreedyRound {
            index: rounds.len(),
            start,
            committed,
            latency,
        });
        prev_end = start + latency;
        start = prev_end + config.c_reset;
    }
    let total = prev_end;
    sched.total_cycles = total;
    stats.windows = rounds.len();
    stats.groups = circuit.cphase_count();
    Ok(GreedyRun {
        output: ExecOutput { schedule: sched, stats },
        rounds,
        total,
    })
}
