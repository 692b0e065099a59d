//! Slice-based execution: one group per synchronized window, stages A, B
//! and C back to back, and a grid reset between windows.
//!
//! In-place single-qubit gates run in their own window once they are ready.
//! Every window starts on a cleared grid; orientations and cultivation
//! clocks persist across windows.

use std::collections::BTreeSet;

use serde::Serialize;

use super::{check_input, closing, cnot, in_place_cost, is_in_place, qubits_of, target_rotation, ExecOutput, ExecStats};
use crate::circuit::{GateId, GateKind, LogicalCircuit};
use crate::cost::{merge_cost, required_orientations, rz_sequence_cost, CostConfig};
use crate::cycles::Cycles;
use crate::error::{Error, Result};
use crate::grouping::{plan_groups, GroupMember, GroupPlan};
use crate::layout::{Coord, LayoutGrid};
use crate::rotation::{eft_assign, realize_msd_group, CultivationClock, Regime, RotationSettings};
use crate::routing::{bfs_path, Blocked, SteinerFootprint};
use crate::schedule::{EventSchedule, Interval, OpKind, Stage};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SliceRecord {
    /// Index into the plan's groups; `None` for a window of in-place gates
    /// or a leftover gate routed alone (see `leftover`).
    pub group: Option<usize>,
    pub leftover: Option<GateId>,
    pub start: Cycles,
    pub a: Cycles,
    pub b: Cycles,
    pub c: Cycles,
    pub total: Cycles,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SliceRun {
    pub output: ExecOutput,
    pub plan: GroupPlan,
    pub slices: Vec<SliceRecord>,
}

impl SliceRun {
    /// Σ slice totals + one reset between consecutive windows.
    pub fn recomputed_total(&self, config: &CostConfig) -> Cycles {
        let sum: Cycles = self.slices.iter().map(|s| s.total).sum();
        let resets = self.slices.len().saturating_sub(1) as i64;
        sum + config.c_reset * resets
    }
}

/// One schedulable unit: a fan-out over a routing tree plus point-to-point
/// gates sharing its window.
struct Unit {
    group: Option<usize>,
    leftover: Option<GateId>,
    fan: Vec<GroupMember>,
    footprint: Option<SteinerFootprint>,
    p2p: Vec<(GroupMember, Vec<Coord>)>,
    gates: Vec<GateId>,
}

impl Unit {
    fn members(&self) -> Vec<GroupMember> {
        self.fan.iter().copied().chain(self.p2p.iter().map(|(m, _)| *m)).collect()
    }
}

fn full_path(grid: &LayoutGrid, m: &GroupMember) -> Result<Vec<Coord>> {
    let (a, b) = (grid.position(m.control)?, grid.position(m.target)?);
    let cells = bfs_path(grid, a, b, &Blocked::new())
        .ok_or_else(|| Error::Layout(format!("gate {} has no route on the empty grid", m.gate)))?;
    let mut p = vec![a];
    p.extend(cells);
    p.push(b);
    Ok(p)
}

fn build_units(circuit: &LogicalCircuit, plan: &GroupPlan, grid: &LayoutGrid) -> Result<Vec<Unit>> {
    let mut keyed: Vec<((usize, usize), Unit)> = Vec::new();
    for (i, g) in plan.groups.iter().enumerate() {
        let p2p = g
            .packed
            .iter()
            .map(|p| (p.member, p.route.path()))
            .collect();
        let mut gates: Vec<GateId> = g.all_members().map(|m| m.gate).collect();
        gates.sort_unstable();
        keyed.push((
            (g.layer, i),
            Unit {
                group: Some(i),
                leftover: None,
                fan: g.members.clone(),
                footprint: g.footprint.clone(),
                p2p,
                gates,
            },
        ));
    }
    for m in &plan.leftovers {
        let layer = circuit.layer_of(m.gate).unwrap_or(0);
        keyed.push((
            (layer, plan.groups.len() + m.gate),
            Unit {
                group: None,
                leftover: Some(m.gate),
                fan: Vec::new(),
                footprint: None,
                p2p: vec![(*m, full_path(grid, m)?)],
                gates: vec![m.gate],
            },
        ));
    }
    keyed.sort_by_key(|(k, _)| *k);
    Ok(keyed.into_iter().map(|(_, u)| u).collect())
}

struct SliceExec<'a> {
    grid: &'a mut LayoutGrid,
    config: &'a CostConfig,
    settings: &'a RotationSettings,
    clock: CultivationClock,
    sched: EventSchedule,
}

impl SliceExec<'_> {
    fn push(&mut self, iv: Interval) {
        self.clock.touch(iv.cells.iter().copied().filter(|&c| self.grid.is_ancilla(c)), iv.end);
        self.sched.push(iv);
    }

    /// Stage A or C: the fan-out over the tree plus every point-to-point
    /// route, all starting at `t`. Returns the span.
    fn sweep(&mut self, unit: &Unit, key: usize, stage: Stage, t: Cycles) -> Result<Cycles> {
        let mut span = Cycles::ZERO;
        let mut updates = Vec::new();
        let mut ivs = Vec::new();
        if let Some(fp) = &unit.footprint {
            let mut cost = Cycles::ZERO;
            let mut cells: BTreeSet<Coord> = fp.tree_cells.clone();
            cells.insert(fp.root);
            let mut replay = Vec::new();
            for m in &unit.fan {
                let target = self.grid.position(m.target)?;
                cells.insert(target);
                cost = cost.max(fp.path_cost(target, self.grid, self.config)?.total);
                updates.extend(required_orientations(&fp.full_path(target).expect("terminal")));
                if stage == Stage::A {
                    replay.push(cnot(m));
                } else {
                    replay.extend(closing(m));
                }
            }
            span = span.max(cost);
            ivs.push(Interval {
                seq: 0,
                group: Some(key),
                stage,
                kind: OpKind::Fanout,
                cells: cells.into_iter().collect(),
                qubits: qubits_of(&unit.fan),
                start: t,
                end: t + cost,
                gates: unit.fan.iter().map(|m| m.gate).collect(),
                replay,
            });
        }
        for (m, path) in &unit.p2p {
            let cost = merge_cost(path, self.grid, self.config)?.total;
            span = span.max(cost);
            updates.extend(required_orientations(path));
            ivs.push(Interval {
                seq: 0,
                group: Some(key),
                stage,
                kind: OpKind::Cnot,
                cells: path.clone(),
                qubits: vec![m.control, m.target],
                start: t,
                end: t + cost,
                gates: vec![m.gate],
                replay: if stage == Stage::A { vec![cnot(m)] } else { closing(m) },
            });
        }
        for iv in ivs {
            self.push(iv);
        }
        self.grid.update_orientation(&updates);
        Ok(span)
    }

    fn rotation_interval(key: usize, m: &GroupMember, kind: OpKind, cells: Vec<Coord>, start: Cycles, end: Cycles) -> Interval {
        Interval {
            seq: 0,
            group: Some(key),
            stage: Stage::B,
            kind,
            cells,
            qubits: vec![m.target],
            start,
            end,
            gates: vec![m.gate],
            replay: vec![target_rotation(m)],
        }
    }

    /// Stage B for every target of the unit, starting at `t`. Returns the span.
    fn rotations(&mut self, members: &[GroupMember], key: usize, t: Cycles) -> Result<Cycles> {
        let cfg = self.config;
        let mut end = t;
        match self.settings.regime {
            Regime::Eft => {
                let mut pending: Vec<GroupMember> = members.to_vec();
                let mut round = t;
                while !pending.is_empty() {
                    let coords = pending
                        .iter()
                        .map(|m| self.grid.position(m.target))
                        .collect::<Result<Vec<_>>>()?;
                    let sites = eft_assign(self.grid, &coords);
                    if sites.iter().all(Option::is_none) {
                        return Err(Error::Layout(format!("qubit {} has no free injection site", pending[0].target)));
                    }
                    let mut next = Vec::new();
                    for ((m, site), target) in pending.iter().zip(sites).zip(coords) {
                        match site {
                            Some(s) => {
                                let iv = Self::rotation_interval(key, m, OpKind::Inject, vec![target, s], round, round + cfg.t_rz_inject);
                                self.push(iv);
                            }
                            None => next.push(*m),
                        }
                    }
                    round += cfg.t_rz_inject;
                    pending = next;
                }
                end = round;
            }
            Regime::FftMsd => {
                let jobs = members
                    .iter()
                    .map(|m| Ok((self.grid.position(m.target)?, self.settings.decompose(-m.angle / 2.0)?)))
                    .collect::<Result<Vec<_>>>()?;
                let plan = realize_msd_group(self.grid, &jobs, cfg, self.settings.k)?;
                let maxima = plan.batch_maxima();
                let mut bt = t;
                for (bi, batch) in plan.batches.iter().enumerate() {
                    let mut updates = Vec::new();
                    for a in batch {
                        let m = &members[a.job];
                        let target = jobs[a.job].0;
                        let (kind, cells) = match &a.route {
                            Some(r) => {
                                updates.extend(r.orientation_updates());
                                (OpKind::TRoute, r.path())
                            }
                            None => (OpKind::Clifford, vec![target]),
                        };
                        self.push(Self::rotation_interval(key, m, kind, cells, bt, bt + a.tau));
                    }
                    self.grid.update_orientation(&updates);
                    bt += maxima[bi];
                    end = bt;
                    if bi + 1 < plan.batches.len() {
                        bt += cfg.c_reset;
                    }
                }
            }
            Regime::FftMsc => {
                let mut pending: Vec<GroupMember> = members.to_vec();
                let mut round = t;
                while !pending.is_empty() {
                    let mut claimed = Blocked::new();
                    let mut next = Vec::new();
                    let mut round_end = round;
                    for m in &pending {
                        let target = self.grid.position(m.target)?;
                        let dec = self.settings.decompose(-m.angle / 2.0)?;
                        if dec.n_t == 0 {
                            let e = round + rz_sequence_cost(&dec, Cycles::ZERO, cfg);
                            self.push(Self::rotation_interval(key, m, OpKind::Clifford, vec![target], round, e));
                            round_end = round_end.max(e);
                            continue;
                        }
                        let Some(site) = self.clock.choose_site(self.grid, target, &claimed) else {
                            next.push(*m);
                            continue;
                        };
                        claimed.insert(site);
                        let run = self.clock.consume(self.grid, target, site, round, &dec, cfg)?;
                        self.sched.push(Self::rotation_interval(key, m, OpKind::Cultivate, vec![target, site], round, run.end));
                        round_end = round_end.max(run.end);
                    }
                    if next.len() == pending.len() {
                        return Err(Error::Layout(format!("qubit {} has no cultivation site", pending[0].target)));
                    }
                    pending = next;
                    round = round_end;
                }
                end = round;
            }
        }
        Ok(end - t)
    }
}

/// Plan groups on the (cleared) grid and run them as slices.
pub fn execute_slices(
    circuit: &LogicalCircuit,
    grid: &mut LayoutGrid,
    config: &CostConfig,
    settings: &RotationSettings,
) -> Result<SliceRun> {
    check_input(circuit, grid)?;
    grid.release_all();
    let plan = plan_groups(circuit, grid, config)?;
    let units = build_units(circuit, &plan, grid)?;
    let preds = circuit.predecessors();
    let n = circuit.gates.len();
    let mut done = vec![false; n];
    let mut unit_done = vec![false; units.len()];
    let mut slices = Vec::new();
    let mut stats = ExecStats::default();
    let mut ex = SliceExec {
        grid,
        config,
        settings,
        clock: CultivationClock::default(),
        sched: EventSchedule::default(),
    };
    // `cursor`: earliest start of the next window; `last_end`: end of the
    // most recent window.
    let mut cursor = Cycles::ZERO;
    let mut last_end = Cycles::ZERO;
    let mut key = 0usize;
    let in_place: Vec<GateId> = circuit.gates.iter().filter(|g| is_in_place(g)).map(|g| g.id).collect();
    loop {
        // In-place gates that become ready through in-place gates alone.
        let mut local: Vec<GateId> = Vec::new();
        let mut taken = vec![false; n];
        loop {
            let before = local.len();
            for &g in &in_place {
                if !done[g] && !taken[g] && preds[g].iter().all(|&p| done[p] || taken[p]) {
                    taken[g] = true;
                    local.push(g);
                }
            }
            if local.len() == before {
                break;
            }
        }
        if !local.is_empty() {
            local.sort_unstable();
            let span_cost: Cycles = local
                .iter()
                .map(|&g| in_place_cost(&circuit.gates[g], config))
                .fold(Cycles::ZERO, Cycles::max);
            let start = if span_cost.is_zero() { last_end } else { cursor };
            let mut qclock = vec![start; circuit.num_qubits];
            for &g in &local {
                let gate = &circuit.gates[g];
                let q = gate.qubits[0];
                let s = qclock[q];
                let e = s + in_place_cost(gate, config);
                qclock[q] = e;
                let cell = ex.grid.position(q)?;
                let kind = match gate.kind {
                    GateKind::H => OpKind::H,
                    GateKind::S => OpKind::S,
                    _ => OpKind::Phase,
                };
                ex.sched.push(Interval {
                    seq: 0,
                    group: None,
                    stage: Stage::Local,
                    kind,
                    cells: vec![cell],
                    qubits: vec![q],
                    start: s,
                    end: e,
                    gates: vec![g],
                    replay: vec![gate.clone()],
                });
                done[g] = true;
            }
            let span = qclock.iter().copied().fold(start, Cycles::max) - start;
            if !span.is_zero() {
                slices.push(SliceRecord {
                    group: None,
                    leftover: None,
                    start,
                    a: Cycles::ZERO,
                    b: span,
                    c: Cycles::ZERO,
                    total: span,
                });
                last_end = start + span;
                cursor = last_end + config.c_reset;
            }
            continue;
        }
        let ready = (0..units.len()).find(|&u| {
            !unit_done[u]
                && units[u]
                    .gates
                    .iter()
                    .all(|&g| preds[g].iter().all(|&p| done[p] || units[u].gates.contains(&p)))
        });
        let Some(u) = ready else {
            if done.iter().all(|&d| d) {
                break;
            }
            let stuck: Vec<GateId> = (0..n).filter(|&g| !done[g]).take(8).collect();
            return Err(Error::Deadlock {
                time: cursor.to_string(),
                detail: format!("no ready unit; pending gates {stuck:?}"),
            });
        };
        let unit = &units[u];
        let start = cursor;
        let a = ex.sweep(unit, key, Stage::A, start)?;
        let b = ex.rotations(&unit.members(), key, start + a)?;
        let c = ex.sweep(unit, key, Stage::C, start + a + b)?;
        let total = a + b + c;
        slices.push(SliceRecord {
            group: unit.group,
            leftover: unit.leftover,
            start,
            a,
            b,
            c,
            total,
        });
        stats.stage_a_cycles += a;
        stats.stage_b_cycles += b;
        stats.stage_c_cycles += c;
        if unit.footprint.is_some() {
            stats.groups += 1;
        } else {
            stats.fallbacks += 1;
        }
        last_end = start + total;
        cursor = last_end + config.c_reset;
        key += 1;
        unit_done[u] = true;
        for &g in &unit.gates {
            done[g] = true;
        }
    }
    stats.windows = slices.len();
    let mut schedule = ex.sched;
    schedule.total_cycles = last_end;
    Ok(SliceRun {
        output: ExecOutput { schedule, stats },
        plan,
        slices,
    })
}
