//! Discrete-event executor. Groups are formed on the fly from ready gates
//! and their stages overlap freely: at every decision instant completions
//! are applied first, then work is dispatched in the order stage C, stage
//! B, in-place gates, stage A.
//!
//! A group locks its qubits from the start of stage A to the end of stage
//! C. Stage B starts per target once the whole of stage A has finished.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use super::{check_input, closing, cnot, in_place_cost, is_in_place, qubits_of, target_rotation, ExecOutput, ExecStats};
use crate::circuit::{GateId, GateKind, LogicalCircuit, QubitId};
use crate::cost::{merge_cost, required_orientations, rz_sequence_cost, CostConfig};
use crate::cycles::Cycles;
use crate::error::{Error, Result};
use crate::grouping::{form_from_pool, GroupMember};
use crate::layout::{Coord, LayoutGrid, Orientation};
use crate::rotation::{eft_site, msd_tau, select_ms_patch, CultivationClock, Regime, RotationSettings};
use crate::routing::{bfs_path, steiner_tree, Blocked, SteinerFootprint};
use crate::schedule::{EventSchedule, Interval, OpKind, Stage};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    A,
    B,
    C,
}

struct Group {
    key: usize,
    control: QubitId,
    members: Vec<GroupMember>,
    footprint: SteinerFootprint,
    phase: Phase,
    /// Members whose rotation has not been dispatched yet.
    b_waiting: Vec<usize>,
    b_left: usize,
    c_started: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Kind {
    Route,
    Rotation,
    Local,
}

enum Active {
    Stage(usize),
    Rotation(usize),
    Local(GateId),
}

struct Running {
    what: Active,
    cells: Vec<Coord>,
    updates: Vec<(Coord, Orientation)>,
    /// Cells whose cultivation restarts at completion.
    touch: Vec<Coord>,
}

struct Sim<'a> {
    circuit: &'a LogicalCircuit,
    grid: &'a mut LayoutGrid,
    config: &'a CostConfig,
    settings: &'a RotationSettings,
    clock: CultivationClock,
    sched: EventSchedule,
    now: Cycles,
    queue: BinaryHeap<Reverse<(Cycles, Kind, usize)>>,
    running: BTreeMap<usize, Running>,
    groups: Vec<Group>,
    lock: Vec<bool>,
    gate_done: Vec<bool>,
    assigned: Vec<bool>,
    preds_left: Vec<usize>,
    succ: Vec<Vec<GateId>>,
    stats: ExecStats,
}

impl Sim<'_> {
    fn start(&mut self, iv: Interval, kind: Kind, what: Active, updates: Vec<(Coord, Orientation)>) -> Result<()> {
        let seq = self.sched.intervals.len();
        self.grid.reserve_cells(&iv.cells, seq as u64)?;
        let touch = iv.cells.iter().copied().filter(|&c| self.grid.is_ancilla(c)).collect();
        self.queue.push(Reverse((iv.end, kind, seq)));
        self.running.insert(
            seq,
            Running {
                what,
                cells: iv.cells.clone(),
                updates,
                touch,
            },
        );
        self.sched.push(iv);
        Ok(())
    }

    fn finish_gate(&mut self, g: GateId) {
        self.gate_done[g] = true;
        for i in 0..self.succ[g].len() {
            let s = self.succ[g][i];
            self.preds_left[s] -= 1;
        }
    }

    fn complete(&mut self, seq: usize) {
        let r = self.running.remove(&seq).expect("running op");
        self.grid.release_cells(&r.cells, seq as u64);
        self.grid.update_orientation(&r.updates);
        self.clock.touch(r.touch, self.now);
        match r.what {
            Active::Stage(gi) => {
                let g = &mut self.groups[gi];
                if g.phase == Phase::A {
                    g.phase = Phase::B;
                } else {
                    for q in qubits_of(&g.members) {
                        self.lock[q] = false;
                    }
                    let gates: Vec<GateId> = g.members.iter().map(|m| m.gate).collect();
                    for id in gates {
                        self.finish_gate(id);
                    }
                }
            }
            Active::Rotation(gi) => {
                let g = &mut self.groups[gi];
                g.b_left -= 1;
                if g.b_left == 0 {
                    g.phase = Phase::C;
                }
            }
            Active::Local(id) => {
                let q = self.circuit.gates[id].qubits[0];
                self.lock[q] = false;
                self.finish_gate(id);
            }
        }
    }

    fn sweep_interval(&self, gi: usize, stage: Stage, fp: &SteinerFootprint) -> Result<(Interval, Vec<(Coord, Orientation)>)> {
        let g = &self.groups[gi];
        let mut cost = Cycles::ZERO;
        let mut cells: BTreeSet<Coord> = fp.tree_cells.clone();
        cells.insert(fp.root);
        let mut updates = Vec::new();
        let mut replay = Vec::new();
        for m in &g.members {
            let t = self.grid.position(m.target)?;
            cells.insert(t);
            let path = fp
                .full_path(t)
                .ok_or_else(|| Error::Layout(format!("target {t} missing from footprint")))?;
            cost = cost.max(merge_cost(&path, self.grid, self.config)?.total);
            updates.extend(required_orientations(&path));
            if stage == Stage::A {
                replay.push(cnot(m));
            } else {
                replay.extend(closing(m));
            }
        }
        let kind = if g.members.len() == 1 { OpKind::Cnot } else { OpKind::Fanout };
        Ok((
            Interval {
                seq: 0,
                group: Some(g.key),
                stage,
                kind,
                cells: cells.into_iter().collect(),
                qubits: qubits_of(&g.members),
                start: self.now,
                end: self.now + cost,
                gates: g.members.iter().map(|m| m.gate).collect(),
                replay,
            },
            updates,
        ))
    }

    fn dispatch_c(&mut self) -> Result<bool> {
        let mut any = false;
        for gi in 0..self.groups.len() {
            if self.groups[gi].phase != Phase::C || self.groups[gi].c_started {
                continue;
            }
            let g = &self.groups[gi];
            let free = g.footprint.tree_cells.iter().all(|&c| self.grid.is_free_ancilla(c));
            let fp = if free {
                g.footprint.clone()
            } else {
                let root = self.grid.position(g.control)?;
                let terms = g
                    .members
                    .iter()
                    .map(|m| self.grid.position(m.target))
                    .collect::<Result<Vec<_>>>()?;
                match steiner_tree(self.grid, root, &terms, &Blocked::new()) {
                    Some(fp) => fp,
                    None => continue,
                }
            };
            let (iv, updates) = self.sweep_interval(gi, Stage::C, &fp)?;
            self.stats.stage_c_cycles += iv.end - iv.start;
            self.groups[gi].footprint = fp;
            self.groups[gi].c_started = true;
            self.start(iv, Kind::Route, Active::Stage(gi), updates)?;
            any = true;
        }
        Ok(any)
    }

    fn dispatch_b(&mut self) -> Result<bool> {
        let mut any = false;
        for gi in 0..self.groups.len() {
            if self.groups[gi].phase != Phase::B {
                continue;
            }
            let waiting = self.groups[gi].b_waiting.clone();
            let mut still = Vec::new();
            for mi in waiting {
                let m = self.groups[gi].members[mi];
                let t = self.grid.position(m.target)?;
                let placed = self.place_rotation(&m, t)?;
                let Some((kind, cells, end, updates)) = placed else {
                    still.push(mi);
                    continue;
                };
                let iv = Interval {
                    seq: 0,
                    group: Some(self.groups[gi].key),
                    stage: Stage::B,
                    kind,
                    cells,
                    qubits: vec![m.target],
                    start: self.now,
                    end,
                    gates: vec![m.gate],
                    replay: vec![target_rotation(&m)],
                };
                self.stats.stage_b_cycles += end - self.now;
                let cultivate = kind == OpKind::Cultivate;
                let seq = self.sched.intervals.len();
                self.start(iv, Kind::Rotation, Active::Rotation(gi), updates)?;
                if cultivate {
                    // The site's clock was set by the consumptions themselves.
                    self.running.get_mut(&seq).expect("just started").touch.clear();
                }
                any = true;
            }
            self.groups[gi].b_waiting = still;
        }
        Ok(any)
    }

    /// Kind, held cells, end time and orientation updates for one rotation,
    /// or `None` when it has to wait.
    #[allow(clippy::type_complexity)]
    fn place_rotation(&mut self, m: &GroupMember, t: Coord) -> Result<Option<(OpKind, Vec<Coord>, Cycles, Vec<(Coord, Orientation)>)>> {
        let free = Blocked::new();
        if !self.grid.occupant(t).is_none() {
            return Ok(None);
        }
        Ok(match self.settings.regime {
            Regime::Eft => eft_site(self.grid, t, &free).map(|s| (OpKind::Inject, vec![t, s], self.now + self.config.t_rz_inject, Vec::new())),
            Regime::FftMsd => {
                let dec = self.settings.decompose(-m.angle / 2.0)?;
                if dec.n_t == 0 {
                    Some((OpKind::Clifford, vec![t], self.now + msd_tau(&dec, None, self.config), Vec::new()))
                } else {
                    select_ms_patch(self.grid, t, &free, self.config, self.settings.k)?.map(|sel| {
                        let tau = msd_tau(&dec, Some(&sel.route), self.config);
                        (OpKind::TRoute, sel.route.path(), self.now + tau, sel.route.orientation_updates())
                    })
                }
            }
            Regime::FftMsc => {
                let dec = self.settings.decompose(-m.angle / 2.0)?;
                if dec.n_t == 0 {
                    let e = self.now + rz_sequence_cost(&dec, Cycles::ZERO, self.config);
                    Some((OpKind::Clifford, vec![t], e, Vec::new()))
                } else {
                    match self.clock.choose_site(self.grid, t, &free) {
                        Some(site) => {
                            let run = self.clock.consume(self.grid, t, site, self.now, &dec, self.config)?;
                            Some((OpKind::Cultivate, vec![t, site], run.end, Vec::new()))
                        }
                        None => None,
                    }
                }
            }
        })
    }

    fn dispatch_local(&mut self) -> Result<bool> {
        let mut any = false;
        for id in 0..self.circuit.gates.len() {
            let g = &self.circuit.gates[id];
            if self.assigned[id] || !is_in_place(g) || self.preds_left[id] > 0 {
                continue;
            }
            let q = g.qubits[0];
            let cell = self.grid.position(q)?;
            if self.lock[q] || self.grid.occupant(cell).is_some() {
                continue;
            }
            let cost = in_place_cost(g, self.config);
            let kind = match g.kind {
                GateKind::H => OpKind::H,
                GateKind::S => OpKind::S,
                _ => OpKind::Phase,
            };
            let iv = Interval {
                seq: 0,
                group: None,
                stage: Stage::Local,
                kind,
                cells: vec![cell],
                qubits: vec![q],
                start: self.now,
                end: self.now + cost,
                gates: vec![id],
                replay: vec![g.clone()],
            };
            self.assigned[id] = true;
            self.lock[q] = true;
            self.start(iv, Kind::Local, Active::Local(id), Vec::new())?;
            any = true;
        }
        Ok(any)
    }

    fn dispatch_a(&mut self) -> Result<bool> {
        let mut any = false;
        let mut pools: BTreeMap<usize, Vec<(GateId, QubitId, QubitId, f64)>> = BTreeMap::new();
        for g in &self.circuit.gates {
            if g.kind != GateKind::Cphase || self.assigned[g.id] || self.preds_left[g.id] > 0 {
                continue;
            }
            if g.qubits.iter().any(|&q| self.lock[q]) {
                continue;
            }
            let layer = self.circuit.layer_of(g.id).unwrap_or(usize::MAX);
            pools.entry(layer).or_default().push((g.id, g.qubits[0], g.qubits[1], g.angle_or_zero()));
        }
        for pool in pools.values() {
            let mut l = std::collections::HashMap::new();
            for &(id, a, b, _) in pool {
                let (pa, pb) = (self.grid.position(a)?, self.grid.position(b)?);
                let cost = match bfs_path(self.grid, pa, pb, &Blocked::new()) {
                    Some(cells) => {
                        let mut p = vec![pa];
                        p.extend(cells);
                        p.push(pb);
                        merge_cost(&p, self.grid, self.config)?.total
                    }
                    None => Cycles::ZERO,
                };
                l.insert(id, cost);
            }
            for formed in form_from_pool(pool, &l) {
                if self.lock[formed.control] {
                    continue;
                }
                let root = self.grid.position(formed.control)?;
                if self.grid.occupant(root).is_some() {
                    continue;
                }
                let mut fp = SteinerFootprint::empty(root);
                let mut members = Vec::new();
                let mut claimed = Blocked::new();
                for m in &formed.members {
                    if self.lock[m.target] {
                        continue;
                    }
                    let t = self.grid.position(m.target)?;
                    if self.grid.occupant(t).is_some() {
                        continue;
                    }
                    // Validated one target at a time against live occupancy.
                    let mut trial = fp.clone();
                    if trial.attach(self.grid, t, &claimed).is_some() {
                        fp = trial;
                        claimed.insert(t);
                        members.push(*m);
                    }
                }
                if members.is_empty() {
                    continue;
                }
                let key = self.groups.len();
                let n = members.len();
                self.groups.push(Group {
                    key,
                    control: formed.control,
                    members,
                    footprint: fp.clone(),
                    phase: Phase::A,
                    b_waiting: (0..n).collect(),
                    b_left: n,
                    c_started: false,
                });
                let gi = self.groups.len() - 1;
                for m in &self.groups[gi].members {
                    self.assigned[m.gate] = true;
                }
                for q in qubits_of(&self.groups[gi].members) {
                    self.lock[q] = true;
                }
                if n == 1 {
                    self.stats.fallbacks += 1;
                } else {
                    self.stats.groups += 1;
                }
                let (iv, updates) = self.sweep_interval(gi, Stage::A, &fp)?;
                self.stats.stage_a_cycles += iv.end - iv.start;
                self.start(iv, Kind::Route, Active::Stage(gi), updates)?;
                any = true;
            }
        }
        Ok(any)
    }
}

pub fn execute_pipeline(
    circuit: &LogicalCircuit,
    grid: &mut LayoutGrid,
    config: &CostConfig,
    settings: &RotationSettings,
) -> Result<ExecOutput> {
    check_input(circuit, grid)?;
    grid.release_all();
    let preds = circuit.predecessors();
    let mut succ = vec![Vec::new(); circuit.gates.len()];
    for (g, ps) in preds.iter().enumerate() {
        for &p in ps {
            succ[p].push(g);
        }
    }
    let n = circuit.gates.len();
    let mut sim = Sim {
        circuit,
        grid,
        config,
        settings,
        clock: CultivationClock::default(),
        sched: EventSchedule::default(),
        now: Cycles::ZERO,
        queue: BinaryHeap::new(),
        running: BTreeMap::new(),
        groups: Vec::new(),
        lock: vec![false; circuit.num_qubits],
        gate_done: vec![false; n],
        assigned: vec![false; n],
        preds_left: preds.iter().map(Vec::len).collect(),
        succ,
        stats: ExecStats::default(),
    };
    loop {
        while let Some(&Reverse((t, _, seq))) = sim.queue.peek() {
            if t != sim.now {
                break;
            }
            sim.queue.pop();
            sim.complete(seq);
        }
        let mut dispatched = sim.dispatch_c()?;
        dispatched |= sim.dispatch_b()?;
        dispatched |= sim.dispatch_local()?;
        dispatched |= sim.dispatch_a()?;
        if sim.queue.peek().is_some_and(|&Reverse((t, _, _))| t == sim.now) {
            continue;
        }
        match sim.queue.peek() {
            Some(&Reverse((t, _, _))) => sim.now = t,
            None => {
                if sim.gate_done.iter().all(|&d| d) {
                    break;
                }
                let pending: Vec<GateId> = (0..n).filter(|&g| !sim.gate_done[g]).take(8).collect();
                return Err(Error::Deadlock {
                    time: sim.now.to_string(),
                    detail: format!("nothing running, dispatched={dispatched}, pending gates {pending:?}"),
                });
            }
        }
    }
    sim.stats.windows = sim.groups.len();
    Ok(ExecOutput {
        schedule: sim.sched,
        stats: sim.stats,
    })
}
