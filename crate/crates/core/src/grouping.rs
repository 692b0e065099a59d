//! Latency-anchored multi-target group formation and footprint packing.
//!
//! Groups never span commuting layers: only gates of one layer may share a
//! group, because gates of different layers need not commute.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::circuit::{GateId, GateKind, LogicalCircuit, QubitId};
use crate::cost::{merge_cost, CostConfig};
use crate::cycles::Cycles;
use crate::error::{Error, Result};
use crate::layout::LayoutGrid;
use crate::routing::{bfs_path, bfs_route, steiner_tree, Blocked, Route, SteinerFootprint};

/// One controlled phase oriented as (control, target).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GroupMember {
    pub gate: GateId,
    pub control: QubitId,
    pub target: QubitId,
    pub angle: f64,
}

/// A gate from a later group that shares this group's slice window on its
/// own point-to-point route.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PackedMember {
    pub member: GroupMember,
    pub route: Route,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FanoutGroup {
    pub index: usize,
    pub layer: usize,
    pub control: QubitId,
    pub anchor_gate: GateId,
    /// Fan-out members; every one has `control` as its control.
    pub members: Vec<GroupMember>,
    pub packed: Vec<PackedMember>,
    pub footprint: Option<SteinerFootprint>,
    /// Max committed path cost over the group (set by packing).
    pub latency: Cycles,
}

impl FanoutGroup {
    pub fn all_members(&self) -> impl Iterator<Item = &GroupMember> {
        self.members.iter().chain(self.packed.iter().map(|p| &p.member))
    }

    pub fn qubits(&self) -> BTreeSet<QubitId> {
        self.all_members().flat_map(|m| [m.control, m.target]).collect()
    }

    /// Control not among targets, targets pairwise distinct, packed gates
    /// disjoint from everything else.
    pub fn roles_disjoint(&self) -> bool {
        let mut seen = BTreeSet::new();
        seen.insert(self.control);
        for m in &self.members {
            if m.control != self.control || !seen.insert(m.target) {
                return false;
            }
        }
        self.packed
            .iter()
            .all(|p| seen.insert(p.member.control) && seen.insert(p.member.target))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct GroupPlan {
    pub groups: Vec<FanoutGroup>,
    /// Gates routed point to point in their own slice.
    pub leftovers: Vec<GroupMember>,
}

impl GroupPlan {
    pub fn gate_ids(&self) -> Vec<GateId> {
        let mut ids: Vec<GateId> = self
            .groups
            .iter()
            .flat_map(|g| g.all_members().map(|m| m.gate))
            .chain(self.leftovers.iter().map(|m| m.gate))
            .collect();
        ids.sort_unstable();
        ids
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }
}

/// A group picked by the formation rule, before any footprint exists.
#[derive(Clone, Debug, PartialEq)]
pub struct Formed {
    pub control: QubitId,
    pub anchor: GateId,
    pub members: Vec<GroupMember>,
}

/// Formation loop over one pool of commuting gates `(id, q1, q2, angle)`,
/// given in id order, with latencies `l`. Each round takes the slowest gate,
/// makes the endpoint with the slower remaining partner gates the control
/// (ties to the first qubit), and gathers every remaining gate on that
/// control that adds a new target.
pub fn form_from_pool(pool: &[(GateId, QubitId, QubitId, f64)], l: &HashMap<GateId, Cycles>) -> Vec<Formed> {
    let mut remaining: Vec<(GateId, QubitId, QubitId, f64)> = pool.to_vec();
    let mut out = Vec::new();
    while !remaining.is_empty() {
        let (pos, &(anchor, q1, q2, angle)) = remaining
            .iter()
            .enumerate()
            .max_by(|(_, a), (_, b)| l[&a.0].cmp(&l[&b.0]).then(b.0.cmp(&a.0)))
            .expect("nonempty");
        remaining.remove(pos);
        let lmax = |q: QubitId| {
            remaining
                .iter()
                .filter(|g| g.1 == q || g.2 == q)
                .map(|g| l[&g.0])
                .max()
                .unwrap_or(Cycles::ZERO)
        };
        let (control, first_target) = if lmax(q1) >= lmax(q2) { (q1, q2) } else { (q2, q1) };
        let mut members = vec![GroupMember {
            gate: anchor,
            control,
            target: first_target,
            angle,
        }];
        let mut targets = BTreeSet::from([first_target]);
        remaining.retain(|&(id, a, b, angle)| {
            let other = if a == control {
                b
            } else if b == control {
                a
            } else {
                return true;
            };
            if !targets.insert(other) {
                return true;
            }
            members.push(GroupMember {
                gate: id,
                control,
                target: other,
                angle,
            });
            false
        });
        out.push(Formed {
            control,
            anchor,
            members,
        });
    }
    out
}

/// Point-to-point latency of every controlled phase on the grid as it is.
pub fn gate_latencies(circuit: &LogicalCircuit, grid: &LayoutGrid, config: &CostConfig) -> Result<HashMap<GateId, Cycles>> {
    let mut l = HashMap::new();
    for g in circuit.gates.iter().filter(|g| g.kind == GateKind::Cphase) {
        let (a, b) = (grid.position(g.qubits[0])?, grid.position(g.qubits[1])?);
        let cells = bfs_path(grid, a, b, &Blocked::new())
            .ok_or_else(|| Error::Layout(format!("gate {} has no route on the empty grid", g.id)))?;
        let mut path = vec![a];
        path.extend(cells);
        path.push(b);
        l.insert(g.id, merge_cost(&path, grid, config)?.total);
    }
    Ok(l)
}

/// Run the formation rule layer by layer.
pub fn form_groups(circuit: &LogicalCircuit, grid: &LayoutGrid, config: &CostConfig) -> Result<GroupPlan> {
    let l = gate_latencies(circuit, grid, config)?;
    let mut groups = Vec::new();
    for (layer, ids) in circuit.commuting_layers.iter().enumerate() {
        let pool: Vec<_> = ids
            .iter()
            .map(|&id| {
                let g = &circuit.gates[id];
                (id, g.qubits[0], g.qubits[1], g.angle_or_zero())
            })
            .collect();
        for f in form_from_pool(&pool, &l) {
            let latency = f.members.iter().map(|m| l[&m.gate]).max().unwrap_or(Cycles::ZERO);
            groups.push(FanoutGroup {
                index: groups.len(),
                layer,
                control: f.control,
                anchor_gate: f.anchor,
                members: f.members,
                packed: Vec::new(),
                footprint: None,
                latency,
            });
        }
    }
    Ok(GroupPlan {
        groups,
        leftovers: Vec::new(),
    })
}

/// Build each group's footprint, then pull later same-layer gates into its
/// window when their qubits are untouched by the group, a route exists
/// through ancillas the group has not reserved, and that route is no
/// slower than the group's own latency.
pub fn pack_groups(mut plan: GroupPlan, grid: &LayoutGrid, config: &CostConfig) -> Result<GroupPlan> {
    let mut out = Vec::new();
    let mut leftovers = std::mem::take(&mut plan.leftovers);
    let n = plan.groups.len();
    for k in 0..n {
        if plan.groups[k].members.is_empty() {
            continue;
        }
        let control_at = grid.position(plan.groups[k].control)?;
        let terminals = plan.groups[k]
            .members
            .iter()
            .map(|m| grid.position(m.target))
            .collect::<Result<Vec<_>>>()?;
        let Some(fp) = steiner_tree(grid, control_at, &terminals, &Blocked::new()) else {
            leftovers.append(&mut plan.groups[k].members);
            continue;
        };
        let mut latency = Cycles::ZERO;
        for &t in &terminals {
            latency = latency.max(fp.path_cost(t, grid, config)?.total);
        }
        let mut blocked: Blocked = fp.tree_cells.iter().copied().collect();
        let mut used = plan.groups[k].qubits();
        let layer = plan.groups[k].layer;
        let mut packed = Vec::new();
        for j in k + 1..n {
            if plan.groups[j].layer != layer {
                continue;
            }
            let mut order: Vec<usize> = (0..plan.groups[j].members.len()).collect();
            order.sort_by_key(|&i| plan.groups[j].members[i].gate);
            let mut taken = Vec::new();
            for i in order {
                let m = plan.groups[j].members[i];
                if used.contains(&m.control) || used.contains(&m.target) {
                    continue;
                }
                let (a, b) = (grid.position(m.control)?, grid.position(m.target)?);
                let Some(route) = bfs_route(grid, Some(m.gate), a, b, &blocked, config) else {
                    continue;
                };
                if route.cost.total > latency {
                    continue;
                }
                blocked.extend(route.cells.iter().copied());
                used.extend([m.control, m.target]);
                packed.push(PackedMember { member: m, route });
                taken.push(i);
            }
            if !taken.is_empty() {
                taken.sort_unstable();
                for &i in taken.iter().rev() {
                    plan.groups[j].members.remove(i);
                }
                reanchor(&mut plan.groups[j], grid, config)?;
            }
        }
        let mut g = plan.groups[k].clone();
        g.footprint = Some(fp);
        g.packed = packed;
        g.latency = latency;
        out.push(g);
    }
    for (i, g) in out.iter_mut().enumerate() {
        g.index = i;
    }
    Ok(GroupPlan {
        groups: out,
        leftovers,
    })
}

fn reanchor(g: &mut FanoutGroup, grid: &LayoutGrid, config: &CostConfig) -> Result<()> {
    if g.members.iter().any(|m| m.gate == g.anchor_gate) {
        return Ok(());
    }
    let mut best: Option<(Cycles, GateId)> = None;
    for m in &g.members {
        let (a, b) = (grid.position(m.control)?, grid.position(m.target)?);
        let r = bfs_route(grid, Some(m.gate), a, b, &Blocked::new(), config)
            .ok_or_else(|| Error::Layout(format!("gate {} has no route on the empty grid", m.gate)))?;
        if best.is_none_or(|(c, _)| r.cost.total > c) {
            best = Some((r.cost.total, m.gate));
        }
    }
    if let Some((_, id)) = best {
        g.anchor_gate = id;
    }
    Ok(())
}

/// Formation followed by packing.
pub fn plan_groups(circuit: &LogicalCircuit, grid: &LayoutGrid, config: &CostConfig) -> Result<GroupPlan> {
    let plan = form_groups(circuit, grid, config)?;
    pack_groups(plan, grid, config)
}
