//! Independent reference implementations shared by the integration suites.
#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use ls_sched::circuit::RzDecomposition;
use ls_sched::cost::CostConfig;
use ls_sched::layout::{Coord, LayoutGrid, MsDensity, Role};
use ls_sched::rotation::MsdGroupPlan;
use ls_sched::Cycles;
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

pub struct Rng(Xoshiro256PlusPlus);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.0.next_u64() % n as u64) as usize
    }

    pub fn chance(&mut self, p: f64) -> bool {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64 <= p
    }
}

pub fn all_coords(g: &LayoutGrid) -> Vec<Coord> {
    let (h, w) = (g.height as i32, g.width as i32);
    (0..h).flat_map(|r| (0..w).map(move |c| Coord::new(r, c))).collect()
}

fn around(g: &LayoutGrid, c: Coord) -> Vec<Coord> {
    let (h, w) = (g.height as i32, g.width as i32);
    [(-1, 0), (0, -1), (0, 1), (1, 0)]
        .into_iter()
        .map(|(dr, dc)| Coord::new(c.row + dr, c.col + dc))
        .filter(|n| n.row >= 0 && n.col >= 0 && n.row < h && n.col < w)
        .collect()
}

fn open(g: &LayoutGrid, blocked: &HashSet<Coord>, c: Coord) -> bool {
    g.role(c) == Some(Role::Ancilla) && !blocked.contains(&c)
}

/// Fewest ancilla cells linking two patches, by depth-first enumeration of
/// every simple path. Exponential; only for tiny grids.
pub fn exhaustive_shortest(g: &LayoutGrid, a: Coord, b: Coord, blocked: &HashSet<Coord>) -> Option<usize> {
    fn dfs(g: &LayoutGrid, blocked: &HashSet<Coord>, at: Coord, b: Coord, seen: &mut HashSet<Coord>, len: usize, best: &mut Option<usize>) {
        if best.is_some_and(|x| len >= x) {
            return;
        }
        if around(g, at).contains(&b) {
            *best = Some(len);
            return;
        }
        for n in around(g, at) {
            if open(g, blocked, n) && seen.insert(n) {
                dfs(g, blocked, n, b, seen, len + 1, best);
                seen.remove(&n);
            }
        }
    }
    let mut best = None;
    for s in around(g, a) {
        if open(g, blocked, s) {
            let mut seen = HashSet::from([s]);
            dfs(g, blocked, s, b, &mut seen, 1, &mut best);
        }
    }
    best
}

fn connected(g: &LayoutGrid, set: &BTreeSet<Coord>) -> bool {
    let Some(&first) = set.iter().next() else { return false };
    let mut seen = BTreeSet::from([first]);
    let mut stack = vec![first];
    while let Some(c) = stack.pop() {
        for n in around(g, c) {
            if set.contains(&n) && seen.insert(n) {
                stack.push(n);
            }
        }
    }
    seen.len() == set.len()
}

/// Smallest ancilla set that, joined with the root patch, is connected and
/// touches every terminal. Subsets are enumerated in order of size.
pub fn brute_steiner(g: &LayoutGrid, root: Coord, terminals: &[Coord], max_size: usize) -> Option<usize> {
    let cells: Vec<Coord> = all_coords(g)
        .into_iter()
        .filter(|&c| g.role(c) == Some(Role::Ancilla))
        .collect();
    fn choose(cells: &[Coord], k: usize, from: usize, cur: &mut Vec<Coord>, ok: &mut dyn FnMut(&[Coord]) -> bool) -> bool {
        if cur.len() == k {
            return ok(cur);
        }
        for i in from..cells.len() {
            cur.push(cells[i]);
            if choose(cells, k, i + 1, cur, ok) {
                return true;
            }
            cur.pop();
        }
        false
    }
    for k in 1..=max_size.min(cells.len()) {
        let mut test = |s: &[Coord]| {
            let mut set: BTreeSet<Coord> = s.iter().copied().collect();
            let touches = terminals.iter().all(|&p| around(g, p).iter().any(|n| set.contains(n)));
            set.insert(root);
            touches && connected(g, &set)
        };
        if choose(&cells, k, 0, &mut Vec::new(), &mut test) {
            return Some(k);
        }
    }
    None
}

/// Random grid with walls, ancillas, data and MS patches.
pub fn random_grid(rng: &mut Rng, max_side: usize, p_wall: f64) -> LayoutGrid {
    let h = 2 + rng.below(max_side - 1);
    let w = 2 + rng.below(max_side - 1);
    let mut rows: Vec<Vec<char>> = vec![vec!['A'; w]; h];
    for row in rows.iter_mut() {
        for ch in row.iter_mut() {
            *ch = if rng.chance(p_wall) {
                '#'
            } else if rng.chance(0.25) {
                'D'
            } else {
                'A'
            };
        }
    }
    let ms = 1 + rng.below(3);
    for _ in 0..ms {
        rows[rng.below(h)][rng.below(w)] = 'M';
    }
    let text: Vec<String> = rows.into_iter().map(|r| r.into_iter().collect()).collect();
    let refs: Vec<&str> = text.iter().map(String::as_str).collect();
    LayoutGrid::from_ascii(&refs, MsDensity::Starved).unwrap()
}

/// τ = n_T · τ_route + t_S · n_S + t_H · n_H.
pub fn tau_by_hand(dec: &RzDecomposition, route_cost: Cycles, cfg: &CostConfig) -> Cycles {
    route_cost * dec.n_t as i64 + cfg.t_s * dec.n_s as i64 + cfg.t_h * dec.n_h as i64
}

/// Σ over batches of the slowest job, plus one reset between batches.
pub fn batch_span_by_hand(plan: &MsdGroupPlan, cfg: &CostConfig) -> Cycles {
    let mut total = Cycles::ZERO;
    for (i, b) in plan.batches.iter().enumerate() {
        if i > 0 {
            total += cfg.c_reset;
        }
        let mut worst = Cycles::ZERO;
        for a in b {
            if a.tau > worst {
                worst = a.tau;
            }
        }
        total += worst;
    }
    total
}
