use std::collections::VecDeque;

use super::{Blocked, Route};
use crate::circuit::GateId;
use crate::cost::CostConfig;
use crate::layout::{Coord, LayoutGrid};

pub(crate) fn passable(grid: &LayoutGrid, blocked: &Blocked, c: Coord) -> bool {
    grid.is_free_ancilla(c) && !blocked.contains(&c)
}

/// Hop distances over passable cells from the free ancillas next to
/// `dst`, which sit at distance 1. Unreached cells hold `u32::MAX`.
pub fn distance_field(grid: &LayoutGrid, dst: Coord, blocked: &Blocked) -> Vec<u32> {
    let mut dist = vec![u32::MAX; grid.height * grid.width];
    let mut queue = VecDeque::new();
    for n in grid.neighbors(dst) {
        if passable(grid, blocked, n) {
            dist[grid.index(n).expect("in bounds")] = 1;
            queue.push_back(n);
        }
    }
    while let Some(c) = queue.pop_front() {
        let d = dist[grid.index(c).expect("in bounds")];
        for n in grid.neighbors(c) {
            let i = grid.index(n).expect("in bounds");
            if dist[i] == u32::MAX && passable(grid, blocked, n) {
                dist[i] = d + 1;
                queue.push_back(n);
            }
        }
    }
    dist
}

/// Shortest interior ancilla path from patch `src` to patch `dst`. Among
/// shortest paths the one whose first differing cell is lexicographically
/// smallest wins.
pub fn bfs_path(grid: &LayoutGrid, src: Coord, dst: Coord, blocked: &Blocked) -> Option<Vec<Coord>> {
    let dist = distance_field(grid, dst, blocked);
    let at = |c: Coord| grid.index(c).map_or(u32::MAX, |i| dist[i]);
    let mut cur = grid
        .neighbors(src)
        .filter(|&n| at(n) != u32::MAX)
        .min_by_key(|&n| (at(n), n))?;
    let mut path = vec![cur];
    while at(cur) > 1 {
        let want = at(cur) - 1;
        cur = grid
            .neighbors(cur)
            .find(|&n| at(n) == want)
            .expect("distance field is consistent");
        path.push(cur);
    }
    Some(path)
}

/// Shortest passable walk from ancilla `a` to ancilla `b`, both included,
/// with the same lexicographic tie rule as [`bfs_path`].
pub fn bfs_cells(grid: &LayoutGrid, a: Coord, b: Coord, blocked: &Blocked) -> Option<Vec<Coord>> {
    if !passable(grid, blocked, a) || !passable(grid, blocked, b) {
        return None;
    }
    let mut dist = vec![u32::MAX; grid.height * grid.width];
    let at = |d: &Vec<u32>, c: Coord| grid.index(c).map_or(u32::MAX, |i| d[i]);
    dist[grid.index(b)?] = 0;
    let mut queue = VecDeque::from([b]);
    while let Some(c) = queue.pop_front() {
        if c == a {
            break;
        }
        let d = at(&dist, c);
        for n in grid.neighbors(c) {
            let i = grid.index(n).expect("in bounds");
            if dist[i] == u32::MAX && passable(grid, blocked, n) {
                dist[i] = d + 1;
                queue.push_back(n);
            }
        }
    }
    if at(&dist, a) == u32::MAX {
        return None;
    }
    let mut cur = a;
    let mut path = vec![a];
    while cur != b {
        let want = at(&dist, cur) - 1;
        cur = grid.neighbors(cur).find(|&n| at(&dist, n) == want)?;
        path.push(cur);
    }
    Some(path)
}

pub fn bfs_route(
    grid: &LayoutGrid,
    gate_id: Option<GateId>,
    src: Coord,
    dst: Coord,
    blocked: &Blocked,
    config: &CostConfig,
) -> Option<Route> {
    let cells = bfs_path(grid, src, dst, blocked)?;
    Route::new(gate_id, src, dst, cells, grid, config).ok()
}
