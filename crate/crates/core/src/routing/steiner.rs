use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use super::bfs::{bfs_path, passable};
use super::Blocked;
use crate::cost::{merge_cost, CostConfig, PathCost};
use crate::error::Result;
use crate::layout::{Coord, LayoutGrid};

/// Ancilla tree joining a root patch to several terminal patches.
fn paths_as_list<S: serde::Serializer>(m: &BTreeMap<Coord, Vec<Coord>>, s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(m.iter())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SteinerFootprint {
    pub root: Coord,
    pub terminals: Vec<Coord>,
    pub tree_cells: BTreeSet<Coord>,
    /// Interior cells from the root to each terminal, root side first.
    #[serde(serialize_with = "paths_as_list")]
    pub root_to_terminal_paths: BTreeMap<Coord, Vec<Coord>>,
    /// Tree cell each cell hangs from; `None` means it touches the root.
    #[serde(skip)]
    parent: BTreeMap<Coord, Option<Coord>>,
}

impl SteinerFootprint {
    pub fn empty(root: Coord) -> Self {
        SteinerFootprint {
            root,
            terminals: Vec::new(),
            tree_cells: BTreeSet::new(),
            root_to_terminal_paths: BTreeMap::new(),
            parent: BTreeMap::new(),
        }
    }

    pub fn cells(&self) -> Vec<Coord> {
        self.tree_cells.iter().copied().collect()
    }

    /// Endpoint-inclusive path root → terminal.
    pub fn full_path(&self, terminal: Coord) -> Option<Vec<Coord>> {
        let inner = self.root_to_terminal_paths.get(&terminal)?;
        let mut p = Vec::with_capacity(inner.len() + 2);
        p.push(self.root);
        p.extend_from_slice(inner);
        p.push(terminal);
        Some(p)
    }

    pub fn path_cost(&self, terminal: Coord, grid: &LayoutGrid, config: &CostConfig) -> Result<PathCost> {
        let path = self
            .full_path(terminal)
            .ok_or_else(|| crate::error::Error::Layout(format!("{terminal} is not a terminal")))?;
        merge_cost(&path, grid, config)
    }

    /// Root-side chain of tree cells ending at `cell`.
    fn chain_to(&self, cell: Coord) -> Vec<Coord> {
        let mut chain = vec![cell];
        let mut cur = cell;
        while let Some(&Some(p)) = self.parent.get(&cur) {
            chain.push(p);
            cur = p;
        }
        chain.reverse();
        chain
    }

    /// Attach one more terminal through the shortest passable connection to
    /// the current tree. Returns the cells added, or `None` when the
    /// terminal cannot be reached. Existing tree cells are always usable.
    pub fn attach(&mut self, grid: &LayoutGrid, terminal: Coord, blocked: &Blocked) -> Option<Vec<Coord>> {
        let field = self.field(grid, blocked);
        let (cell, _) = Self::best_attachment(grid, &field, terminal)?;
        Some(self.commit(grid, terminal, cell, &field, blocked, Ties::Lexicographic))
    }

    fn field(&self, grid: &LayoutGrid, blocked: &Blocked) -> Field {
        self.field_ordered(grid, blocked, Ties::Lexicographic)
    }

    fn field_ordered(&self, grid: &LayoutGrid, blocked: &Blocked, ties: Ties) -> Field {
        let size = grid.height * grid.width;
        let mut f = Field {
            width: grid.width,
            dist: vec![u32::MAX; size],
            from: vec![None; size],
        };
        let mut queue = VecDeque::new();
        for &c in &self.tree_cells {
            f.dist[grid.index(c).expect("tree cell in bounds")] = 0;
            queue.push_back(c);
        }
        for n in ties.order(grid.neighbors(self.root).collect()) {
            let i = grid.index(n).expect("in bounds");
            if f.dist[i] == u32::MAX && passable(grid, blocked, n) {
                f.dist[i] = 1;
                queue.push_back(n);
            }
        }
        while let Some(c) = queue.pop_front() {
            let d = f.dist[grid.index(c).expect("in bounds")];
            for n in ties.order(grid.neighbors(c).collect()) {
                let i = grid.index(n).expect("in bounds");
                if f.dist[i] == u32::MAX && passable(grid, blocked, n) {
                    f.dist[i] = d + 1;
                    f.from[i] = Some(c);
                    queue.push_back(n);
                }
            }
        }
        f
    }

    fn best_attachment(grid: &LayoutGrid, field: &Field, terminal: Coord) -> Option<(Coord, u32)> {
        Self::best_attachment_ordered(grid, field, terminal, Ties::Lexicographic)
    }

    fn best_attachment_ordered(grid: &LayoutGrid, field: &Field, terminal: Coord, ties: Ties) -> Option<(Coord, u32)> {
        ties.order(grid.neighbors(terminal).collect())
            .into_iter()
            .filter_map(|n| {
                let d = field.dist[grid.index(n)?];
                (d != u32::MAX).then_some((n, d))
            })
            .min_by_key(|&(_, d)| d)
    }

    fn commit(
        &mut self,
        grid: &LayoutGrid,
        terminal: Coord,
        cell: Coord,
        field: &Field,
        blocked: &Blocked,
        ties: Ties,
    ) -> Vec<Coord> {
        if self.tree_cells.is_empty() && ties == Ties::Lexicographic {
            // First arm: the canonical shortest path, so a one-terminal tree
            // matches point-to-point routing exactly.
            let cells = bfs_path(grid, self.root, terminal, blocked).expect("terminal is reachable");
            let mut anchor = None;
            for &c in &cells {
                self.parent.insert(c, anchor);
                self.tree_cells.insert(c);
                anchor = Some(c);
            }
            self.terminals.push(terminal);
            self.root_to_terminal_paths.insert(terminal, cells.clone());
            return cells;
        }
        // Walk back from the attachment cell to the tree or the root.
        let mut fresh = Vec::new();
        let mut cur = Some(cell);
        while let Some(c) = cur {
            if self.tree_cells.contains(&c) {
                break;
            }
            fresh.push(c);
            cur = field.from(c);
        }
        fresh.reverse();
        let mut anchor = fresh.first().and_then(|&c| field.from(c));
        for &c in &fresh {
            self.parent.insert(c, anchor);
            self.tree_cells.insert(c);
            anchor = Some(c);
        }
        let path = self.chain_to(cell);
        self.terminals.push(terminal);
        self.root_to_terminal_paths.insert(terminal, path);
        fresh
    }
}

impl SteinerFootprint {
    /// Breadth-first walk over `cells` from the root. Maps each reached
    /// cell to its parent (`None` when it touches the root).
    fn tree_bfs(&self, grid: &LayoutGrid, cells: &BTreeSet<Coord>) -> BTreeMap<Coord, Option<Coord>> {
        let mut parent = BTreeMap::new();
        let mut queue = VecDeque::new();
        for n in grid.neighbors(self.root) {
            if cells.contains(&n) {
                parent.insert(n, None);
                queue.push_back(n);
            }
        }
        while let Some(c) = queue.pop_front() {
            for n in grid.neighbors(c) {
                if cells.contains(&n) && !parent.contains_key(&n) {
                    parent.insert(n, Some(c));
                    queue.push_back(n);
                }
            }
        }
        parent
    }

    fn spans(&self, grid: &LayoutGrid, cells: &BTreeSet<Coord>) -> bool {
        self.tree_bfs(grid, cells).len() == cells.len()
            && self
                .terminals
                .iter()
                .all(|&t| grid.neighbors(t).any(|n| cells.contains(&n)))
    }

    /// Drop cells the tree can do without, then re-derive parents and
    /// root paths as shortest paths inside the remaining tree.
    fn prune(&mut self, grid: &LayoutGrid) {
        let mut cells = self.tree_cells.clone();
        loop {
            let removable = cells.iter().copied().find(|&c| {
                let mut rest = cells.clone();
                rest.remove(&c);
                self.spans(grid, &rest)
            });
            match removable {
                Some(c) => {
                    cells.remove(&c);
                }
                None => break,
            }
        }
        if cells == self.tree_cells {
            return;
        }
        self.parent = self.tree_bfs(grid, &cells);
        self.tree_cells = cells;
        let depth = |c: Coord| self.chain_to(c).len();
        let mut paths = BTreeMap::new();
        for &t in &self.terminals {
            let end = grid
                .neighbors(t)
                .filter(|n| self.tree_cells.contains(n))
                .min_by_key(|&n| (depth(n), n))
                .expect("pruning keeps every terminal attached");
            paths.insert(t, self.chain_to(end));
        }
        self.root_to_terminal_paths = paths;
    }
}

/// Tie order among equally distant cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Ties {
    Lexicographic,
    Reversed,
}

impl Ties {
    fn order(self, mut cells: Vec<Coord>) -> Vec<Coord> {
        cells.sort();
        if self == Ties::Reversed {
            cells.reverse();
        }
        cells
    }
}

struct Field {
    width: usize,
    dist: Vec<u32>,
    from: Vec<Option<Coord>>,
}

impl Field {
    fn from(&self, c: Coord) -> Option<Coord> {
        self.from[c.row as usize * self.width + c.col as usize]
    }
}

fn grow(grid: &LayoutGrid, root: Coord, terminals: &[Coord], blocked: &Blocked, ties: Ties) -> Option<SteinerFootprint> {
    let mut fp = SteinerFootprint::empty(root);
    let mut pending: Vec<Coord> = terminals.to_vec();
    while !pending.is_empty() {
        let field = fp.field_ordered(grid, blocked, ties);
        let (k, cell) = pending
            .iter()
            .enumerate()
            .filter_map(|(k, &t)| SteinerFootprint::best_attachment_ordered(grid, &field, t, ties).map(|(c, d)| (d, k, c)))
            .min_by_key(|&(d, k, _)| (d, k))
            .map(|(_, k, c)| (k, c))?;
        let t = pending.remove(k);
        fp.commit(grid, t, cell, &field, blocked, ties);
    }
    fp.prune(grid);
    Some(fp)
}

/// Nearest-terminal attachment: grow from the root, each round attaching
/// the unconnected terminal closest to the tree (ties by input order).
/// The tree is grown under both coordinate tie orders and pruned; the
/// smaller one wins, the lexicographic one on equal size.
pub fn steiner_tree(
    grid: &LayoutGrid,
    root: Coord,
    terminals: &[Coord],
    blocked: &Blocked,
) -> Option<SteinerFootprint> {
    let lex = grow(grid, root, terminals, blocked, Ties::Lexicographic)?;
    match grow(grid, root, terminals, blocked, Ties::Reversed) {
        Some(rev) if rev.tree_cells.len() < lex.tree_cells.len() => Some(rev),
        _ => Some(lex),
    }
}
