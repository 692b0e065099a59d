//! Patch grid: cell roles, logical-qubit placement, magic-state patches,
//! occupancy and the persistent orientation map.

mod build;
mod json;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::circuit::QubitId;
use crate::error::{Error, Result};

pub use build::build_layout;
pub use json::LayoutDump;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "[i32; 2]", into = "[i32; 2]")]
pub struct Coord {
    pub row: i32,
    pub col: i32,
}

impl Coord {
    pub const fn new(row: i32, col: i32) -> Self {
        Coord { row, col }
    }

    pub fn manhattan(self, other: Coord) -> u32 {
        self.row.abs_diff(other.row) + self.col.abs_diff(other.col)
    }

    /// 4-neighbours in lexicographic order.
    pub fn neighbors(self) -> [Coord; 4] {
        [
            Coord::new(self.row - 1, self.col),
            Coord::new(self.row, self.col - 1),
            Coord::new(self.row, self.col + 1),
            Coord::new(self.row + 1, self.col),
        ]
    }

    pub fn is_adjacent(self, other: Coord) -> bool {
        self.manhattan(other) == 1
    }
}

impl From<[i32; 2]> for Coord {
    fn from([row, col]: [i32; 2]) -> Self {
        Coord { row, col }
    }
}

impl From<Coord> for [i32; 2] {
    fn from(c: Coord) -> Self {
        [c.row, c.col]
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.row, self.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Role {
    Data,
    Ancilla,
    MagicState,
    Wall,
}

impl Role {
    pub fn symbol(self) -> char {
        match self {
            Role::Data => 'D',
            Role::Ancilla => 'A',
            Role::MagicState => 'M',
            Role::Wall => '#',
        }
    }

    pub fn from_symbol(c: char) -> Option<Role> {
        Some(match c {
            'D' => Role::Data,
            'A' => Role::Ancilla,
            'M' => Role::MagicState,
            '#' => Role::Wall,
            _ => return None,
        })
    }
}

/// Which boundary type faces east/west.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Orientation {
    #[default]
    XHorizontal,
    ZHorizontal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutKind {
    Compact,
    HalfFilling,
    TwoThirdsFilling,
    SquareSparse,
    Custom,
}

impl LayoutKind {
    pub const STANDARD: [LayoutKind; 4] = [
        LayoutKind::Compact,
        LayoutKind::HalfFilling,
        LayoutKind::TwoThirdsFilling,
        LayoutKind::SquareSparse,
    ];

    pub fn cli_name(self) -> &'static str {
        match self {
            LayoutKind::Compact => "compact",
            LayoutKind::HalfFilling => "half",
            LayoutKind::TwoThirdsFilling => "twothirds",
            LayoutKind::SquareSparse => "sparse",
            LayoutKind::Custom => "custom",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MsDensity {
    Abundant,
    Starved,
}

pub type ReservationId = u64;

#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub coord: Coord,
    pub role: Role,
    pub occupant: Option<ReservationId>,
    pub orientation: Orientation,
}

#[derive(Clone, Debug)]
pub struct LayoutGrid {
    pub height: usize,
    pub width: usize,
    cells: Vec<Cell>,
    placement: Vec<Coord>,
    qubit_at: HashMap<Coord, QubitId>,
    pub ms_patches: Vec<Coord>,
    pub kind: LayoutKind,
    pub ms_density: MsDensity,
}

impl LayoutGrid {
    /// Assemble a grid from a role matrix and a placement. Validates the
    /// structural invariants but not routability.
    pub fn from_roles(
        roles: &[Vec<Role>],
        placement: Vec<Coord>,
        kind: LayoutKind,
        ms_density: MsDensity,
    ) -> Result<Self> {
        let height = roles.len();
        let width = roles.first().map_or(0, Vec::len);
        if height == 0 || width == 0 || roles.iter().any(|r| r.len() != width) {
            return Err(Error::Layout("role matrix must be a non-empty rectangle".into()));
        }
        let mut cells = Vec::with_capacity(height * width);
        let mut ms_patches = Vec::new();
        for (r, row) in roles.iter().enumerate() {
            for (c, &role) in row.iter().enumerate() {
                let coord = Coord::new(r as i32, c as i32);
                if role == Role::MagicState {
                    ms_patches.push(coord);
                }
                cells.push(Cell {
                    coord,
                    role,
                    occupant: None,
                    orientation: Orientation::default(),
                });
            }
        }
        let mut grid = LayoutGrid {
            height,
            width,
            cells,
            placement: Vec::new(),
            qubit_at: HashMap::new(),
            ms_patches,
            kind,
            ms_density,
        };
        for (q, &c) in placement.iter().enumerate() {
            if grid.role(c) != Some(Role::Data) {
                return Err(Error::Layout(format!("qubit {q} placed on non-data cell {c}")));
            }
            if grid.qubit_at.insert(c, q).is_some() {
                return Err(Error::Layout(format!("two qubits placed on {c}")));
            }
        }
        grid.placement = placement;
        Ok(grid)
    }

    /// Parse a role matrix from rows of `D`, `A`, `M`, `#`. Qubits are
    /// placed on data cells in row-major order.
    pub fn from_ascii(rows: &[&str], ms_density: MsDensity) -> Result<Self> {
        let roles = rows
            .iter()
            .map(|r| {
                r.chars()
                    .map(|ch| {
                        Role::from_symbol(ch)
                            .ok_or_else(|| Error::Layout(format!("unknown cell symbol `{ch}`")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let placement = roles
            .iter()
            .enumerate()
            .flat_map(|(r, row)| {
                row.iter()
                    .enumerate()
                    .filter(|(_, &role)| role == Role::Data)
                    .map(move |(c, _)| Coord::new(r as i32, c as i32))
            })
            .collect();
        Self::from_roles(&roles, placement, LayoutKind::Custom, ms_density)
    }

    pub fn in_bounds(&self, c: Coord) -> bool {
        c.row >= 0 && c.col >= 0 && (c.row as usize) < self.height && (c.col as usize) < self.width
    }

    pub fn index(&self, c: Coord) -> Option<usize> {
        self.in_bounds(c)
            .then(|| c.row as usize * self.width + c.col as usize)
    }

    pub fn coord_of_index(&self, i: usize) -> Coord {
        Coord::new((i / self.width) as i32, (i % self.width) as i32)
    }

    pub fn cell(&self, c: Coord) -> Option<&Cell> {
        self.index(c).map(|i| &self.cells[i])
    }

    pub fn cells(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter()
    }

    pub fn role(&self, c: Coord) -> Option<Role> {
        self.cell(c).map(|cell| cell.role)
    }

    pub fn orientation(&self, c: Coord) -> Orientation {
        self.cell(c).map_or_else(Orientation::default, |cell| cell.orientation)
    }

    pub fn occupant(&self, c: Coord) -> Option<ReservationId> {
        self.cell(c).and_then(|cell| cell.occupant)
    }

    pub fn num_qubits(&self) -> usize {
        self.placement.len()
    }

    pub fn placement(&self) -> &[Coord] {
        &self.placement
    }

    pub fn position(&self, q: QubitId) -> Result<Coord> {
        self.placement.get(q).copied().ok_or(Error::Unplaced(q))
    }

    pub fn qubit_at(&self, c: Coord) -> Option<QubitId> {
        self.qubit_at.get(&c).copied()
    }

    /// In-bounds 4-neighbours in lexicographic order.
    pub fn neighbors(&self, c: Coord) -> impl Iterator<Item = Coord> + '_ {
        c.neighbors().into_iter().filter(move |&n| self.in_bounds(n))
    }

    pub fn is_ancilla(&self, c: Coord) -> bool {
        self.role(c) == Some(Role::Ancilla)
    }

    pub fn is_free_ancilla(&self, c: Coord) -> bool {
        self.cell(c)
            .is_some_and(|cell| cell.role == Role::Ancilla && cell.occupant.is_none())
    }

    pub fn adjacent_ancillas(&self, c: Coord) -> Vec<Coord> {
        self.neighbors(c).filter(|&n| self.is_ancilla(n)).collect()
    }

    pub fn data_cells(&self) -> impl Iterator<Item = Coord> + '_ {
        self.cells
            .iter()
            .filter(|c| c.role == Role::Data)
            .map(|c| c.coord)
    }

    /// Occupy every coordinate or none of them.
    pub fn reserve_cells(&mut self, coords: &[Coord], id: ReservationId) -> Result<()> {
        let mut conflicts = Vec::new();
        for &c in coords {
            match self.cell(c) {
                None => return Err(Error::Layout(format!("cell {c} out of bounds"))),
                Some(cell) if cell.role == Role::Wall || cell.occupant.is_some() => {
                    conflicts.push(c)
                }
                _ => {}
            }
        }
        let mut seen = std::collections::HashSet::new();
        for &c in coords {
            if !seen.insert(c) && !conflicts.contains(&c) {
                conflicts.push(c);
            }
        }
        if !conflicts.is_empty() {
            conflicts.sort();
            conflicts.dedup();
            return Err(Error::Conflict(conflicts));
        }
        for &c in coords {
            let i = self.index(c).expect("checked above");
            self.cells[i].occupant = Some(id);
        }
        Ok(())
    }

    /// Release the listed cells held by `id`. Cells held by another
    /// reservation are left untouched.
    pub fn release_cells(&mut self, coords: &[Coord], id: ReservationId) {
        for &c in coords {
            if let Some(i) = self.index(c) {
                if self.cells[i].occupant == Some(id) {
                    self.cells[i].occupant = None;
                }
            }
        }
    }

    pub fn release_all(&mut self) {
        for cell in &mut self.cells {
            cell.occupant = None;
        }
    }

    pub fn occupied(&self) -> impl Iterator<Item = (Coord, ReservationId)> + '_ {
        self.cells
            .iter()
            .filter_map(|c| c.occupant.map(|o| (c.coord, o)))
    }

    /// Last writer wins.
    pub fn update_orientation(&mut self, updates: &[(Coord, Orientation)]) {
        for &(c, o) in updates {
            if let Some(i) = self.index(c) {
                self.cells[i].orientation = o;
            }
        }
    }

    pub fn reset_orientations(&mut self) {
        for cell in &mut self.cells {
            cell.orientation = Orientation::default();
        }
    }

    /// Every data and magic-state cell touches an ancilla and the ancilla
    /// cells form one 4-connected component.
    pub fn check_routability(&self) -> Result<()> {
        for cell in &self.cells {
            if matches!(cell.role, Role::Data | Role::MagicState)
                && self.adjacent_ancillas(cell.coord).is_empty()
            {
                return Err(Error::Layout(format!(
                    "{:?} cell {} has no adjacent ancilla",
                    cell.role, cell.coord
                )));
            }
        }
        let ancillas: Vec<Coord> = self
            .cells
            .iter()
            .filter(|c| c.role == Role::Ancilla)
            .map(|c| c.coord)
            .collect();
        let Some(&start) = ancillas.first() else {
            return Err(Error::Layout("layout has no ancilla cells".into()));
        };
        let mut seen = vec![false; self.cells.len()];
        let mut stack = vec![start];
        seen[self.index(start).expect("in bounds")] = true;
        let mut count = 0;
        while let Some(c) = stack.pop() {
            count += 1;
            for n in self.neighbors(c) {
                let i = self.index(n).expect("in bounds");
                if !seen[i] && self.cells[i].role == Role::Ancilla {
                    seen[i] = true;
                    stack.push(n);
                }
            }
        }
        if count != ancillas.len() {
            return Err(Error::Layout(format!(
                "ancilla cells split into several components ({count} of {} reachable)",
                ancillas.len()
            )));
        }
        Ok(())
    }

    pub fn ascii(&self) -> Vec<String> {
        (0..self.height)
            .map(|r| {
                (0..self.width)
                    .map(|c| self.cells[r * self.width + c].role.symbol())
                    .collect()
            })
            .collect()
    }
}
