//! Canonical floorplans. Each core is a row pattern crossed with a column
//! pattern: a cell is data iff both its row and its column are data lines.
//! The core is wrapped in a one-cell wall ring that hosts magic-state
//! patches. Legend: `D` data, `A` ancilla, `M` magic state, `#` wall.
//!
//! Square sparse, 4 qubits, starved:
//!
//! ```text
//! #M###M#
//! #AAAAA#
//! #ADADA#
//! #AAAAA#
//! #ADADA#
//! #AAAAA#
//! #M###M#
//! ```
//!
//! Half filling alternates data and ancilla rows between ancilla columns;
//! two-thirds filling stacks pairs of data rows between ancilla rows:
//!
//! ```text
//! half         two-thirds   compact
//! AAAAAA       AAAAAA       ADDDDA
//! ADDDDA       ADDDDA       AAAAAA
//! AAAAAA       ADDDDA       ADDDDA
//! ADDDDA       AAAAAA       ADDDDA
//! AAAAAA       ADDDDA       AAAAAA
//!              ADDDDA       ADDDDA
//!              AAAAAA
//! ```
//!
//! Compact drops the perimeter ancilla rows: bands of data, ancilla, data
//! are stacked directly, so every data row borders exactly one ancilla row.
//! Data slots beyond `n_qubits` (the tail of the last rows) become ancilla.

use super::{Coord, LayoutGrid, LayoutKind, MsDensity, Role};
use crate::error::{Error, Result};

/// Row (or column) line types.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Line {
    D,
    A,
}

fn sparse_lines(k: usize) -> Vec<Line> {
    let mut v = vec![Line::A];
    for _ in 0..k {
        v.extend([Line::D, Line::A]);
    }
    v
}

fn framed(k: usize) -> Vec<Line> {
    let mut v = vec![Line::A];
    v.extend(std::iter::repeat_n(Line::D, k));
    v.push(Line::A);
    v
}

fn ceil_div(a: usize, b: usize) -> usize {
    a.div_ceil(b)
}

/// Row and column line patterns for the core region.
fn core_lines(kind: LayoutKind, n: usize) -> Result<(Vec<Line>, Vec<Line>)> {
    let n = n.max(1);
    Ok(match kind {
        LayoutKind::SquareSparse => {
            let c = (n as f64).sqrt().ceil() as usize;
            let r = ceil_div(n, c);
            (sparse_lines(r), sparse_lines(c))
        }
        LayoutKind::HalfFilling => {
            // Height 2r+1 against width c+2, so c ~ 2r.
            let r = ((n as f64 / 2.0).sqrt().ceil() as usize).max(1);
            let c = ceil_div(n, r);
            (sparse_lines(r), framed(c))
        }
        LayoutKind::TwoThirdsFilling => {
            // b bands of two data rows: height 3b+1 against width c+2.
            let b = (1..)
                .find(|&b| 2 * b * (3 * b - 1) >= n)
                .expect("unbounded search");
            let c = ceil_div(n, 2 * b);
            let mut rows = vec![Line::A];
            for _ in 0..b {
                rows.extend([Line::D, Line::D, Line::A]);
            }
            (rows, framed(c))
        }
        LayoutKind::Compact => {
            // b bands of D A D: height 3b against width c+2.
            let b = (1..)
                .find(|&b: &usize| 2 * b * (3 * b).saturating_sub(2).max(1) >= n)
                .expect("unbounded search");
            let c = ceil_div(n, 2 * b);
            let mut rows = Vec::new();
            for _ in 0..b {
                rows.extend([Line::D, Line::A, Line::D]);
            }
            (rows, framed(c))
        }
        LayoutKind::Custom => {
            return Err(Error::Layout(
                "custom layouts are loaded from JSON, not built".into(),
            ))
        }
    })
}

/// Boundary ring sites (excluding corners) that touch a core ancilla,
/// clockwise from the top-left.
fn usable_sites(roles: &[Vec<Role>]) -> Vec<Coord> {
    let h = roles.len() as i32;
    let w = roles[0].len() as i32;
    let mut ring = Vec::new();
    for c in 1..w - 1 {
        ring.push(Coord::new(0, c));
    }
    for r in 1..h - 1 {
        ring.push(Coord::new(r, w - 1));
    }
    for c in (1..w - 1).rev() {
        ring.push(Coord::new(h - 1, c));
    }
    for r in (1..h - 1).rev() {
        ring.push(Coord::new(r, 0));
    }
    ring.into_iter()
        .filter(|s| {
            s.neighbors().iter().any(|n| {
                n.row > 0
                    && n.col > 0
                    && n.row < h - 1
                    && n.col < w - 1
                    && roles[n.row as usize][n.col as usize] == Role::Ancilla
            })
        })
        .collect()
}

fn choose_ms(sites: &[Coord], h: usize, w: usize, density: MsDensity, n: usize) -> Vec<Coord> {
    match density {
        // Nearest usable site per corner; ties prefer the top and bottom edges.
        MsDensity::Starved => {
            let (h, w) = (h as i32 - 1, w as i32 - 1);
            let corners = [
                Coord::new(0, 0),
                Coord::new(0, w),
                Coord::new(h, w),
                Coord::new(h, 0),
            ];
            let mut chosen: Vec<Coord> = Vec::new();
            for corner in corners {
                if let Some(&s) = sites
                    .iter()
                    .filter(|s| !chosen.contains(s))
                    .min_by_key(|s| (s.manhattan(corner), s.col == 0 || s.col == w, **s))
                {
                    chosen.push(s);
                }
            }
            chosen
        }
        MsDensity::Abundant => {
            let m = n.max(4).min(sites.len());
            (0..m).map(|i| sites[i * sites.len() / m]).collect()
        }
    }
}

/// Deterministic layout for `n_qubits` logical qubits. Qubit `q` sits on
/// the `q`-th data cell in row-major order.
pub fn build_layout(kind: LayoutKind, n_qubits: usize, ms_density: MsDensity) -> Result<LayoutGrid> {
    let (rows, cols) = core_lines(kind, n_qubits)?;
    let (h, w) = (rows.len() + 2, cols.len() + 2);
    let mut roles = vec![vec![Role::Wall; w]; h];
    let mut placed = 0;
    let mut placement = Vec::with_capacity(n_qubits);
    for (r, &rl) in rows.iter().enumerate() {
        for (c, &cl) in cols.iter().enumerate() {
            let cell = &mut roles[r + 1][c + 1];
            if rl == Line::D && cl == Line::D && placed < n_qubits {
                *cell = Role::Data;
                placement.push(Coord::new(r as i32 + 1, c as i32 + 1));
                placed += 1;
            } else {
                *cell = Role::Ancilla;
            }
        }
    }
    let sites = usable_sites(&roles);
    for s in choose_ms(&sites, h, w, ms_density, n_qubits) {
        roles[s.row as usize][s.col as usize] = Role::MagicState;
    }
    let grid = LayoutGrid::from_roles(&roles, placement, kind, ms_density)?;
    grid.check_routability()?;
    Ok(grid)
}
