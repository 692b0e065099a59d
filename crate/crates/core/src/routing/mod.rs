//! Path search over free ancilla cells.

mod batch;
mod bfs;
mod steiner;

use std::collections::HashSet;

use serde::Serialize;

use crate::circuit::GateId;
use crate::cost::{merge_cost, required_orientations, CostConfig, PathCost};
use crate::error::Result;
use crate::layout::{Coord, LayoutGrid, Orientation};

pub use batch::{first_routable, form_batches};
pub use bfs::{bfs_cells, bfs_path, bfs_route, distance_field};
pub use steiner::{steiner_tree, SteinerFootprint};

/// Cells a search must avoid on top of the grid's own occupancy.
pub type Blocked = HashSet<Coord>;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Route {
    pub gate_id: Option<GateId>,
    pub endpoints: (Coord, Coord),
    /// Interior ancilla cells from the first endpoint to the second.
    pub cells: Vec<Coord>,
    pub cost: PathCost,
}

impl Route {
    pub fn new(
        gate_id: Option<GateId>,
        src: Coord,
        dst: Coord,
        cells: Vec<Coord>,
        grid: &LayoutGrid,
        config: &CostConfig,
    ) -> Result<Self> {
        let mut path = Vec::with_capacity(cells.len() + 2);
        path.push(src);
        path.extend_from_slice(&cells);
        path.push(dst);
        let cost = merge_cost(&path, grid, config)?;
        Ok(Route {
            gate_id,
            endpoints: (src, dst),
            cells,
            cost,
        })
    }

    /// Endpoint-inclusive path.
    pub fn path(&self) -> Vec<Coord> {
        let mut p = Vec::with_capacity(self.cells.len() + 2);
        p.push(self.endpoints.0);
        p.extend_from_slice(&self.cells);
        p.push(self.endpoints.1);
        p
    }

    pub fn orientation_updates(&self) -> Vec<(Coord, Orientation)> {
        required_orientations(&self.path())
    }
}
