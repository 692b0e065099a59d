use super::{Blocked, Route};
use crate::error::{Error, Result};
use crate::layout::{Coord, LayoutGrid};

/// Greedy batching in job order. `route` picks a source for job `i` and
/// routes it while avoiding `blocked`, which holds every cell and source
/// patch already used in the open batch. A job that fails is deferred to
/// the next batch; a job that fails on a fresh batch is a layout error.
pub fn form_batches<F>(grid: &LayoutGrid, n_jobs: usize, mut route: F) -> Result<Vec<Vec<(usize, Route)>>>
where
    F: FnMut(&LayoutGrid, usize, &Blocked) -> Option<Route>,
{
    let mut pending: Vec<usize> = (0..n_jobs).collect();
    let mut batches = Vec::new();
    while !pending.is_empty() {
        let mut blocked = Blocked::new();
        let mut batch = Vec::new();
        let mut deferred = Vec::new();
        for &j in &pending {
            match route(grid, j, &blocked) {
                Some(r) => {
                    blocked.extend(r.cells.iter().copied());
                    blocked.insert(r.endpoints.0);
                    batch.push((j, r));
                }
                None => deferred.push(j),
            }
        }
        if batch.is_empty() {
            return Err(Error::Layout(format!("job {} has no route on a fresh batch", pending[0])));
        }
        batches.push(batch);
        pending = deferred;
    }
    Ok(batches)
}

/// Source picker for [`form_batches`]: the first listed source with a
/// route to `target`.
pub fn first_routable(
    grid: &LayoutGrid,
    target: Coord,
    sources: &[Coord],
    blocked: &Blocked,
    config: &crate::cost::CostConfig,
) -> Option<Route> {
    sources
        .iter()
        .filter(|s| !blocked.contains(s))
        .find_map(|&s| super::bfs_route(grid, None, s, target, blocked, config))
}
