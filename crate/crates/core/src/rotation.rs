//! Stage-B realization of the target rotation under three regimes.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::circuit::{synthesize_rz, RzDecomposition, RzProvider, SynthGate};
use crate::cost::{batch_latency, merge_cost, required_orientations, rz_sequence_cost, CostConfig};
use crate::cycles::Cycles;
use crate::error::{Error, Result};
use crate::layout::{Coord, LayoutGrid};
use crate::routing::{bfs_route, form_batches, Blocked, Route};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// Continuous-angle state injection next to the target.
    #[serde(rename = "eft")]
    Eft,
    /// Clifford+T with T states routed in from factory patches.
    #[serde(rename = "fft-msd")]
    FftMsd,
    /// Clifford+T with T states cultivated next to the target.
    #[serde(rename = "fft-msc")]
    FftMsc,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::Eft, Regime::FftMsd, Regime::FftMsc];

    pub fn cli_name(self) -> &'static str {
        match self {
            Regime::Eft => "eft",
            Regime::FftMsd => "fft-msd",
            Regime::FftMsc => "fft-msc",
        }
    }
}

/// Regime plus the synthesis knobs the FFT regimes need.
#[derive(Clone, Debug, PartialEq)]
pub struct RotationSettings {
    pub regime: Regime,
    pub epsilon: u32,
    pub provider: RzProvider,
    /// Top-k cutoff for magic-state patch selection.
    pub k: usize,
}

impl RotationSettings {
    pub fn new(regime: Regime) -> Self {
        RotationSettings {
            regime,
            epsilon: 6,
            provider: RzProvider::Model,
            k: 4,
        }
    }

    pub fn decompose(&self, angle: f64) -> Result<RzDecomposition> {
        synthesize_rz(angle, self.epsilon, &self.provider)
    }
}

/// Lowest free ancilla beside `target` that is not in `blocked`.
pub fn eft_site(grid: &LayoutGrid, target: Coord, blocked: &Blocked) -> Option<Coord> {
    grid.neighbors(target)
        .find(|&n| grid.is_free_ancilla(n) && !blocked.contains(&n))
}

/// Distinct injection sites for simultaneous targets, claimed in order.
/// `None` marks a target that must wait.
pub fn eft_assign(grid: &LayoutGrid, targets: &[Coord]) -> Vec<Option<Coord>> {
    let mut claimed = Blocked::new();
    targets
        .iter()
        .map(|&t| {
            let s = eft_site(grid, t, &claimed)?;
            claimed.insert(s);
            Some(s)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MsSelection {
    pub target: Coord,
    pub candidates: Vec<Coord>,
    pub chosen: Coord,
    pub chosen_cost: Cycles,
    pub route: Route,
    pub k: usize,
}

/// Magic-state patches sorted by Manhattan distance to `target`, ties by
/// coordinate.
pub fn patches_by_distance(grid: &LayoutGrid, target: Coord) -> Vec<Coord> {
    let mut v = grid.ms_patches.clone();
    v.sort_by_key(|&m| (m.manhattan(target), m));
    v
}

/// Evaluate the `k` nearest patches and keep the cheapest routable one
/// (ties to the nearer). Patches in `blocked` or held by a reservation are
/// skipped. `Ok(None)` means every candidate is unroutable right now.
pub fn select_ms_patch(
    grid: &LayoutGrid,
    target: Coord,
    blocked: &Blocked,
    config: &CostConfig,
    k: usize,
) -> Result<Option<MsSelection>> {
    if grid.ms_patches.is_empty() {
        return Err(Error::Config("layout has no magic-state patches".into()));
    }
    let candidates: Vec<Coord> = patches_by_distance(grid, target).into_iter().take(k.max(1)).collect();
    let mut best: Option<Route> = None;
    for &m in &candidates {
        if blocked.contains(&m) || grid.occupant(m).is_some() {
            continue;
        }
        if let Some(r) = bfs_route(grid, None, m, target, blocked, config) {
            if best.as_ref().is_none_or(|b| r.cost.total < b.cost.total) {
                best = Some(r);
            }
        }
    }
    Ok(best.map(|route| MsSelection {
        target,
        candidates,
        chosen: route.endpoints.0,
        chosen_cost: route.cost.total,
        route,
        k,
    }))
}

/// Nearest routable patch: the baseline's choice.
pub fn nearest_routable_patch(grid: &LayoutGrid, target: Coord, blocked: &Blocked, config: &CostConfig) -> Option<Route> {
    patches_by_distance(grid, target)
        .into_iter()
        .filter(|m| !blocked.contains(m) && grid.occupant(*m).is_none())
        .find_map(|m| bfs_route(grid, None, m, target, blocked, config))
}

/// τ = τ_route · n_T + t_S · n_S + t_H · n_H, where τ_route is the cost of
/// the T route (zero when no T is needed).
pub fn msd_tau(dec: &RzDecomposition, route: Option<&Route>, config: &CostConfig) -> Cycles {
    let tau_route = route.map_or(Cycles::ZERO, |r| r.cost.total);
    rz_sequence_cost(dec, tau_route, config)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MsdAssignment {
    pub job: usize,
    pub route: Option<Route>,
    pub tau: Cycles,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MsdGroupPlan {
    pub batches: Vec<Vec<MsdAssignment>>,
    pub span: Cycles,
}

impl MsdGroupPlan {
    pub fn batch_maxima(&self) -> Vec<Cycles> {
        self.batches
            .iter()
            .map(|b| b.iter().map(|a| a.tau).max().unwrap_or(Cycles::ZERO))
            .collect()
    }
}

/// Batch the T routes of one group's targets. Jobs with no T join the
/// first batch without a route.
pub fn realize_msd_group(
    grid: &LayoutGrid,
    jobs: &[(Coord, RzDecomposition)],
    config: &CostConfig,
    k: usize,
) -> Result<MsdGroupPlan> {
    if jobs.is_empty() {
        return Ok(MsdGroupPlan {
            batches: Vec::new(),
            span: Cycles::ZERO,
        });
    }
    let routed: Vec<usize> = (0..jobs.len()).filter(|&j| jobs[j].1.n_t > 0).collect();
    let mut selection_error = None;
    let raw = form_batches(grid, routed.len(), |g, i, blocked| {
        match select_ms_patch(g, jobs[routed[i]].0, blocked, config, k) {
            Ok(sel) => sel.map(|s| s.route),
            Err(e) => {
                selection_error.get_or_insert(e);
                None
            }
        }
    });
    if let Some(e) = selection_error {
        return Err(e);
    }
    let mut batches: Vec<Vec<MsdAssignment>> = raw?
        .into_iter()
        .map(|b| {
            b.into_iter()
                .map(|(i, r)| {
                    let j = routed[i];
                    MsdAssignment {
                        job: j,
                        tau: msd_tau(&jobs[j].1, Some(&r), config),
                        route: Some(r),
                    }
                })
                .collect()
        })
        .collect();
    let free: Vec<MsdAssignment> = (0..jobs.len())
        .filter(|&j| jobs[j].1.n_t == 0)
        .map(|j| MsdAssignment {
            job: j,
            route: None,
            tau: msd_tau(&jobs[j].1, None, config),
        })
        .collect();
    if batches.is_empty() {
        batches.push(free);
    } else {
        batches[0].extend(free);
    }
    let mut plan = MsdGroupPlan {
        batches,
        span: Cycles::ZERO,
    };
    plan.span = batch_latency(&plan.batch_maxima(), config)?;
    Ok(plan)
}

/// Per-cell cultivation clocks. A cell has been growing a magic state
/// since the last time a route or a consumption ended on it.
#[derive(Clone, Debug, Default)]
pub struct CultivationClock {
    since: HashMap<Coord, Cycles>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MscRun {
    pub site: Coord,
    pub end: Cycles,
    /// Total time spent waiting for cultivation.
    pub wait: Cycles,
    pub t_count: usize,
}

impl CultivationClock {
    pub fn since(&self, c: Coord) -> Cycles {
        self.since.get(&c).copied().unwrap_or(Cycles::ZERO)
    }

    pub fn ready_at(&self, c: Coord, config: &CostConfig) -> Cycles {
        self.since(c) + config.t_cult
    }

    /// Restart cultivation on `cells` at time `t`.
    pub fn touch(&mut self, cells: impl IntoIterator<Item = Coord>, t: Cycles) {
        for c in cells {
            self.since.insert(c, t);
        }
    }

    /// Free adjacent ancilla whose state is ready soonest, ties by coordinate.
    pub fn choose_site(&self, grid: &LayoutGrid, target: Coord, blocked: &Blocked) -> Option<Coord> {
        grid.neighbors(target)
            .filter(|&n| grid.is_free_ancilla(n) && !blocked.contains(&n))
            .min_by_key(|&n| (self.since(n), n))
    }

    /// Play the synthesized sequence on `target` from `start`, consuming T
    /// states from `site`. Each T waits for the site to finish cultivating,
    /// then costs one merge between the target and the site.
    pub fn consume(
        &mut self,
        grid: &mut LayoutGrid,
        target: Coord,
        site: Coord,
        start: Cycles,
        dec: &RzDecomposition,
        config: &CostConfig,
    ) -> Result<MscRun> {
        let path = [target, site, target];
        let mut t = start;
        let mut wait = Cycles::ZERO;
        for g in &dec.sequence {
            match g {
                SynthGate::T => {
                    let ready = self.ready_at(site, config);
                    if ready > t {
                        wait += ready - t;
                        t = ready;
                    }
                    t += merge_cost(&path, grid, config)?.total;
                    grid.update_orientation(&required_orientations(&path));
                    self.touch([site], t);
                }
                SynthGate::S => t += config.t_s,
                SynthGate::H => t += config.t_h,
            }
        }
        Ok(MscRun {
            site,
            end: t,
            wait,
            t_count: dec.n_t,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::{build_layout, LayoutKind, MsDensity};
    use SynthGate::*;

    fn corridor() -> LayoutGrid {
        LayoutGrid::from_ascii(&["#M##", "#A##", "#A##", "#A##", "#AAA", "#D#M"], MsDensity::Starved).unwrap()
    }

    #[test]
    fn eft_picks_lowest_neighbor() {
        let g = build_layout(LayoutKind::SquareSparse, 4, MsDensity::Starved).unwrap();
        let d = g.position(0).unwrap();
        assert_eq!(eft_site(&g, d, &Blocked::new()), Some(Coord::new(d.row - 1, d.col)));
    }

    #[test]
    fn eft_shared_site_stalls_one() {
        let g = LayoutGrid::from_ascii(&["DAD"], MsDensity::Starved).unwrap();
        let sites = eft_assign(&g, &[Coord::new(0, 0), Coord::new(0, 2)]);
        assert_eq!(sites, vec![Some(Coord::new(0, 1)), None]);
    }

    #[test]
    fn eft_five_targets_inject_concurrently() {
        let g = build_layout(LayoutKind::SquareSparse, 6, MsDensity::Starved).unwrap();
        let targets: Vec<_> = (1..6).map(|q| g.position(q).unwrap()).collect();
        let sites: Vec<_> = eft_assign(&g, &targets).into_iter().map(Option::unwrap).collect();
        let distinct: std::collections::BTreeSet<_> = sites.iter().collect();
        assert_eq!(distinct.len(), 5);
    }

    #[test]
    fn top_k_prefers_the_straight_far_corridor() {
        let g = corridor();
        let cfg = CostConfig::default();
        let t = Coord::new(5, 1);
        let near = select_ms_patch(&g, t, &Blocked::new(), &cfg, 1).unwrap().unwrap();
        let far = select_ms_patch(&g, t, &Blocked::new(), &cfg, 4).unwrap().unwrap();
        assert_eq!((near.chosen, near.chosen_cost), (Coord::new(5, 3), Cycles::int(4)));
        assert_eq!((far.chosen, far.chosen_cost), (Coord::new(0, 1), Cycles::int(3)));
        assert_eq!(far.candidates.len(), 2);
    }

    #[test]
    fn no_patch_is_a_config_error() {
        let g = LayoutGrid::from_ascii(&["DAD"], MsDensity::Starved).unwrap();
        assert!(select_ms_patch(&g, Coord::new(0, 0), &Blocked::new(), &CostConfig::default(), 4).is_err());
    }

    #[test]
    fn msd_batches_follow_the_formula() {
        let cfg = CostConfig::default();
        let dec = |n: usize| RzDecomposition::from_sequence(vec![T; n], 6);
        // Disjoint corridors: one batch, span is the larger τ.
        let g = LayoutGrid::from_ascii(&["MAD", "###", "MAD"], MsDensity::Starved).unwrap();
        let jobs = [(Coord::new(0, 2), dec(2)), (Coord::new(2, 2), dec(3))];
        let p = realize_msd_group(&g, &jobs, &cfg, 4).unwrap();
        assert_eq!(p.batches.len(), 1);
        assert_eq!(p.span, Cycles::int(12));
        // Shared corridor: two batches and one reset.
        let g = LayoutGrid::from_ascii(&["M#D", "AAA", "M#D"], MsDensity::Starved).unwrap();
        let jobs = [(Coord::new(0, 2), dec(2)), (Coord::new(2, 2), dec(3))];
        let p = realize_msd_group(&g, &jobs, &cfg, 4).unwrap();
        assert_eq!(p.batches.len(), 2);
        let maxima = p.batch_maxima();
        assert_eq!(p.span, maxima[0] + maxima[1] + Cycles::int(1));
    }

    #[test]
    fn msd_job_without_t_needs_no_route() {
        let g = corridor();
        let jobs = [(Coord::new(5, 1), RzDecomposition::from_sequence(vec![S, H, S], 6))];
        let p = realize_msd_group(&g, &jobs, &CostConfig::default(), 4).unwrap();
        assert!(p.batches[0][0].route.is_none());
        assert_eq!(p.span, Cycles::int(4));
    }

    #[test]
    fn cultivation_waits() {
        let cfg = CostConfig::default();
        let mut g = LayoutGrid::from_ascii(&["DA"], MsDensity::Starved).unwrap();
        let (d, s) = (Coord::new(0, 0), Coord::new(0, 1));
        let mut clock = CultivationClock::default();
        // One T long after the site started: no wait, one horizontal merge.
        let one = RzDecomposition::from_sequence(vec![T], 6);
        let r = clock.consume(&mut g, d, s, Cycles::int(5), &one, &cfg).unwrap();
        assert_eq!((r.wait, r.end), (Cycles::ZERO, Cycles::int(9)));
        // Two back-to-back Ts: the second waits the full cultivation time.
        let two = RzDecomposition::from_sequence(vec![T, T], 6);
        let r = clock.consume(&mut g, d, s, Cycles::int(9), &two, &cfg).unwrap();
        assert_eq!(r.wait, Cycles::new(19, 5));
        assert_eq!(r.end, Cycles::int(9) + Cycles::new(19, 10) * 2 + Cycles::int(6));
    }

    #[test]
    fn site_choice_prefers_the_older_clock() {
        let g = build_layout(LayoutKind::SquareSparse, 1, MsDensity::Starved).unwrap();
        let d = g.position(0).unwrap();
        let mut clock = CultivationClock::default();
        let up = Coord::new(d.row - 1, d.col);
        clock.touch([up], Cycles::int(3));
        assert_eq!(clock.choose_site(&g, d, &Blocked::new()), Some(Coord::new(d.row, d.col - 1)));
    }
}
