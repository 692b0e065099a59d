mod common;

use std::collections::HashSet;

use common::{all_coords, batch_span_by_hand, brute_steiner, exhaustive_shortest, random_grid, tau_by_hand, Rng};
use ls_sched::circuit::{gen_qaoa, RzDecomposition, SynthGate};
use ls_sched::cost::{merge_cost, CostConfig};
use ls_sched::exec::{execute_slices, greedy_compile};
use ls_sched::layout::{build_layout, Coord, LayoutKind, MsDensity, Role};
use ls_sched::rotation::{realize_msd_group, Regime, RotationSettings};
use ls_sched::routing::{bfs_path, steiner_tree};
use ls_sched::schedule::check_schedule;
use ls_sched::Cycles;
use proptest::prelude::*;

fn data_cells(g: &ls_sched::layout::LayoutGrid) -> Vec<Coord> {
    all_coords(g)
        .into_iter()
        .filter(|&c| g.role(c) == Some(Role::Data))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn msd_span_matches_the_batch_formula(seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        let g = random_grid(&mut rng, 8, 0.15);
        let cfg = CostConfig::default();
        let targets = data_cells(&g);
        prop_assume!(!targets.is_empty());
        let jobs: Vec<(Coord, RzDecomposition)> = targets
            .iter()
            .take(1 + rng.below(5))
            .map(|&t| {
                let seq: Vec<SynthGate> = (0..rng.below(4))
                    .map(|_| [SynthGate::T, SynthGate::S, SynthGate::H][rng.below(3)])
                    .collect();
                (t, RzDecomposition::from_sequence(seq, 6))
            })
            .collect();
        let Ok(plan) = realize_msd_group(&g, &jobs, &cfg, 4) else {
            return Err(TestCaseError::reject("a target cannot reach any magic state"));
        };
        prop_assert_eq!(plan.span, batch_span_by_hand(&plan, &cfg));
        for batch in &plan.batches {
            let mut used = HashSet::new();
            for a in batch {
                let route_cost = match &a.route {
                    Some(r) => {
                        for c in &r.cells {
                            prop_assert!(used.insert(*c), "batch shares {c}");
                        }
                        merge_cost(&r.path(), &g, &cfg).unwrap().total
                    }
                    None => Cycles::ZERO,
                };
                prop_assert_eq!(a.tau, tau_by_hand(&jobs[a.job].1, route_cost, &cfg));
            }
        }
    }

    #[test]
    fn bfs_is_shortest(seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        let g = random_grid(&mut rng, 6, 0.2);
        let d = data_cells(&g);
        prop_assume!(d.len() >= 2);
        let (a, b) = (d[rng.below(d.len())], d[rng.below(d.len())]);
        prop_assume!(a != b);
        let blocked: HashSet<Coord> = all_coords(&g)
            .into_iter()
            .filter(|_| rng.chance(0.1))
            .collect();
        let got = bfs_path(&g, a, b, &blocked);
        let want = exhaustive_shortest(&g, a, b, &blocked);
        prop_assert_eq!(got.as_ref().map(Vec::len), want);
        if let Some(p) = got {
            prop_assert!(p[0].is_adjacent(a) && p[p.len() - 1].is_adjacent(b));
            prop_assert!(p.windows(2).all(|w| w[0].is_adjacent(w[1])));
            prop_assert!(p.iter().all(|c| g.is_ancilla(*c) && !blocked.contains(c)));
        }
    }

    #[test]
    fn steiner_within_twice_optimum(seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        let g = random_grid(&mut rng, 4, 0.1);
        let d = data_cells(&g);
        prop_assume!(d.len() >= 2);
        let root = d[0];
        let terminals: Vec<Coord> = d[1..].iter().copied().take(4).collect();
        let tree = steiner_tree(&g, root, &terminals, &HashSet::new());
        let opt = brute_steiner(&g, root, &terminals, 16);
        match (tree, opt) {
            (Some(t), Some(o)) => {
                prop_assert!(t.tree_cells.len() <= 2 * o, "{} > 2·{}", t.tree_cells.len(), o);
                for term in &terminals {
                    prop_assert!(t.full_path(*term).is_some());
                }
            }
            (None, None) => {}
            // Nearest-terminal attachment never rejects a connectable set.
            (t, o) => prop_assert!(false, "tree {:?} vs optimum {:?}", t.map(|t| t.tree_cells.len()), o),
        }
    }

    #[test]
    fn standard_layouts_hold_their_invariants(n in 1usize..80, k in 0usize..4, abundant in any::<bool>()) {
        let kind = LayoutKind::STANDARD[k];
        let density = if abundant { MsDensity::Abundant } else { MsDensity::Starved };
        let g = build_layout(kind, n, density).unwrap();
        prop_assert_eq!(g.num_qubits(), n);
        let placed: HashSet<Coord> = g.placement().iter().copied().collect();
        prop_assert_eq!(placed.len(), n);
        prop_assert!(placed.iter().all(|&c| g.role(c) == Some(Role::Data)));
        prop_assert!(g.check_routability().is_ok());
        let ms: HashSet<Coord> = g.ms_patches.iter().copied().collect();
        prop_assert_eq!(ms.len(), g.ms_patches.len());
        prop_assert!(ms.iter().all(|&c| g.role(c) == Some(Role::MagicState)));
        if abundant {
            let starved = build_layout(kind, n, MsDensity::Starved).unwrap();
            prop_assert!(g.ms_patches.len() >= starved.ms_patches.len());
        } else {
            prop_assert!(g.ms_patches.len() <= 4 && !g.ms_patches.is_empty());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn greedy_and_slice_totals_recompute(seed in any::<u64>(), n in 2usize..7, k in 0usize..4, r in 0usize..3) {
        let circ = gen_qaoa(n, 0.5, seed).unwrap();
        let cfg = CostConfig::default();
        let settings = RotationSettings::new(Regime::ALL[r]);
        let base = build_layout(LayoutKind::STANDARD[k], n, MsDensity::Starved).unwrap();
        let greedy = greedy_compile(&circ, &mut base.clone(), &cfg, &settings).unwrap();
        prop_assert_eq!(greedy.recomputed_total(&cfg), greedy.total);
        prop_assert!(check_schedule(&greedy.output.schedule, &circ).is_empty());
        let slice = execute_slices(&circ, &mut base.clone(), &cfg, &settings).unwrap();
        prop_assert_eq!(slice.recomputed_total(&cfg), slice.output.schedule.total_cycles);
        prop_assert!(check_schedule(&slice.output.schedule, &circ).is_empty());
    }
}

