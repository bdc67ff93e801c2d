mod common;

use common::{elimination_game_width, permutation_min_width, random_graph, random_poset, rng};
use dtw_core::chain::{min_width_via_chains, ChainSearch};
use dtw_core::decomp::{
    check_compatibility, decomposition_to_ordering, fill_in_graph, ordering_to_decomposition, ordering_width,
    validate_decomposition,
};
use dtw_core::game::{decomposition_to_strategy, treewidth_via_game, validate_strategy};
use dtw_core::oracle::brute_force_min_width;
use dtw_core::{DependencyPoset, EliminationOrdering, PrimalGraph, Var};
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn graph_and_poset() -> impl Strategy<Value = (PrimalGraph, DependencyPoset)> {
    (1usize..=7, any::<u64>(), 0.1f64..0.8, 0.0f64..0.5).prop_map(|(n, seed, gd, pd)| {
        let mut r = rng(seed);
        (random_graph(&mut r, n, gd), random_poset(&mut r, n, pd))
    })
}

/// A random ordering compatible with `p`: repeatedly eliminate a random
/// element with nothing above it left.
fn random_compatible(p: &DependencyPoset, seed: u64) -> EliminationOrdering {
    let mut r = rng(seed);
    let mut left: Vec<Var> = p.elements().to_vec();
    let mut out = Vec::new();
    while !left.is_empty() {
        let maximal: Vec<Var> = left
            .iter()
            .copied()
            .filter(|&a| left.iter().all(|&b| a == b || !p.leq(a, b)))
            .collect();
        let pick = *maximal.choose(&mut r).unwrap();
        left.retain(|&v| v != pick);
        out.push(pick);
    }
    EliminationOrdering::new(out)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn width_algorithms_agree((g, p) in graph_and_poset()) {
        let oracle = permutation_min_width(&g, &p);
        prop_assert_eq!(brute_force_min_width(&g, &p).unwrap(), oracle);
        let (chain, order) = min_width_via_chains(&g, &p).unwrap();
        prop_assert_eq!(chain, oracle);
        prop_assert!(check_compatibility(&order, &p).unwrap());
        prop_assert_eq!(ordering_width(&g, &order).unwrap(), chain);
        let game = treewidth_via_game(&g, &p, g.len()).unwrap();
        prop_assert_eq!(game.width, Some(oracle));
        let unconstrained = permutation_min_width(&g, &DependencyPoset::discrete(g.vertices().to_vec()));
        prop_assert!(oracle >= unconstrained);
    }

    #[test]
    fn fill_in_graph_is_the_elimination_closure((g, p) in graph_and_poset(), seed in any::<u64>()) {
        let order = random_compatible(&p, seed);
        let h = fill_in_graph(&g, &order).unwrap();
        prop_assert_eq!(h.width(), elimination_game_width(&g, order.as_slice()));
        // closed: later neighbors of each vertex are pairwise adjacent
        for i in 0..g.len() {
            let later: Vec<usize> = h.later_neighbors_idx(i).ones().collect();
            for &a in &later {
                for &b in &later {
                    prop_assert!(a == b || h.has_edge_idx(a, b));
                }
            }
        }
        // minimal: every fill edge is forced by some earlier common neighbor
        let pos = order.positions(&g).unwrap();
        for &(u, v) in h.fill_edges() {
            prop_assert!(!g.has_edge(u, v));
            let (a, b) = (g.index_of(u).unwrap(), g.index_of(v).unwrap());
            let forced = (0..g.len()).any(|w| {
                pos[w] < pos[a] && pos[w] < pos[b] && h.has_edge_idx(w, a) && h.has_edge_idx(w, b)
            });
            prop_assert!(forced);
        }
    }

    #[test]
    fn ordering_decomposition_round_trip((g, p) in graph_and_poset(), seed in any::<u64>()) {
        let order = random_compatible(&p, seed);
        let w = ordering_width(&g, &order).unwrap();
        let td = ordering_to_decomposition(&g, &p, &order).unwrap();
        let report = validate_decomposition(&g, &p, &td);
        prop_assert!(report.is_valid(), "{:?}", report.violations);
        if g.num_edges() > 0 {
            prop_assert_eq!(td.width(), w);
        } else {
            prop_assert!(td.width() <= w);
        }
        let back = decomposition_to_ordering(&g, &p, &td).unwrap();
        prop_assert!(check_compatibility(&back, &p).unwrap());
        prop_assert!(ordering_width(&g, &back).unwrap() <= td.width());

        let strategy = decomposition_to_strategy(&td, &g, &p).unwrap();
        prop_assert!(validate_strategy(&g, &p, &strategy).is_empty());
        prop_assert!(strategy.max_cops() <= td.width() + 1);
    }

    #[test]
    fn memoization_is_sound((g, p) in graph_and_poset()) {
        for omega in 0..g.len() {
            let mut fast = ChainSearch::new(&g, &p).unwrap();
            let mut slow = ChainSearch::new(&g, &p).unwrap().memoize(false);
            let a = fast.find(omega);
            let b = slow.find(omega);
            prop_assert_eq!(a.is_some(), b.is_some());
            prop_assert!(fast.states_visited() as u128 <= fast.state_bound());
            if let Some(o) = a {
                prop_assert!(check_compatibility(&o, &p).unwrap());
                prop_assert!(ordering_width(&g, &o).unwrap() <= omega);
            }
        }
    }
}

#[test]
fn fill_in_examples() {
    let path = PrimalGraph::from_edges([1, 2, 3], [(1, 2), (2, 3)]).unwrap();
    let h = fill_in_graph(&path, &EliminationOrdering::new(vec![2, 1, 3])).unwrap();
    assert_eq!(h.fill_edges(), &[(1, 3)]);
    assert_eq!(h.width(), 2);
    let c4 = PrimalGraph::from_edges([1, 2, 3, 4], [(1, 2), (2, 3), (3, 4), (1, 4)]).unwrap();
    assert_eq!(ordering_width(&c4, &EliminationOrdering::new(vec![1, 2, 3, 4])).unwrap(), 2);
}

#[test]
fn oracle_refuses_large_graphs() {
    let g = PrimalGraph::from_edges(1..=10, []).unwrap();
    assert!(brute_force_min_width(&g, &DependencyPoset::discrete(1..=10)).is_err());
}
